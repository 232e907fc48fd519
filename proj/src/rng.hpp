// SPDX-License-Identifier: Apache-2.0
//
// nomabeam — sum-rate maximization for NOMA MISO downlinks via successive
// second-order cone programming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef nomabeam_rng_H
#define nomabeam_rng_H

#include <complex>
#include <cstdint>
#include <random>

namespace noma {

// Seeded random stream. Gaussian variates use the polar (Marsaglia) method on
// top of mt19937_64 so that a given seed reproduces the same sequence on any
// platform, independent of the standard library's distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    // Independent substream derived from (master seed, stream index).
    static Rng stream(std::uint64_t master, std::uint64_t index);

    std::uint64_t next_u64();
    double uniform();  // [0, 1)
    double gaussian(); // N(0, 1)

    // Circularly symmetric CN(0, 1): real and imaginary parts N(0, 1/2).
    std::complex<double> cgaussian();

    // Uniform integer in [0, bound), bound >= 1.
    std::uint64_t below(std::uint64_t bound);

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// SplitMix64 step, used for seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

} // namespace noma

#endif
