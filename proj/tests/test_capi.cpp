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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nomabeam.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

using doctest::Approx;

namespace {

struct ConfigGuard {
    nb_config* handle = nullptr;
    ~ConfigGuard() { nb_config_close(handle); }
};

struct RunGuard {
    nb_run* handle = nullptr;
    ~RunGuard() { nb_run_close(handle); }
};

} // namespace

TEST_CASE("config lifecycle and errors") {
    SUBCASE("defaults parse and validate") {
        ConfigGuard cfg;
        REQUIRE(nb_config_default(&cfg.handle) == NB_OK);
        CHECK(nb_config_set(cfg.handle, "users", "2") == NB_OK);
        CHECK(nb_config_set(cfg.handle, "trials", "0") == NB_ERR_CONFIG);
        CHECK(std::string(nb_last_error()).find("trials") != std::string::npos);
        CHECK(nb_config_set(cfg.handle, "unknown_key", "1") == NB_ERR_CONFIG);
    }
    SUBCASE("text parse rejects bad configs with NB_ERR_CONFIG") {
        nb_config* raw = nullptr;
        CHECK(nb_config_parse("users = -3\n", &raw) == NB_ERR_CONFIG);
        CHECK(raw == nullptr);
    }
    SUBCASE("missing file") {
        nb_config* raw = nullptr;
        CHECK(nb_config_open("/nonexistent/path.cfg", &raw) == NB_ERR_CONFIG);
    }
    SUBCASE("null arguments") {
        CHECK(nb_config_parse(nullptr, nullptr) == NB_ERR_INVALID_ARGUMENT);
        CHECK(nb_run_sweep(nullptr, "out", 0) == NB_ERR_INVALID_ARGUMENT);
    }
    SUBCASE("status strings are stable") {
        CHECK(std::string(nb_status_message(NB_OK)) == "ok");
        CHECK(std::string(nb_status_message(NB_ERR_CONFIG)) == "configuration error");
    }
}

TEST_CASE("solve one instance through the C surface") {
    ConfigGuard cfg;
    REQUIRE(nb_config_parse("scenario = capi\n"
                            "antennas = 3\n"
                            "users = 2\n"
                            "sigma = 1\n"
                            "d0 = 20\n"
                            "seed = 13\n",
                            &cfg.handle) == NB_OK);
    RunGuard run;
    REQUIRE(nb_solve_one(cfg.handle, 15.0, "cnoma", &run.handle) == NB_OK);
    CHECK(nb_run_users(run.handle) == 2);
    CHECK(nb_run_antennas(run.handle) == 3);
    CHECK(nb_run_sum_rate(run.handle) > 0.0);
    CHECK(nb_run_iterations(run.handle) >= 1);

    // precoders are finite and respect the power budget
    double re[3], im[3];
    double power = 0.0;
    for (int u = 0; u < 2; ++u) {
        REQUIRE(nb_run_precoder(run.handle, u, re, im, 3) == NB_OK);
        for (int a = 0; a < 3; ++a) {
            CHECK(std::isfinite(re[a]));
            CHECK(std::isfinite(im[a]));
            power += re[a] * re[a] + im[a] * im[a];
        }
    }
    const double budget = std::pow(10.0, 1.5); // sigma = 1, 15 dB
    CHECK(power <= budget * (1.0 + 1e-9));

    // trace rows are reachable until the end
    double obj = 0, rate = 0;
    int rows = 0;
    while (nb_run_trace(run.handle, rows, &obj, &rate) == NB_OK)
        ++rows;
    CHECK(rows == nb_run_iterations(run.handle));
    CHECK(nb_run_trace(run.handle, rows, &obj, &rate) == NB_ERR_INVALID_ARGUMENT);
    CHECK(nb_run_precoder(run.handle, 5, re, im, 3) == NB_ERR_INVALID_ARGUMENT);
    CHECK(nb_run_precoder(run.handle, 0, re, im, 2) == NB_ERR_INVALID_ARGUMENT);

    // zero forcing through the same entry point
    RunGuard zf;
    REQUIRE(nb_solve_one(cfg.handle, 15.0, "zf", &zf.handle) == NB_OK);
    CHECK(nb_run_sum_rate(zf.handle) > 0.0);
    RunGuard bad;
    CHECK(nb_solve_one(cfg.handle, 15.0, "hybrid", &bad.handle) == NB_ERR_CONFIG);
}

TEST_CASE("sweep through the C surface writes the CSV") {
    ConfigGuard cfg;
    REQUIRE(nb_config_parse("scenario = capisweep\n"
                            "antennas = 2\n"
                            "users = 2\n"
                            "tx_snr_db = 10\n"
                            "trials = 2\n"
                            "variants = zf\n",
                            &cfg.handle) == NB_OK);
    const auto dir = std::filesystem::temp_directory_path() / "nomabeam_capi_out";
    std::filesystem::remove_all(dir);
    REQUIRE(nb_run_sweep(cfg.handle, dir.c_str(), 1) == NB_OK);
    CHECK(std::filesystem::exists(dir / "capisweep_sweep.csv"));
    CHECK(std::filesystem::exists(dir / "capisweep_sweep.svg"));
    std::ifstream csv(dir / "capisweep_sweep.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "scenario,variant,tx_snr_db,mean_sum_rate,std_err,mean_iters,failures,"
                    "trials,seed");
    std::filesystem::remove_all(dir);
}

TEST_CASE("complexity estimates through the C surface") {
    long cons = 0, vars = 0, soc = 0, iters = 0;
    REQUIRE(nb_complexity(3, 4, "cnoma", &cons, &vars, &soc, &iters) == NB_OK);
    const long c = nb_geomean_block_count(3);
    CHECK(c == 3);
    CHECK(cons == 24 + c);
    REQUIRE(nb_complexity(3, 4, "anoma", &cons, &vars, &soc, &iters) == NB_OK);
    CHECK(cons == 18 + c);
    CHECK(nb_complexity(3, 4, "zf", &cons, &vars, &soc, &iters) == NB_ERR_INVALID_ARGUMENT);
    CHECK(nb_geomean_block_count(0) == -1);
}
