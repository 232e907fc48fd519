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

#include "harness.hpp"

#include "analysis.hpp"
#include "baseline.hpp"
#include "rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace noma::harness {

const char* to_string(RunVariant v) {
    switch (v) {
    case RunVariant::CNoma: return "cnoma";
    case RunVariant::ANoma: return "anoma";
    case RunVariant::Zf: return "zf";
    }
    return "unknown";
}

RunVariant parse_variant(const std::string& name) {
    if (name == "cnoma")
        return RunVariant::CNoma;
    if (name == "anoma")
        return RunVariant::ANoma;
    if (name == "zf")
        return RunVariant::Zf;
    throw ConfigError("unknown variant: " + name);
}

model::SystemParams ExperimentConfig::system_params(double snr_db) const {
    model::SystemParams p;
    p.antennas = antennas;
    p.users = users;
    p.path_loss_exponent = path_loss_exponent;
    p.max_distance = max_distance;
    p.noise_std = noise_std;
    p.power_budget = noise_std * noise_std * std::pow(10.0, snr_db / 10.0);
    return p;
}

void ExperimentConfig::validate() const {
    try {
        system_params(tx_snr_db.empty() ? 0.0 : tx_snr_db.front()).validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (tx_snr_db.empty())
        throw ConfigError("tx_snr_db grid must be nonempty");
    if (trials < 1)
        throw ConfigError("trials must be >= 1");
    if (variants.empty())
        throw ConfigError("variants must be nonempty");
    if (!(convergence_delta > 0.0))
        throw ConfigError("delta must be > 0");
    if (max_iterations < 1)
        throw ConfigError("max_iterations must be >= 1");
    if (prob_distances.empty())
        throw ConfigError("prob_distances must be nonempty");
    if (prob_noise_powers.empty())
        throw ConfigError("prob_noise_powers must be nonempty");
    if (prob_trials < 1)
        throw ConfigError("prob_trials must be >= 1");
    if (prob_message_index < 1 || prob_message_index >= users)
        throw ConfigError("prob_message_index must lie in [1, users-1]");
}

namespace {

std::vector<double> parse_number_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) {
        std::istringstream vs(item);
        double x;
        if (!(vs >> x))
            throw ConfigError("bad number in " + key + ": '" + item + "'");
        out.push_back(x);
    }
    if (out.empty())
        throw ConfigError("empty list for " + key);
    return out;
}

double parse_number(const std::string& value, const std::string& key) {
    std::istringstream vs(value);
    double x;
    if (!(vs >> x))
        throw ConfigError("bad number for " + key + ": '" + value + "'");
    std::string rest;
    if (vs >> rest)
        throw ConfigError("trailing garbage for " + key + ": '" + value + "'");
    return x;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    return s.substr(b, e - b + 1);
}

} // namespace

void apply_key_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key.empty() || value.empty())
        throw ConfigError("empty key or value");
    if (key == "scenario") {
        cfg.scenario = value;
    } else if (key == "antennas") {
        cfg.antennas = static_cast<int>(parse_number(value, key));
    } else if (key == "users") {
        cfg.users = static_cast<int>(parse_number(value, key));
    } else if (key == "gamma") {
        cfg.path_loss_exponent = parse_number(value, key);
    } else if (key == "d0") {
        cfg.max_distance = parse_number(value, key);
    } else if (key == "sigma") {
        cfg.noise_std = parse_number(value, key);
    } else if (key == "tx_snr_db") {
        cfg.tx_snr_db = parse_number_list(value, key);
    } else if (key == "trials") {
        cfg.trials = static_cast<int>(parse_number(value, key));
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_number(value, key));
    } else if (key == "delta") {
        cfg.convergence_delta = parse_number(value, key);
    } else if (key == "max_iterations") {
        cfg.max_iterations = static_cast<int>(parse_number(value, key));
    } else if (key == "variants") {
        cfg.variants.clear();
        std::istringstream vs(value);
        std::string item;
        while (std::getline(vs, item, ','))
            cfg.variants.push_back(parse_variant(trim(item)));
    } else if (key == "prob_distances") {
        cfg.prob_distances = parse_number_list(value, key);
    } else if (key == "prob_fixed_distance") {
        cfg.prob_fixed_distance = parse_number(value, key);
    } else if (key == "prob_noise_powers") {
        cfg.prob_noise_powers = parse_number_list(value, key);
    } else if (key == "prob_trials") {
        cfg.prob_trials = static_cast<long>(parse_number(value, key));
    } else if (key == "prob_message_index") {
        cfg.prob_message_index = static_cast<int>(parse_number(value, key));
    } else if (key == "prob_sweep") {
        if (value == "i")
            cfg.prob_sweep_j = false;
        else if (value == "j")
            cfg.prob_sweep_j = true;
        else
            throw ConfigError("prob_sweep must be i or j");
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        try {
            apply_key_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path.string());
    return parse_config(in);
}

namespace {

mma::Variant to_mma_variant(RunVariant v) {
    return v == RunVariant::ANoma ? mma::Variant::ANoma : mma::Variant::CNoma;
}

struct TrialOutcome {
    bool ok = false;
    double sum_rate = 0.0;
    double iterations = 0.0;
};

// Deterministic per-(trial, variant, grid point) outcome.
TrialOutcome run_one(const ExperimentConfig& cfg, const model::ChannelSet& channels,
                     RunVariant variant, double snr_db, std::uint64_t init_seed) {
    const model::SystemParams params = cfg.system_params(snr_db);
    TrialOutcome out;
    if (variant == RunVariant::Zf) {
        try {
            const auto zf = baseline::zf_precoders(channels, params.power_budget, params.noise_std);
            out.ok = true;
            out.sum_rate = zf.sum_rate;
            out.iterations = 1.0;
        } catch (const std::runtime_error&) {
            out.ok = false;
        }
        return out;
    }
    mma::MmaConfig mc;
    mc.variant = to_mma_variant(variant);
    mc.convergence_delta = cfg.convergence_delta;
    mc.max_iterations = cfg.max_iterations;
    const auto res = mma::run(channels, params, mc, init_seed);
    out.ok = !res.trace.failed;
    out.sum_rate = res.trace.best_sum_rate;
    out.iterations = static_cast<double>(res.trace.iterations.size());
    return out;
}

// Runs fn(index) for index in [0, count) on a few worker threads; the
// aggregation stays deterministic because results land by index.
void parallel_for(int count, const std::function<void(int)>& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<unsigned>(hw, 4u);
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                fn(i);
        });
    }
    for (auto& th : pool)
        th.join();
}

} // namespace

SweepResult run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto distances = model::user_distances(cfg.users, cfg.max_distance);

    const int n_var = static_cast<int>(cfg.variants.size());
    const int n_snr = static_cast<int>(cfg.tx_snr_db.size());
    // rates[trial][variant][snr]
    std::vector<std::vector<std::vector<TrialOutcome>>> outcomes(
        static_cast<std::size_t>(cfg.trials));

    parallel_for(cfg.trials, [&](int trial) {
        const std::uint64_t channel_seed = Rng::stream(cfg.seed, static_cast<std::uint64_t>(trial)).next_u64();
        const std::uint64_t init_seed =
            Rng::stream(cfg.seed ^ 0x9E3779B97F4A7C15ULL, static_cast<std::uint64_t>(trial)).next_u64();
        const auto params0 = cfg.system_params(cfg.tx_snr_db.front());
        const auto channels = model::sample_channels(params0, distances, channel_seed);
        auto& per_trial = outcomes[static_cast<std::size_t>(trial)];
        per_trial.assign(static_cast<std::size_t>(n_var),
                         std::vector<TrialOutcome>(static_cast<std::size_t>(n_snr)));
        for (int v = 0; v < n_var; ++v)
            for (int s = 0; s < n_snr; ++s)
                per_trial[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)] = run_one(
                    cfg, channels, cfg.variants[static_cast<std::size_t>(v)],
                    cfg.tx_snr_db[static_cast<std::size_t>(s)], init_seed);
    });

    SweepResult res;
    res.config = cfg;
    for (int v = 0; v < n_var; ++v) {
        for (int s = 0; s < n_snr; ++s) {
            SweepCell cell;
            cell.variant = cfg.variants[static_cast<std::size_t>(v)];
            cell.tx_snr_db = cfg.tx_snr_db[static_cast<std::size_t>(s)];
            double sum = 0.0, sum2 = 0.0, iters = 0.0;
            int ok = 0;
            for (int trial = 0; trial < cfg.trials; ++trial) {
                const TrialOutcome& o =
                    outcomes[static_cast<std::size_t>(trial)][static_cast<std::size_t>(v)]
                            [static_cast<std::size_t>(s)];
                if (!o.ok) {
                    ++cell.failures;
                    continue;
                }
                ++ok;
                sum += o.sum_rate;
                sum2 += o.sum_rate * o.sum_rate;
                iters += o.iterations;
            }
            if (ok > 0) {
                cell.mean_sum_rate = sum / ok;
                cell.mean_iterations = iters / ok;
                if (ok > 1) {
                    const double var =
                        std::max(0.0, (sum2 - sum * sum / ok) / static_cast<double>(ok - 1));
                    cell.std_err = std::sqrt(var / ok);
                }
            }
            res.cells.push_back(cell);
        }
    }
    return res;
}

ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto distances = model::user_distances(cfg.users, cfg.max_distance);
    ConvergenceResult res;
    res.config = cfg;

    std::vector<RunVariant> variants;
    for (RunVariant v : cfg.variants)
        if (v != RunVariant::Zf)
            variants.push_back(v);

    for (RunVariant variant : variants) {
        for (double snr : cfg.tx_snr_db) {
            const std::uint64_t channel_seed = Rng::stream(cfg.seed, 0).next_u64();
            const std::uint64_t init_seed = Rng::stream(cfg.seed ^ 0x9E3779B97F4A7C15ULL, 0).next_u64();
            const auto params = cfg.system_params(snr);
            const auto channels = model::sample_channels(params, distances, channel_seed);
            mma::MmaConfig mc;
            mc.variant = to_mma_variant(variant);
            mc.convergence_delta = cfg.convergence_delta;
            mc.max_iterations = cfg.max_iterations;
            ConvergencePoint point;
            point.variant = variant;
            point.tx_snr_db = snr;
            point.trace = mma::run(channels, params, mc, init_seed).trace;
            res.points.push_back(std::move(point));
        }
    }
    return res;
}

ProbabilityResult run_probability(const ExperimentConfig& cfg) {
    cfg.validate();
    ProbabilityResult res;
    res.config = cfg;
    std::uint64_t row_index = 0;
    for (double noise_power : cfg.prob_noise_powers) {
        for (double d : cfg.prob_distances) {
            ProbabilityRow row;
            row.noise_power = noise_power;
            if (cfg.prob_sweep_j) {
                row.d_j = d;
                row.d_i = cfg.prob_fixed_distance;
            } else {
                row.d_i = d;
                row.d_j = cfg.prob_fixed_distance;
            }
            analysis::ProbParams pp;
            pp.lambda_i = std::pow(row.d_i, cfg.path_loss_exponent);
            pp.lambda_j = std::pow(row.d_j, cfg.path_loss_exponent);
            pp.users = cfg.users;
            pp.message_index = cfg.prob_message_index;
            pp.noise_power = noise_power;
            const auto exact = analysis::prob_decoding_order(pp);
            const auto approx = analysis::prob_decoding_order_approx(pp);
            const auto mc = analysis::mc_prob_decoding_order(
                pp, cfg.antennas, cfg.prob_trials, Rng::stream(cfg.seed, row_index).next_u64());
            row.exact = exact.clamped;
            row.exact_raw = exact.raw;
            row.approx = approx.clamped;
            row.mc_estimate = mc.estimate;
            row.mc_std_err = mc.std_error;
            res.rows.push_back(row);
            ++row_index;
        }
    }
    return res;
}

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

} // namespace

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
    out << "scenario,variant,tx_snr_db,mean_sum_rate,std_err,mean_iters,failures,trials,seed\n";
    for (const SweepCell& c : result.cells) {
        out << result.config.scenario << ',' << to_string(c.variant) << ',' << fmt(c.tx_snr_db)
            << ',' << fmt(c.mean_sum_rate) << ',' << fmt(c.std_err) << ','
            << fmt(c.mean_iterations) << ',' << c.failures << ',' << result.config.trials << ','
            << result.config.seed << '\n';
    }
}

void write_convergence_csv(const ConvergenceResult& result, std::ostream& out) {
    out << "scenario,variant,tx_snr_db,iteration,geomean,objective_rate,sum_rate,solver_status,"
           "accepted,converged,seed\n";
    for (const ConvergencePoint& p : result.points) {
        for (const mma::IterationRecord& r : p.trace.iterations) {
            out << result.config.scenario << ',' << to_string(p.variant) << ','
                << fmt(p.tx_snr_db) << ',' << r.iteration << ',' << fmt(r.geomean) << ','
                << fmt(r.objective_rate) << ',' << fmt(r.sum_rate) << ','
                << conic::to_string(r.solver_status) << ',' << (r.accepted ? 1 : 0) << ','
                << (p.trace.converged ? 1 : 0) << ',' << result.config.seed << '\n';
        }
    }
}

void write_probability_csv(const ProbabilityResult& result, std::ostream& out) {
    out << "scenario,d_i,d_j,noise_power,message_index,prob_exact,prob_exact_raw,prob_approx,"
           "mc_estimate,mc_std_err,mc_trials,seed\n";
    for (const ProbabilityRow& r : result.rows) {
        out << result.config.scenario << ',' << fmt(r.d_i) << ',' << fmt(r.d_j) << ','
            << fmt(r.noise_power) << ',' << result.config.prob_message_index << ','
            << fmt(r.exact) << ',' << fmt(r.exact_raw) << ',' << fmt(r.approx) << ','
            << fmt(r.mc_estimate) << ',' << fmt(r.mc_std_err) << ',' << result.config.prob_trials
            << ',' << result.config.seed << '\n';
    }
}

namespace {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

// Minimal SVG line plot; enough for eyeballing sweep and trace shapes.
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<Series>& series) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Series& s : series) {
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax - xmin < 1e-12)
        xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12)
        ymax = ymin + 1.0;

    const double w = 720, h = 480, ml = 70, mr = 160, mt = 40, mb = 60;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
        << h - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 5; ++tick) {
        const double fx = xmin + (xmax - xmin) * tick / 5.0;
        const double fy = ymin + (ymax - ymin) * tick / 5.0;
        out << "<text x=\"" << px(fx) << "\" y=\"" << h - mb + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(fx) << "</text>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(fy) << "</text>\n";
        out << "<line x1=\"" << ml << "\" y1=\"" << py(fy) << "\" x2=\"" << w - mr << "\" y2=\""
            << py(fy) << "\" stroke=\"#dddddd\"/>\n";
    }
    out << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 16
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
    out << "<text x=\"18\" y=\"" << (mt + h - mb) / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << (mt + h - mb) / 2 << ")\">" << ylabel << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = palette[i % 8];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : series[i].points)
            out << px(x) << ',' << py(y) << ' ';
        out << "\"/>\n";
        const double ly = mt + 18.0 * static_cast<double>(i);
        out << "<line x1=\"" << w - mr + 10 << "\" y1=\"" << ly << "\" x2=\"" << w - mr + 34
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << w - mr + 40 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
            << series[i].name << "</text>\n";
    }
    out << "</svg>\n";
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

} // namespace

std::vector<std::filesystem::path> emit_outputs(const SweepResult& result,
                                                const std::filesystem::path& dir, bool svg) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    const auto csv_path = dir / (result.config.scenario + "_sweep.csv");
    std::ostringstream os;
    write_sweep_csv(result, os);
    write_file(csv_path, os.str());
    written.push_back(csv_path);
    if (svg) {
        std::vector<Series> series;
        for (RunVariant v :
             {RunVariant::CNoma, RunVariant::ANoma, RunVariant::Zf}) {
            Series s;
            s.name = to_string(v);
            for (const SweepCell& c : result.cells)
                if (c.variant == v)
                    s.points.emplace_back(c.tx_snr_db, c.mean_sum_rate);
            if (!s.points.empty())
                series.push_back(std::move(s));
        }
        const auto svg_path = dir / (result.config.scenario + "_sweep.svg");
        write_svg_plot(svg_path, result.config.scenario + ": mean sum rate vs TX-SNR",
                       "TX-SNR [dB]", "sum rate [bits/s/Hz]", series);
        written.push_back(svg_path);
    }
    return written;
}

std::vector<std::filesystem::path> emit_outputs(const ConvergenceResult& result,
                                                const std::filesystem::path& dir, bool svg) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    const auto csv_path = dir / (result.config.scenario + "_convergence.csv");
    std::ostringstream os;
    write_convergence_csv(result, os);
    write_file(csv_path, os.str());
    written.push_back(csv_path);
    if (svg) {
        std::vector<Series> series;
        for (const ConvergencePoint& p : result.points) {
            Series s;
            s.name = std::string(to_string(p.variant)) + " " + fmt(p.tx_snr_db) + " dB";
            for (const auto& r : p.trace.iterations)
                s.points.emplace_back(static_cast<double>(r.iteration), r.sum_rate);
            series.push_back(std::move(s));
        }
        const auto svg_path = dir / (result.config.scenario + "_convergence.svg");
        write_svg_plot(svg_path, result.config.scenario + ": sum rate vs iteration", "iteration",
                       "sum rate [bits/s/Hz]", series);
        written.push_back(svg_path);
    }
    return written;
}

std::vector<std::filesystem::path> emit_outputs(const ProbabilityResult& result,
                                                const std::filesystem::path& dir, bool svg) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    const auto csv_path = dir / (result.config.scenario + "_probability.csv");
    std::ostringstream os;
    write_probability_csv(result, os);
    write_file(csv_path, os.str());
    written.push_back(csv_path);
    if (svg) {
        std::vector<Series> series;
        for (double np : result.config.prob_noise_powers) {
            Series exact{"exact s2=" + fmt(np), {}};
            Series approx{"approx s2=" + fmt(np), {}};
            Series mc{"mc s2=" + fmt(np), {}};
            for (const ProbabilityRow& r : result.rows) {
                if (r.noise_power != np)
                    continue;
                const double x = result.config.prob_sweep_j ? r.d_j : r.d_i;
                exact.points.emplace_back(x, r.exact);
                approx.points.emplace_back(x, r.approx);
                mc.points.emplace_back(x, r.mc_estimate);
            }
            series.push_back(std::move(exact));
            series.push_back(std::move(approx));
            series.push_back(std::move(mc));
        }
        const auto svg_path = dir / (result.config.scenario + "_probability.svg");
        write_svg_plot(svg_path, result.config.scenario + ": decoding-order probability",
                       "swept distance [m]", "probability", series);
        written.push_back(svg_path);
    }
    return written;
}

} // namespace noma::harness
