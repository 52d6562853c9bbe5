// Copyright 2026 The mie Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/*
 * The `mie` command line: generate, train, evaluate, sweep, analyze.
 *
 * Every command first prints a config echo line "# config: {json}" that
 * holds every resolved option. CSV outputs start with a "# schema: <name>"
 * comment line followed by a header row.
 *
 * Exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure.
 */

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mie/cluster_sim.hpp"
#include "mie/dataio.hpp"
#include "mie/estimators.hpp"
#include "mie/gate_model.hpp"
#include "mie/learners/checkpoint.hpp"
#include "mie/learners/train.hpp"

namespace mie::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

// Accepts a plain number of radians or a multiple of pi written "0.25pi".
inline double parse_angle(const std::string& text) {
    std::string s = text;
    double factor = 1.0;
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
        factor = std::numbers::pi;
        s.resize(s.size() - 2);
        if (s.empty()) s = "1";
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ContractViolation("cannot parse angle '" + text + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw ContractViolation("cannot parse angle '" + text + "'");
    return v * factor;
}

inline std::string fmt(double x) {
    std::ostringstream o;
    o << std::setprecision(10) << x;
    return o.str();
}

struct GeometryFlags {
    std::string kind = "chain";
    int L = 10;
    std::string theta = "0";
    std::string phi = "1.25pi";
    int d = -1; // grid: defaults to L - 1

    GeometryConfig resolve() const {
        const Lattice k = lattice_from_string(kind);
        if (k == Lattice::Chain) return GeometryConfig::chain(L);
        return GeometryConfig::grid(L, d < 0 ? L - 1 : d, parse_angle(theta), parse_angle(phi));
    }

    void add_to(CLI::App& app) {
        app.add_option("--geometry", kind, "chain or grid")->check(CLI::IsMember({"chain", "grid"}));
        app.add_option("--L", L, "chain length or grid side");
        app.add_option("--theta", theta, "measurement angle (radians, or e.g. 0.25pi)");
        app.add_option("--phi", phi, "measurement phase (radians, or e.g. 1.25pi)");
        app.add_option("--d", d, "grid probe separation along row 0 (default L-1)");
    }
};

struct NoiseFlags {
    double meas_flip = 0.0;
    double probe_depol = 0.0;
    std::string detection = "on";

    NoiseConfig resolve() const {
        NoiseConfig n{meas_flip, probe_depol, detection == "on"};
        n.validate();
        return n;
    }

    void add_to(CLI::App& app) {
        app.add_option("--meas-flip", meas_flip, "readout flip probability");
        app.add_option("--probe-depol", probe_depol, "probe depolarizing strength");
        app.add_option("--detection", detection, "error detection on|off")->check(CLI::IsMember({"on", "off"}));
    }
};

struct ModelFlags {
    std::string kind = "gate";
    std::string checkpoint;
    double epsilon = kDefaultGateEpsilon;

    void add_to(CLI::App& app) {
        app.add_option("--model", kind, "gate, constant, born or attention")
            ->check(CLI::IsMember({"gate", "constant", "born", "attention"}));
        app.add_option("--checkpoint", checkpoint, "checkpoint file for learned models");
        app.add_option("--epsilon", epsilon, "gate model depolarization");
    }

    std::unique_ptr<ComputationalModel> load(const GeometryConfig& g) const {
        if (kind == "gate") return std::make_unique<GateModel>(GateModelConfig{g, epsilon});
        if (kind == "constant") return std::make_unique<ConstantModel>();
        require(!checkpoint.empty(), "--checkpoint is required for learned models");
        auto m = learn::read_checkpoint(checkpoint);
        if (m->kind() != kind) throw DataError("checkpoint holds a '" + m->kind() + "' model, not '" + kind + "'");
        if (m->geometry().num_measured() != g.num_measured())
            throw DataError("checkpoint geometry does not match the data");
        return m;
    }

    nlohmann::json echo() const { return {{"model", kind}, {"checkpoint", checkpoint}, {"epsilon", epsilon}}; }
};

inline void echo_config(std::ostream& out, const std::string& command, nlohmann::json config) {
    config["command"] = command;
    out << "# config: " << config.dump() << '\n';
}

// Output stream that is either a file or the fallback stream.
class Sink {
  public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::trunc);
            if (!file_) throw DataError("cannot open '" + path + "' for writing");
        }
        out_ = path.empty() ? &fallback : &file_;
    }
    std::ostream& operator*() { return *out_; }

  private:
    std::ofstream file_;
    std::ostream* out_;
};

inline const GeometryConfig& common_geometry(const std::vector<OutcomeRecord>& records) {
    if (records.empty()) throw DataError("data file holds no records");
    for (const auto& r : records)
        if (!(r.geometry == records[0].geometry)) throw DataError("data file mixes geometries");
    return records[0].geometry;
}

// ---------------------------------------------------------------------------

struct GenerateCmd {
    GeometryFlags geometry;
    NoiseFlags noise;
    std::size_t repeats = 1000;
    std::uint64_t seed = 0;
    bool oracle = false;
    std::string out;

    void add_to(CLI::App& app) {
        geometry.add_to(app);
        noise.add_to(app);
        app.add_option("--repeats", repeats, "number of repeats")->check(CLI::PositiveNumber);
        app.add_option("--seed", seed, "master seed");
        app.add_flag("--oracle", oracle, "grid: use the full-statevector sampler (records born_prob)");
        app.add_option("--out", out, "record file (JSONL)")->required();
    }

    int run(unsigned workers, std::ostream& os) const {
        const GeometryConfig g = geometry.resolve();
        const NoiseConfig n = noise.resolve();
        require(!oracle || g.kind == Lattice::Grid, "--oracle applies to grid geometries only");
        nlohmann::json cfg = {{"geometry", geometry_to_json(g)}, {"noise", noise_to_json(n)},
                              {"repeats", repeats},             {"seed", seed},
                              {"oracle", oracle},               {"out", out}};
        echo_config(os, "generate", cfg);
        const auto records =
            records_of(generate(g, n, seed, repeats, oracle ? Sampler::BruteForce : Sampler::Auto, workers));
        std::size_t discarded = 0;
        for (const auto& r : records) discarded += r.discarded ? 1 : 0;
        write_records(out, records);
        DatasetManifest m;
        m.master_seed = seed;
        m.geometry = g;
        m.noise = n;
        m.record_count = records.size();
        m.discard_count = discarded;
        m.creation = cfg;
        write_manifest(out, m);
        os << "records " << records.size() << " discarded " << discarded << " fraction "
           << fmt(static_cast<double>(discarded) / static_cast<double>(records.size())) << '\n';
        return kOk;
    }
};

struct TrainCmd {
    std::string data, validation, out, curve;
    std::string kind = "born";
    double epochs = 1.0;
    std::size_t batch = 64;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    double val_fraction = 0.1;
    std::vector<double> checkpoints;
    bool no_mask = false;
    std::string schedule = "cosine";
    std::size_t restarts = 1;
    int chi = 4;
    int layers = 2, heads = 4, ff = 128;
    double sublattice_init = 3.0;

    void add_to(CLI::App& app) {
        app.add_option("--data", data, "training record file")->required();
        app.add_option("--validation", validation, "held-out record file (default: split off --data)");
        app.add_option("--val-fraction", val_fraction, "held-out fraction when splitting --data");
        app.add_option("--kind", kind, "born or attention")->check(CLI::IsMember({"born", "attention"}));
        app.add_option("--out", out, "checkpoint file")->required();
        app.add_option("--curve", curve, "training curve CSV (default: stdout)");
        app.add_option("--epochs", epochs, "training epochs (may be fractional)");
        app.add_option("--batch", batch, "minibatch size");
        app.add_option("--lr", lr, "Adam learning rate");
        app.add_option("--seed", seed, "training seed");
        app.add_option("--checkpoints", checkpoints, "epochs at which the held-out curve is sampled")
            ->delimiter(',');
        app.add_flag("--no-mask", no_mask, "disable grid shell masking");
        app.add_option("--schedule", schedule, "learning-rate schedule: cosine or constant")
            ->check(CLI::IsMember({"cosine", "constant"}));
        app.add_option("--restarts", restarts, "independent runs; the lowest final held-out entropy bound is kept")
            ->check(CLI::PositiveNumber);
        app.add_option("--chi", chi, "Born machine bond dimension");
        app.add_option("--layers", layers, "attention layers");
        app.add_option("--heads", heads, "attention heads");
        app.add_option("--ff", ff, "attention feedforward width");
        app.add_option("--sublattice-init", sublattice_init,
                       "initial sublattice sign carried by the first position coordinate (0 = off)")
            ->check(CLI::NonNegativeNumber);
    }

    int run(unsigned workers, std::ostream& os, std::ostream& es) const {
        auto records = read_records(data);
        const GeometryConfig g = common_geometry(records);
        std::vector<OutcomeRecord> tr, va;
        if (!validation.empty()) {
            tr = std::move(records);
            va = read_records(validation);
            if (!(common_geometry(va) == g)) throw DataError("validation data has a different geometry");
        } else {
            auto s = split(records, {1.0 - val_fraction, val_fraction, 0.0}, seed);
            tr = std::move(s.train);
            va = std::move(s.validation);
            if (va.empty()) throw DataError("validation split is empty; use more data or a larger --val-fraction");
        }
        const auto hyper = [&](std::size_t k) {
            nlohmann::json hp;
            if (kind == "born") hp = {{"chi", chi}, {"seed", seed + k}};
            else hp = {{"layers", layers}, {"heads", heads}, {"ff_width", ff}, {"sublattice_init", sublattice_init},
                      {"seed", seed + k}};
            return hp;
        };
        learn::TrainConfig tc;
        tc.batch_size = batch;
        tc.epochs = epochs;
        tc.adam.lr = lr;
        tc.seed = seed;
        tc.masking = !no_mask;
        tc.cosine_decay = schedule == "cosine";
        tc.checkpoints = checkpoints;
        tc.workers = workers;
        echo_config(os, "train",
                    {{"data", data},       {"validation", validation}, {"val_fraction", val_fraction},
                     {"kind", kind},       {"out", out},               {"curve", curve},
                     {"epochs", epochs},   {"batch", batch},           {"lr", lr},
                     {"seed", seed},       {"checkpoints", checkpoints}, {"mask", !no_mask}, {"schedule", schedule},
                     {"restarts", restarts}, {"hyperparameters", learn::make_model(kind, g, hyper(0))->hyperparameters()}});
        Sink sink(curve, os);
        const auto row = [](const learn::CurvePoint& p) {
            return fmt(p.epoch) + ',' + std::to_string(p.step) + ',' + fmt(p.entropy.mean) + ',' +
                   fmt(p.entropy.sem) + ',' + fmt(p.negativity.mean) + ',' + fmt(p.negativity.sem) + ',' +
                   (std::isfinite(p.train_loss) ? fmt(p.train_loss) : std::string("nan")) + ',' +
                   std::to_string(p.entropy.n) + '\n';
        };
        const char* header = "epoch,step,entropy_bound,entropy_sem,negativity_bound,negativity_sem,train_loss,n\n";
        std::unique_ptr<learn::LearnedModel> model;
        learn::TrainResult result;
        if (restarts == 1) {
            // Single run: stream the curve as it is produced.
            *sink << "# schema: mie-train-curve/1\n" << header << std::flush;
            model = learn::make_model(kind, g, hyper(0));
            result = learn::train(*model, tr, va, tc, [&](const learn::CurvePoint& p) { *sink << row(p) << std::flush; });
        } else {
            auto best = learn::train_best_of([&](std::size_t k) { return learn::make_model(kind, g, hyper(k)); }, tr,
                                             va, tc, restarts, [&](std::size_t k, const learn::CurvePoint& p) {
                                                 es << "# restart " << k << ": " << row(p) << std::flush;
                                             });
            nlohmann::json finals = nlohmann::json::array();
            for (double f : best.final_entropy) finals.push_back(std::isfinite(f) ? nlohmann::json(f) : nlohmann::json());
            *sink << "# restarts: " << nlohmann::json{{"chosen", best.chosen}, {"final_entropy_bounds", finals}}.dump()
                  << "\n# schema: mie-train-curve/1\n" << header;
            for (const auto& p : best.result.curve) *sink << row(p);
            model = std::move(best.model);
            result = std::move(best.result);
        }
        learn::write_checkpoint(out, *model);
        if (result.aborted) {
            es << result.diagnostic << '\n';
            return kNumerical;
        }
        return kOk;
    }
};

struct EvaluateCmd {
    std::string data, out;
    ModelFlags model;

    void add_to(CLI::App& app) {
        app.add_option("--data", data, "record file")->required();
        model.add_to(app);
        app.add_option("--out", out, "CSV output (default: stdout)");
    }

    int run(unsigned workers, std::ostream& os) const {
        nlohmann::json cfg = model.echo();
        cfg["data"] = data;
        cfg["out"] = out;
        echo_config(os, "evaluate", cfg);
        const auto records = read_records(data);
        const auto m = model.load(common_geometry(records));
        const auto b = evaluate_bounds(records, *m, workers);
        Sink sink(out, os);
        *sink << "# schema: mie-evaluate/1\n"
              << "model,n,entropy_bound,entropy_sem,negativity_bound,negativity_sem,coherent_info_bound,"
                 "coherent_info_sem\n"
              << m->kind() << ',' << b.entropy.n << ',' << fmt(b.entropy.mean) << ',' << fmt(b.entropy.sem) << ','
              << fmt(b.negativity.mean) << ',' << fmt(b.negativity.sem) << ',' << fmt(b.coherent.mean) << ','
              << fmt(b.coherent.sem) << '\n';
        return kOk;
    }
};

struct SweepCmd {
    int L = 4;
    std::vector<std::string> thetas{"0", "0.1pi", "0.2pi", "0.3pi", "0.4pi", "0.5pi"};
    std::vector<int> ds;
    std::string phi = "1.25pi";
    std::size_t repeats = 10000;
    std::uint64_t seed = 0;
    double epsilon = kDefaultGateEpsilon;
    NoiseFlags noise;
    std::string out;

    void add_to(CLI::App& app) {
        app.add_option("--L", L, "grid side");
        app.add_option("--thetas", thetas, "comma-separated angles (radians, or e.g. 0.25pi)")->delimiter(',');
        app.add_option("--ds", ds, "comma-separated probe separations (default L-1)")->delimiter(',');
        app.add_option("--phi", phi, "measurement phase");
        app.add_option("--repeats", repeats, "repeats per point")->check(CLI::PositiveNumber);
        app.add_option("--seed", seed, "master seed");
        app.add_option("--epsilon", epsilon, "gate model depolarization");
        noise.add_to(app);
        app.add_option("--out", out, "CSV output (default: stdout)");
    }

    int run(unsigned workers, std::ostream& os) const {
        require(!thetas.empty(), "--thetas must not be empty");
        std::vector<int> dlist = ds.empty() ? std::vector<int>{L - 1} : ds;
        std::vector<double> th;
        for (const auto& t : thetas) {
            th.push_back(parse_angle(t));
            require(th.back() >= 0.0 && th.back() <= std::numbers::pi + 1e-12, "sweep angles must lie in [0, pi]");
        }
        const NoiseConfig n = noise.resolve();
        echo_config(os, "sweep",
                    {{"L", L}, {"thetas", thetas}, {"ds", dlist}, {"phi", phi}, {"repeats", repeats},
                     {"seed", seed}, {"epsilon", epsilon}, {"noise", noise_to_json(n)}, {"out", out}});
        Sink sink(out, os);
        *sink << "# schema: mie-sweep/1\n"
              << "theta,theta_over_pi,d,repeats,kept,negativity_bound,negativity_sem,entropy_bound,entropy_sem,"
                 "coherent_info_bound,coherent_info_sem,mean_negativity,mean_negativity_sem\n";
        std::uint64_t point = 0;
        for (int d : dlist)
            for (double theta : th) {
                const auto g = GeometryConfig::grid(L, d, theta, parse_angle(phi));
                const auto samples = generate(g, n, CounterRng::stream_key(seed, point++), repeats,
                                              Sampler::Auto, workers);
                const auto records = records_of(samples);
                std::vector<double> exact;
                for (const auto& s : samples)
                    if (!s.record.discarded) exact.push_back(qmat::negativity(s.rho));
                if (exact.empty()) throw NumericalError("every repeat was discarded");
                const GateModel model({g, epsilon});
                const auto b = evaluate_bounds(records, model, workers);
                const auto e = summarize(exact);
                *sink << fmt(theta) << ',' << fmt(theta / std::numbers::pi) << ',' << d << ',' << repeats << ','
                      << b.negativity.n << ',' << fmt(b.negativity.mean) << ',' << fmt(b.negativity.sem) << ','
                      << fmt(b.entropy.mean) << ',' << fmt(b.entropy.sem) << ',' << fmt(b.coherent.mean) << ','
                      << fmt(b.coherent.sem) << ',' << fmt(e.mean) << ',' << fmt(e.sem) << '\n'
                      << std::flush;
            }
        return kOk;
    }
};

struct AnalyzeCmd {
    std::string data, out;
    ModelFlags model;
    std::vector<int> flip_rows;
    std::vector<int> flip_sites;
    bool multiplicity = false;
    std::vector<int> exclude_rows;
    std::string classify;

    void add_to(CLI::App& app) {
        app.add_option("--data", data, "record file")->required();
        model.add_to(app);
        app.add_option("--flip-rows", flip_rows, "grid rows whose outcomes are flipped, one table row each")
            ->delimiter(',');
        app.add_option("--flip-sites", flip_sites, "sites flipped together as one extra table row")->delimiter(',');
        app.add_flag("--multiplicity", multiplicity, "emit the outcome multiplicity histogram");
        app.add_option("--exclude-rows", exclude_rows, "grid rows left out of the multiplicity key")->delimiter(',');
        app.add_option("--classify", classify, "binning estimate: parity or constant")
            ->check(CLI::IsMember({"parity", "constant"}));
        app.add_option("--out", out, "output file (default: stdout)");
    }

    int run(unsigned workers, std::ostream& os) const {
        nlohmann::json cfg = model.echo();
        cfg.update({{"data", data}, {"flip_rows", flip_rows}, {"flip_sites", flip_sites},
                    {"multiplicity", multiplicity}, {"exclude_rows", exclude_rows}, {"classify", classify},
                    {"out", out}});
        echo_config(os, "analyze", cfg);
        if (flip_rows.empty() && flip_sites.empty() && !multiplicity && classify.empty())
            throw ContractViolation("nothing to analyze: give --flip-rows, --flip-sites, --multiplicity or --classify");
        const auto records = read_records(data);
        const GeometryConfig& g = common_geometry(records);
        Sink sink(out, os);
        if (!flip_rows.empty() || !flip_sites.empty()) {
            const auto m = model.load(g);
            const auto base = negativity_bound(records, *m, workers);
            *sink << "# schema: mie-sensitivity/1\n"
                  << "flipped,negativity_bound,negativity_sem,n,delta\n"
                  << "none," << fmt(base.mean) << ',' << fmt(base.sem) << ',' << base.n << ",0\n";
            const auto emit = [&](const std::string& label, const std::set<int>& sites) {
                const auto e = sensitivity_flip(records, *m, sites, workers);
                *sink << label << ',' << fmt(e.mean) << ',' << fmt(e.sem) << ',' << e.n << ','
                      << fmt(e.mean - base.mean) << '\n';
            };
            for (int row : flip_rows) emit("row" + std::to_string(row), grid_row_sites(g, row));
            if (!flip_sites.empty()) {
                std::string label = "sites";
                for (int s : flip_sites) label += ":" + std::to_string(s);
                emit(label, std::set<int>(flip_sites.begin(), flip_sites.end()));
            }
        }
        if (multiplicity) {
            std::set<int> sites;
            if (!exclude_rows.empty()) {
                require(g.kind == Lattice::Grid, "--exclude-rows applies to grid data");
                const std::set<int> skip(exclude_rows.begin(), exclude_rows.end());
                for (int s : g.measured_sites())
                    if (!skip.count(s / g.L)) sites.insert(s);
                require(!sites.empty(), "--exclude-rows removes every site");
            }
            *sink << "# schema: mie-multiplicity/1\nk,count\n";
            for (const auto& [k, c] : multiplicity_histogram(records, sites)) *sink << k << ',' << c << '\n';
        }
        if (!classify.empty()) {
            require(classify != "parity" || g.kind == Lattice::Chain, "parity classification applies to chains");
            const auto rep =
                binned_estimates(records, classify == "parity" ? parity_classifier() : constant_classifier());
            *sink << "# schema: mie-binning/1\nclass,count,weight,epsilon,entropy,coherent_info,negativity\n";
            for (const auto& c : rep.classes)
                *sink << c.label << ',' << c.count << ',' << fmt(c.weight) << ',' << fmt(c.epsilon) << ','
                      << fmt(c.entropy) << ',' << fmt(c.coherent) << ',' << fmt(c.negativity) << '\n';
            for (int label : rep.excluded) *sink << label << ",excluded,,,,,\n";
        }
        return kOk;
    }
};

// Runs the command line; never throws.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Measurement-induced entanglement experiments on simulated cluster states", "mie"};
    app.require_subcommand(1);
    unsigned workers = 1;
    app.add_option("--workers", workers, "worker threads for generation and evaluation")->check(CLI::PositiveNumber);

    GenerateCmd gen;
    TrainCmd trn;
    EvaluateCmd eva;
    SweepCmd swp;
    AnalyzeCmd ana;
    auto* s_gen = app.add_subcommand("generate", "sample repeats and write a record file");
    auto* s_trn = app.add_subcommand("train", "train a learned model on a record file");
    auto* s_eva = app.add_subcommand("evaluate", "entropy, negativity and coherent-information bounds");
    auto* s_swp = app.add_subcommand("sweep", "gate-model bounds over a grid of angles and separations");
    auto* s_ana = app.add_subcommand("analyze", "sensitivity, multiplicity and binning analyses");
    gen.add_to(*s_gen);
    trn.add_to(*s_trn);
    eva.add_to(*s_eva);
    swp.add_to(*s_swp);
    ana.add_to(*s_ana);
    for (auto* s : {s_gen, s_trn, s_eva, s_swp, s_ana})
        s->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }
    try {
        if (*s_gen) return gen.run(workers, out);
        if (*s_trn) return trn.run(workers, out, err);
        if (*s_eva) return eva.run(workers, out);
        if (*s_swp) return swp.run(workers, out);
        if (*s_ana) return ana.run(workers, out);
    } catch (const ContractViolation& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kData;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}

} // namespace mie::cli
