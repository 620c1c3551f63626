#include "isc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "isc/analytics.hpp"
#include "isc/output.hpp"
#include "isc/simulator.hpp"
#include "isc/spec_io.hpp"

namespace isc {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct GlobalOptions {
    std::string out_dir = ".";
    std::string format = "csv";
    bool quiet = false;
};

struct ModelOverrides {
    std::optional<double> rho;
    std::optional<int> d;
    std::optional<double> k_rho;
    std::optional<std::size_t> population;

    std::string describe() const {
        std::ostringstream s;
        if (rho) s << " rho=" << format_double(*rho);
        if (d) s << " d=" << *d;
        if (k_rho) s << " k_rho=" << format_double(*k_rho);
        if (population) s << " N=" << *population;
        return s.str();
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--rho", rho, "Override search efficiency");
        cmd->add_option("--d", d, "Override request size");
        cmd->add_option("--k-rho", k_rho, "Override k*rho (rescales k for scenarios, rho for populations)");
        cmd->add_option("--N", population, "Override population size (scenario specs only)");
    }
};

// A loaded spec after overrides, with a hash naming it.
struct LoadedSpec {
    Spec spec;
    std::string hash;
    std::string source;

    bool is_scenario() const { return std::holds_alternative<ScenarioSpec>(spec); }
    const ScenarioSpec& scenario() const { return std::get<ScenarioSpec>(spec); }
};

LoadedSpec load(const std::string& path, const ModelOverrides& ov) {
    const std::string text = read_file(path);
    Spec spec = parse_spec(text, path);
    if (auto* sc = std::get_if<ScenarioSpec>(&spec)) {
        if (ov.rho) sc->search_efficiency = *ov.rho;
        if (ov.d) sc->request_size = *ov.d;
        if (ov.population) sc->population = *ov.population;
        if (ov.k_rho) sc->mean_payload = *ov.k_rho / sc->search_efficiency;
        sc->validate();
    } else {
        auto& ps = std::get<PopulationSpec>(spec);
        if (ov.population) throw std::invalid_argument("--N applies to scenario specs only");
        double rho = ov.rho.value_or(ps.params.search_efficiency());
        if (ov.k_rho) rho = *ov.k_rho / ps.population.mean_payload();
        ps.params = ClubParams(rho, ov.d.value_or(ps.params.request_size()));
    }
    return {std::move(spec), content_hash(text + "\n" + ov.describe()), path};
}

MeanFieldModel model_of(const LoadedSpec& ls) {
    if (ls.is_scenario()) return MeanFieldModel::from_scenario(ls.scenario());
    const auto& ps = std::get<PopulationSpec>(ls.spec);
    return MeanFieldModel::from_population(ps.population, ps.params);
}

OutputFormat parse_format(const std::string& f) {
    return f == "json" ? OutputFormat::json : OutputFormat::csv;
}

const char* extension(OutputFormat f) { return f == OutputFormat::json ? ".json" : ".csv"; }

std::vector<std::string> recorded_command(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--out-dir") {
            ++i;
            continue;
        }
        if (args[i].rfind("--out-dir=", 0) == 0) continue;
        out.push_back(args[i]);
    }
    return out;
}

json fixed_point_json(const FixedPoint& fp) {
    return {{"n_eq", fp.n_eq}, {"p_bar", fp.p_bar}, {"stable", fp.stable}, {"slope", fp.slope},
            {"marginal", fp.marginal}};
}

constexpr double kCriticalBand = 5e-3;

std::string verdict(const MeanFieldModel& model, double pi, const std::optional<CriticalPoint>& crit) {
    if (model.request_size() == 1) {
        if (std::abs(pi - 1.0) <= kCriticalBand) return "critical";
        return pi > 1.0 ? "growth" : "stable empty club";
    }
    if (crit && model.population_size() >= crit->population) return "bistable";
    return "stable empty club";
}

class Runner {
public:
    Runner(const std::vector<std::string>& args, std::ostream& out) : args_(args), out_(out) {}

    int analyze(const std::string& path, const ModelOverrides& ov) {
        const auto ls = load(path, ov);
        const auto model = model_of(ls);
        const double pi = control_parameter(model);
        const auto points = fixed_points(model);
        std::optional<CriticalPoint> crit;
        if (model.request_size() > 1) crit = critical_population(model);

        json report;
        report["source"] = fs::path(path).filename().string();
        report["scenario_hash"] = ls.hash;
        report["N"] = model.population_size();
        report["k"] = model.mean_payload();
        report["rho"] = model.search_efficiency();
        report["k_rho"] = model.k_rho();
        report["d"] = model.request_size();
        report["control_parameter"] = pi;
        report["critical_k_rho"] = critical_k_rho(model);
        report["empty_membership_unstable"] = empty_membership_unstable(model);
        report["verdict"] = verdict(model, pi, crit);
        const auto match = match_statistics(model.aggregate_demand(), model.supply());
        report["match"] = {{"inner", match.inner},
                           {"norm_h", match.norm_demand},
                           {"norm_g", match.norm_supply},
                           {"similarity", match.similarity}};
        report["fixed_points"] = json::array();
        for (const auto& fp : points) report["fixed_points"].push_back(fixed_point_json(fp));
        if (crit) {
            report["critical_population"] = {{"N_crit", crit->population},
                                             {"n_crit", crit->membership},
                                             {"tangency_residual", crit->tangency_residual}};
        }
        if (!ls.is_scenario()) {
            const auto& pop = std::get<PopulationSpec>(ls.spec).population;
            report["types"] = pop.labels();
            report["aggregate_supply"] = std::vector<double>(model.supply().probs().begin(), model.supply().probs().end());
            report["aggregate_demand"] =
                std::vector<double>(model.aggregate_demand().probs().begin(), model.aggregate_demand().probs().end());
        }

        Table t{{"n_eq", "p_bar", "stable", "slope"}, {}};
        for (const auto& fp : points) t.add({fp.n_eq, fp.p_bar, fp.stable, fp.slope});
        const std::vector<std::pair<std::string, std::string>> files{
            {"analysis.json", report.dump(2) + "\n"},
            {std::string("fixed_points") + extension(format_), render(t, format_, ls.hash)}};
        emit(files, ls.hash, std::nullopt);
        if (!quiet_) out_ << report.dump(2) << "\n";
        return kExitOk;
    }

    struct SweepAxes {
        std::vector<double> betas{0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
        std::vector<std::size_t> s_maxes{300, 500, 1000, 3000};
        std::vector<double> delta_fracs{-0.9, -0.8, -0.7, -0.6, -0.5, -0.4, -0.3, -0.2, -0.1, 0.0,
                                        0.1,  0.2,  0.3,  0.4,  0.5,  0.6,  0.7,  0.8,  0.9};
        std::vector<double> eq_betas{0.6, 0.8, 1.0, 1.2};
        std::vector<double> n_k_rhos;
        std::vector<std::string> tables{"beta", "delta", "nkrho"};
    };

    int sweep(const std::string& path, const ModelOverrides& ov, SweepAxes axes) {
        const auto ls = load(path, ov);
        if (!ls.is_scenario()) throw std::invalid_argument("sweep needs a scenario spec");
        const auto& sc = ls.scenario();
        const double k_rho = sc.mean_payload * sc.search_efficiency;
        if (axes.n_k_rhos.empty()) {
            for (int i = 0; i <= 50; ++i) axes.n_k_rhos.push_back(std::pow(10.0, 0.1 * i));
        }
        auto wants = [&](const char* t) { return std::find(axes.tables.begin(), axes.tables.end(), t) != axes.tables.end(); };

        std::vector<std::pair<std::string, std::string>> files;
        if (wants("beta")) {
            Table t{{"beta", "s_max", "k_rho", "N_crit"}, {}};
            for (const auto& r : ncrit_sweep(axes.betas, axes.s_maxes, k_rho, std::nullopt, sc.request_size)) {
                t.add({r.beta, static_cast<long long>(r.s_max), r.k_rho, r.n_crit});
            }
            files.emplace_back(std::string("ncrit_vs_beta") + extension(format_), render(t, format_, ls.hash));
        }
        if (wants("nkrho")) {
            Table t{{"beta", "s_max", "N_k_rho", "neq_frac", "p_bar"}, {}};
            for (const auto& r : equilibrium_sweep(axes.eq_betas, sc.s_max, axes.n_k_rhos)) {
                t.add({r.beta, static_cast<long long>(r.s_max), r.n_k_rho, r.neq_frac, r.p_bar});
            }
            files.emplace_back(std::string("neq_vs_Nkrho") + extension(format_), render(t, format_, ls.hash));
        }
        if (wants("delta")) {
            Table t{{"delta_frac", "delta", "beta", "s_max", "k_rho", "N_crit"}, {}};
            const std::vector<double> beta{sc.beta};
            const std::vector<std::size_t> s_max{sc.s_max};
            for (double frac : axes.delta_fracs) {
                const long delta = std::lround(frac * static_cast<double>(sc.s_max));
                const auto rows = ncrit_sweep(beta, s_max, k_rho, ShiftSpec{delta, sc.direction}, sc.request_size);
                t.add({frac, static_cast<long long>(delta), sc.beta, static_cast<long long>(sc.s_max), k_rho,
                       rows.front().n_crit});
            }
            files.emplace_back(std::string("ncrit_vs_delta") + extension(format_), render(t, format_, ls.hash));
        }
        emit(files, ls.hash, std::nullopt);
        if (!quiet_) {
            for (const auto& f : files) out_ << (fs::path(out_dir_) / f.first).string() << "\n";
        }
        return kExitOk;
    }

    struct SimOptions {
        std::uint64_t seed = 1;
        std::size_t rounds = 1000;
        std::size_t burn_in = 0;
        std::size_t seeds = 1;
        double initial_frac = 1.0;
        bool self_supply = false;
        std::string payload_mode = "fixed_multinomial";
        std::size_t threads = 1;
    };

    int simulate(const std::string& path, const ModelOverrides& ov, const SimOptions& so) {
        const auto ls = load(path, ov);
        std::optional<Population> pop;
        std::optional<ClubParams> params;
        if (ls.is_scenario()) {
            const auto& sc = ls.scenario();
            pop.emplace(homogeneous_population(sc.population, sc.mean_payload, sc.distributions()));
            params.emplace(sc.params());
        } else {
            const auto& ps = std::get<PopulationSpec>(ls.spec);
            pop.emplace(ps.population);
            params.emplace(ps.params);
        }
        SimConfig cfg;
        cfg.seed = so.seed;
        cfg.rounds = so.rounds;
        cfg.burn_in = so.burn_in;
        cfg.self_supply = so.self_supply;
        cfg.payload_mode = so.payload_mode == "poisson" ? PayloadMode::poisson : PayloadMode::fixed_multinomial;
        cfg.validate();

        const std::string hash = content_hash(ls.hash + " seed=" + std::to_string(so.seed) +
                                              " rounds=" + std::to_string(so.rounds) +
                                              " burn_in=" + std::to_string(so.burn_in) +
                                              " seeds=" + std::to_string(so.seeds) +
                                              " initial=" + format_double(so.initial_frac) +
                                              " self_supply=" + (so.self_supply ? "1" : "0") +
                                              " mode=" + to_string(cfg.payload_mode));

        const InitialMembership initial{so.initial_frac};
        const auto traj = run(init(*pop, *params, cfg, initial), cfg);
        Table t{{"round", "size", "joins", "leaves", "success_rate"}, {}};
        for (std::size_t r = 0; r < traj.sizes.size(); ++r) {
            t.add({static_cast<long long>(r), static_cast<long long>(traj.sizes[r]),
                   static_cast<long long>(traj.joins[r]), static_cast<long long>(traj.leaves[r]),
                   traj.empirical_success[r]});
        }
        std::vector<std::pair<std::string, std::string>> files;
        files.emplace_back(std::string("trajectory") + extension(format_), render(t, format_, hash));

        const auto model = MeanFieldModel::from_population(*pop, *params);
        const auto eq = stable_equilibrium(model);
        json summary;
        summary["analytic_equilibrium_fraction"] = eq.n_eq / model.population_size();
        summary["control_parameter"] = control_parameter(model);
        summary["equilibrium_fraction"] = traj.equilibrium_fraction(cfg.burn_in, pop->size());

        if (so.seeds > 1) {
            const auto ens = ensemble(*pop, *params, cfg, initial, so.seeds, so.threads);
            Table e{{"round", "mean_frac", "std_frac"}, {}};
            for (std::size_t r = 0; r < ens.mean_frac.size(); ++r) {
                e.add({static_cast<long long>(r), ens.mean_frac[r], ens.std_frac[r]});
            }
            Table s{{"seed_index", "seed", "equilibrium_fraction", "final_size"}, {}};
            for (std::size_t j = 0; j < so.seeds; ++j) {
                s.add({static_cast<long long>(j), std::to_string(so.seed ^ j), ens.equilibrium_fraction[j],
                       static_cast<long long>(ens.final_size[j])});
            }
            files.emplace_back(std::string("ensemble") + extension(format_), render(e, format_, hash));
            files.emplace_back(std::string("ensemble_seeds") + extension(format_), render(s, format_, hash));
            summary["ensemble"] = {{"seeds", so.seeds},
                                   {"mean_equilibrium_fraction", ens.mean_equilibrium_fraction()},
                                   {"std_equilibrium_fraction", ens.std_equilibrium_fraction()},
                                   {"emptied", ens.emptied},
                                   {"sustained", ens.sustained}};
        }
        emit(files, hash, so.seed);
        if (!quiet_) out_ << summary.dump(2) << "\n";
        return kExitOk;
    }

    int phase(const std::string& path, const ModelOverrides& ov, std::size_t resolution) {
        const auto ls = load(path, ov);
        const auto model = model_of(ls);
        Table t{{"n_frac", "p_bar", "phase"}, {}};
        for (const auto& c : phase_field(model, resolution)) t.add({c.n_frac, c.p_bar, std::string(to_string(c.phase))});
        const std::string name = std::string("phase") + extension(format_);
        emit({{name, render(t, format_, ls.hash)}}, ls.hash, std::nullopt);
        if (!quiet_) out_ << (fs::path(out_dir_) / name).string() << "\n";
        return kExitOk;
    }

    void set_globals(const GlobalOptions& g) {
        out_dir_ = g.out_dir;
        format_ = parse_format(g.format);
        quiet_ = g.quiet;
    }

private:
    void emit(const std::vector<std::pair<std::string, std::string>>& files, const std::string& hash,
              std::optional<std::uint64_t> seed) {
        fs::create_directories(out_dir_);
        RunManifest manifest;
        manifest.command_line = recorded_command(args_);
        manifest.config_hash = hash;
        manifest.seed = seed;
        for (const auto& [name, body] : files) {
            write_text(fs::path(out_dir_) / name, body);
            manifest.outputs.push_back(name);
        }
        write_manifests(out_dir_, manifest);
    }

    const std::vector<std::string>& args_;
    std::ostream& out_;
    std::string out_dir_ = ".";
    OutputFormat format_ = OutputFormat::csv;
    bool quiet_ = false;
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Information sharing club: mean-field analysis and membership simulation"};
    app.require_subcommand(1);
    GlobalOptions globals;
    app.add_option("--out-dir", globals.out_dir, "Directory for output files")->capture_default_str();
    app.add_option("--format", globals.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_flag("--quiet", globals.quiet, "Suppress stdout reports");
    app.fallthrough();

    Runner runner(args, out);

    std::string spec_path;
    ModelOverrides ov;

    auto* analyze = app.add_subcommand("analyze", "Threshold, fixed points and critical population of a spec");
    analyze->add_option("spec", spec_path, "Population or scenario spec (JSON)")->required();
    ov.attach(analyze);

    Runner::SweepAxes axes;
    auto* sweep = app.add_subcommand("sweep", "N_crit and equilibrium sweeps over a scenario family");
    sweep->add_option("spec", spec_path, "Scenario spec (JSON)")->required();
    sweep->add_option("--betas", axes.betas, "Zipf exponents for N_crit vs beta");
    sweep->add_option("--s-maxes", axes.s_maxes, "Type counts for N_crit vs beta");
    sweep->add_option("--delta-fracs", axes.delta_fracs, "Shift ratios delta/s_max for N_crit vs delta");
    sweep->add_option("--eq-betas", axes.eq_betas, "Zipf exponents for n_eq/N vs N k rho");
    sweep->add_option("--nkrho", axes.n_k_rhos, "N k rho values for n_eq/N vs N k rho");
    sweep->add_option("--tables", axes.tables, "Subset of tables to write")
        ->check(CLI::IsMember({"beta", "delta", "nkrho"}));
    ov.attach(sweep);

    Runner::SimOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Stochastic membership simulation");
    simulate->add_option("spec", spec_path, "Population or scenario spec (JSON)")->required();
    simulate->add_option("--seed", sim.seed, "Base seed")->capture_default_str();
    simulate->add_option("--rounds", sim.rounds, "Rounds per run")->capture_default_str();
    simulate->add_option("--burn-in", sim.burn_in, "Rounds excluded from equilibrium averages")->capture_default_str();
    simulate->add_option("--seeds", sim.seeds, "Ensemble size")->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--initial-frac", sim.initial_frac, "Initial membership fraction")->capture_default_str();
    simulate->add_flag("--self-supply", sim.self_supply, "Requesters also see their own payload");
    simulate->add_option("--payload-mode", sim.payload_mode, "Payload materialization")
        ->check(CLI::IsMember({"fixed_multinomial", "poisson"}))
        ->capture_default_str();
    simulate->add_option("--threads", sim.threads, "Worker threads for ensembles")->capture_default_str();
    ov.attach(simulate);

    std::size_t resolution = 101;
    auto* phase = app.add_subcommand("phase", "Direction-field grid of the phase diagram");
    phase->add_option("spec", spec_path, "Population or scenario spec (JSON)")->required();
    phase->add_option("--resolution", resolution, "Grid points over n/N in [0, 1]")->capture_default_str();
    ov.attach(phase);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back(); // program name
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUserError;
    }

    runner.set_globals(globals);
    try {
        if (analyze->parsed()) return runner.analyze(spec_path, ov);
        if (sweep->parsed()) return runner.sweep(spec_path, ov, axes);
        if (simulate->parsed()) return runner.simulate(spec_path, ov, sim);
        if (phase->parsed()) return runner.phase(spec_path, ov, resolution);
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << "\n";
        return kExitSolverError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUserError;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUserError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUserError;
    }
    return kExitUserError;
}

} // namespace isc
