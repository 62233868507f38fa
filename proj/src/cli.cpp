#include "abstrip/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "abstrip/asymptotics.hpp"
#include "abstrip/mcharness.hpp"
#include "abstrip/parallel.hpp"
#include "abstrip/rng.hpp"
#include "abstrip/scenario_io.hpp"
#include "abstrip/scenarios.hpp"

namespace abstrip {

namespace {

using nlohmann::ordered_json;

/// I/O and usage failures map to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Resolved {
    std::string id;
    Scenario scenario;
    double d_inf = 0.5;
    bool separate = false;
};

Resolved resolve(const std::string& arg) {
    for (const auto& id : scenario_ids()) {
        if (id == arg) {
            const auto& named = get_scenario(id);
            return {named.id, named.scenario, named.d_inf, id == "ranking-separate"};
        }
    }
    if (!std::filesystem::exists(arg)) {
        std::string known;
        for (const auto& id : scenario_ids()) known += (known.empty() ? "" : ", ") + id;
        throw UsageError("'" + arg + "' is neither a built-in scenario (" + known + ") nor a readable file");
    }
    try {
        auto file = load_scenario_file(arg);
        return {file.id, file.scenario, 0.5, false};
    } catch (const ScenarioParseError& e) {
        throw UsageError(e.what());
    }
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty()) {
        fallback << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + path);
    f << text;
    if (!f) throw UsageError("cannot write " + path);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ordered_json matrix_json(const Eigen::Matrix3d& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
    return rows;
}

int cmd_validate(const std::string& arg, std::ostream& out, std::ostream& err) {
    const auto r = resolve(arg);
    for (const auto& w : positivity_warnings(r.scenario)) err << "warning: " << w << '\n';
    const auto violations = validate_scenario(r.scenario);
    if (violations.empty()) {
        out << r.id << ": valid\n";
        return exit_ok;
    }
    for (const auto& v : violations) err << v.field << ": " << v.rule << '\n';
    return exit_domain;
}

struct SimulateArgs {
    std::string scenario;
    std::int64_t n = 0;
    std::int64_t replicates = 1;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::string mode;
    std::string engine = "fast";
    std::string out_path, summary_path;
    int threads = 0;
    std::int64_t inventory = -1;
    double d_inf = -1.0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    const auto r = resolve(a.scenario);
    require_valid(r.scenario);
    BatchConfig cfg;
    cfg.n = a.n;
    cfg.replicates = a.replicates;
    cfg.alpha = a.alpha;
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    cfg.scenario_id = r.id;
    cfg.engine = a.engine == "exact" ? Engine::exact_steps : Engine::fast_aggregate;
    cfg.mode = a.mode.empty() ? (r.separate ? Mode::separate : Mode::shared)
                              : (a.mode == "separate" ? Mode::separate : Mode::shared);
    if (a.inventory >= 0) cfg.inventory = a.inventory;
    if (a.d_inf >= 0.0)
        cfg.inventory = static_cast<std::int64_t>(std::floor(a.d_inf * std::sqrt(static_cast<double>(a.n))));

    const auto rows = run_batch(r.scenario, cfg);
    if (!a.out_path.empty()) {
        std::ostringstream csv;
        write_csv(csv, rows);
        write_text(a.out_path, csv.str(), out);
    }
    const auto summary = summarize(rows, cfg.alpha, cfg.mode, r.id);
    std::optional<TheoryPrediction> prediction;
    if (cfg.mode == Mode::shared) prediction = predict(r.scenario, summary.n, summary.c_n, cfg.alpha);
    write_text(a.summary_path, summary_json(summary, prediction), out);
    return exit_ok;
}

int cmd_theory(const std::string& arg, double alpha, std::optional<double> d_inf_flag, std::ostream& out) {
    const auto r = resolve(arg);
    require_valid(r.scenario);
    const double d_inf = d_inf_flag.value_or(r.d_inf);
    const auto m = derive_moments(r.scenario);
    const double p = r.scenario.p;
    const double delta = noncentrality(m, p, d_inf);
    const auto [d2, d3] = drift(m, p, d_inf);
    const auto slln = slln_limits(m, p, 0.0);

    ordered_json j;
    j["scenario_id"] = r.id;
    j["alpha"] = alpha;
    j["d_inf"] = d_inf;
    j["delta"] = delta;
    j["asym_reject_prob"] = asym_reject_prob(delta, alpha);
    j["slln"] = {{"c_inf", 0.0}, {"l0_rate", slln.l0_rate}, {"l1_rate", slln.l1_rate}, {"c0", slln.c0}, {"c1", slln.c1}};
    j["d2"] = d2;
    j["d3"] = d3;
    ordered_json marginal = ordered_json::object();
    for (int arm = 0; arm < 2; ++arm) {
        try {
            const auto [mean, var] = marginal_conv_rate_limit(m, arm, d_inf);
            marginal["arm" + std::to_string(arm)] = {{"mean", mean}, {"variance", var}};
        } catch (const DegenerateScenario&) {
            marginal["arm" + std::to_string(arm)] = nullptr;
        }
    }
    j["marginal"] = marginal;
    j["V1"] = matrix_json(build_v1(m, p));
    out << j.dump(2) << '\n';
    return exit_ok;
}

struct SweepArgs {
    std::string scenario;
    std::string kind = "reject-prob";
    double from = 0.0, to = 1.0;
    std::int64_t steps = 2;
    double alpha = 0.05;
    std::int64_t iters = 2'000'000;
    std::int64_t replicates = 1000;
    std::int64_t n = 1'000'000;
    std::uint64_t seed = 0;
    std::string engine = "fast";
    std::string out_path;
    int threads = 0;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    if (a.steps < 2) throw UsageError("sweep needs --steps >= 2");
    if (!(a.from < a.to)) throw UsageError("sweep needs --from < --to");
    if (a.from < 0.0) throw UsageError("sweep needs --from >= 0");
    const auto r = resolve(a.scenario);
    require_valid(r.scenario);
    const auto m = derive_moments(r.scenario);
    const double p = r.scenario.p;

    std::ostringstream csv;
    csv << "d_inf,value,stderr\n";
    for (std::int64_t i = 0; i < a.steps; ++i) {
        const double d = a.from + (a.to - a.from) * static_cast<double>(i) / static_cast<double>(a.steps - 1);
        const std::uint64_t seed = derive_seed(a.seed, static_cast<std::uint64_t>(i));
        double value = 0.0, se = 0.0;
        if (a.kind == "reject-prob") {
            value = asym_reject_prob(noncentrality(m, p, d), a.alpha);
        } else if (a.kind == "power-mc") {
            const auto est = asym_power_mc(m, p, d, a.alpha, a.iters, seed, a.threads);
            value = est.estimate;
            se = est.std_error;
        } else {
            BatchConfig cfg;
            cfg.n = a.n;
            cfg.replicates = a.replicates;
            cfg.alpha = a.alpha;
            cfg.seed = seed;
            cfg.threads = a.threads;
            cfg.engine = a.engine == "exact" ? Engine::exact_steps : Engine::fast_aggregate;
            cfg.inventory = static_cast<std::int64_t>(std::floor(d * std::sqrt(static_cast<double>(a.n))));
            const auto summary = summarize(run_batch(r.scenario, cfg), a.alpha, Mode::shared, r.id);
            value = summary.reject_rate;
            se = std::sqrt(value * (1.0 - value) / static_cast<double>(summary.replicates));
        }
        csv << fmt17(d) << ',' << fmt17(value) << ',' << fmt17(se) << '\n';
    }
    write_text(a.out_path, csv.str(), out);
    return exit_ok;
}

int cmd_export(const std::string& arg, const std::string& format, const std::string& path, std::ostream& out) {
    const auto r = resolve(arg);
    write_text(path, format == "json" ? to_json(r.scenario, r.id) : to_yaml(r.scenario, r.id), out);
    return exit_ok;
}

int cmd_list(std::ostream& out) {
    for (const auto& id : scenario_ids()) out << id << '\t' << get_scenario(id).description << '\n';
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"A/B tests on a shared inventory: simulation and asymptotic theory", "abstrip"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "List the built-in scenarios");

    std::string validate_target;
    auto* validate = app.add_subcommand("validate", "Check a scenario's invariants");
    validate->add_option("scenario", validate_target, "Built-in id or scenario file")->required();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run replicate batches and summarize them");
    simulate->add_option("scenario", sim.scenario, "Built-in id or scenario file")->required();
    simulate->add_option("--n", sim.n, "Visitors per replicate")->required()->check(CLI::PositiveNumber);
    simulate->add_option("--replicates", sim.replicates, "Replicates")->check(CLI::PositiveNumber);
    simulate->add_option("--alpha", sim.alpha, "Test level")->check(CLI::Bound(1e-12, 1.0 - 1e-12));
    simulate->add_option("--seed", sim.seed, "Base seed");
    simulate->add_option("--mode", sim.mode, "shared or separate inventory")
        ->check(CLI::IsMember({"shared", "separate"}));
    simulate->add_option("--engine", sim.engine, "exact or fast")->check(CLI::IsMember({"exact", "fast"}));
    simulate->add_option("--out", sim.out_path, "Per-replicate CSV");
    simulate->add_option("--summary", sim.summary_path, "Summary JSON (default: standard output)");
    simulate->add_option("--threads", sim.threads, "Worker threads")->check(CLI::NonNegativeNumber);
    auto* inv = simulate->add_option("--inventory", sim.inventory, "Inventory c_n")->check(CLI::NonNegativeNumber);
    auto* dinf = simulate->add_option("--d-inf", sim.d_inf, "Inventory floor(d_inf sqrt(n))")
                     ->check(CLI::NonNegativeNumber);
    inv->excludes(dinf);

    std::string theory_target;
    double theory_alpha = 0.05, theory_dinf = 0.0;
    auto* theory = app.add_subcommand("theory", "Closed-form limits as JSON");
    theory->add_option("scenario", theory_target, "Built-in id or scenario file")->required();
    theory->add_option("--alpha", theory_alpha, "Test level")->check(CLI::Bound(1e-12, 1.0 - 1e-12));
    auto* theory_d = theory->add_option("--d-inf", theory_dinf, "Limit of c_n / sqrt(n)")
                         ->check(CLI::NonNegativeNumber);

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Tabulate a quantity over a d_inf grid");
    sweep->add_option("scenario", sw.scenario, "Built-in id or scenario file")->required();
    sweep->add_option("--kind", sw.kind, "reject-prob, power-mc or sim-reject")
        ->check(CLI::IsMember({"reject-prob", "power-mc", "sim-reject"}));
    sweep->add_option("--from", sw.from, "First d_inf");
    sweep->add_option("--to", sw.to, "Last d_inf");
    sweep->add_option("--steps", sw.steps, "Grid points");
    sweep->add_option("--alpha", sw.alpha, "Test level")->check(CLI::Bound(1e-12, 1.0 - 1e-12));
    sweep->add_option("--iters", sw.iters, "Draws per point (power-mc)")->check(CLI::PositiveNumber);
    sweep->add_option("--replicates", sw.replicates, "Replicates per point (sim-reject)")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--n", sw.n, "Visitors per replicate (sim-reject)")->check(CLI::PositiveNumber);
    sweep->add_option("--engine", sw.engine, "exact or fast")->check(CLI::IsMember({"exact", "fast"}));
    sweep->add_option("--seed", sw.seed, "Base seed; point i uses a derived stream");
    sweep->add_option("--out", sw.out_path, "CSV path (default: standard output)");
    sweep->add_option("--threads", sw.threads, "Worker threads")->check(CLI::NonNegativeNumber);

    std::string export_target, export_format = "yaml", export_path;
    auto* exp = app.add_subcommand("export", "Write a scenario in the file format");
    exp->add_option("scenario", export_target, "Built-in id or scenario file")->required();
    exp->add_option("--format", export_format, "yaml or json")->check(CLI::IsMember({"yaml", "json"}));
    exp->add_option("--out", export_path, "Output path (default: standard output)");

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("abstrip");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_usage;
    }

    try {
        if (*list) return cmd_list(out);
        if (*validate) return cmd_validate(validate_target, out, err);
        if (*simulate) return cmd_simulate(sim, out);
        if (*theory)
            return cmd_theory(theory_target, theory_alpha,
                              theory_d->count() ? std::optional<double>(theory_dinf) : std::nullopt, out);
        if (*sweep) return cmd_sweep(sw, out);
        if (*exp) return cmd_export(export_target, export_format, export_path, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const ValidationError& e) {
        err << "invalid scenario:\n";
        for (const auto& v : e.violations()) err << "  " << v.field << ": " << v.rule << '\n';
        return exit_domain;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_domain;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_domain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}

}  // namespace abstrip
