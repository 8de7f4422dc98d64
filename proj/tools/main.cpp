// Command-line runner: generate instances, solve them with either policy
// iteration variant, compute structural constants, and verify traces against
// the iteration bounds and per-iteration inequalities.
//
// Exit codes: 0 all checks pass, 1 check violation, 2 budget or iteration
// limit, 3 input error, 4 internal inconsistency.

#include "pibounds/checks.hpp"
#include "pibounds/generators.hpp"
#include "pibounds/json_io.hpp"
#include "pibounds/solvers.hpp"
#include "pibounds/structure.hpp"
#include "pibounds/sweep.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

namespace {

using namespace pibounds;

constexpr int kExitPass = 0;
constexpr int kExitCheckViolation = 1;
constexpr int kExitBudget = 2;
constexpr int kExitInput = 3;
constexpr int kExitInternal = 4;

double env_budget() {
    if (const char* s = std::getenv("PI_BOUNDS_BUDGET")) {
        try {
            return std::stod(s);
        } catch (...) {
            throw InvalidSpec("PI_BOUNDS_BUDGET must be a number");
        }
    }
    return kDefaultEnumerationBudget;
}

struct GenerateArgs {
    std::string family = "dense_random";
    int n = 2;
    int m = 2;
    double gamma = 0.9;
    std::uint64_t seed = 0;
    double reward_lo = 0.0;
    double reward_hi = 1.0;
    int branching = 0;
    int transient = -1;
    std::string out;
};

GenSpec to_spec(const GenerateArgs& args) {
    GenSpec spec;
    spec.family = family_from_string(args.family);
    spec.n = args.n;
    spec.m = args.m;
    spec.gamma = args.gamma;
    spec.seed = args.seed;
    spec.reward_lo = args.reward_lo;
    spec.reward_hi = args.reward_hi;
    if (spec.family == Family::Garnet)
        spec.branching = args.branching > 0 ? args.branching : std::max(1, args.n / 2);
    if (spec.family == Family::TwoBlock) {
        spec.transient = args.transient >= 0 ? args.transient : args.n / 2;
        spec.recurrent = args.n - spec.transient;
    }
    return spec;
}

int cmd_generate(const GenerateArgs& args) {
    GenSpec spec = to_spec(args);
    Mdp mdp = generate(spec);
    save_mdp(mdp, args.out);
    std::cout << "generated " << instance_id(spec) << " -> " << args.out << "\n";
    return kExitPass;
}

int cmd_solve(const std::string& mdp_path, const std::string& variant_name,
              double tol, long long max_iter, const std::string& out) {
    Mdp mdp = load_mdp(mdp_path);
    Variant variant = variant_from_string(variant_name);
    RunOptions options;
    options.tol = tol;
    options.max_iter = max_iter;
    RunTrace trace = run(mdp, Policy(mdp.n, 0), variant, options);
    long long new_classes = 0, broken = 0, cycles = 0;
    for (const auto& rec : trace.records) {
        new_classes += rec.events.new_recurrent_class;
        broken += rec.events.recurrent_class_broken;
        cycles += rec.events.cycle_created;
    }
    std::cout << "variant: " << to_string(variant) << "\n"
              << "iterations: " << trace.iterations << "\n"
              << "final gap: " << trace.final_bellman_residual << "\n"
              << "events: new_class=" << new_classes << " broken=" << broken
              << " cycle=" << cycles << "\n";
    if (!out.empty()) save_json(to_json(trace), out);
    return kExitPass;
}

int cmd_verify(const std::string& mdp_path, const std::string& variant_name,
               double tol, long long max_iter, double budget, const std::string& out) {
    Mdp mdp = load_mdp(mdp_path);
    Variant variant = variant_from_string(variant_name);
    VerifyOptions options;
    options.tol = tol;
    options.max_iter = max_iter;
    options.budget = budget;
    VerifyResult result = verify_instance(mdp, variant, options);

    auto line = [](bool pass, const std::string& what) {
        std::cout << (pass ? "PASS " : "FAIL ") << what << "\n";
    };
    std::cout << "variant: " << to_string(variant)
              << ", iterations: " << result.trace.iterations << "\n";
    if (!result.error.empty()) std::cout << "run error: " << result.error << "\n";
    line(result.optimal_pass,
         fmt::format("optimal value (relative gap {:.3e})", result.final_gap_rel));
    for (const auto& check : result.contraction) {
        if (!check.applicable) continue;
        line(check.pass, fmt::format("{} (worst slack {:.3e}, {} iterations)",
                                     check.name, check.worst_slack,
                                     check.iterations_checked));
    }
    for (const auto& check : result.intervals) {
        if (!check.applicable) continue;
        line(check.pass, fmt::format("{} (max gap {} of {})", check.name,
                                     check.max_gap, check.interval));
    }
    for (const auto& check : result.bound_checks) {
        if (!check.applicable) continue;
        line(check.pass, fmt::format("bound {} = {} >= {} iterations", check.name,
                                     check.value, result.trace.iterations));
    }
    if (result.structure) {
        std::cout << "tau_t=" << result.structure->tau_t
                  << " tau_r=" << result.structure->tau_r << " assumption2="
                  << (result.structure->assumption2_holds ? "true" : "false") << "\n";
    }
    if (result.elimination.state >= 0) {
        std::cout << "eliminated action diagnostic: state " << result.elimination.state
                  << ", action " << result.elimination.action << ", from iteration "
                  << result.elimination.eliminated_at << "\n";
    }
    std::cout << (result.pass ? "VERDICT: PASS" : "VERDICT: FAIL") << "\n";

    if (!out.empty()) {
        nlohmann::json report = {{"variant", to_string(variant)},
                                 {"trace", to_json(result.trace)},
                                 {"bounds", to_json(result.bounds)},
                                 {"final_gap_rel", result.final_gap_rel},
                                 {"pass", result.pass}};
        nlohmann::json contraction = nlohmann::json::array();
        for (const auto& c : result.contraction) contraction.push_back(to_json(c));
        report["contraction"] = std::move(contraction);
        nlohmann::json intervals = nlohmann::json::array();
        for (const auto& c : result.intervals) intervals.push_back(to_json(c));
        report["intervals"] = std::move(intervals);
        nlohmann::json bound_checks = nlohmann::json::array();
        for (const auto& c : result.bound_checks) bound_checks.push_back(to_json(c));
        report["bound_checks"] = std::move(bound_checks);
        report["structure"] =
            result.structure ? to_json(*result.structure) : nlohmann::json();
        save_json(report, out);
    }
    return result.pass ? kExitPass : kExitCheckViolation;
}

int cmd_structure(const std::string& mdp_path, double budget, const std::string& out) {
    Mdp mdp = load_mdp(mdp_path);
    StructuralReport report = structural_constants(mdp, budget);
    Assumption1Check a1 = check_assumption1(mdp, report, budget);
    Assumption2Check a2 = check_assumption2(mdp, budget);
    std::cout << "tau_t: " << report.tau_t << "\n"
              << "tau_r: " << report.tau_r << "\n"
              << "policies enumerated: " << report.policies_enumerated << "\n"
              << "assumption1 self-check: " << (a1.holds ? "holds" : "violated") << "\n"
              << "assumption2: " << (a2.holds ? "holds" : "does not hold") << "\n";
    if (!a2.holds && a2.witness) {
        std::cout << "  witness state " << a2.witness->state
                  << " changes transient/recurrent label across policies\n";
    }
    if (!out.empty()) {
        nlohmann::json j = to_json(report);
        j["assumption1_check"] = a1.holds;
        save_json(j, out);
    }
    return kExitPass;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int jobs) {
    SweepConfig config = sweep_config_from_json(load_json(config_path));
    SweepSummary summary = run_sweep(config, jobs);
    std::filesystem::create_directories(out_dir);
    write_sweep_csv(summary, std::filesystem::path(out_dir) / "sweep.csv");
    save_json(to_json(summary), std::filesystem::path(out_dir) / "sweep.json");
    std::cout << "rows: " << summary.rows.size() << "\n"
              << "all_pass: " << (summary.all_pass ? "true" : "false") << "\n";
    return summary.all_pass ? kExitPass : kExitCheckViolation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact policy iteration with bound and lemma verification"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate_cmd = app.add_subcommand("generate", "write a seeded MDP instance");
    generate_cmd->add_option("--family", gen.family, "instance family")
        ->check(CLI::IsMember({"dense_random", "deterministic", "garnet", "two_block"}));
    generate_cmd->add_option("--n", gen.n, "number of states");
    generate_cmd->add_option("--m", gen.m, "actions per state");
    generate_cmd->add_option("--gamma", gen.gamma, "discount factor");
    generate_cmd->add_option("--seed", gen.seed, "generator seed");
    generate_cmd->add_option("--reward-lo", gen.reward_lo, "reward range low end");
    generate_cmd->add_option("--reward-hi", gen.reward_hi, "reward range high end");
    generate_cmd->add_option("--branching", gen.branching, "garnet successors per (state, action)");
    generate_cmd->add_option("--transient", gen.transient, "two_block transient block size");
    generate_cmd->add_option("--out", gen.out, "output path")->required();

    std::string mdp_path, variant_name = "howard", out;
    double tol = -1.0;
    long long max_iter = -1;
    double budget = env_budget();
    int jobs = 0;

    auto add_common = [&](CLI::App* cmd, bool with_variant) {
        cmd->add_option("mdp", mdp_path, "model JSON path")->required();
        if (with_variant) {
            cmd->add_option("--variant", variant_name, "howard or simplex")
                ->check(CLI::IsMember({"howard", "simplex"}));
            cmd->add_option("--tol", tol, "advantage tolerance (negative: scaled default)");
            cmd->add_option("--max-iter", max_iter, "iteration cap (negative: theorem bound)");
        }
        cmd->add_option("--out", out, "report output path");
    };

    auto* solve_cmd = app.add_subcommand("solve", "run one variant and print the trace summary");
    add_common(solve_cmd, true);

    auto* verify_cmd = app.add_subcommand("verify", "solve, then check bounds and inequalities");
    add_common(verify_cmd, true);
    verify_cmd->add_option("--budget", budget, "policy enumeration budget");

    auto* structure_cmd = app.add_subcommand("structure", "structural constants and assumptions");
    add_common(structure_cmd, false);
    structure_cmd->add_option("--budget", budget, "policy enumeration budget");

    std::string config_path, sweep_out = "sweep_out";
    auto* sweep_cmd = app.add_subcommand("sweep", "verify a whole instance grid");
    sweep_cmd->add_option("config", config_path, "sweep config JSON")->required();
    sweep_cmd->add_option("--out", sweep_out, "output directory");
    sweep_cmd->add_option("--jobs", jobs, "worker threads (0: config value)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitPass : kExitInput;
    }

    try {
        if (app.got_subcommand(generate_cmd)) return cmd_generate(gen);
        if (app.got_subcommand(solve_cmd))
            return cmd_solve(mdp_path, variant_name, tol, max_iter, out);
        if (app.got_subcommand(verify_cmd))
            return cmd_verify(mdp_path, variant_name, tol, max_iter, budget, out);
        if (app.got_subcommand(structure_cmd)) return cmd_structure(mdp_path, budget, out);
        if (app.got_subcommand(sweep_cmd)) return cmd_sweep(config_path, sweep_out, jobs);
        std::cerr << "no subcommand selected\n";
        return kExitInput;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kExitBudget;
    } catch (const MaxIterExceeded& e) {
        std::cerr << "iteration limit: " << e.what() << "\n";
        return kExitBudget;
    } catch (const InternalInconsistency& e) {
        std::cerr << "internal inconsistency: " << e.what() << "\n";
        return kExitInternal;
    } catch (const SingularSystem& e) {
        std::cerr << "internal inconsistency: " << e.what() << "\n";
        return kExitInternal;
    } catch (const OracleInconsistent& e) {
        std::cerr << "internal inconsistency: " << e.what() << "\n";
        return kExitInternal;
    } catch (const CacheInconsistent& e) {
        std::cerr << "internal inconsistency: " << e.what() << "\n";
        return kExitInternal;
    } catch (const ValidationError& e) {
        std::cerr << "invalid model: " << e.what() << "\n";
        return kExitInput;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitInput;
    } catch (const InvalidSpec& e) {
        std::cerr << "invalid spec: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
