#include "pibounds/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <thread>

namespace pibounds {

VerifyResult verify_instance(const Mdp& mdp, Variant variant,
                             const VerifyOptions& options) {
    VerifyResult result;
    if (policy_count(mdp) <= options.budget)
        result.structure = structural_constants(mdp, options.budget);

    result.oracle = optimal_oracle(mdp);

    RunOptions run_options;
    run_options.tol = options.tol;
    run_options.max_iter = options.max_iter;
    run_options.v_star = &result.oracle.value;
    try {
        result.trace = run(mdp, Policy(mdp.n, 0), variant, run_options);
    } catch (const MaxIterExceeded& e) {
        result.trace = e.trace;
        result.error = e.what();
    }

    const StructuralReport* structure =
        result.structure ? &*result.structure : nullptr;
    result.bounds = standard_bounds(mdp, variant, structure);
    result.bound_checks = check_bounds(result.trace, result.bounds);
    result.bounds_pass = std::ranges::all_of(
        result.bound_checks, [](const BoundCheckResult& r) { return r.pass; });

    if (result.trace.completed) {
        ContractionOptions copts;
        if (structure) {
            copts.tau_r = structure->tau_r;
            copts.assumption2_holds = structure->assumption2_holds;
        }
        result.contraction = check_contraction(mdp, result.trace, result.oracle.value, copts);
        result.elimination = elimination_diagnostic(mdp, result.trace, result.oracle.value);
        if (structure) {
            result.intervals = check_event_intervals(
                mdp, result.trace,
                event_intervals(mdp.n, mdp.m, structure->tau_t, structure->tau_r));
        }
        Value diff = result.trace.final_value - result.oracle.value;
        result.final_gap_rel = diff.lpNorm<Eigen::Infinity>()
            / (1.0 + result.oracle.value.lpNorm<Eigen::Infinity>());
        result.optimal_pass = result.final_gap_rel <= kOptimalityRel;
    }
    result.contraction_pass = std::ranges::all_of(
        result.contraction, [](const LemmaCheck& c) { return c.pass; });
    result.intervals_pass = std::ranges::all_of(
        result.intervals, [](const IntervalCheck& c) { return c.pass; });
    result.pass = result.trace.completed && result.error.empty() && result.optimal_pass
        && result.contraction_pass && result.intervals_pass && result.bounds_pass;
    return result;
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) try {
    if (!j.is_object()) throw ParseError("sweep config must be a JSON object");
    SweepConfig config;
    auto grids = j.find("grids");
    if (grids == j.end() || !grids->is_array() || grids->empty())
        throw ParseError("sweep config needs a non-empty 'grids' array");
    for (const auto& g : *grids) {
        SweepGrid grid;
        grid.family = family_from_string(g.value("family", std::string("dense_random")));
        grid.n_values = g.value("n", std::vector<int>{});
        grid.m_values = g.value("m", std::vector<int>{});
        grid.gamma_values = g.value("gamma", std::vector<double>{});
        grid.seed_begin = g.value("seed_begin", std::uint64_t{0});
        grid.seed_count = g.value("seed_count", std::uint64_t{1});
        grid.reward_lo = g.value("reward_lo", 0.0);
        grid.reward_hi = g.value("reward_hi", 1.0);
        grid.branching = g.value("branching", 0);
        grid.transient = g.value("transient", -1);
        if (grid.n_values.empty() || grid.m_values.empty() || grid.gamma_values.empty())
            throw ParseError("each grid needs non-empty n, m, gamma arrays");
        if (grid.seed_count == 0) throw ParseError("seed_count must be >= 1");
        config.grids.push_back(std::move(grid));
    }
    if (auto it = j.find("variants"); it != j.end()) {
        config.variants.clear();
        for (const auto& v : *it)
            config.variants.push_back(variant_from_string(v.get<std::string>()));
        if (config.variants.empty()) throw ParseError("variants must be non-empty");
    }
    config.tol = j.value("tol", -1.0);
    config.budget = j.value("budget", kDefaultEnumerationBudget);
    config.jobs = j.value("jobs", 1);
    return config;
} catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("bad sweep config: {}", e.what()));
}

namespace {

GenSpec grid_spec(const SweepGrid& grid, int n, int m, double gamma, std::uint64_t seed) {
    GenSpec spec;
    spec.family = grid.family;
    spec.n = n;
    spec.m = m;
    spec.gamma = gamma;
    spec.seed = seed;
    spec.reward_lo = grid.reward_lo;
    spec.reward_hi = grid.reward_hi;
    if (grid.family == Family::Garnet)
        spec.branching = grid.branching > 0 ? grid.branching : std::max(1, n / 2);
    if (grid.family == Family::TwoBlock) {
        spec.transient = grid.transient >= 0 ? grid.transient : n / 2;
        spec.recurrent = n - spec.transient;
    }
    return spec;
}

struct Task {
    GenSpec spec;
    Variant variant;
    std::string id;
};

std::vector<Task> build_tasks(const SweepConfig& config) {
    std::vector<Task> tasks;
    std::set<std::pair<std::string, Variant>> seen;
    for (const auto& grid : config.grids) {
        for (int n : grid.n_values) {
            for (int m : grid.m_values) {
                for (double gamma : grid.gamma_values) {
                    for (std::uint64_t s = 0; s < grid.seed_count; ++s) {
                        GenSpec spec = grid_spec(grid, n, m, gamma, grid.seed_begin + s);
                        validate_spec(spec);
                        std::string id = instance_id(spec);
                        for (Variant variant : config.variants) {
                            if (!seen.emplace(id, variant).second)
                                throw InvalidSpec(fmt::format(
                                    "duplicate instance '{}' in sweep config", id));
                            tasks.push_back({spec, variant, id});
                        }
                    }
                }
            }
        }
    }
    return tasks;
}

SweepRow run_task(const Task& task, const SweepConfig& config) {
    SweepRow row;
    row.instance = task.id;
    row.spec = task.spec;
    row.variant = task.variant;
    try {
        Mdp mdp = generate(task.spec);
        VerifyOptions options;
        options.tol = config.tol;
        options.budget = config.budget;
        VerifyResult v = verify_instance(mdp, task.variant, options);
        row.iterations = v.trace.iterations;
        row.final_gap_rel = v.final_gap_rel;
        row.optimal_pass = v.optimal_pass;
        for (const auto& check : v.contraction)
            row.worst_contraction_slack =
                std::max(row.worst_contraction_slack, check.worst_slack);
        row.contraction_pass = v.contraction_pass;
        for (const auto& rec : v.trace.records) {
            row.new_class_events += rec.events.new_recurrent_class;
            row.broken_class_events += rec.events.recurrent_class_broken;
            row.cycle_events += rec.events.cycle_created;
        }
        row.intervals_pass = v.intervals_pass;
        if (v.structure) {
            row.tau_t = v.structure->tau_t;
            row.tau_r = v.structure->tau_r;
            row.assumption2 = v.structure->assumption2_holds;
        }
        row.bound_checks = v.bound_checks;
        row.bounds_pass = v.bounds_pass;
        row.pass = v.pass;
        if (!v.error.empty()) row.status = v.error;
    } catch (const std::exception& e) {
        row.pass = false;
        row.status = e.what();
    }
    return row;
}

// Tightest applicable bound for a row, used by the aggregate ratio.
double tightest_bound(const SweepRow& row) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : row.bound_checks)
        if (b.applicable) best = std::min(best, std::floor(b.value));
    return best;
}

} // namespace

SweepSummary run_sweep(const SweepConfig& config, int jobs_override) {
    std::vector<Task> tasks = build_tasks(config);
    const int jobs = std::max(1, jobs_override > 0 ? jobs_override : config.jobs);

    SweepSummary summary;
    summary.rows.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            summary.rows[i] = run_task(tasks[i], config);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::ranges::sort(summary.rows, [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.instance, a.variant) < std::tie(b.instance, b.variant);
    });

    std::map<std::tuple<std::string, int, int, double>, AggregateRow> groups;
    for (const auto& row : summary.rows) {
        auto key = std::make_tuple(to_string(row.spec.family), row.spec.n,
                                   row.spec.m, row.spec.gamma);
        auto [it, inserted] = groups.try_emplace(key);
        AggregateRow& agg = it->second;
        if (inserted) {
            agg.family = row.spec.family;
            agg.n = row.spec.n;
            agg.m = row.spec.m;
            agg.gamma = row.spec.gamma;
            agg.all_pass = true;
        }
        agg.max_iterations = std::max(agg.max_iterations, row.iterations);
        double bound = tightest_bound(row);
        if (std::isfinite(bound) && bound > 0.0)
            agg.worst_bound_ratio =
                std::max(agg.worst_bound_ratio, row.iterations / bound);
        agg.all_pass = agg.all_pass && row.pass;
    }
    for (auto& [key, agg] : groups) summary.aggregates.push_back(agg);
    summary.all_pass = std::ranges::all_of(
        summary.rows, [](const SweepRow& r) { return r.pass; });
    return summary;
}

namespace {

// 17 significant digits: enough for any float64 to parse back bit-exactly.
std::string fmt17(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", x);
    return buffer;
}

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    return s;
}

const char* const kBoundColumns[] = {
    "howard_gamma", "hansen_prior", "simplex_gamma", "simplex_gamma2",
    "simplex_structural", "ye_prior", "structural_both",
};

} // namespace

void write_sweep_csv(const SweepSummary& summary, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    out << "instance,variant,family,n,m,gamma,seed,iterations,final_gap_rel,"
           "optimal_pass,worst_contraction_slack,contraction_pass,"
           "new_class_events,broken_class_events,cycle_events,intervals_pass,"
           "tau_t,tau_r,assumption2";
    for (const char* name : kBoundColumns)
        out << ",bound_" << name << ",bound_" << name << "_pass";
    out << ",bounds_pass,pass,status\n";

    auto bocell = [](std::optional<bool> b) {
        return !b ? std::string() : (*b ? std::string("true") : std::string("false"));
    };
    for (const auto& row : summary.rows) {
        out << row.instance << ',' << to_string(row.variant) << ','
            << to_string(row.spec.family) << ',' << row.spec.n << ',' << row.spec.m
            << ',' << fmt17(row.spec.gamma) << ',' << row.spec.seed << ','
            << row.iterations << ',' << fmt17(row.final_gap_rel) << ','
            << bocell(row.optimal_pass) << ',' << fmt17(row.worst_contraction_slack)
            << ',' << bocell(row.contraction_pass) << ',' << row.new_class_events
            << ',' << row.broken_class_events << ',' << row.cycle_events << ','
            << bocell(row.intervals_pass) << ','
            << (row.tau_t ? fmt17(*row.tau_t) : std::string()) << ','
            << (row.tau_r ? fmt17(*row.tau_r) : std::string()) << ','
            << bocell(row.assumption2);
        for (const char* name : kBoundColumns) {
            auto it = std::ranges::find_if(row.bound_checks, [&](const auto& b) {
                return b.name == name && b.applicable;
            });
            if (it == row.bound_checks.end())
                out << ",,";
            else
                out << ',' << fmt17(it->value) << ',' << bocell(it->pass);
        }
        out << ',' << bocell(row.bounds_pass) << ',' << bocell(row.pass) << ','
            << csv_safe(row.status) << '\n';
    }
}

nlohmann::json to_json(const SweepSummary& summary) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : summary.rows) {
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& b : row.bound_checks) checks.push_back(to_json(b));
        nlohmann::json r = {{"instance", row.instance},
                            {"spec", to_json(row.spec)},
                            {"variant", to_string(row.variant)},
                            {"iterations", row.iterations},
                            {"final_gap_rel", row.final_gap_rel},
                            {"optimal_pass", row.optimal_pass},
                            {"worst_contraction_slack", row.worst_contraction_slack},
                            {"contraction_pass", row.contraction_pass},
                            {"new_class_events", row.new_class_events},
                            {"broken_class_events", row.broken_class_events},
                            {"cycle_events", row.cycle_events},
                            {"intervals_pass", row.intervals_pass},
                            {"bound_checks", std::move(checks)},
                            {"bounds_pass", row.bounds_pass},
                            {"pass", row.pass},
                            {"status", row.status}};
        r["tau_t"] = row.tau_t ? nlohmann::json(*row.tau_t) : nlohmann::json();
        r["tau_r"] = row.tau_r ? nlohmann::json(*row.tau_r) : nlohmann::json();
        r["assumption2"] =
            row.assumption2 ? nlohmann::json(*row.assumption2) : nlohmann::json();
        rows.push_back(std::move(r));
    }
    nlohmann::json aggregates = nlohmann::json::array();
    for (const auto& agg : summary.aggregates) {
        aggregates.push_back({{"family", to_string(agg.family)},
                              {"n", agg.n},
                              {"m", agg.m},
                              {"gamma", agg.gamma},
                              {"max_iterations", agg.max_iterations},
                              {"worst_bound_ratio", agg.worst_bound_ratio},
                              {"all_pass", agg.all_pass}});
    }
    return {{"rows", std::move(rows)},
            {"aggregates", std::move(aggregates)},
            {"all_pass", summary.all_pass}};
}

} // namespace pibounds
