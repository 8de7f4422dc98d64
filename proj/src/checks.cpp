#include "pibounds/checks.hpp"

#include "pibounds/bellman.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <stdexcept>

namespace pibounds {

Optimal optimal_oracle_enumeration(const Mdp& mdp, double budget) {
    validate(mdp);
    const double count = policy_count(mdp);
    if (count > budget) throw BudgetExceeded(count, budget);

    const int n = mdp.n;
    std::vector<Policy> policies;
    std::vector<Value> values;
    Value best = Value::Constant(n, -std::numeric_limits<double>::infinity());
    Policy pi(n, 0);
    do {
        values.push_back(policy_evaluation(mdp, pi));
        policies.push_back(pi);
        best = best.cwiseMax(values.back());
    } while (next_policy(pi, mdp.m));

    double eps = kOracleTol * (1.0 + best.lpNorm<Eigen::Infinity>());
    for (std::size_t k = 0; k < policies.size(); ++k) {
        if (((best - values[k]).array() <= eps).all())
            return {values[k], policies[k]};
    }
    throw OracleInconsistent(
        "no single policy attains the componentwise max value");
}

Optimal optimal_oracle_howard(const Mdp& mdp) {
    RunOptions options;
    options.detect_events = false;
    options.value_store_cap = 0;
    RunTrace trace = run(mdp, Policy(mdp.n, 0), Variant::Howard, options);
    double cert = kOracleTol * (1.0 + trace.final_value.lpNorm<Eigen::Infinity>());
    if (trace.final_bellman_residual > cert)
        throw OracleInconsistent(fmt::format(
            "solver-certified value has Bellman residual {}", trace.final_bellman_residual));
    return {trace.final_value, trace.final_policy};
}

Optimal optimal_oracle(const Mdp& mdp) {
    return policy_count(mdp) <= kEnumerationOracleCap ? optimal_oracle_enumeration(mdp)
                                                      : optimal_oracle_howard(mdp);
}

double identity_residual_inf(const Mdp& mdp, const Policy& pi, const Policy& pi_prime) {
    Value v = policy_evaluation(mdp, pi);
    Value v_prime = policy_evaluation(mdp, pi_prime);
    Value rhs_numer = apply_T_pi(mdp, pi_prime, v) - v;
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(mdp.n, mdp.n)
        - mdp.gamma * transition_matrix(mdp, pi_prime);
    Value rhs = a.partialPivLu().solve(rhs_numer);
    double residual = ((v_prime - v) - rhs).lpNorm<Eigen::Infinity>();
    return residual / (1.0 + v_prime.lpNorm<Eigen::Infinity>());
}

double identity_residual_l1(const Mdp& mdp, const Policy& pi, const Policy& pi_prime) {
    Value v = policy_evaluation(mdp, pi);
    Value v_prime = policy_evaluation(mdp, pi_prime);
    Value x = visitation(mdp, pi_prime);
    double lhs = (v_prime - v).sum();
    double rhs = x.dot(apply_T_pi(mdp, pi_prime, v) - v);
    return std::abs(lhs - rhs) / (1.0 + v_prime.cwiseAbs().sum());
}

namespace {

struct GapSeries {
    std::vector<double> inf;
    std::vector<double> l1;
};

// Gap of every visited policy against v_star, iterations + 1 entries.
// Prefers recomputing from stored values (so the caller's v_star is the one
// measured against); falls back to the gaps recorded during the run.
GapSeries gap_series(const Mdp& mdp, const RunTrace& trace, const Value& v_star) {
    GapSeries g;
    auto push = [&](const Value& v) {
        Value gap = v_star - v;
        g.inf.push_back(std::max(0.0, gap.maxCoeff()));
        g.l1.push_back(std::max(0.0, gap.sum()));
    };
    bool stored = trace.final_value.size() == mdp.n;
    for (const auto& rec : trace.records)
        stored = stored && rec.value_before.size() == mdp.n;
    if (stored) {
        for (const auto& rec : trace.records) push(rec.value_before);
        push(trace.final_value);
        return g;
    }
    if (trace.gaps_inf.size() == static_cast<std::size_t>(trace.iterations) + 1) {
        g.inf = trace.gaps_inf;
        g.l1 = trace.gaps_l1;
        return g;
    }
    throw std::invalid_argument(
        "trace carries neither value vectors nor recorded gaps");
}

LemmaCheck gap_inequality(const std::string& name, const std::vector<double>& gaps,
                          double factor, const std::vector<bool>& at) {
    LemmaCheck check;
    check.name = name;
    for (std::size_t k = 0; k + 1 < gaps.size(); ++k) {
        if (!at[k]) continue;
        ++check.iterations_checked;
        double slack = gaps[k + 1] - factor * gaps[k];
        check.worst_slack = std::max(check.worst_slack, slack);
        if (gaps[k] > 1e-12)
            check.worst_ratio = std::max(check.worst_ratio, gaps[k + 1] / gaps[k]);
        if (slack > kContractionSlack) {
            check.pass = false;
            check.failed_iterations.push_back(static_cast<long long>(k));
        }
    }
    return check;
}

} // namespace

std::vector<LemmaCheck> check_contraction(const Mdp& mdp, const RunTrace& trace,
                                          const Value& v_star,
                                          const ContractionOptions& options) {
    if (!trace.completed)
        throw std::invalid_argument("contraction checks need a completed trace");
    GapSeries gaps = gap_series(mdp, trace, v_star);
    const std::size_t steps = trace.records.size();
    std::vector<bool> every(steps, true), new_class(steps, false), new_cycle(steps, false);
    for (std::size_t k = 0; k < steps; ++k) {
        new_class[k] = trace.records[k].events.new_recurrent_class;
        new_cycle[k] = trace.records[k].events.cycle_created;
    }

    std::vector<LemmaCheck> checks;
    if (trace.variant == Variant::Howard) {
        checks.push_back(gap_inequality("howard_gap_contraction", gaps.inf,
                                        mdp.gamma, every));
        LemmaCheck nc = gap_inequality("howard_new_class_gain", gaps.l1,
                                       options.tau_r > 0.0 ? 1.0 - 1.0 / options.tau_r : 1.0,
                                       new_class);
        nc.applicable = options.tau_r > 0.0 && options.assumption2_holds;
        if (!nc.applicable) {
            nc.pass = true;
            nc.failed_iterations.clear();
        }
        checks.push_back(std::move(nc));
    } else {
        checks.push_back(gap_inequality("simplex_gap_contraction", gaps.l1,
                                        1.0 - (1.0 - mdp.gamma) / mdp.n, every));
        LemmaCheck nc = gap_inequality("simplex_new_class_gain", gaps.l1,
                                       options.tau_r > 0.0 ? 1.0 - 1.0 / options.tau_r : 1.0,
                                       new_class);
        nc.applicable = options.tau_r > 0.0;
        if (!nc.applicable) {
            nc.pass = true;
            nc.failed_iterations.clear();
        }
        checks.push_back(std::move(nc));
        LemmaCheck cyc = gap_inequality("simplex_new_cycle_gain", gaps.l1,
                                        1.0 - 1.0 / mdp.n, new_cycle);
        cyc.applicable = is_deterministic(mdp);
        if (!cyc.applicable) {
            cyc.pass = true;
            cyc.failed_iterations.clear();
        }
        checks.push_back(std::move(cyc));
    }
    return checks;
}

namespace {

// Longest stretch of consecutive iterations without the event, where both
// an event and the completed run's termination close a stretch.
long long longest_event_gap(const RunTrace& trace, bool use_cycle_flag) {
    long long worst = 0, current = 0;
    for (const auto& rec : trace.records) {
        ++current;
        bool event = use_cycle_flag ? rec.events.cycle_created
                                    : rec.events.new_recurrent_class;
        if (event) {
            worst = std::max(worst, current);
            current = 0;
        }
    }
    if (trace.completed) worst = std::max(worst, current);
    return worst;
}

} // namespace

std::vector<IntervalCheck> check_event_intervals(const Mdp& mdp, const RunTrace& trace,
                                                 const EventIntervals& intervals) {
    const bool deterministic = is_deterministic(mdp);
    const bool howard = trace.variant == Variant::Howard;
    std::vector<IntervalCheck> checks;

    IntervalCheck cls;
    cls.name = howard ? "howard_new_class_interval" : "simplex_new_class_interval";
    cls.interval = howard ? intervals.howard_new_class : intervals.simplex_new_class;
    cls.applicable = cls.interval >= 1.0;   // n = 1 degenerates the formula to 0
    cls.max_gap = longest_event_gap(trace, false);
    cls.pass = !cls.applicable || cls.max_gap <= cls.interval;
    checks.push_back(cls);

    IntervalCheck cyc;
    cyc.name = howard ? "howard_new_cycle_interval" : "simplex_new_cycle_interval";
    cyc.interval = howard ? intervals.howard_new_cycle : intervals.simplex_new_cycle;
    cyc.applicable = deterministic && cyc.interval >= 1.0;
    cyc.max_gap = deterministic ? longest_event_gap(trace, true) : 0;
    cyc.pass = !cyc.applicable || cyc.max_gap <= cyc.interval;
    checks.push_back(cyc);
    return checks;
}

BoundReport standard_bounds(const Mdp& mdp, Variant variant,
                            const StructuralReport* structure) {
    BoundReport report;
    report.inputs.n = mdp.n;
    report.inputs.m = mdp.m;
    report.inputs.gamma = mdp.gamma;
    report.inputs.v_max = v_max(mdp);
    if (structure) {
        report.inputs.tau_t = structure->tau_t;
        report.inputs.tau_r = structure->tau_r;
    }
    const int n = mdp.n, m = mdp.m;
    const double g = mdp.gamma;
    const bool has_structure = structure != nullptr;
    const bool has_partition = has_structure && structure->assumption2_holds;
    const double tau_t = has_structure ? structure->tau_t : 1.0;
    const double tau_r = has_structure ? structure->tau_r : 1.0;

    if (variant == Variant::Howard) {
        report.entries.push_back({"howard_gamma", bound_howard_gamma(n, m, g), true});
        report.entries.push_back({"hansen_prior", bound_hansen(n, m, g), true});
    } else {
        report.entries.push_back({"simplex_gamma", bound_simplex_gamma(n, m, g), true});
        report.entries.push_back({"simplex_gamma2", bound_simplex_gamma2(n, m, g), true});
        report.entries.push_back({"simplex_structural",
                                  bound_simplex_structural(n, m, tau_t, tau_r),
                                  has_structure});
    }
    report.entries.push_back({"ye_prior", bound_ye(n, m, g), true});
    report.entries.push_back({"structural_both",
                              bound_structural_both(n, m, tau_t, tau_r),
                              has_partition});
    return report;
}

std::vector<BoundCheckResult> check_bounds(const RunTrace& trace, const BoundReport& report) {
    std::vector<BoundCheckResult> results;
    for (const auto& entry : report.entries) {
        BoundCheckResult r;
        r.name = entry.name;
        r.value = entry.value;
        r.applicable = entry.applicable && trace.completed;
        r.pass = !r.applicable
            || static_cast<double>(trace.iterations) <= std::floor(entry.value);
        results.push_back(std::move(r));
    }
    return results;
}

double bound_eps(int n, double gamma, double v_max, double eps, Variant variant) {
    return variant == Variant::Howard ? bound_eps_howard(gamma, v_max, eps)
                                      : bound_eps_simplex(n, gamma, v_max, eps);
}

EliminationDiagnostic elimination_diagnostic(const Mdp& mdp, const RunTrace& trace,
                                             const Value& v_star) {
    EliminationDiagnostic diag;
    if (trace.records.empty() && trace.final_policy.empty()) return diag;
    const Policy& pi0 =
        trace.records.empty() ? trace.final_policy : trace.records.front().policy_before;
    Value shortfall = v_star - apply_T_pi(mdp, pi0, v_star);
    shortfall.maxCoeff(&diag.state);
    diag.action = pi0[diag.state];

    long long last_used = -1;   // last trace position whose policy uses the action
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
        if (trace.records[k].policy_before[diag.state] == diag.action)
            last_used = static_cast<long long>(k);
    }
    if (trace.final_policy[diag.state] == diag.action)
        diag.eliminated_at = -1;
    else
        diag.eliminated_at = last_used + 1;
    return diag;
}

} // namespace pibounds
