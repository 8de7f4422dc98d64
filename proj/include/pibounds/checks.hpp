#pragma once

#include "pibounds/bounds.hpp"
#include "pibounds/mdp.hpp"
#include "pibounds/solvers.hpp"
#include "pibounds/structure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pibounds {

inline constexpr double kOracleTol = 1e-9;        // relative, on value vectors
inline constexpr double kContractionSlack = 1e-9; // absolute, on gap inequalities
inline constexpr double kIdentitySlack = 1e-8;    // relative, on identity residuals
inline constexpr double kEnumerationOracleCap = 1024.0; // policies

/// Exhaustive enumeration found no single policy attaining the componentwise
/// max value. Cannot happen for a valid model; signals a solver bug.
class OracleInconsistent : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Optimal {
    Value value;
    Policy policy;
};

/// Brute force: evaluates every policy, returns the componentwise max and
/// the first policy attaining it everywhere (within kOracleTol, scaled).
Optimal optimal_oracle_enumeration(const Mdp& mdp,
                                   double budget = kEnumerationOracleCap);

/// Greedy policy iteration from the all-zeros policy, certified by the final
/// Bellman residual <= kOracleTol * (1 + |v|).
Optimal optimal_oracle_howard(const Mdp& mdp);

/// Enumeration when m^n <= kEnumerationOracleCap, certified solver otherwise.
Optimal optimal_oracle(const Mdp& mdp);

/**
 * Relative residual of the two-policy difference identity
 *   v_{pi'} - v_pi = (I - gamma P_{pi'})^{-1} (T_{pi'} v_pi - v_pi),
 * measured in the inf norm and scaled by 1 + |v_{pi'}|_inf.
 */
double identity_residual_inf(const Mdp& mdp, const Policy& pi, const Policy& pi_prime);

/**
 * Relative residual of the aggregated form
 *   1^T (v_{pi'} - v_pi) = x_{pi'}^T (T_{pi'} v_pi - v_pi),
 * scaled by 1 + 1^T |v_{pi'}|.
 */
double identity_residual_l1(const Mdp& mdp, const Policy& pi, const Policy& pi_prime);

/// Per-iteration verdict for one gap inequality along a trace.
struct LemmaCheck {
    std::string name;
    long long iterations_checked = 0;
    std::vector<long long> failed_iterations;
    double worst_slack = 0.0;         // max of lhs - factor * rhs; passing <= kContractionSlack
    double worst_ratio = 0.0;         // max lhs/rhs where rhs > 1e-12, diagnostics only
    bool applicable = true;
    bool pass = true;
};

struct ContractionOptions {
    double tau_r = 0.0;               // > 0 enables the new-class gain checks
    bool assumption2_holds = false;   // enables the Howard new-class check
};

/**
 * Checks the per-step contraction of the optimality gap along a completed
 * trace, plus the stronger gain required at iterations that created a new
 * recurrent class (or cycle, for deterministic models):
 *   greedy variant:        |v_* - v_{k+1}|_inf <= gamma |v_* - v_k|_inf + slack
 *   single-switch variant: 1^T(v_* - v_{k+1})  <= (1 - (1-gamma)/n) 1^T(v_* - v_k) + slack
 *   new cycle:             factor 1 - 1/n      (deterministic, single-switch)
 *   new recurrent class:   factor 1 - 1/tau_r  (single-switch; greedy needs the
 *                                               fixed-partition property)
 * Gaps are recomputed from stored value vectors against the given v_star;
 * traces above the value store cap fall back to the gaps recorded at run time.
 */
std::vector<LemmaCheck> check_contraction(const Mdp& mdp, const RunTrace& trace,
                                          const Value& v_star,
                                          const ContractionOptions& options = {});

/// Longest stretch of iterations without the named event along a trace.
struct IntervalCheck {
    std::string name;
    double interval = 0.0;            // guaranteed spacing
    long long max_gap = 0;            // observed worst spacing (termination counts as an event)
    bool applicable = true;
    bool pass = true;
};

/**
 * Checks that a new recurrent class (and, for deterministic models, a new
 * cycle) appears at least every `intervals` iterations along the trace, in
 * the sense that any window of that many consecutive iterations contains an
 * event or the run's end. Requires a trace recorded with event detection.
 */
std::vector<IntervalCheck> check_event_intervals(const Mdp& mdp, const RunTrace& trace,
                                                 const EventIntervals& intervals);

/// Evaluates every bound applicable to the variant at this model's inputs.
/// Structural entries are marked inapplicable without a structural report
/// (or, for the fixed-partition bound, when the partition does not exist).
BoundReport standard_bounds(const Mdp& mdp, Variant variant,
                            const StructuralReport* structure = nullptr);

struct BoundCheckResult {
    std::string name;
    double value = 0.0;
    bool applicable = true;
    bool pass = true;
};

/// trace.iterations <= floor(value) for every applicable bound. Truncated
/// traces pass vacuously; the bounds cap completed runs only.
std::vector<BoundCheckResult> check_bounds(const RunTrace& trace, const BoundReport& report);

/// eps-optimality horizon for a variant (see bound_eps_howard / bound_eps_simplex).
double bound_eps(int n, double gamma, double v_max, double eps, Variant variant);

/**
 * Diagnostic only, never asserted: the state s0 maximizing v_* - T_{pi0} v_*
 * (lowest index on ties), the starting action there, and the first iteration
 * after which no later policy uses that action at s0 (-1 when it is still in
 * use at termination).
 */
struct EliminationDiagnostic {
    int state = -1;
    int action = -1;
    long long eliminated_at = -1;
};

EliminationDiagnostic elimination_diagnostic(const Mdp& mdp, const RunTrace& trace,
                                             const Value& v_star);

} // namespace pibounds
