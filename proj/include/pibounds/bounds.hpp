#pragma once

#include <string>
#include <vector>

namespace pibounds {

// Iteration bounds for policy iteration variants, exactly as stated by the
// theorems they implement. All logarithms are natural; every ceil is kept
// even when the argument happens to be integral. Each returns a double so
// callers can compare "iterations <= floor(bound)" without overflow concerns.

/// n(m-1) ceil( 1/(1-gamma) log(1/(1-gamma)) ), greedy switching.
double bound_howard_gamma(int n, int m, double gamma);

/// n(m-1) ceil( n/(1-gamma) log(n/(1-gamma)) ), single-switch variant.
double bound_simplex_gamma(int n, int m, double gamma);

/// n^2 (m-1) (1 + 2/(1-gamma) log(1/(1-gamma))), sharper single-switch bound.
double bound_simplex_gamma2(int n, int m, double gamma);

/// ceil( log(v_max/eps) / (1-gamma) ): iterations until the greedy variant's
/// optimality gap falls below eps, rewards in [0, r_max], v_max = r_max/(1-gamma).
double bound_eps_howard(double gamma, double v_max, double eps);

/// ceil( n log(n v_max/eps) / (1-gamma) ): same for the single-switch variant.
double bound_eps_simplex(int n, double gamma, double v_max, double eps);

/// Structural bound for the single-switch variant, independent of gamma:
/// n^2 (m-1) (ceil(tau_r log(n tau_r)) + ceil(tau_r log(n tau_t)))
///   * [ (m-1) ceil(n tau_t log(n tau_t)) + ceil(n tau_t log(n^2 tau_t)) ].
double bound_simplex_structural(int n, int m, double tau_t, double tau_r);

/// Bound for both variants when every policy's chain is unichain-like under
/// a fixed partition: n(m-1) (ceil(tau_t log(n tau_t)) + ceil(tau_r log(n tau_r))).
double bound_structural_both(int n, int m, double tau_t, double tau_r);

/// Reference bounds from earlier analyses, for side-by-side comparison.
double bound_ye(int n, int m, double gamma);
double bound_hansen(int n, int m, double gamma);

/// Guaranteed spacing of structural events along a run. Each field bounds the
/// number of consecutive switching steps that can pass without the named
/// event (a valid run segment with no event has length <= the interval).
struct EventIntervals {
    double simplex_new_class = 0.0;   // stochastic, fixed-partition models
    double howard_new_class = 0.0;
    double simplex_new_cycle = 0.0;   // deterministic models
    double howard_new_cycle = 0.0;
};

/// simplex_new_class: n [ (m-1) ceil(n tau_t log(n tau_t)) + ceil(n tau_t log(n^2 tau_t)) ]
/// howard_new_class:  n m ceil(tau_t log(n tau_t))
/// simplex_new_cycle: n m ceil(2 (n-1) log n)
/// howard_new_cycle:  n
/// Formulas evaluate verbatim; values below 1 (possible at n = 1, where the
/// log terms vanish) are degenerate and skipped by the interval check.
EventIntervals event_intervals(int n, int m, double tau_t, double tau_r);

/// Inputs a bound was evaluated with; gamma or the taus may be unused.
struct BoundInputs {
    int n = 0;
    int m = 0;
    double gamma = 0.0;
    double tau_t = 1.0;
    double tau_r = 1.0;
    double v_max = 0.0;
    double eps = 0.0;
};

/// One evaluated bound, named, with the inputs it consumed.
struct BoundEntry {
    std::string name;
    double value = 0.0;
    bool applicable = true;           // e.g. structural bounds need assumption 2
};

struct BoundReport {
    BoundInputs inputs;
    std::vector<BoundEntry> entries;
};

} // namespace pibounds
