#pragma once

#include "pibounds/bellman.hpp"
#include "pibounds/mdp.hpp"
#include "pibounds/structure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pibounds {

enum class Variant { Howard, Simplex };

std::string to_string(Variant variant);
Variant variant_from_string(const std::string& name);   // throws std::invalid_argument

/// Cached factorization no longer reproduces its policy's Bellman equation;
/// the caller must rebuild from scratch.
class CacheInconsistent : public std::runtime_error {
public:
    explicit CacheInconsistent(double residual_);
    double residual;
};

/// One accepted policy improvement.
struct Step {
    Policy next;
    std::vector<int> switched;        // ascending
    double max_advantage = 0.0;
    Value value;                      // v_pi the decision was made from
    Value advantage;
};

/// Greedy step: switches every state whose advantage exceeds tol (negative
/// tol selects the scaled default). nullopt means pi is already tol-optimal.
std::optional<Step> howard_step(const Mdp& mdp, const Policy& pi, double tol = -1.0);

/// Single-switch step: switches only the state of maximal advantage, lowest
/// index on ties. nullopt means pi is already tol-optimal.
std::optional<Step> simplex_step(const Mdp& mdp, const Policy& pi, double tol = -1.0);

/**
 * Incremental policy evaluator. Holds W = (I - gamma P_pi)^-1 explicitly;
 * switching one state's action is a rank-one change of the system matrix, so
 * W and v_pi follow by a Sherman-Morrison update in O(n^2) instead of a fresh
 * O(n^3) solve. Every update verifies the Bellman residual of the new value
 * and throws CacheInconsistent when accumulated drift exceeds it.
 */
class SmEvaluator {
public:
    SmEvaluator(const Mdp& mdp, const Policy& pi);

    const Policy& policy() const { return pi_; }
    const Value& value() const { return v_; }

    /// Rank-one update for pi(s) <- a. Residual tolerance 1e-8 * (1 + |v|).
    void switch_action(int s, int a);

    /// Fresh factorization of the current policy; resets drift.
    void rebuild();

private:
    void verify() const;

    const Mdp* mdp_;
    Policy pi_;
    Eigen::MatrixXd w_;               // (I - gamma P_pi)^-1
    Value r_;
    Value v_;
};

struct IterationRecord {
    long long k = 0;
    Policy policy_before;
    Policy policy_after;
    Value value_before;               // empty above the value store cap
    double max_advantage = 0.0;
    std::vector<int> switched;
    std::vector<RecurrentClass> recurrent_classes_after;   // when events tracked
    EventFlags events;
};

struct RunTrace {
    Variant variant = Variant::Howard;
    long long iterations = 0;
    std::vector<IterationRecord> records;
    Policy final_policy;
    Value final_value;
    double final_bellman_residual = 0.0;
    // Optimality gaps per visited policy, iterations + 1 entries; filled only
    // when the run was given the optimal value to measure against.
    std::vector<double> gaps_inf;
    std::vector<double> gaps_l1;
    bool completed = false;
    double eval_seconds = 0.0;        // time inside evaluation solves/updates
};

/// The run hit its iteration cap with switchable states left. On a valid
/// model with the cap at a theorem bound this must not happen.
class MaxIterExceeded : public std::runtime_error {
public:
    explicit MaxIterExceeded(RunTrace partial);
    RunTrace trace;
};

/// floor(tightest applicable discount bound) + 1 for the variant, so that a
/// bound violation surfaces as MaxIterExceeded instead of silent truncation.
long long default_max_iter(const Mdp& mdp, Variant variant);

struct RunOptions {
    double tol = -1.0;                // negative: default per-iterate tolerance
    long long max_iter = -1;          // negative: default_max_iter(mdp, variant)
    int value_store_cap = 64;         // store value vectors only when n <= cap
    bool detect_events = true;        // classify policies, flag class changes
    bool use_sherman_morrison = false;   // Simplex only
    const Value* v_star = nullptr;    // enables gap tracking during the run
};

/**
 * Iterates the chosen step rule from pi0 until no state is switchable.
 * Verifies along the way: values componentwise non-decreasing (1e-9 slack),
 * no policy revisited, final Bellman residual within tolerance.
 */
RunTrace run(const Mdp& mdp, const Policy& pi0, Variant variant,
             const RunOptions& options = {});

} // namespace pibounds
