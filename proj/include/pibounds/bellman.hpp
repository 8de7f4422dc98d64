#pragma once

#include "pibounds/mdp.hpp"

#include <utility>
#include <vector>

namespace pibounds {

class EmptySwitchSet : public std::invalid_argument {
public:
    EmptySwitchSet() : std::invalid_argument("switch set must be non-empty") {}
};

class NotSwitchable : public std::invalid_argument {
public:
    explicit NotSwitchable(int state_);
    int state;
};

/// Default advantage threshold: 1e-10 * (1 + ||v||inf). The exact-arithmetic
/// stopping rule a_pi(i) > 0 needs a floating-point slack; any op taking a
/// `tol` treats a negative value as "use this default".
double default_advantage_tol(const Value& v);

/// Resolves a caller-supplied tolerance against the default rule above.
double resolve_tol(double tol, const Value& v);

/// P_pi: row i is the transition row of (i, pi(i)).
Eigen::MatrixXd transition_matrix(const Mdp& mdp, const Policy& pi);

/// r_pi: component i is r(i, pi(i)).
Value reward_vector(const Mdp& mdp, const Policy& pi);

/// One-step lookahead table: q(i, a) = r(i, a) + gamma * p_i(a) . v.
Eigen::MatrixXd action_values(const Mdp& mdp, const Value& v);

/**
 * Solves the Bellman equation v = r_pi + gamma P_pi v by a direct dense
 * factorization of (I - gamma P_pi). Throws SingularSystem when the solution
 * fails the residual check ||v - T_pi v||inf <= 1e-10 (1 + ||v||inf), which
 * cannot happen for a validated model.
 */
Value policy_evaluation(const Mdp& mdp, const Policy& pi);

/// T_pi v = r_pi + gamma P_pi v.
Value apply_T_pi(const Mdp& mdp, const Policy& pi, const Value& v);

/**
 * T v = max_a [r(., a) + gamma p(., a) . v] componentwise, together with one
 * maximizing policy (lowest action index on ties).
 */
std::pair<Value, Policy> apply_T(const Mdp& mdp, const Value& v);

/**
 * Greedy policy with respect to v that keeps the current action wherever it
 * attains the max within tol, and otherwise takes the lowest-index maximizing
 * action. With v = v_pi this makes greedy(i) != pi(i) exactly on the states
 * whose advantage exceeds tol.
 */
Policy greedy_policy(const Mdp& mdp, const Value& v, const Policy& current, double tol = -1.0);

/// a_pi = T v_pi - v_pi, clamped to >= 0. Components below
/// -1e-10 (1 + ||v_pi||inf) raise InternalInconsistency instead of clamping.
Value advantage(const Mdp& mdp, const Policy& pi);

/// Same as advantage() but reuses an already computed v_pi.
Value advantage_at(const Mdp& mdp, const Policy& pi, const Value& v_pi);

/// { i : a_pi(i) > tol }, sorted ascending. Empty iff pi is tol-optimal.
std::vector<int> switchable_set(const Mdp& mdp, const Policy& pi, double tol = -1.0);

/// switch(pi, Y): greedy on Y, pi elsewhere. Y must be non-empty and greedy
/// must actually differ from pi on every state of Y.
Policy switch_policy(const Policy& pi, const Policy& greedy, const std::vector<int>& switch_set);

} // namespace pibounds
