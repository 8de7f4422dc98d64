#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace pibounds {

/// Value function (or any real vector indexed by state).
using Value = Eigen::VectorXd;

/// Deterministic stationary policy: one action index per state.
using Policy = std::vector<int>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Input failed model validation.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RowNotStochastic : public ValidationError {
public:
    RowNotStochastic(int state, int action, double sum);
    int state;
    int action;
    double sum;
};

class GammaOutOfRange : public ValidationError {
public:
    explicit GammaOutOfRange(double gamma);
    double gamma;
};

class NonFiniteReward : public ValidationError {
public:
    NonFiniteReward(int state, int action);
    int state;
    int action;
};

/// A linear solve produced a residual it cannot produce on a valid model;
/// signals that invalid input slipped past validation.
class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A quantity violated an invariant the theory guarantees; always a bug.
class InternalInconsistency : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/**
 * Finite discounted MDP with n states and m actions per state.
 *
 * Transitions are stored per action: transitions[a](i, j) is the probability
 * of moving from state i to state j under action a. Rewards are expected
 * immediate rewards: rewards(i, a) = sum_j p_ij(a) r(i, a, j).
 */
struct Mdp {
    int n = 0;
    int m = 0;
    double gamma = 0.0;
    std::vector<Eigen::MatrixXd> transitions;
    Eigen::MatrixXd rewards;

    double p(int i, int a, int j) const { return transitions[a](i, j); }
    double r(int i, int a) const { return rewards(i, a); }
};

/// Absolute tolerance on transition row sums.
inline constexpr double kRowSumTol = 1e-12;

/// Default enumeration budget (number of policies) for exhaustive analyses.
inline constexpr double kDefaultEnumerationBudget = 1e6;

/// Allocates an n-state, m-action model with zeroed transitions and rewards.
Mdp make_mdp(int n, int m, double gamma);

/// Checks all model invariants; throws a ValidationError subclass on failure.
void validate(const Mdp& mdp);

/// Throws std::invalid_argument unless pi has length n with entries in [0, m).
void check_policy(const Mdp& mdp, const Policy& pi);

/// True iff every transition row is a unit basis vector (exact 0.0 / 1.0).
bool is_deterministic(const Mdp& mdp);

/// max over (i, a) of |r(i, a)| = max over policies of ||r_pi||inf.
double max_abs_reward(const Mdp& mdp);

/// V_max = max_pi ||r_pi||inf / (1 - gamma); bounds ||v_pi||inf for every pi.
double v_max(const Mdp& mdp);

/// Total number of deterministic policies, m^n, computed in floating point.
double policy_count(const Mdp& mdp);

} // namespace pibounds
