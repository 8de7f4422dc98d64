#include "pibounds/mdp.hpp"

#include <cmath>

namespace pibounds {

RowNotStochastic::RowNotStochastic(int state_, int action_, double sum_)
    : ValidationError("transition row (state=" + std::to_string(state_) +
                      ", action=" + std::to_string(action_) +
                      ") sums to " + std::to_string(sum_) + ", expected 1"),
      state(state_), action(action_), sum(sum_) {}

GammaOutOfRange::GammaOutOfRange(double gamma_)
    : ValidationError("gamma = " + std::to_string(gamma_) +
                      " outside the open interval (0, 1)"),
      gamma(gamma_) {}

NonFiniteReward::NonFiniteReward(int state_, int action_)
    : ValidationError("non-finite reward at (state=" + std::to_string(state_) +
                      ", action=" + std::to_string(action_) + ")"),
      state(state_), action(action_) {}

Mdp make_mdp(int n, int m, double gamma) {
    Mdp mdp;
    mdp.n = n;
    mdp.m = m;
    mdp.gamma = gamma;
    mdp.transitions.assign(m, Eigen::MatrixXd::Zero(n, n));
    mdp.rewards = Eigen::MatrixXd::Zero(n, m);
    return mdp;
}

void validate(const Mdp& mdp) {
    if (mdp.n < 1 || mdp.m < 1)
        throw ValidationError("model needs n >= 1 and m >= 1");
    if (!(mdp.gamma > 0.0 && mdp.gamma < 1.0))
        throw GammaOutOfRange(mdp.gamma);
    if (static_cast<int>(mdp.transitions.size()) != mdp.m)
        throw ValidationError("transitions must hold one n x n matrix per action");
    for (const auto& t : mdp.transitions)
        if (t.rows() != mdp.n || t.cols() != mdp.n)
            throw ValidationError("transition matrix has wrong shape");
    if (mdp.rewards.rows() != mdp.n || mdp.rewards.cols() != mdp.m)
        throw ValidationError("rewards must be n x m");

    for (int a = 0; a < mdp.m; ++a) {
        for (int i = 0; i < mdp.n; ++i) {
            double sum = 0.0;
            for (int j = 0; j < mdp.n; ++j) {
                const double pij = mdp.transitions[a](i, j);
                if (!(pij >= 0.0))
                    throw RowNotStochastic(i, a, pij);
                sum += pij;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                throw RowNotStochastic(i, a, sum);
        }
    }
    for (int i = 0; i < mdp.n; ++i)
        for (int a = 0; a < mdp.m; ++a)
            if (!std::isfinite(mdp.rewards(i, a)))
                throw NonFiniteReward(i, a);
}

void check_policy(const Mdp& mdp, const Policy& pi) {
    if (static_cast<int>(pi.size()) != mdp.n)
        throw std::invalid_argument("policy length does not match state count");
    for (int i = 0; i < mdp.n; ++i)
        if (pi[i] < 0 || pi[i] >= mdp.m)
            throw std::invalid_argument("policy action out of range at state " +
                                        std::to_string(i));
}

bool is_deterministic(const Mdp& mdp) {
    for (int a = 0; a < mdp.m; ++a) {
        for (int i = 0; i < mdp.n; ++i) {
            int ones = 0;
            for (int j = 0; j < mdp.n; ++j) {
                const double pij = mdp.transitions[a](i, j);
                if (pij == 1.0)
                    ++ones;
                else if (pij != 0.0)
                    return false;
            }
            if (ones != 1)
                return false;
        }
    }
    return true;
}

double max_abs_reward(const Mdp& mdp) {
    return mdp.rewards.size() == 0 ? 0.0 : mdp.rewards.cwiseAbs().maxCoeff();
}

double v_max(const Mdp& mdp) {
    return max_abs_reward(mdp) / (1.0 - mdp.gamma);
}

double policy_count(const Mdp& mdp) {
    return std::pow(static_cast<double>(mdp.m), static_cast<double>(mdp.n));
}

} // namespace pibounds
