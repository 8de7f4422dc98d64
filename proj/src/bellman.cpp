#include "pibounds/bellman.hpp"

#include <Eigen/LU>

#include <cmath>

namespace pibounds {

NotSwitchable::NotSwitchable(int state_)
    : std::invalid_argument("state " + std::to_string(state_) +
                            " is in the switch set but greedy equals the current action"),
      state(state_) {}

double default_advantage_tol(const Value& v) {
    return 1e-10 * (1.0 + v.lpNorm<Eigen::Infinity>());
}

double resolve_tol(double tol, const Value& v) {
    return tol >= 0.0 ? tol : default_advantage_tol(v);
}

Eigen::MatrixXd transition_matrix(const Mdp& mdp, const Policy& pi) {
    Eigen::MatrixXd P(mdp.n, mdp.n);
    for (int i = 0; i < mdp.n; ++i)
        P.row(i) = mdp.transitions[pi[i]].row(i);
    return P;
}

Value reward_vector(const Mdp& mdp, const Policy& pi) {
    Value r(mdp.n);
    for (int i = 0; i < mdp.n; ++i)
        r(i) = mdp.rewards(i, pi[i]);
    return r;
}

Eigen::MatrixXd action_values(const Mdp& mdp, const Value& v) {
    Eigen::MatrixXd q(mdp.n, mdp.m);
    for (int a = 0; a < mdp.m; ++a)
        q.col(a) = mdp.rewards.col(a) + mdp.gamma * (mdp.transitions[a] * v);
    return q;
}

Value policy_evaluation(const Mdp& mdp, const Policy& pi) {
    check_policy(mdp, pi);
    const Eigen::MatrixXd P = transition_matrix(mdp, pi);
    const Value r = reward_vector(mdp, pi);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(mdp.n, mdp.n) - mdp.gamma * P;
    const Value v = A.partialPivLu().solve(r);

    const double residual = (v - (r + mdp.gamma * (P * v))).lpNorm<Eigen::Infinity>();
    if (!(residual <= 1e-10 * (1.0 + v.lpNorm<Eigen::Infinity>())))
        throw SingularSystem("policy evaluation residual " + std::to_string(residual));
    return v;
}

Value apply_T_pi(const Mdp& mdp, const Policy& pi, const Value& v) {
    check_policy(mdp, pi);
    return reward_vector(mdp, pi) + mdp.gamma * (transition_matrix(mdp, pi) * v);
}

std::pair<Value, Policy> apply_T(const Mdp& mdp, const Value& v) {
    const Eigen::MatrixXd q = action_values(mdp, v);
    Value tv(mdp.n);
    Policy greedy(mdp.n, 0);
    for (int i = 0; i < mdp.n; ++i) {
        int best = 0;
        for (int a = 1; a < mdp.m; ++a)
            if (q(i, a) > q(i, best))
                best = a;
        greedy[i] = best;
        tv(i) = q(i, best);
    }
    return {std::move(tv), std::move(greedy)};
}

Policy greedy_policy(const Mdp& mdp, const Value& v, const Policy& current, double tol) {
    check_policy(mdp, current);
    const double eps = resolve_tol(tol, v);
    const Eigen::MatrixXd q = action_values(mdp, v);
    Policy greedy(mdp.n);
    for (int i = 0; i < mdp.n; ++i) {
        int best = 0;
        for (int a = 1; a < mdp.m; ++a)
            if (q(i, a) > q(i, best))
                best = a;
        greedy[i] = q(i, current[i]) >= q(i, best) - eps ? current[i] : best;
    }
    return greedy;
}

Value advantage(const Mdp& mdp, const Policy& pi) {
    return advantage_at(mdp, pi, policy_evaluation(mdp, pi));
}

Value advantage_at(const Mdp& mdp, const Policy& pi, const Value& v_pi) {
    check_policy(mdp, pi);
    Value adv = apply_T(mdp, v_pi).first - v_pi;
    const double slack = 1e-10 * (1.0 + v_pi.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < mdp.n; ++i) {
        if (adv(i) < -slack)
            throw InternalInconsistency("advantage component " + std::to_string(adv(i)) +
                                        " at state " + std::to_string(i) +
                                        " below the evaluation slack");
        if (adv(i) < 0.0)
            adv(i) = 0.0;
    }
    return adv;
}

std::vector<int> switchable_set(const Mdp& mdp, const Policy& pi, double tol) {
    const Value v = policy_evaluation(mdp, pi);
    const Value adv = advantage_at(mdp, pi, v);
    const double eps = resolve_tol(tol, v);
    std::vector<int> out;
    for (int i = 0; i < mdp.n; ++i)
        if (adv(i) > eps)
            out.push_back(i);
    return out;
}

Policy switch_policy(const Policy& pi, const Policy& greedy, const std::vector<int>& switch_set) {
    if (switch_set.empty())
        throw EmptySwitchSet();
    Policy next = pi;
    for (int i : switch_set) {
        if (i < 0 || i >= static_cast<int>(pi.size()))
            throw std::invalid_argument("switch set state out of range");
        if (greedy[i] == pi[i])
            throw NotSwitchable(i);
        next[i] = greedy[i];
    }
    return next;
}

} // namespace pibounds
