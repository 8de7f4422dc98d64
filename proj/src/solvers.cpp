#include "pibounds/solvers.hpp"

#include "pibounds/bounds.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <set>
#include <stdexcept>

namespace pibounds {

std::string to_string(Variant variant) {
    return variant == Variant::Howard ? "howard" : "simplex";
}

Variant variant_from_string(const std::string& name) {
    if (name == "howard") return Variant::Howard;
    if (name == "simplex") return Variant::Simplex;
    throw std::invalid_argument(fmt::format("unknown variant '{}'", name));
}

CacheInconsistent::CacheInconsistent(double residual_)
    : std::runtime_error(fmt::format(
          "incremental evaluator drifted, Bellman residual {}", residual_)),
      residual(residual_) {}

MaxIterExceeded::MaxIterExceeded(RunTrace partial)
    : std::runtime_error(fmt::format(
          "{} run still switchable after {} iterations",
          to_string(partial.variant), partial.iterations)),
      trace(std::move(partial)) {}

namespace {

struct Decision {
    Policy greedy;
    Value advantage;
    std::vector<int> switchable;      // ascending
    double max_advantage = 0.0;
    int argmax = -1;                  // lowest index attaining max_advantage
};

// Advantage, greedy policy, and switchable set for one iterate, all derived
// from the same value vector so the pieces agree with each other.
Decision decide(const Mdp& mdp, const Policy& pi, const Value& v, double tol) {
    double eps = resolve_tol(tol, v);
    Decision d;
    d.greedy = greedy_policy(mdp, v, pi, eps);
    d.advantage = advantage_at(mdp, pi, v);
    for (int i = 0; i < mdp.n; ++i) {
        if (d.advantage(i) > eps) {
            d.switchable.push_back(i);
            if (d.advantage(i) > d.max_advantage) {
                d.max_advantage = d.advantage(i);
                d.argmax = i;
            }
        }
    }
    return d;
}

std::optional<Step> make_step(const Mdp& mdp, const Policy& pi, const Value& v,
                              double tol, Variant variant) {
    Decision d = decide(mdp, pi, v, tol);
    if (d.switchable.empty()) return std::nullopt;
    Step step;
    step.switched = variant == Variant::Howard ? d.switchable
                                               : std::vector<int>{d.argmax};
    step.next = switch_policy(pi, d.greedy, step.switched);
    step.max_advantage = d.max_advantage;
    step.value = v;
    step.advantage = std::move(d.advantage);
    return step;
}

class Stopwatch {
public:
    explicit Stopwatch(double& acc)
        : acc_(acc), start_(std::chrono::steady_clock::now()) {}
    ~Stopwatch() {
        acc_ += std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start_).count();
    }

private:
    double& acc_;
    std::chrono::steady_clock::time_point start_;
};

} // namespace

std::optional<Step> howard_step(const Mdp& mdp, const Policy& pi, double tol) {
    return make_step(mdp, pi, policy_evaluation(mdp, pi), tol, Variant::Howard);
}

std::optional<Step> simplex_step(const Mdp& mdp, const Policy& pi, double tol) {
    return make_step(mdp, pi, policy_evaluation(mdp, pi), tol, Variant::Simplex);
}

SmEvaluator::SmEvaluator(const Mdp& mdp, const Policy& pi) : mdp_(&mdp), pi_(pi) {
    check_policy(mdp, pi);
    rebuild();
}

void SmEvaluator::rebuild() {
    const int n = mdp_->n;
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n)
        - mdp_->gamma * transition_matrix(*mdp_, pi_);
    w_ = a.partialPivLu().inverse();
    if (!w_.allFinite()) throw SingularSystem("inverse of (I - gamma P) is not finite");
    r_ = reward_vector(*mdp_, pi_);
    v_ = w_ * r_;
    verify();
}

void SmEvaluator::switch_action(int s, int a) {
    if (s < 0 || s >= mdp_->n || a < 0 || a >= mdp_->m)
        throw std::invalid_argument("switch_action out of range");
    // Row s of (I - gamma P) changes by d^T = gamma (p_s(old) - p_s(new))^T,
    // a rank-one perturbation e_s d^T of the factored matrix.
    Eigen::RowVectorXd d =
        mdp_->gamma * (mdp_->transitions[pi_[s]].row(s) - mdp_->transitions[a].row(s));
    if (a != pi_[s] && d.cwiseAbs().sum() != 0.0) {
        Eigen::VectorXd wu = w_.col(s);
        Eigen::RowVectorXd dw = d * w_;
        double denom = 1.0 + dw(s);
        if (std::abs(denom) < 1e-12) throw CacheInconsistent(std::abs(denom));
        w_.noalias() -= (wu * dw) / denom;
    }
    pi_[s] = a;
    r_(s) = mdp_->r(s, a);
    v_.noalias() = w_ * r_;
    verify();
}

void SmEvaluator::verify() const {
    double residual =
        (v_ - (r_ + mdp_->gamma * (transition_matrix(*mdp_, pi_) * v_)))
            .lpNorm<Eigen::Infinity>();
    if (!(residual <= 1e-8 * (1.0 + v_.lpNorm<Eigen::Infinity>())))
        throw CacheInconsistent(residual);
}

long long default_max_iter(const Mdp& mdp, Variant variant) {
    double bound = variant == Variant::Howard
        ? bound_howard_gamma(mdp.n, mdp.m, mdp.gamma)
        : std::min(bound_simplex_gamma(mdp.n, mdp.m, mdp.gamma),
                   bound_simplex_gamma2(mdp.n, mdp.m, mdp.gamma));
    return static_cast<long long>(std::floor(bound)) + 1;
}

RunTrace run(const Mdp& mdp, const Policy& pi0, Variant variant,
             const RunOptions& options) {
    validate(mdp);
    check_policy(mdp, pi0);
    if (options.use_sherman_morrison && variant != Variant::Simplex)
        throw std::invalid_argument("incremental evaluation applies to the single-switch variant only");
    const long long max_iter =
        options.max_iter >= 0 ? options.max_iter : default_max_iter(mdp, variant);
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

    RunTrace trace;
    trace.variant = variant;

    const bool deterministic = options.detect_events && is_deterministic(mdp);
    Policy pi = pi0;
    std::optional<SmEvaluator> sm;
    Value v;
    if (options.use_sherman_morrison) {
        Stopwatch timer(trace.eval_seconds);
        sm.emplace(mdp, pi);
        v = sm->value();
    } else {
        Stopwatch timer(trace.eval_seconds);
        v = policy_evaluation(mdp, pi);
    }

    auto record_gaps = [&](const Value& value) {
        if (!options.v_star) return;
        Value gap = *options.v_star - value;
        trace.gaps_inf.push_back(std::max(0.0, gap.maxCoeff()));
        trace.gaps_l1.push_back(std::max(0.0, gap.sum()));
    };

    std::set<Policy> seen;
    seen.insert(pi);
    std::optional<Classification> classes_before;
    if (options.detect_events) classes_before = classify(mdp, pi);

    while (true) {
        auto step = make_step(mdp, pi, v, options.tol, variant);
        if (!step) break;
        if (trace.iterations >= max_iter) {
            trace.final_policy = pi;
            trace.final_value = v;
            trace.final_bellman_residual = step->max_advantage;
            throw MaxIterExceeded(std::move(trace));
        }

        IterationRecord rec;
        rec.k = trace.iterations;
        rec.policy_before = pi;
        rec.policy_after = step->next;
        if (mdp.n <= options.value_store_cap) rec.value_before = v;
        rec.max_advantage = step->max_advantage;
        rec.switched = step->switched;
        record_gaps(v);

        Value v_next;
        if (sm) {
            Stopwatch timer(trace.eval_seconds);
            int s = step->switched.front();
            try {
                sm->switch_action(s, step->next[s]);
            } catch (const CacheInconsistent&) {
                sm.emplace(mdp, step->next);
            }
            v_next = sm->value();
        } else {
            Stopwatch timer(trace.eval_seconds);
            v_next = policy_evaluation(mdp, step->next);
        }

        if ((v_next - v).minCoeff() < -1e-9)
            throw InternalInconsistency(fmt::format(
                "value decreased by {} at iteration {}",
                (v - v_next).maxCoeff(), trace.iterations));
        if (!seen.insert(step->next).second)
            throw InternalInconsistency(
                fmt::format("policy revisited at iteration {}", trace.iterations));

        if (options.detect_events) {
            Classification classes_after = classify(mdp, step->next);
            rec.events = compare_classes(*classes_before, classes_after, deterministic);
            rec.recurrent_classes_after = classes_after.classes;
            classes_before = std::move(classes_after);
        }

        trace.records.push_back(std::move(rec));
        ++trace.iterations;
        pi = step->next;
        v = std::move(v_next);
    }

    trace.final_policy = pi;
    trace.final_value = v;
    record_gaps(v);
    trace.final_bellman_residual = advantage_at(mdp, pi, v).maxCoeff();
    if (trace.final_bellman_residual > resolve_tol(options.tol, v))
        throw InternalInconsistency(fmt::format(
            "terminated with Bellman residual {}", trace.final_bellman_residual));
    trace.completed = true;
    return trace;
}

} // namespace pibounds
