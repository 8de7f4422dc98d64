#include "pibounds/structure.hpp"

#include "pibounds/bellman.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace pibounds {

BudgetExceeded::BudgetExceeded(double policy_count_, double budget_)
    : std::runtime_error(fmt::format(
          "policy enumeration needs {:.0f} policies, budget is {:.0f}", policy_count_, budget_)),
      policy_count(policy_count_),
      budget(budget_) {}

namespace {

// Iterative Tarjan SCC over the policy graph. Components are emitted in
// reverse topological order, so a component's outgoing edges can only point
// to components emitted before it.
struct Tarjan {
    const Mdp& mdp;
    const Policy& pi;
    int n;
    std::vector<int> index, lowlink, comp;
    std::vector<bool> on_stack;
    std::vector<int> stack;
    int next_index = 0;
    int comp_count = 0;

    explicit Tarjan(const Mdp& m, const Policy& p)
        : mdp(m), pi(p), n(m.n),
          index(n, -1), lowlink(n, 0), comp(n, -1), on_stack(n, false) {}

    void run() {
        for (int root = 0; root < n; ++root) {
            if (index[root] >= 0) continue;
            // Explicit DFS stack of (state, next successor to try).
            std::vector<std::pair<int, int>> frames;
            frames.emplace_back(root, 0);
            index[root] = lowlink[root] = next_index++;
            stack.push_back(root);
            on_stack[root] = true;
            while (!frames.empty()) {
                auto& [v, j] = frames.back();
                if (j < n) {
                    int w = j++;
                    if (mdp.p(v, pi[v], w) <= 0.0) continue;
                    if (index[w] < 0) {
                        index[w] = lowlink[w] = next_index++;
                        stack.push_back(w);
                        on_stack[w] = true;
                        frames.emplace_back(w, 0);
                    } else if (on_stack[w]) {
                        lowlink[v] = std::min(lowlink[v], index[w]);
                    }
                } else {
                    if (lowlink[v] == index[v]) {
                        int c = comp_count++;
                        int w;
                        do {
                            w = stack.back();
                            stack.pop_back();
                            on_stack[w] = false;
                            comp[w] = c;
                        } while (w != v);
                    }
                    frames.pop_back();
                    if (!frames.empty()) {
                        int parent = frames.back().first;
                        lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
                    }
                }
            }
        }
    }
};

} // namespace

Classification classify(const Mdp& mdp, const Policy& pi) {
    check_policy(mdp, pi);
    const int n = mdp.n;
    Tarjan tarjan(mdp, pi);
    tarjan.run();

    // A component is recurrent iff it has no edge leaving it.
    std::vector<bool> closed(tarjan.comp_count, true);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (mdp.p(i, pi[i], j) > 0.0 && tarjan.comp[j] != tarjan.comp[i]) {
                closed[tarjan.comp[i]] = false;
                break;
            }
        }
    }

    Classification result;
    result.label.assign(n, -1);
    std::vector<int> class_of_comp(tarjan.comp_count, -1);
    for (int i = 0; i < n; ++i) {
        int c = tarjan.comp[i];
        if (!closed[c]) continue;
        if (class_of_comp[c] < 0) {
            class_of_comp[c] = static_cast<int>(result.classes.size());
            result.classes.emplace_back();
        }
        result.label[i] = class_of_comp[c];
        result.classes[class_of_comp[c]].states.push_back(i);
    }
    // States come out sorted because the scan is in ascending order.
    for (auto& cls : result.classes) {
        cls.actions.reserve(cls.states.size());
        for (int i : cls.states) cls.actions.push_back(pi[i]);
    }
    if (result.classes.empty())
        throw InternalInconsistency("policy chain has no recurrent class");
    return result;
}

EventFlags compare_classes(const Classification& before, const Classification& after,
                           bool deterministic) {
    EventFlags flags;
    auto contains = [](const std::vector<RecurrentClass>& classes, const RecurrentClass& c) {
        return std::find(classes.begin(), classes.end(), c) != classes.end();
    };
    for (const auto& c : after.classes) {
        if (!contains(before.classes, c)) flags.new_recurrent_class = true;
    }
    for (const auto& c : before.classes) {
        if (!contains(after.classes, c)) flags.recurrent_class_broken = true;
    }
    flags.cycle_created = deterministic && flags.new_recurrent_class;
    return flags;
}

EventFlags detect_events(const Mdp& mdp, const Policy& before, const Policy& after) {
    return compare_classes(classify(mdp, before), classify(mdp, after),
                           is_deterministic(mdp));
}

Value visitation(const Mdp& mdp, const Policy& pi) {
    check_policy(mdp, pi);
    const int n = mdp.n;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n)
        - mdp.gamma * transition_matrix(mdp, pi).transpose();
    Value x = A.partialPivLu().solve(Value::Ones(n));
    double residual = (A * x - Value::Ones(n)).lpNorm<Eigen::Infinity>();
    if (!x.allFinite() || residual > 1e-10 * (1.0 + x.lpNorm<Eigen::Infinity>()))
        throw SingularSystem("visitation solve failed");

    const double total = n / (1.0 - mdp.gamma);
    for (int i = 0; i < n; ++i) {
        if (x(i) < 1.0 - 1e-9)
            throw InternalInconsistency(fmt::format("x({}) = {} < 1", i, x(i)));
        if (x(i) > total + 1e-9 * total)
            throw InternalInconsistency(fmt::format("x({}) = {} > n/(1-gamma)", i, x(i)));
    }
    if (std::abs(x.sum() - total) > 1e-8 * total)
        throw InternalInconsistency(
            fmt::format("sum x = {} but n/(1-gamma) = {}", x.sum(), total));
    return x;
}

bool next_policy(Policy& pi, int m) {
    for (int i = static_cast<int>(pi.size()) - 1; i >= 0; --i) {
        if (++pi[i] < m) return true;
        pi[i] = 0;
    }
    return false;
}

StructuralReport structural_constants(const Mdp& mdp, double budget) {
    validate(mdp);
    const double count = policy_count(mdp);
    if (count > budget) throw BudgetExceeded(count, budget);

    const int n = mdp.n;
    StructuralReport report;
    // Label each state with its class under the first policy; any later
    // disagreement yields a witness pair and refutes the fixed partition.
    std::vector<bool> first_transient(n, false);
    std::vector<Policy> transient_seen(n), recurrent_seen(n);

    Policy pi(n, 0);
    bool first = true;
    do {
        Classification cls = classify(mdp, pi);
        Value x = visitation(mdp, pi);
        ++report.policies_enumerated;

        for (int i = 0; i < n; ++i) {
            if (cls.is_transient(i)) {
                if (x(i) > report.tau_t) {
                    report.tau_t = x(i);
                    report.witness_tau_t = {pi, i, x(i)};
                }
                if (transient_seen[i].empty()) transient_seen[i] = pi;
            } else {
                double ratio = n / ((1.0 - mdp.gamma) * x(i));
                if (ratio > report.tau_r) {
                    report.tau_r = ratio;
                    report.witness_tau_r = {pi, i, x(i)};
                }
                if (recurrent_seen[i].empty()) recurrent_seen[i] = pi;
            }
        }
        if (first) {
            for (int i = 0; i < n; ++i) first_transient[i] = cls.is_transient(i);
            first = false;
        }
    } while (next_policy(pi, mdp.m));

    report.assumption2_holds = true;
    for (int i = 0; i < n; ++i) {
        if (!transient_seen[i].empty() && !recurrent_seen[i].empty()) {
            report.assumption2_holds = false;
            if (!report.assumption2_witness) {
                report.assumption2_witness =
                    Assumption2Witness{i, recurrent_seen[i], transient_seen[i]};
            }
        }
    }
    if (report.assumption2_holds) {
        for (int i = 0; i < n; ++i) {
            (first_transient[i] ? report.transient_states : report.recurrent_states)
                .push_back(i);
        }
    }
    return report;
}

Assumption1Check check_assumption1(const Mdp& mdp, const StructuralReport& report,
                                   double budget) {
    validate(mdp);
    const double count = policy_count(mdp);
    if (count > budget) throw BudgetExceeded(count, budget);

    const int n = mdp.n;
    Assumption1Check check;
    Policy pi(n, 0);
    do {
        Classification cls = classify(mdp, pi);
        Value x = visitation(mdp, pi);
        for (int i = 0; i < n; ++i) {
            bool ok;
            std::string which;
            if (cls.is_transient(i)) {
                ok = x(i) <= report.tau_t + 1e-9 * report.tau_t;
                which = "x(i) <= tau_t on transient states";
            } else {
                ok = x(i) >= n / ((1.0 - mdp.gamma) * report.tau_r) * (1.0 - 1e-9);
                which = "x(i) >= n/((1-gamma) tau_r) on recurrent states";
            }
            if (!ok) {
                check.holds = false;
                check.policy = pi;
                check.state = i;
                check.x = x(i);
                check.which = which;
                return check;
            }
        }
    } while (next_policy(pi, mdp.m));
    return check;
}

Assumption2Check check_assumption2(const Mdp& mdp, double budget) {
    validate(mdp);
    const double count = policy_count(mdp);
    if (count > budget) throw BudgetExceeded(count, budget);

    const int n = mdp.n;
    Assumption2Check check;
    std::vector<Policy> transient_seen(n), recurrent_seen(n);
    std::vector<bool> first_transient(n, false);

    Policy pi(n, 0);
    bool first = true;
    do {
        Classification cls = classify(mdp, pi);
        for (int i = 0; i < n; ++i) {
            if (cls.is_transient(i)) {
                if (transient_seen[i].empty()) transient_seen[i] = pi;
            } else {
                if (recurrent_seen[i].empty()) recurrent_seen[i] = pi;
            }
        }
        if (first) {
            for (int i = 0; i < n; ++i) first_transient[i] = cls.is_transient(i);
            first = false;
        }
    } while (next_policy(pi, mdp.m));

    check.holds = true;
    for (int i = 0; i < n; ++i) {
        if (!transient_seen[i].empty() && !recurrent_seen[i].empty()) {
            check.holds = false;
            if (!check.witness)
                check.witness = Assumption2Witness{i, recurrent_seen[i], transient_seen[i]};
        }
    }
    if (check.holds) {
        for (int i = 0; i < n; ++i)
            (first_transient[i] ? check.transient_states : check.recurrent_states).push_back(i);
    }
    return check;
}

} // namespace pibounds
