#pragma once

#include "pibounds/mdp.hpp"

#include <optional>
#include <vector>

namespace pibounds {

/// Exhaustive policy enumeration would exceed the configured budget.
class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(double policy_count_, double budget_);
    double policy_count;
    double budget;
};

/// One recurrent class of a policy: its states (sorted ascending) together
/// with the policy's actions on them. Two classes are the same class only if
/// both the state set and the action restriction agree.
struct RecurrentClass {
    std::vector<int> states;
    std::vector<int> actions;
    bool operator==(const RecurrentClass&) const = default;
};

/// Transient/recurrent split of the state space under one policy.
struct Classification {
    std::vector<int> label;                 // -1 transient, else index into classes
    std::vector<RecurrentClass> classes;

    bool is_transient(int i) const { return label[i] < 0; }
};

struct EventFlags {
    bool new_recurrent_class = false;
    bool recurrent_class_broken = false;
    bool cycle_created = false;             // deterministic models only
};

/**
 * Classifies states under pi. The policy graph has an edge i -> j iff
 * p_ij(pi(i)) > 0 (exact comparison on stored values); strongly connected
 * components with no outgoing edge in the condensation are the recurrent
 * classes, every other state is transient.
 */
Classification classify(const Mdp& mdp, const Policy& pi);

/// Advances pi to the next action vector in lexicographic order (rightmost
/// state increments first); false after wrapping past the last policy.
bool next_policy(Policy& pi, int m);

/// Event flags for a policy change, comparing classes by (states, actions).
EventFlags compare_classes(const Classification& before, const Classification& after,
                           bool deterministic);

/// classify() both policies and compare.
EventFlags detect_events(const Mdp& mdp, const Policy& before, const Policy& after);

/**
 * Discounted state-visitation vector x_pi = (I - gamma P_pi^T)^-1 1, solved
 * by a direct dense factorization. Verified before returning:
 * x(i) >= 1, x(i) <= n/(1-gamma), sum x = n/(1-gamma) (with small slack).
 */
Value visitation(const Mdp& mdp, const Policy& pi);

/// Policy and state at which a structural constant is attained. A state of -1
/// means the constant came from its floor of 1 and no witness exists.
struct ConstantWitness {
    Policy policy;
    int state = -1;
    double x = 0.0;
};

/// State whose transient/recurrent label differs between two policies.
struct Assumption2Witness {
    int state = -1;
    Policy recurrent_policy;
    Policy transient_policy;
};

struct StructuralReport {
    double tau_t = 1.0;                      // max x_pi(i) over transient (pi, i), floored at 1
    double tau_r = 1.0;                      // max n/((1-gamma) x_pi(i)) over recurrent (pi, i), floored at 1
    long long policies_enumerated = 0;
    bool assumption2_holds = false;
    std::vector<int> transient_states;       // partition, valid when assumption2_holds
    std::vector<int> recurrent_states;
    ConstantWitness witness_tau_t;
    ConstantWitness witness_tau_r;
    std::optional<Assumption2Witness> assumption2_witness;
};

/**
 * Enumerates every policy (lexicographic over action vectors), classifies it,
 * computes x_pi, and extracts the structural constants with witnesses. Also
 * records whether the transient/recurrent partition is policy-independent.
 * Throws BudgetExceeded when m^n > budget.
 */
StructuralReport structural_constants(const Mdp& mdp, double budget = kDefaultEnumerationBudget);

struct Assumption1Check {
    bool holds = true;
    Policy policy;                           // first violation, when !holds
    int state = -1;
    double x = 0.0;
    std::string which;                       // violated inequality
};

/// Re-verifies the x_pi inequalities for every policy against the reported
/// constants (1e-9 slack). Must hold by construction of the report.
Assumption1Check check_assumption1(const Mdp& mdp, const StructuralReport& report,
                                   double budget = kDefaultEnumerationBudget);

struct Assumption2Check {
    bool holds = false;
    std::vector<int> transient_states;
    std::vector<int> recurrent_states;
    std::optional<Assumption2Witness> witness;
};

/// True iff every state keeps the same transient/recurrent label under all
/// policies; returns the partition, or a witness pair of policies.
Assumption2Check check_assumption2(const Mdp& mdp, double budget = kDefaultEnumerationBudget);

} // namespace pibounds
