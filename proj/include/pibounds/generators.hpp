#pragma once

#include "pibounds/mdp.hpp"

#include <cstdint>
#include <string>

namespace pibounds {

class InvalidSpec : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Family { DenseRandom, Deterministic, Garnet, TwoBlock };

std::string to_string(Family family);
Family family_from_string(const std::string& name);   // throws InvalidSpec

/**
 * Recipe for one reproducible instance. Fields beyond (family, n, m, gamma,
 * seed, reward range) apply to single families: branching to garnet,
 * transient/recurrent block sizes to two_block.
 */
struct GenSpec {
    Family family = Family::DenseRandom;
    int n = 1;
    int m = 1;
    double gamma = 0.9;
    std::uint64_t seed = 0;
    double reward_lo = 0.0;
    double reward_hi = 1.0;
    int branching = 1;        // garnet: successors per (state, action), in [1, n]
    int transient = 0;        // two_block: |T|; transient + recurrent == n
    int recurrent = 0;        // two_block: |R| >= 1
};

void validate_spec(const GenSpec& spec);   // throws InvalidSpec

/**
 * Builds the instance a GenSpec names. Draw order is fixed: for each state,
 * for each action, the transition row and then the reward, so a GenSpec pins
 * the model bit-for-bit. Absent transitions are exact 0.0 (classification
 * tests transition entries with > 0).
 *
 *   dense_random   every row symmetric-Dirichlet(1) over all states
 *   deterministic  every row a unit basis vector, uniform successor
 *   garnet         `branching` distinct successors, Dirichlet weights
 *   two_block      states [0, transient) drain into [transient, n) under
 *                  every action (>= 0.1 mass on the recurrent block, the
 *                  rest on strictly higher transient states); recurrent rows
 *                  are strictly positive inside their block, so the
 *                  transient/recurrent partition is policy-independent
 */
Mdp generate(const GenSpec& spec);

/// Stable identifier used to order and label sweep rows.
std::string instance_id(const GenSpec& spec);

} // namespace pibounds
