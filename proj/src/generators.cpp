#include "pibounds/generators.hpp"

#include "pibounds/rng.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <vector>

namespace pibounds {

std::string to_string(Family family) {
    switch (family) {
        case Family::DenseRandom: return "dense_random";
        case Family::Deterministic: return "deterministic";
        case Family::Garnet: return "garnet";
        case Family::TwoBlock: return "two_block";
    }
    throw InvalidSpec("unknown family value");
}

Family family_from_string(const std::string& name) {
    if (name == "dense_random") return Family::DenseRandom;
    if (name == "deterministic") return Family::Deterministic;
    if (name == "garnet") return Family::Garnet;
    if (name == "two_block") return Family::TwoBlock;
    throw InvalidSpec(fmt::format("unknown family '{}'", name));
}

void validate_spec(const GenSpec& spec) {
    if (spec.n < 1) throw InvalidSpec("n must be >= 1");
    if (spec.m < 1) throw InvalidSpec("m must be >= 1");
    if (!(spec.gamma > 0.0 && spec.gamma < 1.0))
        throw InvalidSpec("gamma must lie strictly inside (0, 1)");
    if (!std::isfinite(spec.reward_lo) || !std::isfinite(spec.reward_hi)
        || spec.reward_lo > spec.reward_hi)
        throw InvalidSpec("reward range must be finite with lo <= hi");
    if (spec.family == Family::Garnet
        && (spec.branching < 1 || spec.branching > spec.n))
        throw InvalidSpec("garnet branching must lie in [1, n]");
    if (spec.family == Family::TwoBlock) {
        if (spec.recurrent < 1) throw InvalidSpec("two_block needs recurrent >= 1");
        if (spec.transient < 0) throw InvalidSpec("two_block needs transient >= 0");
        if (spec.transient + spec.recurrent != spec.n)
            throw InvalidSpec("two_block needs transient + recurrent == n");
    }
}

namespace {

// Symmetric-Dirichlet(1) weights via normalized exponentials. Open-interval
// uniforms keep every weight strictly positive.
std::vector<double> dirichlet(Rng64& rng, int count) {
    std::vector<double> w(count);
    double sum = 0.0;
    for (double& e : w) {
        e = -std::log(rng.next_double_open());
        sum += e;
    }
    for (double& e : w) e /= sum;
    return w;
}

double draw_reward(Rng64& rng, const GenSpec& spec) {
    return spec.reward_lo + (spec.reward_hi - spec.reward_lo) * rng.next_double();
}

void fill_dense_random(Mdp& mdp, Rng64& rng, const GenSpec& spec) {
    for (int i = 0; i < spec.n; ++i) {
        for (int a = 0; a < spec.m; ++a) {
            std::vector<double> row = dirichlet(rng, spec.n);
            for (int j = 0; j < spec.n; ++j) mdp.transitions[a](i, j) = row[j];
            mdp.rewards(i, a) = draw_reward(rng, spec);
        }
    }
}

void fill_deterministic(Mdp& mdp, Rng64& rng, const GenSpec& spec) {
    for (int i = 0; i < spec.n; ++i) {
        for (int a = 0; a < spec.m; ++a) {
            auto j = static_cast<int>(rng.next_below(spec.n));
            mdp.transitions[a](i, j) = 1.0;
            mdp.rewards(i, a) = draw_reward(rng, spec);
        }
    }
}

void fill_garnet(Mdp& mdp, Rng64& rng, const GenSpec& spec) {
    const int b = spec.branching;
    std::vector<int> pool(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        for (int a = 0; a < spec.m; ++a) {
            // Partial Fisher-Yates: the first b entries become the distinct
            // successors of (i, a).
            std::iota(pool.begin(), pool.end(), 0);
            for (int k = 0; k < b; ++k) {
                auto pick = k + static_cast<int>(rng.next_below(spec.n - k));
                std::swap(pool[k], pool[pick]);
            }
            std::vector<double> w = dirichlet(rng, b);
            for (int k = 0; k < b; ++k) mdp.transitions[a](i, pool[k]) = w[k];
            mdp.rewards(i, a) = draw_reward(rng, spec);
        }
    }
}

void fill_two_block(Mdp& mdp, Rng64& rng, const GenSpec& spec) {
    const int t = spec.transient;
    const int n = spec.n;
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < spec.m; ++a) {
            if (i < t) {
                // Transient row: mass q >= 0.1 drains into the recurrent
                // block; the rest goes to strictly higher transient states,
                // so the transient subgraph is acyclic under every action.
                const int higher = t - 1 - i;
                const double q = higher == 0 ? 1.0 : 0.1 + 0.9 * rng.next_double();
                std::vector<double> drain = dirichlet(rng, n - t);
                for (int j = t; j < n; ++j) mdp.transitions[a](i, j) = q * drain[j - t];
                if (higher > 0) {
                    std::vector<double> stay = dirichlet(rng, higher);
                    for (int j = i + 1; j < t; ++j)
                        mdp.transitions[a](i, j) = (1.0 - q) * stay[j - i - 1];
                }
            } else {
                // Recurrent row: strictly positive over the whole block, so
                // the block is one recurrent class under every policy.
                std::vector<double> w = dirichlet(rng, n - t);
                for (int j = t; j < n; ++j) mdp.transitions[a](i, j) = w[j - t];
            }
            mdp.rewards(i, a) = draw_reward(rng, spec);
        }
    }
}

} // namespace

Mdp generate(const GenSpec& spec) {
    validate_spec(spec);
    Mdp mdp = make_mdp(spec.n, spec.m, spec.gamma);
    Rng64 rng(spec.seed);
    switch (spec.family) {
        case Family::DenseRandom: fill_dense_random(mdp, rng, spec); break;
        case Family::Deterministic: fill_deterministic(mdp, rng, spec); break;
        case Family::Garnet: fill_garnet(mdp, rng, spec); break;
        case Family::TwoBlock: fill_two_block(mdp, rng, spec); break;
    }
    validate(mdp);
    return mdp;
}

std::string instance_id(const GenSpec& spec) {
    std::string id = fmt::format("{}-n{}-m{}-g{}-s{}", to_string(spec.family),
                                 spec.n, spec.m, spec.gamma, spec.seed);
    if (spec.family == Family::Garnet) id += fmt::format("-b{}", spec.branching);
    if (spec.family == Family::TwoBlock)
        id += fmt::format("-t{}-r{}", spec.transient, spec.recurrent);
    return id;
}

} // namespace pibounds
