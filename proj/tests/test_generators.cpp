#include "pibounds/generators.hpp"

#include "pibounds/structure.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <vector>

using namespace pibounds;

namespace {

GenSpec base_spec(Family family, int n, int m, std::uint64_t seed) {
    GenSpec spec;
    spec.family = family;
    spec.n = n;
    spec.m = m;
    spec.gamma = 0.9;
    spec.seed = seed;
    return spec;
}

bool same_model(const Mdp& a, const Mdp& b) {
    if (a.n != b.n || a.m != b.m || a.gamma != b.gamma) return false;
    for (int act = 0; act < a.m; ++act)
        if (a.transitions[act] != b.transitions[act]) return false;
    return a.rewards == b.rewards;
}

} // namespace

TEST_CASE("family names round-trip") {
    for (Family family : {Family::DenseRandom, Family::Deterministic,
                          Family::Garnet, Family::TwoBlock})
        CHECK(family_from_string(to_string(family)) == family);
    CHECK(to_string(Family::DenseRandom) == "dense_random");
    CHECK(to_string(Family::TwoBlock) == "two_block");
    CHECK_THROWS_AS(family_from_string("chain"), InvalidSpec);
}

TEST_CASE("identical specs generate identical models") {
    for (Family family : {Family::DenseRandom, Family::Deterministic,
                          Family::Garnet, Family::TwoBlock}) {
        GenSpec spec = base_spec(family, 6, 3, 42);
        if (family == Family::Garnet) spec.branching = 3;
        if (family == Family::TwoBlock) { spec.transient = 2; spec.recurrent = 4; }
        CHECK(same_model(generate(spec), generate(spec)));

        GenSpec other = spec;
        other.seed = 43;
        CHECK_FALSE(same_model(generate(spec), generate(other)));
    }
}

TEST_CASE("every family produces a valid model") {
    for (Family family : {Family::DenseRandom, Family::Deterministic,
                          Family::Garnet, Family::TwoBlock}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            GenSpec spec = base_spec(family, 5, 3, seed);
            spec.reward_lo = -1.0;
            spec.reward_hi = 2.0;
            if (family == Family::Garnet) spec.branching = 2;
            if (family == Family::TwoBlock) { spec.transient = 2; spec.recurrent = 3; }
            Mdp mdp = generate(spec);
            CHECK_NOTHROW(validate(mdp));
            CHECK(mdp.rewards.minCoeff() >= spec.reward_lo);
            CHECK(mdp.rewards.maxCoeff() <= spec.reward_hi);
        }
    }
}

TEST_CASE("the deterministic family emits unit rows only") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Mdp mdp = generate(base_spec(Family::Deterministic, 7, 3, seed));
        CHECK(is_deterministic(mdp));
    }
}

TEST_CASE("deterministic instances keep both constants at most n") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        GenSpec spec = base_spec(Family::Deterministic, 5, 2, seed + 20);
        StructuralReport report = structural_constants(generate(spec));
        CHECK(report.tau_t <= 5.0 * (1.0 + 1e-9));
        CHECK(report.tau_r <= 5.0 * (1.0 + 1e-9));
    }
}

TEST_CASE("garnet branching controls the row support exactly") {
    GenSpec dense = base_spec(Family::Garnet, 6, 2, 3);
    dense.branching = 6;
    Mdp full = generate(dense);
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 6; ++i)
            CHECK((full.transitions[a].row(i).array() > 0.0).count() == 6);

    GenSpec narrow = base_spec(Family::Garnet, 6, 2, 3);
    narrow.branching = 1;
    CHECK(is_deterministic(generate(narrow)));

    GenSpec mid = base_spec(Family::Garnet, 6, 2, 3);
    mid.branching = 3;
    Mdp partial = generate(mid);
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 6; ++i)
            CHECK((partial.transitions[a].row(i).array() > 0.0).count() == 3);
}

TEST_CASE("two-block instances have a policy-independent partition") {
    GenSpec spec = base_spec(Family::TwoBlock, 4, 2, 9);
    spec.transient = 2;
    spec.recurrent = 2;
    Mdp mdp = generate(spec);

    // Recurrent rows live strictly inside their block.
    for (int a = 0; a < 2; ++a) {
        for (int i = 2; i < 4; ++i) {
            CHECK(mdp.transitions[a](i, 0) == 0.0);
            CHECK(mdp.transitions[a](i, 1) == 0.0);
            CHECK(mdp.transitions[a](i, 2) > 0.0);
            CHECK(mdp.transitions[a](i, 3) > 0.0);
        }
        // Transient rows put at least a tenth of their mass on the block and
        // the rest only on strictly higher transient states.
        for (int i = 0; i < 2; ++i) {
            CHECK(mdp.transitions[a].row(i).segment(2, 2).sum() >= 0.1 - 1e-12);
            for (int j = 0; j <= i; ++j)
                CHECK(mdp.transitions[a](i, j) == 0.0);
        }
        // The last transient state has nowhere higher to go.
        CHECK(mdp.transitions[a].row(1).segment(2, 2).sum()
              == doctest::Approx(1.0).epsilon(1e-12));
    }

    Assumption2Check check = check_assumption2(mdp);
    CHECK(check.holds);
    CHECK(check.transient_states == std::vector<int>{0, 1});
    CHECK(check.recurrent_states == std::vector<int>{2, 3});
}

TEST_CASE("spec validation rejects inconsistent recipes") {
    CHECK_THROWS_AS(validate_spec(base_spec(Family::DenseRandom, 0, 2, 0)), InvalidSpec);
    CHECK_THROWS_AS(validate_spec(base_spec(Family::DenseRandom, 2, 0, 0)), InvalidSpec);

    GenSpec bad_gamma = base_spec(Family::DenseRandom, 2, 2, 0);
    bad_gamma.gamma = 1.0;
    CHECK_THROWS_AS(validate_spec(bad_gamma), InvalidSpec);

    GenSpec bad_range = base_spec(Family::DenseRandom, 2, 2, 0);
    bad_range.reward_lo = 2.0;
    bad_range.reward_hi = 1.0;
    CHECK_THROWS_AS(validate_spec(bad_range), InvalidSpec);

    GenSpec wide = base_spec(Family::Garnet, 3, 2, 0);
    wide.branching = 4;   // more successors than states
    CHECK_THROWS_AS(validate_spec(wide), InvalidSpec);
    wide.branching = 0;
    CHECK_THROWS_AS(validate_spec(wide), InvalidSpec);

    GenSpec blocks = base_spec(Family::TwoBlock, 4, 2, 0);
    blocks.transient = 2;
    blocks.recurrent = 1;   // does not add up to n
    CHECK_THROWS_AS(validate_spec(blocks), InvalidSpec);
    blocks.transient = 4;
    blocks.recurrent = 0;   // needs at least one recurrent state
    CHECK_THROWS_AS(validate_spec(blocks), InvalidSpec);

    // generate() runs the same validation up front.
    CHECK_THROWS_AS(generate(blocks), InvalidSpec);
}

TEST_CASE("instance ids name the family and every knob that shaped it") {
    GenSpec garnet = base_spec(Family::Garnet, 5, 3, 7);
    garnet.branching = 2;
    CHECK(instance_id(garnet) == "garnet-n5-m3-g0.9-s7-b2");

    GenSpec blocks = base_spec(Family::TwoBlock, 4, 2, 3);
    blocks.transient = 2;
    blocks.recurrent = 2;
    CHECK(instance_id(blocks) == "two_block-n4-m2-g0.9-s3-t2-r2");

    CHECK(instance_id(base_spec(Family::DenseRandom, 3, 2, 1)) == "dense_random-n3-m2-g0.9-s1");
    CHECK(instance_id(base_spec(Family::Deterministic, 3, 2, 1)) == "deterministic-n3-m2-g0.9-s1");

    GenSpec half = base_spec(Family::DenseRandom, 2, 2, 0);
    half.gamma = 0.95;
    CHECK(instance_id(half) == "dense_random-n2-m2-g0.95-s0");
}
