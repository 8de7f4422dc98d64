#pragma once

#include "pibounds/checks.hpp"
#include "pibounds/generators.hpp"
#include "pibounds/json_io.hpp"
#include "pibounds/solvers.hpp"
#include "pibounds/structure.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pibounds {

inline constexpr double kOptimalityRel = 1e-8;   // final value vs oracle, relative

struct VerifyOptions {
    double tol = -1.0;
    long long max_iter = -1;
    double budget = kDefaultEnumerationBudget;   // policy enumeration cap
};

/// Everything cmd_verify and the sweep need about one (instance, variant).
struct VerifyResult {
    RunTrace trace;
    Optimal oracle;
    std::optional<StructuralReport> structure;   // absent when over budget
    std::vector<LemmaCheck> contraction;
    std::vector<IntervalCheck> intervals;        // empty without structure
    BoundReport bounds;
    std::vector<BoundCheckResult> bound_checks;
    EliminationDiagnostic elimination;
    double final_gap_rel = 0.0;
    bool optimal_pass = false;
    bool contraction_pass = false;
    bool intervals_pass = false;
    bool bounds_pass = false;
    bool pass = false;
    std::string error;                           // non-empty only on failure to finish
};

/**
 * Full single-instance harness: solve with tracing, compare against the
 * optimal-value oracle, evaluate the applicable bounds, and check the
 * per-iteration gap inequalities and event spacings. Never throws for a
 * check violation or iteration-cap hit; those come back as failed flags.
 */
VerifyResult verify_instance(const Mdp& mdp, Variant variant,
                             const VerifyOptions& options = {});

/// One axis-aligned grid of instances from a single family.
struct SweepGrid {
    Family family = Family::DenseRandom;
    std::vector<int> n_values;
    std::vector<int> m_values;
    std::vector<double> gamma_values;
    std::uint64_t seed_begin = 0;
    std::uint64_t seed_count = 1;
    double reward_lo = 0.0;
    double reward_hi = 1.0;
    int branching = 0;        // garnet; 0 picks max(1, n/2) per instance
    int transient = -1;       // two_block; negative picks n/2 per instance
};

struct SweepConfig {
    std::vector<SweepGrid> grids;
    std::vector<Variant> variants{Variant::Howard, Variant::Simplex};
    double tol = -1.0;
    double budget = kDefaultEnumerationBudget;
    int jobs = 1;
};

SweepConfig sweep_config_from_json(const nlohmann::json& j);

struct SweepRow {
    std::string instance;
    GenSpec spec;
    Variant variant = Variant::Howard;
    long long iterations = 0;
    double final_gap_rel = 0.0;
    bool optimal_pass = false;
    double worst_contraction_slack = 0.0;
    bool contraction_pass = false;
    long long new_class_events = 0;
    long long broken_class_events = 0;
    long long cycle_events = 0;
    bool intervals_pass = false;
    std::optional<double> tau_t;
    std::optional<double> tau_r;
    std::optional<bool> assumption2;
    std::vector<BoundCheckResult> bound_checks;
    bool bounds_pass = false;
    bool pass = false;
    std::string status = "ok";
};

struct AggregateRow {
    Family family = Family::DenseRandom;
    int n = 0;
    int m = 0;
    double gamma = 0.0;
    long long max_iterations = 0;
    double worst_bound_ratio = 0.0;   // iterations / floor(tightest applicable bound)
    bool all_pass = false;
};

struct SweepSummary {
    std::vector<SweepRow> rows;        // sorted by (instance, variant)
    std::vector<AggregateRow> aggregates;
    bool all_pass = false;
};

/**
 * Runs verify_instance over the whole grid with a worker pool. Output is a
 * pure function of the config: rows are computed independently, collected by
 * task index, and sorted by (instance id, variant), so any parallelism
 * degree yields identical results. Per-instance failures mark their row and
 * the summary, never abort the sweep.
 */
SweepSummary run_sweep(const SweepConfig& config, int jobs_override = -1);

/// One row per (instance, variant); every numeric field printed with 17
/// significant digits so float64 values survive a round trip.
void write_sweep_csv(const SweepSummary& summary, const std::filesystem::path& path);

nlohmann::json to_json(const SweepSummary& summary);

} // namespace pibounds
