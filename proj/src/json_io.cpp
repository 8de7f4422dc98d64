#include "pibounds/json_io.hpp"

#include <fmt/format.h>
#include <fstream>

namespace pibounds {

using nlohmann::json;

json to_json(const Mdp& mdp) {
    json transitions = json::array();
    for (int i = 0; i < mdp.n; ++i) {
        json per_action = json::array();
        for (int a = 0; a < mdp.m; ++a) {
            json row = json::array();
            for (int j = 0; j < mdp.n; ++j) row.push_back(mdp.p(i, a, j));
            per_action.push_back(std::move(row));
        }
        transitions.push_back(std::move(per_action));
    }
    json rewards = json::array();
    for (int i = 0; i < mdp.n; ++i) {
        json row = json::array();
        for (int a = 0; a < mdp.m; ++a) row.push_back(mdp.r(i, a));
        rewards.push_back(std::move(row));
    }
    return {{"n", mdp.n},
            {"m", mdp.m},
            {"gamma", mdp.gamma},
            {"transitions", std::move(transitions)},
            {"rewards", std::move(rewards)}};
}

namespace {

const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(fmt::format("missing key '{}'", key));
    return *it;
}

template <typename T>
T as(const json& j, const char* key) {
    try {
        return require(j, key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("bad value for '{}': {}", key, e.what()));
    }
}

} // namespace

Mdp mdp_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("model JSON must be an object");
    const int n = as<int>(j, "n");
    const int m = as<int>(j, "m");
    const double gamma = as<double>(j, "gamma");
    if (n < 1 || m < 1) throw ParseError("n and m must be positive");
    Mdp mdp = make_mdp(n, m, gamma);

    const json& transitions = require(j, "transitions");
    const json& rewards = require(j, "rewards");
    if (!transitions.is_array() || transitions.size() != static_cast<std::size_t>(n))
        throw ParseError("transitions must be an n-element array");
    if (!rewards.is_array() || rewards.size() != static_cast<std::size_t>(n))
        throw ParseError("rewards must be an n-element array");
    for (int i = 0; i < n; ++i) {
        const json& per_action = transitions[i];
        const json& reward_row = rewards[i];
        if (!per_action.is_array() || per_action.size() != static_cast<std::size_t>(m))
            throw ParseError(fmt::format("transitions[{}] must have m rows", i));
        if (!reward_row.is_array() || reward_row.size() != static_cast<std::size_t>(m))
            throw ParseError(fmt::format("rewards[{}] must have m entries", i));
        for (int a = 0; a < m; ++a) {
            const json& row = per_action[a];
            if (!row.is_array() || row.size() != static_cast<std::size_t>(n))
                throw ParseError(
                    fmt::format("transitions[{}][{}] must have n entries", i, a));
            for (int jj = 0; jj < n; ++jj) {
                if (!row[jj].is_number())
                    throw ParseError(
                        fmt::format("transitions[{}][{}][{}] is not a number", i, a, jj));
                mdp.transitions[a](i, jj) = row[jj].get<double>();
            }
            if (!reward_row[a].is_number())
                throw ParseError(fmt::format("rewards[{}][{}] is not a number", i, a));
            mdp.rewards(i, a) = reward_row[a].get<double>();
        }
    }
    validate(mdp);
    return mdp;
}

void save_mdp(const Mdp& mdp, const std::filesystem::path& path) {
    save_json(to_json(mdp), path);
}

Mdp load_mdp(const std::filesystem::path& path) {
    return mdp_from_json(load_json(path));
}

json to_json(const GenSpec& spec) {
    json j = {{"family", to_string(spec.family)},
              {"n", spec.n},
              {"m", spec.m},
              {"gamma", spec.gamma},
              {"seed", spec.seed},
              {"reward_lo", spec.reward_lo},
              {"reward_hi", spec.reward_hi}};
    if (spec.family == Family::Garnet) j["branching"] = spec.branching;
    if (spec.family == Family::TwoBlock) {
        j["transient"] = spec.transient;
        j["recurrent"] = spec.recurrent;
    }
    return j;
}

GenSpec genspec_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("spec JSON must be an object");
    GenSpec spec;
    spec.family = family_from_string(as<std::string>(j, "family"));
    spec.n = as<int>(j, "n");
    spec.m = as<int>(j, "m");
    spec.gamma = as<double>(j, "gamma");
    spec.seed = as<std::uint64_t>(j, "seed");
    if (j.contains("reward_lo")) spec.reward_lo = as<double>(j, "reward_lo");
    if (j.contains("reward_hi")) spec.reward_hi = as<double>(j, "reward_hi");
    if (j.contains("branching")) spec.branching = as<int>(j, "branching");
    if (j.contains("transient")) spec.transient = as<int>(j, "transient");
    if (j.contains("recurrent")) spec.recurrent = as<int>(j, "recurrent");
    validate_spec(spec);
    return spec;
}

namespace {

json to_json(const EventFlags& events) {
    return {{"new_recurrent_class", events.new_recurrent_class},
            {"recurrent_class_broken", events.recurrent_class_broken},
            {"cycle_created", events.cycle_created}};
}

json value_to_json(const Value& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

} // namespace

json to_json(const RunTrace& trace) {
    json switched = json::array();
    json events = json::array();
    for (const auto& rec : trace.records) {
        switched.push_back(rec.switched);
        events.push_back(to_json(rec.events));
    }
    return {{"variant", to_string(trace.variant)},
            {"iterations", trace.iterations},
            {"switched", std::move(switched)},
            {"gaps_inf", trace.gaps_inf},
            {"gaps_l1", trace.gaps_l1},
            {"events", std::move(events)},
            {"final_policy", trace.final_policy},
            {"final_value", value_to_json(trace.final_value)},
            {"final_bellman_residual", trace.final_bellman_residual},
            {"completed", trace.completed}};
}

json to_json(const StructuralReport& report) {
    auto witness = [](const ConstantWitness& w) -> json {
        if (w.state < 0) return nullptr;
        return {{"policy", w.policy}, {"state", w.state}, {"x", w.x}};
    };
    json j = {{"tau_t", report.tau_t},
              {"tau_r", report.tau_r},
              {"policies_enumerated", report.policies_enumerated},
              {"assumption2", report.assumption2_holds},
              {"witness_tau_t", witness(report.witness_tau_t)},
              {"witness_tau_r", witness(report.witness_tau_r)}};
    if (report.assumption2_holds)
        j["partition"] = {{"T", report.transient_states}, {"R", report.recurrent_states}};
    else
        j["partition"] = nullptr;
    if (report.assumption2_witness) {
        j["assumption2_witness"] = {
            {"state", report.assumption2_witness->state},
            {"recurrent_policy", report.assumption2_witness->recurrent_policy},
            {"transient_policy", report.assumption2_witness->transient_policy}};
    } else {
        j["assumption2_witness"] = nullptr;
    }
    return j;
}

json to_json(const BoundReport& report) {
    json entries = json::array();
    for (const auto& e : report.entries)
        entries.push_back({{"name", e.name}, {"value", e.value}, {"applicable", e.applicable}});
    return {{"inputs",
             {{"n", report.inputs.n},
              {"m", report.inputs.m},
              {"gamma", report.inputs.gamma},
              {"tau_t", report.inputs.tau_t},
              {"tau_r", report.inputs.tau_r},
              {"v_max", report.inputs.v_max},
              {"eps", report.inputs.eps}}},
            {"entries", std::move(entries)}};
}

json to_json(const LemmaCheck& check) {
    return {{"name", check.name},
            {"iterations_checked", check.iterations_checked},
            {"failed_iterations", check.failed_iterations},
            {"worst_slack", check.worst_slack},
            {"worst_ratio", check.worst_ratio},
            {"applicable", check.applicable},
            {"pass", check.pass}};
}

json to_json(const IntervalCheck& check) {
    return {{"name", check.name},
            {"interval", check.interval},
            {"max_gap", check.max_gap},
            {"applicable", check.applicable},
            {"pass", check.pass}};
}

json to_json(const BoundCheckResult& result) {
    return {{"name", result.name},
            {"value", result.value},
            {"applicable", result.applicable},
            {"pass", result.pass}};
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("invalid JSON in '{}': {}", path.string(), e.what()));
    }
}

void save_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    out << j.dump(2) << '\n';
}

} // namespace pibounds
