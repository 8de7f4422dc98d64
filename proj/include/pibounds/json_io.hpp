#pragma once

#include "pibounds/bounds.hpp"
#include "pibounds/checks.hpp"
#include "pibounds/generators.hpp"
#include "pibounds/mdp.hpp"
#include "pibounds/solvers.hpp"
#include "pibounds/structure.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace pibounds {

/// Malformed or structurally wrong JSON input.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Model serialization, canonical layout:
// {"n", "m", "gamma", "transitions": [[[p_ij(a); j]; a]; i], "rewards": [[r(i,a); a]; i]}.
// Doubles survive a round trip bit-exactly (shortest-repr printing).
nlohmann::json to_json(const Mdp& mdp);
Mdp mdp_from_json(const nlohmann::json& j);          // ParseError | ValidationError

void save_mdp(const Mdp& mdp, const std::filesystem::path& path);
Mdp load_mdp(const std::filesystem::path& path);     // validates after parsing

nlohmann::json to_json(const GenSpec& spec);
GenSpec genspec_from_json(const nlohmann::json& j);  // ParseError | InvalidSpec

// Report serialization (one-way; reports are outputs, never inputs).
nlohmann::json to_json(const RunTrace& trace);
nlohmann::json to_json(const StructuralReport& report);
nlohmann::json to_json(const BoundReport& report);
nlohmann::json to_json(const LemmaCheck& check);
nlohmann::json to_json(const IntervalCheck& check);
nlohmann::json to_json(const BoundCheckResult& result);

nlohmann::json load_json(const std::filesystem::path& path);   // ParseError
void save_json(const nlohmann::json& j, const std::filesystem::path& path);

} // namespace pibounds
