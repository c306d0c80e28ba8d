#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "csbp/mechanism.hpp"

namespace csbp {

// Accepts nested ({"levy": {"family": ...}}) or dotted ({"levy.family": ...}) keys:
//   sigma2, beta, levy.family in {none, stable, neveu, finite_atomic},
//   levy.alpha, levy.c (stable), levy.atoms = [[h, m], ...] (finite_atomic)
BranchingMechanism parse_mechanism(const nlohmann::json& j);
nlohmann::json mechanism_to_json(const BranchingMechanism& mech);

nlohmann::json load_json_file(const std::string& path);

// CSBP_SEED when set, else the fallback
std::uint64_t resolve_seed(std::optional<std::uint64_t> configured, std::uint64_t fallback);

}  // namespace csbp
