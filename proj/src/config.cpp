#include "csbp/config.hpp"

#include <cstdlib>
#include <fstream>

#include "csbp/errors.hpp"

namespace csbp {

namespace {

// nested lookup with a dotted-key fallback
const nlohmann::json* find_key(const nlohmann::json& j, const std::string& key) {
  if (auto it = j.find(key); it != j.end()) return &*it;
  auto dot = key.find('.');
  if (dot == std::string::npos) return nullptr;
  auto head = j.find(key.substr(0, dot));
  if (head == j.end() || !head->is_object()) return nullptr;
  return find_key(*head, key.substr(dot + 1));
}

double get_number(const nlohmann::json& j, const std::string& key, std::optional<double> fallback) {
  const auto* v = find_key(j, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError("missing key '" + key + "'");
  }
  if (!v->is_number()) throw ConfigError("key '" + key + "' must be a number");
  return v->get<double>();
}

}  // namespace

BranchingMechanism parse_mechanism(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("mechanism must be an object");
  const double sigma2 = get_number(j, "sigma2", 0.0);
  const double beta = get_number(j, "beta", 0.0);
  std::string family = "none";
  if (const auto* f = find_key(j, "levy.family")) {
    if (!f->is_string()) throw ConfigError("key 'levy.family' must be a string");
    family = f->get<std::string>();
  }
  try {
    if (family == "none") return BranchingMechanism(sigma2, beta, NoLevy{});
    if (family == "neveu") return BranchingMechanism(sigma2, beta, NeveuLevy{});
    if (family == "stable") {
      return BranchingMechanism(sigma2, beta,
                                StableLevy{get_number(j, "levy.alpha", std::nullopt), get_number(j, "levy.c", std::nullopt)});
    }
    if (family == "finite_atomic") {
      const auto* atoms = find_key(j, "levy.atoms");
      if (!atoms || !atoms->is_array()) throw ConfigError("key 'levy.atoms' must be a list of [h, m] pairs");
      FiniteAtomicLevy lev;
      for (const auto& a : *atoms) {
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
          throw ConfigError("key 'levy.atoms' must be a list of [h, m] pairs");
        lev.atoms.push_back({a[0].get<double>(), a[1].get<double>()});
      }
      return BranchingMechanism(sigma2, beta, lev);
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid mechanism: ") + e.what());
  }
  throw ConfigError("key 'levy.family' must be one of none, stable, neveu, finite_atomic");
}

nlohmann::json mechanism_to_json(const BranchingMechanism& mech) {
  nlohmann::json j{{"sigma2", mech.sigma2()}, {"beta", mech.beta()}};
  std::visit(
      [&](const auto& lev) {
        using T = std::decay_t<decltype(lev)>;
        if constexpr (std::is_same_v<T, NoLevy>) {
          j["levy"] = {{"family", "none"}};
        } else if constexpr (std::is_same_v<T, NeveuLevy>) {
          j["levy"] = {{"family", "neveu"}};
        } else if constexpr (std::is_same_v<T, StableLevy>) {
          j["levy"] = {{"family", "stable"}, {"alpha", lev.alpha}, {"c", lev.c}};
        } else if constexpr (std::is_same_v<T, FiniteAtomicLevy>) {
          auto atoms = nlohmann::json::array();
          for (const auto& a : lev.atoms) atoms.push_back({a.h, a.m});
          j["levy"] = {{"family", "finite_atomic"}, {"atoms", atoms}};
        } else {
          j["levy"] = {{"family", "tabulated"}};
        }
      },
      mech.levy());
  return j;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> configured, std::uint64_t fallback) {
  if (const char* env = std::getenv("CSBP_SEED"); env && *env) {
    char* end = nullptr;
    auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigError("CSBP_SEED must be an unsigned integer");
    return v;
  }
  return configured.value_or(fallback);
}

}  // namespace csbp
