#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "csbp/coalescent.hpp"
#include "csbp/config.hpp"
#include "csbp/errors.hpp"
#include "csbp/experiments.hpp"
#include "csbp/feller.hpp"
#include "csbp/mechanism.hpp"
#include "csbp/rng.hpp"

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20240601;

// comma-separated reals; "inf" allowed
std::vector<double> parse_grid(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      double x = item == "inf" ? csbp::kInf : std::stod(item, &used);
      if (item != "inf" && used != item.size()) throw std::invalid_argument(item);
      out.push_back(x);
    } catch (const std::exception&) {
      throw csbp::ConfigError("invalid number '" + item + "' in " + key);
    }
  }
  if (out.empty()) throw csbp::ConfigError(key + " must list at least one value");
  return out;
}

std::string as_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + as_text(x);
    return s;
  }
  return v.dump();
}

// values from --config fill every option not given on the command line
struct ConfigMirror {
  std::string path;
  json doc = json::object();

  void load() {
    if (!path.empty()) doc = csbp::load_json_file(path);
    if (!doc.is_object()) throw csbp::ConfigError("config must be a JSON object");
  }
  template <class T>
  void fill(CLI::Option* opt, const std::string& key, T& target) {
    if (opt->count() > 0 || !doc.contains(key)) return;
    try {
      if constexpr (std::is_same_v<T, std::string>) target = as_text(doc[key]);
      else target = doc[key].get<T>();
    } catch (const json::exception&) {
      throw csbp::ConfigError("config key '" + key + "' has the wrong type");
    }
  }
  template <class T>
  void fill(CLI::Option* opt, const std::string& key, std::optional<T>& target) {
    if (opt->count() > 0 || !doc.contains(key)) return;
    T v{};
    fill(opt, key, v);
    target = v;
  }
};

csbp::BranchingMechanism load_mechanism(const std::string& file, const json& doc) {
  if (!file.empty()) return csbp::parse_mechanism(csbp::load_json_file(file));
  if (doc.contains("mech") && doc["mech"].is_object()) return csbp::parse_mechanism(doc["mech"]);
  throw csbp::ConfigError("mech: a mechanism file is required");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-state branching processes: flows, consecutive coalescents and validation"};
  app.require_subcommand(1);
  ConfigMirror cfg;

  auto* vt = app.add_subcommand("vt", "tabulate v_t(lam) as CSV");
  std::string vt_mech, vt_t, vt_lam;
  auto* vt_mech_opt = vt->add_option("--mech", vt_mech, "mechanism JSON file");
  auto* vt_t_opt = vt->add_option("--t", vt_t, "comma-separated times");
  auto* vt_lam_opt = vt->add_option("--lam", vt_lam, "comma-separated lambdas");
  vt->add_option("--config", cfg.path, "JSON config mirroring the flags");

  auto* co = app.add_subcommand("coalesce", "simulate C^lam restricted to [n], one JSON trajectory per line");
  std::string co_mech, co_lam = "1";
  std::uint64_t co_n = 10, co_reps = 1;
  double co_t = 1.0;
  std::optional<double> co_s;
  std::optional<std::uint64_t> co_seed;
  auto* co_mech_opt = co->add_option("--mech", co_mech, "mechanism JSON file");
  auto* co_lam_opt = co->add_option("--lam", co_lam, "sampling intensity, or inf");
  auto* co_n_opt = co->add_option("--n", co_n, "number of sampled individuals")->check(CLI::PositiveNumber);
  auto* co_t_opt = co->add_option("--t", co_t, "final time");
  auto* co_reps_opt = co->add_option("--reps", co_reps, "replicates")->check(CLI::PositiveNumber);
  auto* co_seed_opt = co->add_option("--seed", co_seed, "master seed");
  auto* co_s_opt = co->add_option("--s", co_s, "start time (default 0, or 0.01 when lam = inf)");
  co->add_option("--config", cfg.path, "JSON config mirroring the flags");

  auto* fc = app.add_subcommand("feller-cpp", "sample the Feller coalescent point process as CSV");
  double fc_beta = 0.0, fc_sigma2 = 2.0, fc_xmax = 1.0, fc_tmin = 1e-4;
  std::uint64_t fc_reps = 1;
  std::optional<std::uint64_t> fc_seed;
  auto* fc_beta_opt = fc->add_option("--beta", fc_beta, "drift parameter beta");
  auto* fc_sigma2_opt = fc->add_option("--sigma2", fc_sigma2, "diffusion parameter sigma2");
  auto* fc_xmax_opt = fc->add_option("--xmax", fc_xmax, "window length");
  auto* fc_reps_opt = fc->add_option("--reps", fc_reps, "replicates")->check(CLI::PositiveNumber);
  auto* fc_tmin_opt = fc->add_option("--tmin", fc_tmin, "smallest recorded depth");
  auto* fc_seed_opt = fc->add_option("--seed", fc_seed, "master seed");
  fc->add_option("--config", cfg.path, "JSON config mirroring the flags");

  auto* va = app.add_subcommand("validate", "run validation experiments and write reports");
  std::string va_name = "all", va_out = "validation";
  double va_scale = 1.0;
  std::optional<std::uint64_t> va_seed;
  auto* va_name_opt = va->add_option("experiment", va_name, "experiment name or all");
  auto* va_seed_opt = va->add_option("--seed", va_seed, "master seed");
  auto* va_out_opt = va->add_option("--out", va_out, "output directory");
  auto* va_scale_opt = va->add_option("--rep-scale", va_scale, "multiplier on replicate counts")->check(CLI::PositiveNumber);
  va->add_option("--config", cfg.path, "JSON config mirroring the flags");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.load();
    if (vt->parsed()) {
      cfg.fill(vt_mech_opt, "mech", vt_mech);
      cfg.fill(vt_t_opt, "t", vt_t);
      cfg.fill(vt_lam_opt, "lam", vt_lam);
      if (cfg.doc.contains("mech") && cfg.doc["mech"].is_object() && vt_mech_opt->count() == 0) vt_mech.clear();
      auto mech = load_mechanism(vt_mech, cfg.doc);
      auto ts = parse_grid(vt_t, "t");
      auto lams = parse_grid(vt_lam, "lam");
      std::cout.precision(17);
      std::cout << "t,lam,v\n";
      for (double t : ts)
        for (double lam : lams) std::cout << t << ',' << lam << ',' << csbp::v(mech, t, lam) << '\n';
      return 0;
    }
    if (co->parsed()) {
      cfg.fill(co_mech_opt, "mech", co_mech);
      cfg.fill(co_lam_opt, "lam", co_lam);
      cfg.fill(co_n_opt, "n", co_n);
      cfg.fill(co_t_opt, "t", co_t);
      cfg.fill(co_reps_opt, "reps", co_reps);
      cfg.fill(co_seed_opt, "seed", co_seed);
      cfg.fill(co_s_opt, "s", co_s);
      if (cfg.doc.contains("mech") && cfg.doc["mech"].is_object() && co_mech_opt->count() == 0) co_mech.clear();
      auto mech = load_mechanism(co_mech, cfg.doc);
      double lam = parse_grid(co_lam, "lam").front();
      double s = co_s.value_or(std::isinf(lam) ? 0.01 : 0.0);
      if (!(co_t >= s)) throw csbp::ConfigError("t must not precede the start time s");
      const auto seed = csbp::resolve_seed(co_seed, kDefaultSeed);
      auto sched = csbp::RateSchedule::from_mechanism(mech, lam, s);
      csbp::SimOptions opts;
      opts.record_events = true;
      for (std::uint64_t r = 0; r < co_reps; ++r) {
        csbp::Rng rng(csbp::replicate_seed(seed, r));
        std::cout << csbp::simulate_inhomogeneous(sched, co_n, s, co_t, rng, opts).to_json() << '\n';
      }
      return 0;
    }
    if (fc->parsed()) {
      cfg.fill(fc_beta_opt, "beta", fc_beta);
      cfg.fill(fc_sigma2_opt, "sigma2", fc_sigma2);
      cfg.fill(fc_xmax_opt, "xmax", fc_xmax);
      cfg.fill(fc_reps_opt, "reps", fc_reps);
      cfg.fill(fc_tmin_opt, "tmin", fc_tmin);
      cfg.fill(fc_seed_opt, "seed", fc_seed);
      csbp::FellerParams p(fc_sigma2, fc_beta);
      const auto seed = csbp::resolve_seed(fc_seed, kDefaultSeed);
      std::cout.precision(17);
      std::cout << "rep,x,depth\n";
      for (std::uint64_t r = 0; r < fc_reps; ++r) {
        csbp::Rng rng(csbp::replicate_seed(seed, r));
        auto cpp = csbp::sample_cpp(p, fc_xmax, rng, fc_tmin);
        for (const auto& a : cpp.atoms) {
          std::cout << r << ',' << a.x << ',';
          if (std::isinf(a.depth)) std::cout << "inf";
          else std::cout << a.depth;
          std::cout << '\n';
        }
      }
      return 0;
    }
    if (va->parsed()) {
      cfg.fill(va_name_opt, "experiment", va_name);
      cfg.fill(va_seed_opt, "seed", va_seed);
      cfg.fill(va_out_opt, "out", va_out);
      cfg.fill(va_scale_opt, "rep-scale", va_scale);
      csbp::ExperimentParams params;
      params.seed = csbp::resolve_seed(va_seed, kDefaultSeed);
      params.rep_scale = va_scale;
      std::vector<std::string> names;
      if (va_name == "all") names = csbp::experiment_names();
      else names.push_back(va_name);
      std::filesystem::create_directories(va_out);
      bool all_pass = true;
      for (const auto& name : names) {
        auto res = csbp::run_experiment(name, params);
        std::ofstream(std::filesystem::path(va_out) / (name + "_report.json")) << res.report_json() << '\n';
        res.write_data(va_out);
        std::cout << (res.pass() ? "PASS  " : "FAIL  ") << name << '\n';
        all_pass = all_pass && res.pass();
      }
      return all_pass ? 0 : 1;
    }
  } catch (const csbp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
