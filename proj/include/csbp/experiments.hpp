#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "csbp/stats.hpp"

namespace csbp {

struct ExperimentParams {
  std::uint64_t seed = 20240601;
  double rep_scale = 1.0;  // multiplies every default replicate count
};

struct ExperimentResult {
  std::string name;
  std::string property;  // the identity being checked, in words
  std::vector<stats::TestReport> reports;
  std::vector<std::pair<std::string, std::vector<double>>> data;  // sample dumps

  bool pass() const;
  std::string report_json() const;
  // one CSV per data series under dir, named <experiment>_<series>.csv
  void write_data(const std::string& dir) const;
};

const std::vector<std::string>& experiment_names();
ExperimentResult run_experiment(const std::string& name, const ExperimentParams& params);

}  // namespace csbp
