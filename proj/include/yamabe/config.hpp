#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "yamabe/continuation.hpp"

namespace yamabe {

// One JSON document configures every subcommand; unknown keys are rejected.
struct RunConfig {
  std::string model = "flat3";
  double r_inner = 0.0;
  double r_max = 20.0;
  int N = 2000;

  double alpha = 0.0;
  std::optional<double> p;  // absent -> p_crit

  std::optional<Schedule> schedule;
  MinimizeConfig minimize;
  Margins margins;

  std::vector<double> mu_r_max_list;  // cmd_mu sweep; defaults from r_max
  std::vector<double> qinf_R_list;    // defaults from r_max
  int qinf_N = 0;                     // 0 -> grid N
  std::vector<double> bubble_lambdas;

  struct AuditSpec {
    std::vector<std::string> models{"flat3", "cylbump3:c=0.5,blend=1"};
    std::vector<double> alphas{0.0, 0.2, 0.5};
    std::vector<double> ps{2.0, 4.0, 5.5};
    double tol = 1e-6;
    double scaling_s = 4.0;
    double scaling_R1 = 4.0;
    double scaling_R2 = 8.0;
    int scaling_N = 1500;
    double scaling_tol = 0.01;
    std::string continuation_model = "sphere3";
  } audit;

  std::uint64_t seed = 0;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  std::string canonical_json() const;
};

}  // namespace yamabe
