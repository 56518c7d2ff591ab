#include "yamabe/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace yamabe {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" + (where.empty() ? it.key() : where + "." + it.key()) + "'");
}

template <typename T>
void read_into(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(j, {"model", "grid", "alpha", "p", "schedule", "minimize", "margins", "mu_sweep",
                     "qinf", "bubble", "audit", "seed"},
                 "");
  RunConfig c;
  read_into(j, "model", c.model);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    reject_unknown(g, {"r_inner", "r_max", "N"}, "grid");
    read_into(g, "r_inner", c.r_inner);
    read_into(g, "r_max", c.r_max);
    read_into(g, "N", c.N);
  }
  read_into(j, "alpha", c.alpha);
  if (j.contains("p")) c.p = j.at("p").get<double>();
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    reject_unknown(s, {"alpha_list", "p_list"}, "schedule");
    Schedule sched;
    sched.alpha_list = s.at("alpha_list").get<std::vector<double>>();
    sched.p_list = s.at("p_list").get<std::vector<double>>();
    c.schedule = sched;
  }
  if (j.contains("minimize")) {
    const json& m = j.at("minimize");
    reject_unknown(m, {"max_iter", "q_rel_tol", "residual_tol", "armijo_backtrack", "armijo_c1",
                       "init", "rng_seed"},
                   "minimize");
    read_into(m, "max_iter", c.minimize.max_iter);
    read_into(m, "q_rel_tol", c.minimize.q_rel_tol);
    read_into(m, "residual_tol", c.minimize.residual_tol);
    read_into(m, "armijo_backtrack", c.minimize.armijo_backtrack);
    read_into(m, "armijo_c1", c.minimize.armijo_c1);
    if (m.contains("init")) {
      std::string init = m.at("init").get<std::string>();
      if (init == "gaussian_bump")
        c.minimize.init = MinimizeInit::gaussian_bump;
      else if (init == "constant")
        c.minimize.init = MinimizeInit::constant;
      else if (init == "warm_start")
        c.minimize.init = MinimizeInit::warm_start;
      else
        throw ConfigError("config: unknown minimize.init '" + init + "'");
    }
    read_into(m, "rng_seed", c.minimize.rng_seed);
  }
  if (j.contains("margins")) {
    const json& m = j.at("margins");
    reject_unknown(m, {"mu", "qbar", "sphere"}, "margins");
    read_into(m, "mu", c.margins.mu);
    read_into(m, "qbar", c.margins.qbar);
    read_into(m, "sphere", c.margins.sphere);
  }
  if (j.contains("mu_sweep")) {
    const json& m = j.at("mu_sweep");
    reject_unknown(m, {"r_max_list"}, "mu_sweep");
    read_into(m, "r_max_list", c.mu_r_max_list);
  }
  if (j.contains("qinf")) {
    const json& q = j.at("qinf");
    reject_unknown(q, {"R_list", "N"}, "qinf");
    read_into(q, "R_list", c.qinf_R_list);
    read_into(q, "N", c.qinf_N);
  }
  if (j.contains("bubble")) {
    const json& b = j.at("bubble");
    reject_unknown(b, {"lambdas"}, "bubble");
    read_into(b, "lambdas", c.bubble_lambdas);
  }
  if (j.contains("audit")) {
    const json& a = j.at("audit");
    reject_unknown(a, {"models", "alphas", "ps", "tol", "scaling", "continuation_model"}, "audit");
    read_into(a, "models", c.audit.models);
    read_into(a, "alphas", c.audit.alphas);
    read_into(a, "ps", c.audit.ps);
    read_into(a, "tol", c.audit.tol);
    read_into(a, "continuation_model", c.audit.continuation_model);
    if (a.contains("scaling")) {
      const json& s = a.at("scaling");
      reject_unknown(s, {"s", "R1", "R2", "N", "tol"}, "audit.scaling");
      read_into(s, "s", c.audit.scaling_s);
      read_into(s, "R1", c.audit.scaling_R1);
      read_into(s, "R2", c.audit.scaling_R2);
      read_into(s, "N", c.audit.scaling_N);
      read_into(s, "tol", c.audit.scaling_tol);
    }
  }
  read_into(j, "seed", c.seed);
  c.minimize.rng_seed = c.seed;

  // basic sanity beyond strict keys
  if (!(c.r_max > c.r_inner) || c.r_inner < 0.0) throw ConfigError("config: invalid grid range");
  if (c.N < 1) throw ConfigError("config: grid.N must be >= 1");
  if (c.alpha < 0.0) throw ConfigError("config: alpha must be >= 0");
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::canonical_json() const {
  ordered_json j;
  j["model"] = model;
  j["grid"] = {{"r_inner", r_inner}, {"r_max", r_max}, {"N", N}};
  j["alpha"] = alpha;
  if (p) j["p"] = *p;
  if (schedule) {
    j["schedule"] = {{"alpha_list", schedule->alpha_list}, {"p_list", schedule->p_list}};
  }
  j["minimize"] = {{"max_iter", minimize.max_iter},
                   {"q_rel_tol", minimize.q_rel_tol},
                   {"residual_tol", minimize.residual_tol},
                   {"armijo_backtrack", minimize.armijo_backtrack},
                   {"armijo_c1", minimize.armijo_c1},
                   {"init", minimize.init == MinimizeInit::constant ? "constant"
                            : minimize.init == MinimizeInit::warm_start ? "warm_start"
                                                                        : "gaussian_bump"},
                   {"rng_seed", minimize.rng_seed}};
  j["margins"] = {{"mu", margins.mu}, {"qbar", margins.qbar}, {"sphere", margins.sphere}};
  j["seed"] = seed;
  return j.dump(2);
}

}  // namespace yamabe
