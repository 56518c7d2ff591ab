#include "yamabe/serialize.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

namespace yamabe {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string trace_to_csv(const ContinuationTrace& trace) {
  std::string out = "stage,alpha,p,Q,sup_v,argmax_r,residual,iterations,norm_pcrit\n";
  for (const TraceRecord& r : trace.records) {
    out += std::to_string(r.stage);
    out += ',';
    out += format_double(r.alpha);
    out += ',';
    out += format_double(r.p);
    out += ',';
    out += format_double(r.Q);
    out += ',';
    out += format_double(r.sup_v);
    out += ',';
    out += format_double(r.argmax_r);
    out += ',';
    out += format_double(r.residual);
    out += ',';
    out += std::to_string(r.iterations);
    out += ',';
    out += format_double(r.norm_pcrit_unweighted);
    out += '\n';
  }
  return out;
}

std::string field_to_csv(const OperatorAssembly& a, const DiscreteField& v, double alpha) {
  std::string out = "r,v,rho_alpha_v\n";
  for (int j = 0; j < v.size(); ++j) {
    double r = a.grid.active_r(j);
    double w = weight(a.weight_spec, r, alpha);
    out += format_double(r);
    out += ',';
    out += format_double(v[j]);
    out += ',';
    out += format_double(w * v[j]);
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::ordered_json extremal_json(const Extremal& e) {
  nlohmann::ordered_json j;
  j["Q"] = e.Q;
  j["alpha"] = e.alpha;
  j["p"] = e.p;
  j["residual"] = e.residual;
  j["iterations"] = e.iterations;
  j["sup_v"] = e.sup_v;
  j["argmax_r"] = e.argmax_r;
  j["norm_pcrit"] = e.norm_pcrit_unweighted;
  return j;
}

}  // namespace

std::string extremal_to_json(const Extremal& e) { return extremal_json(e).dump(2); }

std::string verdict_to_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["mu_value"] = v.mu_value;
  j["q_estimate"] = v.q_estimate;
  j["q_inf_estimate"] = v.q_inf_estimate;
  j["hypotheses_met"] = {{"mu_positive", v.hypotheses_met.mu_positive},
                         {"qbar_exceeds_q", v.hypotheses_met.qbar_exceeds_q},
                         {"q_below_sphere", v.hypotheses_met.q_below_sphere}};
  if (v.final)
    j["final"] = extremal_json(*v.final);
  else
    j["final"] = nullptr;
  j["notes"] = v.notes;
  return j.dump(2);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
}

}  // namespace yamabe
