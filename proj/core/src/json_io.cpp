#include "dpw/json_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dpw {
namespace {

using Json = nlohmann::ordered_json;

Json complex_to(const Complex& z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from(const Json& j) {
  if (!j.is_array() || j.size() != 2)
    throw JsonError("complex values are [re, im] pairs");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

Json vector_to(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from(const Json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[long(i)] = j[i].get<double>();
  return v;
}

}  // namespace

std::string problem_to_json(const ClosingProblem& p) {
  Json j;
  j["k"] = p.params.k;
  j["l"] = p.params.l;
  j["lambda1"] = complex_to(p.lambda1);
  j["lambda2"] = complex_to(p.lambda2);
  j["circle_samples"] = p.circle_samples;
  j["theta0"] = vector_to(p.theta0);
  Json pts = Json::array();
  for (const Complex& z : p.punctures) pts.push_back(complex_to(z));
  j["punctures"] = pts;
  j["basepoint"] = complex_to(p.basepoint);
  j["integrator_tol"] = p.integrator_tol;
  j["target_residual"] = p.target_residual;
  j["tolerance"] = p.tolerance;
  j["max_iterations"] = p.max_iterations;
  j["symmetric_chart"] = p.symmetric_chart;
  j["solve_modulus"] = p.solve_modulus;
  j["modulus"] = p.modulus;
  return j.dump(2) + "\n";
}

ClosingProblem problem_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw JsonError(std::string("problem parse failed: ") + e.what());
  }
  ClosingProblem p;
  try {
    if (j.contains("k")) p.params.k = j["k"].get<int>();
    if (j.contains("l")) p.params.l = j["l"].get<int>();
    if (j.contains("lambda1")) p.lambda1 = complex_from(j["lambda1"]);
    if (j.contains("lambda2")) p.lambda2 = complex_from(j["lambda2"]);
    if (j.contains("circle_samples"))
      p.circle_samples = j["circle_samples"].get<int>();
    if (j.contains("theta0")) p.theta0 = vector_from(j["theta0"]);
    if (j.contains("punctures")) {
      const Json& pts = j["punctures"];
      if (!pts.is_array() || pts.size() != 4)
        throw JsonError("punctures must list four points");
      for (int i = 0; i < 4; ++i) p.punctures[i] = complex_from(pts[i]);
    }
    if (j.contains("basepoint")) p.basepoint = complex_from(j["basepoint"]);
    if (j.contains("integrator_tol"))
      p.integrator_tol = j["integrator_tol"].get<double>();
    if (j.contains("target_residual"))
      p.target_residual = j["target_residual"].get<double>();
    if (j.contains("tolerance")) p.tolerance = j["tolerance"].get<double>();
    if (j.contains("max_iterations"))
      p.max_iterations = j["max_iterations"].get<int>();
    if (j.contains("symmetric_chart"))
      p.symmetric_chart = j["symmetric_chart"].get<bool>();
    if (j.contains("solve_modulus"))
      p.solve_modulus = j["solve_modulus"].get<bool>();
    if (j.contains("modulus")) p.modulus = j["modulus"].get<double>();
  } catch (const JsonError&) {
    throw;
  } catch (const std::exception& e) {
    throw JsonError(std::string("problem field has wrong type: ") + e.what());
  }
  return p;
}

ClosingProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw JsonError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return problem_from_json(buf.str());
}

void save_problem(const ClosingProblem& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw JsonError("cannot open " + path + " for writing");
  out << problem_to_json(p);
}

std::string report_to_json(const SolverReport& r) {
  Json j;
  j["converged"] = r.converged;
  j["residual_norm"] = r.residual_norm;
  j["iterations"] = r.iterations;
  j["theta"] = vector_to(r.theta);
  j["modulus"] = r.modulus;
  Json b;
  b["unitarity"] = r.breakdown.unitarity;
  b["positivity"] = r.breakdown.positivity;
  b["sym_relations_1"] = r.breakdown.sym_relations_1;
  b["sym_relations_2"] = r.breakdown.sym_relations_2;
  b["chart_margin"] = r.breakdown.chart_margin;
  j["breakdown"] = b;
  Json signs = Json::array();
  for (const auto& s : r.sym_signs)
    signs.push_back(Json::array({s[0], s[1], s[2]}));
  j["sym_signs"] = signs;
  j["rank_deficient"] = r.rank_deficient;
  j["verification_residual"] = r.verification_residual;
  j["verification_samples"] = r.verification_samples;
  j["history"] = r.history;
  return j.dump(2) + "\n";
}

std::string diagnostics_to_json(const DiagnosticsReport& d) {
  Json j;
  j["area"] = d.area;
  j["h_mean"] = d.h_mean;
  j["h_std"] = d.h_std;
  j["h_reference"] = d.h_reference;
  j["h_samples"] = d.h_samples;
  j["degenerate_faces"] = d.degenerate_faces;
  j["max_norm_defect"] = d.max_norm_defect;
  j["euler_characteristic"] = d.euler_characteristic;
  j["boundary_components"] = d.boundary_components;
  j["genus_estimate"] = d.genus_estimate;
  return j.dump(2) + "\n";
}

}  // namespace dpw
