#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpw/json_io.hpp"
#include "dpw/mesh_io.hpp"
#include "dpw/monodromy.hpp"
#include "dpw/potential.hpp"
#include "dpw/solver.hpp"
#include "dpw/surface.hpp"
#include "dpw/symmetry.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct RunConfig {
  dpw::ClosingProblem problem;
  dpw::GridOptions grid;
  int lambda_samples = 64;
  int tile_depth = 6;
  int truncation = 12;  // reserved for loop-coefficient exports
  std::string out = "out";
};

std::string timestamp_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dpw::JsonError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& body) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dpw::JsonError("cannot open " + path + " for writing");
  out << body;
  if (!out) throw dpw::JsonError("failed writing " + path);
}

Json complex_to(const dpw::Complex& z) {
  return Json::array({z.real(), z.imag()});
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig load_config(const std::string& path, const std::string& out_flag) {
  const std::string text = slurp(path);
  RunConfig cfg;
  cfg.problem = dpw::problem_from_json(text);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw dpw::JsonError(std::string("config parse failed: ") + e.what());
  }
  if (j.contains("grid")) {
    const Json& g = j["grid"];
    if (g.contains("clearance")) cfg.grid.clearance = g["clearance"];
    if (g.contains("grading")) cfg.grid.grading = g["grading"];
    if (g.contains("angular")) cfg.grid.angular = g["angular"];
    if (g.contains("radial")) cfg.grid.radial = g["radial"];
    if (g.contains("graded_layers")) cfg.grid.graded_layers = g["graded_layers"];
    if (g.contains("far_radius")) cfg.grid.far_radius = g["far_radius"];
  }
  if (j.contains("lambda_samples")) cfg.lambda_samples = j["lambda_samples"];
  if (j.contains("tile_depth")) cfg.tile_depth = j["tile_depth"];
  if (j.contains("truncation")) cfg.truncation = j["truncation"];
  if (j.contains("out")) cfg.out = j["out"].get<std::string>();
  if (const char* root = std::getenv("DPWLAB_OUT_ROOT"))
    cfg.out = (fs::path(root) / cfg.out).string();
  if (!out_flag.empty()) cfg.out = out_flag;
  if (j.contains("seed_file")) {
    const fs::path seed =
        fs::path(path).parent_path() / j["seed_file"].get<std::string>();
    const dpw::ClosingProblem sp = dpw::load_problem(seed.string());
    cfg.problem.theta0 = sp.theta0;
    cfg.problem.modulus = sp.modulus;
    cfg.problem.punctures = sp.punctures;
  }

  for (dpw::Complex* lam : {&cfg.problem.lambda1, &cfg.problem.lambda2}) {
    const double n = std::abs(*lam);
    if (n < 1e-12) throw ConfigError("lambda must be nonzero");
    *lam /= n;
  }
  if (!(cfg.problem.integrator_tol > 0) || !(cfg.problem.tolerance > 0) ||
      !(cfg.problem.target_residual > 0))
    throw ConfigError("tolerances must be positive");
  if (cfg.problem.circle_samples < 0)
    throw ConfigError("circle_samples must be nonnegative");
  return cfg;
}

std::array<dpw::Complex, 4> effective_punctures(const dpw::ClosingProblem& p) {
  return p.solve_modulus ? dpw::lawson_punctures(p.modulus) : p.punctures;
}

dpw::Complex parse_lambda(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw ConfigError("--lambda expects RE,IM");
  try {
    const double re = std::stod(text.substr(0, comma));
    const double im = std::stod(text.substr(comma + 1));
    return dpw::Complex(re, im);
  } catch (const std::exception&) {
    throw ConfigError("--lambda expects RE,IM");
  }
}

Json eigen_payload(const RunConfig& cfg) {
  const dpw::BranchData bd = dpw::branch_data(cfg.problem.params);
  Json j;
  j["k"] = cfg.problem.params.k;
  j["l"] = cfg.problem.params.l;
  j["genus"] = dpw::genus(cfg.problem.params);
  j["rh_genus"] = dpw::rh_genus(cfg.problem.params);
  j["below_validated_range"] =
      dpw::below_validated_range(cfg.problem.params);
  Json branches = Json::array();
  for (const auto& b : bd) {
    Json e;
    e["order"] = b.order;
    e["weights"] = Json::array(
        {dpw::to_string(b.weight_lower), dpw::to_string(b.weight_upper)});
    e["rho"] = dpw::to_string(b.rho);
    branches.push_back(e);
  }
  j["branches"] = branches;
  j["parabolic_degree"] = dpw::to_string(dpw::parabolic_degree_of(bd));
  const dpw::GeneratorData gen =
      dpw::canonical_generators(cfg.problem.params);
  Json angles = Json::array();
  for (const auto& g : gen) angles.push_back(dpw::to_string(g.angle));
  j["generator_angles"] = angles;
  const dpw::RelationCheck rc = dpw::generator_relation_check(gen);
  j["relation"] = Json{{"base_closed", rc.base_closed},
                       {"lift_closed", rc.lift_closed}};
  j["lambda1"] = complex_to(cfg.problem.lambda1);
  j["lambda2"] = complex_to(cfg.problem.lambda2);
  if (std::abs(cfg.problem.lambda1 - cfg.problem.lambda2) > 1e-12)
    j["mean_curvature"] =
        dpw::mean_curvature_of(cfg.problem.lambda1, cfg.problem.lambda2);
  else
    j["mean_curvature"] = nullptr;
  return j;
}

int cmd_eigen(const RunConfig& cfg) {
  Json j = eigen_payload(cfg);
  j["timestamp"] = timestamp_now();
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  write_text(cfg.out + "/eigen_report.json", text);
  return 0;
}

int cmd_validate(const RunConfig& cfg, bool verbose) {
  const auto punctures = effective_punctures(cfg.problem);
  const dpw::FuchsianPotential pot = dpw::build_potential(
      cfg.problem.params, cfg.problem.theta0, punctures);
  const dpw::ValidationReport vr = dpw::validate(pot);
  Json j;
  j["all_pass"] = vr.all_pass();
  Json checks = Json::array();
  for (const auto& c : vr.checks) {
    checks.push_back(Json{{"name", c.name},
                          {"pass", c.pass},
                          {"residual", c.residual},
                          {"tol", c.tol}});
    if (verbose)
      std::cerr << (c.pass ? "pass " : "FAIL ") << c.name << " "
                << c.residual << "\n";
  }
  j["checks"] = checks;
  j["timestamp"] = timestamp_now();
  write_text(cfg.out + "/validate_report.json", j.dump(2) + "\n");

  dpw::ClosingProblem echo = cfg.problem;
  echo.punctures = punctures;
  write_text(cfg.out + "/potential.json", dpw::problem_to_json(echo));
  std::cout << (vr.all_pass() ? "potential valid" : "potential INVALID")
            << "\n";
  return vr.all_pass() ? 0 : 1;
}

bool stage_flag(const std::string& path, const std::string& key) {
  std::ifstream in(path);
  if (!in) return false;
  try {
    Json j = Json::parse(in);
    return j.contains(key) && j[key].get<bool>();
  } catch (const std::exception&) {
    return false;
  }
}

int cmd_monodromy(const RunConfig& cfg, const std::string& lambda_flag) {
  if (!stage_flag(cfg.out + "/validate_report.json", "all_pass")) {
    std::cerr << "no validated potential in " << cfg.out
              << ": run validate first\n";
    return 1;
  }
  const dpw::Complex lambda = lambda_flag.empty()
                                  ? cfg.problem.lambda1
                                  : parse_lambda(lambda_flag);
  const auto punctures = effective_punctures(cfg.problem);
  const dpw::FuchsianPotential pot = dpw::build_potential(
      cfg.problem.params, cfg.problem.theta0, punctures);
  const dpw::MonodromyRep rep = dpw::loop_monodromy(
      pot, lambda, cfg.problem.basepoint, cfg.problem.integrator_tol);

  Json j;
  j["lambda"] = complex_to(lambda);
  Json mats = Json::array();
  dpw::Matrix2 prod = dpw::Matrix2::Identity();
  double det_dev = 0.0;
  for (int a = 0; a < 4; ++a) {
    Json rows = Json::array();
    for (int r = 0; r < 2; ++r) {
      Json row = Json::array();
      for (int c = 0; c < 2; ++c) row.push_back(complex_to(rep.m[a](r, c)));
      rows.push_back(row);
    }
    mats.push_back(rows);
    prod = prod * rep.m[a];
    det_dev = std::max(det_dev,
                       std::abs(rep.m[a].determinant() - dpw::Complex(1, 0)));
    j["trace_" + std::to_string(a + 1)] = complex_to(rep.m[a].trace());
  }
  j["matrices"] = mats;
  j["det_deviation"] = det_dev;
  j["product_deviation"] = (prod - dpw::Matrix2::Identity()).norm();
  const dpw::UnitarizerResult un = dpw::unitarize(rep);
  j["unitarizer"] = Json{{"residual", un.residual},
                         {"positive", un.positive},
                         {"ambiguous", un.ambiguous},
                         {"certified", un.certified}};
  const dpw::SymPointCheck sc = dpw::sym_point_check(rep);
  j["central"] = sc.ok;
  j["central_distances"] =
      Json::array({sc.distances[0], sc.distances[1], sc.distances[2],
                   sc.distances[3]});
  j["timestamp"] = timestamp_now();
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  write_text(cfg.out + "/monodromy_report.json", text);
  return 0;
}

int cmd_solve(const RunConfig& cfg, bool verbose) {
  if (!stage_flag(cfg.out + "/validate_report.json", "all_pass")) {
    std::cerr << "no validated potential in " << cfg.out
              << ": run validate first\n";
    return 1;
  }
  dpw::ClosingProblem problem = cfg.problem;
  problem.progress = verbose;
  const dpw::SolverReport report = dpw::solve(problem);

  Json j = Json::parse(dpw::report_to_json(report));
  j["timestamp"] = timestamp_now();
  write_text(cfg.out + "/solve_report.json", j.dump(2) + "\n");

  dpw::ClosingProblem solved = cfg.problem;
  solved.theta0 = report.theta;
  solved.modulus = report.modulus;
  solved.punctures = cfg.problem.solve_modulus
                         ? dpw::lawson_punctures(report.modulus)
                         : cfg.problem.punctures;
  solved.solve_modulus = false;
  write_text(cfg.out + "/theta_star.json", dpw::problem_to_json(solved));

  std::cout << (report.converged ? "converged" : "NOT converged")
            << " residual " << report.residual_norm << " after "
            << report.iterations << " iterations\n";
  return report.converged ? 0 : 2;
}

int cmd_surface(const RunConfig& cfg) {
  const std::string solve_path = cfg.out + "/solve_report.json";
  if (!fs::exists(solve_path)) {
    std::cerr << "no solver artifact in " << cfg.out
              << ": run solve first\n";
    return 1;
  }
  if (!stage_flag(solve_path, "converged")) {
    std::cerr << "solver report in " << cfg.out
              << " is not a convergence certificate: re-run solve\n";
    return 2;
  }
  const dpw::ClosingProblem solved =
      dpw::load_problem(cfg.out + "/theta_star.json");
  const dpw::FuchsianPotential pot = dpw::build_potential(
      solved.params, solved.theta0, solved.punctures);

  const dpw::FundamentalDomainGrid grid = dpw::build_domain_grid(
      solved.punctures, solved.basepoint, cfg.grid);
  dpw::ReconstructOptions ropt;
  ropt.lambda_samples = cfg.lambda_samples;
  ropt.tol = std::max(cfg.problem.integrator_tol, 1e-12);
  const dpw::ReconstructionResult fund =
      dpw::reconstruct(pot, solved.lambda1, solved.lambda2, grid, ropt);
  const dpw::TileResult tiled = dpw::tile(fund, grid, cfg.tile_depth);
  const dpw::DiagnosticsReport diag =
      dpw::diagnostics(tiled.mesh, solved.lambda1, solved.lambda2);

  dpw::export_mesh(tiled.mesh, cfg.out + "/mesh_raw.ply", {});
  dpw::ExportOptions stereo;
  stereo.mode = dpw::MeshProjection::kStereographic;
  dpw::export_mesh(tiled.mesh, cfg.out + "/mesh_stereo.ply", stereo);

  Json j;
  j["grid_vertices"] = grid.samples.size();
  j["unit_defect"] = fund.unit_defect;
  j["path_dependence"] = fund.path_dependence;
  j["dressing_defect"] = fund.dressing_defect;
  j["sheets"] = tiled.sheets;
  j["closed"] = tiled.closed;
  j["mismatch"] = tiled.mismatch;
  j["diagnostics"] = Json::parse(dpw::diagnostics_to_json(diag));
  j["timestamp"] = timestamp_now();
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  write_text(cfg.out + "/surface_report.json", text);
  return 0;
}

int cmd_report(const RunConfig& cfg) {
  Json j;
  j["eigen"] = eigen_payload(cfg);
  for (const char* stage :
       {"validate_report", "monodromy_report", "solve_report",
        "surface_report"}) {
    const std::string path = cfg.out + "/" + stage + ".json";
    if (fs::exists(path)) {
      try {
        j[stage] = Json::parse(slurp(path));
      } catch (const std::exception&) {
        j[stage] = nullptr;
      }
    } else {
      j[stage] = nullptr;
    }
  }
  j["timestamp"] = timestamp_now();
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  write_text(cfg.out + "/summary.json", text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"laboratory for symmetric cmc surfaces in the 3-sphere"};
  app.require_subcommand(1);

  std::string config_path, out_flag, lambda_flag;
  int threads = 1;
  bool verbose = false;
  app.add_option("--config", config_path, "run configuration file")
      ->required();
  app.add_option("--out", out_flag, "output directory override");
  app.add_option("--threads", threads, "worker threads for linear algebra");
  app.add_flag("--verbose", verbose, "progress lines on stderr");

  CLI::App* sub_eigen =
      app.add_subcommand("eigen", "branch data, weights, genus, Sym value");
  CLI::App* sub_validate =
      app.add_subcommand("validate", "build the potential and check it");
  CLI::App* sub_monodromy =
      app.add_subcommand("monodromy", "generator monodromies at one lambda");
  sub_monodromy->add_option("--lambda", lambda_flag,
                            "evaluation point RE,IM (default lambda1)");
  CLI::App* sub_solve =
      app.add_subcommand("solve", "tune accessory parameters for closing");
  CLI::App* sub_surface =
      app.add_subcommand("surface", "reconstruct, tile and measure the mesh");
  CLI::App* sub_report =
      app.add_subcommand("report", "aggregate stage artifacts");

  CLI11_PARSE(app, argc, argv);
  Eigen::setNbThreads(threads);

  try {
    const RunConfig cfg = load_config(config_path, out_flag);
    if (sub_eigen->parsed()) return cmd_eigen(cfg);
    if (sub_validate->parsed()) return cmd_validate(cfg, verbose);
    if (sub_monodromy->parsed()) return cmd_monodromy(cfg, lambda_flag);
    if (sub_solve->parsed()) return cmd_solve(cfg, verbose);
    if (sub_surface->parsed()) return cmd_surface(cfg);
    if (sub_report->parsed()) return cmd_report(cfg);
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const dpw::JsonError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const dpw::MeshIoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const dpw::SymmetryError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const dpw::PotentialError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const dpw::SurfaceError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const dpw::SolverError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const dpw::LoopError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
