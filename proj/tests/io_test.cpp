#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dpw/json_io.hpp"
#include "dpw/mesh_io.hpp"

using dpw::Complex;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("raw mesh export imports back unchanged") {
  const auto mesh = dpw::sample_sphere_mesh(13);
  const std::string path = temp_path("dpw_raw.ply");
  dpw::export_mesh(mesh, path, {});
  const auto back = dpw::import_mesh(path);
  REQUIRE(back.vertices.size() == mesh.vertices.size());
  REQUIRE(back.faces.size() == mesh.faces.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    CHECK((back.vertices[i].f - mesh.vertices[i].f).norm() == 0.0);
  for (std::size_t i = 0; i < mesh.faces.size(); ++i)
    CHECK(back.faces[i] == mesh.faces[i]);
  const auto d1 = dpw::diagnostics(mesh, Complex(1, 0), Complex(0, 1));
  const auto d2 = dpw::diagnostics(back, Complex(1, 0), Complex(0, 1));
  CHECK(std::abs(d1.area - d2.area) < 1e-9);
  std::remove(path.c_str());
}

TEST_CASE("stereographic export records the pole and lifts back") {
  const auto mesh = dpw::sample_clifford_mesh(10);
  const std::string path = temp_path("dpw_stereo.ply");
  dpw::ExportOptions opt;
  opt.mode = dpw::MeshProjection::kStereographic;
  opt.pole = Eigen::Vector4d(-1, 0, 0, 0);
  dpw::export_mesh(mesh, path, opt);
  const std::string text = read_file(path);
  CHECK(text.find("comment projection stereographic") != std::string::npos);
  CHECK(text.find("comment pole") != std::string::npos);
  const auto back = dpw::import_mesh(path);
  REQUIRE(back.vertices.size() == mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    CHECK((back.vertices[i].f - mesh.vertices[i].f).norm() < 1e-9);
    CHECK(std::abs(back.vertices[i].f.norm() - 1.0) < 1e-9);
  }
  std::remove(path.c_str());
}

TEST_CASE("stereographic export refuses a pole on the surface") {
  const auto mesh = dpw::sample_sphere_mesh(8);
  dpw::ExportOptions opt;
  opt.mode = dpw::MeshProjection::kStereographic;
  opt.pole = mesh.vertices[3].f;
  CHECK_THROWS_AS(dpw::export_mesh(mesh, temp_path("dpw_bad.ply"), opt),
                  dpw::MeshIoError);
}

TEST_CASE("empty meshes survive the round trip") {
  dpw::SurfaceMesh empty;
  const std::string path = temp_path("dpw_empty.ply");
  dpw::export_mesh(empty, path, {});
  const auto back = dpw::import_mesh(path);
  CHECK(back.vertices.empty());
  CHECK(back.faces.empty());
  std::remove(path.c_str());
}

TEST_CASE("mesh export bytes are deterministic") {
  const auto mesh = dpw::sample_sphere_mesh(9);
  const std::string p1 = temp_path("dpw_det1.ply");
  const std::string p2 = temp_path("dpw_det2.ply");
  dpw::export_mesh(mesh, p1, {});
  dpw::export_mesh(mesh, p2, {});
  CHECK(read_file(p1) == read_file(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("import validates the header") {
  const std::string path = temp_path("dpw_broken.ply");
  {
    std::ofstream out(path, std::ios::binary);
    out << "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\n"
           "end_header\n0.5\n";
  }
  CHECK_THROWS_AS(dpw::import_mesh(path), dpw::MeshIoError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(dpw::import_mesh(temp_path("dpw_missing.ply")),
                  dpw::MeshIoError);
}

TEST_CASE("closing problems round trip through json") {
  dpw::ClosingProblem p;
  p.params = {4, 3};
  p.lambda1 = Complex(0.6, 0.8);
  p.lambda2 = Complex(-0.6, 0.8);
  p.circle_samples = 24;
  p.theta0 = dpw::default_theta();
  p.theta0(2) = 0.125;
  p.theta0(11) = -0.0625;
  p.punctures = dpw::lawson_punctures(1.25);
  p.basepoint = Complex(2.5, 0.5);
  p.integrator_tol = 1e-10;
  p.target_residual = 1e-8;
  p.tolerance = 1e-5;
  p.max_iterations = 17;
  p.symmetric_chart = false;
  p.solve_modulus = true;
  p.modulus = 1.25;
  const std::string text = dpw::problem_to_json(p);
  const dpw::ClosingProblem q = dpw::problem_from_json(text);
  CHECK(q.params.k == 4);
  CHECK(q.params.l == 3);
  CHECK(q.lambda1 == p.lambda1);
  CHECK(q.lambda2 == p.lambda2);
  CHECK(q.circle_samples == 24);
  CHECK((q.theta0 - p.theta0).norm() == 0.0);
  for (int j = 0; j < 4; ++j) CHECK(q.punctures[j] == p.punctures[j]);
  CHECK(q.basepoint == p.basepoint);
  CHECK(q.integrator_tol == p.integrator_tol);
  CHECK(q.target_residual == p.target_residual);
  CHECK(q.tolerance == p.tolerance);
  CHECK(q.max_iterations == 17);
  CHECK(q.symmetric_chart == false);
  CHECK(q.solve_modulus == true);
  CHECK(q.modulus == 1.25);
  // serialization is deterministic
  CHECK(dpw::problem_to_json(q) == text);
}

TEST_CASE("missing json keys fall back to defaults, unknown keys pass") {
  const dpw::ClosingProblem p =
      dpw::problem_from_json("{\"k\": 5, \"note\": \"provenance\"}");
  CHECK(p.params.k == 5);
  const dpw::ClosingProblem d;
  CHECK(p.params.l == d.params.l);
  CHECK(p.circle_samples == d.circle_samples);
  CHECK(p.modulus == d.modulus);
  CHECK_THROWS_AS(dpw::problem_from_json("not json"), dpw::JsonError);
}

TEST_CASE("problem files save and load") {
  dpw::ClosingProblem p;
  p.params = {3, 2};
  p.modulus = 0.75;
  const std::string path = temp_path("dpw_problem.json");
  dpw::save_problem(p, path);
  const dpw::ClosingProblem q = dpw::load_problem(path);
  CHECK(q.params.k == 3);
  CHECK(q.modulus == 0.75);
  std::remove(path.c_str());
  CHECK_THROWS_AS(dpw::load_problem(temp_path("dpw_nope.json")),
                  dpw::JsonError);
}

TEST_CASE("solver reports serialize every diagnostic block") {
  dpw::SolverReport r;
  r.theta = dpw::default_theta();
  r.theta(0) = 0.5;
  r.modulus = 1.5;
  r.residual_norm = 3e-7;
  r.iterations = 9;
  r.converged = true;
  r.breakdown.unitarity = 1e-7;
  r.sym_signs = {{{1, -1, 1}, {-1, 1, 1}}};
  r.history = {1.0, 0.1, 3e-7};
  const std::string text = dpw::report_to_json(r);
  CHECK(text.find("\"converged\": true") != std::string::npos);
  CHECK(text.find("unitarity") != std::string::npos);
  CHECK(text.find("sym_signs") != std::string::npos);
  CHECK(text.find("history") != std::string::npos);
  CHECK(dpw::report_to_json(r) == text);
}

TEST_CASE("diagnostics reports serialize") {
  const auto mesh = dpw::sample_sphere_mesh(9);
  const auto d = dpw::diagnostics(mesh, Complex(1, 0), Complex(0, 1));
  const std::string text = dpw::diagnostics_to_json(d);
  CHECK(text.find("area") != std::string::npos);
  CHECK(text.find("genus_estimate") != std::string::npos);
  CHECK(text.find("euler_characteristic") != std::string::npos);
}

}  // TEST_SUITE
