// Acceptance gate: one pass/fail line per criterion, exit 0 only if all pass.
// argv[1] = path to the pipeline binary, argv[2] = repository root.
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "dpw/integrator.hpp"
#include "dpw/iwasawa.hpp"
#include "dpw/monodromy.hpp"
#include "dpw/path.hpp"
#include "dpw/potential.hpp"
#include "dpw/solver.hpp"
#include "dpw/surface.hpp"
#include "dpw/symmetry.hpp"

namespace fs = std::filesystem;
using dpw::Complex;
using dpw::Matrix2;
using Json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(const std::string& name, double budget_seconds,
         const std::function<Outcome()>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  bool pass = out.pass;
  std::string detail = out.detail;
  if (pass && secs > budget_seconds) {
    pass = false;
    detail += " [over budget " + std::to_string(budget_seconds) + "s]";
  }
  if (!pass) ++failures;
  std::ostringstream line;
  line << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << " ("
       << std::fixed << secs << "s)";
  std::cout << line.str() << std::endl;
}

std::string num(double x) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << x;
  return s.str();
}

Matrix2 random_entries(std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> uni(-amp, amp);
  Matrix2 m;
  m << Complex(uni(rng), uni(rng)), Complex(uni(rng), uni(rng)),
      Complex(uni(rng), uni(rng)), Complex(uni(rng), uni(rng));
  return m;
}

Matrix2 random_su2(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  Eigen::Vector4d q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  Matrix2 m;
  m << Complex(q(0), q(3)), Complex(q(2), q(1)), Complex(-q(2), q(1)),
      Complex(q(0), -q(3));
  return m;
}

Eigen::Vector2cd perp(const Eigen::Vector2cd& v) {
  return Eigen::Vector2cd(-v(1), v(0));
}

// kernel-line degree counted independently: winding of s(z) wedge v along a
// circle enclosing every zero, by the argument principle
int zero_count_oracle(const dpw::KernelSection& s, const Eigen::Vector2cd& v) {
  auto pairing = [&](Complex z) {
    Complex e0 = 0, e1 = 0;
    for (std::size_t d = 0; d < s.entries[0].size(); ++d)
      e0 += s.entries[0][d] * std::pow(z, double(d));
    for (std::size_t d = 0; d < s.entries[1].size(); ++d)
      e1 += s.entries[1][d] * std::pow(z, double(d));
    return e0 * v(1) - e1 * v(0);
  };
  const int n = 4096;
  const double radius = 50.0;
  double total = 0.0;
  Complex prev = pairing(Complex(radius, 0));
  for (int m = 1; m <= n; ++m) {
    const Complex z = std::polar(radius, 2 * M_PI * m / n);
    const Complex cur = pairing(z);
    total += std::arg(cur / prev);
    prev = cur;
  }
  return int(std::lround(total / (2 * M_PI)));
}

struct BuiltKernel {
  std::array<Matrix2, 4> residues;
  std::array<Complex, 4> punctures;
  bool usable = false;
};

BuiltKernel build_kernel_case(std::mt19937_64& rng, bool constant_section) {
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  BuiltKernel out;
  while (true) {
    for (auto& z : out.punctures) z = Complex(uni(rng), uni(rng));
    double dmin = 1e300;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        dmin = std::min(dmin, std::abs(out.punctures[a] - out.punctures[b]));
    if (dmin > 0.5) break;
  }
  const Eigen::Vector2cd s0(Complex(uni(rng), uni(rng)),
                            Complex(uni(rng), uni(rng)));
  const Eigen::Vector2cd s1 =
      constant_section ? Eigen::Vector2cd::Zero().eval()
                       : Eigen::Vector2cd(Complex(uni(rng), uni(rng)),
                                          Complex(uni(rng), uni(rng)));
  Eigen::Matrix<Complex, 3, 4> span;
  std::array<Matrix2, 4> v;
  for (int j = 0; j < 4; ++j) {
    const Eigen::Vector2cd sj = s0 + out.punctures[j] * s1;
    v[j] = sj * perp(sj).transpose();
    span(0, j) = v[j](0, 0);
    span(1, j) = v[j](0, 1);
    span(2, j) = v[j](1, 0);
  }
  const Eigen::JacobiSVD<Eigen::Matrix<Complex, 3, 4>> svd(
      span, Eigen::ComputeFullV);
  const Eigen::Vector4cd c = svd.matrixV().col(3);
  Matrix2 total = Matrix2::Zero();
  double cmin = 1e300;
  for (int j = 0; j < 4; ++j) {
    out.residues[j] = c(j) * v[j];
    total += out.residues[j];
    cmin = std::min(cmin, out.residues[j].norm());
  }
  out.usable = total.norm() < 1e-10 && cmin > 1e-3;
  return out;
}

std::string strip_timestamps(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("\"timestamp\"") == std::string::npos) out << line << "\n";
  return out.str();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_stage(const std::string& binary, const fs::path& config,
              const fs::path& out, const std::string& stage) {
  fs::create_directories(out);
  const std::string cmd = binary + " --config " + config.string() + " --out " +
                          out.string() + " " + stage + " >> " +
                          (out / "stage_log.txt").string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string binary = argc > 1 ? argv[1] : "";
  const fs::path root = argc > 2 ? argv[2] : ".";
  const fs::path work =
      fs::temp_directory_path() / "dpw_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  run("exact arithmetic layer", 1.0, [] {
    using dpw::Rational;
    for (int k = 2; k <= 50; ++k)
      for (int l = 2; l <= 50; ++l) {
        const dpw::SurfaceParams p{k, l};
        if (dpw::rh_genus(p) != long(k - 1) * (l - 1))
          return Outcome{false, "genus"};
        if (dpw::genus(p) != dpw::rh_genus(p))
          return Outcome{false, "genus mismatch"};
        const auto b = dpw::branch_data(p);
        if (dpw::parabolic_degree_of(b) != Rational(-4))
          return Outcome{false, "parabolic degree"};
        for (const auto& d : b)
          if (d.weight_lower + d.weight_upper != Rational(1))
            return Outcome{false, "weight sum"};
        if (!dpw::generator_relation_check(dpw::canonical_generators(p)).ok())
          return Outcome{false, "generator relation"};
      }
    return Outcome{true, "2401 (k,l) pairs exact"};
  });

  run("euler monodromy oracle", 30.0, [] {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> gap(0.05, 0.95);
    double worst = 0.0;
    int trials = 0;
    while (trials < 100) {
      Matrix2 a = random_entries(rng, 1.0);
      a(1, 1) = -a(0, 0);
      const Complex mu2 =
          2.0 * std::sqrt(a(0, 0) * a(0, 0) + a(0, 1) * a(1, 0));
      if (std::abs(mu2) < 1e-3) continue;
      a *= gap(rng) / std::abs(mu2);
      ++trials;
      dpw::PoleSystem sys;
      sys.poles = {{Complex(0, 0), a}};
      const auto loop =
          dpw::circle_polygon(Complex(0, 0), 0.8 + 0.005 * trials, 48,
                              0.07 * trials, {Complex(0, 0)});
      const Matrix2 got =
          dpw::transport(sys, loop, {1e-12, 0.25, 1e-14, 4000000});
      const Matrix2 expect = (Complex(0, 2 * M_PI) * a).exp();
      worst = std::max(worst, (got - expect).norm());
    }
    return Outcome{worst < 1e-10, "100 trials, worst deviation " + num(worst)};
  });

  run("structural monodromy", 120.0, [] {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> bump(-0.04, 0.04);
    std::uniform_real_distribution<double> angle(0, 2 * M_PI);
    double worst_det = 0.0, worst_prod = 0.0, worst_trace = 0.0;
    for (const dpw::SurfaceParams params :
         {dpw::SurfaceParams{3, 3}, dpw::SurfaceParams{3, 4}}) {
      int built = 0;
      while (built < 20) {
        Eigen::VectorXd theta = dpw::default_theta();
        if (built > 0)
          for (int i = 0; i < theta.size(); ++i) theta(i) += bump(rng);
        const auto pot = dpw::build_potential(params, theta);
        if (!dpw::validate(pot).all_pass()) continue;
        ++built;
        const auto petals =
            dpw::standard_petals(pot.punctures, Complex(3, 0));
        for (int s = 0; s < 8; ++s) {
          const Complex lambda = std::polar(1.0, angle(rng));
          const auto rep =
              dpw::monodromy_from_petals(petals, pot, lambda, 1e-11);
          Matrix2 prod = Matrix2::Identity();
          for (int j = 0; j < 4; ++j) {
            prod = prod * rep.m[j];
            worst_det = std::max(
                worst_det,
                std::abs(rep.m[j].determinant() - Complex(1, 0)));
            const double want =
                2.0 * std::abs(std::cos(M_PI / pot.branch[j].order));
            worst_trace = std::max(
                worst_trace, std::abs(std::abs(rep.m[j].trace()) - want));
          }
          worst_prod = std::max(
              worst_prod, (prod - Matrix2::Identity()).norm());
        }
      }
    }
    const bool ok =
        worst_det < 1e-8 && worst_prod < 1e-8 && worst_trace < 1e-8;
    return Outcome{ok, "det " + num(worst_det) + ", product " +
                           num(worst_prod) + ", trace " + num(worst_trace)};
  });

  run("unitarizer", 10.0, [] {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> uni(-0.35, 0.35);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      dpw::MonodromyRep rep;
      rep.m[0] = random_su2(rng);
      rep.m[1] = random_su2(rng);
      rep.m[2] = random_su2(rng);
      rep.m[3] = (rep.m[0] * rep.m[1] * rep.m[2]).inverse();
      Matrix2 g;
      do {
        g << Complex(1 + uni(rng), uni(rng)), Complex(uni(rng), uni(rng)),
            Complex(uni(rng), uni(rng)), Complex(1 + uni(rng), uni(rng));
      } while (std::abs(g.determinant()) < 0.2);
      const Matrix2 gi = g.inverse();
      for (auto& m : rep.m) m = g * m * gi;
      const auto res = dpw::unitarize(rep);
      if (!res.positive) return Outcome{false, "positivity lost"};
      worst = std::max(worst, res.residual);
    }
    dpw::MonodromyRep hyper;
    hyper.m[0] << Complex(2, 0), Complex(0, 0), Complex(0, 0), Complex(0.5, 0);
    hyper.m[1] = hyper.m[0].inverse();
    hyper.m[2] = Matrix2::Identity();
    hyper.m[3] = Matrix2::Identity();
    if (dpw::unitarize(hyper).positive)
      return Outcome{false, "hyperbolic quadruple accepted"};
    return Outcome{worst < 1e-10,
                   "100 trials, worst residual " + num(worst) +
                       ", hyperbolic rejected"};
  });

  run("iwasawa splitting", 60.0, [] {
    std::mt19937_64 rng(109);
    // amplitude keeps the exact factors' fourier tail beyond degree 12
    // under the gate; the tail scales like the fifth power of the amplitude
    std::uniform_real_distribution<double> uni(-0.005, 0.005);
    const dpw::CircleSampling grid(32);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      dpw::LaurentMatrixLoop a = dpw::LaurentMatrixLoop::identity();
      for (int d = -3; d <= 3; ++d) {
        Matrix2 m;
        m << Complex(uni(rng), uni(rng)), Complex(uni(rng), uni(rng)),
            Complex(uni(rng), uni(rng)), Complex(uni(rng), uni(rng));
        a.set_coefficient(d, a.coefficient(d) + m);
      }
      const auto f = dpw::iwasawa_factorize(a, 12, 1e-10);
      const auto prod =
          dpw::loop_mul_full(f.unitary_part, f.positive_part);
      worst = std::max(worst, dpw::sample_distance(prod, a, grid));
      worst = std::max(worst, dpw::unitarity_defect(f.unitary_part, grid));
      if (f.positive_part.n_min() < 0)
        return Outcome{false, "positive factor leaks below degree zero"};
    }
    return Outcome{worst < 1e-8, "50 trials, worst defect " + num(worst)};
  });

  run("higgs and stability layer", 60.0, [] {
    std::mt19937_64 rng(113);
    std::uniform_real_distribution<double> bump(-0.03, 0.03);
    double worst_sq = 0.0, worst_line = 0.0;
    for (const dpw::SurfaceParams params :
         {dpw::SurfaceParams{2, 2}, dpw::SurfaceParams{3, 2},
          dpw::SurfaceParams{3, 3}, dpw::SurfaceParams{3, 4},
          dpw::SurfaceParams{4, 5}, dpw::SurfaceParams{7, 3}}) {
      for (int trial = 0; trial < 3; ++trial) {
        Eigen::VectorXd theta = dpw::default_theta();
        if (trial > 0)
          for (int i = 0; i < theta.size(); ++i) theta(i) += bump(rng);
        const auto pot = dpw::build_potential(params, theta);
        const auto report = dpw::validate(pot);
        if (!report.all_pass()) return Outcome{false, "validation failed"};
        const auto* sq = report.find("higgs field squares to zero");
        const auto* line = report.find("parabolic lines in higgs kernel");
        if (!sq || !line) return Outcome{false, "missing validation checks"};
        worst_sq = std::max(worst_sq, sq->residual);
        worst_line = std::max(worst_line, line->residual);
      }
    }
    if (worst_sq >= 1e-12 || worst_line >= 1e-12)
      return Outcome{false, "higgs residuals " + num(worst_sq) + ", " +
                                num(worst_line)};
    int built = 0;
    while (built < 10) {
      const bool constant = built >= 8;
      const auto ex = build_kernel_case(rng, constant);
      if (!ex.usable) continue;
      const auto ks = dpw::kernel_section_of(ex.residues, ex.punctures);
      const Eigen::Vector2cd probe(Complex(0.83, -0.41), Complex(0.29, 0.67));
      const int zeros = zero_count_oracle(ks, probe);
      if (ks.degree != (constant ? 0 : 1))
        return Outcome{false, "kernel degree " + std::to_string(ks.degree)};
      if (zeros != ks.degree)
        return Outcome{false, "zero count " + std::to_string(zeros) +
                                  " vs degree " + std::to_string(ks.degree)};
      ++built;
    }
    return Outcome{true, "higgs residuals " + num(worst_sq) + ", " +
                             num(worst_line) + "; 10 kernel degree cases"};
  });

  run("diagnostics oracles", 30.0, [] {
    const auto sphere = dpw::sample_sphere_mesh(51);
    if (sphere.faces.size() < 10000)
      return Outcome{false, "sphere mesh too coarse"};
    const auto ds = dpw::diagnostics(sphere, Complex(1, 0), Complex(0, 1));
    const double sphere_err = std::abs(ds.area - 4 * M_PI);
    const auto torus = dpw::sample_clifford_mesh(256);
    const auto dt = dpw::diagnostics(torus, Complex(1, 0), Complex(-1, 0));
    const double torus_err = std::abs(dt.area - 2 * M_PI * M_PI);
    const bool ok = sphere_err < 1e-4 && torus_err < 1e-3 &&
                    std::abs(dt.h_mean) < 1e-3 && dt.h_std < 1e-3;
    return Outcome{ok, "sphere area err " + num(sphere_err) +
                           ", torus area err " + num(torus_err) +
                           ", torus H " + num(dt.h_mean) + " +- " +
                           num(dt.h_std)};
  });

  // full pipeline through the installed binary, twice for the determinism gate
  const fs::path config = root / "configs" / "lawson_3_2.json";
  const fs::path run1 = work / "run1";
  const fs::path run2 = work / "run2";
  bool pipeline_ok = false;

  run("end-to-end closing run", 900.0, [&] {
    if (binary.empty()) return Outcome{false, "pipeline binary not provided"};
    if (!fs::exists(config))
      return Outcome{false, "missing config " + config.string()};
    for (const char* stage :
         {"eigen", "validate", "monodromy", "solve", "surface", "report"}) {
      const int rc = run_stage(binary, config, run1, stage);
      if (rc != 0)
        return Outcome{false, std::string("stage ") + stage + " exited " +
                                  std::to_string(rc)};
    }
    const Json solve = Json::parse(slurp(run1 / "solve_report.json"));
    const Json surf = Json::parse(slurp(run1 / "surface_report.json"));
    const double residual = solve["residual_norm"];
    const double unit_defect = surf["unit_defect"];
    const double mismatch = surf["mismatch"];
    const bool closed = surf["closed"];
    const Json diag = surf["diagnostics"];
    const double area = diag["area"];
    const double h_mean = diag["h_mean"];
    const double h_std = diag["h_std"];
    const long genus = diag["genus_estimate"];
    const bool ok = solve["converged"].get<bool>() && residual < 1e-6 &&
                    unit_defect < 1e-8 && std::abs(h_mean) < 1e-3 &&
                    h_std < 1e-3 && mismatch < 1e-6 && closed &&
                    area > 2 * M_PI * M_PI && area < 8 * M_PI;
    pipeline_ok = ok;
    return Outcome{ok, "residual " + num(residual) + ", unit defect " +
                           num(unit_defect) + ", H " + num(h_mean) + " +- " +
                           num(h_std) + ", mismatch " + num(mismatch) +
                           ", area " + std::to_string(area) + ", genus " +
                           std::to_string(genus)};
  });

  run("determinism", 1200.0, [&] {
    if (binary.empty()) return Outcome{false, "pipeline binary not provided"};
    if (!pipeline_ok)
      return Outcome{false, "end-to-end run unavailable for comparison"};
    for (const char* stage :
         {"eigen", "validate", "monodromy", "solve", "surface", "report"}) {
      const int rc = run_stage(binary, config, run2, stage);
      if (rc != 0)
        return Outcome{false, std::string("stage ") + stage + " exited " +
                                  std::to_string(rc)};
    }
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(run1)) {
      const std::string name = entry.path().filename().string();
      if (name == "stage_log.txt") continue;
      const fs::path other = run2 / name;
      if (!fs::exists(other)) return Outcome{false, name + " missing"};
      std::string a = slurp(entry.path());
      std::string b = slurp(other);
      if (entry.path().extension() == ".json") {
        a = strip_timestamps(a);
        b = strip_timestamps(b);
      }
      if (a != b) return Outcome{false, name + " differs between runs"};
      ++compared;
    }
    return Outcome{true, std::to_string(compared) +
                             " artifacts byte-identical modulo timestamps"};
  });

  std::cout << (failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL")
            << " (" << failures << " failing)" << std::endl;
  return failures == 0 ? 0 : 1;
}
