#include "dpw/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>

#include <Eigen/SVD>

namespace dpw {
namespace {

constexpr double kChartFloor = 1e-3;   // barrier threshold on |x|^2 + |y|^2
constexpr double kChartWeight = 1e3;

std::vector<Complex> sample_points(const ClosingProblem& pr,
                                   std::array<int, 2>& sym_index) {
  std::vector<Complex> pts;
  for (int m = 0; m < pr.circle_samples; ++m) {
    const double t = 2.0 * std::numbers::pi * double(m) / pr.circle_samples;
    pts.emplace_back(std::cos(t), std::sin(t));
  }
  const std::array<Complex, 2> sym{pr.lambda1, pr.lambda2};
  for (int i = 0; i < 2; ++i) {
    int found = -1;
    for (std::size_t m = 0; m < pts.size(); ++m)
      if (std::abs(pts[m] - sym[i]) < 1e-12) {
        found = int(m);
        break;
      }
    if (found < 0) {
      pts.push_back(sym[i]);
      found = int(pts.size()) - 1;
    }
    sym_index[i] = found;
  }
  return pts;
}

int residual_size(const ClosingProblem& pr) {
  std::array<int, 2> sym_index;
  const auto pts = sample_points(pr, sym_index);
  return int(pts.size()) * 4 + 6 + 4;
}

// every monodromy-derived entry is a Frobenius norm of a word in the
// invariant-form conjugates, so a basepoint move (which conjugates the
// whole representation) leaves the vector unchanged up to integration
// and refinement error
Eigen::VectorXd residual_impl(const ClosingProblem& pr,
                              const PetalSystem& petals,
                              const Eigen::VectorXd& theta, SignState* signs,
                              ResidualBreakdown* breakdown) {
  if (theta.size() != kAccessoryDimension)
    throw SolverError("accessory vector has the wrong dimension");

  std::array<int, 2> sym_index;
  const auto pts = sample_points(pr, sym_index);
  const int m_total = int(pts.size()) * 4 + 6 + 4;

  const FuchsianPotential pot = build_potential(pr.params, theta, pr.punctures);

  Eigen::VectorXd out(m_total);
  int at = 0;

  std::array<InvariantForm, 2> sym_eval;
  double unit2 = 0.0, pos2 = 0.0;
  for (std::size_t m = 0; m < pts.size(); ++m) {
    const MonodromyRep rep =
        monodromy_from_petals(petals, pot, pts[m], pr.integrator_tol);
    const InvariantForm ev = best_invariant_form(rep);
    for (int j = 0; j < 4; ++j) {
      const double e =
          (ev.conjugated[j].adjoint() * ev.conjugated[j] - Matrix2::Identity())
              .norm();
      out[at++] = e;
      unit2 += e * e;
    }
    pos2 += ev.hinge * ev.hinge;
    for (int i = 0; i < 2; ++i)
      if (int(m) == sym_index[i]) sym_eval[i] = ev;
  }

  // the closing relations at the Sym points: opposite-order generator pairs
  // multiply to a sign, and the two pairs commute up to a sign
  SignState local;
  SignState* st = signs ? signs : &local;
  std::array<double, 2> rel2{0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    const auto& u = sym_eval[i].conjugated;
    const Matrix2 p12 = u[0] * u[1];
    const Matrix2 p34 = u[2] * u[3];
    const Matrix2 c13 = u[0] * u[2];
    const Matrix2 c31 = u[2] * u[0];
    if (!st->frozen) {
      const double plus = (p12 - Matrix2::Identity()).squaredNorm() +
                          (p34 - Matrix2::Identity()).squaredNorm();
      const double minus = (p12 + Matrix2::Identity()).squaredNorm() +
                           (p34 + Matrix2::Identity()).squaredNorm();
      const int s_pair = plus <= minus ? 1 : -1;  // admissible: equal signs
      st->signs[i][0] = s_pair;
      st->signs[i][1] = s_pair;
      st->signs[i][2] =
          (c13 - c31).norm() <= (c13 + c31).norm() ? 1 : -1;
    }
    const double s12 = st->signs[i][0];
    const double s34 = st->signs[i][1];
    const double s13 = st->signs[i][2];
    out[at++] = (p12 - s12 * Matrix2::Identity()).norm();
    out[at++] = (p34 - s34 * Matrix2::Identity()).norm();
    out[at++] = (c13 - s13 * c31).norm();
    rel2[i] = out.segment(at - 3, 3).squaredNorm();
  }
  st->frozen = true;

  // chart margin barrier, computed straight from the chart coordinates
  auto cc = [&](int i) { return Complex(theta(2 * i), theta(2 * i + 1)); };
  const Complex x0 = Complex(1, 0) + cc(0), x1 = cc(1);
  const Complex y0 = cc(2), y1 = Complex(1, 0) + cc(3);
  double chart2 = 0.0;
  for (int j = 0; j < 4; ++j) {
    const Complex z = pr.punctures[j];
    const double n = std::norm(x0 + x1 * z) + std::norm(y0 + y1 * z);
    const double entry = kChartWeight * std::max(0.0, kChartFloor - n);
    out[at++] = entry;
    chart2 += entry * entry;
  }

  if (breakdown) {
    breakdown->unitarity = std::sqrt(unit2);
    breakdown->positivity = std::sqrt(pos2);
    breakdown->sym_relations_1 = std::sqrt(rel2[0]);
    breakdown->sym_relations_2 = std::sqrt(rel2[1]);
    breakdown->chart_margin = std::sqrt(chart2);
  }
  return out;
}

void validate_problem(const ClosingProblem& pr) {
  if (std::abs(std::abs(pr.lambda1) - 1.0) > 1e-12 ||
      std::abs(std::abs(pr.lambda2) - 1.0) > 1e-12)
    throw SolverError("Sym points must lie on the unit circle");
  if (std::abs(pr.lambda1 - pr.lambda2) < 1e-14)
    throw SolverError("Sym points must be distinct");
  if (pr.circle_samples < 0)
    throw SolverError("negative circle sample count");
}

}  // namespace

double mean_curvature_of(Complex lambda1, Complex lambda2) {
  if (std::abs(std::abs(lambda1) - 1.0) > 1e-10 ||
      std::abs(std::abs(lambda2) - 1.0) > 1e-10)
    throw SolverError("Sym points must lie on the unit circle");
  if (std::abs(lambda1 - lambda2) == 0.0)
    throw SolverError("mean curvature undefined for coincident Sym points");
  const Complex h = Complex(0, 1) * (lambda1 + lambda2) / (lambda1 - lambda2);
  if (std::abs(h.imag()) > 1e-12 * (1.0 + std::abs(h)))
    throw SolverError("mean curvature has a nonvanishing imaginary part");
  return h.real();
}

std::array<Complex, 4> lawson_punctures(double s) {
  if (!(s > 0.0)) throw SolverError("layout modulus must be positive");
  return {Complex(1, 0), Complex(-1, 0), Complex(0, s), Complex(0, -s)};
}

Eigen::VectorXd residual(const ClosingProblem& problem,
                         const Eigen::VectorXd& theta, SignState* signs,
                         ResidualBreakdown* breakdown) {
  validate_problem(problem);
  const PetalSystem petals =
      standard_petals(problem.punctures, problem.basepoint);
  return residual_impl(problem, petals, theta, signs, breakdown);
}

SolverReport solve(const ClosingProblem& problem) {
  validate_problem(problem);

  std::vector<int> free_idx;
  if (problem.symmetric_chart)
    free_idx = {0, 1, 6, 7, 8, 9, 10, 11};
  else
    for (int i = 0; i < kAccessoryDimension; ++i) free_idx.push_back(i);
  const int n_theta = int(free_idx.size());
  const int n = n_theta + (problem.solve_modulus ? 1 : 0);

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < n_theta; ++c) v[c] = problem.theta0[free_idx[c]];

  auto embed = [&](const Eigen::VectorXd& vv) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(kAccessoryDimension);
    if (!problem.symmetric_chart) theta = problem.theta0;
    for (int c = 0; c < n_theta; ++c) theta[free_idx[c]] = vv[c];
    return theta;
  };
  auto modulus_of = [&](const Eigen::VectorXd& vv) {
    return problem.solve_modulus ? problem.modulus * std::exp(vv[n_theta])
                                 : problem.modulus;
  };

  const int m_total = residual_size(problem);
  SignState signs;
  ResidualBreakdown breakdown;

  double cached_modulus = std::numeric_limits<double>::quiet_NaN();
  PetalSystem petals;
  auto eval = [&](const Eigen::VectorXd& vv, ResidualBreakdown* bd) {
    const double mod = modulus_of(vv);
    ClosingProblem pr = problem;
    if (problem.solve_modulus) pr.punctures = lawson_punctures(mod);
    try {
      if (mod != cached_modulus) {
        petals = standard_petals(pr.punctures, pr.basepoint);
        cached_modulus = mod;
      }
      return residual_impl(pr, petals, embed(vv), &signs, bd);
    } catch (const PotentialError&) {
    } catch (const TransportError&) {
    } catch (const PathError&) {
      cached_modulus = std::numeric_limits<double>::quiet_NaN();
    }
    return Eigen::VectorXd::Constant(m_total, 3.0).eval();
  };

  Eigen::VectorXd r = eval(v, &breakdown);
  double cost = r.norm();

  SolverReport rep;
  rep.history.push_back(cost);
  double mu = -1.0;
  bool stalled = false;

  for (int iter = 0; iter < problem.max_iterations && !stalled; ++iter) {
    if (cost <= problem.target_residual) break;

    Eigen::MatrixXd jac(m_total, n);
    for (int c = 0; c < n; ++c) {
      Eigen::VectorXd vp = v;
      const double h = 1e-6 * std::max(1.0, std::abs(v[c]));
      vp[c] += h;
      jac.col(c) = (eval(vp, nullptr) - r) / h;
    }
    if (iter == 0) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
      const auto& sv = svd.singularValues();
      rep.rank_deficient = sv.size() > 0 && sv(sv.size() - 1) < 1e-10 * sv(0);
    }

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    Eigen::VectorXd d = jtj.diagonal().cwiseMax(1e-12 * jtj.diagonal().maxCoeff());
    if (mu < 0.0) mu = 1e-3;

    bool accepted = false;
    for (int inner = 0; inner < 12; ++inner) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += mu * d;
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      const Eigen::VectorXd vt = v + step;
      ResidualBreakdown bt;
      const Eigen::VectorXd rt = eval(vt, &bt);
      const double ct = rt.norm();
      if (ct < cost) {
        v = vt;
        r = rt;
        cost = ct;
        breakdown = bt;
        mu = std::max(mu * 0.25, 1e-14);
        accepted = true;
        rep.iterations = iter + 1;
        rep.history.push_back(cost);
        if (problem.progress)
          std::cerr << "solve iter " << iter + 1 << " residual " << cost
                    << " damping " << mu << "\n";
        if (step.norm() <= 1e-13 * (1.0 + v.norm())) stalled = true;
        break;
      }
      mu *= 4.0;
      if (mu > 1e14) break;
    }
    if (!accepted) stalled = true;
  }

  rep.theta = embed(v);
  rep.modulus = modulus_of(v);
  rep.residual_norm = cost;
  rep.breakdown = breakdown;
  rep.converged = cost < problem.tolerance;
  rep.sym_signs = signs.signs;

  {
    ClosingProblem dense = problem;
    dense.circle_samples = std::max(64, problem.circle_samples);
    if (problem.solve_modulus) dense.punctures = lawson_punctures(rep.modulus);
    rep.verification_samples = dense.circle_samples;
    try {
      const PetalSystem dense_petals =
          standard_petals(dense.punctures, dense.basepoint);
      rep.verification_residual =
          residual_impl(dense, dense_petals, rep.theta, &signs, nullptr)
              .norm();
    } catch (const std::exception&) {
      rep.verification_residual = std::numeric_limits<double>::infinity();
    }
  }
  return rep;
}

std::vector<ContinuationStep> continuation(
    const std::function<ClosingProblem(double)>& family, double initial_step,
    double min_step) {
  std::vector<ContinuationStep> out;
  ClosingProblem start = family(0.0);
  SolverReport last = solve(start);
  out.push_back({0.0, last});
  if (!last.converged) return out;

  double t = 0.0;
  double dt = initial_step;
  while (t < 1.0 - 1e-12) {
    const double tn = std::min(1.0, t + dt);
    ClosingProblem pr = family(tn);
    pr.theta0 = last.theta;
    if (pr.solve_modulus) pr.modulus = last.modulus;
    const SolverReport rep = solve(pr);
    if (rep.converged) {
      out.push_back({tn, rep});
      last = rep;
      t = tn;
      dt = std::min(dt * 2.0, initial_step);
    } else {
      dt *= 0.5;
      if (dt < min_step) break;
    }
  }
  return out;
}

}  // namespace dpw
