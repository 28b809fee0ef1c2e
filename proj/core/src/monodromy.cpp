#include "dpw/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace dpw {
namespace {

// orthonormal hermitian basis under Re tr(A^* B): Id and Pauli over sqrt(2)
std::array<Matrix2, 4> hermitian_basis() {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix2 e0, e1, e2, e3;
  e0 << s, 0, 0, s;
  e1 << 0, s, s, 0;
  e2 << 0, Complex(0, -s), Complex(0, s), 0;
  e3 << s, 0, 0, -s;
  return {e0, e1, e2, e3};
}

Matrix2 from_coords(const Eigen::Vector4d& x) {
  const auto basis = hermitian_basis();
  Matrix2 h = Matrix2::Zero();
  for (int a = 0; a < 4; ++a) h += x[a] * basis[a];
  return h;
}

double min_eigenvalue(const Matrix2& h) {
  Eigen::SelfAdjointEigenSolver<Matrix2> es(h);
  return es.eigenvalues().minCoeff();
}

}  // namespace

PoleSystem pole_system_at(const FuchsianPotential& p, Complex lambda) {
  PoleSystem sys;
  sys.poles.reserve(4);
  for (int j = 0; j < 4; ++j)
    sys.poles.emplace_back(p.punctures[j], p.eval_residue(j, lambda));
  return sys;
}

Matrix2 integrate_frame(const FuchsianPotential& p, Complex lambda,
                        const PathPolyline& path, double tol) {
  TransportOptions opt;
  opt.tol = tol;
  return transport(pole_system_at(p, lambda), path, opt);
}

MonodromyRep monodromy_from_petals(const PetalSystem& sys,
                                   const FuchsianPotential& p, Complex lambda,
                                   double tol) {
  const PoleSystem form = pole_system_at(p, lambda);
  TransportOptions opt;
  opt.tol = tol;

  std::array<Matrix2, 4> petal;
  for (int j = 0; j < 4; ++j) petal[j] = transport(form, sys.petals[j], opt);

  MonodromyRep rep;
  rep.lambda = lambda;
  rep.basepoint = sys.basepoint;
  // the petal transports multiply to the identity in descending ccw order;
  // bubble sort that sequence into puncture-index order with the rewrite
  // X Y -> (X Y X^{-1}) X, which preserves the product and keeps each
  // factor in the conjugacy class of its own petal
  std::array<int, 4> order;
  std::array<Matrix2, 4> factor;
  for (int m = 0; m < 4; ++m) {
    order[m] = sys.ccw_index[3 - m];
    factor[m] = petal[order[m]];
  }
  for (int pass = 0; pass < 3; ++pass)
    for (int m = 0; m < 3; ++m)
      if (order[m] > order[m + 1]) {
        const Matrix2 x = factor[m];
        factor[m] = x * factor[m + 1] * x.inverse();
        factor[m + 1] = x;
        std::swap(order[m], order[m + 1]);
      }
  for (int j = 0; j < 4; ++j) rep.m[j] = factor[j];
  return rep;
}

MonodromyRep loop_monodromy(const FuchsianPotential& p, Complex lambda,
                            Complex basepoint, double tol) {
  const PetalSystem sys = standard_petals(p.punctures, basepoint);
  return monodromy_from_petals(sys, p, lambda, tol);
}

double unitary_conjugation_defect(const MonodromyRep& rep, const Matrix2& h) {
  Eigen::SelfAdjointEigenSolver<Matrix2> es(h);
  const Eigen::Vector2d ev = es.eigenvalues();
  if (!(ev.minCoeff() > 0.0)) return std::numeric_limits<double>::infinity();
  const double det_root = std::sqrt(ev[0] * ev[1]);
  Eigen::Vector2d scaled = (ev / det_root).cwiseSqrt();
  const Matrix2 w = es.eigenvectors() * scaled.asDiagonal() *
                    es.eigenvectors().adjoint();
  const Matrix2 winv = es.eigenvectors() * scaled.cwiseInverse().asDiagonal() *
                       es.eigenvectors().adjoint();
  double sum = 0.0;
  for (const Matrix2& m : rep.m) {
    const Matrix2 u = w * m * winv;
    sum += (u.adjoint() * u - Matrix2::Identity()).squaredNorm();
  }
  return std::sqrt(sum);
}

UnitarizerResult unitarize(const MonodromyRep& rep) {
  const auto basis = hermitian_basis();
  Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
  std::array<std::array<Matrix2, 4>, 4> img;  // img[j][a] = M_j^* E_a M_j - E_a
  for (int j = 0; j < 4; ++j)
    for (int a = 0; a < 4; ++a)
      img[j][a] = rep.m[j].adjoint() * basis[a] * rep.m[j] - basis[a];
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      double s = 0.0;
      for (int j = 0; j < 4; ++j)
        s += (img[j][a].adjoint() * img[j][b]).trace().real();
      q(a, b) = s;
      q(b, a) = s;
    }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(q);
  const Eigen::Vector4d lam = es.eigenvalues();
  const double scale = std::max(lam[3], 1.0);
  const double thr = std::max(100.0 * std::max(lam[0], 0.0), 1e-10 * scale);

  int null_dim = 1;
  while (null_dim < 4 && lam[null_dim] <= thr) ++null_dim;

  UnitarizerResult out;
  out.ambiguous = null_dim > 1;
  Eigen::Vector4d x = es.eigenvectors().col(0);

  if (null_dim >= 3) {
    // wide degeneracy happens for central or scalar representations; prefer
    // the identity direction when the null space contains it
    Eigen::Vector4d id_coord(1, 0, 0, 0);
    Eigen::Vector4d proj = Eigen::Vector4d::Zero();
    for (int a = 0; a < null_dim; ++a)
      proj += es.eigenvectors().col(a).dot(id_coord) * es.eigenvectors().col(a);
    if (proj.norm() > 1e-6) x = proj.normalized();
  } else if (null_dim == 2) {
    // pick the most positive direction on the degenerate circle
    const Eigen::Vector4d v0 = es.eigenvectors().col(0);
    const Eigen::Vector4d v1 = es.eigenvectors().col(1);
    auto positivity = [&](double t) {
      return min_eigenvalue(from_coords(std::cos(t) * v0 + std::sin(t) * v1));
    };
    const int n_scan = 128;
    double best_t = 0.0, best_v = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < n_scan; ++n) {
      double t = 2.0 * std::numbers::pi * double(n) / double(n_scan);
      double v = positivity(t);
      if (v > best_v) {
        best_v = v;
        best_t = t;
      }
    }
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = best_t - 2.0 * std::numbers::pi / n_scan;
    double hi = best_t + 2.0 * std::numbers::pi / n_scan;
    double t1 = hi - gr * (hi - lo), t2 = lo + gr * (hi - lo);
    double f1 = positivity(t1), f2 = positivity(t2);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        lo = t1;
        t1 = t2;
        f1 = f2;
        t2 = lo + gr * (hi - lo);
        f2 = positivity(t2);
      } else {
        hi = t2;
        t2 = t1;
        f2 = f1;
        t1 = hi - gr * (hi - lo);
        f1 = positivity(t1);
      }
    }
    best_t = 0.5 * (lo + hi);
    x = std::cos(best_t) * v0 + std::sin(best_t) * v1;
  }

  Matrix2 h = from_coords(x);
  const double tr = h.trace().real();
  if (tr < 0.0 || (std::abs(tr) < 1e-14 && h(0, 0).real() < 0.0)) h = -h;

  out.h = h;
  double quad = 0.0;
  for (const Matrix2& m : rep.m)
    quad += (m.adjoint() * h * m - h).squaredNorm();
  out.residual = std::sqrt(std::max(quad, 0.0));
  out.positive = min_eigenvalue(h) > 0.0;
  if (out.positive) {
    const Complex det = h.determinant();
    const Matrix2 hn = h / std::sqrt(det.real());
    Eigen::SelfAdjointEigenSolver<Matrix2> hes(hn);
    out.w = hes.eigenvectors() *
            hes.eigenvalues().cwiseSqrt().asDiagonal().toDenseMatrix() *
            hes.eigenvectors().adjoint();
    out.certified = unitary_conjugation_defect(rep, hn);
  } else {
    out.w = Matrix2::Identity();
    out.certified = std::numeric_limits<double>::infinity();
  }
  return out;
}

namespace {

Matrix2 pauli_comb(const Eigen::Vector3d& s) {
  Matrix2 m;
  m << Complex(s[2], 0), Complex(s[0], -s[1]), Complex(s[0], s[1]),
      Complex(-s[2], 0);
  return m;
}

struct ExpHalf {
  Matrix2 w, winv;
  std::array<Matrix2, 3> dw, dwinv;
};

// closed form for w = exp(S/2) with S = pauli_comb(s): w = A Id + B S,
// A = cosh(t/2), B = sinh(t/2)/t, t = |s|; det w = 1 so the inverse is
// A Id - B S, and the derivative needs C = (A/2 - B)/t^2, finite at t = 0
ExpHalf exp_half_with_derivatives(const Eigen::Vector3d& s) {
  const double t = s.norm();
  const double t2 = t * t;
  double A, B, C;
  if (t < 1e-4) {
    A = 1.0 + t2 / 8.0;
    B = 0.5 + t2 / 48.0;
    C = 1.0 / 24.0 + t2 / 960.0;
  } else {
    A = std::cosh(0.5 * t);
    B = std::sinh(0.5 * t) / t;
    C = (0.5 * A - B) / t2;
  }
  const Matrix2 S = pauli_comb(s);
  ExpHalf e;
  e.w = A * Matrix2::Identity() + B * S;
  e.winv = A * Matrix2::Identity() - B * S;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d ek = Eigen::Vector3d::Zero();
    ek[k] = 1.0;
    const Matrix2 sk = pauli_comb(ek);
    const Matrix2 common = (0.5 * s[k] * B) * Matrix2::Identity();
    e.dw[k] = common + (s[k] * C) * S + B * sk;
    e.dwinv[k] = common - (s[k] * C) * S - B * sk;
  }
  return e;
}

// packed real/imag parts of u_j^* u_j - Id with u_j = w m_j w^{-1}, plus
// the exact jacobian in the log coordinates when requested
void defect_system(const std::array<Matrix2, 4>& m, const Eigen::Vector3d& s,
                   Eigen::Matrix<double, 32, 1>& r,
                   Eigen::Matrix<double, 32, 3>* jac = nullptr,
                   std::array<Matrix2, 4>* conjugated = nullptr) {
  const ExpHalf e = exp_half_with_derivatives(s);
  for (int j = 0; j < 4; ++j) {
    const Matrix2 wm = e.w * m[j];
    const Matrix2 mw = m[j] * e.winv;
    const Matrix2 u = e.w * mw;
    const Matrix2 d = u.adjoint() * u - Matrix2::Identity();
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        r[8 * j + 4 * a + 2 * b] = d(a, b).real();
        r[8 * j + 4 * a + 2 * b + 1] = d(a, b).imag();
      }
    if (conjugated) (*conjugated)[j] = u;
    if (jac)
      for (int k = 0; k < 3; ++k) {
        const Matrix2 du = e.dw[k] * mw + wm * e.dwinv[k];
        const Matrix2 dd = du.adjoint() * u + u.adjoint() * du;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            (*jac)(8 * j + 4 * a + 2 * b, k) = dd(a, b).real();
            (*jac)(8 * j + 4 * a + 2 * b + 1, k) = dd(a, b).imag();
          }
      }
  }
}

// damped newton on the squared defect with the exact gradient; converges to
// a stationary point at machine accuracy, which is what makes the refined
// entries reproducible across basepoint frames
double refine_form(const std::array<Matrix2, 4>& m, Eigen::Vector3d& s) {
  Eigen::Matrix<double, 32, 1> r;
  Eigen::Matrix<double, 32, 3> jac;
  const auto cost_at = [&](const Eigen::Vector3d& p) {
    defect_system(m, p, r);
    return r.squaredNorm();
  };
  const auto grad_at = [&](const Eigen::Vector3d& p) {
    defect_system(m, p, r, &jac);
    return Eigen::Vector3d(2.0 * jac.transpose() * r);
  };

  double cost = cost_at(s);
  double mu = 0.0;
  for (int iter = 0; iter < 120; ++iter) {
    const Eigen::Vector3d g = grad_at(s);
    if (g.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + cost)) break;

    Eigen::Matrix3d hess;
    const double h = 1e-5 * (1.0 + s.norm());
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d sp = s, sm = s;
      sp[k] += h;
      sm[k] -= h;
      const Eigen::Vector3d gp = grad_at(sp);
      const Eigen::Vector3d gm = grad_at(sm);
      hess.col(k) = (gp - gm) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(hess);
    const Eigen::Vector3d lam = es.eigenvalues();
    const double lam_floor = std::max(1e-10, 1e-8 * lam.cwiseAbs().maxCoeff());
    Eigen::Vector3d den;
    for (int k = 0; k < 3; ++k) den[k] = std::max(lam[k], lam_floor) + mu;
    Eigen::Vector3d trial =
        -(es.eigenvectors() *
          (es.eigenvectors().transpose() * g).cwiseQuotient(den));

    bool improved = false;
    double moved = 0.0;
    const double g_inf = g.lpNorm<Eigen::Infinity>();
    const double slack = 1e-12 * (1.0 + cost);
    for (int back = 0; back < 12; ++back) {
      Eigen::Vector3d st = s + trial;
      if (st.norm() > 25.0) st *= 25.0 / st.norm();
      const double ct = cost_at(st);
      bool ok = ct < cost - slack;
      if (!ok && ct < cost + slack) {
        // inside the cost noise band only the exact gradient can certify
        // progress toward the stationary point
        const Eigen::Vector3d gt = grad_at(st);
        ok = gt.lpNorm<Eigen::Infinity>() < 0.7 * g_inf;
      }
      if (ok) {
        moved = (st - s).norm();
        s = st;
        cost = ct;
        improved = true;
        break;
      }
      trial *= 0.5;
    }
    if (improved) {
      mu *= 0.25;
      if (moved < 3e-15 * (1.0 + s.norm())) break;
    } else {
      mu = mu == 0.0 ? 1e-3 * lam.cwiseAbs().maxCoeff() : mu * 16.0;
      if (!(mu > 0.0) || mu > 1e12 * (1.0 + lam.cwiseAbs().maxCoeff())) break;
    }
  }
  return cost_at(s);
}

}  // namespace

Matrix2 hermitian_exp_half(const Eigen::Vector3d& s) {
  const double a = 0.5 * s.norm();
  if (a < 1e-300) return Matrix2::Identity();
  const double sh = std::sinh(a) / (2.0 * a);
  return std::cosh(a) * Matrix2::Identity() + sh * pauli_comb(s);
}

Eigen::Vector3d hermitian_log_coords(const Matrix2& h) {
  Eigen::SelfAdjointEigenSolver<Matrix2> es(h);
  const Eigen::Vector2d ev = es.eigenvalues();
  Matrix2 logm = es.eigenvectors() *
                 Eigen::Vector2d(std::log(ev[0]), std::log(ev[1]))
                     .cast<Complex>()
                     .asDiagonal()
                     .toDenseMatrix() *
                 es.eigenvectors().adjoint();
  Eigen::Vector3d s;
  s[0] = 0.5 * (logm(0, 1) + logm(1, 0)).real();
  s[1] = 0.5 * (logm(1, 0) - logm(0, 1)).imag();
  s[2] = 0.5 * (logm(0, 0) - logm(1, 1)).real();
  return s;
}

InvariantForm best_invariant_form(const MonodromyRep& rep) {
  const UnitarizerResult un = unitarize(rep);
  InvariantForm ev;
  ev.positive = un.positive;
  ev.ambiguous = un.ambiguous;

  const double lam_min = min_eigenvalue(un.h);
  ev.hinge = std::max(0.0, -lam_min);

  Matrix2 h = un.h;
  if (!(lam_min > 0.0))
    h += (1e-3 + std::abs(lam_min)) * Matrix2::Identity();
  h /= std::sqrt(h.determinant().real());

  // deterministic multistart: the raw-form coordinates, the identity, and
  // the six axis points; every candidate is polished to a stationary point,
  // so the surviving minimum depends only on the conjugacy class of the
  // representation and not on the basepoint frame
  std::array<Eigen::Vector3d, 8> starts;
  starts[0] = hermitian_log_coords(h);
  starts[1] = Eigen::Vector3d::Zero();
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[k] = 1.2;
    starts[2 + 2 * k] = e;
    starts[3 + 2 * k] = -e;
  }

  const auto sorted_norms = [&](const Eigen::Matrix<double, 32, 1>& r) {
    Eigen::Vector4d n;
    for (int j = 0; j < 4; ++j) n[j] = r.segment<8>(8 * j).norm();
    std::sort(n.data(), n.data() + 4);
    return n;
  };

  Eigen::Vector3d s_best = starts[0];
  double cost_best = std::numeric_limits<double>::infinity();
  Eigen::Vector4d norms_best = Eigen::Vector4d::Zero();
  Eigen::Matrix<double, 32, 1> r;
  for (const Eigen::Vector3d& start : starts) {
    Eigen::Vector3d s = start;
    const double cost = refine_form(rep.m, s);
    defect_system(rep.m, s, r);
    const Eigen::Vector4d norms = sorted_norms(r);
    bool better = cost < cost_best - 1e-10 * (1.0 + cost);
    if (!better && cost <= cost_best + 1e-10 * (1.0 + cost)) {
      // cost tie between distinct minima: order by the sorted per-factor
      // norms so the pick is frame independent
      for (int j = 0; j < 4; ++j) {
        if (norms[j] < norms_best[j] - 1e-9) {
          better = true;
          break;
        }
        if (norms[j] > norms_best[j] + 1e-9) break;
      }
    }
    if (better) {
      s_best = s;
      cost_best = cost;
      norms_best = norms;
    }
  }

  defect_system(rep.m, s_best, r, nullptr, &ev.conjugated);
  ev.defect = std::sqrt(r.squaredNorm());
  ev.w = hermitian_exp_half(s_best);
  ev.h = ev.w * ev.w;
  return ev;
}

SymPointCheck sym_point_check(const MonodromyRep& rep, double tol) {
  SymPointCheck out;
  int sign_product = 1;
  bool all_close = true;
  for (int j = 0; j < 4; ++j) {
    const double dp = (rep.m[j] - Matrix2::Identity()).norm();
    const double dm = (rep.m[j] + Matrix2::Identity()).norm();
    out.signs[j] = dp <= dm ? 1 : -1;
    out.distances[j] = std::min(dp, dm);
    sign_product *= out.signs[j];
    all_close = all_close && out.distances[j] <= tol;
  }
  out.product_ok = sign_product == 1;
  out.ok = all_close && out.product_ok;
  return out;
}

}  // namespace dpw
