#include "dpw/potential.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

namespace dpw {

namespace {

using Vec2 = Eigen::Vector2cd;
using Poly = std::vector<Complex>;  // ascending degree

// kernel and image both span (x, -y); squares to zero identically
Matrix2 rank_one_square_zero(Complex x, Complex y) {
  Matrix2 m;
  m << x * y, x * x, -y * y, -x * y;
  return m;
}

Complex poly_eval(const Poly& p, Complex z) {
  Complex acc(0, 0);
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
  return acc;
}

double poly_sup(const Poly& p) {
  double s = 0.0;
  for (const auto& c : p) s = std::max(s, std::abs(c));
  return s;
}

void poly_trim(Poly& p, double floor_abs) {
  while (!p.empty() && std::abs(p.back()) <= floor_abs) p.pop_back();
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, Complex(0, 0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

struct ChartPoint {
  std::array<Complex, 2> x;  // x(z) = x[0] + x[1] z
  std::array<Complex, 2> y;
  Complex t;
  Complex sigma;
};

ChartPoint decode_chart(const Eigen::VectorXd& theta) {
  if (theta.size() != kAccessoryDimension)
    throw PotentialError("accessory vector must have dimension " +
                         std::to_string(kAccessoryDimension));
  auto c = [&theta](int i) { return Complex(theta(2 * i), theta(2 * i + 1)); };
  ChartPoint p;
  p.x = {Complex(1, 0) + c(0), c(1)};
  p.y = {c(2), Complex(1, 0) + c(3)};
  p.t = c(4);
  p.sigma = c(5);
  return p;
}

// det of a loop as a Laurent series via the polarization
// det(sum X_i) = sum_{i,j} (tr X_i tr X_j - tr(X_i X_j)) / 2
std::map<int, Complex> det_series(const LaurentMatrixLoop& a) {
  std::map<int, Complex> out;
  for (const auto& [i, xi] : a.coefficients())
    for (const auto& [j, xj] : a.coefficients())
      out[i + j] += 0.5 * (xi.trace() * xj.trace() - (xi * xj).trace());
  return out;
}

Vec2 plus_eigenline(const Matrix2& m, double rho) {
  Eigen::ComplexEigenSolver<Matrix2> es(m);
  int pick = (std::abs(es.eigenvalues()(0) - Complex(rho, 0)) <=
              std::abs(es.eigenvalues()(1) - Complex(rho, 0)))
                 ? 0
                 : 1;
  Vec2 v = es.eigenvectors().col(pick);
  // deterministic phase: largest entry real positive
  int big = (std::abs(v(0)) >= std::abs(v(1))) ? 0 : 1;
  Complex ph = v(big) / std::abs(v(big));
  return v / ph;
}

}  // namespace

Matrix2 FuchsianPotential::residue_coefficient(int j, int degree) const {
  return residues.at(static_cast<size_t>(j)).coefficient(degree);
}

Matrix2 FuchsianPotential::eval_residue(int j, Complex lambda) const {
  return residues.at(static_cast<size_t>(j)).eval(lambda);
}

std::array<Complex, 4> default_punctures() {
  return {Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};
}

Eigen::VectorXd default_theta() {
  return Eigen::VectorXd::Zero(kAccessoryDimension);
}

FuchsianPotential build_potential(const SurfaceParams& params,
                                  const Eigen::VectorXd& theta,
                                  const std::array<Complex, 4>& punctures,
                                  int trunc) {
  if (trunc < 1)
    throw PotentialError("residue truncation must keep degrees -1..1");
  BranchData branch = branch_data(params);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (std::abs(punctures[i] - punctures[j]) < 1e-12)
        throw PotentialError("punctures must be distinct");

  ChartPoint c = decode_chart(theta);

  std::array<Complex, 4> e;  // 1 / q'(z_j), the partial fraction weights
  std::array<Matrix2, 4> M, N, H;
  std::array<double, 4> rho;
  for (int j = 0; j < 4; ++j) {
    Complex qp(1, 0);
    for (int i = 0; i < 4; ++i)
      if (i != j) qp *= punctures[j] - punctures[i];
    e[j] = Complex(1, 0) / qp;
    Complex xj = c.x[0] + c.x[1] * punctures[j];
    Complex yj = c.y[0] + c.y[1] * punctures[j];
    double nv = std::norm(xj) + std::norm(yj);
    if (nv < 1e-20)
      throw PotentialError(
          "higgs residue vanishes at puncture " + std::to_string(j + 1) +
          ": kernel section has a zero there (residue nonvanishing violated)");
    M[j] = rank_one_square_zero(xj, yj);
    N[j] = e[j] * M[j];
    rho[j] = boost::rational_cast<double>(branch[j].rho);
    // frame adapted to the kernel line: v = (x, -y), u its unit-det partner
    Vec2 v(xj, -yj), u(std::conj(yj) / nv, std::conj(xj) / nv);
    Matrix2 F, Finv;
    F << v(0), u(0), v(1), u(1);
    Finv << u(1), -u(0), -v(1), v(0);  // det F = 1
    H[j] = F * (Matrix2() << 1, 0, 0, -1).finished() * Finv;
  }

  // lambda^0 completion B_j = rho_j H_j + b_j M_j: the residue sum
  // constraint is three complex equations on b, kernel spanned by e
  Eigen::Matrix<Complex, 3, 4> K;
  Eigen::Vector3cd r;
  Matrix2 rhs = Matrix2::Zero();
  for (int j = 0; j < 4; ++j) rhs -= rho[j] * H[j];
  for (int j = 0; j < 4; ++j) K.col(j) << M[j](0, 0), M[j](0, 1), M[j](1, 0);
  r << rhs(0, 0), rhs(0, 1), rhs(1, 0);
  Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix<Complex, 3, 4>> cod(K);
  Eigen::Vector4cd bhat = cod.solve(r);
  double scale = K.norm() + r.norm();
  if ((K * bhat - r).norm() > 1e-8 * (1.0 + scale))
    throw PotentialError(
        "lambda^0 completion unsolvable: residue sum constraint is singular "
        "at this accessory point (degenerate kernel section)");

  FuchsianPotential out;
  out.params = params;
  out.punctures = punctures;
  out.branch = branch;
  out.traceless_twist = true;
  out.theta = theta;
  for (int j = 0; j < 4; ++j) {
    Complex bj = bhat(j) + c.t * e[j];
    Matrix2 B = rho[j] * H[j] + bj * M[j];
    LaurentMatrixLoop a;
    a.set_coefficient(-1, N[j]);
    a.set_coefficient(0, B);
    a.set_coefficient(1, c.sigma * N[j]);
    out.residues[static_cast<size_t>(j)] = a;
  }
  return out;
}

FuchsianPotential build_potential(const SurfaceParams& params,
                                  const Eigen::VectorXd& theta) {
  return build_potential(params, theta, default_punctures(), 1);
}

bool ValidationReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport validate(const FuchsianPotential& p, double tol) {
  ValidationReport rep;
  auto add = [&rep](const std::string& name, double residual, double tol_,
                    bool pass) {
    rep.checks.push_back({name, residual, tol_, pass});
  };

  double s = 1e-30;
  for (const auto& a : p.residues) s = std::max(s, a.sup_coefficient_norm());

  // residue sum vanishes coefficient-wise
  {
    LaurentMatrixLoop sum;
    for (const auto& a : p.residues) sum += a;
    double res = 0.0;
    for (const auto& [d, m] : sum.coefficients()) {
      (void)d;
      res = std::max(res, m.norm());
    }
    add("residue sum vanishes", res / s, tol, res / s < tol);
  }

  // traceless coefficients
  {
    double res = 0.0;
    for (const auto& a : p.residues)
      for (const auto& [d, m] : a.coefficients()) {
        (void)d;
        res = std::max(res, std::abs(m.trace()));
      }
    add("residues traceless", res / s, tol, res / s < tol);
  }

  // det A_j constant in lambda, equal to -rho_j^2
  {
    double res = 0.0;
    for (int j = 0; j < 4; ++j) {
      double rho = boost::rational_cast<double>(p.branch[j].rho);
      double s2 = std::max(s * s, rho * rho);
      auto det = det_series(p.residues[static_cast<size_t>(j)]);
      det[0] += rho * rho;
      for (const auto& [d, c] : det) {
        (void)d;
        res = std::max(res, std::abs(c) / s2);
      }
    }
    add("determinant pinned", res, tol, res < tol);
  }

  // lambda^{-1} coefficients square to zero
  {
    double res = 0.0;
    for (int j = 0; j < 4; ++j) {
      Matrix2 n = p.higgs_residue(j);
      res = std::max(res, (n * n).norm() / (s * s));
    }
    add("higgs residues nilpotent", res, tol, res < tol);
  }

  // and none of them vanishes; residual is the smallest relative norm
  {
    double mn = 1e300;
    for (int j = 0; j < 4; ++j)
      mn = std::min(mn, p.higgs_residue(j).norm() / s);
    add("higgs residues nonvanishing", mn, tol, mn >= tol);
  }

  // det of the higgs field vanishes as a rational function: all numerator
  // coefficients of det(q(z) Phi(z)) are zero
  {
    std::array<Poly, 4> ell;
    for (int j = 0; j < 4; ++j) {
      Poly pr = {Complex(1, 0)};
      for (int i = 0; i < 4; ++i)
        if (i != j) pr = poly_mul(pr, {-p.punctures[i], Complex(1, 0)});
      ell[static_cast<size_t>(j)] = pr;
    }
    std::array<Poly, 4> w{};  // entry polynomials of W = q * Phi, row major
    for (auto& q : w) q.assign(4, Complex(0, 0));
    for (int j = 0; j < 4; ++j) {
      Matrix2 n = p.higgs_residue(j);
      for (int d = 0; d < 4; ++d) {
        w[0][d] += n(0, 0) * ell[j][d];
        w[1][d] += n(0, 1) * ell[j][d];
        w[2][d] += n(1, 0) * ell[j][d];
        w[3][d] += n(1, 1) * ell[j][d];
      }
    }
    Poly detw = poly_mul(w[0], w[3]);
    Poly offd = poly_mul(w[1], w[2]);
    for (size_t i = 0; i < detw.size(); ++i) detw[i] -= offd[i];
    double sw = std::max({poly_sup(w[0]), poly_sup(w[1]), poly_sup(w[2]),
                          poly_sup(w[3]), 1e-30});
    double res = poly_sup(detw) / (sw * sw);
    add("higgs field squares to zero", res, tol, res < tol);
  }

  // parabolic line sits in the kernel of the higgs residue
  {
    double res = 0.0;
    for (int j = 0; j < 4; ++j) {
      double rho = boost::rational_cast<double>(p.branch[j].rho);
      Matrix2 b = p.residue_coefficient(j, 0);
      Matrix2 n = p.higgs_residue(j);
      Vec2 line = plus_eigenline(b, rho);
      double nn = std::max(n.norm(), 1e-30);
      res = std::max(res, (n * line).norm() / nn);
    }
    add("parabolic lines in higgs kernel", res, tol, res < tol);
  }

  return rep;
}

ParabolicData parabolic_data(const FuchsianPotential& p) {
  ParabolicData out;
  for (int j = 0; j < 4; ++j) {
    double rho = boost::rational_cast<double>(p.branch[j].rho);
    out[static_cast<size_t>(j)] = {p.branch[j].weight_lower,
                                   p.branch[j].weight_upper,
                                   plus_eigenline(p.residue_coefficient(j, 0), rho)};
  }
  return out;
}

Eigen::Vector2cd parabolic_line_at(const FuchsianPotential& p, int j,
                                   Complex lambda) {
  double rho = boost::rational_cast<double>(p.branch[static_cast<size_t>(j)].rho);
  return plus_eigenline(p.eval_residue(j, lambda), rho);
}

Rational pardeg_line(int line_degree, const std::array<bool, 4>& hits,
                     const BranchData& branch) {
  Rational acc(line_degree);
  for (int j = 0; j < 4; ++j)
    acc += hits[static_cast<size_t>(j)] ? branch[static_cast<size_t>(j)].weight_upper
                                        : branch[static_cast<size_t>(j)].weight_lower;
  return acc;
}

KernelSection kernel_section_of(const std::array<Matrix2, 4>& higgs_residues,
                                const std::array<Complex, 4>& punctures,
                                double tol) {
  double ns = 0.0;
  for (const auto& n : higgs_residues) ns = std::max(ns, n.norm());
  if (ns < 1e-14)
    throw PotentialError("higgs field vanishes identically: no kernel line");

  std::array<Poly, 4> ell;
  for (int j = 0; j < 4; ++j) {
    Poly pr = {Complex(1, 0)};
    for (int i = 0; i < 4; ++i)
      if (i != j) pr = poly_mul(pr, {-punctures[i], Complex(1, 0)});
    ell[static_cast<size_t>(j)] = pr;
  }
  // W(z) = q(z) Phi(z), cubic entries; rank one wherever Phi is square-zero
  std::array<Poly, 4> w{};
  for (auto& q : w) q.assign(4, Complex(0, 0));
  for (int j = 0; j < 4; ++j)
    for (int d = 0; d < 4; ++d) {
      const Matrix2& n = higgs_residues[static_cast<size_t>(j)];
      w[0][d] += n(0, 0) * ell[j][d];
      w[1][d] += n(0, 1) * ell[j][d];
      w[2][d] += n(1, 0) * ell[j][d];
      w[3][d] += n(1, 1) * ell[j][d];
    }
  double sw = std::max({poly_sup(w[0]), poly_sup(w[1]), poly_sup(w[2]),
                        poly_sup(w[3]), 1e-30});
  Poly detw = poly_mul(w[0], w[3]);
  Poly offd = poly_mul(w[1], w[2]);
  for (size_t i = 0; i < detw.size(); ++i) detw[i] -= offd[i];
  if (poly_sup(detw) > 1e-8 * sw * sw)
    throw PotentialError(
        "higgs field is not square-zero: kernel line undefined");

  // minimal-degree polynomial kernel by convolution nullspace: the first
  // degree whose Sylvester block is rank deficient carries the primitive
  // section; the adjugate columns are avoidable because their entries can
  // square up and lose their common root to conditioning
  const double rank_tol = std::max(tol, 1e-12) * 10.0;
  for (int m = 0; m <= 3; ++m) {
    const int rows = 2 * (4 + m);
    const int cols = 2 * (m + 1);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(rows, cols);
    for (int r = 0; r < 2; ++r)
      for (int e = 0; e < 2; ++e)
        for (int k = 0; k <= m; ++k)
          for (int d = 0; d < 4; ++d)
            a((4 + m) * r + k + d, (m + 1) * e + k) =
                w[static_cast<size_t>(2 * r + e)][static_cast<size_t>(d)] / sw;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(cols - 1) > rank_tol * sv(0)) continue;

    Eigen::VectorXcd null = svd.matrixV().col(cols - 1);
    Poly p0(null.data(), null.data() + m + 1);
    Poly p1(null.data() + m + 1, null.data() + cols);
    poly_trim(p0, 1e-11);
    poly_trim(p1, 1e-11);
    if (p0.empty() && p1.empty()) continue;
    if (p0.empty()) p0 = {Complex(0, 0)};
    if (p1.empty()) p1 = {Complex(0, 0)};

    // normalize by the top coefficient of the higher-degree entry
    Complex lead = (p0.size() >= p1.size()) ? p0.back() : p1.back();
    for (auto& c : p0) c /= lead;
    for (auto& c : p1) c /= lead;

    KernelSection out;
    out.entries[0] = p0;
    out.entries[1] = p1;
    out.degree = static_cast<int>(std::max(p0.size(), p1.size())) - 1;
    return out;
  }
  throw PotentialError("no polynomial kernel section within degree budget");
}

StabilityReport kernel_line_report(const FuchsianPotential& p, double tol) {
  std::array<Matrix2, 4> n;
  for (int j = 0; j < 4; ++j) n[static_cast<size_t>(j)] = p.higgs_residue(j);
  KernelSection sec = kernel_section_of(n, p.punctures, tol);
  ParabolicData par = parabolic_data(p);

  StabilityReport rep;
  rep.cleared_degree = sec.degree;
  rep.kernel_line_degree = -2 - sec.degree;
  rep.parabolic_degree = parabolic_degree_of(p.branch);
  for (int j = 0; j < 4; ++j) {
    Vec2 psi(poly_eval(sec.entries[0], p.punctures[static_cast<size_t>(j)]),
             poly_eval(sec.entries[1], p.punctures[static_cast<size_t>(j)]));
    const Vec2& line = par[static_cast<size_t>(j)].line;
    double cross = std::abs(psi(0) * line(1) - psi(1) * line(0));
    rep.hits[static_cast<size_t>(j)] =
        cross <= tol * std::max(psi.norm() * line.norm(), 1e-30);
  }
  rep.kernel_line_pardeg = pardeg_line(rep.kernel_line_degree, rep.hits, p.branch);
  rep.stable = rep.kernel_line_pardeg < Rational(0);
  return rep;
}

Matrix2 DpwForm::eval(Complex z, Complex lambda) const {
  Matrix2 acc = Matrix2::Zero();
  for (int j = 0; j < 4; ++j)
    acc += residues[static_cast<size_t>(j)].eval(lambda) /
           (z - punctures[static_cast<size_t>(j)]);
  return acc;
}

std::array<Matrix2, 4> DpwForm::residues_at(Complex lambda) const {
  std::array<Matrix2, 4> out;
  for (int j = 0; j < 4; ++j)
    out[static_cast<size_t>(j)] = residues[static_cast<size_t>(j)].eval(lambda);
  return out;
}

Matrix2 DpwForm::higgs(Complex z) const {
  Matrix2 acc = Matrix2::Zero();
  for (int j = 0; j < 4; ++j)
    acc += residues[static_cast<size_t>(j)].coefficient(-1) /
           (z - punctures[static_cast<size_t>(j)]);
  return acc;
}

DpwForm dpw_gauge_form(const FuchsianPotential& p) {
  return DpwForm{p.punctures, p.residues};
}

}  // namespace dpw
