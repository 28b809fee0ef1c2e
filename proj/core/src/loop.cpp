#include "dpw/loop.hpp"

#include <cmath>

namespace dpw {

namespace {
bool is_zero(const Matrix2& m) { return m.cwiseAbs().maxCoeff() == 0.0; }

// exact for n == 0 even at base 0, unlike std::pow on complexes
Complex int_pow(Complex base, int n) {
  Complex acc(1.0, 0.0);
  for (int i = 0; i < n; ++i) acc *= base;
  return acc;
}
}  // namespace

LaurentMatrixLoop::LaurentMatrixLoop(std::map<int, Matrix2> coeffs)
    : coeffs_(std::move(coeffs)) {
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    if (is_zero(it->second))
      it = coeffs_.erase(it);
    else
      ++it;
  }
}

LaurentMatrixLoop LaurentMatrixLoop::identity() {
  return constant(Matrix2::Identity());
}

LaurentMatrixLoop LaurentMatrixLoop::constant(const Matrix2& m) {
  return monomial(0, m);
}

LaurentMatrixLoop LaurentMatrixLoop::monomial(int degree, const Matrix2& m) {
  LaurentMatrixLoop l;
  l.set_coefficient(degree, m);
  return l;
}

int LaurentMatrixLoop::n_min() const {
  if (coeffs_.empty()) throw LoopError("degree range of the zero loop");
  return coeffs_.begin()->first;
}

int LaurentMatrixLoop::n_max() const {
  if (coeffs_.empty()) throw LoopError("degree range of the zero loop");
  return coeffs_.rbegin()->first;
}

Matrix2 LaurentMatrixLoop::coefficient(int degree) const {
  auto it = coeffs_.find(degree);
  return it == coeffs_.end() ? Matrix2::Zero().eval() : it->second;
}

void LaurentMatrixLoop::set_coefficient(int degree, const Matrix2& m) {
  if (is_zero(m))
    coeffs_.erase(degree);
  else
    coeffs_[degree] = m;
}

Matrix2 LaurentMatrixLoop::eval(Complex lambda) const {
  if (coeffs_.empty()) return Matrix2::Zero();
  if (lambda == Complex(0.0, 0.0) && n_min() < 0)
    throw LoopError("loop with negative degrees evaluated at 0");
  // direct powers; degree ranges stay small enough that Horner buys nothing
  Matrix2 acc = Matrix2::Zero();
  Complex inv = (n_min() < 0) ? Complex(1.0, 0.0) / lambda : Complex(0.0, 0.0);
  for (const auto& [n, c] : coeffs_) {
    if (n < 0)
      acc += c * int_pow(inv, -n);
    else
      acc += c * int_pow(lambda, n);
  }
  return acc;
}

LaurentMatrixLoop& LaurentMatrixLoop::operator+=(const LaurentMatrixLoop& rhs) {
  for (const auto& [n, c] : rhs.coeffs_) set_coefficient(n, coefficient(n) + c);
  return *this;
}

LaurentMatrixLoop& LaurentMatrixLoop::operator-=(const LaurentMatrixLoop& rhs) {
  for (const auto& [n, c] : rhs.coeffs_) set_coefficient(n, coefficient(n) - c);
  return *this;
}

LaurentMatrixLoop& LaurentMatrixLoop::operator*=(Complex scale) {
  if (scale == Complex(0.0, 0.0)) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [n, c] : coeffs_) c *= scale;
  return *this;
}

double LaurentMatrixLoop::sup_coefficient_norm() const {
  double s = 0.0;
  for (const auto& [n, c] : coeffs_) s = std::max(s, c.cwiseAbs().maxCoeff());
  return s;
}

void LaurentMatrixLoop::prune(double tol) {
  double cut = tol * sup_coefficient_norm();
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    if (it->second.cwiseAbs().maxCoeff() <= cut)
      it = coeffs_.erase(it);
    else
      ++it;
  }
}

LaurentMatrixLoop operator+(LaurentMatrixLoop a, const LaurentMatrixLoop& b) {
  a += b;
  return a;
}

LaurentMatrixLoop operator-(LaurentMatrixLoop a, const LaurentMatrixLoop& b) {
  a -= b;
  return a;
}

LaurentMatrixLoop operator*(Complex s, LaurentMatrixLoop a) {
  a *= s;
  return a;
}

LaurentMatrixLoop loop_mul(const LaurentMatrixLoop& a, const LaurentMatrixLoop& b,
                           int trunc) {
  if (trunc < 0) throw LoopError("negative truncation");
  LaurentMatrixLoop out;
  for (const auto& [n, ca] : a.coefficients()) {
    for (const auto& [m, cb] : b.coefficients()) {
      int d = n + m;
      if (d < -trunc || d > trunc) continue;
      out.set_coefficient(d, out.coefficient(d) + ca * cb);
    }
  }
  return out;
}

LaurentMatrixLoop loop_mul_full(const LaurentMatrixLoop& a, const LaurentMatrixLoop& b) {
  LaurentMatrixLoop out;
  for (const auto& [n, ca] : a.coefficients())
    for (const auto& [m, cb] : b.coefficients())
      out.set_coefficient(n + m, out.coefficient(n + m) + ca * cb);
  return out;
}

LaurentMatrixLoop circle_adjoint(const LaurentMatrixLoop& a) {
  LaurentMatrixLoop out;
  for (const auto& [n, c] : a.coefficients())
    out.set_coefficient(-n, c.adjoint());
  return out;
}

CircleSampling::CircleSampling(int count) {
  if (count < 4) throw LoopError("circle sampling needs at least 4 points");
  points_.reserve(count);
  const double step = 2.0 * M_PI / count;
  for (int m = 0; m < count; ++m)
    points_.push_back(std::polar(1.0, step * m));
}

double unitarity_defect(const LaurentMatrixLoop& a, const CircleSampling& s) {
  double worst = 0.0;
  for (Complex l : s.points()) {
    Matrix2 v = a.eval(l);
    worst = std::max(worst, (v.adjoint() * v - Matrix2::Identity()).norm());
  }
  return worst;
}

double sample_distance(const LaurentMatrixLoop& a, const LaurentMatrixLoop& b,
                       const CircleSampling& s) {
  double worst = 0.0;
  for (Complex l : s.points())
    worst = std::max(worst, (a.eval(l) - b.eval(l)).norm());
  return worst;
}

}  // namespace dpw
