#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace dpw {

using Complex = std::complex<double>;
using Matrix2 = Eigen::Matrix2cd;

struct LoopError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finite Laurent series in the loop parameter with 2x2 complex matrix
/// coefficients. Absent degrees are zero; the map stays sorted by degree.
class LaurentMatrixLoop {
 public:
  LaurentMatrixLoop() = default;
  explicit LaurentMatrixLoop(std::map<int, Matrix2> coeffs);

  static LaurentMatrixLoop identity();
  static LaurentMatrixLoop constant(const Matrix2& m);
  static LaurentMatrixLoop monomial(int degree, const Matrix2& m);

  const std::map<int, Matrix2>& coefficients() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }
  int n_min() const;
  int n_max() const;

  Matrix2 coefficient(int degree) const;       // zero matrix if absent
  void set_coefficient(int degree, const Matrix2& m);

  Matrix2 eval(Complex lambda) const;          // throws on lambda = 0 with negative degrees

  LaurentMatrixLoop& operator+=(const LaurentMatrixLoop& rhs);
  LaurentMatrixLoop& operator-=(const LaurentMatrixLoop& rhs);
  LaurentMatrixLoop& operator*=(Complex scale);

  /// Largest coefficient entry magnitude; zero loop gives 0.
  double sup_coefficient_norm() const;

  /// Drops coefficients with norm below tol * sup_coefficient_norm().
  void prune(double tol = 0.0);

 private:
  std::map<int, Matrix2> coeffs_;
};

LaurentMatrixLoop operator+(LaurentMatrixLoop a, const LaurentMatrixLoop& b);
LaurentMatrixLoop operator-(LaurentMatrixLoop a, const LaurentMatrixLoop& b);
LaurentMatrixLoop operator*(Complex s, LaurentMatrixLoop a);

/// Cauchy product truncated to degrees [-trunc, trunc].
LaurentMatrixLoop loop_mul(const LaurentMatrixLoop& a, const LaurentMatrixLoop& b,
                           int trunc);

/// Untruncated Cauchy product (degree range adds).
LaurentMatrixLoop loop_mul_full(const LaurentMatrixLoop& a, const LaurentMatrixLoop& b);

/// Adjoint with respect to the unit circle: coefficient at n becomes the
/// conjugate transpose of the coefficient at -n. An involutive
/// anti-homomorphism; fixed points are loops hermitian on the circle.
LaurentMatrixLoop circle_adjoint(const LaurentMatrixLoop& a);

/// Equally spaced points exp(2 pi i m / count) on the unit circle.
struct CircleSampling {
  explicit CircleSampling(int count);
  int count() const { return static_cast<int>(points_.size()); }
  const std::vector<Complex>& points() const { return points_; }
  Complex point(int m) const { return points_.at(m); }

 private:
  std::vector<Complex> points_;
};

/// max over samples of ||a(lambda)^* a(lambda) - Id||.
double unitarity_defect(const LaurentMatrixLoop& a, const CircleSampling& s);

/// max over samples of ||a(lambda) - b(lambda)||.
double sample_distance(const LaurentMatrixLoop& a, const LaurentMatrixLoop& b,
                       const CircleSampling& s);

}  // namespace dpw
