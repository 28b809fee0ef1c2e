#include "dpw/iwasawa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <unsupported/Eigen/FFT>

namespace dpw {

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

Matrix2 inverse2(const Matrix2& m) {
  Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Matrix2 inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv / det;
}

// analytic projection on Fourier coefficients: keep positive degrees, halve
// the constant, drop negatives and the Nyquist bin
void project_analytic_half(std::vector<Matrix2>& coeff) {
  int n = static_cast<int>(coeff.size());
  coeff[0] *= 0.5;
  for (int k = n / 2; k < n; ++k) coeff[k].setZero();
}

void project_analytic(std::vector<Matrix2>& coeff) {
  int n = static_cast<int>(coeff.size());
  for (int k = n / 2; k < n; ++k) coeff[k].setZero();
}

}  // namespace

std::vector<Matrix2> fourier_coefficients(const std::vector<Matrix2>& samples) {
  int n = static_cast<int>(samples.size());
  Eigen::FFT<double> fft;
  std::vector<Matrix2> out(n, Matrix2::Zero());
  std::vector<Complex> time(n), freq(n);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      for (int m = 0; m < n; ++m) time[m] = samples[m](r, c);
      fft.fwd(freq, time);
      for (int k = 0; k < n; ++k) out[k](r, c) = freq[k] / static_cast<double>(n);
    }
  return out;
}

std::vector<Matrix2> fourier_samples(const std::vector<Matrix2>& coefficients) {
  int n = static_cast<int>(coefficients.size());
  Eigen::FFT<double> fft;
  std::vector<Matrix2> out(n, Matrix2::Zero());
  std::vector<Complex> time(n), freq(n);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      for (int k = 0; k < n; ++k) freq[k] = coefficients[k](r, c);
      fft.inv(time, freq);
      for (int m = 0; m < n; ++m) out[m](r, c) = time[m] * static_cast<double>(n);
    }
  return out;
}

CircleFactors factor_circle_samples(const std::vector<Matrix2>& values, double tol) {
  int n = static_cast<int>(values.size());
  if (n < 8 || (n & (n - 1)) != 0)
    throw IwasawaError("circle sample count must be a power of two, at least 8");

  // reject samples where the loop degenerates: the factorization blows up
  // exactly where the determinant crosses zero
  double top_sv = 0.0, bottom_rel = 1e-10;
  std::vector<double> min_sv(n);
  for (int m = 0; m < n; ++m) {
    Eigen::JacobiSVD<Matrix2> svd(values[m]);
    min_sv[m] = svd.singularValues()(1);
    top_sv = std::max(top_sv, svd.singularValues()(0));
  }
  std::vector<int> bad;
  for (int m = 0; m < n; ++m)
    if (min_sv[m] < bottom_rel * top_sv) bad.push_back(m);
  if (!bad.empty()) {
    std::vector<Complex> pts;
    for (int m : bad) pts.push_back(std::polar(1.0, 2.0 * M_PI * m / n));
    throw IwasawaError("loop is numerically singular at " +
                           std::to_string(bad.size()) + " circle samples",
                       bad, pts);
  }

  // hermitian squares G = a^* a pointwise; seek analytic X with X^* X = G
  std::vector<Matrix2> gram(n);
  for (int m = 0; m < n; ++m) gram[m] = values[m].adjoint() * values[m];

  // start from the Cholesky factor of the Fourier mean, the zeroth block of
  // the Gram-Toeplitz operator
  Matrix2 g0 = Matrix2::Zero();
  for (const auto& g : gram) g0 += g;
  g0 /= static_cast<double>(n);
  Eigen::LLT<Matrix2> llt(g0);
  if (llt.info() != Eigen::Success)
    throw IwasawaError("mean hermitian square is not positive definite");
  Matrix2 x0 = llt.matrixL().adjoint();  // upper factor, g0 = x0^* x0

  std::vector<Matrix2> x(n, x0);
  double defect = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  int it = 0, stagnant = 0;
  const int max_it = 80;
  const double target = std::max(tol, 1e-14);
  for (; it < max_it; ++it) {
    // residual S = X^{-*} G X^{-1} - I, hermitian on the circle
    std::vector<Matrix2> s(n);
    defect = 0.0;
    for (int m = 0; m < n; ++m) {
      Matrix2 xi = inverse2(x[m]);
      s[m] = xi.adjoint() * gram[m] * xi - Matrix2::Identity();
      defect = std::max(defect, s[m].norm());
    }
    if (defect < target) break;
    if (!std::isfinite(defect))
      throw IwasawaError("spectral factor iteration diverged");
    // the update cannot touch the Nyquist bin, so non-bandlimited data
    // leaves an aliasing floor; stop once the defect stops contracting
    if (defect > 0.5 * prev) {
      if (++stagnant >= 2) break;
    } else {
      stagnant = 0;
    }
    prev = defect;
    // X <- (I + P[S]) X with P the analytic half projection; quadratically
    // contracting once the residual is small
    auto coeff = fourier_coefficients(s);
    project_analytic_half(coeff);
    auto p = fourier_samples(coeff);
    for (int m = 0; m < n; ++m) x[m] = (Matrix2::Identity() + p[m]) * x[m];
    // re-anchor analyticity, aliasing drift is harmless but compounds
    auto xc = fourier_coefficients(x);
    project_analytic(xc);
    x = fourier_samples(xc);
  }
  if (!(defect < 1e-4)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", defect);
    throw IwasawaError(std::string("spectral factor iteration stalled at defect ") + buf);
  }

  // normalize: X(0) upper triangular with positive diagonal, achieved by a
  // constant unitary left factor (QR of the constant mode with phase fix)
  auto xc = fourier_coefficients(x);
  Matrix2 at0 = xc[0];
  Eigen::HouseholderQR<Matrix2> qr(at0);
  Matrix2 q = qr.householderQ();
  Matrix2 r = q.adjoint() * at0;
  Matrix2 phase = Matrix2::Identity();
  for (int i = 0; i < 2; ++i) {
    Complex d = r(i, i);
    if (std::abs(d) > 0.0) phase(i, i) = std::conj(d) / std::abs(d);
  }
  Matrix2 u0 = q * phase.adjoint();  // x(0) = u0 * (phase * r), second factor upper positive
  for (int m = 0; m < n; ++m) x[m] = u0.adjoint() * x[m];

  CircleFactors out;
  out.positive = std::move(x);
  out.unitary.resize(n);
  double final_defect = 0.0;
  for (int m = 0; m < n; ++m) {
    out.unitary[m] = values[m] * inverse2(out.positive[m]);
    Matrix2 u = out.unitary[m];
    final_defect = std::max(final_defect,
                            (u.adjoint() * u - Matrix2::Identity()).norm());
  }
  out.defect = final_defect;
  out.iterations = it;
  return out;
}

IwasawaFactors iwasawa_factorize(const LaurentMatrixLoop& a, int trunc, double tol) {
  if (a.empty()) throw IwasawaError("cannot factorize the zero loop");
  int span = std::max(std::abs(a.n_min()), std::abs(a.n_max()));
  int n = next_pow2(std::max(128, 8 * (span + trunc + 1)));

  // the loop is exact, so the grid can refine past any aliasing floor
  CircleFactors cf;
  for (;;) {
    std::vector<Matrix2> samples(n);
    for (int m = 0; m < n; ++m)
      samples[m] = a.eval(std::polar(1.0, 2.0 * M_PI * m / n));
    cf = factor_circle_samples(samples, tol);
    if (cf.defect <= std::max(tol, 1e-12) || n >= 4096) break;
    n *= 2;
  }

  auto ucoeff = fourier_coefficients(cf.unitary);
  auto pcoeff = fourier_coefficients(cf.positive);

  IwasawaFactors out;
  out.factorization_defect = cf.defect;
  out.iterations = cf.iterations;
  double dropped = 0.0;
  for (int k = 0; k < n; ++k) {
    int deg = (k < n / 2) ? k : k - n;
    double umass = ucoeff[k].norm();
    if (deg >= -trunc && deg <= trunc)
      out.unitary_part.set_coefficient(deg, ucoeff[k]);
    else
      dropped = std::max(dropped, umass);
    double pmass = pcoeff[k].norm();
    if (deg >= 0 && deg <= trunc)
      out.positive_part.set_coefficient(deg, pcoeff[k]);
    else if (deg > trunc)
      dropped = std::max(dropped, pmass);
  }
  out.truncation_defect = dropped;
  return out;
}

}  // namespace dpw
