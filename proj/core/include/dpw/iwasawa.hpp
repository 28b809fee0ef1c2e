#pragma once

#include <vector>

#include "dpw/loop.hpp"

namespace dpw {

struct IwasawaError : LoopError {
  IwasawaError(const std::string& what, std::vector<int> samples,
               std::vector<Complex> lambdas)
      : LoopError(what), bad_samples(std::move(samples)),
        bad_lambdas(std::move(lambdas)) {}
  explicit IwasawaError(const std::string& what) : LoopError(what) {}
  std::vector<int> bad_samples;
  std::vector<Complex> bad_lambdas;
};

/// Splitting a = unitary_part * positive_part with the unitary part taking
/// values in U(2) on the unit circle and the positive part extending
/// holomorphically to the disk, normalized so its value at 0 is upper
/// triangular with positive diagonal.
struct IwasawaFactors {
  LaurentMatrixLoop unitary_part;
  LaurentMatrixLoop positive_part;
  double factorization_defect = 0.0;  // max pointwise splitting residual on the grid
  double truncation_defect = 0.0;     // Fourier mass dropped by the degree cut
  int iterations = 0;
};

IwasawaFactors iwasawa_factorize(const LaurentMatrixLoop& a, int trunc, double tol);

/// Same factorization computed directly from values on the 2^m-point circle
/// grid; returns factor values on the grid. Used pointwise per surface
/// vertex where the loop is only known through samples.
struct CircleFactors {
  std::vector<Matrix2> unitary;
  std::vector<Matrix2> positive;
  double defect = 0.0;
  int iterations = 0;
};

CircleFactors factor_circle_samples(const std::vector<Matrix2>& values, double tol);

/// Entrywise discrete Fourier transform helpers for matrix-valued circle
/// samples; coefficient k of the result is the Laurent coefficient of degree
/// k for k < n/2 and degree k - n for k >= n/2.
std::vector<Matrix2> fourier_coefficients(const std::vector<Matrix2>& samples);
std::vector<Matrix2> fourier_samples(const std::vector<Matrix2>& coefficients);

}  // namespace dpw
