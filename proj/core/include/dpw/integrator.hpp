#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpw/loop.hpp"
#include "dpw/path.hpp"

namespace dpw {

struct TransportError : std::runtime_error {
  TransportError(const std::string& what, int segment)
      : std::runtime_error(what), segment(segment) {}
  int segment;
};

/// Meromorphic sl2 connection form with simple poles: sum_j A_j / (z - z_j).
struct PoleSystem {
  std::vector<std::pair<Complex, Matrix2>> poles;
  Matrix2 eval(Complex z) const;
};

struct TransportOptions {
  double tol = 1e-10;
  double clearance_fraction = 0.25;  // max z-step as a fraction of clearance
  double min_step = 1e-14;           // in segment parameter units
  long max_steps = 4000000;
};

/// Parallel transport of the frame along the polyline: solves dPsi = Psi eta
/// with Psi = Id at the start, fifth order adaptive embedded Runge-Kutta.
/// Local error per step is controlled relative to max(|Psi|, 1).
Matrix2 transport(const PoleSystem& sys, const PathPolyline& path,
                  const TransportOptions& opt = {});

}  // namespace dpw
