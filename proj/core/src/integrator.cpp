#include "dpw/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace dpw {
namespace {

// Dormand-Prince 5(4) tableau
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// fifth minus fourth order weights, for the embedded error estimate
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

}  // namespace

Matrix2 PoleSystem::eval(Complex z) const {
  Matrix2 out = Matrix2::Zero();
  for (const auto& [pole, res] : poles) out += res / (z - pole);
  return out;
}

Matrix2 transport(const PoleSystem& sys, const PathPolyline& path,
                  const TransportOptions& opt) {
  if (path.vertices.size() < 2)
    throw TransportError("transport needs a path with at least one segment", -1);
  if (!(path.clearance > 0.0))
    throw TransportError("transport needs positive path clearance", -1);

  Matrix2 psi = Matrix2::Identity();
  long steps = 0;

  double total_len = 0.0;
  for (std::size_t m = 0; m + 1 < path.vertices.size(); ++m)
    total_len += std::abs(path.vertices[m + 1] - path.vertices[m]);
  if (total_len == 0.0) return psi;

  for (std::size_t m = 0; m + 1 < path.vertices.size(); ++m) {
    const Complex za = path.vertices[m];
    const Complex dz = path.vertices[m + 1] - za;
    const double seg_len = std::abs(dz);
    if (seg_len == 0.0) continue;
    // error budget per unit of s, so the accepted local errors sum to at
    // most tol across the whole path
    const double budget = opt.tol * seg_len / total_len;
    // s in [0,1] along the segment; rhs(Psi, s) = Psi eta(z(s)) dz
    auto rhs = [&](const Matrix2& y, double s) -> Matrix2 {
      return y * (sys.eval(za + s * dz) * dz);
    };

    const double h_cap =
        std::min(1.0, opt.clearance_fraction * path.clearance / seg_len);
    double s = 0.0;
    double h = h_cap;
    Matrix2 k1 = rhs(psi, 0.0);
    bool k1_fresh = true;

    while (s < 1.0) {
      h = std::min(h, 1.0 - s);
      if (h < opt.min_step)
        throw TransportError(
            "step size underflow on segment " + std::to_string(m) +
                ": path runs too close to a singular point",
            int(m));
      if (++steps > opt.max_steps)
        throw TransportError("step budget exhausted on segment " + std::to_string(m),
                             int(m));
      if (!k1_fresh) {
        k1 = rhs(psi, s);
        k1_fresh = true;
      }
      const Matrix2 k2 = rhs(psi + h * a21 * k1, s + c2 * h);
      const Matrix2 k3 = rhs(psi + h * (a31 * k1 + a32 * k2), s + c3 * h);
      const Matrix2 k4 = rhs(psi + h * (a41 * k1 + a42 * k2 + a43 * k3), s + c4 * h);
      const Matrix2 k5 = rhs(
          psi + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), s + c5 * h);
      const Matrix2 k6 = rhs(
          psi + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5),
          s + h);
      const Matrix2 ynew =
          psi + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Matrix2 k7 = rhs(ynew, s + h);
      const Matrix2 errm =
          h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const double scale = std::max(psi.norm(), 1.0);
      const double err = errm.norm() / scale;
      const double allowed = budget * h;
      if (err <= allowed) {
        psi = ynew;
        s += h;
        k1 = k7;  // first-same-as-last
        k1_fresh = true;
      } else {
        k1_fresh = true;  // psi unchanged, k1 still valid
      }
      // err/h scales like h^4 for the embedded pair, hence the 1/4 power
      const double grow =
          (err == 0.0) ? 5.0
                       : std::clamp(0.9 * std::pow(allowed / err, 0.25), 0.2, 5.0);
      h = std::min(h * grow, h_cap);
    }
  }
  return psi;
}

}  // namespace dpw
