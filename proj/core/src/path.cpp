#include "dpw/path.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dpw {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string segment_label(int m) { return "segment " + std::to_string(m); }

// angle of z relative to ref, normalized to [0, 2 pi)
double relative_angle(Complex z, Complex ref) {
  double a = std::arg(z) - std::arg(ref);
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

void append_path(std::vector<Complex>& out, const std::vector<Complex>& piece) {
  for (const Complex& v : piece) {
    if (!out.empty() && out.back() == v) continue;
    out.push_back(v);
  }
}

}  // namespace

bool PathPolyline::closed() const {
  if (vertices.size() < 2) return false;
  double scale = std::abs(vertices.front()) + std::abs(vertices.back()) + 1.0;
  return std::abs(vertices.front() - vertices.back()) <= 1e-12 * scale;
}

double segment_point_distance(Complex a, Complex b, Complex p) {
  const Complex d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p - a) * std::conj(d)).real() / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

double polyline_clearance(const std::vector<Complex>& vertices,
                          const std::vector<Complex>& holes) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m + 1 < vertices.size(); ++m)
    for (const Complex& h : holes)
      best = std::min(best, segment_point_distance(vertices[m], vertices[m + 1], h));
  return best;
}

PathPolyline make_polyline(std::vector<Complex> vertices,
                           const std::vector<Complex>& holes) {
  if (vertices.size() < 2) throw PathError("path needs at least two vertices");
  for (std::size_t m = 0; m + 1 < vertices.size(); ++m)
    if (vertices[m] == vertices[m + 1])
      throw PathError("consecutive duplicate vertex on " + segment_label(int(m)), int(m));
  PathPolyline p;
  p.vertices = std::move(vertices);
  p.clearance = polyline_clearance(p.vertices, holes);
  if (!(p.clearance > 0.0))
    throw PathError("path touches a singular point, clearance is zero");
  return p;
}

PathPolyline reversed(const PathPolyline& p) {
  PathPolyline out = p;
  std::reverse(out.vertices.begin(), out.vertices.end());
  return out;
}

PathPolyline joined(const PathPolyline& a, const PathPolyline& b) {
  if (a.vertices.empty() || b.vertices.empty())
    throw PathError("cannot join an empty path");
  if (a.end() != b.start())
    throw PathError("join point mismatch: paths do not share an endpoint");
  PathPolyline out;
  out.vertices = a.vertices;
  append_path(out.vertices, b.vertices);
  out.clearance = std::min(a.clearance, b.clearance);
  return out;
}

PathPolyline circle_polygon(Complex center, double radius, int segments,
                            double phase, const std::vector<Complex>& holes) {
  if (segments < 3) throw PathError("circle polygon needs at least 3 segments");
  if (!(radius > 0.0)) throw PathError("circle polygon needs positive radius");
  std::vector<Complex> v;
  v.reserve(segments + 1);
  for (int n = 0; n <= segments; ++n) {
    double t = phase + kTwoPi * double(n) / double(segments);
    v.push_back(center + radius * Complex(std::cos(t), std::sin(t)));
  }
  v.back() = v.front();  // close exactly
  return make_polyline(std::move(v), holes);
}

int winding_number(const PathPolyline& path, Complex around) {
  if (!path.closed()) throw PathError("winding number needs a closed path");
  double total = 0.0;
  for (std::size_t m = 0; m + 1 < path.vertices.size(); ++m) {
    Complex a = path.vertices[m] - around;
    Complex b = path.vertices[m + 1] - around;
    if (a == Complex(0, 0) || b == Complex(0, 0))
      throw PathError("winding number undefined on the path itself");
    total += std::arg(b / a);
  }
  return int(std::lround(total / kTwoPi));
}

PetalSystem standard_petals(const std::array<Complex, 4>& punctures,
                            Complex basepoint, int circle_segments) {
  if (circle_segments < 8) throw PathError("petal circle needs at least 8 segments");
  const double big_r = std::abs(basepoint);
  if (!(big_r > 0.0)) throw PathError("basepoint at the origin is not usable");

  double min_pair = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      min_pair = std::min(min_pair, std::abs(punctures[i] - punctures[j]));
  if (!(min_pair > 0.0)) throw PathError("coincident punctures");
  const double r = 0.5 * min_pair;

  for (int j = 0; j < 4; ++j) {
    if (punctures[j] == Complex(0, 0))
      throw PathError("puncture at the origin breaks the radial petal layout");
    if (std::abs(punctures[j]) + r >= big_r)
      throw PathError("puncture " + std::to_string(j + 1) +
                      " too close to the basepoint circle");
  }

  PetalSystem sys;
  sys.radius = r;
  sys.basepoint = basepoint;

  std::array<double, 4> angle{};
  for (int j = 0; j < 4; ++j) angle[j] = relative_angle(punctures[j], basepoint);

  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (angle[a] != angle[b]) return angle[a] < angle[b];
    return a < b;
  });
  for (int m = 0; m < 4; ++m) {
    sys.ccw_index[m] = order[m];
    sys.ccw_position[order[m]] = m;
  }

  const std::vector<Complex> holes(punctures.begin(), punctures.end());
  const double base_arg = std::arg(basepoint);

  for (int j = 0; j < 4; ++j) {
    const double span = angle[j];
    const double ray_arg = std::arg(punctures[j]);
    std::vector<Complex> way;  // basepoint to the small circle
    way.push_back(basepoint);
    const int arc_steps = std::max(1, int(std::ceil(span / (kTwoPi / 64.0))));
    for (int n = 1; n <= arc_steps; ++n) {
      double t = base_arg + span * double(n) / double(arc_steps);
      way.push_back(big_r * Complex(std::cos(t), std::sin(t)));
    }
    way.push_back((std::abs(punctures[j]) + r) *
                  Complex(std::cos(ray_arg), std::sin(ray_arg)));

    std::vector<Complex> v;
    append_path(v, way);
    for (int n = 1; n <= circle_segments; ++n) {
      double t = ray_arg + kTwoPi * double(n) / double(circle_segments);
      v.push_back(punctures[j] + r * Complex(std::cos(t), std::sin(t)));
    }
    v.back() = way.back();  // close the polygon exactly on the ray point
    std::reverse(way.begin(), way.end());
    append_path(v, way);

    PathPolyline petal = make_polyline(std::move(v), holes);
    if (petal.clearance < 0.25 * r)
      throw PathError("petal " + std::to_string(j + 1) +
                      " passes too close to another puncture");
    sys.petals[j] = std::move(petal);
  }
  return sys;
}

std::array<PathPolyline, 4> standard_loops(
    const std::array<Complex, 4>& punctures, Complex basepoint,
    int circle_segments) {
  const PetalSystem sys = standard_petals(punctures, basepoint, circle_segments);
  // the petals compose to a contractible loop in descending ccw order;
  // bubble sort into puncture-index order with the product-preserving
  // rewrite X Y -> (X Y X^{-1}) X, mirrored here on the paths themselves
  std::array<int, 4> order;
  std::array<PathPolyline, 4> factor;
  for (int m = 0; m < 4; ++m) {
    order[m] = sys.ccw_index[3 - m];
    factor[m] = sys.petals[order[m]];
  }
  for (int pass = 0; pass < 3; ++pass)
    for (int m = 0; m < 3; ++m)
      if (order[m] > order[m + 1]) {
        const PathPolyline x = factor[m];
        factor[m] = joined(joined(x, factor[m + 1]), reversed(x));
        factor[m + 1] = x;
        std::swap(order[m], order[m + 1]);
      }
  std::array<PathPolyline, 4> loops;
  for (int j = 0; j < 4; ++j) loops[j] = std::move(factor[j]);
  return loops;
}

}  // namespace dpw
