#include "dpw/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "dpw/integrator.hpp"
#include "dpw/iwasawa.hpp"
#include "dpw/path.hpp"
#include "dpw/solver.hpp"

namespace dpw {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double v) {
  v = std::fmod(v, kTwoPi);
  if (v < 0) v += kTwoPi;
  return v;
}

double wrap_signed(double v) {
  v = std::fmod(v, kTwoPi);
  if (v <= -std::numbers::pi) v += kTwoPi;
  if (v > std::numbers::pi) v -= kTwoPi;
  return v;
}

// knot vector: keeps the mandatory values, fills gaps to at most max_gap
std::vector<double> fill_knots(std::vector<double> knots, double max_gap) {
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [](double a, double b) { return b - a < 1e-9; }),
              knots.end());
  std::vector<double> out;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    out.push_back(knots[i]);
    if (i + 1 == knots.size()) break;
    const double gap = knots[i + 1] - knots[i];
    const int extra = int(std::ceil(gap / max_gap)) - 1;
    for (int t = 1; t <= extra; ++t)
      out.push_back(knots[i] + gap * double(t) / (extra + 1));
  }
  return out;
}

std::vector<double> fill_knots_cyclic(std::vector<double> vals,
                                      double max_gap) {
  for (double& v : vals) v = wrap_angle(v);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end(),
                         [](double a, double b) { return b - a < 1e-9; }),
             vals.end());
  if (vals.size() > 1 && vals.front() < 1e-9 && vals.back() > kTwoPi - 1e-9)
    vals.pop_back();
  std::vector<double> out;
  const std::size_t n = vals.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(vals[i]);
    const double next = (i + 1 < n) ? vals[i + 1] : vals[0] + kTwoPi;
    const double gap = next - vals[i];
    const int extra = int(std::ceil(gap / max_gap)) - 1;
    for (int t = 1; t <= extra; ++t)
      out.push_back(vals[i] + gap * double(t) / (extra + 1));
  }
  return out;
}

void add_graded(std::vector<double>& knots, double center, double clearance,
                double grading, int layers, double coarse) {
  double d = clearance;
  for (int m = 0; m < layers && d < 1.5 * coarse; ++m) {
    knots.push_back(center - d);
    knots.push_back(center + d);
    d /= grading;
  }
}

int knot_index(const std::vector<double>& knots, double value) {
  int best = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const double d = std::abs(knots[i] - value);
    if (d < dist) {
      dist = d;
      best = int(i);
    }
  }
  return dist < 1e-8 ? best : -1;
}

// m with <m, d> = det of the column matrix [a b c d]
Eigen::Vector4d cross4(const Eigen::Vector4d& a, const Eigen::Vector4d& b,
                       const Eigen::Vector4d& c) {
  Eigen::Vector4d m;
  for (int l = 0; l < 4; ++l) {
    Eigen::Matrix4d full = Eigen::Matrix4d::Zero();
    full.col(0) = a;
    full.col(1) = b;
    full.col(2) = c;
    full(l, 3) = 1.0;
    m[l] = full.determinant();
  }
  return m;
}

// nearest special unitary matrix, via polar decomposition
Matrix2 project_su2(const Matrix2& m) {
  Eigen::JacobiSVD<Matrix2> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix2 u = svd.matrixU() * svd.matrixV().adjoint();
  return u / std::sqrt(u.determinant());
}

// trigonometric interpolation weights: value(lambda) = sum_m w_m sample_m,
// exact on Laurent loops of degree within [-n/2, n/2)
std::vector<Complex> interp_weights(int n, Complex lambda) {
  std::vector<Complex> w(n);
  for (int m = 0; m < n; ++m) {
    const double t = kTwoPi * double(m) / n;
    const Complex mu = lambda * std::polar(1.0, -t);
    if (std::abs(mu - Complex(1, 0)) < 1e-13) {
      w[m] = Complex(1, 0);
      continue;
    }
    Complex num = Complex(0, 0);
    Complex p = std::pow(mu, -n / 2);
    for (int k = -n / 2; k < n / 2; ++k) {
      num += p;
      p *= mu;
    }
    w[m] = num / double(n);
  }
  return w;
}

std::string format_complex(Complex z) {
  std::ostringstream os;
  os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag())
     << "i";
  return os.str();
}

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) {
    for (int i = 0; i < n; ++i) p[i] = i;
  }
  int find(int a) {
    while (p[a] != a) a = p[a] = p[p[a]];
    return a;
  }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

}  // namespace

FundamentalDomainGrid build_domain_grid(const std::array<Complex, 4>& punctures,
                                        Complex basepoint,
                                        const GridOptions& opt) {
  if (!(opt.clearance > 0) || !(opt.grading > 0) || !(opt.grading < 1))
    throw SurfaceError("grid options need positive clearance and grading in (0,1)");
  if (opt.angular < 8 || opt.radial < 1 || opt.graded_layers < 1)
    throw SurfaceError("grid options too coarse");
  for (int j = 0; j < 4; ++j) {
    if (std::abs(punctures[j]) < 1e-9)
      throw SurfaceError("puncture at the origin is not supported by the log-polar grid");
    for (int i = 0; i < j; ++i)
      if (std::abs(punctures[i] - punctures[j]) < 1e-9)
        throw SurfaceError("coincident punctures");
    if (std::abs(basepoint - punctures[j]) < 1e-9)
      throw SurfaceError("basepoint collides with a puncture");
  }
  if (!(opt.far_radius > 4 * std::abs(basepoint)))
    throw SurfaceError("far_radius too small");

  std::array<double, 4> pu, pv;
  const double coarse = kTwoPi / opt.angular;
  std::vector<double> uk, vk;
  for (int j = 0; j < 4; ++j) {
    pu[j] = std::log(std::abs(punctures[j]));
    pv[j] = wrap_angle(std::arg(punctures[j]));
    uk.push_back(pu[j]);
    vk.push_back(pv[j]);
    add_graded(uk, pu[j], opt.clearance, opt.grading, opt.graded_layers, coarse);
    add_graded(vk, pv[j], opt.clearance, opt.grading, opt.graded_layers, coarse);
  }
  const double ub = std::log(std::abs(basepoint));
  uk.push_back(ub);
  vk.push_back(wrap_angle(std::arg(basepoint)));
  const double ulo =
      *std::min_element(uk.begin(), uk.end()) - opt.radial * coarse;
  const double uhi =
      *std::max_element(uk.begin(), uk.end()) + opt.radial * coarse;
  uk.push_back(ulo);
  uk.push_back(uhi);

  const std::vector<double> uu = fill_knots(uk, coarse);
  const std::vector<double> vv = fill_knots_cyclic(vk, coarse);
  const int nu = int(uu.size());
  const int nv = int(vv.size());
  auto nid = [&](int iu, int iv) { return iu * nv + ((iv % nv) + nv) % nv; };

  std::array<int, 4> piu, piv;
  for (int j = 0; j < 4; ++j) {
    piu[j] = knot_index(uu, pu[j]);
    piv[j] = knot_index(vv, pv[j]);
    if (piu[j] < 0 || piv[j] < 0)
      throw SurfaceError("puncture knot lost during grid assembly");
  }
  std::vector<char> removed(std::size_t(nu) * nv, 0);
  for (int j = 0; j < 4; ++j) removed[nid(piu[j], piv[j])] = 1;

  // slits chain the punctures in ccw order: a row arc at the source radius,
  // then a radial run at the target angle
  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return pv[a] < pv[b]; });
  for (int c = 0; c < 3; ++c)
    if (std::abs(pv[order[c]] - pv[order[c + 1]]) < 1e-9)
      throw SurfaceError("cut construction needs distinct puncture angles");

  struct SlitNode {
    int cut = -1;
    int prev_iu = 0, prev_iv = 0;
    int next_iu = 0, next_iv = 0;
    int minus_id = -1, plus_id = -1;
  };
  std::map<int, SlitNode> slit_nodes;
  for (int c = 0; c < 3; ++c) {
    const int a = order[c], b = order[c + 1];
    std::vector<std::array<int, 2>> nodes;
    nodes.push_back({piu[a], piv[a]});
    for (int iv = piv[a]; iv != piv[b]; iv = (iv + 1) % nv)
      nodes.push_back({piu[a], (iv + 1) % nv});
    const int step = piu[b] > piu[a] ? 1 : -1;
    for (int iu = piu[a]; iu != piu[b]; iu += step)
      nodes.push_back({iu + step, piv[b]});
    for (std::size_t t = 0; t + 1 < nodes.size(); ++t)
      if (nodes[t] == nodes[t + 1]) {
        nodes.erase(nodes.begin() + long(t + 1));
        --t;
      }
    for (std::size_t t = 1; t + 1 < nodes.size(); ++t) {
      const int key = nid(nodes[t][0], nodes[t][1]);
      if (removed[key]) throw SurfaceError("cut path hits a puncture node");
      if (slit_nodes.count(key)) throw SurfaceError("cut paths overlap");
      SlitNode s;
      s.cut = c;
      s.prev_iu = nodes[t - 1][0];
      s.prev_iv = nodes[t - 1][1];
      s.next_iu = nodes[t + 1][0];
      s.next_iv = nodes[t + 1][1];
      slit_nodes[key] = s;
    }
    if (nodes.size() < 3)
      throw SurfaceError("cut with no interior vertex; refine the grid");
  }

  FundamentalDomainGrid grid;
  grid.punctures = punctures;
  std::vector<int> main_id(std::size_t(nu) * nv, -1);
  auto sample_at = [&](int iu, int iv) {
    return std::polar(std::exp(uu[iu]), vv[iv]);
  };
  for (int iu = 0; iu < nu; ++iu)
    for (int iv = 0; iv < nv; ++iv) {
      const int key = nid(iu, iv);
      if (removed[key]) continue;
      auto it = slit_nodes.find(key);
      if (it != slit_nodes.end()) {
        it->second.minus_id = int(grid.samples.size());
        grid.samples.push_back(sample_at(iu, iv));
        it->second.plus_id = int(grid.samples.size());
        grid.samples.push_back(sample_at(iu, iv));
      } else {
        main_id[key] = int(grid.samples.size());
        grid.samples.push_back(sample_at(iu, iv));
      }
    }
  for (const auto& [key, s] : slit_nodes)
    grid.slits.push_back({s.minus_id, s.plus_id, s.cut});

  // resolves a cell corner to a vertex; slit corners pick the bank by the
  // angular sector between the outgoing and incoming cut directions
  auto resolve = [&](int iu, int iv, double cu, double cv) -> int {
    const int key = nid(iu, iv);
    if (removed[key]) return -1;
    auto it = slit_nodes.find(key);
    if (it == slit_nodes.end()) return main_id[key];
    const SlitNode& s = it->second;
    const double a_prev = std::atan2(wrap_signed(vv[s.prev_iv] - vv[iv]),
                                     uu[s.prev_iu] - uu[iu]);
    const double a_next = std::atan2(wrap_signed(vv[s.next_iv] - vv[iv]),
                                     uu[s.next_iu] - uu[iu]);
    const double beta =
        std::atan2(wrap_signed(cv - vv[iv]), cu - uu[iu]);
    const double span = wrap_angle(a_prev - a_next);
    const double at = wrap_angle(beta - a_next);
    return at < span ? s.plus_id : s.minus_id;  // plus bank left of the cut
  };

  for (int iu = 0; iu + 1 < nu; ++iu)
    for (int iv = 0; iv < nv; ++iv) {
      const int jv = (iv + 1) % nv;
      const double cu = 0.5 * (uu[iu] + uu[iu + 1]);
      double dv = vv[jv] - vv[iv];
      if (dv <= 0) dv += kTwoPi;
      const double cv = vv[iv] + 0.5 * dv;
      const int c00 = resolve(iu, iv, cu, cv);
      const int c10 = resolve(iu + 1, iv, cu, cv);
      const int c11 = resolve(iu + 1, jv, cu, cv);
      const int c01 = resolve(iu, jv, cu, cv);
      if (c00 < 0 || c10 < 0 || c11 < 0 || c01 < 0) continue;
      grid.triangles.push_back({c00, c10, c11});
      grid.triangles.push_back({c00, c11, c01});
    }

  const int pole_id = int(grid.samples.size());
  grid.samples.push_back(Complex(0, 0));
  const int far_id = int(grid.samples.size());
  grid.samples.push_back(Complex(opt.far_radius, 0));
  for (int iv = 0; iv < nv; ++iv) {
    const int jv = (iv + 1) % nv;
    const int a = main_id[nid(0, iv)];
    const int b = main_id[nid(0, jv)];
    const int c = main_id[nid(nu - 1, iv)];
    const int d = main_id[nid(nu - 1, jv)];
    if (a < 0 || b < 0 || c < 0 || d < 0)
      throw SurfaceError("cap ring touches a cut or puncture; enlarge radial margin");
    grid.triangles.push_back({pole_id, a, b});
    grid.triangles.push_back({far_id, d, c});
  }

  const int biu = knot_index(uu, ub);
  const int biv = knot_index(vv, wrap_angle(std::arg(basepoint)));
  if (biu < 0 || biv < 0)
    throw SurfaceError("basepoint knot lost during grid assembly");
  const int bkey = nid(biu, biv);
  if (removed[bkey] || slit_nodes.count(bkey) || main_id[bkey] < 0)
    throw SurfaceError("basepoint lies on a cut or puncture");
  grid.basepoint_vertex = main_id[bkey];
  grid.samples[grid.basepoint_vertex] = basepoint;

  double clear = std::numeric_limits<double>::infinity();
  for (const Complex& z : grid.samples)
    for (int j = 0; j < 4; ++j)
      clear = std::min(clear, std::abs(z - punctures[j]));
  grid.puncture_clearance = clear;
  return grid;
}

Eigen::Vector4d quaternion_of(const Matrix2& f) {
  Eigen::Vector4d q;
  q[0] = 0.5 * (f(0, 0) + f(1, 1)).real();
  q[1] = 0.5 * (f(0, 1) + f(1, 0)).imag();
  q[2] = 0.5 * (f(0, 1) - f(1, 0)).real();
  q[3] = 0.5 * (f(0, 0) - f(1, 1)).imag();
  return q;
}

Matrix2 matrix_of(const Eigen::Vector4d& q) {
  Matrix2 f;
  f << Complex(q[0], q[3]), Complex(q[2], q[1]), Complex(-q[2], q[1]),
      Complex(q[0], -q[3]);
  return f;
}

ReconstructionResult reconstruct(const FuchsianPotential& p, Complex lambda1,
                                 Complex lambda2,
                                 const FundamentalDomainGrid& grid,
                                 const ReconstructOptions& options) {
  const ValidationReport vr = validate(p);
  if (!vr.all_pass()) {
    std::string names;
    for (const auto& c : vr.checks)
      if (!c.pass) names += (names.empty() ? "" : ", ") + c.name;
    throw SurfaceError("potential failed validation: " + names);
  }
  if (std::abs(std::abs(lambda1) - 1) > 1e-12 ||
      std::abs(std::abs(lambda2) - 1) > 1e-12)
    throw SurfaceError("evaluation points must lie on the unit circle");
  if (std::abs(lambda1 - lambda2) < 1e-12)
    throw SurfaceError("degenerate immersion: the two evaluation points coincide");
  if (grid.samples.empty() || grid.basepoint_vertex < 0 ||
      grid.basepoint_vertex >= int(grid.samples.size()))
    throw SurfaceError("grid has no usable basepoint");
  for (int j = 0; j < 4; ++j)
    if (std::abs(grid.punctures[j] - p.punctures[j]) > 1e-12)
      throw SurfaceError("grid punctures do not match the potential");

  int N = 8;
  while (N < std::max(16, options.lambda_samples)) N *= 2;
  const Complex zB = grid.samples[grid.basepoint_vertex];
  const PetalSystem petals = standard_petals(p.punctures, zB);
  const std::vector<Complex> holes(p.punctures.begin(), p.punctures.end());

  // circle monodromies and the dressing family W(lambda_m)
  std::vector<Eigen::Vector3d> scoords(N);
  std::vector<char> amb(N, 0);
  std::vector<MonodromyRep> reps;
  reps.reserve(N);
  for (int m = 0; m < N; ++m) {
    const Complex lam = std::polar(1.0, kTwoPi * double(m) / N);
    reps.push_back(monodromy_from_petals(petals, p, lam, options.tol));
    const InvariantForm form = best_invariant_form(reps.back());
    if (!form.positive && !form.ambiguous) {
      std::ostringstream os;
      os << "monodromy not unitarizable at circle sample " << m
         << " (lambda = " << format_complex(lam) << ")";
      throw SurfaceError(os.str());
    }
    amb[m] = form.ambiguous ? 1 : 0;
    scoords[m] = hermitian_log_coords(form.h);
  }
  // near-central samples have an ill-determined form; interpolate it from
  // the certain neighbors so the dressed loop stays smooth in lambda
  std::vector<Eigen::Vector3d> fixed = scoords;
  for (int m = 0; m < N; ++m) {
    if (!amb[m]) continue;
    int dl = 0, dr = 0;
    for (int d = 1; d <= N / 2; ++d)
      if (!amb[((m - d) % N + N) % N]) {
        dl = d;
        break;
      }
    for (int d = 1; d <= N / 2; ++d)
      if (!amb[(m + d) % N]) {
        dr = d;
        break;
      }
    if (dl == 0 || dr == 0) continue;  // all samples ambiguous: keep as is
    const Eigen::Vector3d sl = scoords[((m - dl) % N + N) % N];
    const Eigen::Vector3d sr = scoords[(m + dr) % N];
    fixed[m] = (sl * double(dr) + sr * double(dl)) / double(dl + dr);
  }
  std::vector<Matrix2> wdress(N), wdress_inv(N);
  double dressing_defect = 0.0;
  for (int m = 0; m < N; ++m) {
    wdress[m] = hermitian_exp_half(fixed[m]);
    wdress_inv[m] = hermitian_exp_half(-fixed[m]);
    for (int j = 0; j < 4; ++j) {
      const Matrix2 u = wdress[m] * reps[m].m[j] * wdress_inv[m];
      dressing_defect = std::max(
          dressing_defect,
          (u.adjoint() * u - Matrix2::Identity()).norm());
    }
  }

  // evaluation-point guards and dressing, interpolated in the log coords
  ReconstructionResult result;
  const std::array<Complex, 2> sym{lambda1, lambda2};
  std::array<Matrix2, 2> wsym, wsym_inv;
  std::array<MonodromyRep, 2> sym_reps;
  for (int i = 0; i < 2; ++i) {
    sym_reps[i] = monodromy_from_petals(petals, p, sym[i], options.tol);
    const UnitarizerResult un = unitarize(sym_reps[i]);
    if (!un.positive && !un.ambiguous) {
      std::ostringstream os;
      os << "unitarization failed at evaluation point "
         << format_complex(sym[i]) << "; residual " << un.residual;
      throw SurfaceError(os.str());
    }
    const double x = wrap_angle(std::arg(sym[i])) / kTwoPi * N;
    const int m0 = int(std::floor(x)) % N;
    const double frac = x - std::floor(x);
    const Eigen::Vector3d si =
        fixed[m0] * (1.0 - frac) + fixed[(m0 + 1) % N] * frac;
    wsym[i] = hermitian_exp_half(si);
    wsym_inv[i] = hermitian_exp_half(-si);
    std::array<Matrix2, 4> u;
    for (int j = 0; j < 4; ++j) {
      u[j] = project_su2(wsym[i] * sym_reps[i].m[j] * wsym_inv[i]);
      (i == 0 ? result.deck.gen_a : result.deck.gen_b)[j] = u[j];
    }
    // the closing relations at an evaluation point: opposite-order pairs
    // multiply to a common sign and the two pairs commute up to sign
    const auto sign_dist = [](const Matrix2& a, const Matrix2& b) {
      return std::min((a - b).norm(), (a + b).norm());
    };
    const Matrix2 p12 = u[0] * u[1];
    const Matrix2 p34 = u[2] * u[3];
    const double rel =
        std::max({sign_dist(p12, Matrix2::Identity()),
                  sign_dist(p34, Matrix2::Identity()),
                  sign_dist(u[0] * u[2], u[2] * u[0])});
    if (!(rel <= 1e-3)) {
      std::ostringstream os;
      os << "monodromy does not satisfy the closing relations at "
            "evaluation point "
         << format_complex(sym[i]) << "; defect " << rel;
      throw SurfaceError(os.str());
    }
  }

  // spanning tree of the grid; transports multiply on the right along edges
  const int V = int(grid.samples.size());
  std::vector<std::vector<int>> adj(V);
  for (const auto& f : grid.triangles)
    for (int e = 0; e < 3; ++e) {
      adj[f[e]].push_back(f[(e + 1) % 3]);
      adj[f[(e + 1) % 3]].push_back(f[e]);
    }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  std::vector<int> parent(V, -1), bfs;
  bfs.reserve(V);
  parent[grid.basepoint_vertex] = grid.basepoint_vertex;
  bfs.push_back(grid.basepoint_vertex);
  for (std::size_t head = 0; head < bfs.size(); ++head) {
    const int v = bfs[head];
    for (int w : adj[v])
      if (parent[w] < 0) {
        parent[w] = v;
        bfs.push_back(w);
      }
  }
  if (int(bfs.size()) != V)
    throw SurfaceError("grid mesh is not connected");

  std::vector<PoleSystem> systems;
  systems.reserve(N);
  for (int m = 0; m < N; ++m)
    systems.push_back(
        pole_system_at(p, std::polar(1.0, kTwoPi * double(m) / N)));
  TransportOptions topt;
  topt.tol = options.tol;

  std::vector<std::vector<Matrix2>> psi(V, std::vector<Matrix2>(N));
  for (int m = 0; m < N; ++m) psi[grid.basepoint_vertex][m].setIdentity();
  for (std::size_t head = 1; head < bfs.size(); ++head) {
    const int v = bfs[head];
    const int par = parent[v];
    try {
      const PathPolyline edge =
          make_polyline({grid.samples[par], grid.samples[v]}, holes);
      for (int m = 0; m < N; ++m)
        psi[v][m] = psi[par][m] * transport(systems[m], edge, topt);
    } catch (const PathError& e) {
      std::ostringstream os;
      os << "transport edge into vertex " << v << " (z = "
         << format_complex(grid.samples[v]) << ") rejected: " << e.what();
      throw SurfaceError(os.str());
    }
  }

  // path independence across a sample of the non-tree edges
  std::vector<std::array<int, 2>> extra;
  for (int v = 0; v < V; ++v)
    for (int w : adj[v])
      if (v < w && parent[w] != v && parent[v] != w) extra.push_back({v, w});
  const int checks =
      std::min<int>(std::max(options.alt_path_checks, 0), int(extra.size()));
  for (int k = 0; k < checks; ++k) {
    const auto [a, b] = extra[std::size_t(k) * extra.size() / checks];
    const PathPolyline edge =
        make_polyline({grid.samples[a], grid.samples[b]}, holes);
    for (int m : {0, N / 2}) {
      const Matrix2 t = transport(systems[m], edge, topt);
      result.path_dependence = std::max(
          result.path_dependence, (psi[a][m] * t - psi[b][m]).norm());
    }
  }

  // deck elements of the cuts from the two banks of one slit vertex
  auto tree_path = [&](int v) {
    std::vector<Complex> chain;
    for (int w = v; w != grid.basepoint_vertex; w = parent[w])
      chain.push_back(grid.samples[w]);
    chain.push_back(zB);
    std::reverse(chain.begin(), chain.end());
    return make_polyline(chain, holes);
  };
  for (int c = 0; c < 3; ++c) {
    const FundamentalDomainGrid::SlitPair* sp = nullptr;
    for (const auto& s : grid.slits)
      if (s.cut == c) {
        sp = &s;
        break;
      }
    if (!sp) throw SurfaceError("grid is missing a cut");
    const PathPolyline pm = tree_path(sp->minus_vertex);
    const PathPolyline pp = tree_path(sp->plus_vertex);
    for (int i = 0; i < 2; ++i) {
      const Matrix2 tm = integrate_frame(p, sym[i], pm, options.tol);
      const Matrix2 tp = integrate_frame(p, sym[i], pp, options.tol);
      const Matrix2 u =
          project_su2(wsym[i] * (tm * tp.inverse()) * wsym_inv[i]);
      (i == 0 ? result.deck.cut_a : result.deck.cut_b)[c] = u;
    }
  }

  // pointwise splitting of the dressed frame and the two Sym evaluations
  const std::vector<Complex> w1 = interp_weights(N, lambda1);
  const std::vector<Complex> w2 = interp_weights(N, lambda2);
  result.mesh.vertices.resize(V);
  result.mesh.faces = grid.triangles;
  result.mesh.deck_labels.assign(V, "");
  std::vector<Matrix2> vals(N);
  for (int v = 0; v < V; ++v) {
    for (int m = 0; m < N; ++m) vals[m] = wdress[m] * psi[v][m];
    CircleFactors cf;
    try {
      cf = factor_circle_samples(vals, 1e-12);
    } catch (const LoopError& e) {
      std::ostringstream os;
      os << "gauge factorization failed at vertex " << v << " (z = "
         << format_complex(grid.samples[v]) << "): " << e.what();
      throw SurfaceError(os.str());
    }
    ImmersionSample& s = result.mesh.vertices[v];
    s.z = grid.samples[v];
    s.frame1.setZero();
    s.frame2.setZero();
    for (int m = 0; m < N; ++m) {
      s.frame1 += w1[m] * cf.unitary[m];
      s.frame2 += w2[m] * cf.unitary[m];
    }
    s.f = quaternion_of(s.frame1 * s.frame2.inverse());
    result.unit_defect =
        std::max(result.unit_defect, std::abs(s.f.norm() - 1.0));
  }
  if (result.unit_defect > 1e-4) {
    std::ostringstream os;
    os << "integration accuracy lost: immersion norm defect "
       << result.unit_defect;
    throw SurfaceError(os.str());
  }
  result.dressing_defect = dressing_defect;
  return result;
}

TileResult tile(const ReconstructionResult& fundamental,
                const FundamentalDomainGrid& grid, int depth,
                double consistency_tol) {
  const int V = int(fundamental.mesh.vertices.size());
  if (V != int(grid.samples.size()))
    throw SurfaceError("mesh does not match the grid it was built on");
  if (depth < 0) throw SurfaceError("negative tiling depth");

  struct Sheet {
    Matrix2 a, b;
    std::string label;
    int len = 0;
  };
  std::vector<Sheet> sheets;
  sheets.push_back({Matrix2::Identity(), Matrix2::Identity(), "", 0});
  auto match = [&](const Matrix2& a, const Matrix2& b) {
    for (std::size_t i = 0; i < sheets.size(); ++i) {
      const double dp = (a - sheets[i].a).norm() + (b - sheets[i].b).norm();
      const double dm = (a + sheets[i].a).norm() + (b + sheets[i].b).norm();
      if (std::min(dp, dm) < 1e-6) return int(i);
    }
    return -1;
  };
  const DeckAction& deck = fundamental.deck;
  auto neighbor = [&](const Sheet& s, int c, int dir) {
    Sheet n;
    n.a = dir > 0 ? Matrix2(s.a * deck.cut_a[c])
                  : Matrix2(s.a * deck.cut_a[c].adjoint());
    n.b = dir > 0 ? Matrix2(s.b * deck.cut_b[c])
                  : Matrix2(s.b * deck.cut_b[c].adjoint());
    n.label = s.label + char('a' + c) + (dir > 0 ? "" : "'");
    n.len = s.len + 1;
    return n;
  };
  bool closed = true;
  for (std::size_t head = 0; head < sheets.size(); ++head)
    for (int c = 0; c < 3; ++c)
      for (int dir : {1, -1}) {
        const Sheet n = neighbor(sheets[head], c, dir);
        if (match(n.a, n.b) >= 0) continue;
        if (sheets[head].len >= depth) {
          closed = false;
          continue;
        }
        sheets.push_back(n);
      }

  TileResult out;
  out.sheets = int(sheets.size());
  out.closed = closed;
  out.mesh.vertices.reserve(sheets.size() * V);
  out.mesh.deck_labels.reserve(sheets.size() * V);
  for (const Sheet& s : sheets)
    for (int v = 0; v < V; ++v) {
      ImmersionSample t = fundamental.mesh.vertices[v];
      t.frame1 = s.a * t.frame1;
      t.frame2 = s.b * t.frame2;
      t.f = quaternion_of(s.a * matrix_of(t.f) * s.b.adjoint());
      out.mesh.vertices.push_back(t);
      out.mesh.deck_labels.push_back(s.label);
    }
  for (std::size_t si = 0; si < sheets.size(); ++si)
    for (const auto& f : fundamental.mesh.faces)
      out.mesh.faces.push_back({f[0] + int(si) * V, f[1] + int(si) * V,
                                f[2] + int(si) * V});
  if (depth == 0) return out;  // no gluing pass: the input mesh unchanged

  UnionFind uf(int(out.mesh.vertices.size()));
  for (std::size_t si = 0; si < sheets.size(); ++si)
    for (const auto& sp : grid.slits) {
      const Sheet n = neighbor(sheets[si], sp.cut, 1);
      const int ti = match(n.a, n.b);
      if (ti < 0) continue;  // open boundary at the truncation depth
      const int ga = int(si) * V + sp.minus_vertex;
      const int gb = ti * V + sp.plus_vertex;
      const double d =
          (out.mesh.vertices[ga].f - out.mesh.vertices[gb].f).norm();
      if (d > consistency_tol) {
        std::ostringstream os;
        os << "tiling inconsistency crossing cut " << char('a' + sp.cut)
           << " from sheet '" << sheets[si].label << "': vertex mismatch "
           << d;
        throw SurfaceError(os.str());
      }
      out.mismatch = std::max(out.mismatch, d);
      uf.unite(ga, gb);
    }

  std::vector<int> remap(out.mesh.vertices.size(), -1);
  SurfaceMesh glued;
  for (std::size_t v = 0; v < out.mesh.vertices.size(); ++v) {
    const int r = uf.find(int(v));
    if (remap[r] < 0) {
      remap[r] = int(glued.vertices.size());
      glued.vertices.push_back(out.mesh.vertices[r]);
      glued.deck_labels.push_back(out.mesh.deck_labels[r]);
    }
    remap[v] = remap[r];
  }
  glued.faces.reserve(out.mesh.faces.size());
  for (const auto& f : out.mesh.faces)
    glued.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  out.mesh = std::move(glued);
  return out;
}

DiagnosticsReport diagnostics(const SurfaceMesh& mesh, Complex lambda1,
                              Complex lambda2) {
  DiagnosticsReport rep;
  rep.h_reference = mean_curvature_of(lambda1, lambda2);
  const int V = int(mesh.vertices.size());
  for (const auto& s : mesh.vertices)
    rep.max_norm_defect =
        std::max(rep.max_norm_defect, std::abs(s.f.norm() - 1.0));

  // spherical excess area over the face triangles
  for (const auto& f : mesh.faces) {
    std::array<Eigen::Vector4d, 3> q;
    bool bad = false;
    for (int e = 0; e < 3; ++e) {
      q[e] = mesh.vertices[f[e]].f;
      const double n = q[e].norm();
      if (n < 0.5) bad = true;
      else q[e] /= n;
    }
    if (bad) {
      ++rep.degenerate_faces;
      continue;
    }
    std::array<double, 3> side;
    for (int e = 0; e < 3; ++e)
      side[e] = std::acos(std::clamp(q[(e + 1) % 3].dot(q[(e + 2) % 3]),
                                     -1.0, 1.0));
    const double s = 0.5 * (side[0] + side[1] + side[2]);
    const double t = std::tan(0.5 * s) * std::tan(0.5 * (s - side[0])) *
                     std::tan(0.5 * (s - side[1])) *
                     std::tan(0.5 * (s - side[2]));
    const double excess = 4.0 * std::atan(std::sqrt(std::max(t, 0.0)));
    if (excess < 1e-14) {
      ++rep.degenerate_faces;
      continue;
    }
    rep.area += excess;
  }

  // mean curvature by a quadratic fit in geodesic normal coordinates over
  // the two-ring, with the normal oriented by an incident face
  std::vector<std::vector<int>> adj(V);
  std::vector<int> face_of(V, -1);
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const auto& f = mesh.faces[fi];
    for (int e = 0; e < 3; ++e) {
      adj[f[e]].push_back(f[(e + 1) % 3]);
      adj[f[(e + 1) % 3]].push_back(f[e]);
      if (face_of[f[e]] < 0) face_of[f[e]] = int(fi);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  double h_sum = 0.0, h_sq = 0.0;
  for (int v = 0; v < V; ++v) {
    if (face_of[v] < 0) continue;
    std::vector<int> ring;
    for (int w : adj[v]) {
      ring.push_back(w);
      for (int x : adj[w])
        if (x != v) ring.push_back(x);
    }
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    ring.erase(std::remove(ring.begin(), ring.end(), v), ring.end());
    if (int(ring.size()) < 8) continue;

    const double n0 = mesh.vertices[v].f.norm();
    if (n0 < 0.5) continue;
    const Eigen::Vector4d f0 = mesh.vertices[v].f / n0;
    Eigen::Matrix4d basis = Eigen::Matrix4d::Identity();
    basis.col(0) = f0;
    const Eigen::Matrix4d qq =
        Eigen::HouseholderQR<Eigen::Matrix4d>(basis).householderQ();
    const Eigen::Matrix<double, 4, 3> tan3 = qq.rightCols<3>();

    std::vector<Eigen::Vector3d> x;
    x.reserve(ring.size());
    double rms = 0.0;
    for (int w : ring) {
      const double nw = mesh.vertices[w].f.norm();
      if (nw < 0.5) continue;
      const Eigen::Vector4d fw = mesh.vertices[w].f / nw;
      const double ct = std::clamp(fw.dot(f0), -1.0, 1.0);
      const double r = std::acos(ct);
      const Eigen::Vector4d dir = fw - ct * f0;
      const double nd = dir.norm();
      Eigen::Vector3d xi = Eigen::Vector3d::Zero();
      if (nd > 1e-14) xi = (r / nd) * (tan3.transpose() * dir);
      x.push_back(xi);
      rms += xi.squaredNorm();
    }
    if (int(x.size()) < 8) continue;
    rms = std::sqrt(rms / double(x.size()));
    if (rms < 1e-12) continue;

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    std::vector<double> wts(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      wts[i] = std::exp(-x[i].squaredNorm() / (rms * rms));
      cov += wts[i] * x[i] * x[i].transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const Eigen::Vector3d evals = es.eigenvalues();  // ascending
    if (evals[1] < 1e-20 || evals[0] > 0.25 * evals[1]) continue;
    Eigen::Vector3d nrm = es.eigenvectors().col(0);

    Eigen::MatrixXd A(x.size(), 6);
    Eigen::VectorXd rhs(x.size());
    const Eigen::Vector3d t1 = es.eigenvectors().col(2);
    const Eigen::Vector3d t2 = es.eigenvectors().col(1);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xi = t1.dot(x[i]), eta = t2.dot(x[i]);
      const double sw = std::sqrt(wts[i]);
      A.row(i) << sw, sw * xi, sw * eta, sw * xi * xi, sw * xi * eta,
          sw * eta * eta;
      rhs[i] = sw * nrm.dot(x[i]);
    }
    const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(rhs);
    double h = beta[3] + beta[5];

    const auto& fc = mesh.faces[face_of[v]];
    const Eigen::Vector4d ea =
        mesh.vertices[fc[1]].f - mesh.vertices[fc[0]].f;
    const Eigen::Vector4d eb =
        mesh.vertices[fc[2]].f - mesh.vertices[fc[0]].f;
    const Eigen::Vector4d oriented = cross4(f0, ea, eb);
    if (oriented.dot(tan3 * nrm) < 0) h = -h;
    h_sum += h;
    h_sq += h * h;
    ++rep.h_samples;
  }
  if (rep.h_samples > 0) {
    rep.h_mean = h_sum / rep.h_samples;
    rep.h_std =
        std::sqrt(std::max(h_sq / rep.h_samples - rep.h_mean * rep.h_mean,
                           0.0));
  }

  // combinatorics: Euler characteristic, boundary cycles, genus
  std::unordered_map<std::uint64_t, int> edge_count;
  edge_count.reserve(mesh.faces.size() * 3);
  for (const auto& f : mesh.faces)
    for (int e = 0; e < 3; ++e) {
      const int a = std::min(f[e], f[(e + 1) % 3]);
      const int b = std::max(f[e], f[(e + 1) % 3]);
      ++edge_count[(std::uint64_t(a) << 32) | std::uint64_t(b)];
    }
  const long E = long(edge_count.size());
  rep.euler_characteristic = long(V) - E + long(mesh.faces.size());
  UnionFind uf(V);
  std::vector<char> on_boundary(V, 0);
  for (const auto& [key, cnt] : edge_count)
    if (cnt == 1) {
      const int a = int(key >> 32), b = int(key & 0xffffffffu);
      on_boundary[a] = on_boundary[b] = 1;
      uf.unite(a, b);
    }
  std::vector<int> roots;
  for (int v = 0; v < V; ++v)
    if (on_boundary[v]) roots.push_back(uf.find(v));
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  rep.boundary_components = int(roots.size());
  const long g2 = 2 - rep.euler_characteristic - rep.boundary_components;
  rep.genus_estimate = (g2 >= 0 && g2 % 2 == 0) ? int(g2 / 2) : -1;
  return rep;
}

SurfaceMesh sample_sphere_mesh(int n) {
  if (n < 3) throw SurfaceError("sphere mesh needs n >= 3");
  SurfaceMesh mesh;
  auto put = [&](const Eigen::Vector4d& q) {
    ImmersionSample s;
    s.z = Complex(0, 0);
    s.f = q;
    s.frame1 = matrix_of(q);
    mesh.vertices.push_back(s);
    return int(mesh.vertices.size()) - 1;
  };
  const int north = put(Eigen::Vector4d(1, 0, 0, 0));
  const int south = put(Eigen::Vector4d(-1, 0, 0, 0));
  const int cols = 2 * n;
  auto vid = [&](int i, int j) { return 2 + (i - 1) * cols + (j % cols); };
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < cols; ++j) {
      const double th = std::numbers::pi * double(i) / n;
      const double ph = std::numbers::pi * double(j) / n;
      put(Eigen::Vector4d(std::cos(th), std::sin(th) * std::cos(ph),
                          std::sin(th) * std::sin(ph), 0));
    }
  for (int j = 0; j < cols; ++j) {
    mesh.faces.push_back({north, vid(1, j), vid(1, j + 1)});
    mesh.faces.push_back({south, vid(n - 1, j + 1), vid(n - 1, j)});
  }
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 0; j < cols; ++j) {
      mesh.faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      mesh.faces.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  mesh.deck_labels.assign(mesh.vertices.size(), "");
  return mesh;
}

SurfaceMesh sample_clifford_mesh(int n) {
  if (n < 3) throw SurfaceError("torus mesh needs n >= 3");
  SurfaceMesh mesh;
  const double r = 1.0 / std::numbers::sqrt2;
  auto vid = [&](int i, int j) {
    return ((i % n + n) % n) * n + ((j % n + n) % n);
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double al = kTwoPi * double(i) / n;
      const double be = kTwoPi * double(j) / n;
      ImmersionSample s;
      s.z = Complex(0, 0);
      s.f = Eigen::Vector4d(r * std::cos(al), r * std::sin(al),
                            r * std::cos(be), r * std::sin(be));
      s.frame1 = matrix_of(s.f);
      mesh.vertices.push_back(s);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      mesh.faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      mesh.faces.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  mesh.deck_labels.assign(mesh.vertices.size(), "");
  return mesh;
}

}  // namespace dpw
