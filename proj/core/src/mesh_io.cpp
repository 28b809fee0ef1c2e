#include "dpw/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/QR>

namespace dpw {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Eigen::Matrix<double, 4, 3> pole_basis(const Eigen::Vector4d& pole) {
  Eigen::Matrix4d basis = Eigen::Matrix4d::Identity();
  basis.col(0) = pole;
  const Eigen::Matrix4d q =
      Eigen::HouseholderQR<Eigen::Matrix4d>(basis).householderQ();
  return q.rightCols<3>();
}

}  // namespace

void export_mesh(const SurfaceMesh& mesh, const std::string& path,
                 const ExportOptions& options) {
  const bool stereo = options.mode == MeshProjection::kStereographic;
  Eigen::Vector4d pole = options.pole;
  Eigen::Matrix<double, 4, 3> basis;
  if (stereo) {
    const double n = pole.norm();
    if (n < 1e-12) throw MeshIoError("projection pole must be nonzero");
    pole /= n;
    basis = pole_basis(pole);
  }

  std::ostringstream os;
  os << "ply\nformat ascii 1.0\n";
  os << "comment projection " << (stereo ? "stereographic" : "raw4") << "\n";
  if (stereo) {
    os << "comment pole";
    for (int i = 0; i < 4; ++i) os << " " << format_double(pole[i]);
    os << "\n";
  }
  os << "element vertex " << mesh.vertices.size() << "\n";
  os << "property double x\nproperty double y\nproperty double z\n";
  if (!stereo) os << "property double w\n";
  os << "element face " << mesh.faces.size() << "\n";
  os << "property list uchar int vertex_indices\nend_header\n";

  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Eigen::Vector4d& q = mesh.vertices[v].f;
    if (stereo) {
      const double qn = q.norm();
      if (qn < 1e-12) throw MeshIoError("vertex with vanishing quaternion");
      const Eigen::Vector4d u = q / qn;
      if ((u - pole).norm() < 1e-6) {
        std::ostringstream err;
        err << "projection pole lies on the surface at vertex " << v;
        throw MeshIoError(err.str());
      }
      const double c = u.dot(pole);
      const Eigen::Vector3d x = basis.transpose() * u / (1.0 - c);
      for (int i = 0; i < 3; ++i)
        os << (i ? " " : "") << format_double(x[i]);
    } else {
      for (int i = 0; i < 4; ++i)
        os << (i ? " " : "") << format_double(q[i]);
    }
    os << "\n";
  }
  for (const auto& f : mesh.faces)
    os << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw MeshIoError("cannot open " + path + " for writing");
  const std::string body = os.str();
  out.write(body.data(), long(body.size()));
  if (!out) throw MeshIoError("failed writing " + path);
}

SurfaceMesh import_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MeshIoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "ply")
    throw MeshIoError(path + ": not a polygon mesh file");

  long n_vertex = -1, n_face = -1;
  int props = 0;
  bool stereo = false;
  bool has_pole = false;
  Eigen::Vector4d pole(-1, 0, 0, 0);
  while (std::getline(in, line)) {
    if (line == "end_header") break;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "element") {
      std::string kind;
      long count;
      ls >> kind >> count;
      if (kind == "vertex") n_vertex = count;
      if (kind == "face") n_face = count;
    } else if (word == "property") {
      std::string type;
      ls >> type;
      if (type == "double") ++props;
    } else if (word == "comment") {
      std::string key;
      ls >> key;
      if (key == "projection") {
        std::string mode;
        ls >> mode;
        stereo = (mode == "stereographic");
      } else if (key == "pole") {
        for (int i = 0; i < 4; ++i) ls >> pole[i];
        has_pole = !ls.fail();
      }
    }
  }
  if (n_vertex < 0 || n_face < 0)
    throw MeshIoError(path + ": header misses element counts");
  if (props != (stereo ? 3 : 4))
    throw MeshIoError(path + ": unexpected vertex property count");
  if (stereo && !has_pole)
    throw MeshIoError(path + ": stereographic file without pole record");

  Eigen::Matrix<double, 4, 3> basis;
  if (stereo) {
    pole /= pole.norm();
    basis = pole_basis(pole);
  }
  SurfaceMesh mesh;
  mesh.vertices.reserve(n_vertex);
  for (long v = 0; v < n_vertex; ++v) {
    ImmersionSample s;
    if (stereo) {
      Eigen::Vector3d x;
      if (!(in >> x[0] >> x[1] >> x[2]))
        throw MeshIoError(path + ": truncated vertex data");
      const double t = x.squaredNorm();
      s.f = (t - 1.0) / (t + 1.0) * pole +
            2.0 / (t + 1.0) * (basis * x);
    } else {
      if (!(in >> s.f[0] >> s.f[1] >> s.f[2] >> s.f[3]))
        throw MeshIoError(path + ": truncated vertex data");
    }
    s.frame1 = matrix_of(s.f);
    mesh.vertices.push_back(s);
  }
  mesh.faces.reserve(n_face);
  for (long f = 0; f < n_face; ++f) {
    int arity, a, b, c;
    if (!(in >> arity >> a >> b >> c) || arity != 3)
      throw MeshIoError(path + ": faces must be triangles");
    if (a < 0 || b < 0 || c < 0 || a >= n_vertex || b >= n_vertex ||
        c >= n_vertex)
      throw MeshIoError(path + ": face references a missing vertex");
    mesh.faces.push_back({a, b, c});
  }
  mesh.deck_labels.assign(mesh.vertices.size(), "");
  return mesh;
}

}  // namespace dpw
