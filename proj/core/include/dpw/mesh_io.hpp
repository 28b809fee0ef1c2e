#pragma once

#include <string>

#include "dpw/surface.hpp"

namespace dpw {

struct MeshIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MeshProjection { kRaw4, kStereographic };

struct ExportOptions {
  MeshProjection mode = MeshProjection::kRaw4;
  Eigen::Vector4d pole{-1, 0, 0, 0};  // stereographic projection center
};

/// ASCII polygon mesh with four double vertex properties (the quaternion
/// components), or three when projecting stereographically from the pole.
/// The projection pole is recorded in a header comment so files round-trip.
/// Byte output is deterministic for fixed input and options.
void export_mesh(const SurfaceMesh& mesh, const std::string& path,
                 const ExportOptions& options = {});

/// Reads meshes written by export_mesh; stereographic files are lifted back
/// to the sphere through the recorded pole. Frames and labels are not part
/// of the format and come back as defaults.
SurfaceMesh import_mesh(const std::string& path);

}  // namespace dpw
