#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "fmc/mesh.hpp"
#include "fmc/nonlinearity.hpp"

namespace fmc {

/// 1D meshes: polyline of u(x) with dashed guide lines at the jump levels.
/// 2D meshes: two panels of triangles filled by the mean nodal value, one for
/// u and one for zeta. 3D meshes are not drawn and yield an empty string.
std::string render_svg(const Mesh& mesh, const Field& u,
                       const Eigen::VectorXd& zeta, const Nonlinearity& spec);

/// Writes render_svg to `path`; returns false when there is nothing to draw.
bool write_svg(const Mesh& mesh, const Field& u, const Eigen::VectorXd& zeta,
               const Nonlinearity& spec, const std::filesystem::path& path);

}  // namespace fmc
