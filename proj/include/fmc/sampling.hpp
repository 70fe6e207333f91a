#pragma once

#include <random>

#include "fmc/mesh.hpp"

namespace fmc {

/// Rescales a zero-boundary field so that its largest element gradient norm
/// equals `target` (fields with zero gradient are returned unchanged).
Field scale_to_gradient(const Mesh& mesh, Field field, double target);

/// A smooth random bump: a sum of one to four Gaussians with random centres,
/// widths and signed amplitudes, zeroed on the boundary and scaled so that
/// its largest element gradient norm is uniform in (0, max_gradient].
Field random_bump(const Mesh& mesh, std::mt19937_64& rng,
                  double max_gradient = 0.9);

/// Distance to the nearest boundary node, scaled into K0 when its P1
/// interpolant is steeper than one.
Field boundary_cone(const Mesh& mesh);

}  // namespace fmc
