#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kt/linalg.hpp"

namespace kt::problems {

struct ProblemInstance {
  DenseMatrix a;
  Vector b;
  std::optional<Vector> x_star;
  std::optional<std::vector<Vector>> nullspace_basis;
  std::string label;
  /// Rows of `a` with ‖a_i‖² < 1e-300 (rays that miss the image).
  std::vector<std::size_t> zero_rows;
  /// Image side length for tomography problems, 0 otherwise.
  std::size_t grid = 0;

  /// Copy with the zero rows (and their b entries) removed.
  ProblemInstance without_zero_rows() const;
};

/// The consistent, rank-3, 6×4 Tanabe system with x* = (1,1,1,1) and
/// N(A) = span{(−2/3, 1, −2/3, 1)}.
ProblemInstance tanabe_problem();

/// Parallel-beam scan of a grid×grid image occupying [−grid/2, grid/2]² in
/// pixel units. Ray r at angle t runs along (cos θ_t, sin θ_t) at signed
/// offset s_r along the normal (−sin θ_t, cos θ_t). Offsets are equi-spaced
/// over [−span/2, span/2] with both ends included; a single ray sits at 0.
struct ScanGeometry {
  std::size_t n_angles = 36;
  std::size_t n_rays = 75;
  std::size_t grid = 50;
  /// Width covered by the rays; 0 selects √2·grid (the image diagonal).
  double detector_span = 0.0;
  /// Spread the angles over [0, 2π) instead of [0, π).
  bool full_circle = false;

  double span() const;
  double angle(std::size_t t) const;
  double offset(std::size_t r) const;
  std::size_t rows() const { return n_angles * n_rays; }
  std::size_t cols() const { return grid * grid; }
};

/// Intersection lengths of one ray with every pixel (row-major, row 0 at the
/// top of the image). Computed by clipping the line to the image square and
/// walking the sorted crossings with the pixel grid lines.
Vector ray_row(std::size_t grid, double theta, double offset);

/// Row t·n_rays + r holds ray_row(grid, angle(t), offset(r)).
DenseMatrix build_projection_matrix(const ScanGeometry& g);

struct PhantomImage {
  std::size_t grid = 0;
  Vector pixels;  ///< row-major, row 0 at the top
};

/// Modified Shepp-Logan head phantom (ten ellipses) sampled at the pixel
/// centers of a grid×grid partition of [−1, 1]².
PhantomImage head_phantom(std::size_t grid);

/// A = build_projection_matrix(g), x* = head_phantom(g.grid), b = Ax*.
ProblemInstance tomo_problem(const ScanGeometry& g);

}  // namespace kt::problems
