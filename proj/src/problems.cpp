#include "kt/problems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kt::problems {

ProblemInstance ProblemInstance::without_zero_rows() const {
  if (zero_rows.empty()) return *this;
  std::vector<std::size_t> keep;
  keep.reserve(a.rows() - zero_rows.size());
  for (std::size_t i = 0, z = 0; i < a.rows(); ++i) {
    if (z < zero_rows.size() && zero_rows[z] == i) {
      ++z;
      continue;
    }
    keep.push_back(i);
  }
  ProblemInstance out = *this;
  out.a = a.select_rows(keep);
  out.b.clear();
  for (std::size_t i : keep) out.b.push_back(b[i]);
  out.zero_rows.clear();
  return out;
}

ProblemInstance tanabe_problem() {
  ProblemInstance p;
  p.a = DenseMatrix{
      {1.0, 3.0, 2.0, -1.0},  //
      {1.0, 2.0, -1.0, -2.0},  //
      {1.0, -1.0, 2.0, 3.0},  //
      {2.0, 1.0, 1.0, 1.0},   //
      {5.0, 5.0, 4.0, 1.0},   //
      {4.0, -1.0, 5.0, 7.0},
  };
  p.b = {5.0, 0.0, 5.0, 5.0, 15.0, 15.0};
  p.x_star = Vector{1.0, 1.0, 1.0, 1.0};
  p.nullspace_basis = std::vector<Vector>{{-2.0 / 3.0, 1.0, -2.0 / 3.0, 1.0}};
  p.label = "tanabe";
  return p;
}

double ScanGeometry::span() const {
  return detector_span > 0.0 ? detector_span : std::numbers::sqrt2 * static_cast<double>(grid);
}

double ScanGeometry::angle(std::size_t t) const {
  const double range = full_circle ? 2.0 * std::numbers::pi : std::numbers::pi;
  return static_cast<double>(t) * range / static_cast<double>(n_angles);
}

double ScanGeometry::offset(std::size_t r) const {
  if (n_rays == 1) return 0.0;
  const double w = span();
  return -0.5 * w + static_cast<double>(r) * w / static_cast<double>(n_rays - 1);
}

Vector ray_row(std::size_t grid, double theta, double offset) {
  Vector row(grid * grid, 0.0);
  const double h = 0.5 * static_cast<double>(grid);
  const std::array<double, 2> d{std::cos(theta), std::sin(theta)};
  const std::array<double, 2> p0{-offset * d[1], offset * d[0]};
  constexpr double parallel = 1e-15;

  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int ax = 0; ax < 2; ++ax) {
    if (std::fabs(d[ax]) < parallel) {
      if (p0[ax] < -h || p0[ax] > h) return row;
      continue;
    }
    const double t1 = (-h - p0[ax]) / d[ax];
    const double t2 = (h - p0[ax]) / d[ax];
    t_enter = std::max(t_enter, std::min(t1, t2));
    t_exit = std::min(t_exit, std::max(t1, t2));
  }
  if (!(t_exit > t_enter)) return row;

  std::vector<double> ts{t_enter, t_exit};
  for (int ax = 0; ax < 2; ++ax) {
    if (std::fabs(d[ax]) < parallel) continue;
    for (std::size_t k = 0; k <= grid; ++k) {
      const double t = (-h + static_cast<double>(k) - p0[ax]) / d[ax];
      if (t > t_enter && t < t_exit) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());

  // A segment whose midpoint sits on a grid line runs along that line; its
  // length is shared equally by the pixels on both sides that lie inside the
  // image, so the result does not depend on rounding noise or ray direction.
  constexpr double on_line = 1e-10;
  const auto n = static_cast<long>(grid);
  auto candidates = [n](double u, long out[2]) {
    const long lo = static_cast<long>(std::floor(u - on_line));
    const long hi = static_cast<long>(std::floor(u + on_line));
    int count = 0;
    for (long v : {lo, hi}) {
      if (v >= 0 && v < n && (count == 0 || out[0] != v)) out[count++] = v;
    }
    return count;
  };
  for (std::size_t s = 0; s + 1 < ts.size(); ++s) {
    const double len = ts[s + 1] - ts[s];
    if (len <= 0.0) continue;
    const double tm = 0.5 * (ts[s] + ts[s + 1]);
    long cols[2];
    long rows[2];
    const int nc = candidates(p0[0] + tm * d[0] + h, cols);
    const int nr = candidates(h - (p0[1] + tm * d[1]), rows);
    if (nc == 0 || nr == 0) continue;
    const double share = len / static_cast<double>(nc * nr);
    for (int i = 0; i < nr; ++i) {
      for (int j = 0; j < nc; ++j) {
        row[static_cast<std::size_t>(rows[i]) * grid + static_cast<std::size_t>(cols[j])] += share;
      }
    }
  }
  return row;
}

DenseMatrix build_projection_matrix(const ScanGeometry& g) {
  if (g.grid == 0 || g.n_rays == 0 || g.n_angles == 0) {
    throw std::invalid_argument("build_projection_matrix: geometry counts must be positive");
  }
  DenseMatrix a(g.rows(), g.cols());
  for (std::size_t t = 0; t < g.n_angles; ++t) {
    const double theta = g.angle(t);
    for (std::size_t r = 0; r < g.n_rays; ++r) {
      const Vector row = ray_row(g.grid, theta, g.offset(r));
      std::copy(row.begin(), row.end(), a.row(t * g.n_rays + r).begin());
    }
  }
  return a;
}

namespace {

struct Ellipse {
  double intensity;
  double semi_x;
  double semi_y;
  double cx;
  double cy;
  double degrees;
};

// Modified Shepp-Logan (Toft) parameters.
constexpr std::array<Ellipse, 10> kHeadEllipses{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

}  // namespace

PhantomImage head_phantom(std::size_t grid) {
  if (grid == 0) throw std::invalid_argument("head_phantom: grid must be positive");
  PhantomImage img{grid, Vector(grid * grid, 0.0)};
  const double step = 2.0 / static_cast<double>(grid);
  for (std::size_t r = 0; r < grid; ++r) {
    const double y = 1.0 - (static_cast<double>(r) + 0.5) * step;
    for (std::size_t c = 0; c < grid; ++c) {
      const double x = -1.0 + (static_cast<double>(c) + 0.5) * step;
      double v = 0.0;
      for (const Ellipse& e : kHeadEllipses) {
        const double phi = e.degrees * std::numbers::pi / 180.0;
        const double dx = x - e.cx;
        const double dy = y - e.cy;
        const double u = (dx * std::cos(phi) + dy * std::sin(phi)) / e.semi_x;
        const double w = (-dx * std::sin(phi) + dy * std::cos(phi)) / e.semi_y;
        if (u * u + w * w <= 1.0) v += e.intensity;
      }
      // 1 − 0.8 − 0.2 rounds to −2.8e-17
      img.pixels[r * grid + c] = std::max(0.0, v);
    }
  }
  return img;
}

ProblemInstance tomo_problem(const ScanGeometry& g) {
  ProblemInstance p;
  p.a = build_projection_matrix(g);
  PhantomImage img = head_phantom(g.grid);
  p.b = matvec(p.a, img.pixels);
  p.x_star = std::move(img.pixels);
  p.zero_rows = zero_rows(p.a);
  p.grid = g.grid;
  p.label = "tomo-" + std::to_string(g.n_angles) + "x" + std::to_string(g.n_rays) + "-" + std::to_string(g.grid);
  return p;
}

}  // namespace kt::problems
