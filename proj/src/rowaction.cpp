#include "kt/rowaction.hpp"

#include <stdexcept>

namespace kt::rowaction {
namespace {

void check_row(const DenseMatrix& a, std::size_t i) {
  if (i >= a.rows()) throw std::out_of_range("row index " + std::to_string(i) + " out of range");
}

Vector checked_norms(const DenseMatrix& a) {
  Vector norms = row_norms_squared(a);
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (norms[i] < kZeroRowThreshold) throw ZeroRowError(i);
  }
  return norms;
}

// x ← x + ((rhs − ⟨a_i,x⟩)/‖a_i‖²)·a_i
inline void project_inplace(const DenseMatrix& a, std::size_t i, double rhs, double norm_sq, std::span<double> x) {
  const auto ai = a.row(i);
  const double t = (rhs - dot(ai, x)) / norm_sq;
  axpy(t, ai, x);
}

}  // namespace

SweepSchedule::SweepSchedule(Kind kind, std::size_t m) : kind_(kind), m_(m) {
  if (m == 0) throw std::invalid_argument("SweepSchedule: m must be positive");
  for (std::size_t i = 0; i < m; ++i) period_.push_back(i);
  if (kind == Kind::SymmetricPeriod) {
    for (std::size_t i = m - 1; i-- > 1;) period_.push_back(i);
  }
}

std::size_t SweepSchedule::row_at_step(std::size_t k) const {
  if (k == 0) throw std::invalid_argument("SweepSchedule: steps are counted from 1");
  return period_[(k - 1) % period_.size()];
}

Vector project_row(const DenseMatrix& a, std::size_t i, std::span<const double> b, std::span<const double> x) {
  check_row(a, i);
  const double ns = dot(a.row(i), a.row(i));
  if (ns < kZeroRowThreshold) throw ZeroRowError(i);
  Vector out(x.begin(), x.end());
  project_inplace(a, i, b[i], ns, out);
  return out;
}

Vector apply_P(const DenseMatrix& a, std::size_t i, std::span<const double> x) {
  check_row(a, i);
  const double ns = dot(a.row(i), a.row(i));
  if (ns < kZeroRowThreshold) throw ZeroRowError(i);
  Vector out(x.begin(), x.end());
  project_inplace(a, i, 0.0, ns, out);
  return out;
}

Vector run_schedule(const DenseMatrix& a, std::span<const double> b, std::span<const double> x,
                    const SweepSchedule& schedule) {
  const Vector norms = checked_norms(a);
  Vector out(x.begin(), x.end());
  for (std::size_t i : schedule.period()) project_inplace(a, i, b[i], norms[i], out);
  return out;
}

Vector kaczmarz_sweep(const DenseMatrix& a, std::span<const double> b, std::span<const double> x) {
  return run_schedule(a, b, x, SweepSchedule(SweepSchedule::Kind::Forward, a.rows()));
}

SymmetricSweep symmetric_sweep_tapped(const DenseMatrix& a, std::span<const double> b, std::span<const double> x) {
  const Vector norms = checked_norms(a);
  const std::size_t m = a.rows();
  SymmetricSweep out;
  out.y.assign(x.begin(), x.end());
  for (std::size_t i = 0; i < m; ++i) project_inplace(a, i, b[i], norms[i], out.y);
  out.mid = out.y;
  for (std::size_t i = m - 1; i-- > 1;) project_inplace(a, i, b[i], norms[i], out.y);
  return out;
}

Vector symmetric_sweep(const DenseMatrix& a, std::span<const double> b, std::span<const double> x) {
  return symmetric_sweep_tapped(a, b, x).y;
}

Vector apply_Q(const DenseMatrix& a, std::span<const double> x) {
  const Vector norms = checked_norms(a);
  Vector out(x.begin(), x.end());
  for (std::size_t i = 0; i < a.rows(); ++i) project_inplace(a, i, 0.0, norms[i], out);
  return out;
}

Vector apply_Qt(const DenseMatrix& a, std::span<const double> x) {
  const Vector norms = checked_norms(a);
  Vector out(x.begin(), x.end());
  for (std::size_t i = a.rows(); i-- > 0;) project_inplace(a, i, 0.0, norms[i], out);
  return out;
}

Vector apply_Qbar(const DenseMatrix& a, std::span<const double> x) {
  const Vector norms = checked_norms(a);
  Vector out(x.begin(), x.end());
  const std::size_t m = a.rows();
  for (std::size_t i = m - 1; i-- > 1;) project_inplace(a, i, 0.0, norms[i], out);
  return out;
}

LinearOperator sweep_operator(const DenseMatrix& a) {
  return LinearOperator{
      [&a](std::span<const double> x) { return apply_Q(a, x); },
      [&a](std::span<const double> x) { return apply_Qt(a, x); },
  };
}

DenseMatrix projected_rows(const DenseMatrix& a) {
  const Vector norms = checked_norms(a);
  const std::size_t m = a.rows();
  DenseMatrix out = a;
  for (std::size_t i = 0; i < m; ++i) {
    auto row = out.row(i);
    for (std::size_t j = i + 1; j < m; ++j) project_inplace(a, j, 0.0, norms[j], row);
  }
  return out;
}

DenseMatrix reverse_projected_rows(const DenseMatrix& a) {
  const Vector norms = checked_norms(a);
  const std::size_t m = a.rows();
  DenseMatrix out(m, a.cols());
  // 0-based: rows 1..m−2 carry Q̄_i a_i with Q̄_i = P_1⋯P_{i−1}; P_{i−1} acts first.
  for (std::size_t i = 1; i + 1 < m; ++i) {
    auto row = out.row(i);
    const auto src = a.row(i);
    std::copy(src.begin(), src.end(), row.begin());
    for (std::size_t j = i; j-- > 1;) project_inplace(a, j, 0.0, norms[j], row);
  }
  return out;
}

IterationState kaczmarz_iterate(const DenseMatrix& a, std::span<const double> b, const IterationState& state) {
  return IterationState{kaczmarz_sweep(a, b, state.x), state.k + 1, state.history};
}

IterationState symmetric_iterate(const DenseMatrix& a, std::span<const double> b, const IterationState& state) {
  return IterationState{symmetric_sweep(a, b, state.x), state.k + 1, state.history};
}

}  // namespace kt::rowaction
