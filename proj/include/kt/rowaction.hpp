#pragma once

// Row-action kernels: orthogonal projections onto the hyperplanes
// ⟨a_i, x⟩ = b_i, full Kaczmarz sweeps and the homogeneous sweep operators
// Q = P_m⋯P_1 and Q̄ = P_2⋯P_{m−1}. Row indices are 0-based.

#include <cstddef>
#include <vector>

#include "kt/linalg.hpp"
#include "kt/state.hpp"

namespace kt::rowaction {

class SweepSchedule {
 public:
  enum class Kind { Forward, SymmetricPeriod };

  SweepSchedule(Kind kind, std::size_t m);

  Kind kind() const noexcept { return kind_; }
  std::size_t rows() const noexcept { return m_; }
  /// Forward: 0..m−1. SymmetricPeriod: 0..m−1 then m−2 down to 1 (2m−2 entries),
  /// and just row 0 when m = 1.
  const std::vector<std::size_t>& period() const noexcept { return period_; }
  /// Row used by the 1-based step counter k of an unbounded run.
  std::size_t row_at_step(std::size_t k) const;

 private:
  Kind kind_;
  std::size_t m_;
  std::vector<std::size_t> period_;
};

/// x + ((b_i − ⟨a_i,x⟩)/‖a_i‖²)·a_i
Vector project_row(const DenseMatrix& a, std::size_t i, std::span<const double> b, std::span<const double> x);
/// P_i x = x − (⟨a_i,x⟩/‖a_i‖²)·a_i
Vector apply_P(const DenseMatrix& a, std::size_t i, std::span<const double> x);

/// One pass of project_row for i = 0..m−1.
Vector kaczmarz_sweep(const DenseMatrix& a, std::span<const double> b, std::span<const double> x);

struct SymmetricSweep {
  Vector y;    ///< iterate after the full period
  Vector mid;  ///< iterate after the forward half (rows 0..m−1)
};

/// One period of the symmetric schedule (2m−2 projections). m = 1 falls back to kaczmarz_sweep.
Vector symmetric_sweep(const DenseMatrix& a, std::span<const double> b, std::span<const double> x);
SymmetricSweep symmetric_sweep_tapped(const DenseMatrix& a, std::span<const double> b, std::span<const double> x);

/// Applies project_row along `schedule.period()`.
Vector run_schedule(const DenseMatrix& a, std::span<const double> b, std::span<const double> x,
                    const SweepSchedule& schedule);

Vector apply_Q(const DenseMatrix& a, std::span<const double> x);
/// Qᵀ = P_1⋯P_m, i.e. P_m applied first.
Vector apply_Qt(const DenseMatrix& a, std::span<const double> x);
/// Q̄ = P_2⋯P_{m−1} (1-based), applied starting from row m−1. Identity for m ≤ 2.
Vector apply_Qbar(const DenseMatrix& a, std::span<const double> x);

/// Q together with Qᵀ, for power iteration on QᵀQ. Holds a reference to `a`.
LinearOperator sweep_operator(const DenseMatrix& a);

/// A_S with row i = Q_i a_i, Q_i = P_m⋯P_{i+1}.
DenseMatrix projected_rows(const DenseMatrix& a);
/// Ā_S with row i = Q̄_i a_i, Q̄_i = P_2⋯P_{i−1}; rows 1 and m are zero (1-based).
DenseMatrix reverse_projected_rows(const DenseMatrix& a);

IterationState kaczmarz_iterate(const DenseMatrix& a, std::span<const double> b, const IterationState& state);
IterationState symmetric_iterate(const DenseMatrix& a, std::span<const double> b, const IterationState& state);

}  // namespace kt::rowaction
