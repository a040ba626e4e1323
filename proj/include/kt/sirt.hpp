#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "kt/linalg.hpp"
#include "kt/state.hpp"

namespace kt::sirt {

enum class Kind { Landweber, Cimmino, CAV, DROP, SART };

std::string_view to_string(Kind kind);

/// How SART forms its row and column weights.
enum class SartWeights {
  AbsoluteSum,  ///< Σ|a_ij| (standard SART)
  SignedSum,    ///< Σ a_ij, literal row/column sums
};

class DegenerateWeightError : public std::runtime_error {
 public:
  DegenerateWeightError(std::string_view what, std::size_t index);
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

struct SirtOptions {
  SartWeights sart_weights = SartWeights::AbsoluteSum;
  /// A zero weight sum gives a zero entry (component frozen / row ignored)
  /// instead of DegenerateWeightError.
  bool zero_weight_fallback = true;
  double lambda = 1.0;
};

/// x_{k+1} = x_k + λ·T·Aᵀ·M·(b − Ax_k) with diagonal T (n) and M (m).
struct SirtVariant {
  Kind kind = Kind::Landweber;
  Vector t_diag;
  Vector m_diag;
  double lambda = 1.0;
};

/// Landweber: T = I, M = I.  Cimmino: T = I, M_i = 1/(m‖a_i‖²).
/// CAV: T = I, M_i = 1/Σ_j nz_j a_ij².  DROP: T_j = 1/nz_j, M_i = 1/‖a_i‖².
/// SART: T_j = 1/(column j weight), M_i = 1/(row i weight).
/// nz_j counts the nonzeros of column j. Throws ZeroRowError.
SirtVariant build_sirt(const DenseMatrix& a, Kind kind, SirtOptions options = {});

Vector sirt_step(const SirtVariant& v, const DenseMatrix& a, std::span<const double> b, std::span<const double> x);
IterationState sirt_iterate(const SirtVariant& v, const DenseMatrix& a, std::span<const double> b,
                            const IterationState& state);

// CGMN: conjugate gradients on (I − Q_ds)x = c, where Q_ds applies the
// forward sweep P_1…P_m and then the backward sweep P_m…P_1 (= QᵀQ), and c is
// one double sweep of (b, x = 0). The operator is symmetric positive
// semidefinite and every step stays matrix-free.

enum class CgmnStatus { Converged, Breakdown, Stagnation, MaxIterations };

std::string_view to_string(CgmnStatus status);

struct CgmnOptions {
  std::size_t max_iter = 100;
  /// Stop once ‖r_k‖ ≤ tol·‖c‖. 0 disables this test.
  double tol = 0.0;
  /// Stop after this many iterations without a new smallest residual.
  std::size_t stagnation_window = 10;
};

struct CgmnResult {
  IterationState state;  ///< final iterate; state.k is the number of CG steps taken
  CgmnStatus status = CgmnStatus::MaxIterations;
  std::size_t breakdown_step = 0;  ///< step whose curvature ⟨d,(I−Q_ds)d⟩ fell to 1e-300 or below
  Vector residual_norms;           ///< ‖r_k‖ for k = 0..state.k
};

/// Called after every CG step with the new iterate.
using CgmnObserver = std::function<void(const IterationState&)>;

CgmnResult cgmn_solve(const DenseMatrix& a, std::span<const double> b, std::span<const double> x0,
                      CgmnOptions options = {}, const CgmnObserver& observer = {});

/// Hyperplane projections over rows 0..m−1 followed by m−1..0.
Vector double_sweep(const DenseMatrix& a, std::span<const double> b, std::span<const double> x);

}  // namespace kt::sirt
