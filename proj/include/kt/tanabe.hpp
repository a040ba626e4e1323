#pragma once

// Standard form of the Kaczmarz-Tanabe and symmetric Kaczmarz-Tanabe
// iterations.
//
// One Kaczmarz sweep over rows 1..m maps y to y + AᵀCᵀM(b − Ay), where M =
// diag(1/‖a_i‖²) and C is the unit upper triangular "compatible matrix" with
// A_S = CA (row i of A_S is a_i projected by the rows after it). The
// symmetric sweep 1..m, m−1..2 has the same shape with C̄ = Ĉ + C − CAAᵀMĈ,
// where Ĉ is the lower triangular compatible matrix of the backward half.
// Once C or C̄ is known the sweep costs two dense products and can be reused
// for any right-hand side.
//
// Row and column indices are 0-based throughout.

#include <cstddef>
#include <optional>

#include "kt/linalg.hpp"
#include "kt/state.hpp"

namespace kt::tanabe {

/// Unit upper triangular C with A_S = CA.
struct CompatibleMatrixC {
  DenseMatrix value;
};

/// Ĉ with Ā_S = ĈA. Rows 0 and m−1 and column 0 are zero, the diagonal is 1
/// elsewhere and the strict upper triangle is zero.
struct CompatibleMatrixChat {
  DenseMatrix value;
};

/// C̄ = Ĉ + C − CAAᵀMĈ, so that I − AᵀC̄ᵀMA = Q̄Q.
struct CompatibleMatrixCbar {
  DenseMatrix value;
};

/// C by the triple loop that eliminates rows from the last one upwards,
/// consuming h entries from compute_H. Throws ZeroRowError.
CompatibleMatrixC build_C(const DenseMatrix& a);
CompatibleMatrixC build_C(const RowCorrelationMatrix& h);

/// C as the ordered product H_1H_2⋯H_m of elimination factors
/// H_i = ∏_{j<i} E(j, i(−h_{j,i})), multiplied left to right as column updates.
CompatibleMatrixC build_C_by_factorization(const RowCorrelationMatrix& h);

/// Ĉ by row elimination over the backward half of the symmetric period.
/// Throws ZeroRowError. Requires m ≥ 1 (m ≤ 2 gives the zero matrix).
CompatibleMatrixChat build_Chat(const DenseMatrix& a);
CompatibleMatrixChat build_Chat(const RowCorrelationMatrix& h);

/// Ĉ as Ĥ_{m−1}⋯Ĥ_2 with Ĥ_i = ∏_{j=i+1}^{m−1} Ê(j, i(−h_{j,i})) and the
/// (1,1), (m,m) entries of every factor zeroed.
CompatibleMatrixChat build_Chat_by_factorization(const RowCorrelationMatrix& h);

/// Signed path sum over the index sets between i and j:
///   Σ_{v≥2} (−1)^{v−1} Σ_{paths i=p_1,…,p_v=j monotone} ∏ h_{p_s,p_{s+1}}.
/// i < j walks upward (entries of C), i > j walks downward (entries of Ĉ).
/// Exponential in |i−j|; rejects h larger than 12×12.
double d_entry_bruteforce(const RowCorrelationMatrix& h, std::size_t i, std::size_t j);

inline constexpr std::size_t kBruteforceMaxRows = 12;

/// C̄ = Ĉ + C − ((C·A)·Aᵀ)·M·Ĉ, evaluated left to right with M as a diagonal scaling.
CompatibleMatrixCbar compose_Cbar(const CompatibleMatrixC& c, const CompatibleMatrixChat& chat, const DenseMatrix& a,
                                  std::span<const double> m_diag);

/// G = AᵀXᵀM (n×m) for a compatible matrix X, optionally with GA = G·A (n×n).
/// iterate(y) = y + G(b − Ay).
struct PrecomputedIteration {
  enum class Kind { KaczmarzTanabe, SymmetricKaczmarzTanabe, BackwardHalf };

  Kind kind = Kind::KaczmarzTanabe;
  DenseMatrix g;
  std::optional<DenseMatrix> ga;

  std::size_t n() const noexcept { return g.rows(); }
  std::size_t m() const noexcept { return g.cols(); }
};

/// M = diag(1/‖a_i‖²) as a vector. Throws ZeroRowError.
Vector inverse_row_norms(const DenseMatrix& a);

PrecomputedIteration make_iteration(const DenseMatrix& a, const DenseMatrix& compatible,
                                    PrecomputedIteration::Kind kind, bool with_ga = false);

/// Builds C (and G from it).
PrecomputedIteration precompute_kt(const DenseMatrix& a, bool with_ga = false);
/// Builds C, Ĉ and C̄ (and G from C̄).
PrecomputedIteration precompute_skt(const DenseMatrix& a, bool with_ga = false);

/// y + G(b − Ay), or y + Gb − (GA)y when GA is stored.
Vector apply_iteration(const PrecomputedIteration& p, const DenseMatrix& a, std::span<const double> b,
                       std::span<const double> y);

/// One Kaczmarz-Tanabe step; `p` must come from C.
IterationState kt_iterate(const PrecomputedIteration& p, const DenseMatrix& a, std::span<const double> b,
                          const IterationState& state);
/// One symmetric Kaczmarz-Tanabe step; `p` must come from C̄.
IterationState skt_iterate(const PrecomputedIteration& p, const DenseMatrix& a, std::span<const double> b,
                           const IterationState& state);

/// The two-phase form of one symmetric step: ȳ = y + AᵀCᵀM(b − Ay), then
/// ȳ + AᵀĈᵀM(b − Aȳ). `forward` comes from C, `backward` from Ĉ.
Vector skt_two_phase(const PrecomputedIteration& forward, const PrecomputedIteration& backward, const DenseMatrix& a,
                     std::span<const double> b, std::span<const double> y);

}  // namespace kt::tanabe
