#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kt {

using Vector = std::vector<double>;

/// Raised when an operation needs a row with positive norm and finds ‖a_i‖² below 1e-300.
class ZeroRowError : public std::runtime_error {
 public:
  explicit ZeroRowError(std::size_t row);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Raised by iterative kernels that exhaust their iteration budget.
class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(const std::string& what, double best_estimate);
  double best_estimate() const noexcept { return best_; }

 private:
  double best_;
};

/// Row-major dense real matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  DenseMatrix transpose() const;
  /// Copy of the rows listed in `keep`, in that order.
  DenseMatrix select_rows(std::span<const std::size_t> keep) const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Kernels. Reductions run left to right in index order so results are
// reproducible bit for bit.
double dot(std::span<const double> x, std::span<const double> y);
/// Euclidean norm with running rescaling (no overflow for |x_i| up to DBL_MAX).
double norm2(std::span<const double> x);
double frobenius_norm(const DenseMatrix& a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
Vector subtract(std::span<const double> x, std::span<const double> y);
Vector add(std::span<const double> x, std::span<const double> y);
Vector scale(double alpha, std::span<const double> x);
bool all_finite(std::span<const double> x);

Vector matvec(const DenseMatrix& a, std::span<const double> x);
/// aᵀ·y without forming the transpose.
Vector matvec_transposed(const DenseMatrix& a, std::span<const double> y);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
/// a·diag(d): column j scaled by d[j].
DenseMatrix scale_columns(const DenseMatrix& a, std::span<const double> d);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

inline constexpr double kZeroRowThreshold = 1e-300;

/// (‖a_1‖², …, ‖a_m‖²). Zero rows are reported, not rejected.
Vector row_norms_squared(const DenseMatrix& a);

/// Throws ZeroRowError for the first row with ‖a_i‖² < 1e-300.
void require_no_zero_rows(const DenseMatrix& a);
std::vector<std::size_t> zero_rows(const DenseMatrix& a);

/// H = AAᵀM with h[i][j] = ⟨a_i,a_j⟩/‖a_j‖². Diagonal entries are exactly 1.
struct RowCorrelationMatrix {
  DenseMatrix h;
  std::size_t size() const noexcept { return h.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return h(i, j); }
};

RowCorrelationMatrix compute_H(const DenseMatrix& a);

struct LsqResult {
  Vector x;
  bool converged = false;
  std::size_t iterations = 0;
  double relative_normal_residual = 0.0;
};

struct LsqOptions {
  double tol = 1e-12;
  /// 0 selects 10·(m+n).
  std::size_t max_iter = 0;
};

/// Minimum-norm least-squares solution A†b by conjugate gradients on the
/// normal equations (CGLS) from x = 0. Iterates stay in R(Aᵀ), so the limit
/// is the minimum-norm solution. Stops when ‖Aᵀ(b−Ax)‖ ≤ tol·‖Aᵀb‖. On
/// budget exhaustion the best iterate is returned with converged = false.
LsqResult min_norm_lsq(const DenseMatrix& a, std::span<const double> b, LsqOptions options = {});

/// P_{N(A)}x0 = x0 − A†(Ax0). Throws NoConvergence if the inner solve fails.
Vector project_nullspace(const DenseMatrix& a, std::span<const double> x0, double tol = 1e-12);

/// A linear map together with its transpose.
struct LinearOperator {
  std::function<Vector(std::span<const double>)> apply;
  std::function<Vector(std::span<const double>)> apply_transpose;
};

struct PowerOptions {
  double tol = 1e-13;
  std::size_t max_iter = 20000;
  unsigned long long seed = 0x5eedULL;
};

/// Largest singular value of `op` restricted to R(Aᵀ) for A = `rowspace_of`.
/// Power iteration on x ↦ opᵀ(op x), with every iterate projected back onto
/// R(Aᵀ). Returns 0 when the restriction annihilates the start vector.
/// Throws NoConvergence if the Rayleigh quotient has not settled after max_iter steps.
double dominant_singular_value(const LinearOperator& op, std::size_t dim, const DenseMatrix& rowspace_of,
                               PowerOptions options = {});

}  // namespace kt
