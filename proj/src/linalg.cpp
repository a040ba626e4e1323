#include "kt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace kt {

ZeroRowError::ZeroRowError(std::size_t row)
    : std::runtime_error("row " + std::to_string(row) + " of the matrix is zero"), row_(row) {}

NoConvergence::NoConvergence(const std::string& what, double best_estimate)
    : std::runtime_error(what), best_(best_estimate) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("DenseMatrix: data length does not match rows*cols");
  }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw std::invalid_argument("DenseMatrix: ragged initializer");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  }
  return out;
}

DenseMatrix DenseMatrix::select_rows(std::span<const std::size_t> keep) const {
  DenseMatrix out(keep.size(), cols_);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    auto src = row(keep[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) {
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : x) {
    if (v == 0.0) continue;
    const double av = std::fabs(v);
    if (!std::isfinite(av)) return av;
    if (scale < av) {
      const double r = scale / av;
      ssq = 1.0 + ssq * r * r;
      scale = av;
    } else {
      const double r = av / scale;
      ssq += r * r;
    }
  }
  return scale * std::sqrt(ssq);
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.data()); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector subtract(std::span<const double> x, std::span<const double> y) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return out;
}

Vector add(std::span<const double> x, std::span<const double> y) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return out;
}

Vector scale(double alpha, std::span<const double> x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = alpha * x[i];
  return out;
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw std::invalid_argument("matvec: shape mismatch");
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
  return out;
}

Vector matvec_transposed(const DenseMatrix& a, std::span<const double> y) {
  if (y.size() != a.rows()) throw std::invalid_argument("matvec_transposed: shape mismatch");
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) axpy(y[i], a.row(i), out);
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double ail = a(i, l);
      if (ail != 0.0) axpy(ail, b.row(l), dst);
    }
  }
  return out;
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("subtract: shape mismatch");
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.data().size(); ++k) out.data()[k] = a.data()[k] - b.data()[k];
  return out;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: shape mismatch");
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.data().size(); ++k) out.data()[k] = a.data()[k] + b.data()[k];
  return out;
}

DenseMatrix scale_columns(const DenseMatrix& a, std::span<const double> d) {
  if (d.size() != a.cols()) throw std::invalid_argument("scale_columns: shape mismatch");
  DenseMatrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] *= d[j];
  }
  return out;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::fabs(a.data()[k] - b.data()[k]));
  return m;
}

Vector row_norms_squared(const DenseMatrix& a) {
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), a.row(i));
  return out;
}

std::vector<std::size_t> zero_rows(const DenseMatrix& a) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (dot(a.row(i), a.row(i)) < kZeroRowThreshold) out.push_back(i);
  }
  return out;
}

void require_no_zero_rows(const DenseMatrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (dot(a.row(i), a.row(i)) < kZeroRowThreshold) throw ZeroRowError(i);
  }
}

RowCorrelationMatrix compute_H(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const Vector norms = row_norms_squared(a);
  for (std::size_t i = 0; i < m; ++i) {
    if (norms[i] < kZeroRowThreshold) throw ZeroRowError(i);
  }
  RowCorrelationMatrix out{DenseMatrix(m, m)};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      // dot(a_i, a_i) is the same expression that produced norms[i], so the diagonal is exactly 1.
      out.h(i, j) = dot(a.row(i), a.row(j)) / norms[j];
    }
  }
  return out;
}

LsqResult min_norm_lsq(const DenseMatrix& a, std::span<const double> b, LsqOptions options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("min_norm_lsq: tol must be positive");
  if (b.size() != a.rows()) throw std::invalid_argument("min_norm_lsq: shape mismatch");
  const std::size_t max_iter = options.max_iter ? options.max_iter : 10 * (a.rows() + a.cols());

  LsqResult result;
  result.x.assign(a.cols(), 0.0);

  Vector r(b.begin(), b.end());
  Vector s = matvec_transposed(a, r);
  const double s0 = norm2(s);
  if (s0 == 0.0) {
    result.converged = true;
    return result;
  }
  Vector p = s;
  double gamma = dot(s, s);
  Vector x = result.x;
  double best = 1.0;

  for (std::size_t it = 1; it <= max_iter; ++it) {
    const Vector q = matvec(a, p);
    const double delta = dot(q, q);
    if (delta == 0.0) break;
    const double alpha = gamma / delta;
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    s = matvec_transposed(a, r);
    const double gamma_next = dot(s, s);
    const double rel = std::sqrt(gamma_next) / s0;
    if (rel < best) {
      best = rel;
      result.x = x;
      result.iterations = it;
      result.relative_normal_residual = rel;
    }
    if (rel <= options.tol) {
      result.converged = true;
      return result;
    }
    const double beta = gamma_next / gamma;
    gamma = gamma_next;
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = s[j] + beta * p[j];
  }
  return result;
}

Vector project_nullspace(const DenseMatrix& a, std::span<const double> x0, double tol) {
  const Vector ax = matvec(a, x0);
  const LsqResult r = min_norm_lsq(a, ax, {tol, 0});
  if (!r.converged) {
    throw NoConvergence("project_nullspace: inner min-norm solve did not converge", r.relative_normal_residual);
  }
  return subtract(x0, r.x);
}

namespace {

Vector project_rowspace(const DenseMatrix& a, std::span<const double> x) {
  const LsqResult r = min_norm_lsq(a, matvec(a, x), {1e-13, 0});
  return r.x;
}

}  // namespace

double dominant_singular_value(const LinearOperator& op, std::size_t dim, const DenseMatrix& rowspace_of,
                               PowerOptions options) {
  if (dim == 0) throw std::invalid_argument("dominant_singular_value: dim must be positive");
  if (rowspace_of.cols() != dim) throw std::invalid_argument("dominant_singular_value: dimension mismatch");

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Vector w(rowspace_of.rows());
  for (double& v : w) v = uniform(rng);

  Vector x = project_rowspace(rowspace_of, matvec_transposed(rowspace_of, w));
  double nx = norm2(x);
  if (nx == 0.0) return 0.0;
  for (double& v : x) v /= nx;

  double lambda_prev = -1.0;
  double lambda = 0.0;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    Vector y = op.apply_transpose(op.apply(x));
    lambda = std::max(0.0, dot(x, y));
    if (std::fabs(lambda - lambda_prev) <= options.tol * std::max(lambda, 1e-15)) {
      return std::sqrt(lambda);
    }
    lambda_prev = lambda;
    y = project_rowspace(rowspace_of, y);
    const double ny = norm2(y);
    if (ny == 0.0) return 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) x[j] = y[j] / ny;
  }
  throw NoConvergence("dominant_singular_value: Rayleigh quotient did not settle", std::sqrt(lambda));
}

}  // namespace kt
