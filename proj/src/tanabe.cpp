#include "kt/tanabe.hpp"

#include <stdexcept>
#include <vector>

namespace kt::tanabe {

CompatibleMatrixC build_C(const DenseMatrix& a) { return build_C(compute_H(a)); }

CompatibleMatrixC build_C(const RowCorrelationMatrix& h) {
  const std::size_t m = h.size();
  DenseMatrix c = DenseMatrix::identity(m);
  // Left-multiplies by H_k for k = m down to 2 (1-based), i.e. row_{i} −= h_{i,k}·row_k
  // for every row i above k. Row k is final when it is used.
  for (std::size_t k = m; k-- > 1;) {
    for (std::size_t i = k; i-- > 0;) {
      const double factor = -h(i, k);
      for (std::size_t j = m; j-- > k;) c(i, j) += factor * c(k, j);
    }
  }
  return {std::move(c)};
}

CompatibleMatrixC build_C_by_factorization(const RowCorrelationMatrix& h) {
  const std::size_t m = h.size();
  DenseMatrix omega = DenseMatrix::identity(m);
  // Ω ← Ω·E(j, i(−h_{j,i})) adds −h_{j,i}·(column j) to column i.
  for (std::size_t i = 1; i < m; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double factor = -h(j, i);
      for (std::size_t r = 0; r < m; ++r) omega(r, i) += factor * omega(r, j);
    }
  }
  return {std::move(omega)};
}

CompatibleMatrixChat build_Chat(const DenseMatrix& a) { return build_Chat(compute_H(a)); }

CompatibleMatrixChat build_Chat(const RowCorrelationMatrix& h) {
  const std::size_t m = h.size();
  DenseMatrix c = DenseMatrix::identity(m);
  if (m >= 3) {
    // k ascends so that row k holds its final coefficients before rows below
    // it read from it.
    for (std::size_t k = 1; k + 1 < m; ++k) {
      for (std::size_t i = m - 2; i > k; --i) {
        const double factor = -h(i, k);
        for (std::size_t j = k + 1; j-- > 1;) c(i, j) += factor * c(k, j);
      }
    }
  }
  c(0, 0) = 0.0;
  c(m - 1, m - 1) = 0.0;
  return {std::move(c)};
}

CompatibleMatrixChat build_Chat_by_factorization(const RowCorrelationMatrix& h) {
  const std::size_t m = h.size();
  if (m == 0) throw std::invalid_argument("build_Chat_by_factorization: empty H");
  DenseMatrix omega = DenseMatrix::identity(m);
  for (std::size_t i = m - 1; i-- > 1;) {
    for (std::size_t j = i + 1; j + 1 < m; ++j) {
      const double factor = -h(j, i);
      for (std::size_t r = 0; r < m; ++r) omega(r, i) += factor * omega(r, j);
    }
  }
  // Every Ê factor carries zeros at (1,1) and (m,m); they commute with the
  // eliminations and collapse into one diagonal mask.
  omega(0, 0) = 0.0;
  omega(m - 1, m - 1) = 0.0;
  return {std::move(omega)};
}

double d_entry_bruteforce(const RowCorrelationMatrix& h, std::size_t i, std::size_t j) {
  if (h.size() > kBruteforceMaxRows) {
    throw std::invalid_argument("d_entry_bruteforce: index-set enumeration is capped at 12 rows");
  }
  if (i >= h.size() || j >= h.size()) throw std::out_of_range("d_entry_bruteforce: index out of range");
  if (i == j) return 1.0;

  const bool ascending = i < j;
  const std::size_t gap = ascending ? j - i : i - j;
  const std::size_t inner = gap - 1;
  double total = 0.0;
  std::vector<std::size_t> path;
  for (std::size_t mask = 0; mask < (std::size_t{1} << inner); ++mask) {
    path.clear();
    path.push_back(i);
    for (std::size_t t = 0; t < inner; ++t) {
      if (mask & (std::size_t{1} << t)) path.push_back(ascending ? i + 1 + t : i - 1 - t);
    }
    path.push_back(j);
    double prod = 1.0;
    for (std::size_t s = 0; s + 1 < path.size(); ++s) prod *= h(path[s], path[s + 1]);
    const std::size_t v = path.size();
    total += (v % 2 == 0 ? -1.0 : 1.0) * prod;
  }
  return total;
}

CompatibleMatrixCbar compose_Cbar(const CompatibleMatrixC& c, const CompatibleMatrixChat& chat, const DenseMatrix& a,
                                  std::span<const double> m_diag) {
  const std::size_t m = a.rows();
  if (c.value.rows() != m || c.value.cols() != m || chat.value.rows() != m || chat.value.cols() != m ||
      m_diag.size() != m) {
    throw std::invalid_argument("compose_Cbar: shape mismatch");
  }
  const DenseMatrix ca = matmul(c.value, a);
  const DenseMatrix caat = matmul(ca, a.transpose());
  const DenseMatrix correction = matmul(scale_columns(caat, m_diag), chat.value);
  return {subtract(add(chat.value, c.value), correction)};
}

Vector inverse_row_norms(const DenseMatrix& a) {
  Vector out = row_norms_squared(a);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < kZeroRowThreshold) throw ZeroRowError(i);
    out[i] = 1.0 / out[i];
  }
  return out;
}

PrecomputedIteration make_iteration(const DenseMatrix& a, const DenseMatrix& compatible,
                                    PrecomputedIteration::Kind kind, bool with_ga) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (compatible.rows() != m || compatible.cols() != m) throw std::invalid_argument("make_iteration: shape mismatch");
  const Vector minv = inverse_row_norms(a);
  const DenseMatrix xa = matmul(compatible, a);
  PrecomputedIteration p;
  p.kind = kind;
  p.g = DenseMatrix(n, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t col = 0; col < n; ++col) p.g(col, i) = xa(i, col) * minv[i];
  }
  if (with_ga) p.ga = matmul(p.g, a);
  return p;
}

PrecomputedIteration precompute_kt(const DenseMatrix& a, bool with_ga) {
  const auto c = build_C(compute_H(a));
  return make_iteration(a, c.value, PrecomputedIteration::Kind::KaczmarzTanabe, with_ga);
}

PrecomputedIteration precompute_skt(const DenseMatrix& a, bool with_ga) {
  const RowCorrelationMatrix h = compute_H(a);
  const auto c = build_C(h);
  const auto chat = build_Chat(h);
  const auto cbar = compose_Cbar(c, chat, a, inverse_row_norms(a));
  return make_iteration(a, cbar.value, PrecomputedIteration::Kind::SymmetricKaczmarzTanabe, with_ga);
}

Vector apply_iteration(const PrecomputedIteration& p, const DenseMatrix& a, std::span<const double> b,
                       std::span<const double> y) {
  if (y.size() != p.n() || b.size() != p.m()) throw std::invalid_argument("apply_iteration: shape mismatch");
  Vector out(y.begin(), y.end());
  if (p.ga) {
    const Vector gb = matvec(p.g, b);
    const Vector gay = matvec(*p.ga, y);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += gb[j] - gay[j];
    return out;
  }
  const Vector residual = subtract(b, matvec(a, y));
  const Vector step = matvec(p.g, residual);
  axpy(1.0, step, out);
  return out;
}

IterationState kt_iterate(const PrecomputedIteration& p, const DenseMatrix& a, std::span<const double> b,
                          const IterationState& state) {
  if (p.kind != PrecomputedIteration::Kind::KaczmarzTanabe) {
    throw std::invalid_argument("kt_iterate: iteration was not built from C");
  }
  return IterationState{apply_iteration(p, a, b, state.x), state.k + 1, state.history};
}

IterationState skt_iterate(const PrecomputedIteration& p, const DenseMatrix& a, std::span<const double> b,
                           const IterationState& state) {
  if (p.kind != PrecomputedIteration::Kind::SymmetricKaczmarzTanabe) {
    throw std::invalid_argument("skt_iterate: iteration was not built from C̄");
  }
  return IterationState{apply_iteration(p, a, b, state.x), state.k + 1, state.history};
}

Vector skt_two_phase(const PrecomputedIteration& forward, const PrecomputedIteration& backward, const DenseMatrix& a,
                     std::span<const double> b, std::span<const double> y) {
  const Vector mid = apply_iteration(forward, a, b, y);
  return apply_iteration(backward, a, b, mid);
}

}  // namespace kt::tanabe
