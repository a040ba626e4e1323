#include "kt/sirt.hpp"

#include <cmath>
#include <limits>

namespace kt::sirt {

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::Landweber: return "landweber";
    case Kind::Cimmino: return "cimmino";
    case Kind::CAV: return "cav";
    case Kind::DROP: return "drop";
    case Kind::SART: return "sart";
  }
  return "unknown";
}

std::string_view to_string(CgmnStatus status) {
  switch (status) {
    case CgmnStatus::Converged: return "converged";
    case CgmnStatus::Breakdown: return "breakdown";
    case CgmnStatus::Stagnation: return "stagnation";
    case CgmnStatus::MaxIterations: return "max-iterations";
  }
  return "unknown";
}

DegenerateWeightError::DegenerateWeightError(std::string_view what, std::size_t index)
    : std::runtime_error(std::string(what) + " weight " + std::to_string(index) + " is zero"), index_(index) {}

namespace {

double reciprocal_or_fallback(double w, std::string_view what, std::size_t index, const SirtOptions& options) {
  if (w != 0.0) return 1.0 / w;
  if (!options.zero_weight_fallback) throw DegenerateWeightError(what, index);
  return 0.0;
}

}  // namespace

SirtVariant build_sirt(const DenseMatrix& a, Kind kind, SirtOptions options) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const Vector norms = row_norms_squared(a);
  for (std::size_t i = 0; i < m; ++i) {
    if (norms[i] < kZeroRowThreshold) throw ZeroRowError(i);
  }

  std::vector<double> nz(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) nz[j] += a(i, j) != 0.0 ? 1.0 : 0.0;
  }

  SirtVariant v;
  v.kind = kind;
  v.lambda = options.lambda;
  v.t_diag.assign(n, 1.0);
  v.m_diag.assign(m, 1.0);

  switch (kind) {
    case Kind::Landweber:
      break;
    case Kind::Cimmino:
      for (std::size_t i = 0; i < m; ++i) v.m_diag[i] = 1.0 / (static_cast<double>(m) * norms[i]);
      break;
    case Kind::CAV:
      for (std::size_t i = 0; i < m; ++i) {
        double w = 0.0;
        for (std::size_t j = 0; j < n; ++j) w += nz[j] * a(i, j) * a(i, j);
        v.m_diag[i] = 1.0 / w;
      }
      break;
    case Kind::DROP:
      for (std::size_t j = 0; j < n; ++j) v.t_diag[j] = reciprocal_or_fallback(nz[j], "DROP column", j, options);
      for (std::size_t i = 0; i < m; ++i) v.m_diag[i] = 1.0 / norms[i];
      break;
    case Kind::SART: {
      const bool absolute = options.sart_weights == SartWeights::AbsoluteSum;
      std::vector<double> col(n, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double v_ij = absolute ? std::fabs(a(i, j)) : a(i, j);
          row += v_ij;
          col[j] += v_ij;
        }
        v.m_diag[i] = reciprocal_or_fallback(row, "SART row", i, options);
      }
      for (std::size_t j = 0; j < n; ++j) v.t_diag[j] = reciprocal_or_fallback(col[j], "SART column", j, options);
      break;
    }
  }
  return v;
}

Vector sirt_step(const SirtVariant& v, const DenseMatrix& a, std::span<const double> b, std::span<const double> x) {
  Vector r = subtract(b, matvec(a, x));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] *= v.m_diag[i];
  const Vector g = matvec_transposed(a, r);
  Vector out(x.begin(), x.end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += v.lambda * v.t_diag[j] * g[j];
  return out;
}

IterationState sirt_iterate(const SirtVariant& v, const DenseMatrix& a, std::span<const double> b,
                            const IterationState& state) {
  return IterationState{sirt_step(v, a, b, state.x), state.k + 1, state.history};
}

namespace {

void double_sweep_inplace(const DenseMatrix& a, std::span<const double> b, std::span<const double> norms,
                          std::span<double> x) {
  const std::size_t m = a.rows();
  auto project = [&](std::size_t i) {
    const double rhs = b.empty() ? 0.0 : b[i];
    const double t = (rhs - dot(a.row(i), x)) / norms[i];
    axpy(t, a.row(i), x);
  };
  for (std::size_t i = 0; i < m; ++i) project(i);
  for (std::size_t i = m; i-- > 0;) project(i);
}

}  // namespace

Vector double_sweep(const DenseMatrix& a, std::span<const double> b, std::span<const double> x) {
  const Vector norms = row_norms_squared(a);
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (norms[i] < kZeroRowThreshold) throw ZeroRowError(i);
  }
  Vector out(x.begin(), x.end());
  double_sweep_inplace(a, b, norms, out);
  return out;
}

CgmnResult cgmn_solve(const DenseMatrix& a, std::span<const double> b, std::span<const double> x0,
                      CgmnOptions options, const CgmnObserver& observer) {
  const std::size_t n = a.cols();
  const Vector norms = row_norms_squared(a);
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (norms[i] < kZeroRowThreshold) throw ZeroRowError(i);
  }
  // B x = x − Q_ds x
  auto apply_B = [&](std::span<const double> x) {
    Vector qx(x.begin(), x.end());
    double_sweep_inplace(a, {}, norms, qx);
    return subtract(x, qx);
  };

  Vector c(n, 0.0);
  double_sweep_inplace(a, b, norms, c);
  const double c_norm = norm2(c);
  const double floor = 32.0 * std::numeric_limits<double>::epsilon() * c_norm;

  CgmnResult result;
  result.state = IterationState::start(Vector(x0.begin(), x0.end()));
  Vector x(x0.begin(), x0.end());
  Vector r = subtract(c, apply_B(x));
  double r_norm = norm2(r);
  result.residual_norms.push_back(r_norm);

  if ((options.tol > 0.0 && r_norm <= options.tol * c_norm) || r_norm <= floor) {
    result.status = CgmnStatus::Converged;
    return result;
  }

  Vector d = r;
  double rr = dot(r, r);
  double best = r_norm;
  Vector best_x = x;
  std::size_t since_best = 0;

  for (std::size_t k = 1; k <= options.max_iter; ++k) {
    const Vector bd = apply_B(d);
    const double curvature = dot(d, bd);
    if (curvature <= 1e-300) {
      result.status = CgmnStatus::Breakdown;
      result.breakdown_step = k;
      result.state.x = best_x;
      return result;
    }
    const double alpha = rr / curvature;
    axpy(alpha, d, x);
    axpy(-alpha, bd, r);
    const double rr_next = dot(r, r);
    r_norm = norm2(r);
    result.residual_norms.push_back(r_norm);
    result.state.x = x;
    result.state.k = k;
    if (observer) observer(result.state);

    if (options.tol > 0.0 && r_norm <= options.tol * c_norm) {
      result.status = CgmnStatus::Converged;
      return result;
    }
    if (r_norm < best) {
      best = r_norm;
      best_x = x;
      since_best = 0;
    } else if (++since_best >= options.stagnation_window) {
      result.status = CgmnStatus::Stagnation;
      result.state.x = best_x;
      return result;
    }
    if (r_norm <= floor) {
      result.status = CgmnStatus::Stagnation;
      return result;
    }
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t j = 0; j < n; ++j) d[j] = r[j] + beta * d[j];
  }
  result.status = CgmnStatus::MaxIterations;
  return result;
}

}  // namespace kt::sirt
