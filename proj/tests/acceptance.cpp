// Acceptance suite: prints one PASS/FAIL line per criterion and exits with
// the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "kt/bench.hpp"
#include "kt/problems.hpp"
#include "kt/rowaction.hpp"
#include "kt/sirt.hpp"
#include "kt/tanabe.hpp"
#include "oracles.hpp"

using namespace kt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// The 50 random matrices shared by criteria 1, 2 and 4.
std::vector<DenseMatrix> random_suite() {
  std::mt19937_64 rng(20240601);
  std::vector<DenseMatrix> out;
  while (out.size() < 50) {
    const std::size_t m = 1 + rng() % 20;
    const std::size_t n = 1 + rng() % 15;
    DenseMatrix a = oracle::random_matrix(rng, m, n);
    if (zero_rows(a).empty()) out.push_back(std::move(a));
  }
  return out;
}

problems::ScanGeometry desk_geometry() {
  problems::ScanGeometry g;
  g.n_angles = 12;
  g.n_rays = 17;
  g.grid = 16;
  return g;
}

Outcome decomposition(const std::vector<DenseMatrix>& suite) {
  const auto t0 = Clock::now();
  double worst_c = 0.0;
  double worst_chat = 0.0;
  for (const DenseMatrix& a : suite) {
    const DenseMatrix as = rowaction::projected_rows(a);
    const DenseMatrix bar_as = rowaction::reverse_projected_rows(a);
    const RowCorrelationMatrix h = compute_H(a);
    const double rc = frobenius_norm(subtract(as, matmul(tanabe::build_C(h).value, a))) / frobenius_norm(as);
    const double rh = frobenius_norm(subtract(bar_as, matmul(tanabe::build_Chat(h).value, a))) /
                      (1.0 + frobenius_norm(bar_as));
    worst_c = std::max(worst_c, rc);
    worst_chat = std::max(worst_chat, rh);
  }
  const double secs = seconds_since(t0);
  return {worst_c <= 1e-10 && worst_chat <= 1e-10 && secs < 5.0,
          "max rel ||A_S-CA|| = " + fmt("%.2e", worst_c) + ", max ||Abar_S-ChatA||/(1+||Abar_S||) = " +
              fmt("%.2e", worst_chat) + ", " + fmt("%.3f", secs) + " s"};
}

Outcome factorization(const std::vector<DenseMatrix>& suite) {
  double worst_fact = 0.0;
  double worst_brute = 0.0;
  for (const DenseMatrix& a : suite) {
    const RowCorrelationMatrix h = compute_H(a);
    const DenseMatrix c = tanabe::build_C(h).value;
    const DenseMatrix c2 = tanabe::build_C_by_factorization(h).value;
    const DenseMatrix d = tanabe::build_Chat(h).value;
    const DenseMatrix d2 = tanabe::build_Chat_by_factorization(h).value;
    const std::size_t m = a.rows();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        worst_fact = std::max(worst_fact, std::fabs(c(i, j) - c2(i, j)) / (1.0 + std::fabs(c(i, j))));
        worst_fact = std::max(worst_fact, std::fabs(d(i, j) - d2(i, j)) / (1.0 + std::fabs(d(i, j))));
      }
    }
    if (m > 8) continue;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        worst_brute = std::max(worst_brute, std::fabs(c(i, j) - tanabe::d_entry_bruteforce(h, i, j)));
      }
    }
    for (std::size_t i = 2; i + 1 < m; ++i) {
      for (std::size_t j = 1; j < i; ++j) {
        worst_brute = std::max(worst_brute, std::fabs(d(i, j) - tanabe::d_entry_bruteforce(h, i, j)));
      }
    }
  }
  return {worst_fact <= 1e-12 && worst_brute <= 1e-10,
          "factorization diff " + fmt("%.2e", worst_fact) + ", index-set diff " + fmt("%.2e", worst_brute)};
}

Outcome sweep_equivalence() {
  std::mt19937_64 rng(777);
  std::vector<std::pair<DenseMatrix, Vector>> systems;
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = 2 + rng() % 15;
    const std::size_t n = 2 + rng() % 12;
    DenseMatrix a = oracle::random_matrix(rng, m, n);
    Vector b = matvec(a, oracle::random_vector(rng, n));
    systems.emplace_back(std::move(a), std::move(b));
  }
  const auto tp = problems::tanabe_problem();
  systems.emplace_back(tp.a, tp.b);

  double worst = 0.0;
  for (const auto& [a, b] : systems) {
    const auto kt_it = tanabe::precompute_kt(a);
    const auto skt_it = tanabe::precompute_skt(a);
    const Vector y0 = a.cols() == 4 && a.rows() == 6 ? Vector{7, 6, 10, 6} : oracle::random_vector(rng, a.cols());
    auto state = IterationState::start(y0);
    Vector chained = y0;
    for (std::size_t i = 0; i < a.rows(); ++i) chained = rowaction::project_row(a, i, b, chained);
    worst = std::max(worst, oracle::rel_diff(tanabe::kt_iterate(kt_it, a, b, state).x, chained));

    const rowaction::SweepSchedule sym(rowaction::SweepSchedule::Kind::SymmetricPeriod, a.rows());
    Vector scheduled = y0;
    for (std::size_t i : sym.period()) scheduled = rowaction::project_row(a, i, b, scheduled);
    worst = std::max(worst, oracle::rel_diff(tanabe::skt_iterate(skt_it, a, b, state).x, scheduled));
  }
  return {worst <= 1e-10, "max relative difference " + fmt("%.2e", worst) + " over 21 systems"};
}

Outcome iteration_identity(const std::vector<DenseMatrix>& suite) {
  std::mt19937_64 rng(4242);
  double worst = 0.0;
  for (const DenseMatrix& a : suite) {
    const RowCorrelationMatrix h = compute_H(a);
    const auto cbar = tanabe::compose_Cbar(tanabe::build_C(h), tanabe::build_Chat(h), a, tanabe::inverse_row_norms(a));
    const auto it =
        tanabe::make_iteration(a, cbar.value, tanabe::PrecomputedIteration::Kind::SymmetricKaczmarzTanabe, true);
    for (int r = 0; r < 20; ++r) {
      const Vector v = oracle::random_vector(rng, a.cols());
      const Vector lhs = subtract(v, matvec(*it.ga, v));
      const Vector rhs = rowaction::apply_Qbar(a, rowaction::apply_Q(a, v));
      worst = std::max(worst, norm2(subtract(lhs, rhs)));
    }
  }
  return {worst <= 1e-10, "max ||(I - A^T Cbar^T M A)v - Qbar Q v|| = " + fmt("%.2e", worst)};
}

Outcome tanabe_values() {
  const auto p = problems::tanabe_problem();
  const Vector x0{7, 6, 10, 6};
  const auto ctx = bench::ExperimentContext::prepare(p, x0);
  const Vector xi{-2.0 / 3, 1, -2.0 / 3, 1};
  double pn_err = 0.0;
  double xd_err = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    pn_err = std::max(pn_err, std::fabs(ctx.nullspace_part[j] - 3.0 / 13 * xi[j]));
    xd_err = std::max(xd_err, std::fabs(ctx.x_dagger[j] - (j % 2 == 0 ? 15.0 : 10.0) / 13));
  }
  double col_err = 0.0;
  for (bench::Method m : bench::kAllMethods) {
    for (const auto& r : bench::run_method(ctx, m, 50).records) {
      col_err = std::max(col_err, std::fabs(r.err_xstar - r.err_shifted));
    }
  }
  return {pn_err <= 1e-10 && xd_err <= 1e-10 && col_err <= 1e-10,
          "P_N x0 err " + fmt("%.2e", pn_err) + ", x-dagger err " + fmt("%.2e", xd_err) +
              ", max |err_xstar - err_shifted| " + fmt("%.2e", col_err)};
}

// Errors are propagated with the homogeneous iteration e ← e − G(Ae), the
// exact linear map every kt/skt step applies to y − (x† + P_N x0). Forming
// the error by subtracting that target from the iterate instead adds ~1e-15
// of cancellation noise per entry, which swamps the 1e-8 slack once ‖P₁e‖
// drops near 1e-7 because the skt bound is attained asymptotically.
Outcome rate_bounds() {
  const auto t0 = Clock::now();
  const auto p = problems::tanabe_problem();
  const double sigma = oracle::sweep_contraction(oracle::to_eigen(p.a));
  const auto kt_it = tanabe::precompute_kt(p.a);
  const auto skt_it = tanabe::precompute_skt(p.a);
  const Vector zero_b(p.a.rows(), 0.0);
  bool ok = sigma > 0.0 && sigma < 1.0;
  std::size_t checks = 0;
  std::size_t iterate_violations = 0;
  std::string where;
  for (const Vector& x0 : {Vector{7, 6, 10, 6}, Vector{0, 0, 0, 0}, Vector{-3, 2.5, 0.1, 9}}) {
    const auto ctx = bench::ExperimentContext::prepare(p, x0);
    std::vector<Vector> kt_err{subtract(x0, ctx.shifted_target)};
    std::vector<Vector> skt_err = kt_err;
    Vector w = x0;
    for (int k = 0; k < 200; ++k) {
      kt_err.push_back(tanabe::apply_iteration(kt_it, p.a, zero_b, kt_err.back()));
      skt_err.push_back(tanabe::apply_iteration(skt_it, p.a, zero_b, skt_err.back()));
      // Same bound evaluated on actual iterates, reported for reference.
      const double before = norm2(rowaction::apply_P(p.a, 0, subtract(w, ctx.shifted_target)));
      w = tanabe::apply_iteration(skt_it, p.a, p.b, w);
      const double after = norm2(rowaction::apply_P(p.a, 0, subtract(w, ctx.shifted_target)));
      if (before > 1e-8 && after > (sigma * sigma + 1e-8) * before) ++iterate_violations;
    }
    for (std::size_t k = 0; k + 2 < kt_err.size(); ++k) {
      const double ek = norm2(kt_err[k]);
      if (ek > 1e-8) {
        ++checks;
        if (norm2(kt_err[k + 1]) > (sigma + 1e-8) * ek) {
          ok = false;
          where += " kt@" + std::to_string(k);
        }
      }
      const double p1k = norm2(rowaction::apply_P(p.a, 0, skt_err[k]));
      if (norm2(skt_err[k]) > 1e-8 && p1k > 0.0) {
        ++checks;
        if (norm2(rowaction::apply_P(p.a, 0, skt_err[k + 1])) > (sigma * sigma + 1e-8) * p1k) {
          ok = false;
          where += " skt-P1@" + std::to_string(k);
        }
      }
      const double sk = norm2(skt_err[k]);
      if (sk > 1e-8) {
        ++checks;
        const double slack = 1e-12 * sk;
        const bool first = norm2(skt_err[k + 1]) < sigma * sk + slack;
        const bool second = norm2(skt_err[k + 2]) < sigma * sigma * sk + slack;
        if (!first && !second) {
          ok = false;
          where += " either-or@" + std::to_string(k);
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 1.0;
  return {ok, "sigma = " + fmt("%.16f", sigma) + ", " + std::to_string(checks) + " inequalities, " +
                  fmt("%.3f", secs) + " s" + (where.empty() ? "" : ", violated at" + where) +
                  "; P1 bound on raw iterates exceeded " + std::to_string(iterate_violations) +
                  " times (rounding floor)"};
}

Outcome ordering() {
  const auto ctx = bench::ExperimentContext::prepare(problems::tanabe_problem(), Vector{7, 6, 10, 6});
  const auto kt = bench::run_method(ctx, bench::Method::KT, 200);
  const auto skt = bench::run_method(ctx, bench::Method::SKT, 200);
  const auto kt2 = bench::run_method(ctx, bench::Method::KT2, 200);
  std::string violations;
  std::size_t count = 0;
  std::size_t checked = 0;
  for (std::size_t k = 0; k < kt.records.size(); ++k) {
    const double a = kt2.records[k].err_shifted;
    const double b = skt.records[k].err_shifted;
    const double c = kt.records[k].err_shifted;
    if (a < 1e-10 && b < 1e-10 && c < 1e-10) break;
    ++checked;
    // A pair is compared while at least one side is above the 1e-10 floor.
    const bool lower_ok = std::max(a, b) < 1e-10 || a <= b;
    const bool upper_ok = std::max(b, c) < 1e-10 || b <= c;
    if (!(lower_ok && upper_ok)) {
      if (++count <= 3) {
        violations += " k=" + std::to_string(k) + " (kt2 " + fmt("%.6g", a) + ", skt " + fmt("%.6g", b) + ", kt " +
                      fmt("%.6g", c) + ")";
      }
    }
  }
  return {count == 0, std::to_string(checked) + " iterations checked, " + std::to_string(count) + " violations" +
                          violations};
}

Outcome sirt_comparison() {
  const auto t0 = Clock::now();
  struct Case {
    std::string name;
    problems::ProblemInstance problem;
    bool include_sart;
  };
  std::vector<Case> cases;
  cases.push_back({"tanabe", problems::tanabe_problem(), false});
  cases.push_back({"tomo 12x17 16x16", problems::tomo_problem(desk_geometry()), true});
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const auto ctx = bench::ExperimentContext::prepare(c.problem, Vector(c.problem.a.cols(), 0.0));
    std::vector<bench::Method> rivals{bench::Method::Landweber, bench::Method::Cimmino, bench::Method::CAV,
                                      bench::Method::DROP};
    if (c.include_sart) rivals.push_back(bench::Method::SART);
    const double kt = bench::final_error_xdagger(bench::run_method(ctx, bench::Method::KT, 100));
    const double skt = bench::final_error_xdagger(bench::run_method(ctx, bench::Method::SKT, 100));
    double best_rival = std::numeric_limits<double>::infinity();
    for (bench::Method m : rivals) {
      const double e = bench::final_error_xdagger(bench::run_method(ctx, m, 100));
      best_rival = std::min(best_rival, e);
      if (!(kt < e && skt < e)) {
        ok = false;
        detail += " [" + c.name + ": " + std::string(bench::to_string(m)) + " " + fmt("%.3e", e) + "]";
      }
    }
    detail += " " + c.name + ": kt " + fmt("%.3e", kt) + ", skt " + fmt("%.3e", skt) + ", best rival " +
              fmt("%.3e", best_rival) + ";";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 60.0;
  return {ok, detail + " " + fmt("%.2f", secs) + " s"};
}

Outcome tomography_generator() {
  problems::ScanGeometry g;
  g.n_angles = 36;
  g.n_rays = 75;
  g.grid = 50;
  const DenseMatrix a = problems::build_projection_matrix(g);
  const bool shape = a.rows() == 2700 && a.cols() == 2500;
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> offset(-40.0, 40.0);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const double theta = angle(rng);
    const double s = offset(rng);
    const Vector row = problems::ray_row(50, theta, s);
    double total = 0.0;
    for (double v : row) total += v;
    worst = std::max(worst, std::fabs(total - oracle::square_chord(25.0, theta, s)));
  }
  return {shape && worst <= 1e-10, std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                       ", max chord-length error " + fmt("%.2e", worst) + " over 200 rays"};
}

Outcome cgmn_behaviour() {
  const auto tomo = bench::ExperimentContext::prepare(problems::tomo_problem(desk_geometry()), Vector(256, 0.0));
  const auto cg = bench::run_method(tomo, bench::Method::CGMN, 30);
  const auto kt = bench::run_method(tomo, bench::Method::KT, 30);
  const double e_cg = bench::final_error_xdagger(cg);
  const double e_kt = bench::final_error_xdagger(kt);
  const auto tanabe = bench::ExperimentContext::prepare(problems::tanabe_problem(), Vector(4, 0.0));
  const auto tcg = bench::run_method(tanabe, bench::Method::CGMN, 100);
  const bool flagged = tcg.status == bench::RunStatus::Breakdown || tcg.status == bench::RunStatus::Stagnation;
  return {e_cg <= e_kt && flagged, "tomo after 30: cgmn " + fmt("%.3e", e_cg) + " (" +
                                       std::string(bench::to_string(cg.status)) + "), kt " + fmt("%.3e", e_kt) +
                                       "; tanabe cgmn status " + std::string(bench::to_string(tcg.status)) +
                                       " after " + std::to_string(tcg.records.back().k) + " steps"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "kt_acceptance_determinism";
  fs::remove_all(root);
  std::size_t compared = 0;
  std::string mismatch;
  for (const char* problem : {"tanabe", "tomo"}) {
    bench::RunConfig cfg;
    cfg.problem = bench::parse_problem(problem);
    cfg.problem.geometry = desk_geometry();
    cfg.x0 = bench::parse_x0(std::string(problem) == "tanabe" ? "7,6,10,6" : "zeros");
    cfg.iters = 60;
    const auto methods = bench::parse_methods("all");
    for (const char* run : {"a", "b"}) {
      cfg.output_dir = root / problem / run;
      bench::compare(cfg, methods);
    }
    for (bench::Method m : methods) {
      const std::string name = std::string(bench::to_string(m)) + ".csv";
      ++compared;
      if (slurp(root / problem / "a" / name) != slurp(root / problem / "b" / name)) {
        mismatch += " " + std::string(problem) + "/" + name;
      }
    }
  }
  fs::remove_all(root);
  return {mismatch.empty(), std::to_string(compared) + " CSV pairs compared" +
                                (mismatch.empty() ? ", all byte-identical" : ", differing:" + mismatch)};
}

}  // namespace

int main() {
  const std::vector<DenseMatrix> suite = random_suite();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"decomposition A_S = CA and Abar_S = ChatA", [&] { return decomposition(suite); }},
      {"factorization and index-set equivalence", [&] { return factorization(suite); }},
      {"sweep equivalence of kt/skt iterations", sweep_equivalence},
      {"iteration-matrix identity I - A^T Cbar^T M A = Qbar Q", [&] { return iteration_identity(suite); }},
      {"Tanabe exact values", tanabe_values},
      {"convergence-rate bounds on Tanabe", rate_bounds},
      {"ordering kt2 <= skt <= kt on Tanabe from (7,6,10,6)", ordering},
      {"kt/skt beat Landweber, Cimmino, CAV, DROP (and SART on tomo)", sirt_comparison},
      {"tomography generator shape and chord lengths", tomography_generator},
      {"CGMN behaviour", cgmn_behaviour},
      {"determinism of compare", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu: %s -- %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed;
}
