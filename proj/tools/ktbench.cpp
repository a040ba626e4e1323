// ktbench: generate problems, precompute compatible matrices, and run or
// compare the iterative solvers. Exit codes: 0 success, 1 configuration
// error, 2 solver or I/O error.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "kt/bench.hpp"

namespace {

struct Options {
  std::string problem = "tanabe";
  std::string method = "kt";
  std::string methods = "all";
  std::string x0 = "zeros";
  std::size_t iters = 100;
  unsigned long long seed = 0;
  std::string out = ".";
  kt::problems::ScanGeometry geometry;
};

void add_problem_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--problem", o.problem, "tanabe, tomo or file:DIR")->capture_default_str();
  cmd->add_option("--angles", o.geometry.n_angles, "tomography: number of projection angles")->capture_default_str();
  cmd->add_option("--rays", o.geometry.n_rays, "tomography: parallel rays per angle")->capture_default_str();
  cmd->add_option("--grid", o.geometry.grid, "tomography: image side in pixels")->capture_default_str();
  cmd->add_option("--span", o.geometry.detector_span, "tomography: detector width, 0 = sqrt(2)*grid")
      ->capture_default_str();
  cmd->add_flag("--full-circle", o.geometry.full_circle, "tomography: spread angles over [0, 2pi)");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
}

void add_run_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--iters", o.iters, "outer iterations to record")->capture_default_str();
  cmd->add_option("--x0", o.x0, "zeros, a literal such as 7,6,10,6, or a Matrix Market file")->capture_default_str();
  cmd->add_option("--seed", o.seed, "reserved for randomized runs")->capture_default_str();
}

kt::bench::RunConfig make_config(const Options& o) {
  kt::bench::RunConfig cfg;
  cfg.problem = kt::bench::parse_problem(o.problem);
  cfg.problem.geometry = o.geometry;
  cfg.x0 = kt::bench::parse_x0(o.x0);
  cfg.iters = o.iters;
  cfg.seed = o.seed;
  cfg.output_dir = o.out;
  cfg.validate();
  return cfg;
}

void print_summary(const kt::bench::MethodRun& run) {
  const auto& last = run.records.back();
  std::printf("%-13s %-10s k=%-5zu err_xstar=%.6e err_xdagger=%.6e err_shifted=%.6e\n",
              std::string(kt::bench::to_string(run.method)).c_str(), std::string(to_string(run.status)).c_str(),
              last.k, last.err_xstar, last.err_xdagger, last.err_shifted);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kaczmarz-Tanabe solver benchmark"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "write A.mtx, b.mtx, xstar.mtx, meta.json (and phantom.pgm)");
  add_problem_flags(gen, o);

  auto* pre = app.add_subcommand("precompute", "write C.mtx, Chat.mtx and Cbar.mtx");
  add_problem_flags(pre, o);

  auto* run = app.add_subcommand("run", "run one method, write errors.csv and solution.mtx");
  add_problem_flags(run, o);
  add_run_flags(run, o);
  run->add_option("--method", o.method, "kaczmarz, sym-kaczmarz, kt, skt, kt2, landweber, cimmino, cav, drop, sart, cgmn")
      ->capture_default_str();

  auto* cmp = app.add_subcommand("compare", "run several methods, write <method>.csv each");
  add_problem_flags(cmp, o);
  add_run_flags(cmp, o);
  cmp->add_option("--methods", o.methods, "comma-separated methods or 'all'")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const kt::bench::RunConfig cfg = make_config(o);
    if (gen->parsed()) {
      const auto p = kt::bench::load_problem(cfg.problem);
      kt::bench::export_problem(p, cfg.output_dir);
      std::printf("%s: %zu x %zu, %zu zero rows -> %s\n", p.label.c_str(), p.a.rows(), p.a.cols(), p.zero_rows.size(),
                  cfg.output_dir.string().c_str());
    } else if (pre->parsed()) {
      kt::bench::write_precomputed(kt::bench::load_problem(cfg.problem), cfg.output_dir);
    } else if (run->parsed()) {
      kt::bench::RunConfig single = cfg;
      single.method = kt::bench::parse_method(o.method);
      print_summary(kt::bench::run_experiment(single));
    } else if (cmp->parsed()) {
      for (const auto& r : kt::bench::compare(cfg, kt::bench::parse_methods(o.methods))) print_summary(r);
    }
  } catch (const kt::bench::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
