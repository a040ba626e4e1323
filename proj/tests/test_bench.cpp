#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kt/bench.hpp"
#include "kt/matrix_market.hpp"
#include "oracles.hpp"

using namespace kt;
using namespace kt::bench;
namespace fs = std::filesystem;

namespace {

constexpr double kTanabeSigma = 0.7772502481498025;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ktbench_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

ExperimentContext tanabe_context(const Vector& x0) { return ExperimentContext::prepare(problems::tanabe_problem(), x0); }

}  // namespace

TEST_CASE("csv format") {
  SUBCASE("empty list is header only") {
    std::ostringstream out;
    write_csv(out, {});
    CHECK(out.str() == "k,err_xstar,err_xdagger,err_shifted\n");
  }
  SUBCASE("one record") {
    std::ostringstream out;
    write_csv(out, {ErrorRecord{0, 1.0, 2.0, 3.0}});
    CHECK(out.str() == "k,err_xstar,err_xdagger,err_shifted\n0,1,2,3\n");
  }
  SUBCASE("50 records give 51 lines and round-trip exactly") {
    std::vector<ErrorRecord> recs;
    for (std::size_t k = 0; k < 50; ++k) {
      const double v = 1.0 / (3.0 + static_cast<double>(k));
      recs.push_back(ErrorRecord{k, v, v * std::sqrt(2.0), v / 7.0});
    }
    std::stringstream ss;
    write_csv(ss, recs);
    CHECK(count_lines(ss.str()) == 51);
    CHECK(read_csv(ss) == recs);
  }
  SUBCASE("malformed csv") {
    std::istringstream bad_header("k,err\n");
    CHECK_THROWS(read_csv(bad_header));
    std::istringstream bad_row("k,err_xstar,err_xdagger,err_shifted\n0,1,x,3\n");
    CHECK_THROWS(read_csv(bad_row));
  }
}

TEST_CASE("pgm encoding") {
  SUBCASE("constant image is mid grey") {
    const std::string pgm = encode_pgm(Vector(6, 3.5), 3, 2);
    CHECK(pgm.substr(0, 11) == "P5\n3 2\n255\n");
    CHECK(pgm.substr(11) == std::string(6, static_cast<char>(128)));
  }
  SUBCASE("single pixel") { CHECK(encode_pgm(Vector{42.0}, 1, 1).back() == static_cast<char>(128)); }
  SUBCASE("linear mapping") {
    const std::string pgm = encode_pgm(Vector{-1, 0, 1}, 3, 1);
    CHECK(static_cast<unsigned char>(pgm[pgm.size() - 3]) == 0);
    CHECK(static_cast<unsigned char>(pgm[pgm.size() - 2]) == 128);
    CHECK(static_cast<unsigned char>(pgm[pgm.size() - 1]) == 255);
  }
  SUBCASE("phantom background maps to zero") {
    const auto img = problems::head_phantom(50);
    const fs::path dir = scratch("pgm");
    render_pgm(img.pixels, 50, dir / "phantom.pgm");
    const std::string bytes = slurp(dir / "phantom.pgm");
    CHECK(bytes.size() == 13 + 2500);
    CHECK(bytes.substr(0, 13) == "P5\n50 50\n255\n");
    CHECK(static_cast<unsigned char>(bytes[13]) == 0);
    CHECK_THROWS_AS(render_pgm(img.pixels, 49, dir / "bad.pgm"), std::invalid_argument);
  }
}

TEST_CASE("config parsing") {
  CHECK(parse_method("sym-kaczmarz") == Method::SymKaczmarz);
  CHECK_THROWS_AS(parse_method("gmres"), ConfigError);
  CHECK(parse_methods("all").size() == 11);
  CHECK(parse_methods("kt, skt").size() == 2);
  CHECK_THROWS_AS(parse_methods("kt,kt"), ConfigError);
  CHECK(parse_problem("file:/tmp/x").kind == ProblemSpec::Kind::File);
  CHECK_THROWS_AS(parse_problem("mystery"), ConfigError);
  CHECK(parse_x0("7,6,10,6").literal == Vector{7, 6, 10, 6});
  try {
    parse_x0("7,6,1e999,6");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("field 3") != std::string::npos);
  }
  CHECK_THROWS_AS(resolve_x0(parse_x0("1,2"), 4), ConfigError);
  RunConfig cfg;
  cfg.iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  for (Method m : kAllMethods) CHECK(parse_method(to_string(m)) == m);
}

TEST_CASE("error metrics on the Tanabe problem") {
  const Vector x0{7, 6, 10, 6};
  const auto ctx = tanabe_context(x0);
  const Vector xi{-2.0 / 3, 1, -2.0 / 3, 1};
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(std::fabs(ctx.nullspace_part[j] - 3.0 / 13 * xi[j]) < 1e-10);
    CHECK(std::fabs(ctx.x_dagger[j] - (j % 2 == 0 ? 15.0 : 10.0) / 13) < 1e-10);
  }

  SUBCASE("kt: err_xstar equals err_shifted and contracts by sigma") {
    const MethodRun run = run_method(ctx, Method::KT, 50);
    REQUIRE(run.records.size() == 51);
    CHECK(run.precompute_count == 1);
    const double e0 = run.records[0].err_shifted;
    for (std::size_t k = 0; k < run.records.size(); ++k) {
      const auto& r = run.records[k];
      CHECK(r.k == k);
      CHECK(std::fabs(r.err_xstar - r.err_shifted) <= 1e-10);
      CHECK(r.err_shifted <= std::pow(kTanabeSigma, static_cast<double>(k)) * e0 + 1e-12);
      if (k > 0) CHECK(r.err_shifted <= run.records[k - 1].err_shifted + 1e-15);
    }
  }
  SUBCASE("kt2 records every second kt iterate") {
    const MethodRun kt = run_method(ctx, Method::KT, 20);
    const MethodRun kt2 = run_method(ctx, Method::KT2, 10);
    for (std::size_t k = 0; k <= 10; ++k) CHECK(kt2.records[k].err_shifted == kt.records[2 * k].err_shifted);
    CHECK(kt2.precompute_count == 1);
  }
  SUBCASE("starting at x* keeps every column constant") {
    const auto fixed = tanabe_context(Vector{1, 1, 1, 1});
    for (Method m : kAllMethods) {
      const MethodRun run = run_method(fixed, m, 10);
      CAPTURE(to_string(m));
      for (const auto& r : run.records) {
        CHECK(std::fabs(r.err_xstar - run.records[0].err_xstar) <= 1e-12);
        CHECK(std::fabs(r.err_xdagger - run.records[0].err_xdagger) <= 1e-12);
        CHECK(std::fabs(r.err_shifted - run.records[0].err_shifted) <= 1e-12);
      }
    }
  }
  SUBCASE("only the Tanabe-type methods precompute") {
    for (Method m : kAllMethods) {
      const bool tanabe_type = m == Method::KT || m == Method::KT2 || m == Method::SKT;
      CHECK(run_method(ctx, m, 3).precompute_count == (tanabe_type ? 1u : 0u));
    }
  }
  SUBCASE("Landweber blows up without producing non-finite records") {
    const MethodRun run = run_method(ctx, Method::Landweber, 200);
    CHECK(run.status == RunStatus::Diverged);
    for (const auto& r : run.records) CHECK(std::isfinite(r.err_xdagger));
    CHECK(std::isinf(final_error_xdagger(run)));
  }
  SUBCASE("CGMN surfaces its stopping reason") {
    const MethodRun run = run_method(tanabe_context(Vector(4, 0.0)), Method::CGMN, 100);
    CHECK((run.status == RunStatus::Breakdown || run.status == RunStatus::Stagnation));
    CHECK(run.records.size() <= 11);
  }
}

TEST_CASE("run_experiment writes artifacts and caches x-dagger") {
  const fs::path dir = scratch("run");
  RunConfig cfg;
  cfg.problem = parse_problem("tanabe");
  cfg.method = Method::SKT;
  cfg.x0 = parse_x0("7,6,10,6");
  cfg.iters = 25;
  cfg.output_dir = dir;
  const MethodRun run = run_experiment(cfg);
  CHECK(read_csv(dir / "errors.csv") == run.records);
  CHECK(mm::read_vector(dir / "solution.mtx") == run.solution);
  CHECK(fs::exists(dir / "xdagger.mtx"));
  CHECK_FALSE(fs::exists(dir / "recon.pgm"));
  const std::string first = slurp(dir / "errors.csv");

  // A stale cache with a different fingerprint is ignored and rewritten.
  mm::write_vector(dir / "xdagger.mtx", Vector{0, 0, 0, 0}, "fnv1a:0000000000000000");
  run_experiment(cfg);
  CHECK(slurp(dir / "errors.csv") == first);
  CHECK(mm::read_comment(dir / "xdagger.mtx") ==
        system_fingerprint(problems::tanabe_problem().a, problems::tanabe_problem().b));
  // A valid cache is reused and gives identical output.
  run_experiment(cfg);
  CHECK(slurp(dir / "errors.csv") == first);
}

TEST_CASE("tomography runs render a reconstruction") {
  const fs::path dir = scratch("tomo");
  RunConfig cfg;
  cfg.problem = parse_problem("tomo");
  cfg.problem.geometry.n_angles = 6;
  cfg.problem.geometry.n_rays = 9;
  cfg.problem.geometry.grid = 8;
  cfg.method = Method::KT;
  cfg.iters = 5;
  cfg.output_dir = dir;
  run_experiment(cfg);
  CHECK(slurp(dir / "recon.pgm").substr(0, 11) == "P5\n8 8\n255\n");
}

TEST_CASE("problem export and reload") {
  const fs::path dir = scratch("export");
  problems::ScanGeometry g;
  g.n_angles = 4;
  g.n_rays = 7;
  g.grid = 5;
  const auto p = problems::tomo_problem(g);
  export_problem(p, dir);
  CHECK(fs::exists(dir / "phantom.pgm"));
  ProblemSpec spec = parse_problem("file:" + dir.string());
  const auto q = load_problem(spec);
  CHECK(q.a == p.a);
  CHECK(q.b == p.b);
  CHECK(*q.x_star == *p.x_star);
  CHECK(q.grid == 5);
  CHECK(q.zero_rows == p.zero_rows);
  CHECK_THROWS_AS(load_problem(parse_problem("file:" + (dir / "missing").string())), ConfigError);
}

TEST_CASE("precomputed matrices on disk") {
  const fs::path dir = scratch("pre");
  const auto p = problems::tanabe_problem();
  write_precomputed(p, dir);
  const DenseMatrix c = mm::read_matrix(dir / "C.mtx");
  CHECK(c(0, 1) == doctest::Approx(-0.7));
  CHECK(mm::read_matrix(dir / "Chat.mtx")(0, 0) == 0.0);
  CHECK(mm::read_matrix(dir / "Cbar.mtx").rows() == 6);
}

TEST_CASE("compare is deterministic") {
  const fs::path a = scratch("cmp_a");
  const fs::path b = scratch("cmp_b");
  RunConfig cfg;
  cfg.problem = parse_problem("tanabe");
  cfg.x0 = parse_x0("7,6,10,6");
  cfg.iters = 40;
  const auto methods = parse_methods("all");
  cfg.output_dir = a;
  compare(cfg, methods);
  cfg.output_dir = b;
  compare(cfg, methods);
  for (Method m : methods) {
    const std::string name = std::string(to_string(m)) + ".csv";
    CHECK(slurp(a / name) == slurp(b / name));
    CHECK(slurp(a / name).size() > 40);
  }
}
