#include "kt/bench.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <future>
#include <limits>

#include "json.hpp"

#include "kt/matrix_market.hpp"
#include "kt/rowaction.hpp"
#include "kt/sirt.hpp"
#include "kt/tanabe.hpp"

namespace kt::bench {

namespace fs = std::filesystem;

namespace {

struct MethodName {
  Method method;
  std::string_view name;
};

constexpr std::array<MethodName, 11> kMethodNames{{
    {Method::Kaczmarz, "kaczmarz"},
    {Method::SymKaczmarz, "sym-kaczmarz"},
    {Method::KT, "kt"},
    {Method::SKT, "skt"},
    {Method::KT2, "kt2"},
    {Method::Landweber, "landweber"},
    {Method::Cimmino, "cimmino"},
    {Method::CAV, "cav"},
    {Method::DROP, "drop"},
    {Method::SART, "sart"},
    {Method::CGMN, "cgmn"},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view field, std::string_view context, std::size_t index) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(context) + ": field " + std::to_string(index + 1) + " '" + std::string(field) +
                      "' is not a finite number");
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

sirt::Kind sirt_kind(Method m) {
  switch (m) {
    case Method::Landweber: return sirt::Kind::Landweber;
    case Method::Cimmino: return sirt::Kind::Cimmino;
    case Method::CAV: return sirt::Kind::CAV;
    case Method::DROP: return sirt::Kind::DROP;
    default: return sirt::Kind::SART;
  }
}

}  // namespace

std::string_view to_string(Method method) {
  for (const auto& [m, name] : kMethodNames) {
    if (m == method) return name;
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  const std::string_view t = trim(name);
  for (const auto& [m, n] : kMethodNames) {
    if (n == t) return m;
  }
  throw ConfigError("unknown method '" + std::string(t) + "'");
}

std::vector<Method> parse_methods(std::string_view list) {
  if (trim(list) == "all") return {kAllMethods.begin(), kAllMethods.end()};
  std::vector<Method> out;
  for (std::string_view item : split(list, ',')) {
    const Method m = parse_method(item);
    if (std::find(out.begin(), out.end(), m) != out.end()) {
      throw ConfigError("method '" + std::string(item) + "' listed twice");
    }
    out.push_back(m);
  }
  return out;
}

ProblemSpec parse_problem(std::string_view text) {
  const std::string_view t = trim(text);
  ProblemSpec spec;
  if (t == "tanabe") {
    spec.kind = ProblemSpec::Kind::Tanabe;
  } else if (t == "tomo") {
    spec.kind = ProblemSpec::Kind::Tomo;
  } else if (t.starts_with("file:") && t.size() > 5) {
    spec.kind = ProblemSpec::Kind::File;
    spec.directory = std::string(t.substr(5));
  } else {
    throw ConfigError("unknown problem '" + std::string(t) + "' (expected tanabe, tomo or file:DIR)");
  }
  return spec;
}

X0Spec parse_x0(std::string_view text) {
  const std::string_view t = trim(text);
  X0Spec spec;
  if (t.empty() || t == "zeros") return spec;
  const bool looks_numeric = t.find_first_not_of("0123456789+-.,eE \t") == std::string_view::npos;
  if (looks_numeric) {
    spec.kind = X0Spec::Kind::Literal;
    const auto fields = split(t, ',');
    for (std::size_t i = 0; i < fields.size(); ++i) spec.literal.push_back(parse_double(fields[i], "--x0", i));
    return spec;
  }
  spec.kind = X0Spec::Kind::File;
  spec.path = std::string(t);
  return spec;
}

void RunConfig::validate() const {
  if (iters == 0) throw ConfigError("--iters must be at least 1");
  if (problem.kind == ProblemSpec::Kind::Tomo) {
    const auto& g = problem.geometry;
    if (g.n_angles == 0 || g.n_rays == 0 || g.grid == 0) {
      throw ConfigError("--angles, --rays and --grid must be at least 1");
    }
    if (g.detector_span < 0.0 || !std::isfinite(g.detector_span)) throw ConfigError("--span must be finite and >= 0");
  }
}

problems::ProblemInstance load_problem(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemSpec::Kind::Tanabe: return problems::tanabe_problem();
    case ProblemSpec::Kind::Tomo: return problems::tomo_problem(spec.geometry);
    case ProblemSpec::Kind::File: break;
  }
  const fs::path& dir = spec.directory;
  if (!fs::exists(dir / "A.mtx") || !fs::exists(dir / "b.mtx")) {
    throw ConfigError("problem directory " + dir.string() + " must contain A.mtx and b.mtx");
  }
  problems::ProblemInstance p;
  p.a = mm::read_matrix(dir / "A.mtx");
  p.b = mm::read_vector(dir / "b.mtx");
  if (p.b.size() != p.a.rows()) throw ConfigError("b.mtx length does not match the rows of A.mtx");
  if (fs::exists(dir / "xstar.mtx")) {
    p.x_star = mm::read_vector(dir / "xstar.mtx");
    if (p.x_star->size() != p.a.cols()) throw ConfigError("xstar.mtx length does not match the columns of A.mtx");
  }
  p.label = dir.filename().string();
  if (fs::exists(dir / "meta.json")) {
    std::ifstream in(dir / "meta.json");
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("meta.json: " + std::string(e.what()));
    }
    p.label = meta.value("label", p.label);
    p.grid = meta.value("grid", std::size_t{0});
    if (p.grid != 0 && p.grid * p.grid != p.a.cols()) throw ConfigError("meta.json: grid² does not match columns");
  }
  p.zero_rows = zero_rows(p.a);
  return p;
}

Vector resolve_x0(const X0Spec& spec, std::size_t n) {
  Vector x0;
  switch (spec.kind) {
    case X0Spec::Kind::Zeros: return Vector(n, 0.0);
    case X0Spec::Kind::Literal: x0 = spec.literal; break;
    case X0Spec::Kind::File:
      try {
        x0 = mm::read_vector(spec.path);
      } catch (const std::exception& e) {
        throw ConfigError("--x0 " + spec.path.string() + ": " + e.what());
      }
      break;
  }
  if (x0.size() != n) {
    throw ConfigError("--x0 has " + std::to_string(x0.size()) + " entries but the problem has " + std::to_string(n) +
                      " unknowns");
  }
  return x0;
}

void export_problem(const problems::ProblemInstance& p, const fs::path& dir) {
  fs::create_directories(dir);
  mm::write_matrix(dir / "A.mtx", p.a, mm::Layout::Coordinate, p.label);
  mm::write_vector(dir / "b.mtx", p.b);
  if (p.x_star) mm::write_vector(dir / "xstar.mtx", *p.x_star);
  nlohmann::ordered_json meta;
  meta["label"] = p.label;
  meta["rows"] = p.a.rows();
  meta["cols"] = p.a.cols();
  meta["grid"] = p.grid;
  meta["zero_rows"] = p.zero_rows;
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
  if (p.grid != 0 && p.x_star) render_pgm(*p.x_star, p.grid, dir / "phantom.pgm");
}

std::string system_fingerprint(const DenseMatrix& a, std::span<const double> b) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      hash ^= bytes[i];
      hash *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t shape[2] = {a.rows(), a.cols()};
  mix(shape, sizeof shape);
  mix(a.data().data(), a.data().size() * sizeof(double));
  mix(b.data(), b.size() * sizeof(double));
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ExperimentContext ExperimentContext::prepare(problems::ProblemInstance problem, Vector x0,
                                             const std::optional<fs::path>& cache_dir) {
  ExperimentContext ctx;
  ctx.problem = problem.without_zero_rows();
  if (x0.size() != ctx.problem.a.cols()) throw ConfigError("x0 length does not match the problem");
  ctx.x0 = std::move(x0);

  const DenseMatrix& a = ctx.problem.a;
  const std::string fingerprint = system_fingerprint(a, ctx.problem.b);
  bool cached = false;
  if (cache_dir) {
    const fs::path file = *cache_dir / "xdagger.mtx";
    if (fs::exists(file) && mm::read_comment(file) == fingerprint) {
      Vector v = mm::read_vector(file);
      if (v.size() == a.cols()) {
        ctx.x_dagger = std::move(v);
        cached = true;
      }
    }
  }
  if (!cached) {
    LsqResult lsq = min_norm_lsq(a, ctx.problem.b, LsqOptions{1e-12, 0});
    if (!lsq.converged) {
      throw NoConvergence("minimum-norm solve did not reach 1e-12", lsq.relative_normal_residual);
    }
    ctx.x_dagger = std::move(lsq.x);
    if (cache_dir) {
      fs::create_directories(*cache_dir);
      mm::write_vector(*cache_dir / "xdagger.mtx", ctx.x_dagger, fingerprint);
    }
  }
  ctx.nullspace_part = project_nullspace(a, ctx.x0);
  ctx.shifted_target = add(ctx.x_dagger, ctx.nullspace_part);
  return ctx;
}

ErrorRecord ExperimentContext::measure(std::size_t k, std::span<const double> y) const {
  ErrorRecord r;
  r.k = k;
  r.err_xdagger = norm2(subtract(y, x_dagger));
  r.err_xstar = problem.x_star ? norm2(subtract(y, *problem.x_star)) : r.err_xdagger;
  r.err_shifted = norm2(subtract(y, shifted_target));
  return r;
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed: return "completed";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::Breakdown: return "breakdown";
    case RunStatus::Stagnation: return "stagnation";
  }
  return "unknown";
}

MethodRun run_method(const ExperimentContext& ctx, Method method, std::size_t iters) {
  const DenseMatrix& a = ctx.problem.a;
  const Vector& b = ctx.problem.b;
  MethodRun run;
  run.method = method;
  run.records.push_back(ctx.measure(0, ctx.x0));
  run.solution = ctx.x0;

  if (method == Method::CGMN) {
    sirt::CgmnOptions opts;
    opts.max_iter = iters;
    opts.tol = 0.0;
    const auto observer = [&](const IterationState& s) {
      if (all_finite(s.x)) run.records.push_back(ctx.measure(s.k, s.x));
    };
    const sirt::CgmnResult res = sirt::cgmn_solve(a, b, ctx.x0, opts, observer);
    run.solution = res.state.x;
    switch (res.status) {
      case sirt::CgmnStatus::Breakdown: run.status = RunStatus::Breakdown; break;
      case sirt::CgmnStatus::Stagnation: run.status = RunStatus::Stagnation; break;
      default: run.status = RunStatus::Completed; break;
    }
    if (!all_finite(run.solution)) run.status = RunStatus::Diverged;
    return run;
  }

  std::function<Vector(const Vector&)> step;
  std::optional<tanabe::PrecomputedIteration> pre;
  std::optional<sirt::SirtVariant> variant;
  switch (method) {
    case Method::Kaczmarz:
      step = [&](const Vector& y) { return rowaction::kaczmarz_sweep(a, b, y); };
      break;
    case Method::SymKaczmarz:
      step = [&](const Vector& y) { return rowaction::symmetric_sweep(a, b, y); };
      break;
    case Method::KT:
      pre = tanabe::precompute_kt(a);
      ++run.precompute_count;
      step = [&](const Vector& y) { return tanabe::apply_iteration(*pre, a, b, y); };
      break;
    case Method::KT2:
      pre = tanabe::precompute_kt(a);
      ++run.precompute_count;
      step = [&](const Vector& y) { return tanabe::apply_iteration(*pre, a, b, tanabe::apply_iteration(*pre, a, b, y)); };
      break;
    case Method::SKT:
      pre = tanabe::precompute_skt(a);
      ++run.precompute_count;
      step = [&](const Vector& y) { return tanabe::apply_iteration(*pre, a, b, y); };
      break;
    default:
      variant = sirt::build_sirt(a, sirt_kind(method));
      step = [&](const Vector& y) { return sirt::sirt_step(*variant, a, b, y); };
      break;
  }

  Vector y = ctx.x0;
  for (std::size_t k = 1; k <= iters; ++k) {
    Vector next = step(y);
    if (!all_finite(next)) {
      run.status = RunStatus::Diverged;
      break;
    }
    y = std::move(next);
    const ErrorRecord rec = ctx.measure(k, y);
    if (!std::isfinite(rec.err_xstar) || !std::isfinite(rec.err_xdagger) || !std::isfinite(rec.err_shifted)) {
      run.status = RunStatus::Diverged;
      break;
    }
    run.records.push_back(rec);
    run.solution = y;
  }
  return run;
}

double final_error_xdagger(const MethodRun& run) {
  if (run.status == RunStatus::Diverged || run.records.empty()) return std::numeric_limits<double>::infinity();
  return run.records.back().err_xdagger;
}

namespace {

problems::ProblemInstance prepare_problem(const RunConfig& cfg, Vector& x0) {
  cfg.validate();
  problems::ProblemInstance p = load_problem(cfg.problem);
  x0 = resolve_x0(cfg.x0, p.a.cols());
  return p;
}

}  // namespace

MethodRun run_experiment(const RunConfig& cfg) {
  Vector x0;
  problems::ProblemInstance p = prepare_problem(cfg, x0);
  fs::create_directories(cfg.output_dir);
  const ExperimentContext ctx = ExperimentContext::prepare(std::move(p), std::move(x0), cfg.output_dir);
  MethodRun run = run_method(ctx, cfg.method, cfg.iters);
  write_csv(cfg.output_dir / "errors.csv", run.records);
  mm::write_vector(cfg.output_dir / "solution.mtx", run.solution,
                   std::string(to_string(cfg.method)) + " " + std::string(to_string(run.status)));
  if (ctx.problem.grid != 0) render_pgm(run.solution, ctx.problem.grid, cfg.output_dir / "recon.pgm");
  return run;
}

std::vector<MethodRun> compare(const RunConfig& cfg, const std::vector<Method>& methods) {
  if (methods.empty()) throw ConfigError("--methods must name at least one method");
  Vector x0;
  problems::ProblemInstance p = prepare_problem(cfg, x0);
  fs::create_directories(cfg.output_dir);
  const ExperimentContext ctx = ExperimentContext::prepare(std::move(p), std::move(x0), cfg.output_dir);

  std::vector<std::future<MethodRun>> jobs;
  jobs.reserve(methods.size());
  for (Method m : methods) {
    jobs.push_back(std::async(std::launch::async, [&ctx, &cfg, m] {
      MethodRun run = run_method(ctx, m, cfg.iters);
      write_csv(cfg.output_dir / (std::string(to_string(m)) + ".csv"), run.records);
      return run;
    }));
  }
  std::vector<MethodRun> runs;
  runs.reserve(jobs.size());
  for (auto& job : jobs) runs.push_back(job.get());
  return runs;
}

void write_precomputed(const problems::ProblemInstance& p, const fs::path& dir) {
  const problems::ProblemInstance clean = p.without_zero_rows();
  const RowCorrelationMatrix h = compute_H(clean.a);
  const auto c = tanabe::build_C(h);
  const auto chat = tanabe::build_Chat(h);
  const auto cbar = tanabe::compose_Cbar(c, chat, clean.a, tanabe::inverse_row_norms(clean.a));
  fs::create_directories(dir);
  const std::string fp = system_fingerprint(clean.a, clean.b);
  mm::write_matrix(dir / "C.mtx", c.value, mm::Layout::Array, fp);
  mm::write_matrix(dir / "Chat.mtx", chat.value, mm::Layout::Array, fp);
  mm::write_matrix(dir / "Cbar.mtx", cbar.value, mm::Layout::Array, fp);
}

void write_csv(std::ostream& out, const std::vector<ErrorRecord>& records) {
  out << "k,err_xstar,err_xdagger,err_shifted\n";
  for (const ErrorRecord& r : records) {
    out << r.k << ',' << format_double(r.err_xstar) << ',' << format_double(r.err_xdagger) << ','
        << format_double(r.err_shifted) << '\n';
  }
}

void write_csv(const fs::path& path, const std::vector<ErrorRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(out, records);
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::vector<ErrorRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "k,err_xstar,err_xdagger,err_shifted") {
    throw std::runtime_error("errors csv: missing or unexpected header");
  }
  std::vector<ErrorRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) throw std::runtime_error("errors csv line " + std::to_string(lineno) + ": expected 4 fields");
    ErrorRecord r;
    const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), r.k);
    if (ec != std::errc{} || ptr != fields[0].data() + fields[0].size()) {
      throw std::runtime_error("errors csv line " + std::to_string(lineno) + ": bad iteration count");
    }
    try {
      const std::string ctx = "errors csv line " + std::to_string(lineno);
      r.err_xstar = parse_double(fields[1], ctx, 1);
      r.err_xdagger = parse_double(fields[2], ctx, 2);
      r.err_shifted = parse_double(fields[3], ctx, 3);
    } catch (const ConfigError& e) {
      throw std::runtime_error(e.what());
    }
    out.push_back(r);
  }
  return out;
}

std::vector<ErrorRecord> read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_csv(in);
}

std::string encode_pgm(std::span<const double> pixels, std::size_t width, std::size_t height) {
  if (pixels.size() != width * height) throw std::invalid_argument("encode_pgm: pixel count mismatch");
  if (!all_finite(pixels)) throw std::invalid_argument("encode_pgm: non-finite pixel");
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + pixels.size());
  if (pixels.empty()) return out;
  const auto [lo, hi] = std::minmax_element(pixels.begin(), pixels.end());
  const double min = *lo;
  const double range = *hi - min;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double level = range > 0.0 ? std::round(255.0 * (pixels[i] - min) / range) : 128.0;
    out[header + i] = static_cast<char>(static_cast<unsigned char>(std::clamp(level, 0.0, 255.0)));
  }
  return out;
}

void render_pgm(std::span<const double> pixels, std::size_t grid, const fs::path& path) {
  if (grid * grid != pixels.size()) throw std::invalid_argument("render_pgm: grid² does not match the image size");
  const std::string bytes = encode_pgm(pixels, grid, grid);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace kt::bench
