#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kt/linalg.hpp"
#include "kt/problems.hpp"
#include "kt/state.hpp"

namespace kt::bench {

/// Invalid command-line configuration (exit code 1 in the CLI).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { Kaczmarz, SymKaczmarz, KT, SKT, KT2, Landweber, Cimmino, CAV, DROP, SART, CGMN };

inline constexpr std::array<Method, 11> kAllMethods{
    Method::Kaczmarz, Method::SymKaczmarz, Method::KT,   Method::SKT, Method::KT2,  Method::Landweber,
    Method::Cimmino,  Method::CAV,         Method::DROP, Method::SART, Method::CGMN,
};

std::string_view to_string(Method method);
/// Accepts the CLI spelling ("kt", "sym-kaczmarz", ...). Throws ConfigError.
Method parse_method(std::string_view name);
/// Comma-separated list; "all" selects every method.
std::vector<Method> parse_methods(std::string_view list);

struct ProblemSpec {
  enum class Kind { Tanabe, Tomo, File };
  Kind kind = Kind::Tanabe;
  problems::ScanGeometry geometry;
  std::filesystem::path directory;  ///< for Kind::File
};

/// "tanabe", "tomo" or "file:DIR". Throws ConfigError.
ProblemSpec parse_problem(std::string_view text);

struct X0Spec {
  enum class Kind { Zeros, Literal, File };
  Kind kind = Kind::Zeros;
  Vector literal;
  std::filesystem::path path;
};

/// "zeros", a comma-separated literal such as "7,6,10,6", or a Matrix Market
/// vector path. Throws ConfigError on malformed literals (with field index).
X0Spec parse_x0(std::string_view text);

struct RunConfig {
  ProblemSpec problem;
  Method method = Method::KT;
  X0Spec x0;
  std::size_t iters = 100;
  unsigned long long seed = 0;
  std::filesystem::path output_dir = ".";

  /// Throws ConfigError when iters is 0.
  void validate() const;
};

/// Builds or reads the problem. For Kind::File the directory must hold A.mtx
/// and b.mtx; xstar.mtx and meta.json are optional.
problems::ProblemInstance load_problem(const ProblemSpec& spec);

/// Throws ConfigError when the vector length does not match n.
Vector resolve_x0(const X0Spec& spec, std::size_t n);

/// Writes A.mtx, b.mtx, xstar.mtx (when known), meta.json and, for image
/// problems, phantom.pgm into dir.
void export_problem(const problems::ProblemInstance& p, const std::filesystem::path& dir);

/// Everything a run needs that does not depend on the method. Zero rows are
/// dropped here; x† and P_{N(A)}x0 are computed once.
struct ExperimentContext {
  problems::ProblemInstance problem;
  Vector x0;
  Vector x_dagger;
  Vector nullspace_part;  ///< P_{N(A)}x0
  Vector shifted_target;  ///< x† + P_{N(A)}x0

  /// When cache_dir is given, x† is read from cache_dir/xdagger.mtx if its
  /// fingerprint matches the system, and written there otherwise.
  static ExperimentContext prepare(problems::ProblemInstance problem, Vector x0,
                                   const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

  ErrorRecord measure(std::size_t k, std::span<const double> y) const;
};

/// FNV-1a over the shape and the bytes of A and b.
std::string system_fingerprint(const DenseMatrix& a, std::span<const double> b);

enum class RunStatus { Completed, Diverged, Breakdown, Stagnation };
std::string_view to_string(RunStatus status);

struct MethodRun {
  Method method = Method::KT;
  RunStatus status = RunStatus::Completed;
  std::vector<ErrorRecord> records;  ///< k = 0..iters unless the run stopped early
  Vector solution;                   ///< last finite iterate
  /// Compatible-matrix constructions performed during the run. The iteration
  /// loop reuses them, so this is 1 for kt/kt2/skt and 0 otherwise.
  std::size_t precompute_count = 0;
};

MethodRun run_method(const ExperimentContext& ctx, Method method, std::size_t iters);

/// Error of a finished run for ranking: the last record's err_xdagger, or
/// +inf when the run diverged.
double final_error_xdagger(const MethodRun& run);

/// Prepares the context, runs cfg.method and writes errors.csv, solution.mtx,
/// xdagger.mtx and, for image problems, recon.pgm into cfg.output_dir.
MethodRun run_experiment(const RunConfig& cfg);

/// Runs every method concurrently against one shared context and writes
/// <method>.csv per method plus xdagger.mtx into cfg.output_dir.
std::vector<MethodRun> compare(const RunConfig& cfg, const std::vector<Method>& methods);

/// Writes C.mtx, Chat.mtx and Cbar.mtx for the (zero-row-free) problem.
void write_precomputed(const problems::ProblemInstance& p, const std::filesystem::path& dir);

// CSV with header `k,err_xstar,err_xdagger,err_shifted`, values as %.17g.
void write_csv(std::ostream& out, const std::vector<ErrorRecord>& records);
void write_csv(const std::filesystem::path& path, const std::vector<ErrorRecord>& records);
std::vector<ErrorRecord> read_csv(std::istream& in);
std::vector<ErrorRecord> read_csv(const std::filesystem::path& path);

/// 8-bit binary PGM (P5, maxval 255). Values map linearly from [min, max] to
/// [0, 255] with rounding; a constant image maps to 128 everywhere.
std::string encode_pgm(std::span<const double> pixels, std::size_t width, std::size_t height);
/// Square image of side grid; throws std::invalid_argument if grid² ≠ size.
void render_pgm(std::span<const double> pixels, std::size_t grid, const std::filesystem::path& path);

}  // namespace kt::bench
