#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kt/bench.hpp"
#include "kt/linalg.hpp"
#include "kt/problems.hpp"
#include "kt/rowaction.hpp"
#include "kt/tanabe.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

kt::DenseMatrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return kt::DenseMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

kt::Vector to_vector(const Array& v) {
  if (v.ndim() != 1) throw py::value_error("expected a 1-D array");
  return kt::Vector(v.data(), v.data() + v.shape(0));
}

Array from_matrix(const kt::DenseMatrix& a) {
  Array out({a.rows(), a.cols()});
  std::copy(a.data().begin(), a.data().end(), out.mutable_data());
  return out;
}

Array from_vector(const kt::Vector& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict problem_dict(const kt::problems::ProblemInstance& p) {
  py::dict d;
  d["A"] = from_matrix(p.a);
  d["b"] = from_vector(p.b);
  d["x_star"] = p.x_star ? py::object(from_vector(*p.x_star)) : py::none();
  d["label"] = p.label;
  d["zero_rows"] = p.zero_rows;
  d["grid"] = p.grid;
  return d;
}

kt::problems::ProblemInstance problem_from(const Array& a, const Array& b, const std::optional<Array>& x_star) {
  kt::problems::ProblemInstance p;
  p.a = to_matrix(a);
  p.b = to_vector(b);
  if (p.b.size() != p.a.rows()) throw py::value_error("b must have one entry per row of A");
  if (x_star) p.x_star = to_vector(*x_star);
  p.zero_rows = kt::zero_rows(p.a);
  p.label = "python";
  return p;
}

}  // namespace

PYBIND11_MODULE(_ktsolve, m) {
  m.doc() = "Kaczmarz-Tanabe solvers in standard form, row-action sweeps, SIRT baselines and CGMN.";

  py::register_exception<kt::ZeroRowError>(m, "ZeroRowError", PyExc_ValueError);
  py::register_exception<kt::bench::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("tanabe_problem", [] { return problem_dict(kt::problems::tanabe_problem()); },
        "The 6x4 rank-3 test system with x* = (1,1,1,1).");
  m.def(
      "tomo_problem",
      [](std::size_t angles, std::size_t rays, std::size_t grid, double span, bool full_circle) {
        kt::problems::ScanGeometry g;
        g.n_angles = angles;
        g.n_rays = rays;
        g.grid = grid;
        g.detector_span = span;
        g.full_circle = full_circle;
        return problem_dict(kt::problems::tomo_problem(g));
      },
      py::arg("angles") = 36, py::arg("rays") = 75, py::arg("grid") = 50, py::arg("span") = 0.0,
      py::arg("full_circle") = false, "Parallel-beam projection of the head phantom; b = A x*.");
  m.def("head_phantom", [](std::size_t grid) {
    const auto img = kt::problems::head_phantom(grid);
    Array out({grid, grid});
    std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
    return out;
  });

  m.def("compute_H", [](const Array& a) { return from_matrix(kt::compute_H(to_matrix(a)).h); });
  m.def("build_C", [](const Array& a) { return from_matrix(kt::tanabe::build_C(to_matrix(a)).value); });
  m.def("build_Chat", [](const Array& a) { return from_matrix(kt::tanabe::build_Chat(to_matrix(a)).value); });
  m.def("build_Cbar", [](const Array& a) {
    const kt::DenseMatrix mat = to_matrix(a);
    const auto h = kt::compute_H(mat);
    return from_matrix(kt::tanabe::compose_Cbar(kt::tanabe::build_C(h), kt::tanabe::build_Chat(h), mat,
                                                kt::tanabe::inverse_row_norms(mat))
                           .value);
  });

  m.def("kaczmarz_sweep", [](const Array& a, const Array& b, const Array& x) {
    return from_vector(kt::rowaction::kaczmarz_sweep(to_matrix(a), to_vector(b), to_vector(x)));
  });
  m.def("symmetric_sweep", [](const Array& a, const Array& b, const Array& x) {
    return from_vector(kt::rowaction::symmetric_sweep(to_matrix(a), to_vector(b), to_vector(x)));
  });
  m.def("min_norm_lsq", [](const Array& a, const Array& b, double tol) {
    return from_vector(kt::min_norm_lsq(to_matrix(a), to_vector(b), kt::LsqOptions{tol, 0}).x);
  }, py::arg("A"), py::arg("b"), py::arg("tol") = 1e-12);
  m.def("project_nullspace", [](const Array& a, const Array& x0) {
    return from_vector(kt::project_nullspace(to_matrix(a), to_vector(x0)));
  });

  m.def(
      "run",
      [](const std::string& method, const Array& a, const Array& b, const Array& x0, std::size_t iters,
         const std::optional<Array>& x_star) {
        const auto ctx = kt::bench::ExperimentContext::prepare(problem_from(a, b, x_star), to_vector(x0));
        const auto run = kt::bench::run_method(ctx, kt::bench::parse_method(method), iters);
        Array errors({run.records.size(), std::size_t{4}});
        double* out = errors.mutable_data();
        for (const auto& r : run.records) {
          *out++ = static_cast<double>(r.k);
          *out++ = r.err_xstar;
          *out++ = r.err_xdagger;
          *out++ = r.err_shifted;
        }
        py::dict d;
        d["errors"] = errors;
        d["solution"] = from_vector(run.solution);
        d["status"] = std::string(kt::bench::to_string(run.status));
        return d;
      },
      py::arg("method"), py::arg("A"), py::arg("b"), py::arg("x0"), py::arg("iters") = 100,
      py::arg("x_star") = py::none(),
      "Runs one method; errors has columns k, err_xstar, err_xdagger, err_shifted. Zero rows are dropped.");
}
