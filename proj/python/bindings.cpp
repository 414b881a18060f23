#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "caldera/caldera.hpp"

namespace py = pybind11;
using namespace caldera;

namespace {

RandomStream stream(std::uint64_t seed, std::uint64_t stream_id) { return RandomStream(seed, stream_id); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Low-precision plus low-rank weight decomposition";

  auto base = py::register_exception<Error>(m, "CalderaError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<FactorizationError>(m, "FactorizationError", base.ptr());
  py::register_exception<RegimeError>(m, "RegimeError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<QuantizerSpec>(m, "QuantizerSpec")
      .def(py::init<int, double>(), py::arg("bits"), py::arg("range"))
      .def_property_readonly("bits", &QuantizerSpec::bits)
      .def_property_readonly("range", &QuantizerSpec::range)
      .def_property_readonly("resolution", &QuantizerSpec::resolution)
      .def_property_readonly("levels", &QuantizerSpec::levels)
      .def("codebook", &QuantizerSpec::codebook)
      .def("contains", &QuantizerSpec::contains)
      .def("__repr__", [](const QuantizerSpec& q) {
        return "QuantizerSpec(bits=" + std::to_string(q.bits()) + ", range=" + std::to_string(q.range()) + ")";
      });

  m.def(
      "quantize_matrix",
      [](const QuantizerSpec& spec, const Matrix& A, std::uint64_t seed, std::uint64_t stream_id) {
        auto q = quantize_matrix(spec, A, stream(seed, stream_id));
        return py::make_tuple(q.values, q.saturation_count);
      },
      py::arg("spec"), py::arg("A"), py::arg("seed") = 0, py::arg("stream") = 0,
      "Dithered quantization; returns (values, saturation_count).");

  py::class_<HessianContext>(m, "HessianContext")
      .def_readonly("H", &HessianContext::H)
      .def_readonly("M", &HessianContext::M)
      .def_readonly("D", &HessianContext::D)
      .def_readonly("lambda_max", &HessianContext::lambda_max)
      .def_readonly("lambda_min", &HessianContext::lambda_min)
      .def_readonly("m", &HessianContext::m)
      .def_readonly("regularization", &HessianContext::regularization)
      .def_property_readonly("dim", &HessianContext::dim);

  m.def("compute_hessian", &compute_hessian, py::arg("X"), py::arg("delta") = 0.0);
  m.def("hessian_context", &hessian_context, py::arg("H"), py::arg("m"), py::arg("delta") = 0.0);
  m.def("default_regularization", &default_regularization, py::arg("H"));
  m.def("proxy_error", py::overload_cast<const Matrix&, const HessianContext&>(&proxy_error), py::arg("E"),
        py::arg("ctx"));
  m.def(
      "ldl_upper",
      [](const Matrix& A, double tol) {
        auto f = ldl_upper(A, tol);
        return py::make_tuple(f.M, f.D);
      },
      py::arg("A"), py::arg("pivot_tolerance") = 0.0, "Returns (M, D) with A = (M + I) diag(D) (M + I)^T.");

  py::class_<RhtContext>(m, "RhtContext")
      .def_readonly("seed", &RhtContext::seed)
      .def_readonly("padded_rows", &RhtContext::padded_rows)
      .def_readonly("padded_cols", &RhtContext::padded_cols);
  m.def("make_rht", &make_rht, py::arg("seed"), py::arg("rows"), py::arg("cols"));
  m.def("rht_forward", &rht_forward, py::arg("W"), py::arg("ctx"));
  m.def("rht_inverse", &rht_inverse, py::arg("Wt"), py::arg("ctx"));

  py::class_<RcrSolution>(m, "RcrSolution")
      .def_readonly("Z_star", &RcrSolution::Z_star)
      .def_readonly("left_factor", &RcrSolution::left_factor)
      .def_readonly("right_factor", &RcrSolution::right_factor)
      .def_readonly("optimal_value", &RcrSolution::optimal_value)
      .def_readonly("irreducible", &RcrSolution::irreducible)
      .def_property_readonly("branch", [](const RcrSolution& s) { return std::string(to_string(s.branch)); })
      .def_readonly("rank_x", &RcrSolution::rank_x);
  m.def("solve_rcr", &solve_rcr, py::arg("X"), py::arg("Y"), py::arg("k"));
  m.def("rcr_objective", &rcr_objective, py::arg("X"), py::arg("Z"), py::arg("Y"));

  py::class_<LdlqResult>(m, "LdlqResult")
      .def_readonly("Q", &LdlqResult::Q)
      .def_readonly("eta", &LdlqResult::eta)
      .def_readonly("saturation_count", &LdlqResult::saturation_count)
      .def_readonly("proxy_error", &LdlqResult::proxy_error);
  m.def(
      "ldlq_quantize",
      [](const Matrix& W, const HessianContext& ctx, int bits, std::optional<double> range, std::uint64_t seed,
         std::uint64_t stream_id) {
        QuantizerSpec spec = range ? QuantizerSpec(bits, *range) : default_backbone_quantizer(W, bits);
        return ldlq_quantize(W, ctx, spec, stream(seed, stream_id));
      },
      py::arg("W"), py::arg("ctx"), py::arg("bits") = 2, py::arg("range") = py::none(), py::arg("seed") = 0,
      py::arg("stream") = 0);
  m.def("verify_error_identity", &verify_error_identity, py::arg("result"), py::arg("W"), py::arg("ctx"));

  py::enum_<UpdateOrder>(m, "UpdateOrder")
      .value("q_first", UpdateOrder::q_first)
      .value("lr_first", UpdateOrder::lr_first);

  py::class_<DecompositionConfig>(m, "DecompositionConfig")
      .def(py::init<>())
      .def_readwrite("rank", &DecompositionConfig::rank)
      .def_readwrite("bits_q", &DecompositionConfig::bits_q)
      .def_readwrite("bits_l", &DecompositionConfig::bits_l)
      .def_readwrite("bits_r", &DecompositionConfig::bits_r)
      .def_readwrite("range_q", &DecompositionConfig::range_q)
      .def_readwrite("range_l", &DecompositionConfig::range_l)
      .def_readwrite("range_r", &DecompositionConfig::range_r)
      .def_readwrite("adaptive_factor_ranges", &DecompositionConfig::adaptive_factor_ranges)
      .def_readwrite("outer_iterations", &DecompositionConfig::outer_iterations)
      .def_readwrite("inner_iterations", &DecompositionConfig::inner_iterations)
      .def_readwrite("seed", &DecompositionConfig::seed)
      .def_readwrite("use_rht", &DecompositionConfig::use_rht)
      .def_readwrite("use_hessian_update", &DecompositionConfig::use_hessian_update)
      .def_readwrite("update_order", &DecompositionConfig::update_order)
      .def_readwrite("strict_fallback", &DecompositionConfig::strict_fallback)
      .def_readwrite("saturation_threshold", &DecompositionConfig::saturation_threshold)
      .def_readwrite("delta", &DecompositionConfig::delta)
      .def_readwrite("early_stop_tolerance", &DecompositionConfig::early_stop_tolerance);

  py::class_<CalderaResult>(m, "CalderaResult")
      .def_readonly("Q", &CalderaResult::Q)
      .def_readonly("L", &CalderaResult::L)
      .def_readonly("R", &CalderaResult::R)
      .def_readonly("best_error", &CalderaResult::best_error)
      .def_readonly("best_iteration", &CalderaResult::best_iteration)
      .def_readonly("error_trace", &CalderaResult::error_trace)
      .def_readonly("best_trace", &CalderaResult::best_trace)
      .def_readonly("inner_best_traces", &CalderaResult::inner_best_traces)
      .def("reconstruction", &CalderaResult::reconstruction);

  m.def("caldera_decompose", &caldera_decompose, py::arg("W"), py::arg("ctx"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  m.def(
      "synthesize",
      [](const std::string& kind, Index n, Index d, std::uint64_t seed, double power, double rho, Index rank,
         double noise) {
        SynthParams p{power, rho, rank, noise};
        return synthesize_matrix(parse_spectrum_kind(kind), n, d, p, seed);
      },
      py::arg("kind"), py::arg("n"), py::arg("d"), py::arg("seed") = 0, py::arg("power") = 1.0,
      py::arg("rho") = 0.9, py::arg("rank") = 8, py::arg("noise") = 0.0);

  m.def("encode_cmat", [](const Matrix& A) { return py::bytes(encode_cmat(A)); }, py::arg("A"));
  m.def("decode_cmat", [](const py::bytes& b) { return decode_cmat(std::string(b)); }, py::arg("data"));
  m.def("write_cmat", [](const std::string& path, const Matrix& A) { write_cmat(path, A); }, py::arg("path"),
        py::arg("A"));
  m.def("read_cmat", [](const std::string& path) { return read_cmat(path); }, py::arg("path"));

  auto a = m.def_submodule("analysis", "Closed-form bounds and bit budgets");
  a.def("mp_caldera_bound", &analysis::mp_caldera_bound, py::arg("n"), py::arg("d"), py::arg("m"), py::arg("k"),
        py::arg("lambda_max"), py::arg("R"), py::arg("B_Q"), py::arg("epsilon"));
  a.def(
      "recommended_ranges",
      [](double s1, double sk, Index mm, double lmin) {
        auto r = analysis::recommended_ranges(s1, sk, mm, lmin);
        return py::make_tuple(r.left, r.right);
      },
      py::arg("sigma1"), py::arg("sigmak"), py::arg("m"), py::arg("lambda_min"), "Returns (R_L, R_R).");
  a.def(
      "recommended_bits",
      [](Index n, Index d, Index k, Index mm, double s1, double sk, double lmax, double lmin, double eps,
         double ssq, double C) {
        auto b = analysis::recommended_bits(n, d, k, mm, s1, sk, lmax, lmin, eps, ssq, C);
        return py::make_tuple(b.left, b.right);
      },
      py::arg("n"), py::arg("d"), py::arg("k"), py::arg("m"), py::arg("sigma1"), py::arg("sigmak"),
      py::arg("lambda_max"), py::arg("lambda_min"), py::arg("epsilon"), py::arg("sum_sigma_sq"), py::arg("C") = 1.0,
      "Returns (B_L, B_R).");
  a.def("bits_per_param", &analysis::bits_per_param, py::arg("layer_dims"), py::arg("B_Q"), py::arg("B_LR"),
        py::arg("k"), py::arg("r_ft") = 0);
  a.def("quip_trace_bound", &analysis::quip_trace_bound, py::arg("eta"), py::arg("D"));
  a.def("trailing_eigensum", &analysis::trailing_eigensum, py::arg("eta"), py::arg("D"), py::arg("k"));
}
