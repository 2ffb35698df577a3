/// Python bindings of the main operations: CCA, the constant-modulus
/// factorization, the blind detectors, synchronization, the link model, and
/// the Monte Carlo harness.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ccadet/analysis.hpp"
#include "ccadet/harness.hpp"
#include "ccadet/sync.hpp"

namespace py = pybind11;
using namespace ccadet;

namespace {

/// numpy-friendly CCA entry point: raw 2M×T view arrays in, (q1, q2, rho) out.
py::tuple cca_from_views(const RealMatrix& y1, const RealMatrix& y2, int n_components,
                         std::optional<double> ridge) {
  const CorrelationSet corr = sample_correlations(make_view(y1, 1), make_view(y2, 2));
  const CanonicalSolution sol =
      solve_cca(corr, n_components, ridge ? *ridge : default_ridge(corr));
  return py::make_tuple(sol.q1, sol.q2, sol.rho);
}

py::tuple racma_from_array(const RealMatrix& g, int k_e) {
  const UnmixResult r = racma_factorize(MixtureBlock{g, k_e});
  return py::make_tuple(r.s_hat, r.mixing_hat, r.residual);
}

py::tuple align_to_reference(const RealMatrix& s_hat, const RealMatrix& s_ref) {
  const Alignment a = resolve_ambiguity(s_hat, s_ref);
  return py::make_tuple(a.aligned, a.permutation, a.signs);
}

py::dict detect_from_views(const RealMatrix& y1, const RealMatrix& y2, int k_e,
                           std::optional<double> ridge) {
  const EdgeDetection det = detect_cca_racma(make_view(y1, 1), make_view(y2, 2), k_e, ridge);
  py::dict out;
  out["symbols"] = RealMatrix(det.symbols.s);
  out["rho"] = det.rho;
  out["racma_residual"] = det.racma_residual;
  return out;
}

py::dict sync_from_views(const RealMatrix& y1_long, const RealMatrix& y2_long, int t_block,
                         std::array<int, 2> window, int tau1_anchor,
                         std::optional<double> gamma_e) {
  const SyncTrace trace = cca_sync(make_view(y1_long, 1), make_view(y2_long, 2), t_block,
                                   window, tau1_anchor, std::nullopt, gamma_e);
  py::dict out;
  out["offsets"] = trace.offsets;
  out["rho1"] = trace.rho1;
  out["tau_star"] = trace.tau_star;
  out["peak_found"] = trace.peak_found;
  out["solves"] = trace.solves;
  return out;
}

py::list rows_to_dicts(const std::vector<ResultRow>& rows) {
  py::list out;
  for (const ResultRow& row : rows) {
    py::dict d;
    d["scenario_id"] = row.scenario_id;
    d["snr_db"] = row.snr_db;
    d["detector"] = std::string(detector_name(row.detector));
    d["trials"] = row.trials;
    d["bit_errors"] = row.bit_errors;
    d["bits_total"] = row.bits_total;
    d["ber"] = row.ber;
    d["mean_rho1"] = row.mean_rho1;
    d["failed_trials"] = row.failed_trials;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_ccadet, m) {
  m.doc() = "Blind detection of cell-edge users via canonical correlation analysis";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<EnumerationCapError>(m, "EnumerationCapError", PyExc_ValueError);

  m.def("solve_cca", &cca_from_views, py::arg("y1"), py::arg("y2"), py::arg("n_components"),
        py::arg("ridge") = std::nullopt,
        "Two-view CCA of real-stacked views; returns (q1, q2, rho).");
  m.def("racma_factorize", &racma_from_array, py::arg("g"), py::arg("k_e"),
        "Constant-modulus factorization G = S·P; returns (s_hat, mixing_hat, residual).");
  m.def("resolve_ambiguity", &align_to_reference, py::arg("s_hat"), py::arg("s_ref"),
        "Signed-permutation alignment; returns (aligned, permutation, signs).");
  m.def("detect_cca_racma", &detect_from_views, py::arg("y1"), py::arg("y2"), py::arg("k_e"),
        py::arg("ridge") = std::nullopt,
        "Blind cell-edge detection from two real-stacked views.");
  m.def("cca_sync", &sync_from_views, py::arg("y1_long"), py::arg("y2_long"),
        py::arg("t_block"), py::arg("window"), py::arg("tau1_anchor") = 0,
        py::arg("gamma_e") = std::nullopt,
        "Correlation-peak frame synchronization over a delay window.");

  m.def("theoretical_rho_max", &theoretical_rho_max, py::arg("gamma_e"),
        "Large-system limit gamma/(gamma+1) of the first canonical correlation.");
  m.def(
      "principal_angles",
      [](const RealMatrix& a, const RealMatrix& b) { return principal_angles(a, b); },
      py::arg("a"), py::arg("b"), "Principal angles (radians, ascending) between column spans.");
  m.def(
      "los_probability",
      [](double d2d_m) { return los_probability(d2d_m); }, py::arg("d2d_m"),
      "Outdoor UMa line-of-sight probability at 2-D distance d2d_m metres.");
  m.def(
      "uma_path_gain",
      [](double d3d_m, double fc_ghz, bool los) {
        const PathGain g = uma_path_gain(d3d_m, fc_ghz, los);
        return py::make_tuple(g.gain, g.clamped);
      },
      py::arg("d3d_m"), py::arg("fc_ghz"), py::arg("los"),
      "Linear UMa path gain; returns (gain, clamped).");
  m.def(
      "array_response",
      [](double theta, int m_ant) { return array_response(theta, m_ant); }, py::arg("theta"),
      py::arg("m"), "Half-wavelength ULA response exp(i*pi*n*cos(theta)).");

  m.def(
      "run_experiment",
      [](const std::string& scenario_path, std::optional<int> trials,
         std::optional<std::uint64_t> seed, int threads,
         const std::vector<std::string>& overrides) {
        Scenario sc = load_scenario(scenario_path);
        if (trials) sc.trials = *trials;
        if (seed) sc.seed = *seed;
        for (const std::string& kv : overrides) apply_override(sc, kv);
        sc.validate();
        return rows_to_dicts(run_experiment(sc, threads));
      },
      py::arg("scenario_path"), py::arg("trials") = std::nullopt, py::arg("seed") = std::nullopt,
      py::arg("threads") = 1, py::arg("overrides") = std::vector<std::string>{},
      "Run a scenario file; returns one dict per (snr, detector) cell.");
}
