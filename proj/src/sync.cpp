#include "ccadet/sync.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ccadet/analysis.hpp"
#include "internal.hpp"

namespace ccadet {

PowerIterResult first_canonical_correlation(const ViewMatrix& y1, const ViewMatrix& y2,
                                            std::optional<double> ridge, int max_iters,
                                            double tol) {
  const CorrelationSet corr = sample_correlations(y1, y2);
  const double r = ridge.value_or(default_ridge(corr));

  PowerIterResult out;
  out.q1 = RealVector::Zero(corr.dim1());
  out.q2 = RealVector::Zero(corr.dim2());
  // An (effectively) empty view carries no correlation at all.
  if (corr.r11.trace() + r <= 0.0 || corr.r22.trace() + r <= 0.0) {
    out.converged = true;
    return out;
  }

  const Eigen::LLT<RealMatrix> l1 = internal::whitener(corr.r11, r, "r11");
  const Eigen::LLT<RealMatrix> l2 = internal::whitener(corr.r22, r, "r22");
  RealMatrix b = l1.matrixL().solve(corr.r12);
  b = l2.matrixL().solve(b.transpose()).transpose();

  // Power iteration on B·Bᵀ; the dominant singular value of B is ρ₁. The
  // residual bound ‖A·v − λ·v‖ ≤ tol·2√λ keeps the ρ error within tol.
  RealVector v = RealVector::Ones(b.rows()).normalized();
  double lambda = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    out.iterations = it;
    const RealVector w = b * (b.transpose() * v);
    lambda = v.dot(w);
    const double wnorm = w.norm();
    if (wnorm <= 1e-300) {  // B ≈ 0: zero cross-correlation
      lambda = 0.0;
      out.converged = true;
      break;
    }
    const double resid = (w - lambda * v).norm();
    v = w / wnorm;
    if (resid <= tol * 2.0 * std::sqrt(std::max(lambda, tol * tol))) {
      out.converged = true;
      break;
    }
  }

  out.rho1 = std::sqrt(std::max(lambda, 0.0));
  out.q1 = l1.matrixU().solve(v);
  if (out.rho1 > 0.0) {
    const RealVector v2 = (b.transpose() * v) / out.rho1;
    out.q2 = l2.matrixU().solve(v2);
  }
  // Same deterministic sign convention as the full solver.
  Eigen::Index imax = 0;
  out.q1.cwiseAbs().maxCoeff(&imax);
  if (out.q1[imax] < 0.0) {
    out.q1 = -out.q1;
    out.q2 = -out.q2;
  }
  return out;
}

SyncTrace cca_sync(const ViewMatrix& y1_long, const ViewMatrix& y2_long, int t_block,
                   std::array<int, 2> window, int tau1_anchor,
                   std::optional<double> ridge, std::optional<double> gamma_e) {
  if (t_block < 1) {
    throw DimensionError("cca_sync: t_block must be positive");
  }
  if (tau1_anchor < 0 || tau1_anchor + t_block > y1_long.cols()) {
    std::ostringstream os;
    os << "cca_sync: anchor " << tau1_anchor << " does not fit a " << t_block
       << "-column slice in view 1 (" << y1_long.cols() << " columns)";
    throw DimensionError(os.str());
  }
  if (window[0] > window[1] || window[0] < 0 || window[1] + t_block > y2_long.cols()) {
    std::ostringstream os;
    os << "cca_sync: window [" << window[0] << ", " << window[1] << "] does not fit a "
       << t_block << "-column slice in view 2 (" << y2_long.cols() << " columns)";
    throw DimensionError(os.str());
  }

  const ViewMatrix slice1 = make_view(y1_long.data.middleCols(tau1_anchor, t_block), 1);

  SyncTrace trace;
  trace.window = window;
  trace.tau1_anchor = tau1_anchor;
  const int n_offsets = window[1] - window[0] + 1;
  trace.offsets.resize(static_cast<std::size_t>(n_offsets));
  trace.rho1.resize(n_offsets);

  double best = -1.0;
  for (int i = 0; i < n_offsets; ++i) {
    const int tau2 = window[0] + i;
    const ViewMatrix slice2 = make_view(y2_long.data.middleCols(tau2, t_block), 2);
    const PowerIterResult res = first_canonical_correlation(slice1, slice2, ridge);
    ++trace.solves;
    trace.offsets[static_cast<std::size_t>(i)] = tau2;
    trace.rho1[i] = res.rho1;
    if (res.rho1 > best) {  // strict: ties keep the smaller offset
      best = res.rho1;
      trace.tau_star = tau2;
    }
  }

  const double threshold = gamma_e ? 0.5 * theoretical_rho_max(*gamma_e) : 0.4;
  trace.peak_found = best >= threshold;
  return trace;
}

std::pair<ViewMatrix, ViewMatrix> align_and_extract(const ViewMatrix& y1_long,
                                                    const ViewMatrix& y2_long,
                                                    const SyncTrace& trace, int t_block) {
  if (trace.tau1_anchor < 0 || trace.tau1_anchor + t_block > y1_long.cols() ||
      trace.tau_star < 0 || trace.tau_star + t_block > y2_long.cols()) {
    throw DimensionError("align_and_extract: trace offsets do not fit the provided blocks");
  }
  return {make_view(y1_long.data.middleCols(trace.tau1_anchor, t_block), 1),
          make_view(y2_long.data.middleCols(trace.tau_star, t_block), 2)};
}

}  // namespace ccadet
