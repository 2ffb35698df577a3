#include "ccadet/analysis.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ccadet/cca.hpp"

namespace ccadet {

namespace detail {
std::string shape_str(const char* name, Eigen::Index rows, Eigen::Index cols);
}

double theoretical_rho_max(double gamma_e) {
  if (gamma_e < 0.0) {
    throw DimensionError("theoretical_rho_max: gamma_e must be non-negative");
  }
  return gamma_e / (gamma_e + 1.0);
}

RealMatrix build_f_matrix(const std::vector<SnrTriple>& snrs, int k_e, int k_center_1,
                          const std::optional<RealMatrix>& gram1_inv,
                          const std::optional<RealMatrix>& gram2_inv) {
  const int k_s = static_cast<int>(snrs.size());
  if (k_e < 0 || k_center_1 < 0 || k_e + k_center_1 > k_s) {
    std::ostringstream os;
    os << "build_f_matrix: counts (k_e " << k_e << ", k_center_1 " << k_center_1
       << ") exceed the " << k_s << " supplied users";
    throw DimensionError(os.str());
  }
  if (gram1_inv.has_value() != gram2_inv.has_value()) {
    throw DimensionError("build_f_matrix: supply both Gram inverses or neither");
  }
  for (const SnrTriple& s : snrs) {
    if (s.gamma_e < 0.0 || s.gamma_p < 0.0 || s.gamma_f < 0.0) {
      throw DimensionError("build_f_matrix: SNRs must be non-negative");
    }
  }

  // Per-user SNR at each BS under the ordering [edge | cell-1 | cell-2].
  RealVector g1(k_s), g2(k_s);
  for (int j = 0; j < k_s; ++j) {
    if (j < k_e) {
      g1[j] = snrs[static_cast<std::size_t>(j)].gamma_e;
      g2[j] = snrs[static_cast<std::size_t>(j)].gamma_e;
    } else if (j < k_e + k_center_1) {
      g1[j] = snrs[static_cast<std::size_t>(j)].gamma_p;
      g2[j] = snrs[static_cast<std::size_t>(j)].gamma_f;
    } else {
      g1[j] = snrs[static_cast<std::size_t>(j)].gamma_f;
      g2[j] = snrs[static_cast<std::size_t>(j)].gamma_p;
    }
  }

  RealMatrix inv1 = RealMatrix::Identity(k_s, k_s);
  RealMatrix inv2 = RealMatrix::Identity(k_s, k_s);
  if (gram1_inv) {
    if (gram1_inv->rows() != k_s || gram1_inv->cols() != k_s ||
        gram2_inv->rows() != k_s || gram2_inv->cols() != k_s) {
      throw DimensionError("build_f_matrix: Gram inverses must be k_s x k_s");
    }
    inv1 = *gram1_inv;
    inv2 = *gram2_inv;
  }

  const RealVector g12 = (g1.array() * g2.array()).sqrt();
  RealMatrix a = RealMatrix(g1.asDiagonal()) + inv1;
  RealMatrix b = RealMatrix(g2.asDiagonal()) + inv2;
  const RealMatrix g12d = g12.asDiagonal();
  return a.ldlt().solve(g12d * b.ldlt().solve(g12d).eval());
}

RealVector principal_angles(const RealMatrix& a, const RealMatrix& b) {
  if (a.cols() != b.cols() || a.rows() != b.rows()) {
    throw DimensionError("principal_angles: subspace bases must share their shape, got " +
                         detail::shape_str("a", a.rows(), a.cols()) + " vs " +
                         detail::shape_str("b", b.rows(), b.cols()));
  }
  if (a.cols() == 0) return RealVector(0);
  auto thin_q = [](const RealMatrix& m, const char* name) {
    Eigen::ColPivHouseholderQR<RealMatrix> qr(m);
    if (qr.rank() < m.cols()) {
      throw NumericalError(std::string("principal_angles: ") + name +
                           " does not have full column rank");
    }
    Eigen::HouseholderQR<RealMatrix> hqr(m);
    return RealMatrix(RealMatrix(hqr.householderQ()).leftCols(m.cols()));
  };
  const RealMatrix qa = thin_q(a, "a");
  const RealMatrix qb = thin_q(b, "b");
  Eigen::JacobiSVD<RealMatrix> svd(qa.transpose() * qb);
  RealVector angles(a.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    angles[i] = std::acos(std::min(1.0, std::max(-1.0, svd.singularValues()[i])));
  }
  return angles;  // σ descending ⇒ angles ascending
}

void AppendixScenario::validate() const {
  if (m <= k1 + k2) {
    std::ostringstream os;
    os << "synthetic scenario needs m > k1 + k2 (dimensionality condition), got m = " << m
       << " with k1 + k2 = " << k1 + k2;
    throw ConfigError(os.str());
  }
  if (k_e < 1 || k_e >= k1) {
    throw ConfigError("synthetic scenario needs 1 <= k_e < k1");
  }
  if (k2 < 1 || t < 2) {
    throw ConfigError("synthetic scenario needs k2 >= 1 and t >= 2");
  }
  if (gamma_e < 0.0 || gamma_p < 0.0 || gamma_f < 0.0 || sigma2 < 0.0) {
    throw ConfigError("synthetic scenario needs non-negative powers");
  }
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ComplexMatrix iid_channel(int m, int k, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double part = std::sqrt(1.0 / (2.0 * m));
  ComplexMatrix h(m, k);
  for (int c = 0; c < k; ++c) {
    for (int r = 0; r < m; ++r) {
      h(r, c) = Complex(part * gauss(rng), part * gauss(rng));
    }
  }
  return h;
}

ViewMatrix realified_view(const ComplexMatrix& y, int view_id) {
  RealMatrix stacked(2 * y.rows(), y.cols());
  stacked.topRows(y.rows()) = y.real();
  stacked.bottomRows(y.rows()) = y.imag();
  return make_view(std::move(stacked), view_id);
}

}  // namespace

RhoTheoryReport empirical_rho_vs_theory(const AppendixScenario& sc, int trials, Rng& rng) {
  sc.validate();
  if (trials < 1) {
    throw DimensionError("empirical_rho_vs_theory: trials must be positive");
  }
  const int k_s = sc.k1 + sc.k2;
  const int kc1 = sc.k1 - sc.k_e;

  // Per-user amplitudes at each BS: edge users arrive with equal SNR γe on
  // both links; centre users with γp at the serving BS and γf at the other.
  // γ is the per-real-dimension SNR of the realified pipeline: a real ±1
  // source occupies one real direction (E‖h‖² = 1) against σ²/2 noise per
  // real part, so amplitude² = γ·σ²/2.
  const double noise_per_dim = sc.sigma2 > 0.0 ? 0.5 * sc.sigma2 : 1.0;
  RealVector amp1(k_s), amp2(k_s);
  for (int j = 0; j < k_s; ++j) {
    if (j < sc.k_e) {
      amp1[j] = amp2[j] = std::sqrt(sc.gamma_e * noise_per_dim);
    } else if (j < sc.k_e + kc1) {
      amp1[j] = std::sqrt(sc.gamma_p * noise_per_dim);
      amp2[j] = std::sqrt(sc.gamma_f * noise_per_dim);
    } else {
      amp1[j] = std::sqrt(sc.gamma_f * noise_per_dim);
      amp2[j] = std::sqrt(sc.gamma_p * noise_per_dim);
    }
  }

  RhoTheoryReport report;
  report.gamma_e = sc.gamma_e;
  report.theoretical_rho = theoretical_rho_max(sc.gamma_e);
  report.trials = trials;

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> bit(0, 1);
  std::vector<double> rho_errors;
  std::vector<double> max_angles;
  double err_sum = 0.0;

  for (int trial = 0; trial < trials; ++trial) {
    const ComplexMatrix h1 = iid_channel(sc.m, k_s, rng);
    const ComplexMatrix h2 = iid_channel(sc.m, k_s, rng);
    RealMatrix b(sc.t, k_s);
    for (int t = 0; t < sc.t; ++t) {
      for (int j = 0; j < k_s; ++j) {
        b(t, j) = bit(rng) == 0 ? -1.0 : 1.0;
      }
    }
    const double part = std::sqrt(sc.sigma2 / 2.0);
    ComplexMatrix y1 = h1 * amp1.asDiagonal() * b.transpose().cast<Complex>();
    ComplexMatrix y2 = h2 * amp2.asDiagonal() * b.transpose().cast<Complex>();
    for (Eigen::Index c = 0; c < y1.cols(); ++c) {
      for (Eigen::Index r = 0; r < y1.rows(); ++r) {
        y1(r, c) += Complex(part * gauss(rng), part * gauss(rng));
        y2(r, c) += Complex(part * gauss(rng), part * gauss(rng));
      }
    }

    // Sample CCA across all 2m raw dimensions overfits once 2m is not tiny
    // against t — the spurious-correlation edge (~2·sqrt(2m/t)) swamps the
    // prediction at m = 64. The prediction describes the signal subspace, so
    // estimate it there: project each view onto its top k1+k2 principal
    // directions (each real BPSK source spans one real direction).
    const auto signal_subspace = [k_s](const ViewMatrix& v) {
      const RealMatrix c =
          v.data * v.data.transpose() / static_cast<double>(v.data.cols());
      Eigen::SelfAdjointEigenSolver<RealMatrix> eig(c);
      const RealMatrix u = eig.eigenvectors().rightCols(k_s);  // ascending order
      return make_view(u.transpose() * v.data, v.view_id);
    };
    const ViewMatrix v1 = signal_subspace(realified_view(y1, 1));
    const ViewMatrix v2 = signal_subspace(realified_view(y2, 2));
    const CorrelationSet corr = sample_correlations(v1, v2);
    const CanonicalSolution sol = solve_cca(corr, sc.k_e, default_ridge(corr));

    const double err = std::abs(sol.rho[0] - report.theoretical_rho);
    rho_errors.push_back(err);
    err_sum += err;
    report.rho1_samples.push_back(sol.rho[0]);

    const RealMatrix g1 = project(v1, sol.q1);
    const RealVector angles = principal_angles(g1, b.leftCols(sc.k_e));
    max_angles.push_back(angles.size() > 0 ? angles[angles.size() - 1] : 0.0);
  }

  report.mean_abs_rho_error = err_sum / static_cast<double>(trials);
  report.median_abs_rho_error = median_of(rho_errors);
  report.median_max_angle_rad = median_of(max_angles);
  return report;
}

}  // namespace ccadet
