#include "ccadet/racma.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace ccadet {

namespace detail {
std::string shape_str(const char* name, Eigen::Index rows, Eigen::Index cols);
}

int racma_min_rows(int k_e) { return std::max(2 * k_e * k_e, 8); }

namespace {

constexpr double kRankTol = 1e-10;

double sign_pm1(double x) { return x < 0.0 ? -1.0 : 1.0; }

/// Least-squares mixing for fixed sources: argmin_P ‖G − S·P‖_F.
RealMatrix fit_mixing(const RealMatrix& s, const RealMatrix& g) {
  return s.completeOrthogonalDecomposition().solve(g);
}

/// All 2^k sign vectors as rows, in binary counting order (bit j → column j).
RealMatrix sign_table(int k) {
  const int n = 1 << k;
  RealMatrix table(n, k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      table(i, j) = (i >> j) & 1 ? -1.0 : 1.0;
    }
  }
  return table;
}

/// Per-row exact ±1 projection: each row of G is matched to the closest
/// sᵀ·P over all sign vectors s (ties to the lower enumeration index).
RealMatrix project_rows_exact(const RealMatrix& g, const RealMatrix& p) {
  const int k = static_cast<int>(p.rows());
  const RealMatrix table = sign_table(k);
  const RealMatrix cand = table * p;  // 2^k × k
  RealMatrix s(g.rows(), k);
  for (Eigen::Index t = 0; t < g.rows(); ++t) {
    int best = 0;
    double best_cost = (g.row(t) - cand.row(0)).squaredNorm();
    for (int j = 1; j < cand.rows(); ++j) {
      const double cost = (g.row(t) - cand.row(j)).squaredNorm();
      if (cost < best_cost) {
        best_cost = cost;
        best = j;
      }
    }
    s.row(t) = table.row(best);
  }
  return s;
}

/// Fallback projection for wide problems: sign of the least-squares source
/// estimate.
RealMatrix project_rows_sign(const RealMatrix& g, const RealMatrix& p) {
  const RealMatrix soft = p.transpose()
                              .completeOrthogonalDecomposition()
                              .solve(g.transpose())
                              .transpose();
  return soft.unaryExpr([](double x) { return sign_pm1(x); });
}

RealMatrix project_rows(const RealMatrix& g, const RealMatrix& p) {
  return p.rows() <= 8 ? project_rows_exact(g, p) : project_rows_sign(g, p);
}

UnmixResult finish(const RealMatrix& s, const RealMatrix& g) {
  UnmixResult out;
  out.s_hat = s;
  out.mixing_hat = fit_mixing(s, g);
  out.residual = (g - s * out.mixing_hat).norm();
  return out;
}

}  // namespace

UnmixResult racma_factorize(const MixtureBlock& block) {
  const RealMatrix& g = block.g;
  const int k = block.k_e;
  if (k < 0 || g.cols() != k) {
    throw DimensionError("racma_factorize: mixture must have k_e columns, got " +
                         detail::shape_str("g", g.rows(), g.cols()));
  }
  if (k == 0) {
    return UnmixResult{RealMatrix(g.rows(), 0), RealMatrix(0, 0), 0.0};
  }
  if (g.rows() < racma_min_rows(k)) {
    std::ostringstream os;
    os << "racma_factorize: " << g.rows() << " rows is below the identifiability floor "
       << racma_min_rows(k) << " for k_e = " << k;
    throw DimensionError(os.str());
  }

  // Step 1: column whitening by the thin SVD, with a rank gate.
  Eigen::JacobiSVD<RealMatrix> svd(g, Eigen::ComputeThinU);
  const RealVector& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[k - 1] <= kRankTol * sv[0]) {
    std::ostringstream os;
    os << "racma_factorize: mixture rank < k_e = " << k
       << " (non-identifiable; smallest/largest singular value " << sv[k - 1] << "/" << sv[0]
       << ")";
    throw NumericalError(os.str());
  }
  const RealMatrix u = svd.matrixU();  // n×k, orthonormal columns

  if (k == 1) {
    // A single binary source: constant modulus reduces to the sign pattern.
    const RealMatrix s = u.unaryExpr([](double x) { return sign_pm1(x); });
    return finish(s, g);
  }

  // Step 2: quadratic constant-modulus conditions. Row t of the system is the
  // half-vectorization of u_t·u_tᵀ (off-diagonal doubled), so q_tᵀ·vech(W)
  // evaluates u_tᵀ·W·u_t; every true unmixing rank-one W gives a constant
  // column, removed by row-centring in step 3.
  const Eigen::Index n = u.rows();
  const int m = k * (k + 1) / 2;
  RealMatrix q(n, m);
  for (Eigen::Index t = 0; t < n; ++t) {
    int idx = 0;
    for (int i = 0; i < k; ++i) {
      for (int j = i; j < k; ++j) {
        q(t, idx++) = (i == j ? 1.0 : 2.0) * u(t, i) * u(t, j);
      }
    }
  }

  // Step 3: k-dimensional null space of the centred system.
  const RealMatrix q_centered = q.rowwise() - q.colwise().mean();
  Eigen::JacobiSVD<RealMatrix> nsvd(q_centered, Eigen::ComputeThinV);
  const RealMatrix basis = nsvd.matrixV().rightCols(k);  // m×k, smallest σ

  // De-stack each basis vector into a symmetric k×k matrix.
  std::vector<RealMatrix> b(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    RealMatrix bc(k, k);
    int idx = 0;
    for (int i = 0; i < k; ++i) {
      for (int j = i; j < k; ++j) {
        bc(i, j) = basis(idx, c);
        bc(j, i) = basis(idx, c);
        ++idx;
      }
    }
    b[static_cast<std::size_t>(c)] = bc;
  }

  // Step 4: the basis matrices share the eigenbasis of the whitened unmixing,
  // so one generic (random) combination diagonalizes them all. A fixed stream
  // keeps the routine deterministic; clustered eigenvalues trigger one
  // re-draw.
  Rng combo_rng(0x5eed5eedULL);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  RealMatrix w_hat;
  for (int attempt = 0; attempt < 2; ++attempt) {
    RealMatrix mix = RealMatrix::Zero(k, k);
    for (int c = 0; c < k; ++c) {
      mix += coef(combo_rng) * b[static_cast<std::size_t>(c)];
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(mix);
    w_hat = es.eigenvectors();
    const RealVector& ev = es.eigenvalues();
    const double spread = std::max(ev[k - 1] - ev[0], 1e-300);
    double min_gap = spread;
    for (int i = 0; i + 1 < k; ++i) {
      min_gap = std::min(min_gap, ev[i + 1] - ev[i]);
    }
    if (min_gap >= 1e-3 * spread) break;
  }

  // Step 5: project to ±1 and one alternating-least-squares sweep.
  const RealMatrix soft = u * w_hat;
  const RealMatrix s0 = soft.unaryExpr([](double x) { return sign_pm1(x); });
  const RealMatrix p0 = fit_mixing(s0, g);
  const RealMatrix s1 = project_rows(g, p0);
  return finish(s1, g);
}

MixtureBlock reduce_to_mixture(const RealMatrix& stacked, int k_e) {
  if (k_e < 0 || k_e > std::min(stacked.rows(), stacked.cols())) {
    std::ostringstream os;
    os << "reduce_to_mixture: k_e = " << k_e << " impossible for " << stacked.rows() << "x"
       << stacked.cols() << " data";
    throw DimensionError(os.str());
  }
  if (k_e == 0) {
    return MixtureBlock{RealMatrix(stacked.cols(), 0), 0};
  }
  Eigen::JacobiSVD<RealMatrix> svd(stacked, Eigen::ComputeThinV);
  return MixtureBlock{svd.matrixV().leftCols(k_e), k_e};
}

Alignment resolve_ambiguity(const RealMatrix& s_hat, const RealMatrix& s_ref) {
  if (s_hat.rows() != s_ref.rows() || s_hat.cols() != s_ref.cols()) {
    throw DimensionError("resolve_ambiguity: estimate " +
                         detail::shape_str("s_hat", s_hat.rows(), s_hat.cols()) +
                         " does not match reference " +
                         detail::shape_str("s_ref", s_ref.rows(), s_ref.cols()));
  }
  const int k = static_cast<int>(s_ref.cols());
  Alignment out;
  out.permutation.resize(static_cast<std::size_t>(k));
  out.signs = RealVector::Ones(k);
  if (k == 0 || s_ref.rows() == 0) {
    out.aligned = s_hat;
    return out;
  }

  const RealMatrix corr = (s_ref.transpose() * s_hat) / static_cast<double>(s_ref.rows());
  const RealMatrix gain = corr.cwiseAbs();

  if (k <= 8) {
    // Exact assignment: first permutation (in lexicographic order) attaining
    // the maximum total |correlation| — deterministic tie handling.
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_total = -1.0;
    do {
      double total = 0.0;
      for (int r = 0; r < k; ++r) total += gain(r, perm[static_cast<std::size_t>(r)]);
      if (total > best_total + 1e-15) {
        best_total = total;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.permutation.assign(best.begin(), best.end());
  } else {
    // Greedy: repeatedly take the largest remaining |correlation| (ties to the
    // lower row, then lower column index).
    std::vector<bool> row_used(static_cast<std::size_t>(k), false);
    std::vector<bool> col_used(static_cast<std::size_t>(k), false);
    for (int step = 0; step < k; ++step) {
      int br = -1, bc = -1;
      double bv = -1.0;
      for (int r = 0; r < k; ++r) {
        if (row_used[static_cast<std::size_t>(r)]) continue;
        for (int c = 0; c < k; ++c) {
          if (col_used[static_cast<std::size_t>(c)]) continue;
          if (gain(r, c) > bv) {
            bv = gain(r, c);
            br = r;
            bc = c;
          }
        }
      }
      out.permutation[static_cast<std::size_t>(br)] = bc;
      row_used[static_cast<std::size_t>(br)] = true;
      col_used[static_cast<std::size_t>(bc)] = true;
    }
  }

  out.aligned.resize(s_hat.rows(), k);
  for (int r = 0; r < k; ++r) {
    const int c = out.permutation[static_cast<std::size_t>(r)];
    out.signs[r] = sign_pm1(corr(r, c));
    out.aligned.col(r) = out.signs[r] * s_hat.col(c);
  }
  return out;
}

namespace {

/// Decodes oracle candidate bits into a ±1 column (entry 0 fixed to +1).
RealVector bits_to_column(std::uint32_t bits, int t) {
  RealVector c(t);
  c[0] = 1.0;
  for (int i = 1; i < t; ++i) {
    c[i] = (bits >> (i - 1)) & 1u ? -1.0 : 1.0;
  }
  return c;
}

}  // namespace

UnmixResult cm_oracle_factorize(const RealMatrix& g, int k_e) {
  const int t = static_cast<int>(g.rows());
  if (t > 16 || k_e > 2 || k_e < 1) {
    std::ostringstream os;
    os << "cm_oracle_factorize: exhaustive search only supports t <= 16 and 1 <= k_e <= 2, got t = "
       << t << ", k_e = " << k_e;
    throw DimensionError(os.str());
  }
  if (g.cols() != k_e) {
    throw DimensionError("cm_oracle_factorize: mixture must have k_e columns, got " +
                         detail::shape_str("g", g.rows(), g.cols()));
  }
  if (t < 1) {
    throw DimensionError("cm_oracle_factorize: empty mixture");
  }

  const std::uint32_t n_cand = 1u << (t - 1);
  const double td = static_cast<double>(t);

  if (k_e == 1) {
    double best_gain = -1.0;
    std::uint32_t best_bits = 0;
    for (std::uint32_t i = 0; i < n_cand; ++i) {
      const double dot = bits_to_column(i, t).dot(g.col(0));
      if (std::abs(dot) > best_gain) {
        best_gain = std::abs(dot);
        best_bits = i;
      }
    }
    RealMatrix s(t, 1);
    s.col(0) = bits_to_column(best_bits, t);
    return finish(s, g);
  }

  // k_e == 2: precompute per-candidate dots with both mixture columns, use
  // popcount for candidate-candidate dots, and scan sign-normalized pairs.
  std::vector<double> dot1(n_cand), dot2(n_cand);
  for (std::uint32_t i = 0; i < n_cand; ++i) {
    const RealVector c = bits_to_column(i, t);
    dot1[i] = c.dot(g.col(0));
    dot2[i] = c.dot(g.col(1));
  }
  const double g_norm2 = g.squaredNorm();
  double best_fit = -1.0;  // tr(Mᵀ(SᵀS)⁻¹M), maximized
  std::uint32_t best_i = 0, best_j = 1;
  for (std::uint32_t i = 0; i + 1 < n_cand; ++i) {
    for (std::uint32_t j = i + 1; j < n_cand; ++j) {
      const int diff = __builtin_popcount(i ^ j);
      const double d = td - 2.0 * static_cast<double>(diff);  // cᵢᵀcⱼ
      const double det = td * td - d * d;
      if (det <= 0.0) continue;  // cⱼ = ±cᵢ, singular
      // (SᵀS)⁻¹ = [[t, -d], [-d, t]]/det ; M = SᵀG row-wise (a1 b1; a2 b2).
      const double a1 = dot1[i], b1 = dot2[i], a2 = dot1[j], b2 = dot2[j];
      const double fit = (td * (a1 * a1 + b1 * b1 + a2 * a2 + b2 * b2) -
                          2.0 * d * (a1 * a2 + b1 * b2)) /
                         det;
      if (fit > best_fit + 1e-12) {
        best_fit = fit;
        best_i = i;
        best_j = j;
      }
    }
  }
  (void)g_norm2;
  RealMatrix s(t, 2);
  s.col(0) = bits_to_column(best_i, t);
  s.col(1) = bits_to_column(best_j, t);
  return finish(s, g);
}

}  // namespace ccadet
