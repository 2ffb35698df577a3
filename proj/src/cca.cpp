#include "ccadet/cca.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "internal.hpp"

namespace ccadet {

namespace detail {

std::string shape_str(const char* name, Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << name << " (" << rows << "x" << cols << ")";
  return os.str();
}

}  // namespace detail

ViewMatrix make_view(RealMatrix data, int view_id) {
  if (view_id != 1 && view_id != 2) {
    std::ostringstream os;
    os << "view_id must be 1 or 2, got " << view_id;
    throw DimensionError(os.str());
  }
  return ViewMatrix{std::move(data), view_id};
}

ViewMatrix center_rows(const ViewMatrix& y) {
  ViewMatrix out = y;
  out.data.colwise() -= y.data.rowwise().mean();
  return out;
}

CorrelationSet sample_correlations(const ViewMatrix& y1, const ViewMatrix& y2) {
  if (y1.cols() != y2.cols() || y1.cols() == 0) {
    throw DimensionError("sample_correlations: views need the same nonzero sample count, got " +
                         detail::shape_str("y1", y1.rows(), y1.cols()) + " vs " +
                         detail::shape_str("y2", y2.rows(), y2.cols()));
  }
  const double t = static_cast<double>(y1.cols());
  CorrelationSet corr;
  corr.r11 = (y1.data * y1.data.transpose()) / t;
  corr.r22 = (y2.data * y2.data.transpose()) / t;
  corr.r12 = (y1.data * y2.data.transpose()) / t;
  // Symmetrize away roundoff so downstream factorizations see exact symmetry.
  corr.r11 = ((corr.r11 + corr.r11.transpose()) / 2.0).eval();
  corr.r22 = ((corr.r22 + corr.r22.transpose()) / 2.0).eval();
  return corr;
}

double default_ridge(const CorrelationSet& corr) {
  const double t1 = corr.dim1() > 0 ? corr.r11.trace() / static_cast<double>(corr.dim1()) : 0.0;
  const double t2 = corr.dim2() > 0 ? corr.r22.trace() / static_cast<double>(corr.dim2()) : 0.0;
  return 1e-8 * 0.5 * (t1 + t2);
}

namespace internal {

constexpr double kMaxCondition = 1e12;

void check_correlation(const RealMatrix& r, const char* name) {
  if (r.rows() != r.cols()) {
    throw DimensionError(std::string("solve_cca: ") + name + " must be square, got " +
                         detail::shape_str(name, r.rows(), r.cols()));
  }
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw NumericalError(std::string("solve_cca: ") + name + " is not symmetric within 1e-10");
  }
}

Eigen::LLT<RealMatrix> whitener(const RealMatrix& r, double ridge, const char* name) {
  RealMatrix reg = r;
  reg.diagonal().array() += ridge;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(reg, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    std::ostringstream os;
    os << "solve_cca: " << name << " + ridge*I is singular or ill-conditioned (eigenvalue range ["
       << lo << ", " << hi << "], ridge " << ridge << "); increase the ridge";
    throw NumericalError(os.str());
  }
  Eigen::LLT<RealMatrix> llt(reg);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "solve_cca: Cholesky of " << name << " + ridge*I failed; increase the ridge";
    throw NumericalError(os.str());
  }
  return llt;
}

}  // namespace internal

namespace {

/// Makes the largest-magnitude entry of each q1 column positive (first such
/// entry on ties) and flips the paired q2 column with it.
void fix_column_signs(RealMatrix& q1, RealMatrix& q2) {
  for (Eigen::Index n = 0; n < q1.cols(); ++n) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < q1.rows(); ++i) {
      const double mag = std::abs(q1(i, n));
      if (mag > best) {
        best = mag;
        imax = i;
      }
    }
    if (q1(imax, n) < 0.0) {
      q1.col(n) = -q1.col(n);
      q2.col(n) = -q2.col(n);
    }
  }
}

}  // namespace

CanonicalSolution solve_cca(const CorrelationSet& corr, int n_components, double ridge) {
  internal::check_correlation(corr.r11, "r11");
  internal::check_correlation(corr.r22, "r22");
  if (corr.r12.rows() != corr.dim1() || corr.r12.cols() != corr.dim2()) {
    throw DimensionError("solve_cca: r12 must be dim1 x dim2, got " +
                         detail::shape_str("r12", corr.r12.rows(), corr.r12.cols()));
  }
  const int n_max = static_cast<int>(std::min(corr.dim1(), corr.dim2()));
  if (n_components < 1 || n_components > n_max) {
    std::ostringstream os;
    os << "solve_cca: n_components " << n_components << " outside [1, " << n_max
       << "] for views of dimension " << corr.dim1() << " and " << corr.dim2();
    throw DimensionError(os.str());
  }
  if (ridge < 0.0) {
    throw DimensionError("solve_cca: ridge must be non-negative");
  }

  const Eigen::LLT<RealMatrix> l1 = internal::whitener(corr.r11, ridge, "r11");
  const Eigen::LLT<RealMatrix> l2 = internal::whitener(corr.r22, ridge, "r22");

  // Whitened cross-correlation C = L1⁻¹·r12·L2⁻ᵀ; its singular values are the
  // canonical correlations and its singular vectors map back through the
  // whiteners (equivalently, q2 follows from q1 via r22⁻¹·r21·q1/ρ).
  RealMatrix c = l1.matrixL().solve(corr.r12);
  c = l2.matrixL().solve(c.transpose()).transpose();
  Eigen::JacobiSVD<RealMatrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);

  CanonicalSolution sol;
  sol.ridge = ridge;
  sol.rho = svd.singularValues().head(n_components);
  sol.q1 = l1.matrixU().solve(svd.matrixU().leftCols(n_components));
  sol.q2 = l2.matrixU().solve(svd.matrixV().leftCols(n_components));
  fix_column_signs(sol.q1, sol.q2);
  return sol;
}

int select_components(const RealVector& rho, double rho_min) {
  int n = 0;
  while (n < rho.size() && rho[n] >= rho_min) ++n;
  return n;
}

CanonicalSolution solve_cca_auto(const CorrelationSet& corr, double rho_min,
                                 std::optional<double> ridge) {
  const double r = ridge.value_or(default_ridge(corr));
  const int n_max = static_cast<int>(std::min(corr.dim1(), corr.dim2()));
  CanonicalSolution full = solve_cca(corr, n_max, r);
  const int n = select_components(full.rho, rho_min);
  CanonicalSolution sol;
  sol.ridge = full.ridge;
  sol.rho = full.rho.head(n);
  sol.q1 = full.q1.leftCols(n);
  sol.q2 = full.q2.leftCols(n);
  return sol;
}

RealMatrix project(const ViewMatrix& y, const RealMatrix& q) {
  if (q.rows() != y.rows()) {
    throw DimensionError("project: direction rows must match view rows, got " +
                         detail::shape_str("q", q.rows(), q.cols()) + " for " +
                         detail::shape_str("y", y.rows(), y.cols()));
  }
  return y.data.transpose() * q;
}

double maxvar_objective(const RealMatrix& g, const std::vector<RealMatrix>& projections) {
  double cost = 0.0;
  for (const RealMatrix& p : projections) {
    if (p.rows() != g.rows() || p.cols() != g.cols()) {
      throw DimensionError("maxvar_objective: projection shape " +
                           detail::shape_str("p", p.rows(), p.cols()) + " differs from " +
                           detail::shape_str("g", g.rows(), g.cols()));
    }
    cost += (p - g).squaredNorm();
  }
  return cost;
}

}  // namespace ccadet
