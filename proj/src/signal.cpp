#include "ccadet/signal.hpp"

#include <cmath>
#include <sstream>

namespace ccadet {

namespace {

RealMatrix random_bpsk(int t, int k, Rng& rng) {
  std::uniform_int_distribution<int> bit(0, 1);
  RealMatrix s(t, k);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < k; ++j) {
      s(i, j) = bit(rng) == 0 ? -1.0 : 1.0;
    }
  }
  return s;
}

}  // namespace

SymbolBlock generate_symbols(int t, int k, Rng& rng) {
  if (t < 0 || k < 0) {
    throw DimensionError("generate_symbols: dimensions must be non-negative");
  }
  return SymbolBlock{random_bpsk(t, k, rng), k, 0, 0};
}

SymbolBlock generate_frame(int t, const UserCounts& counts, Rng& rng) {
  counts.validate();
  SymbolBlock frame;
  frame.s = random_bpsk(t, counts.k_total(), rng);
  frame.k_common = counts.k_e();
  frame.k_private1 = counts.k_center(0);
  frame.k_private2 = counts.k_center(1);
  return frame;
}

ReceivedBlock synthesize_received(const ChannelRealization& chans,
                                  const SymbolBlock& frame, double sigma2,
                                  int bs_id, Rng& rng) {
  if (bs_id != 1 && bs_id != 2) {
    throw DimensionError("synthesize_received: bs_id must be 1 or 2");
  }
  if (sigma2 < 0.0) {
    throw DimensionError("synthesize_received: noise variance must be non-negative");
  }
  const ComplexMatrix& h = chans.h_bs[bs_id - 1];
  if (frame.k() != h.cols()) {
    std::ostringstream os;
    os << "synthesize_received: frame has " << frame.k() << " users but the channel has "
       << h.cols();
    throw DimensionError(os.str());
  }
  ReceivedBlock out;
  out.bs_id = bs_id;
  out.noise_variance = sigma2;
  out.y = h * frame.s.transpose();
  // Standard-normal draw scaled afterwards: the same rng stream realizes the
  // same noise shape at every sigma2 (SNR-paired runs).
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double part_std = std::sqrt(sigma2 / 2.0);
  for (Eigen::Index col = 0; col < out.y.cols(); ++col) {
    for (Eigen::Index row = 0; row < out.y.rows(); ++row) {
      const Complex w(gauss(rng), gauss(rng));
      out.y(row, col) += part_std * w;
    }
  }
  return out;
}

double calibrate_noise(double target_snr_db, const ChannelRealization& chans) {
  const int k_e = chans.counts.k_e();
  if (k_e == 0) {
    throw DimensionError("calibrate_noise: realization has no cell-edge user");
  }
  double p_e = 0.0;
  for (int b = 0; b < 2; ++b) {
    for (int u = 0; u < k_e; ++u) {
      p_e += chans.h_bs[b].col(u).squaredNorm();
    }
  }
  p_e /= static_cast<double>(2 * k_e);
  return p_e * std::pow(10.0, -target_snr_db / 10.0);
}

ViewMatrix complex_to_real_stack(const ReceivedBlock& y) {
  RealMatrix stacked(2 * y.y.rows(), y.y.cols());
  stacked.topRows(y.y.rows()) = y.y.real();
  stacked.bottomRows(y.y.rows()) = y.y.imag();
  return ViewMatrix{std::move(stacked), y.bs_id};
}

ComplexMatrix real_unstack(const RealMatrix& stacked) {
  if (stacked.rows() % 2 != 0) {
    throw DimensionError("real_unstack: row count must be even, got " +
                         detail::shape_str("stacked", stacked.rows(), stacked.cols()));
  }
  const Eigen::Index m = stacked.rows() / 2;
  ComplexMatrix y(m, stacked.cols());
  y.real() = stacked.topRows(m);
  y.imag() = stacked.bottomRows(m);
  return y;
}

ReceivedBlock apply_delay(const ReceivedBlock& y, int tau, int total_len,
                          const std::optional<ComplexMatrix>& padding) {
  const Eigen::Index t = y.y.cols();
  if (tau < 0 || tau + t > total_len) {
    std::ostringstream os;
    os << "apply_delay: offset " << tau << " does not fit a " << t << "-column block in "
       << total_len << " columns (valid offsets 0.." << total_len - t << ")";
    throw DimensionError(os.str());
  }
  ReceivedBlock out;
  out.bs_id = y.bs_id;
  out.noise_variance = y.noise_variance;
  out.y = ComplexMatrix::Zero(y.y.rows(), total_len);
  out.y.middleCols(tau, t) = y.y;
  if (padding) {
    const Eigen::Index pad_cols = total_len - t;
    if (padding->rows() != y.y.rows() || padding->cols() != pad_cols) {
      std::ostringstream os;
      os << "apply_delay: padding must be " << y.y.rows() << "x" << pad_cols << ", got "
         << padding->rows() << "x" << padding->cols();
      throw DimensionError(os.str());
    }
    out.y.leftCols(tau) = padding->leftCols(tau);
    out.y.rightCols(pad_cols - tau) = padding->rightCols(pad_cols - tau);
  }
  return out;
}

ReceivedBlock extract_block(const ReceivedBlock& y, int tau, int t_block) {
  if (tau < 0 || t_block < 0 || tau + t_block > y.y.cols()) {
    std::ostringstream os;
    os << "extract_block: slice [" << tau << ", " << tau + t_block << ") outside a "
       << y.y.cols() << "-column block";
    throw DimensionError(os.str());
  }
  ReceivedBlock out;
  out.bs_id = y.bs_id;
  out.noise_variance = y.noise_variance;
  out.y = y.y.middleCols(tau, t_block);
  return out;
}

}  // namespace ccadet
