#pragma once

// Block-fading multipath MIMO channel. Tap l is an n_r x n_t matrix; with
// unit-power taps CN(0, 1/L) every antenna pair has unit average gain. The
// per-sub-carrier matrix is the (unnormalized) DFT of the tap sequence,
// H^(k) = sum_l h_l exp(-2 pi i k l / n_c), which is what a unitary OFDM
// chain with a long enough cyclic prefix sees.

#include <cmath>
#include <numbers>
#include <vector>

#include "rrambb/complex_map.hpp"
#include "rrambb/error.hpp"
#include "rrambb/random.hpp"
#include "rrambb/system_config.hpp"

namespace rrambb {

struct ChannelRealization {
  std::vector<ComplexMatrix> taps;         // channel_taps matrices, n_r x n_t
  std::vector<ComplexMatrix> subcarriers;  // n_c matrices, n_r x n_t
};

inline Complex complex_normal(RandomStream& rng, double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = rng.normal();
  const double im = rng.normal();
  return {s * re, s * im};
}

inline std::vector<ComplexMatrix> subcarrier_response(const std::vector<ComplexMatrix>& taps, int n_c) {
  std::vector<ComplexMatrix> h(static_cast<std::size_t>(n_c));
  for (int k = 0; k < n_c; ++k) {
    ComplexMatrix acc = ComplexMatrix::Zero(taps.front().rows(), taps.front().cols());
    for (std::size_t l = 0; l < taps.size(); ++l) {
      const auto kl = static_cast<double>((static_cast<long long>(k) * static_cast<long long>(l)) % n_c);
      acc += std::polar(1.0, -2.0 * std::numbers::pi * kl / n_c) * taps[l];
    }
    h[static_cast<std::size_t>(k)] = std::move(acc);
  }
  return h;
}

inline ChannelRealization generate_channel(const SystemConfig& cfg, RandomStream& rng) {
  ChannelRealization ch;
  switch (cfg.channel) {
    case ChannelModel::rayleigh: {
      const double var = 1.0 / cfg.channel_taps;
      for (int l = 0; l < cfg.channel_taps; ++l) {
        ComplexMatrix t(cfg.n_r, cfg.n_t);
        for (Eigen::Index j = 0; j < t.cols(); ++j)
          for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = complex_normal(rng, var);
        ch.taps.push_back(std::move(t));
      }
      break;
    }
    case ChannelModel::awgn: ch.taps.push_back(ComplexMatrix::Identity(cfg.n_r, cfg.n_t)); break;
    case ChannelModel::fixed: ch.taps.push_back(cfg.fixed_channel); break;
  }
  ch.subcarriers = subcarrier_response(ch.taps, cfg.n_c);
  return ch;
}

/// Linear convolution of each transmit stream with the taps, truncated to
/// the input length. Per-symbol truncation is exact when the cyclic prefix
/// covers the channel memory, because the inter-symbol tail only lands in
/// the next symbol's prefix.
inline std::vector<ComplexVector> apply_channel(const ChannelRealization& ch, const std::vector<ComplexVector>& tx) {
  const Eigen::Index n_r = ch.taps.front().rows();
  const Eigen::Index n_t = ch.taps.front().cols();
  require(static_cast<Eigen::Index>(tx.size()) == n_t, ErrorKind::ShapeMismatch, "one stream per transmit antenna");
  const Eigen::Index len = tx.front().size();
  std::vector<ComplexVector> rx(static_cast<std::size_t>(n_r), ComplexVector::Zero(len));
  for (std::size_t l = 0; l < ch.taps.size(); ++l) {
    const auto shift = static_cast<Eigen::Index>(l);
    if (shift >= len) break;
    for (Eigen::Index r = 0; r < n_r; ++r) {
      for (Eigen::Index a = 0; a < n_t; ++a) {
        const Complex h = ch.taps[l](r, a);
        if (h == Complex(0.0, 0.0)) continue;
        rx[static_cast<std::size_t>(r)].tail(len - shift) += h * tx[static_cast<std::size_t>(a)].head(len - shift);
      }
    }
  }
  return rx;
}

inline void add_noise(std::vector<ComplexVector>& rx, double variance, RandomStream& rng) {
  for (auto& v : rx)
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += complex_normal(rng, variance);
}

}  // namespace rrambb
