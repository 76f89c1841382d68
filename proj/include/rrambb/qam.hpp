#pragma once

// Gray-coded square M-QAM with unit average symbol energy. The first half of
// each symbol's bits picks the in-phase level, the second half the
// quadrature level; within a dimension level index i carries the Gray code
// i ^ (i >> 1), so neighbouring points differ in exactly one bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rrambb/complex_map.hpp"
#include "rrambb/error.hpp"

namespace rrambb {

using Bits = std::vector<std::uint8_t>;

class QamConstellation {
 public:
  explicit QamConstellation(int order) : order_(order) {
    int bits = 0;
    while ((1 << bits) < order) ++bits;
    if (!(order >= 4 && (1 << bits) == order && bits % 2 == 0))
      fail(ErrorKind::InvalidArgument, "QAM order " + std::to_string(order) + " is not a power of 4");
    bits_per_symbol_ = bits;
    levels_ = 1 << (bits / 2);
    spacing_ = std::sqrt(3.0 / (2.0 * (order - 1)));
    gray_to_index_.assign(static_cast<std::size_t>(levels_), 0);
    for (int i = 0; i < levels_; ++i) gray_to_index_[static_cast<std::size_t>(i ^ (i >> 1))] = i;
  }

  int order() const { return order_; }
  int bits_per_symbol() const { return bits_per_symbol_; }
  int levels() const { return levels_; }
  /// Half the minimum distance between points.
  double spacing() const { return spacing_; }

  double level_amplitude(int index) const { return (2.0 * index - levels_ + 1) * spacing_; }

  Complex point(unsigned label) const {
    const int half = bits_per_symbol_ / 2;
    const auto gi = static_cast<int>(label >> half);
    const auto gq = static_cast<int>(label & ((1u << half) - 1));
    return {level_amplitude(gray_to_index_[static_cast<std::size_t>(gi)]),
            level_amplitude(gray_to_index_[static_cast<std::size_t>(gq)])};
  }

  unsigned label(Complex s) const {
    const int half = bits_per_symbol_ / 2;
    return (gray(slice(s.real())) << half) | gray(slice(s.imag()));
  }

 private:
  int slice(double x) const {
    const double idx = std::round((x / spacing_ + levels_ - 1) / 2.0);
    return static_cast<int>(std::clamp(idx, 0.0, static_cast<double>(levels_ - 1)));
  }
  static unsigned gray(int i) { return static_cast<unsigned>(i ^ (i >> 1)); }

  int order_;
  int bits_per_symbol_;
  int levels_;
  double spacing_;
  std::vector<int> gray_to_index_;
};

inline ComplexVector qam_map(const Bits& bits, int order) {
  const QamConstellation c(order);
  const auto k = static_cast<std::size_t>(c.bits_per_symbol());
  if (!(bits.size() % k == 0))
    fail(ErrorKind::BadLength,
         std::to_string(bits.size()) + " bits do not fill whole " + std::to_string(order) + "-QAM symbols");
  ComplexVector out(static_cast<Eigen::Index>(bits.size() / k));
  for (Eigen::Index s = 0; s < out.size(); ++s) {
    unsigned label = 0;
    for (std::size_t b = 0; b < k; ++b) label = (label << 1) | (bits[static_cast<std::size_t>(s) * k + b] & 1u);
    out(s) = c.point(label);
  }
  return out;
}

/// Hard decision to the nearest constellation point. For a square grid the
/// per-dimension slice is the minimum-distance decision.
inline Bits qam_demap(const ComplexVector& symbols, int order) {
  const QamConstellation c(order);
  const int k = c.bits_per_symbol();
  Bits out;
  out.reserve(static_cast<std::size_t>(symbols.size() * k));
  for (Eigen::Index s = 0; s < symbols.size(); ++s) {
    const unsigned label = c.label(symbols(s));
    for (int b = k - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((label >> b) & 1u));
  }
  return out;
}

}  // namespace rrambb
