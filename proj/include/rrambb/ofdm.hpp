#pragma once

// OFDM modulation with the unitary DFT W_kl = exp(-2 pi i k l / n) / sqrt(n).
// Exact mode is the digital reference; crossbar mode evaluates R(W) in one
// analog step, and the inverse drives the same array from the transposed side
// since R(W)^T = R(W^H).

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "rrambb/complex_map.hpp"
#include "rrambb/crossbar.hpp"
#include "rrambb/error.hpp"
#include "rrambb/ledger.hpp"

namespace rrambb {

class DftOperator {
 public:
  explicit DftOperator(Eigen::Index n_c) : n_c_(n_c) {
    require(n_c >= 2, ErrorKind::InvalidArgument, "DFT size must be at least 2");
  }

  Eigen::Index size() const { return n_c_; }
  bool is_crossbar() const { return pair_ != nullptr; }
  const CrossbarPair& pair() const {
    require(pair_ != nullptr, ErrorKind::ModeMismatch, "DFT operator has no programmed crossbar");
    return *pair_;
  }

  /// W as a dense complex matrix.
  ComplexMatrix matrix() const {
    ComplexMatrix w(n_c_, n_c_);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_c_));
    for (Eigen::Index k = 0; k < n_c_; ++k) {
      for (Eigen::Index l = 0; l < n_c_; ++l) {
        // Reduce k*l modulo n before scaling so large indices keep full precision.
        const auto kl = static_cast<double>((k * l) % n_c_);
        const double phase = -2.0 * std::numbers::pi * kl / static_cast<double>(n_c_);
        w(k, l) = std::polar(scale, phase);
      }
    }
    return w;
  }

  /// Same operator, evaluated on `pair` (which should hold R(W)).
  DftOperator with_crossbar(std::shared_ptr<const CrossbarPair> pair) const {
    DftOperator op(n_c_);
    op.pair_ = std::move(pair);
    return op;
  }

 private:
  Eigen::Index n_c_;
  std::shared_ptr<const CrossbarPair> pair_;
};

inline DftOperator dft_matrix(Eigen::Index n_c) { return DftOperator(n_c); }

struct ProgrammedDft {
  DftOperator op;
  EnergyLatencyLedger ledger;
};

/// Writes R(W) into a fresh differential pair.
inline ProgrammedDft program_dft(const DftOperator& op, const ProgramOptions& options, const DeviceParams& params,
                                 RandomStream& rng) {
  ProgramOutcome out = program_matrix(real_mapping(op.matrix()), options, params, rng);
  return {op.with_crossbar(std::make_shared<const CrossbarPair>(std::move(out.pair))), std::move(out.ledger)};
}

namespace detail {

inline ComplexVector exact_transform(const ComplexVector& x, bool inverse) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<Complex> in(x.data(), x.data() + x.size());
  std::vector<Complex> out;
  if (inverse) {
    fft.inv(out, in);
  } else {
    fft.fwd(out, in);
  }
  ComplexVector y = Eigen::Map<ComplexVector>(out.data(), static_cast<Eigen::Index>(out.size()));
  return y / std::sqrt(static_cast<double>(x.size()));
}

inline void check_crossbar_shape(const DftOperator& op) {
  const auto& p = op.pair();
  if (!(p.rows() == 2 * op.size() && p.cols() == 2 * op.size()))
    fail(ErrorKind::ModeMismatch, "crossbar holds a " + std::to_string(p.rows()) + "x" + std::to_string(p.cols()) +
                                      " matrix, DFT of size " + std::to_string(op.size()) + " needs " +
                                      std::to_string(2 * op.size()) + "x" + std::to_string(2 * op.size()));
}

}  // namespace detail

/// Frequency-domain block W x. Crossbar mode is a single MVM.
inline ComplexVector dft(const ComplexVector& x, const DftOperator& op, const DeviceParams& params, RandomStream& rng,
                         EnergyLatencyLedger* ledger = nullptr) {
  if (!(x.size() == op.size()))
    fail(ErrorKind::BadLength,
         "DFT of size " + std::to_string(op.size()) + " got " + std::to_string(x.size()) + " samples");
  if (!op.is_crossbar()) return detail::exact_transform(x, false);
  detail::check_crossbar_shape(op);
  return inverse_vector_mapping(mvm(op.pair(), vector_mapping(x), params, rng, ledger));
}

/// Time-domain block W^H x.
inline ComplexVector idft(const ComplexVector& x, const DftOperator& op, const DeviceParams& params, RandomStream& rng,
                          EnergyLatencyLedger* ledger = nullptr) {
  if (!(x.size() == op.size()))
    fail(ErrorKind::BadLength,
         "IDFT of size " + std::to_string(op.size()) + " got " + std::to_string(x.size()) + " samples");
  if (!op.is_crossbar()) return detail::exact_transform(x, true);
  detail::check_crossbar_shape(op);
  return inverse_vector_mapping(mvm_transposed(op.pair(), vector_mapping(x), params, rng, ledger));
}

inline ComplexVector add_cyclic_prefix(const ComplexVector& x, Eigen::Index cp_len) {
  if (!(cp_len >= 0 && cp_len < x.size()))
    fail(ErrorKind::BadLength,
         "cyclic prefix of " + std::to_string(cp_len) + " for a block of " + std::to_string(x.size()));
  ComplexVector out(x.size() + cp_len);
  out.head(cp_len) = x.tail(cp_len);
  out.tail(x.size()) = x;
  return out;
}

inline ComplexVector remove_cyclic_prefix(const ComplexVector& x, Eigen::Index cp_len, Eigen::Index n_c) {
  if (!(cp_len >= 0 && n_c >= 1 && x.size() == n_c + cp_len))
    fail(ErrorKind::BadLength,
         "expected " + std::to_string(n_c + cp_len) + " samples with prefix, got " + std::to_string(x.size()));
  return x.tail(n_c);
}

}  // namespace rrambb
