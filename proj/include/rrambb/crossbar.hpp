#pragma once

// Differential-pair crossbar: a signed real matrix M is stored as
// (G+ - G-) = alpha * M with alpha = (g_max - g_min) / max|M|. Each entry
// raises exactly one device of its pair above the g_min baseline; the other
// one (and both devices of a zero entry) sits at g_min, so the baseline
// cancels in the difference.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "rrambb/complex_map.hpp"
#include "rrambb/device.hpp"
#include "rrambb/error.hpp"
#include "rrambb/ledger.hpp"
#include "rrambb/random.hpp"

namespace rrambb {

enum class WriteScheme { verify, no_verify };

inline std::string_view to_string(WriteScheme s) { return s == WriteScheme::verify ? "verify" : "no_verify"; }

struct ProgramOptions {
  WriteScheme scheme = WriteScheme::verify;
  // Matrix-level relative tolerance of the verify scheme.
  double tolerance = 0.01;
  // Entries below tolerance_floor * max|M| are held to the absolute bound
  // tolerance * tolerance_floor * max|M| instead of a relative one.
  double tolerance_floor = 0.05;
  // Entries below zero_threshold * max|M| leave both devices at g_min.
  double zero_threshold = 1e-12;
  std::uint64_t max_pulses = 2560;

  void validate() const {
    require(tolerance > 0.0, ErrorKind::InvalidArgument, "tolerance must be positive");
    require(tolerance_floor > 0.0 && tolerance_floor <= 1.0, ErrorKind::InvalidArgument,
            "tolerance_floor must lie in (0, 1]");
    require(zero_threshold >= 0.0, ErrorKind::InvalidArgument, "zero_threshold must be non-negative");
    require(max_pulses >= 1, ErrorKind::InvalidArgument, "max_pulses must be at least 1");
  }
};

class CrossbarPair {
 public:
  CrossbarPair() = default;

  /// Both arrays at g_min, nothing programmed yet.
  static CrossbarPair blank(Eigen::Index rows, Eigen::Index cols, const DeviceParams& params) {
    CrossbarPair p;
    p.g_plus_ = RealMatrix::Constant(rows, cols, params.g_min);
    p.g_minus_ = RealMatrix::Constant(rows, cols, params.g_min);
    p.target_ = RealMatrix::Zero(rows, cols);
    p.alpha_ = params.range();
    p.refresh();
    return p;
  }

  Eigen::Index rows() const { return g_plus_.rows(); }
  Eigen::Index cols() const { return g_plus_.cols(); }
  double alpha() const { return alpha_; }
  const RealMatrix& target() const { return target_; }
  const RealMatrix& g_plus() const { return g_plus_; }
  const RealMatrix& g_minus() const { return g_minus_; }
  /// G+ - G-
  const RealMatrix& difference() const { return difference_; }
  /// G+^2 + G-^2, the per-cell read-noise weight.
  const RealMatrix& squared_sum() const { return squared_sum_; }
  double total_conductance() const { return total_conductance_; }

  /// Noise-free effective matrix (G+ - G-) / alpha.
  RealMatrix effective_matrix() const { return difference_ / alpha_; }

 private:
  friend struct CrossbarProgrammer;

  void refresh() {
    difference_ = g_plus_ - g_minus_;
    squared_sum_ = g_plus_.cwiseAbs2() + g_minus_.cwiseAbs2();
    total_conductance_ = g_plus_.sum() + g_minus_.sum();
  }

  RealMatrix g_plus_;
  RealMatrix g_minus_;
  RealMatrix target_;
  RealMatrix difference_;
  RealMatrix squared_sum_;
  double alpha_ = 1.0;
  double total_conductance_ = 0.0;
};

struct ProgramOutcome {
  CrossbarPair pair;
  RealMatrix error;  // effective_matrix - target, in matrix units
  EnergyLatencyLedger ledger;
  std::uint64_t unconverged_cells = 0;
};

struct CrossbarProgrammer {
  static ProgramOutcome run(const RealMatrix& m, const ProgramOptions& opt, const DeviceParams& params,
                            RandomStream& rng, const CrossbarPair* previous) {
    opt.validate();
    params.validate();
    require(m.allFinite(), ErrorKind::InvalidArgument, "matrix to program must be finite");
    if (previous != nullptr) {
      require(previous->rows() == m.rows() && previous->cols() == m.cols(), ErrorKind::ShapeMismatch,
              "reprogramming needs a pair of the same shape");
    }

    ProgramOutcome out;
    CrossbarPair& pair = out.pair;
    pair = previous != nullptr ? *previous : CrossbarPair::blank(m.rows(), m.cols(), params);
    pair.target_ = m;

    const double max_abs = m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0;
    const double scale = max_abs > 0.0 ? max_abs : 1.0;
    pair.alpha_ = params.range() / scale;
    const double alpha = pair.alpha_;
    const double floor_abs = opt.tolerance_floor * scale;
    const double baseline_tol = opt.tolerance * alpha * floor_abs / 2.0;

    auto program_cell = [&](double& g, double target, double abs_tol) -> ProgramReport {
      ProgramResult r = opt.scheme == WriteScheme::verify
                            ? program_with_verify_abs({g}, target, abs_tol, opt.max_pulses, params, rng)
                            : program_without_verify({g}, target, params, rng);
      g = r.state.conductance;
      return r.report;
    };

    EnergyLatencyLedger& ledger = out.ledger;
    double latency = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      double row_latency = 0.0;
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double v = m(i, j);
        const double mag = std::abs(v);
        double plus_target = params.g_min;
        double minus_target = params.g_min;
        double active_tol = baseline_tol;
        if (mag > opt.zero_threshold * scale) {
          const double g_active = std::min(params.g_min + alpha * mag, params.g_max);
          (v > 0.0 ? plus_target : minus_target) = g_active;
          active_tol = opt.tolerance * alpha * std::max(mag, floor_abs) / 2.0;
        }
        const double plus_tol = plus_target > params.g_min ? active_tol : baseline_tol;
        const double minus_tol = minus_target > params.g_min ? active_tol : baseline_tol;

        const ProgramReport rp = program_cell(pair.g_plus_(i, j), plus_target, plus_tol);
        const ProgramReport rm = program_cell(pair.g_minus_(i, j), minus_target, minus_tol);
        for (const ProgramReport* r : {&rp, &rm}) {
          record_event(ledger, ProgramEvent{r->pulses_applied, r->verify_reads, r->write_energy, r->read_energy});
          if (!r->converged) ++out.unconverged_cells;
        }
        row_latency = std::max({row_latency, rp.latency(params), rm.latency(params)});
      }
      latency += row_latency;
    }
    record_event(ledger, LatencyEvent{latency});

    pair.refresh();
    out.error = pair.effective_matrix() - m;
    if (out.unconverged_cells > 0) {
      fail(ErrorKind::ProgrammingFailure,
           std::to_string(out.unconverged_cells) + " cell(s) did not reach tolerance within the pulse budget");
    }
    return out;
  }
};

/// Writes `m` into a differential pair row by row (devices of one row in
/// parallel, rows in sequence). Starts from `previous` when given, otherwise
/// from a blank pair.
inline ProgramOutcome program_matrix(const RealMatrix& m, const ProgramOptions& options, const DeviceParams& params,
                                     RandomStream& rng, const CrossbarPair* previous = nullptr) {
  return CrossbarProgrammer::run(m, options, params, rng, previous);
}

/// Effective matrix as seen through one noisy read of every device.
inline RealMatrix stored_matrix(const CrossbarPair& pair, const DeviceParams& params, RandomStream& rng) {
  if (params.sigma_read == 0.0) return pair.effective_matrix();
  RealMatrix out(pair.rows(), pair.cols());
  for (Eigen::Index j = 0; j < pair.cols(); ++j) {
    for (Eigen::Index i = 0; i < pair.rows(); ++i) {
      const double gp = read_conductance({pair.g_plus()(i, j)}, params, rng);
      const double gm = read_conductance({pair.g_minus()(i, j)}, params, rng);
      out(i, j) = (gp - gm) / pair.alpha();
    }
  }
  return out;
}

namespace detail {

// Every device contributes g * (1 + eps) * v_l with an independent eps, so the
// read noise on output k is Gaussian with variance
// sigma_read^2 * sum_l (G+_kl^2 + G-_kl^2) v_l^2.
template <typename DiffExpr, typename SqExpr>
RealVector analog_product(const DiffExpr& diff, const SqExpr& sq, const RealVector& v, double alpha,
                          const DeviceParams& params, RandomStream& rng) {
  RealVector out = diff * v;
  if (params.sigma_read > 0.0) {
    const RealVector var = sq * v.cwiseAbs2();
    for (Eigen::Index k = 0; k < out.size(); ++k) out(k) += params.sigma_read * std::sqrt(var(k)) * rng.normal();
  }
  return out / alpha;
}

inline void record_mvm(EnergyLatencyLedger* ledger, const CrossbarPair& pair, const DeviceParams& params) {
  if (ledger == nullptr) return;
  record_event(*ledger, MvmEvent{static_cast<std::uint64_t>(pair.rows()), static_cast<std::uint64_t>(pair.cols()),
                                 pair.total_conductance(), params.read_voltage, params.read_width});
}

}  // namespace detail

/// One-step analog product ((G+ - G-) v) / alpha with fresh read noise.
/// Records the read on `ledger`; latency is left to the calling circuit.
inline RealVector mvm(const CrossbarPair& pair, const RealVector& v, const DeviceParams& params, RandomStream& rng,
                      EnergyLatencyLedger* ledger = nullptr) {
  if (v.size() != pair.cols())
    fail(ErrorKind::ShapeMismatch, "input of length " + std::to_string(v.size()) + " for a pair with " +
                                       std::to_string(pair.cols()) + " columns");
  detail::record_mvm(ledger, pair, params);
  return detail::analog_product(pair.difference(), pair.squared_sum(), v, pair.alpha(), params, rng);
}

/// Same array driven from the other side: ((G+ - G-)^T v) / alpha.
inline RealVector mvm_transposed(const CrossbarPair& pair, const RealVector& v, const DeviceParams& params,
                                 RandomStream& rng, EnergyLatencyLedger* ledger = nullptr) {
  if (v.size() != pair.rows())
    fail(ErrorKind::ShapeMismatch, "input of length " + std::to_string(v.size()) + " for a transposed pair with " +
                                       std::to_string(pair.rows()) + " rows");
  detail::record_mvm(ledger, pair, params);
  return detail::analog_product(pair.difference().transpose(), pair.squared_sum().transpose(), v, pair.alpha(), params,
                                rng);
}

}  // namespace rrambb
