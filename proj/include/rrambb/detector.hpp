#pragma once

// One-step linear detector built from two crossbar pairs and two TIA stages.
//
// The left pair holds -R(H) and the right pair R(H)^T, both scaled by the
// same alpha. With feedback conductances g1, g2 the loop settles at
//
//   v = (G^T G + g1 g2 I)^-1 G^T i,   G = alpha R(H),  i = alpha J(y),
//
// i.e. the L-MMSE estimate for g1 g2 = alpha^2 / snr and ZF for g2 = 0.
// Everything below works in matrix units (conductances divided by alpha).

#include <cmath>
#include <optional>
#include <string>

#include "rrambb/complex_map.hpp"
#include "rrambb/crossbar.hpp"
#include "rrambb/error.hpp"
#include "rrambb/ledger.hpp"

namespace rrambb {

enum class DetectorMode { lmmse, zf };

inline std::string_view to_string(DetectorMode m) { return m == DetectorMode::lmmse ? "lmmse" : "zf"; }

struct DetectorCircuit {
  CrossbarPair left;   // -R(H)
  CrossbarPair right;  // R(H)^T
  double alpha = 1.0;
  double g1 = 0.0;  // S
  double g2 = 0.0;  // S; 0 opens the second feedback (ZF)
  double snr = 1.0;
  DetectorMode mode = DetectorMode::lmmse;
  Eigen::Index n_r = 0;
  Eigen::Index n_t = 0;

  /// g1 g2 / alpha^2, the regularizer the circuit realizes.
  double regularizer() const { return g1 * g2 / (alpha * alpha); }
};

struct DetectionResult {
  ComplexVector x_hat;
  bool converged = true;
  std::uint64_t iterations = 0;
};

struct DetectorBuild {
  DetectorCircuit circuit;
  EnergyLatencyLedger ledger;
};

inline DetectorCircuit set_mode(DetectorCircuit circuit, DetectorMode mode) {
  circuit.mode = mode;
  circuit.g2 = mode == DetectorMode::zf ? 0.0 : circuit.alpha * circuit.alpha / (circuit.snr * circuit.g1);
  return circuit;
}

/// Programs both pairs (in parallel) for the channel estimate `h`. When
/// `previous` is given its arrays are rewritten in place of blank ones.
inline DetectorBuild build_detector(const ComplexMatrix& h, double snr, DetectorMode mode,
                                    const ProgramOptions& options, const DeviceParams& params, RandomStream& rng,
                                    const DetectorCircuit* previous = nullptr) {
  require(h.rows() >= 1 && h.cols() >= 1, ErrorKind::ShapeMismatch, "channel matrix is empty");
  require(snr > 0.0 && std::isfinite(snr), ErrorKind::InvalidArgument, "detector snr must be positive and finite");
  if (previous != nullptr) {
    require(previous->n_r == h.rows() && previous->n_t == h.cols(), ErrorKind::ShapeMismatch,
            "previous detector has a different antenna configuration");
  }
  const RealMatrix r = real_mapping(h);
  ProgramOutcome left = program_matrix(-r, options, params, rng, previous ? &previous->left : nullptr);
  ProgramOutcome right = program_matrix(r.transpose(), options, params, rng, previous ? &previous->right : nullptr);

  DetectorBuild out;
  DetectorCircuit& c = out.circuit;
  c.left = std::move(left.pair);
  c.right = std::move(right.pair);
  c.alpha = c.left.alpha();
  c.snr = snr;
  c.g1 = c.alpha / std::sqrt(snr);
  c.n_r = h.rows();
  c.n_t = h.cols();
  c = set_mode(std::move(c), mode);
  out.ledger = std::move(left.ledger);
  merge_parallel(out.ledger, right.ledger);
  return out;
}

namespace detail {

struct LoopMatrices {
  RealMatrix a_left;   // effective left pair, about -R(H)
  RealMatrix a_right;  // effective right pair, about R(H)^T
  RealVector j;
};

// One physical read of both pairs per detection; the loop then settles on
// that frozen state.
inline LoopMatrices read_loop(const DetectorCircuit& c, const ComplexVector& y, const DeviceParams& params,
                              RandomStream& rng, EnergyLatencyLedger* ledger) {
  if (!(y.size() == c.n_r))
    fail(ErrorKind::ShapeMismatch,
         "received vector of length " + std::to_string(y.size()) + " for " + std::to_string(c.n_r) + " antennas");
  if (ledger != nullptr) {
    for (const CrossbarPair* p : {&c.left, &c.right}) {
      record_event(*ledger, MvmEvent{static_cast<std::uint64_t>(p->rows()), static_cast<std::uint64_t>(p->cols()),
                                     p->total_conductance(), params.read_voltage, params.read_width});
    }
  }
  return {stored_matrix(c.left, params, rng), stored_matrix(c.right, params, rng), vector_mapping(y)};
}

}  // namespace detail

/// Fixed point of the feedback loop, solved directly.
inline DetectionResult detect_algebraic(const DetectorCircuit& c, const ComplexVector& y, const DeviceParams& params,
                                        RandomStream& rng, EnergyLatencyLedger* ledger = nullptr) {
  const auto m = detail::read_loop(c, y, params, rng, ledger);
  const Eigen::Index n = m.a_right.rows();
  const RealMatrix a = -(m.a_right * m.a_left) + c.regularizer() * RealMatrix::Identity(n, n);
  Eigen::FullPivLU<RealMatrix> lu(a);
  if (!(lu.isInvertible()))
    fail(ErrorKind::SingularSystem, std::string(to_string(c.mode)) + " system matrix is rank deficient (rank " +
                                        std::to_string(lu.rank()) + " of " + std::to_string(n) + ")");
  const RealVector v = lu.solve(m.a_right * m.j);
  return {inverse_vector_mapping(v), true, 0};
}

/// Largest explicit-Euler step that keeps the noise-free loop contractive,
/// 1 / lambda_max of its Jacobian.
inline double stable_time_step(const DetectorCircuit& c) {
  const RealMatrix r = -c.left.effective_matrix();
  const double c1 = c.alpha / c.g1;
  const double c2 = c.g2 / c.alpha;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(r.transpose() * r, Eigen::EigenvaluesOnly);
  return 1.0 / (c2 + c1 * es.eigenvalues().maxCoeff());
}

/// Relaxation of the loop in normalized time,
///   dv/dt = -(g2/alpha) v - (alpha/g1) G^T (G v - i)   (matrix units),
/// integrated with explicit Euler until the update norm drops below
/// `tolerance`.
inline DetectionResult detect_dynamical(const DetectorCircuit& c, const ComplexVector& y, double time_step,
                                        double tolerance, std::uint64_t max_steps, const DeviceParams& params,
                                        RandomStream& rng, const std::optional<RealVector>& initial = std::nullopt,
                                        EnergyLatencyLedger* ledger = nullptr) {
  require(time_step > 0.0, ErrorKind::InvalidArgument, "time step must be positive");
  require(tolerance > 0.0, ErrorKind::InvalidArgument, "tolerance must be positive");
  const auto m = detail::read_loop(c, y, params, rng, ledger);
  const double c1 = c.alpha / c.g1;
  const double c2 = c.g2 / c.alpha;
  RealVector v = initial.value_or(RealVector::Zero(m.a_right.rows()));
  require(v.size() == m.a_right.rows(), ErrorKind::ShapeMismatch, "initial state has the wrong length");

  for (std::uint64_t step = 1; step <= max_steps; ++step) {
    const RealVector residual = m.a_left * v + m.j;  // i - G v
    const RealVector dv = time_step * (c1 * (m.a_right * residual) - c2 * v);
    v += dv;
    if (!v.allFinite()) break;
    if (dv.norm() < tolerance) return {inverse_vector_mapping(v), true, step};
  }
  fail(ErrorKind::NoConvergence, "feedback loop did not settle within " + std::to_string(max_steps) + " steps");
}

}  // namespace rrambb
