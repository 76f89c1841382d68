#pragma once

// Least-squares channel estimate H_hat = S P^H from unitary training P.
// In crossbar mode R(P) is stored once; each row of R(S) driven through it
// yields one row of R(H_hat), so an estimate costs 2 N_r reads.

#include <bit>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

#include "rrambb/complex_map.hpp"
#include "rrambb/crossbar.hpp"
#include "rrambb/error.hpp"
#include "rrambb/ledger.hpp"

namespace rrambb {

enum class PilotKind { identity, dft, hadamard };

inline std::string_view to_string(PilotKind k) {
  switch (k) {
    case PilotKind::identity: return "identity";
    case PilotKind::dft: return "dft";
    case PilotKind::hadamard: return "hadamard";
  }
  return "?";
}

inline ComplexMatrix make_unitary_pilot(Eigen::Index n_t, PilotKind kind) {
  require(n_t >= 1, ErrorKind::InvalidArgument, "pilot needs at least one antenna");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_t));
  ComplexMatrix p(n_t, n_t);
  switch (kind) {
    case PilotKind::identity: p.setIdentity(); break;
    case PilotKind::dft:
      for (Eigen::Index k = 0; k < n_t; ++k)
        for (Eigen::Index l = 0; l < n_t; ++l)
          p(k, l) = std::polar(scale,
                               -2.0 * std::numbers::pi * static_cast<double>((k * l) % n_t) / static_cast<double>(n_t));
      break;
    case PilotKind::hadamard:
      if (!((n_t & (n_t - 1)) == 0))
        fail(ErrorKind::UnsupportedSize,
             "Hadamard pilot needs a power-of-two antenna count, got " + std::to_string(n_t));
      // Sylvester construction: sign is (-1)^popcount(k & l).
      for (Eigen::Index k = 0; k < n_t; ++k)
        for (Eigen::Index l = 0; l < n_t; ++l)
          p(k, l) = (std::popcount(static_cast<std::uint64_t>(k & l)) % 2 == 0 ? scale : -scale);
      break;
  }
  return p;
}

struct PilotBlock {
  ComplexMatrix p;  // N_t x N_t, unitary; column t is sent in training slot t
  ComplexMatrix s;  // N_r x N_t received training
};

/// A programmed R(P), reused across estimates.
struct PilotEstimator {
  ComplexMatrix p;
  std::shared_ptr<const CrossbarPair> pair;
};

struct ProgrammedEstimator {
  PilotEstimator estimator;
  EnergyLatencyLedger ledger;
};

inline ProgrammedEstimator program_estimator(const ComplexMatrix& p, const ProgramOptions& options,
                                             const DeviceParams& params, RandomStream& rng) {
  ProgramOutcome out = program_matrix(real_mapping(p), options, params, rng);
  return {{p, std::make_shared<const CrossbarPair>(std::move(out.pair))}, std::move(out.ledger)};
}

inline void check_pilot_shapes(const PilotBlock& b) {
  if (!(b.p.rows() == b.p.cols() && b.s.cols() == b.p.rows() && b.s.rows() >= 1))
    fail(ErrorKind::ShapeMismatch, "training of " + std::to_string(b.s.rows()) + "x" + std::to_string(b.s.cols()) +
                                       " does not match a " + std::to_string(b.p.rows()) + "x" +
                                       std::to_string(b.p.cols()) + " pilot");
}

inline ComplexMatrix estimate_channel(const PilotBlock& block) {
  check_pilot_shapes(block);
  return block.s * block.p.adjoint();
}

/// Crossbar evaluation through `est`, whose stored pilot must match block.p in shape.
inline ComplexMatrix estimate_channel(const PilotBlock& block, const PilotEstimator& est, const DeviceParams& params,
                                      RandomStream& rng, EnergyLatencyLedger* ledger = nullptr) {
  check_pilot_shapes(block);
  require(est.pair && est.pair->rows() == 2 * block.p.rows() && est.pair->cols() == 2 * block.p.cols(),
          ErrorKind::ShapeMismatch, "programmed pilot does not match the training block");
  const RealMatrix rs = real_mapping(block.s);
  RealMatrix rh(rs.rows(), rs.cols());
  for (Eigen::Index i = 0; i < rs.rows(); ++i) {
    rh.row(i) = mvm(*est.pair, rs.row(i).transpose(), params, rng, ledger).transpose();
  }
  return inverse_real_mapping(rh);
}

}  // namespace rrambb
