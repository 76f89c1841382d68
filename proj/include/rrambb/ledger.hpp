#pragma once

// Energy / latency accounting for analog events, and the throughput and
// efficiency figures derived from it.
//
// Events only carry counts and energy. Wall-clock latency is recorded
// explicitly by whoever knows the parallelism of the operation (rows of one
// array are written in parallel, independent arrays run side by side, ...),
// and ledgers are combined with merge_sequential / merge_parallel.

#include <algorithm>
#include <cstdint>
#include <type_traits>
#include <variant>

#include "rrambb/error.hpp"

namespace rrambb {

struct WritePulseEvent {
  double voltage = 0.0;      // V
  double conductance = 0.0;  // S, instantaneous value before the pulse
  double width = 0.0;        // s
  std::uint64_t count = 1;
};

struct VerifyReadEvent {
  double voltage = 0.0;
  double conductance = 0.0;
  double width = 0.0;
  std::uint64_t count = 1;
};

/// One analog evaluation over `cells` differential cells of a rows x cols
/// real matrix. `conductance_sum` covers both devices of every cell.
struct MvmEvent {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  double conductance_sum = 0.0;
  double voltage = 0.0;
  double width = 0.0;
};

/// Result of programming one device: pulse and verify-read totals with the
/// energy already integrated over the conductance trajectory.
struct ProgramEvent {
  std::uint64_t pulses = 0;
  std::uint64_t reads = 0;
  double write_energy = 0.0;
  double read_energy = 0.0;
};

struct LatencyEvent {
  double seconds = 0.0;
};

struct DataSymbolEvent {
  std::uint64_t count = 1;
};

using LedgerEvent =
    std::variant<WritePulseEvent, VerifyReadEvent, MvmEvent, ProgramEvent, LatencyEvent, DataSymbolEvent>;

struct EnergyLatencyLedger {
  std::uint64_t write_pulses = 0;
  std::uint64_t verify_reads = 0;
  std::uint64_t mvm_reads = 0;        // cell reads during analog evaluations
  std::uint64_t mvm_invocations = 0;  // one-step analog evaluations
  std::uint64_t data_symbols = 0;     // OFDM data symbols processed
  double write_energy = 0.0;          // J
  double verify_energy = 0.0;         // J
  double mvm_energy = 0.0;            // J
  double analog_ops = 0.0;            // real ops executed in the arrays (1 MAC = 2 ops)
  double latency = 0.0;               // s

  double total_energy() const { return write_energy + verify_energy + mvm_energy; }
  std::uint64_t analog_events() const { return write_pulses + verify_reads + mvm_reads; }
};

inline void record_event(EnergyLatencyLedger& ledger, const LedgerEvent& event) {
  std::visit(
      [&ledger](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, WritePulseEvent>) {
          ledger.write_pulses += e.count;
          ledger.write_energy += static_cast<double>(e.count) * e.voltage * e.voltage * e.conductance * e.width;
        } else if constexpr (std::is_same_v<T, VerifyReadEvent>) {
          ledger.verify_reads += e.count;
          ledger.verify_energy += static_cast<double>(e.count) * e.voltage * e.voltage * e.conductance * e.width;
        } else if constexpr (std::is_same_v<T, MvmEvent>) {
          ledger.mvm_invocations += 1;
          ledger.mvm_reads += e.rows * e.cols;
          ledger.mvm_energy += e.voltage * e.voltage * e.conductance_sum * e.width;
          ledger.analog_ops += 2.0 * static_cast<double>(e.rows * e.cols);
        } else if constexpr (std::is_same_v<T, ProgramEvent>) {
          ledger.write_pulses += e.pulses;
          ledger.verify_reads += e.reads;
          ledger.write_energy += e.write_energy;
          ledger.verify_energy += e.read_energy;
        } else if constexpr (std::is_same_v<T, LatencyEvent>) {
          ledger.latency += e.seconds;
        } else if constexpr (std::is_same_v<T, DataSymbolEvent>) {
          ledger.data_symbols += e.count;
        }
      },
      event);
}

namespace detail {
inline void add_counts(EnergyLatencyLedger& into, const EnergyLatencyLedger& other) {
  into.write_pulses += other.write_pulses;
  into.verify_reads += other.verify_reads;
  into.mvm_reads += other.mvm_reads;
  into.mvm_invocations += other.mvm_invocations;
  into.data_symbols += other.data_symbols;
  into.write_energy += other.write_energy;
  into.verify_energy += other.verify_energy;
  into.mvm_energy += other.mvm_energy;
  into.analog_ops += other.analog_ops;
}
}  // namespace detail

/// `other` ran after `into`.
inline void merge_sequential(EnergyLatencyLedger& into, const EnergyLatencyLedger& other) {
  detail::add_counts(into, other);
  into.latency += other.latency;
}

/// `other` ran concurrently with `into`.
inline void merge_parallel(EnergyLatencyLedger& into, const EnergyLatencyLedger& other) {
  detail::add_counts(into, other);
  into.latency = std::max(into.latency, other.latency);
}

// Dense-equivalent operation counts. One complex MAC is 8 real ops.

constexpr double kOpsPerComplexMac = 8.0;

/// A single-carrier link (n_c == 1) has no DFT.
constexpr double dft_complex_macs(std::uint64_t n_c) { return n_c < 2 ? 0.0 : static_cast<double>(n_c * n_c); }

/// MACs of x = (H^H H + I/snr)^-1 H^H y evaluated densely for an n_r x n_t H:
/// Gram matrix, matched filter, Gauss-Jordan inverse on [A | I], and the
/// final inverse-vector product.
constexpr double detection_complex_macs(std::uint64_t n_r, std::uint64_t n_t) {
  return static_cast<double>(n_t * n_t * n_r + n_t * n_r + 2 * n_t * n_t * n_t + n_t * n_t);
}

struct OpCountModel {
  std::uint64_t n_c = 0;
  std::uint64_t n_t = 0;
  std::uint64_t n_r = 0;

  /// Dense ops replaced per data OFDM symbol: one DFT per receive antenna
  /// and one detection per sub-carrier.
  double ops_per_data_symbol() const {
    return kOpsPerComplexMac * (static_cast<double>(n_r) * dft_complex_macs(n_c) +
                                static_cast<double>(n_c) * detection_complex_macs(n_r, n_t));
  }
};

struct PerfSummary {
  double total_ops = 0.0;
  double latency_s = 0.0;
  double energy_j = 0.0;
  double tops = 0.0;
  double tops_per_watt = 0.0;
};

inline PerfSummary summarize(const EnergyLatencyLedger& ledger, const OpCountModel& model) {
  require(ledger.analog_events() > 0 && ledger.latency > 0.0 && ledger.total_energy() > 0.0, ErrorKind::EmptyLedger,
          "no analog events were recorded");
  PerfSummary s;
  s.total_ops = static_cast<double>(ledger.data_symbols) * model.ops_per_data_symbol();
  s.latency_s = ledger.latency;
  s.energy_j = ledger.total_energy();
  s.tops = s.total_ops / s.latency_s / 1e12;
  s.tops_per_watt = s.total_ops / s.energy_j / 1e12;
  return s;
}

}  // namespace rrambb
