#pragma once

// End-to-end MIMO-OFDM link:
//   bits -> QAM -> IDFT -> CP -> multipath + AWGN -> CP removal -> DFT
//        -> channel estimate -> detection -> demap
//
// Noise convention: every received time-domain sample carries CN(0, 1/snr)
// noise and every transmit antenna sends unit-energy symbols, so with the
// unitary DFT each sub-carrier sees y = H x + z with z ~ CN(0, I/snr).
//
// Block fading: a new channel is drawn, estimated from N_t training OFDM
// symbols and written into the detectors every channel_update_period data
// symbols. In crossbar mode the receive DFTs (one array per receive antenna)
// and the pilot array are static and live in a separate setup ledger; the
// operational ledger carries training, detector programming and data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rrambb/channel.hpp"
#include "rrambb/channel_est.hpp"
#include "rrambb/complex_map.hpp"
#include "rrambb/crossbar.hpp"
#include "rrambb/detector.hpp"
#include "rrambb/error.hpp"
#include "rrambb/ledger.hpp"
#include "rrambb/ofdm.hpp"
#include "rrambb/qam.hpp"
#include "rrambb/random.hpp"
#include "rrambb/system_config.hpp"

namespace rrambb {

struct ConstellationSample {
  Complex received;
  Complex ideal;
};

struct LinkMetrics {
  double mer_db = 0.0;
  double ber = 0.0;
  std::uint64_t symbols_sent = 0;
  std::uint64_t bits_sent = 0;
  std::uint64_t bit_errors = 0;
  double signal_power = 0.0;  // sum |ideal|^2
  double error_power = 0.0;   // sum |received - ideal|^2
  std::vector<ConstellationSample> constellation;
};

inline double mer_from_powers(double signal, double error, double cap_db) {
  if (error <= 0.0) return cap_db;
  return std::min(cap_db, 10.0 * std::log10(signal / error));
}

inline double compute_mer(const ComplexVector& received, const ComplexVector& ideal, double cap_db = 200.0) {
  require(received.size() > 0, ErrorKind::EmptyInput, "MER of an empty symbol sequence");
  require(received.size() == ideal.size(), ErrorKind::ShapeMismatch, "received and ideal symbol counts differ");
  return mer_from_powers(ideal.squaredNorm(), (received - ideal).squaredNorm(), cap_db);
}

inline std::uint64_t count_bit_errors(const Bits& rx, const Bits& tx) {
  require(rx.size() == tx.size(), ErrorKind::ShapeMismatch, "received and sent bit counts differ");
  std::uint64_t e = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) e += (rx[i] != tx[i]) ? 1 : 0;
  return e;
}

inline double compute_ber(const Bits& rx, const Bits& tx) {
  require(!tx.empty(), ErrorKind::EmptyInput, "BER of an empty bit sequence");
  return static_cast<double>(count_bit_errors(rx, tx)) / static_cast<double>(tx.size());
}

/// Static receive-side arrays: one DFT per receive antenna and the pilot
/// estimator. Built once and shareable across runs with the same geometry.
struct ReceiverFrontEnd {
  ProcessorKind processor = ProcessorKind::ideal;
  int n_c = 0;
  int n_r = 0;
  int n_t = 0;
  std::vector<DftOperator> dft;
  std::optional<PilotEstimator> estimator;
  EnergyLatencyLedger setup;

  bool matches(const SystemConfig& cfg) const {
    const bool needs_estimator =
        cfg.processor == ProcessorKind::crossbar && cfg.csi == CsiMode::estimated && cfg.pilot != PilotKind::identity;
    return processor == cfg.processor && n_c == cfg.n_c && n_r == cfg.n_r && n_t == cfg.n_t &&
           (!needs_estimator || (estimator && estimator->p.isApprox(make_unitary_pilot(cfg.n_t, cfg.pilot))));
  }
};

inline ReceiverFrontEnd build_front_end(const SystemConfig& cfg, RandomStream& rng) {
  cfg.validate();
  ReceiverFrontEnd fe;
  fe.processor = cfg.processor;
  fe.n_c = cfg.n_c;
  fe.n_r = cfg.n_r;
  fe.n_t = cfg.n_t;
  if (cfg.ofdm()) {
    const DftOperator exact = dft_matrix(cfg.n_c);
    for (int r = 0; r < cfg.n_r; ++r) {
      if (cfg.processor == ProcessorKind::crossbar) {
        ProgrammedDft p = program_dft(exact, cfg.static_program, cfg.device, rng);
        merge_parallel(fe.setup, p.ledger);
        fe.dft.push_back(std::move(p.op));
      } else {
        fe.dft.push_back(exact);
      }
    }
  }
  if (cfg.processor == ProcessorKind::crossbar && cfg.csi == CsiMode::estimated && cfg.pilot != PilotKind::identity) {
    ProgrammedEstimator e =
        program_estimator(make_unitary_pilot(cfg.n_t, cfg.pilot), cfg.static_program, cfg.device, rng);
    merge_parallel(fe.setup, e.ledger);
    fe.estimator = std::move(e.estimator);
  }
  return fe;
}

struct LinkResult {
  Bits bits;
  LinkMetrics metrics;
  EnergyLatencyLedger ledger;  // per-run operations
  // Bringing the receiver to its operating state: the static arrays when
  // built by this run, and the initial detector load.
  EnergyLatencyLedger setup_ledger;
};

namespace detail {

// Substream indices for common random numbers across processor modes.
enum : std::uint64_t {
  kStreamChannel = 1,
  kStreamNoise = 2,
  kStreamDevice = 3,
  kStreamFrontEnd = 4,
  kStreamWarmUp = 5
};

class LinkRunner {
 public:
  LinkRunner(const SystemConfig& cfg, const ReceiverFrontEnd& fe, std::uint64_t base_seed)
      : cfg_(cfg),
        fe_(fe),
        channel_rng_(RandomStream::derive(base_seed, {kStreamChannel})),
        noise_rng_(RandomStream::derive(base_seed, {kStreamNoise})),
        device_rng_(RandomStream::derive(base_seed, {kStreamDevice})),
        base_seed_(base_seed),
        noise_var_(cfg.channel_noise ? 1.0 / cfg.snr_linear() : 0.0),
        exact_dft_(cfg.ofdm() ? std::optional<DftOperator>(dft_matrix(cfg.n_c)) : std::nullopt) {}

  LinkResult run(const Bits& payload) {
    const std::size_t frame_bits = cfg_.bits_per_frame();
    if (!(!payload.empty() && payload.size() % frame_bits == 0))
      fail(ErrorKind::BadLength, "payload of " + std::to_string(payload.size()) + " bits is not a whole number of " +
                                     std::to_string(frame_bits) + "-bit frames");
    const std::size_t frames = payload.size() / frame_bits;

    LinkResult out;
    warm_up(out.setup_ledger, base_seed_);
    out.bits.reserve(payload.size());
    LinkMetrics& m = out.metrics;

    for (std::size_t f = 0; f < frames; ++f) {
      if (f % static_cast<std::size_t>(cfg_.channel_update_period) == 0) start_period(out.ledger);

      const Bits frame(payload.begin() + static_cast<std::ptrdiff_t>(f * frame_bits),
                       payload.begin() + static_cast<std::ptrdiff_t>((f + 1) * frame_bits));
      const ComplexVector x = qam_map(frame, cfg_.modulation);  // index k * n_t + a
      const auto y = transmit(x, out.ledger);
      const ComplexVector x_hat = detect(y, out.ledger);
      record_event(out.ledger, DataSymbolEvent{1});

      const Bits rx = qam_demap(x_hat, cfg_.modulation);
      m.bit_errors += count_bit_errors(rx, frame);
      out.bits.insert(out.bits.end(), rx.begin(), rx.end());
      m.signal_power += x.squaredNorm();
      m.error_power += (x_hat - x).squaredNorm();
      for (Eigen::Index i = 0; i < x.size() && m.constellation.size() < cfg_.constellation_samples; ++i)
        m.constellation.push_back({x_hat(i), x(i)});
      m.symbols_sent += static_cast<std::uint64_t>(x.size());
      m.bits_sent += frame_bits;
    }
    m.ber = static_cast<double>(m.bit_errors) / static_cast<double>(m.bits_sent);
    m.mer_db = mer_from_powers(m.signal_power, m.error_power, cfg_.mer_cap_db);
    return out;
  }

 private:
  bool crossbar() const { return cfg_.processor == ProcessorKind::crossbar; }
  std::size_t n_c() const { return static_cast<std::size_t>(cfg_.n_c); }

  // Sends one frame of frequency-domain symbols (index k * n_t + a) and
  // returns the receive-side frequency-domain samples, one vector per
  // receive antenna.
  std::vector<ComplexVector> transmit(const ComplexVector& x, EnergyLatencyLedger& ledger) {
    const int n_t = cfg_.n_t;
    std::vector<ComplexVector> tx(static_cast<std::size_t>(n_t), ComplexVector(cfg_.n_c));
    for (int k = 0; k < cfg_.n_c; ++k)
      for (int a = 0; a < n_t; ++a) tx[static_cast<std::size_t>(a)](k) = x(k * n_t + a);

    if (cfg_.ofdm()) {
      for (auto& s : tx) s = add_cyclic_prefix(idft(s, *exact_dft_, cfg_.device, device_rng_), cfg_.cp_len);
    }
    auto rx = apply_channel(channel_, tx);
    if (noise_var_ > 0.0) add_noise(rx, noise_var_, noise_rng_);
    if (!cfg_.ofdm()) return rx;

    for (std::size_t r = 0; r < rx.size(); ++r) {
      rx[r] = dft(remove_cyclic_prefix(rx[r], cfg_.cp_len, cfg_.n_c), fe_.dft[r], cfg_.device, device_rng_,
                  crossbar() ? &ledger : nullptr);
    }
    // The receive DFTs run side by side, one analog step.
    if (crossbar()) record_event(ledger, LatencyEvent{cfg_.device.read_width});
    return rx;
  }

  static ComplexVector at_subcarrier(const std::vector<ComplexVector>& y, std::size_t k) {
    ComplexVector v(static_cast<Eigen::Index>(y.size()));
    for (std::size_t r = 0; r < y.size(); ++r) v(static_cast<Eigen::Index>(r)) = y[r](static_cast<Eigen::Index>(k));
    return v;
  }

  void start_period(EnergyLatencyLedger& ledger) {
    if (cfg_.channel == ChannelModel::rayleigh || !have_channel_) {
      channel_ = generate_channel(cfg_, channel_rng_);
      have_channel_ = true;
    }

    std::vector<ComplexMatrix> h_hat(n_c());
    if (cfg_.csi == CsiMode::perfect) {
      h_hat = channel_.subcarriers;
    } else {
      estimate(h_hat, ledger);
    }
    if (cfg_.equalizer == Equalizer::none) return;

    const double snr = cfg_.snr_linear();
    if (!crossbar()) {
      filters_.assign(n_c(), ComplexMatrix());
      for (std::size_t k = 0; k < n_c(); ++k) filters_[k] = ideal_filter(h_hat[k], snr);
      return;
    }

    program_detectors(h_hat, ledger, device_rng_);
  }

  // All sub-carrier detectors are rewritten in parallel, each starting from
  // whatever its arrays hold.
  void program_detectors(const std::vector<ComplexMatrix>& h_hat, EnergyLatencyLedger& ledger, RandomStream& rng) {
    EnergyLatencyLedger programming;
    std::vector<DetectorCircuit> next;
    next.reserve(n_c());
    for (std::size_t k = 0; k < n_c(); ++k) {
      const DetectorCircuit* prev = circuits_.empty() ? nullptr : &circuits_[k];
      DetectorBuild b =
          build_detector(h_hat[k], cfg_.snr_linear(), cfg_.detector, cfg_.detector_program, cfg_.device, rng, prev);
      merge_parallel(programming, b.ledger);
      next.push_back(std::move(b.circuit));
    }
    circuits_ = std::move(next);
    merge_sequential(ledger, programming);
  }

  // The receiver is modeled in steady operation: before the first frame its
  // detector arrays already hold the previous coherence interval's channel,
  // so every update counted in the run ledger is a rewrite. The initial load
  // (from blank arrays) is setup cost. Uses its own streams so the channel,
  // noise and device draws of the run itself are unaffected.
  void warm_up(EnergyLatencyLedger& setup, std::uint64_t base_seed) {
    if (!crossbar() || cfg_.equalizer != Equalizer::detector) return;
    RandomStream channel_rng = RandomStream::derive(base_seed, {kStreamWarmUp, kStreamChannel});
    RandomStream device_rng = RandomStream::derive(base_seed, {kStreamWarmUp, kStreamDevice});
    program_detectors(generate_channel(cfg_, channel_rng).subcarriers, setup, device_rng);
  }

  ComplexMatrix ideal_filter(const ComplexMatrix& h, double snr) const {
    const Eigen::Index n_t = h.cols();
    ComplexMatrix gram = h.adjoint() * h;
    if (cfg_.detector == DetectorMode::lmmse) gram += ComplexMatrix::Identity(n_t, n_t) / snr;
    Eigen::FullPivLU<ComplexMatrix> lu(gram);
    require(lu.isInvertible(), ErrorKind::SingularSystem, "channel Gram matrix is singular");
    return lu.solve(h.adjoint());
  }

  // N_t training symbols; slot t carries column t of P on every sub-carrier.
  void estimate(std::vector<ComplexMatrix>& h_hat, EnergyLatencyLedger& ledger) {
    const int n_t = cfg_.n_t;
    const ComplexMatrix p = make_unitary_pilot(n_t, cfg_.pilot);
    std::vector<ComplexMatrix> s(n_c(), ComplexMatrix(cfg_.n_r, n_t));
    for (int t = 0; t < n_t; ++t) {
      ComplexVector x(cfg_.n_c * n_t);
      for (int k = 0; k < cfg_.n_c; ++k)
        for (int a = 0; a < n_t; ++a) x(k * n_t + a) = p(a, t);
      const auto y = transmit(x, ledger);
      for (std::size_t k = 0; k < n_c(); ++k) s[k].col(t) = at_subcarrier(y, k);
    }
    const bool analog = crossbar() && cfg_.pilot != PilotKind::identity;
    for (std::size_t k = 0; k < n_c(); ++k) {
      const PilotBlock block{p, s[k]};
      h_hat[k] =
          analog ? estimate_channel(block, *fe_.estimator, cfg_.device, device_rng_, &ledger) : estimate_channel(block);
    }
    // Sub-carrier estimates are independent; each is 2 N_r sequential reads.
    if (analog) record_event(ledger, LatencyEvent{2.0 * cfg_.n_r * cfg_.device.read_width});
  }

  ComplexVector detect(const std::vector<ComplexVector>& y, EnergyLatencyLedger& ledger) {
    const int n_t = cfg_.n_t;
    ComplexVector x_hat(cfg_.n_c * n_t);
    for (std::size_t k = 0; k < n_c(); ++k) {
      const ComplexVector yk = at_subcarrier(y, k);
      ComplexVector xk;
      if (cfg_.equalizer == Equalizer::none) {
        xk = yk;
      } else if (crossbar()) {
        xk = detect_algebraic(circuits_[k], yk, cfg_.device, device_rng_, &ledger).x_hat;
      } else {
        xk = filters_[k] * yk;
      }
      x_hat.segment(static_cast<Eigen::Index>(k) * n_t, n_t) = xk;
    }
    // One settling step for all sub-carrier circuits at once.
    if (crossbar() && cfg_.equalizer == Equalizer::detector) {
      record_event(ledger, LatencyEvent{cfg_.device.read_width});
    }
    return x_hat;
  }

  const SystemConfig& cfg_;
  const ReceiverFrontEnd& fe_;
  RandomStream channel_rng_;
  RandomStream noise_rng_;
  RandomStream device_rng_;
  std::uint64_t base_seed_;
  double noise_var_;
  std::optional<DftOperator> exact_dft_;
  ChannelRealization channel_;
  bool have_channel_ = false;
  std::vector<ComplexMatrix> filters_;
  std::vector<DetectorCircuit> circuits_;
};

}  // namespace detail

/// Runs `payload` through the configured link. `front_end`, when given, must
/// match the configuration; otherwise one is built and its programming cost
/// reported in setup_ledger.
inline LinkResult run_link(const SystemConfig& cfg, const Bits& payload, RandomStream& rng,
                           const ReceiverFrontEnd* front_end = nullptr) {
  cfg.validate();
  const std::uint64_t base = rng.bits();
  std::optional<ReceiverFrontEnd> own;
  if (front_end == nullptr) {
    RandomStream fe_rng = RandomStream::derive(base, {detail::kStreamFrontEnd});
    own = build_front_end(cfg, fe_rng);
    front_end = &*own;
  } else {
    require(front_end->matches(cfg), ErrorKind::ModeMismatch, "receiver front end was built for another configuration");
  }
  detail::LinkRunner runner(cfg, *front_end, base);
  LinkResult out = runner.run(payload);
  if (own) {
    EnergyLatencyLedger setup = own->setup;
    merge_sequential(setup, out.setup_ledger);
    out.setup_ledger = setup;
  }
  return out;
}

inline Bits random_bits(std::size_t n, RandomStream& rng) {
  Bits b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng.bit());
  return b;
}

/// 8-bit grayscale raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

struct ImageTransmission {
  GrayImage image;
  LinkMetrics metrics;
  EnergyLatencyLedger ledger;
};

/// Sends the pixels MSB first, zero-padded to whole frames.
inline ImageTransmission transmit_image(const SystemConfig& cfg, const GrayImage& image, RandomStream& rng,
                                        const ReceiverFrontEnd* front_end = nullptr) {
  require(image.width > 0 && image.height > 0 &&
              image.pixels.size() == static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height),
          ErrorKind::InvalidArgument, "image size does not match its pixel buffer");
  const std::size_t frame_bits = cfg.bits_per_frame();
  const std::size_t data_bits = image.pixels.size() * 8;
  Bits payload((data_bits + frame_bits - 1) / frame_bits * frame_bits, 0);
  for (std::size_t i = 0; i < image.pixels.size(); ++i)
    for (int b = 0; b < 8; ++b) payload[i * 8 + static_cast<std::size_t>(b)] = (image.pixels[i] >> (7 - b)) & 1u;

  LinkResult r = run_link(cfg, payload, rng, front_end);
  ImageTransmission out;
  out.image.width = image.width;
  out.image.height = image.height;
  out.image.pixels.assign(image.pixels.size(), 0);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    std::uint8_t v = 0;
    for (int b = 0; b < 8; ++b) v = static_cast<std::uint8_t>((v << 1) | r.bits[i * 8 + static_cast<std::size_t>(b)]);
    out.image.pixels[i] = v;
  }
  out.metrics = std::move(r.metrics);
  out.ledger = std::move(r.ledger);
  return out;
}

}  // namespace rrambb
