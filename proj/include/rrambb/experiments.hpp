#pragma once

// Experiment drivers behind the command-line tool. Each returns its data
// and, given an output directory, writes the CSV files (and optional SVG
// charts). All randomness derives from the run seed: the same (config, seed)
// reproduces every CSV byte, independent of the thread count.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rrambb/config.hpp"
#include "rrambb/io.hpp"
#include "rrambb/latency_scan.hpp"
#include "rrambb/ledger.hpp"
#include "rrambb/link.hpp"
#include "rrambb/parallel.hpp"

namespace rrambb {

struct RunOptions {
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;  // empty: nothing is written
  bool plot = false;
  std::size_t jobs = 1;
};

namespace detail {

// Stream tags under the run seed.
enum : std::uint64_t { kTagFrontEnd = 0xFE, kTagPayload = 0xB175, kTagDevice = 0xDE };

inline std::vector<std::filesystem::path>& written_files() {
  static thread_local std::vector<std::filesystem::path> files;
  return files;
}

inline void emit(const RunOptions& run, const std::string& name, const std::string& text) {
  if (run.out_dir.empty()) return;
  write_text(run.out_dir / name, text);
  written_files().push_back(run.out_dir / name);
}

inline std::string file_tag(double v) {
  std::string s = format_number(v);
  for (auto& c : s)
    if (c == '.') c = 'p';
  return s;
}

}  // namespace detail

/// Resets and returns the list of files written by experiment drivers on
/// this thread.
inline std::vector<std::filesystem::path> take_written_files() {
  auto out = std::move(detail::written_files());
  detail::written_files().clear();
  return out;
}

/// Link configuration for one sweep entry: "ideal", "verify" or "no_verify".
inline SystemConfig entry_config(const SystemConfig& base, const std::string& entry) {
  SystemConfig c = base;
  if (entry == "ideal") {
    c.processor = ProcessorKind::ideal;
  } else {
    c.processor = ProcessorKind::crossbar;
    c.detector_program.scheme = entry == "verify" ? WriteScheme::verify : WriteScheme::no_verify;
  }
  return c;
}

/// Accumulated outcome of several independent link runs.
struct TrialTotals {
  std::uint64_t bits = 0;
  std::uint64_t bit_errors = 0;
  double signal_power = 0.0;
  double error_power = 0.0;
  EnergyLatencyLedger ledger;

  void add(const LinkResult& r) {
    bits += r.metrics.bits_sent;
    bit_errors += r.metrics.bit_errors;
    signal_power += r.metrics.signal_power;
    error_power += r.metrics.error_power;
    merge_sequential(ledger, r.ledger);
  }
  double ber() const { return bits ? static_cast<double>(bit_errors) / static_cast<double>(bits) : 0.0; }
  double mer_db(double cap) const { return mer_from_powers(signal_power, error_power, cap); }
};

/// `trials` links of `frames` frames each. Trial t draws its payload and its
/// channel/noise/device streams from (seed, point, t), so different
/// configurations at the same point see the same data and channels.
inline TrialTotals run_trials(const SystemConfig& cfg, std::size_t frames, std::size_t trials, std::uint64_t seed,
                              std::uint64_t point, std::size_t jobs, const ReceiverFrontEnd* front_end) {
  std::vector<LinkResult> results(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    RandomStream payload_rng = RandomStream::derive(seed, {point, t, detail::kTagPayload});
    const Bits payload = random_bits(frames * cfg.bits_per_frame(), payload_rng);
    RandomStream rng = RandomStream::derive(seed, {point, t});
    results[t] = run_link(cfg, payload, rng, front_end);
    results[t].bits.clear();
    results[t].metrics.constellation.clear();
  });
  TrialTotals tot;
  for (const auto& r : results) tot.add(r);
  return tot;
}

inline ReceiverFrontEnd make_front_end(const SystemConfig& cfg, std::uint64_t seed) {
  RandomStream rng = RandomStream::derive(seed, {detail::kTagFrontEnd});
  return build_front_end(cfg, rng);
}

// ---------------------------------------------------------------- sweep-snr

struct SweepRow {
  double snr_db = 0.0;
  std::string mode;    // ideal | crossbar
  std::string scheme;  // none | verify | no_verify
  double mer_db = 0.0;
  double ber = 0.0;
  std::uint64_t bits = 0;
  std::optional<PerfSummary> perf;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

inline SweepResult sweep_snr(const RunConfig& rc, const RunOptions& run) {
  validate(rc);
  const SystemConfig& base = rc.system;
  SweepResult res;

  std::optional<ReceiverFrontEnd> ideal_fe, crossbar_fe;
  auto front_end = [&](const SystemConfig& c) -> const ReceiverFrontEnd& {
    auto& slot = c.processor == ProcessorKind::ideal ? ideal_fe : crossbar_fe;
    if (!slot) slot = make_front_end(c, run.seed);
    return *slot;
  };

  const OpCountModel ops{static_cast<std::uint64_t>(base.n_c), static_cast<std::uint64_t>(base.n_t),
                         static_cast<std::uint64_t>(base.n_r)};
  for (std::size_t p = 0; p < rc.sweep.snr_db.size(); ++p) {
    for (const auto& entry : rc.sweep.schemes) {
      SystemConfig c = entry_config(base, entry);
      c.snr_db = rc.sweep.snr_db[p];
      const TrialTotals tot =
          run_trials(c, rc.sweep.frames_per_trial, rc.sweep.trials, run.seed, p, run.jobs, &front_end(c));
      SweepRow row{c.snr_db,
                   std::string(to_string(c.processor)),
                   entry == "ideal" ? "none" : entry,
                   tot.mer_db(c.mer_cap_db),
                   tot.ber(),
                   tot.bits,
                   std::nullopt};
      if (c.processor == ProcessorKind::crossbar) row.perf = summarize(tot.ledger, ops);
      res.rows.push_back(row);
    }
  }

  CsvTable metrics({"snr_db", "mode", "scheme", "mer_db", "ber", "bits"});
  CsvTable perf({"snr_db", "scheme", "total_ops", "latency_s", "energy_j", "tops", "tops_per_watt"});
  for (const auto& r : res.rows) {
    metrics.row().cell(r.snr_db).cell(r.mode).cell(r.scheme).cell(r.mer_db).cell(r.ber).cell(r.bits);
    if (r.perf) {
      perf.row()
          .cell(r.snr_db)
          .cell(r.scheme)
          .cell(r.perf->total_ops)
          .cell(r.perf->latency_s)
          .cell(r.perf->energy_j)
          .cell(r.perf->tops)
          .cell(r.perf->tops_per_watt);
    }
  }
  detail::emit(run, "sweep_snr.csv", metrics.str());
  if (perf.size() > 0) detail::emit(run, "sweep_perf.csv", perf.str());

  if (run.plot) {
    std::vector<Series> mer, ber;
    for (const auto& entry : rc.sweep.schemes) {
      Series m{entry, {}, {}}, b{entry, {}, {}};
      for (const auto& r : res.rows) {
        if ((entry == "ideal") != (r.scheme == "none") || (entry != "ideal" && r.scheme != entry)) continue;
        m.x.push_back(r.snr_db);
        m.y.push_back(r.mer_db);
        b.x.push_back(r.snr_db);
        b.y.push_back(r.ber);
      }
      mer.push_back(m);
      ber.push_back(b);
    }
    detail::emit(run, "sweep_mer.svg", render_svg(mer, {"MER vs SNR", "SNR (dB)", "MER (dB)", false, false}));
    detail::emit(run, "sweep_ber.svg", render_svg(ber, {"BER vs SNR", "SNR (dB)", "BER", true, false}));
  }
  return res;
}

// ---------------------------------------------------------------- demos

struct DemoPoint {
  std::string condition;
  double snr_db = 0.0;
  std::string mode;
  double mer_db = 0.0;
  double ber = 0.0;
  std::uint64_t symbols = 0;
  std::vector<ConstellationSample> constellation;
};

namespace detail {

inline DemoPoint demo_point(SystemConfig c, const std::string& condition, std::size_t frames, std::uint64_t seed,
                            std::uint64_t point, const ReceiverFrontEnd& fe) {
  c.constellation_samples = frames * static_cast<std::size_t>(c.n_c * c.n_t);
  RandomStream payload_rng = RandomStream::derive(seed, {point, 0, kTagPayload});
  const Bits payload = random_bits(frames * c.bits_per_frame(), payload_rng);
  RandomStream rng = RandomStream::derive(seed, {point, 0});
  LinkResult r = run_link(c, payload, rng, &fe);
  return {condition,
          c.snr_db,
          std::string(to_string(c.processor)),
          r.metrics.mer_db,
          r.metrics.ber,
          r.metrics.symbols_sent,
          std::move(r.metrics.constellation)};
}

inline void emit_demo(const RunOptions& run, const std::string& prefix, const std::vector<DemoPoint>& pts) {
  CsvTable summary({"condition", "snr_db", "mode", "mer_db", "ber", "symbols"});
  for (const auto& p : pts) {
    summary.row().cell(p.condition).cell(p.snr_db).cell(p.mode).cell(p.mer_db).cell(p.ber).cell(p.symbols);
    emit(run, prefix + "_constellation_" + p.condition + ".csv", constellation_table(p.constellation).str());
    if (run.plot) {
      Series s{p.condition, {}, {}};
      for (const auto& c : p.constellation) {
        s.x.push_back(c.received.real());
        s.y.push_back(c.received.imag());
      }
      emit(run, prefix + "_constellation_" + p.condition + ".svg",
           render_svg({s},
                      {prefix + " " + p.condition + " (MER " + format_number(std::round(p.mer_db * 10) / 10) + " dB)",
                       "I", "Q", false, true}));
    }
  }
  emit(run, prefix + "_mer.csv", summary.str());
}

}  // namespace detail

/// Noiseless and noisy channel through the configured (normally single
/// antenna, few sub-carrier) OFDM link; every pre-demapper symbol is kept.
inline std::vector<DemoPoint> ofdm_demo(const RunConfig& rc, const RunOptions& run) {
  validate(rc);
  const ReceiverFrontEnd fe = make_front_end(rc.system, run.seed);
  std::vector<DemoPoint> pts;
  SystemConfig quiet = rc.system;
  quiet.channel_noise = false;
  pts.push_back(detail::demo_point(quiet, "noiseless", rc.demo.frames, run.seed, 0, fe));
  pts.push_back(
      detail::demo_point(rc.system, "snr_" + detail::file_tag(rc.system.snr_db), rc.demo.frames, run.seed, 1, fe));
  detail::emit_demo(run, "ofdm_demo", pts);
  return pts;
}

/// The configured MIMO link at each demo SNR, in the configured processor
/// mode and as the ideal digital reference.
inline std::vector<DemoPoint> mimo_demo(const RunConfig& rc, const RunOptions& run) {
  validate(rc);
  std::vector<DemoPoint> pts;
  SystemConfig ideal = rc.system;
  ideal.processor = ProcessorKind::ideal;
  const ReceiverFrontEnd fe = make_front_end(rc.system, run.seed);
  const ReceiverFrontEnd ideal_fe = make_front_end(ideal, run.seed);
  for (std::size_t i = 0; i < rc.demo.snr_db.size(); ++i) {
    SystemConfig c = rc.system;
    c.snr_db = ideal.snr_db = rc.demo.snr_db[i];
    const std::string tag = "snr_" + detail::file_tag(c.snr_db);
    pts.push_back(detail::demo_point(c, tag, rc.demo.frames, run.seed, i, fe));
    if (rc.system.processor != ProcessorKind::ideal)
      pts.push_back(detail::demo_point(ideal, tag + "_ideal", rc.demo.frames, run.seed, i, ideal_fe));
  }
  detail::emit_demo(run, "mimo_demo", pts);
  return pts;
}

// ---------------------------------------------------------------- latency-scan

inline std::vector<LatencyScanReport> latency_scan_experiment(const RunConfig& rc, const RunOptions& run) {
  validate(rc);
  std::vector<LatencyScanReport> reports;
  for (const auto& s : rc.scan.schemes) {
    LatencyScanOptions o;
    o.scheme = s == "verify" ? WriteScheme::verify : WriteScheme::no_verify;
    o.tolerance = rc.scan.tolerance;
    o.max_pulses = rc.system.detector_program.max_pulses;
    if (rc.scan.target_fraction >= 0.0) o.target_fraction = rc.scan.target_fraction;
    o.trials = rc.scan.trials;
    o.jobs = run.jobs;
    reports.push_back(latency_scan(rc.scan.sizes, o, rc.system.device, derive_seed(run.seed, {detail::kTagDevice})));
  }

  CsvTable pts({"scheme", "n", "mean_latency_s", "std_latency_s", "latency_per_n_ln_n", "latency_per_n_sqrt_ln_n"});
  CsvTable fits({"scheme", "model", "a", "c", "relative_rms"});
  CsvTable bounds({"scheme", "spread_n_ln_n", "spread_n_sqrt_ln_n"});
  std::vector<Series> series;
  for (const auto& r : reports) {
    const std::string name(to_string(r.scheme));
    Series s{name, {}, {}};
    for (const auto& p : r.points) {
      pts.row()
          .cell(name)
          .cell(p.n)
          .cell(p.mean_latency)
          .cell(p.std_latency)
          .cell(p.per_n_ln_n)
          .cell(p.per_n_sqrt_ln_n);
      s.x.push_back(p.n);
      s.y.push_back(p.mean_latency);
    }
    for (const auto& f : r.fits) fits.row().cell(name).cell(f.model).cell(f.a).cell(f.c).cell(f.relative_rms);
    bounds.row().cell(name).cell(r.spread_n_ln_n()).cell(r.spread_n_sqrt_ln_n());
    series.push_back(std::move(s));
  }
  detail::emit(run, "latency_scan.csv", pts.str());
  detail::emit(run, "latency_fit.csv", fits.str());
  detail::emit(run, "latency_bounds.csv", bounds.str());
  if (run.plot)
    detail::emit(run, "latency_scan.svg",
                 render_svg(series, {"Array write latency", "N", "latency (s)", false, false}));
  return reports;
}

// ---------------------------------------------------------------- image

struct ImageRow {
  std::string entry;
  GrayImage image;
  LinkMetrics metrics;
  std::uint64_t pixel_errors = 0;
};

/// Sends the image once per sweep entry at system.snr_db.
inline std::vector<ImageRow> image_experiment(const RunConfig& rc, const GrayImage& image, const RunOptions& run) {
  validate(rc);
  std::vector<ImageRow> rows;
  std::optional<ReceiverFrontEnd> ideal_fe, crossbar_fe;
  for (const auto& entry : rc.sweep.schemes) {
    const SystemConfig c = entry_config(rc.system, entry);
    auto& slot = c.processor == ProcessorKind::ideal ? ideal_fe : crossbar_fe;
    if (!slot) slot = make_front_end(c, run.seed);
    RandomStream rng = RandomStream::derive(run.seed, {0, 0});
    ImageTransmission t = transmit_image(c, image, rng, &*slot);
    std::uint64_t errs = 0;
    for (std::size_t i = 0; i < image.pixels.size(); ++i) errs += image.pixels[i] != t.image.pixels[i];
    t.metrics.constellation.clear();
    rows.push_back({entry, std::move(t.image), std::move(t.metrics), errs});
  }
  CsvTable table({"entry", "snr_db", "mer_db", "ber", "bits", "pixel_errors"});
  for (const auto& r : rows) {
    table.row()
        .cell(r.entry)
        .cell(rc.system.snr_db)
        .cell(r.metrics.mer_db)
        .cell(r.metrics.ber)
        .cell(r.metrics.bits_sent)
        .cell(r.pixel_errors);
    detail::emit(run, "image_" + r.entry + ".pgm", encode_pgm(r.image));
  }
  detail::emit(run, "image_metrics.csv", table.str());
  return rows;
}

// ---------------------------------------------------------------- calibrate-device

struct DeviceStatistic {
  std::string quantity;
  double value = 0.0;
};

/// Monte Carlo statistics of the configured device model: pulse increments,
/// read noise and the cost/accuracy of both write schemes for mid-range
/// targets.
inline std::vector<DeviceStatistic> calibrate_device(const RunConfig& rc, const RunOptions& run,
                                                     std::size_t samples = 20000) {
  validate(rc);
  const DeviceParams& d = rc.system.device;
  RandomStream rng = RandomStream::derive(run.seed, {detail::kTagDevice});
  const double step = d.mean_step();
  const double mid = d.g_min + 0.5 * d.range();

  double inc_sum = 0, inc_sq = 0, read_sq = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double g1 = apply_pulse({mid}, Polarity::potentiation, d, rng).conductance;
    const double inc = (g1 - mid) / step;
    inc_sum += inc;
    inc_sq += inc * inc;
    const double r = read_conductance({mid}, d, rng) / mid - 1.0;
    read_sq += r * r;
  }
  const double n = static_cast<double>(samples);
  const double inc_mean = inc_sum / n;

  auto scheme_stats = [&](bool verify) {
    double pulses = 0, reads = 0, err_sq = 0, lat = 0, energy = 0;
    const std::size_t m = samples / 10;
    for (std::size_t i = 0; i < m; ++i) {
      const ProgramResult r = verify ? program_with_verify({d.g_min}, mid, rc.system.detector_program.tolerance,
                                                           rc.system.detector_program.max_pulses, d, rng)
                                     : program_without_verify({d.g_min}, mid, d, rng);
      pulses += static_cast<double>(r.report.pulses_applied);
      reads += static_cast<double>(r.report.verify_reads);
      err_sq += r.report.final_error * r.report.final_error;
      lat += r.report.latency(d);
      energy += r.report.write_energy + r.report.read_energy;
    }
    const double md = static_cast<double>(m);
    return std::vector<double>{pulses / md, reads / md, std::sqrt(err_sq / md), lat / md, energy / md};
  };
  const auto v = scheme_stats(true);
  const auto nv = scheme_stats(false);

  std::vector<DeviceStatistic> stats = {
      {"mean_step_siemens", step},
      {"pulse_increment_mean_steps", inc_mean},
      {"pulse_increment_std_steps", std::sqrt(std::max(0.0, inc_sq / n - inc_mean * inc_mean))},
      {"read_relative_rms", std::sqrt(read_sq / n)},
      {"verify_mid_range_pulses", v[0]},
      {"verify_mid_range_reads", v[1]},
      {"verify_mid_range_rms_error", v[2]},
      {"verify_mid_range_latency_s", v[3]},
      {"verify_mid_range_energy_j", v[4]},
      {"no_verify_mid_range_pulses", nv[0]},
      {"no_verify_mid_range_rms_error", nv[2]},
      {"no_verify_mid_range_latency_s", nv[3]},
      {"no_verify_mid_range_energy_j", nv[4]},
  };
  CsvTable t({"quantity", "value"});
  for (const auto& s : stats) t.row().cell(s.quantity).cell(s.value);
  detail::emit(run, "calibrate_device.csv", t.str());
  return stats;
}

}  // namespace rrambb
