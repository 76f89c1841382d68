#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "rrambb/channel_est.hpp"
#include "rrambb/complex_map.hpp"
#include "rrambb/crossbar.hpp"
#include "rrambb/detector.hpp"
#include "rrambb/device.hpp"
#include "rrambb/error.hpp"
#include "rrambb/qam.hpp"

namespace rrambb {

enum class ProcessorKind { ideal, crossbar };
enum class ChannelModel { rayleigh, awgn, fixed };
enum class CsiMode { estimated, perfect };
enum class Equalizer { detector, none };

inline std::string_view to_string(ProcessorKind k) { return k == ProcessorKind::ideal ? "ideal" : "crossbar"; }
inline std::string_view to_string(ChannelModel m) {
  switch (m) {
    case ChannelModel::rayleigh: return "rayleigh";
    case ChannelModel::awgn: return "awgn";
    case ChannelModel::fixed: return "fixed";
  }
  return "?";
}
inline std::string_view to_string(CsiMode m) { return m == CsiMode::estimated ? "estimated" : "perfect"; }
inline std::string_view to_string(Equalizer e) { return e == Equalizer::detector ? "detector" : "none"; }

/// One link configuration. n_c == 1 is a single-carrier link without OFDM
/// framing (no DFT, no cyclic prefix).
struct SystemConfig {
  int n_c = 1024;
  int n_t = 4;
  int n_r = 4;
  int modulation = 16;
  int cp_len = 3;
  int channel_taps = 4;
  double snr_db = 30.0;
  // false drops the additive channel noise; the detector still regularizes with snr_db.
  bool channel_noise = true;
  int channel_update_period = 14;  // data OFDM symbols between re-estimations
  ChannelModel channel = ChannelModel::rayleigh;
  ComplexMatrix fixed_channel;  // n_r x n_t, flat, for ChannelModel::fixed
  CsiMode csi = CsiMode::estimated;
  PilotKind pilot = PilotKind::identity;
  Equalizer equalizer = Equalizer::detector;
  DetectorMode detector = DetectorMode::lmmse;

  ProcessorKind processor = ProcessorKind::ideal;
  ProgramOptions detector_program;  // write scheme of the per-sub-carrier detector arrays
  ProgramOptions static_program;    // DFT and pilot arrays, written once with verify
  DeviceParams device;

  double mer_cap_db = 200.0;
  std::size_t constellation_samples = 4096;
  std::uint64_t seed = 1;

  int bits_per_symbol() const { return QamConstellation(modulation).bits_per_symbol(); }
  std::size_t bits_per_frame() const {
    return static_cast<std::size_t>(n_c) * static_cast<std::size_t>(n_t) * static_cast<std::size_t>(bits_per_symbol());
  }
  double snr_linear() const { return std::pow(10.0, snr_db / 10.0); }
  bool ofdm() const { return n_c > 1; }

  void validate() const {
    auto bad = [](const std::string& m) { fail(ErrorKind::ConfigError, m); };
    if (n_c < 1) bad("n_c must be at least 1");
    if (n_t < 1 || n_r < 1) bad("antenna counts must be at least 1");
    if (n_r < n_t) bad("n_r must be at least n_t");
    if (channel_taps < 1) bad("channel_taps must be at least 1");
    if (cp_len < 0) bad("cp_len must be non-negative");
    if (cp_len < channel_taps - 1) bad("cp_len must be at least channel_taps - 1");
    if (n_c == 1 && (channel_taps != 1 || cp_len != 0))
      bad("single-carrier links need channel_taps = 1 and cp_len = 0");
    if (n_c > 1 && cp_len >= n_c) bad("cp_len must be shorter than the OFDM symbol");
    if (channel_update_period < 1) bad("channel_update_period must be at least 1");
    if (!std::isfinite(snr_db)) bad("snr_db must be finite");
    if (mer_cap_db <= 0.0) bad("mer_cap_db must be positive");
    try {
      (void)QamConstellation(modulation);
      device.validate();
      detector_program.validate();
      static_program.validate();
      if (pilot == PilotKind::hadamard) (void)make_unitary_pilot(n_t, pilot);
    } catch (const Error& e) {
      bad(e.what());
    }
    if (static_program.scheme != WriteScheme::verify) bad("static arrays are always written with verify");
    if (channel == ChannelModel::fixed && (fixed_channel.rows() != n_r || fixed_channel.cols() != n_t))
      bad("fixed channel must be n_r x n_t");
    if (channel == ChannelModel::fixed && channel_taps != 1) bad("fixed channel is flat (channel_taps = 1)");
    if (channel == ChannelModel::awgn && channel_taps != 1) bad("awgn channel is flat (channel_taps = 1)");
    if (equalizer == Equalizer::none && n_r != n_t) bad("equalizer = none needs n_r == n_t");
  }
};

}  // namespace rrambb
