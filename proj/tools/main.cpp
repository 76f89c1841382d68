// rrambb-cli: experiment runner for the RRAM baseband simulator.

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <exception>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "rrambb/config.hpp"
#include "rrambb/experiments.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  bool plot = false;
  std::optional<std::size_t> trials;
  std::size_t jobs = 1;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::string& command, const GlobalFlags& g, const rrambb::RunConfig& cfg,
                    const rrambb::RunOptions& run, const std::string& started) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["seed"] = run.seed;
  j["config_path"] = g.config;
  j["config"] = rrambb::config_snapshot(cfg);
  j["jobs"] = run.jobs;
  std::vector<std::string> outputs;
  for (const auto& p : rrambb::take_written_files()) outputs.push_back(p.string());
  j["outputs"] = outputs;
  j["started_at"] = started;
  j["finished_at"] = utc_now();
  rrambb::write_text(run.out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator of RRAM-crossbar baseband processing for MIMO-OFDM links"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalFlags g;
  app.add_option("--config", g.config, "INI configuration file");
  app.add_option("--seed", g.seed, "Run seed (defaults to system.seed)");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_flag("--plot", g.plot, "Also write SVG charts");
  app.add_option("--trials", g.trials, "Override Monte Carlo trial counts")->check(CLI::PositiveNumber);
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  std::vector<double> snr_list;
  std::vector<int> sizes;
  std::string image_path;
  auto* sweep = app.add_subcommand("sweep-snr", "MER/BER versus SNR for ideal and crossbar receivers");
  sweep->add_option("--snr", snr_list, "SNR points in dB (overrides sweep.snr_db)");
  app.add_subcommand("ofdm-demo", "Constellations of the single-antenna OFDM demo");
  auto* mimo = app.add_subcommand("mimo-demo", "Constellations of the MIMO detector demo");
  mimo->add_option("--snr", snr_list, "SNR points in dB (overrides demo.snr_db)");
  auto* scan = app.add_subcommand("latency-scan", "Array write latency versus size");
  scan->add_option("--sizes", sizes, "Array sizes N (overrides scan.sizes)");
  auto* image = app.add_subcommand("image", "Send a PGM image through the link");
  image->add_option("--image", image_path, "Binary PGM (P5) input")->required();
  app.add_subcommand("calibrate-device", "Print device model statistics");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string started = utc_now();
    rrambb::RunConfig cfg = g.config.empty() ? rrambb::RunConfig{} : rrambb::load_config(g.config);
    if (g.trials) {
      cfg.sweep.trials = *g.trials;
      cfg.scan.trials = *g.trials;
    }
    rrambb::RunOptions run;
    run.seed = g.seed.value_or(cfg.system.seed);
    run.out_dir = g.out;
    run.plot = g.plot;
    run.jobs = g.jobs;

    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "sweep-snr") {
      if (!snr_list.empty()) cfg.sweep.snr_db = snr_list;
      for (const auto& r : rrambb::sweep_snr(cfg, run).rows) {
        std::cout << "snr " << r.snr_db << " dB  " << r.mode << "/" << r.scheme << "  MER " << r.mer_db << " dB  BER "
                  << r.ber;
        if (r.perf) std::cout << "  TOPS " << r.perf->tops << "  TOPS/W " << r.perf->tops_per_watt;
        std::cout << "\n";
      }
    } else if (command == "ofdm-demo") {
      for (const auto& p : rrambb::ofdm_demo(cfg, run))
        std::cout << p.condition << "  MER " << p.mer_db << " dB  BER " << p.ber << "  symbols " << p.symbols << "\n";
    } else if (command == "mimo-demo") {
      if (!snr_list.empty()) cfg.demo.snr_db = snr_list;
      for (const auto& p : rrambb::mimo_demo(cfg, run))
        std::cout << p.condition << "  " << p.mode << "  MER " << p.mer_db << " dB  BER " << p.ber << "\n";
    } else if (command == "latency-scan") {
      if (!sizes.empty()) cfg.scan.sizes = sizes;
      for (const auto& r : rrambb::latency_scan_experiment(cfg, run)) {
        for (const auto& p : r.points)
          std::cout << rrambb::to_string(r.scheme) << "  N " << p.n << "  latency " << p.mean_latency << " s\n";
        std::cout << rrambb::to_string(r.scheme) << "  spread N lnN " << r.spread_n_ln_n() << "  spread N sqrt(lnN) "
                  << r.spread_n_sqrt_ln_n() << "\n";
      }
    } else if (command == "image") {
      const rrambb::GrayImage img = rrambb::read_pgm(image_path);
      for (const auto& r : rrambb::image_experiment(cfg, img, run))
        std::cout << r.entry << "  BER " << r.metrics.ber << "  pixel errors " << r.pixel_errors << "\n";
    } else if (command == "calibrate-device") {
      for (const auto& s : rrambb::calibrate_device(cfg, run)) std::cout << s.quantity << " = " << s.value << "\n";
    }
    write_manifest(command, g, cfg, run, started);
  } catch (const rrambb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
