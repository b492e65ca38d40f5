// nlw: scenario-driven front end for response scans, 2D spectra and the
// invasiveness witness protocol.
//
// Exit codes: 0 success, 2 config error, 3 computation error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nlw/cli/commands.hpp"
#include "nlw/cli/config.hpp"
#include "nlw/cli/format.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;

void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw nlw::Error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear-spectroscopy response and invasiveness witness simulator"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = 1;
  std::string output_dir = ".";
  app.add_option("--config", config_path, "scenario file (JSON)")->required();
  app.add_option("--threads", threads, "worker threads for grid fan-out")->check(CLI::PositiveNumber);
  app.add_option("--output", output_dir, "directory for output files");

  auto* validate = app.add_subcommand("validate", "check a scenario and print it with defaults filled");
  auto* scan = app.add_subcommand("scan", "polarization over the delay grid, as CSV");
  auto* witness = app.add_subcommand("witness", "run the witness protocol, as JSON");
  auto* spectrum = app.add_subcommand("spectrum", "2D spectrum of a (t1, t3) scan, as CSV");
  for (auto* sub : {validate, scan, witness, spectrum}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  nlw::cli::ScenarioConfig cfg;
  try {
    cfg = nlw::cli::load_config(config_path);
  } catch (const nlw::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const std::filesystem::path dir(output_dir);
    if (validate->parsed()) {
      std::cout << nlw::cli::to_text(nlw::cli::to_json(cfg));
    } else if (scan->parsed()) {
      write_file(dir, cfg.output.scan, nlw::cli::scan_csv(nlw::cli::run_scan(cfg, threads)));
    } else if (witness->parsed()) {
      const std::string report = nlw::cli::run_witness(cfg);
      write_file(dir, cfg.output.witness, report);
      std::cout << report;
    } else if (spectrum->parsed()) {
      write_file(dir, cfg.output.spectrum, nlw::cli::emit_spectrum(cfg, threads));
    }
  } catch (const nlw::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return kExitCompute;
  }
  return 0;
}
