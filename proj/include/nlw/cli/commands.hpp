#pragma once

// The work behind the CLI subcommands. Output text is produced here so it
// can be tested without spawning the executable.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "nlw/cli/config.hpp"
#include "nlw/cli/format.hpp"
#include "nlw/response.hpp"
#include "nlw/spectrum.hpp"
#include "nlw/witness.hpp"

namespace nlw::cli {

struct ScanRow {
  int order = 0;
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  Complex p;
};

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any worker is rethrown.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, 256));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline LiouvilleVector input_operator(const StateInput& input, const ExcitonModel& model) {
  if (const auto* rho = std::get_if<DensityMatrix>(&input)) return *rho;
  if (const auto* mix = std::get_if<ClassicalMixture>(&input)) return mix->density();
  return eigenstate(model, std::get<std::string>(input));
}

/// One row per grid point, t1 outer and t3 inner. The grids describe the
/// three-pulse timeline: order 3 uses (t1, t2, t3), order 2 the branch
/// without pulse 2 (t1 + t2, t3), order 1 pulse 3 alone (t3).
inline std::vector<ScanRow> run_scan(const ScenarioConfig& cfg, int threads = 1) {
  if (!cfg.scan) throw ConfigError("schema violation at scan: required");
  const ScanConfig& scan = *cfg.scan;
  const ExcitonModel model = build_model(cfg);
  const DephasingModel noise = build_noise(cfg, model.dim());
  const LiouvilleVector rho = input_operator(build_input(cfg.experiment.input, model), model);
  const SignPattern pattern(scan.pattern);

  auto area = [&](int k) { return cfg.pulses.empty() ? 1.0 : cfg.pulses[static_cast<std::size_t>(k)].area; };
  double areas = 1.0;
  if (scan.order == 3) areas = area(0) * area(1) * area(2);
  if (scan.order == 2) areas = area(0) * area(2);
  if (scan.order == 1) areas = area(2);

  const auto n1 = static_cast<std::size_t>(scan.t1.count);
  const auto n2 = static_cast<std::size_t>(scan.t2.count);
  const auto n3 = static_cast<std::size_t>(scan.t3.count);
  std::vector<ScanRow> rows(n1 * n2 * n3);
  parallel_for(rows.size(), threads, [&](std::size_t idx) {
    const auto i1 = static_cast<int>(idx / (n2 * n3));
    const auto i2 = static_cast<int>((idx / n3) % n2);
    const auto i3 = static_cast<int>(idx % n3);
    ScanRow row{scan.order, scan.t1.at(i1), scan.t2.at(i2), scan.t3.at(i3), {}};
    Complex s;
    if (scan.order == 3) {
      const double d[] = {row.t1, row.t2, row.t3};
      s = select_phase_matched(3, pattern, d, model, noise, rho);
    } else if (scan.order == 2) {
      const double d[] = {row.t1 + row.t2, row.t3};
      s = select_phase_matched(2, pattern, d, model, noise, rho);
    } else {
      const double d[] = {row.t3};
      const LiouvilleVector later = free_propagate(rho, row.t1 + row.t2, model, noise);
      s = select_phase_matched(1, pattern, d, model, noise, later);
    }
    row.p = areas * s;
    rows[idx] = row;
  });
  return rows;
}

inline std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::string out = "t1,t2,t3,re_p,im_p,abs2_p,order\n";
  for (const auto& r : rows) {
    out += format_number(r.t1) + "," + format_number(r.t2) + "," + format_number(r.t3) + "," +
           format_number(r.p.real()) + "," + format_number(r.p.imag()) + "," +
           format_number(std::norm(r.p)) + "," + std::to_string(r.order) + "\n";
  }
  return out;
}

inline Json report_json(const WitnessReport& r, const std::vector<std::string>& labels) {
  Json j;
  j["schema_version"] = "1";
  j["kind"] = "protocol";
  j["d_rho"] = r.d_rho;
  Json controls = Json::object();
  for (const auto& label : labels)
    if (r.controls.count(label)) controls[label] = r.controls.at(label);
  j["controls"] = std::move(controls);
  j["lower"] = r.lower;
  j["upper"] = r.upper;
  j["violated"] = r.violated;
  j["margin"] = r.margin;
  j["tolerance"] = r.tolerance;
  j["solve_residual"] = r.solve_residual ? Json(*r.solve_residual) : Json(nullptr);
  j["condition_number"] = r.condition_number ? Json(*r.condition_number) : Json(nullptr);
  Json notes = Json::object();
  for (const auto& [k, v] : r.notes) notes[k] = v;
  j["notes"] = std::move(notes);
  return j;
}

/// JSON text for experiment kinds protocol, main and control.
inline std::string run_witness(const ScenarioConfig& cfg) {
  const std::string& kind = cfg.experiment.kind;
  if (kind == "scan") throw ConfigError("schema violation at experiment.kind: witness needs protocol, main or control");
  ProtocolConfig protocol = build_protocol(cfg);
  if (kind == "protocol") return to_text(report_json(run_protocol(protocol), protocol.experiment.model.labels()));

  Json j;
  j["schema_version"] = "1";
  j["kind"] = kind;
  if (kind == "main") {
    j["d_rho"] = run_main_experiment(protocol.experiment, protocol.main_input);
  } else {
    j["d"] = run_control_experiment(protocol.experiment, protocol.main_input);
  }
  j["pattern"] = protocol.experiment.pattern.to_string();
  j["detection"] = to_string(protocol.experiment.detection);
  return to_text(j);
}

/// CSV of the 2D spectrum of a (t1, t3) scan at a single t2.
inline std::string emit_spectrum(const ScenarioConfig& cfg, int threads = 1) {
  if (!cfg.scan) throw ConfigError("schema violation at scan: required");
  if (cfg.scan->t2.count != 1) throw ConfigError("schema violation at scan.t2.count: spectrum needs a single t2");
  const auto rows = run_scan(cfg, threads);
  std::vector<ResponseSample> samples;
  samples.reserve(rows.size());
  for (const auto& r : rows) samples.push_back({r.t1, r.t2, r.t3, r.p});
  const Spectrum2D spec = spectrum_2d(samples);

  std::string out = "omega1,omega3,re,im,abs\n";
  for (std::size_t a = 0; a < spec.omega1.size(); ++a) {
    for (std::size_t b = 0; b < spec.omega3.size(); ++b) {
      const Complex v = spec.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      out += format_number(spec.omega1[a]) + "," + format_number(spec.omega3[b]) + "," +
             format_number(v.real()) + "," + format_number(v.imag()) + "," +
             format_number(std::abs(v)) + "\n";
    }
  }
  return out;
}

}  // namespace nlw::cli
