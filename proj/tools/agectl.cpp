/*
 * Copyright (c) 2026 The agectl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at:
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// agectl command-line driver. Talks to the library only through agectl.h.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "agectl/agectl.h"

namespace {

constexpr double kForever = std::numeric_limits<double>::infinity();

int report_failure(const char* what, agectl_status st) {
  std::fprintf(stderr, "agectl %s: %s: %s\n", what, agectl_status_string(st), agectl_last_error());
  return st == AGECTL_E_CONFIG || st == AGECTL_E_INVALID_ARGUMENT ? 2 : 1;
}

extern "C" void on_signal(int) { agectl_request_stop(); }

void install_signal_handlers() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
}

void print_ready(const char* local, void* user) {
  std::fprintf(stderr, "%s listening on %s\n", static_cast<const char*>(user), local);
}

std::string ms(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", seconds * 1e3);
  return buf;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return v;
}

void print_summary(const agectl_summary& s) {
  std::printf("  age semantics      %s\n", s.one_way ? "one_way" : "round_trip");
  std::printf("  avg age (ms)       %s\n", s.has_age ? ms(s.avg_age).c_str() : "n/a");
  std::printf("  avg delay (ms)     %s\n", ms(s.avg_delay).c_str());
  std::printf("  avg rtt (ms)       %s\n", ms(s.avg_rtt).c_str());
  std::printf("  throughput (bps)   %.1f\n", s.throughput_bps);
  std::printf("  backlog avg        %.4f\n", s.backlog_avg);
  std::printf("  delivered / sent   %llu / %llu\n", static_cast<unsigned long long>(s.delivered),
              static_cast<unsigned long long>(s.sent));
}

struct SimulateArgs {
  std::string spec;
  std::string out;
  int jobs = 1;
};

int cmd_simulate(const SimulateArgs& a) {
  auto progress = [](const char* run_id, const char* error, size_t done, size_t total, void*) {
    if (error != nullptr)
      std::fprintf(stderr, "[%zu/%zu] %s FAILED: %s\n", done, total, run_id, error);
    else
      std::fprintf(stderr, "[%zu/%zu] %s\n", done, total, run_id);
  };
  size_t runs = 0, failures = 0;
  const auto st = agectl_experiment_run(a.spec.c_str(), a.out.empty() ? nullptr : a.out.c_str(), a.jobs,
                                        progress, nullptr, &runs, &failures);
  if (st != AGECTL_OK) return report_failure("simulate", st);
  std::printf("%zu runs completed\n", runs);
  return 0;
}

struct SourceArgs {
  std::string peer, bind, mode = "acp+", out;
  double duration = 30.0;
  size_t payload_bytes = 1024;
  double initial_rtt = 1.0;
  uint64_t seed = 1;
};

int cmd_source(const SourceArgs& a) {
  install_signal_handlers();
  agectl_source_options o{};
  o.peer = a.peer.c_str();
  o.bind = a.bind.c_str();
  o.mode = a.mode.c_str();
  o.duration = a.duration;
  o.payload_bytes = a.payload_bytes;
  o.initial_rtt = a.initial_rtt;
  o.seed = a.seed;
  o.out = a.out.empty() ? nullptr : a.out.c_str();
  agectl_source_report r{};
  const auto st = agectl_run_source(&o, nullptr, nullptr, &r);
  if (st != AGECTL_OK) return report_failure("source", st);
  std::printf("source %s -> %s, %.2f s\n", a.mode.c_str(), a.peer.c_str(), r.elapsed);
  std::printf("  sent %llu, acked %llu, superseded %llu, out of sequence %llu, epochs %llu\n",
              static_cast<unsigned long long>(r.sent), static_cast<unsigned long long>(r.acked),
              static_cast<unsigned long long>(r.superseded), static_cast<unsigned long long>(r.out_of_sequence),
              static_cast<unsigned long long>(r.epochs));
  if (r.epochs > 0) std::printf("  final lambda       %.3f /s\n", r.final_lambda);
  if (r.elapsed > 0) print_summary(r.summary);
  return 0;
}

struct MonitorArgs {
  std::string listen = "0.0.0.0:5000", out;
  double duration = kForever;
};

int cmd_monitor(const MonitorArgs& a) {
  install_signal_handlers();
  agectl_monitor_options o{a.listen.c_str(), a.duration, a.out.empty() ? nullptr : a.out.c_str()};
  agectl_monitor_report r{};
  char who[] = "monitor";
  const auto st = agectl_run_monitor(&o, print_ready, who, &r);
  if (st != AGECTL_OK) return report_failure("monitor", st);
  std::printf("monitor: %llu datagrams, %llu delivered, %llu discarded, %llu malformed, %llu acks\n",
              static_cast<unsigned long long>(r.datagrams), static_cast<unsigned long long>(r.delivered),
              static_cast<unsigned long long>(r.discarded), static_cast<unsigned long long>(r.malformed),
              static_cast<unsigned long long>(r.acks_sent));
  return 0;
}

struct ProxyArgs {
  std::string listen = "0.0.0.0:5001", forward, dist = "constant";
  double delay_ms = 0, loss = 0;
  double delay_up_ms = -1, delay_down_ms = -1, loss_up = -1, loss_down = -1;
  bool reorder = false;
  uint64_t seed = 1;
  double duration = kForever;
};

int cmd_proxy(const ProxyArgs& a) {
  install_signal_handlers();
  agectl_proxy_options o{};
  o.listen = a.listen.c_str();
  o.forward = a.forward.c_str();
  o.exponential_delay = a.dist == "exponential" ? 1 : 0;
  o.delay_up = (a.delay_up_ms >= 0 ? a.delay_up_ms : a.delay_ms) / 1e3;
  o.delay_down = (a.delay_down_ms >= 0 ? a.delay_down_ms : a.delay_ms) / 1e3;
  o.loss_up = a.loss_up >= 0 ? a.loss_up : a.loss;
  o.loss_down = a.loss_down >= 0 ? a.loss_down : a.loss;
  o.reorder = a.reorder ? 1 : 0;
  o.seed = a.seed;
  o.duration = a.duration;
  agectl_proxy_report r{};
  char who[] = "proxy";
  const auto st = agectl_run_proxy(&o, print_ready, who, &r);
  if (st != AGECTL_OK) return report_failure("proxy", st);
  const char* names[2] = {"up", "down"};
  for (int i = 0; i < 2; ++i)
    std::printf("proxy %-4s received %llu, forwarded %llu, dropped %llu, pending %llu\n", names[i],
                static_cast<unsigned long long>(r.received[i]), static_cast<unsigned long long>(r.forwarded[i]),
                static_cast<unsigned long long>(r.dropped[i]), static_cast<unsigned long long>(r.pending[i]));
  return 0;
}

struct SweepArgs {
  std::string config, out, arrivals = "periodic";
  std::vector<double> rates;
  double lo = 0.05, hi = 1.2;
  int points = 24;
};

int cmd_sweep(const SweepArgs& a) {
  agectl_sim_config* cfg = nullptr;
  auto st = agectl_sim_config_load(a.config.c_str(), &cfg);
  if (st != AGECTL_OK) return report_failure("sweep-min-age", st);
  const size_t n = a.rates.empty() ? static_cast<size_t>(a.points) : a.rates.size();
  std::vector<agectl_sweep_point> pts(n);
  size_t best = 0;
  st = agectl_sweep_min_age(cfg, a.rates.empty() ? nullptr : a.rates.data(), n, a.lo, a.hi,
                            a.arrivals == "poisson" ? 1 : 0, pts.data(), &best);
  agectl_sim_config_destroy(cfg);
  if (st != AGECTL_OK) return report_failure("sweep-min-age", st);

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) {
      std::fprintf(stderr, "agectl sweep-min-age: cannot write %s\n", a.out.c_str());
      return 1;
    }
  }
  std::ostream& os = a.out.empty() ? std::cout : file;
  os << "rate,avg_age_ms,backlog\n";
  char line[128];
  for (const auto& p : pts) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.rate, p.age * 1e3, p.backlog);
    os << line;
  }
  std::fprintf(stderr, "minimum age %.3f ms at %.3f updates/s, backlog %.3f\n", pts[best].age * 1e3,
               pts[best].rate, pts[best].backlog);
  return 0;
}

struct CurveArgs {
  std::string service = "exponential", out;
  double rate_bps = 8e6, prop_delay = 0, rtt_base = 0.01;
  size_t buffer = 0, packet_bits = 8000;
  std::vector<double> loads;
  double lo = 0.05, hi = 1.2;
  int points = 24;
  bool simulated = false;
  uint64_t packets = 200000, seed = 1;
};

int cmd_rtt_curve(const CurveArgs& a) {
  agectl_station s{a.service == "exponential" ? 1 : 0, a.rate_bps, a.buffer, a.prop_delay};
  std::vector<double> loads = a.loads;
  if (loads.empty()) {
    // lo/hi are utilisations; convert to packets per second.
    const double mu = a.rate_bps / static_cast<double>(a.packet_bits);
    for (double u : linear_grid(a.lo, a.hi, a.points)) loads.push_back(u * mu);
  }
  std::vector<agectl_load_point> out(loads.size());
  const auto st = agectl_rtt_curve(&s, a.rtt_base, loads.data(), loads.size(), a.packet_bits, a.simulated ? 1 : 0,
                                   a.packets, a.seed, out.data());
  if (st != AGECTL_OK) return report_failure("rtt-curve", st);

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) {
      std::fprintf(stderr, "agectl rtt-curve: cannot write %s\n", a.out.c_str());
      return 1;
    }
  }
  std::ostream& os = a.out.empty() ? std::cout : file;
  os << "load,mean_rtt_ms,unstable\n";
  char line[128];
  for (const auto& p : out) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%d\n", p.load, p.mean_rtt * 1e3, p.unstable);
    os << line;
  }
  return 0;
}

struct ReportArgs {
  std::string dir;
  double warmup = 0.1;
  bool no_files = false;
};

int cmd_report(const ReportArgs& a) {
  char* text = nullptr;
  size_t runs = 0;
  const auto st = agectl_report(a.dir.c_str(), a.warmup, a.no_files ? 0 : 1, &text, &runs);
  if (st != AGECTL_OK) return report_failure("report", st);
  std::fputs(text, stdout);
  agectl_free_string(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information update rate control: simulation, live endpoints and reports"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(agectl_version()));

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run every sweep value and repetition of a spec file");
  simulate->add_option("spec", sim.spec, "Experiment spec (YAML)")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--out", sim.out, "Output directory (default: the spec's output key)");
  simulate->add_option("-j,--jobs", sim.jobs, "Runs to execute in parallel")->check(CLI::PositiveNumber);

  SourceArgs src;
  auto* source = app.add_subcommand("source", "Live update source over UDP");
  source->add_option("--peer", src.peer, "Monitor or proxy address host:port")->required();
  source->add_option("--bind", src.bind, "Local address host:port");
  source->add_option("--mode", src.mode, "acp+, lazy, constant:<rate> or poisson:<rate>");
  source->add_option("--duration", src.duration, "Seconds")->check(CLI::NonNegativeNumber);
  source->add_option("--payload-bytes", src.payload_bytes, "Update payload size");
  source->add_option("--initial-rtt", src.initial_rtt, "RTT assumed before the first ACK, seconds");
  source->add_option("--seed", src.seed, "Seed for poisson generation");
  source->add_option("--out", src.out, "Source session CSV");

  MonitorArgs mon;
  auto* monitor = app.add_subcommand("monitor", "Live monitor: logs deliveries and ACKs each new update");
  monitor->add_option("--listen", mon.listen, "Listen address host:port");
  monitor->add_option("--duration", mon.duration, "Seconds (default: until interrupted)")
      ->check(CLI::NonNegativeNumber);
  monitor->add_option("--out", mon.out, "Monitor CSV");

  ProxyArgs px;
  auto* proxy = app.add_subcommand("proxy", "UDP path emulator between source and monitor");
  proxy->add_option("--listen", px.listen, "Source-facing address host:port");
  proxy->add_option("--forward", px.forward, "Monitor address host:port")->required();
  proxy->add_option("--delay-ms", px.delay_ms, "Delay each way (mean for exponential)");
  proxy->add_option("--delay-dist", px.dist, "constant or exponential")
      ->check(CLI::IsMember({"constant", "exponential"}));
  proxy->add_option("--loss", px.loss, "Loss probability each way");
  proxy->add_option("--delay-up-ms", px.delay_up_ms, "Source-to-monitor delay, overrides --delay-ms");
  proxy->add_option("--delay-down-ms", px.delay_down_ms, "Monitor-to-source delay, overrides --delay-ms");
  proxy->add_option("--loss-up", px.loss_up, "Source-to-monitor loss, overrides --loss");
  proxy->add_option("--loss-down", px.loss_down, "Monitor-to-source loss, overrides --loss");
  proxy->add_flag("--reorder", px.reorder, "Release packets by their own delay even if that reorders them");
  proxy->add_option("--seed", px.seed, "RNG seed (AGECTL_SEED takes precedence)");
  proxy->add_option("--duration", px.duration, "Seconds (default: until interrupted)")
      ->check(CLI::NonNegativeNumber);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep-min-age", "Age and backlog over fixed generation rates");
  sweep->add_option("config", sw.config, "Network config (YAML)")->required()->check(CLI::ExistingFile);
  auto* rates_opt = sweep->add_option("--rates", sw.rates, "Explicit rates, updates per second")->delimiter(',');
  sweep->add_option("--lo", sw.lo, "Lowest utilisation of the slowest hop")->excludes(rates_opt);
  sweep->add_option("--hi", sw.hi, "Highest utilisation")->excludes(rates_opt);
  sweep->add_option("--points", sw.points, "Grid size")->excludes(rates_opt)->check(CLI::PositiveNumber);
  sweep->add_option("--arrivals", sw.arrivals, "periodic or poisson")
      ->check(CLI::IsMember({"periodic", "poisson"}));
  sweep->add_option("--out", sw.out, "CSV path (default: stdout)");

  CurveArgs cv;
  auto* curve = app.add_subcommand("rtt-curve", "Mean RTT against offered load for one queue");
  curve->add_option("--service", cv.service, "deterministic or exponential")
      ->check(CLI::IsMember({"deterministic", "exponential"}));
  curve->add_option("--rate-bps", cv.rate_bps, "Service rate");
  curve->add_option("--buffer", cv.buffer, "Buffer in packets including the one in service (0: unbounded)");
  curve->add_option("--prop-delay", cv.prop_delay, "Propagation delay, seconds");
  curve->add_option("--rtt-base", cv.rtt_base, "Fixed RTT component, seconds");
  curve->add_option("--packet-bits", cv.packet_bits, "Packet size in bits");
  auto* loads_opt = curve->add_option("--loads", cv.loads, "Loads, packets per second")->delimiter(',');
  curve->add_option("--lo", cv.lo, "Lowest utilisation")->excludes(loads_opt);
  curve->add_option("--hi", cv.hi, "Highest utilisation")->excludes(loads_opt);
  curve->add_option("--points", cv.points, "Grid size")->excludes(loads_opt)->check(CLI::PositiveNumber);
  curve->add_flag("--simulate", cv.simulated, "Simulate the queue instead of using closed forms");
  curve->add_option("--packets", cv.packets, "Packets per simulated point");
  curve->add_option("--seed", cv.seed, "Simulation seed");
  curve->add_option("--out", cv.out, "CSV path (default: stdout)");

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "Summarise a run directory and export scatter files");
  report->add_option("dir", rp.dir, "Run directory or experiment directory")->required();
  report->add_option("--warmup", rp.warmup, "Fraction of the session trimmed as warm-up");
  report->add_flag("--no-files", rp.no_files, "Print only; do not write report CSVs");

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) return cmd_simulate(sim);
  if (source->parsed()) return cmd_source(src);
  if (monitor->parsed()) return cmd_monitor(mon);
  if (proxy->parsed()) return cmd_proxy(px);
  if (sweep->parsed()) return cmd_sweep(sw);
  if (curve->parsed()) return cmd_rtt_curve(cv);
  if (report->parsed()) return cmd_report(rp);
  return 1;
}
