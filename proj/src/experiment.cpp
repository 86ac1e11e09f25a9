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

#include "agectl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "agectl/error.hpp"
#include "agectl/logio.hpp"

#ifndef AGECTL_VERSION_STRING
#define AGECTL_VERSION_STRING "unknown"
#endif

namespace agectl {
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::kConfig, fmt::format("{}: {}", key, what));
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) bad(key, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    bad(key, fmt::format("invalid value '{}'", node.Scalar()));
  }
}

std::optional<std::size_t> capacity(const YAML::Node& node, const std::string& key) {
  if (node.IsNull() || (node.IsScalar() && node.Scalar() == "unbounded")) return std::nullopt;
  const auto v = scalar<long long>(node, key);
  if (v < 1) bad(key, "buffer capacity must be >= 1 or 'unbounded'");
  return static_cast<std::size_t>(v);
}

Station parse_station(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap()) bad(where, "expected a mapping");
  Station st;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const std::string full = where + "." + key;
    const YAML::Node& v = kv.second;
    if (key == "service") {
      const auto s = scalar<std::string>(v, full);
      if (s == "deterministic")
        st.service = ServiceKind::kDeterministic;
      else if (s == "exponential")
        st.service = ServiceKind::kExponential;
      else
        bad(full, "expected 'deterministic' or 'exponential'");
    } else if (key == "rate_bps") {
      st.rate_bps = scalar<double>(v, full);
    } else if (key == "buffer_capacity") {
      st.buffer_capacity = capacity(v, full);
    } else if (key == "prop_delay") {
      st.prop_delay = scalar<double>(v, full);
    } else {
      bad(full, "unknown key");
    }
  }
  return st;
}

MultiaccessHop parse_multiaccess(const YAML::Node& node) {
  MultiaccessHop hop;
  if (node.IsNull() || (node.IsScalar() && node.as<std::string>() == "default")) return hop;
  if (!node.IsMap()) bad("multiaccess", "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const std::string full = "multiaccess." + key;
    const YAML::Node& v = kv.second;
    if (key == "link_rate_bps") hop.link_rate_bps = scalar<double>(v, full);
    else if (key == "slot") hop.slot = scalar<double>(v, full);
    else if (key == "persistence") hop.persistence = scalar<double>(v, full);
    else if (key == "max_backoff_exp") hop.max_backoff_exp = scalar<int>(v, full);
    else if (key == "retry_limit") hop.retry_limit = scalar<int>(v, full);
    else if (key == "per_source_loss") hop.per_source_loss = scalar<double>(v, full);
    else if (key == "frame_overhead") hop.frame_overhead = scalar<double>(v, full);
    else if (key == "prop_delay") hop.prop_delay = scalar<double>(v, full);
    else if (key == "buffer_capacity") hop.buffer_capacity = capacity(v, full);
    else bad(full, "unknown key");
  }
  return hop;
}

// Returns false when `key` is not a SimConfig key.
bool apply_sim_key(SimConfig& cfg, const std::string& key, const YAML::Node& v) {
  if (key == "sources") cfg.sources = scalar<int>(v, key);
  else if (key == "protocol") cfg.protocol = scalar<std::string>(v, key);
  else if (key == "duration") cfg.duration = scalar<double>(v, key);
  else if (key == "seed") cfg.seed = scalar<std::uint64_t>(v, key);
  else if (key == "payload_bytes") cfg.payload_bytes = scalar<std::size_t>(v, key);
  else if (key == "lower_layer_bytes") cfg.lower_layer_bytes = scalar<std::size_t>(v, key);
  else if (key == "alpha") cfg.alpha = scalar<double>(v, key);
  else if (key == "initial_rtt") cfg.initial_rtt = scalar<double>(v, key);
  else if (key == "lazy_timeout_factor") cfg.lazy_timeout_factor = scalar<double>(v, key);
  else if (key == "lazy_min_timeout") cfg.lazy_min_timeout = scalar<double>(v, key);
  else if (key == "start_spread") cfg.start_spread = scalar<double>(v, key);
  else if (key == "warmup_fraction") cfg.warmup_fraction = scalar<double>(v, key);
  else if (key == "record_trace") cfg.record_trace = scalar<bool>(v, key);
  else if (key == "reverse") {
    const auto s = scalar<std::string>(v, key);
    if (s == "symmetric") cfg.reverse = ReversePath::kSymmetric;
    else if (s == "instantaneous") cfg.reverse = ReversePath::kInstantaneous;
    else bad(key, "expected 'symmetric' or 'instantaneous'");
  } else if (key == "multiaccess") {
    cfg.multiaccess = parse_multiaccess(v);
  } else if (key == "stations") {
    if (!v.IsSequence()) bad(key, "expected a list of station blocks");
    cfg.stations.clear();
    for (std::size_t i = 0; i < v.size(); ++i)
      cfg.stations.push_back(parse_station(v[i], fmt::format("stations[{}]", i)));
  } else {
    return false;
  }
  return true;
}

YAML::Node load_yaml(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kConfig, fmt::format("YAML syntax error: {}", e.what()));
  }
}

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

YAML::Node to_node(const SimConfig& cfg) {
  YAML::Node n;
  n["sources"] = cfg.sources;
  n["protocol"] = cfg.protocol;
  n["duration"] = format_number(cfg.duration);
  n["seed"] = cfg.seed;
  n["reverse"] = cfg.reverse == ReversePath::kSymmetric ? "symmetric" : "instantaneous";
  n["payload_bytes"] = cfg.payload_bytes;
  n["lower_layer_bytes"] = cfg.lower_layer_bytes;
  n["alpha"] = format_number(cfg.alpha);
  n["initial_rtt"] = format_number(cfg.initial_rtt);
  n["lazy_timeout_factor"] = format_number(cfg.lazy_timeout_factor);
  n["lazy_min_timeout"] = format_number(cfg.lazy_min_timeout);
  n["start_spread"] = format_number(cfg.start_spread);
  n["warmup_fraction"] = format_number(cfg.warmup_fraction);
  n["record_trace"] = cfg.record_trace;
  auto cap = [](const std::optional<std::size_t>& c) {
    return c ? YAML::Node(*c) : YAML::Node("unbounded");
  };
  if (cfg.multiaccess) {
    const auto& m = *cfg.multiaccess;
    YAML::Node h;
    h["link_rate_bps"] = format_number(m.link_rate_bps);
    h["slot"] = format_number(m.slot);
    h["persistence"] = format_number(m.persistence);
    h["max_backoff_exp"] = m.max_backoff_exp;
    h["retry_limit"] = m.retry_limit;
    h["per_source_loss"] = format_number(m.per_source_loss);
    h["frame_overhead"] = format_number(m.frame_overhead);
    h["prop_delay"] = format_number(m.prop_delay);
    h["buffer_capacity"] = cap(m.buffer_capacity);
    n["multiaccess"] = h;
  }
  for (const auto& st : cfg.stations) {
    YAML::Node s;
    s["service"] = st.service == ServiceKind::kDeterministic ? "deterministic" : "exponential";
    s["rate_bps"] = format_number(st.rate_bps);
    s["buffer_capacity"] = cap(st.buffer_capacity);
    s["prop_delay"] = format_number(st.prop_delay);
    n["stations"].push_back(s);
  }
  return n;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::kNone: return "none";
    case SweepAxis::kSources: return "sources";
    case SweepAxis::kRate: return "rate";
  }
  return "?";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write {}", path.string()));
}

}  // namespace

void ExperimentSpec::validate() const {
  if (repetitions < 1) bad("repetitions", "must be at least 1");
  if (name.empty()) bad("name", "must not be empty");
  std::set<double> seen;
  for (double v : sweep_values) {
    if (!seen.insert(v).second) bad("sweep.values", fmt::format("duplicate value {}", v));
    if (axis == SweepAxis::kSources && (v < 1 || v != std::floor(v)))
      bad("sweep.values", "source counts must be positive integers");
    if (axis == SweepAxis::kRate && !(v > 0)) bad("sweep.values", "rates must be positive");
  }
  if (axis != SweepAxis::kNone && sweep_values.empty()) bad("sweep.values", "must not be empty");
  std::set<std::string> protos(protocols.begin(), protocols.end());
  if (protos.size() != protocols.size()) bad("protocols", "duplicate protocol");
  for (const auto& p : protocols) SourceConfig::parse_mode(p);
  for (const auto& run : expand_runs(*this)) run.cfg.validate();
}

SimConfig parse_sim_config(std::string_view yaml_text) {
  const YAML::Node root = load_yaml(yaml_text);
  SimConfig cfg;
  if (!root.IsMap()) bad("<root>", "expected a mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!apply_sim_key(cfg, key, kv.second)) bad(key, "unknown key");
  }
  cfg.validate();
  return cfg;
}

ExperimentSpec parse_experiment(std::string_view yaml_text) {
  const YAML::Node root = load_yaml(yaml_text);
  if (!root.IsMap()) bad("<root>", "expected a mapping");
  ExperimentSpec spec;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (apply_sim_key(spec.base, key, v)) continue;
    if (key == "name") {
      spec.name = scalar<std::string>(v, key);
    } else if (key == "repetitions") {
      spec.repetitions = scalar<int>(v, key);
    } else if (key == "output") {
      spec.output = scalar<std::string>(v, key);
    } else if (key == "protocols") {
      if (!v.IsSequence()) bad(key, "expected a list");
      for (const auto& p : v) spec.protocols.push_back(scalar<std::string>(p, key));
    } else if (key == "sweep") {
      if (!v.IsMap()) bad(key, "expected a mapping with axis and values");
      for (const auto& s : v) {
        const auto sk = s.first.as<std::string>();
        const std::string full = "sweep." + sk;
        if (sk == "axis") {
          const auto a = scalar<std::string>(s.second, full);
          if (a == "sources") spec.axis = SweepAxis::kSources;
          else if (a == "rate") spec.axis = SweepAxis::kRate;
          else if (a == "none") spec.axis = SweepAxis::kNone;
          else bad(full, "expected 'sources', 'rate' or 'none'");
        } else if (sk == "values") {
          if (!s.second.IsSequence()) bad(full, "expected a list");
          for (const auto& x : s.second) spec.sweep_values.push_back(scalar<double>(x, full));
        } else if (sk == "arrivals") {
          const auto a = scalar<std::string>(s.second, full);
          if (a == "periodic") spec.poisson_rates = false;
          else if (a == "poisson") spec.poisson_rates = true;
          else bad(full, "expected 'periodic' or 'poisson'");
        } else {
          bad(full, "unknown key");
        }
      }
    } else {
      bad(key, "unknown key");
    }
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot read {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_experiment(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string to_yaml(const SimConfig& cfg) {
  YAML::Emitter out;
  out << to_node(cfg);
  return std::string(out.c_str()) + "\n";
}

std::vector<RunSpec> expand_runs(const ExperimentSpec& spec) {
  std::vector<std::string> protocols = spec.protocols;
  if (spec.axis == SweepAxis::kRate)
    protocols = {spec.poisson_rates ? "poisson" : "constant"};
  else if (protocols.empty())
    protocols = {spec.base.protocol};
  std::vector<double> values = spec.sweep_values;
  if (spec.axis == SweepAxis::kNone) values = {0.0};

  std::vector<RunSpec> runs;
  for (const auto& proto : protocols) {
    for (double value : values) {
      for (int rep = 0; rep < spec.repetitions; ++rep) {
        RunSpec r;
        r.protocol = proto;
        r.sweep_value = value;
        r.repetition = rep;
        r.cfg = spec.base;
        r.cfg.seed = spec.base.seed + static_cast<std::uint64_t>(rep);
        switch (spec.axis) {
          case SweepAxis::kNone:
            r.cfg.protocol = proto;
            r.run_id = fmt::format("{}-r{}", proto, rep);
            break;
          case SweepAxis::kSources:
            r.cfg.protocol = proto;
            r.cfg.sources = static_cast<int>(value);
            r.run_id = fmt::format("{}-n{}-r{}", proto, r.cfg.sources, rep);
            break;
          case SweepAxis::kRate:
            r.cfg.protocol = fmt::format("{}:{}", proto, format_number(value));
            r.run_id = fmt::format("{}-{}-r{}", proto, format_number(value), rep);
            break;
        }
        std::replace(r.run_id.begin(), r.run_id.end(), ':', '-');
        runs.push_back(std::move(r));
      }
    }
  }
  return runs;
}

std::string to_csv_row(const RunSummary& s) {
  return fmt::format("{},{},{},{:.6f},{:.6f},{:.3f},{:.6f},{:.6f},{:.6f},{:.6f},{:.3f}", s.run_id, s.protocol,
                     s.sources, s.avg_age_ms, s.avg_delay_ms, s.throughput_bps, s.inter_delivery_ms,
                     s.backlog_avg, s.fairness, s.rtt_ms, s.total_throughput_bps);
}

void write_run(const fs::path& dir, const RunSpec& run, const SimResult& result,
               std::string_view experiment_name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  for (const auto& s : result.sources) {
    SessionMeta meta;
    meta.sent = s.log.sent;
    meta.session_end = run.cfg.duration;
    meta.semantics = AgeSemantics::kOneWay;
    write_source_session(dir / fmt::format("source-{}.csv", s.id), s.log, meta);
    write_monitor_log(dir / fmt::format("monitor-{}.csv", s.id), s.deliveries);
  }
  if (run.cfg.record_trace) write_trace(dir / "trace.csv", result.trace);

  YAML::Node m;
  m["experiment"] = std::string(experiment_name);
  m["run_id"] = run.run_id;
  m["protocol"] = run.protocol;
  m["sweep_value"] = format_number(run.sweep_value);
  m["repetition"] = run.repetition;
  m["seed"] = run.cfg.seed;
  m["version"] = AGECTL_VERSION_STRING;
  m["age_semantics"] = to_string(AgeSemantics::kOneWay);
  m["events"] = result.events;
  m["config"] = to_node(run.cfg);
  YAML::Emitter out;
  out << m;
  write_text(dir / "manifest.yaml", std::string(out.c_str()) + "\n");
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const fs::path& out, int jobs,
                                const ProgressFn& progress) {
  spec.validate();
  const auto runs = expand_runs(spec);
  ExperimentResult result;
  result.runs.resize(runs.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mu;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= runs.size()) return;
      RunOutcome outcome;
      outcome.spec = runs[i];
      const fs::path dir = out / runs[i].run_id;
      try {
        const SimResult sim = run_simulation(runs[i].cfg);
        write_run(dir, runs[i], sim, spec.name);
        auto report = report_run(dir, runs[i].cfg.warmup_fraction, true);
        outcome.summary = report.summary;
      } catch (const std::exception& e) {
        outcome.error = e.what();
        std::error_code ec;
        fs::create_directories(dir, ec);
        std::ofstream(dir / "error.txt") << e.what() << '\n';
      }
      std::lock_guard lock(mu);
      result.runs[i] = outcome;
      ++done;
      if (progress) progress(result.runs[i], done, runs.size());
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(runs.size())));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }

  std::error_code ec;
  fs::create_directories(out, ec);
  std::string summary = std::string(kSummaryCsvHeader) + "\n";
  std::string failures = "run_id,error\n";
  for (const auto& r : result.runs) {
    if (r.summary) {
      summary += to_csv_row(*r.summary) + "\n";
    } else {
      ++result.failures;
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      failures += fmt::format("{},{}\n", r.spec.run_id, msg);
    }
  }
  write_text(out / "summary.csv", summary);
  if (result.failures > 0) write_text(out / "failures.csv", failures);

  // Roll-up across repetitions, in expansion order.
  std::vector<std::pair<std::string, double>> keys;
  std::map<std::pair<std::string, double>, std::vector<const RunSummary*>> groups;
  for (const auto& r : result.runs) {
    const auto key = std::make_pair(r.spec.protocol, r.spec.sweep_value);
    if (!groups.count(key)) keys.push_back(key);
    auto& g = groups[key];
    if (r.summary) g.push_back(&*r.summary);
  }
  static constexpr const char* kMetrics[] = {"avg_age_ms", "avg_delay_ms", "throughput_bps",
                                             "inter_delivery_ms", "backlog_avg", "fairness",
                                             "rtt_ms", "total_throughput_bps"};
  std::string rollup = "protocol,axis,value,runs";
  for (const char* m : kMetrics) rollup += fmt::format(",{}_mean,{}_std", m, m);
  rollup += "\n";
  for (const auto& key : keys) {
    const auto& g = groups[key];
    std::vector<std::vector<double>> cols(std::size(kMetrics));
    for (const RunSummary* s : g) {
      const double vals[] = {s->avg_age_ms, s->avg_delay_ms, s->throughput_bps, s->inter_delivery_ms,
                             s->backlog_avg, s->fairness, s->rtt_ms, s->total_throughput_bps};
      for (std::size_t c = 0; c < cols.size(); ++c) cols[c].push_back(vals[c]);
    }
    rollup += fmt::format("{},{},{},{}", key.first, axis_name(spec.axis), format_number(key.second), g.size());
    for (const auto& c : cols) rollup += fmt::format(",{:.6f},{:.6f}", mean(c), sample_stddev(c));
    rollup += "\n";
  }
  write_text(out / "rollup.csv", rollup);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> session_ids(const fs::path& dir) {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    const std::string prefix = "source-", suffix = ".meta.csv";
    if (name.size() > prefix.size() + suffix.size() && name.starts_with(prefix) && name.ends_with(suffix))
      ids.push_back(name.substr(prefix.size(), name.size() - prefix.size() - suffix.size()));
  }
  auto numeric = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
    if (numeric(a) && numeric(b)) return a.size() != b.size() ? a.size() < b.size() : a < b;
    return a < b;
  });
  return ids;
}

}  // namespace

RunReport report_run(const fs::path& dir, double warmup_fraction, bool write_files) {
  const auto ids = session_ids(dir);
  if (ids.empty()) throw Error(ErrorCode::kIo, fmt::format("{}: no source-<id>.csv sessions found", dir.string()));
  RunReport report;
  report.dir = dir;
  std::string rows = std::string(kReportCsvHeader) + "\n";
  std::string delay_age = "source,avg_delay_ms,avg_age_ms\n";
  std::string thr_age = "source,throughput_bps,avg_age_ms\n";
  std::vector<double> ages;
  std::set<std::string> protocols;
  for (const auto& id : ids) {
    const LoadedSource src = read_source_session(dir / fmt::format("source-{}.csv", id));
    std::vector<Delivery> deliveries;
    const fs::path monitor_path = dir / fmt::format("monitor-{}.csv", id);
    if (src.meta.semantics == AgeSemantics::kOneWay) deliveries = read_monitor_log(monitor_path);
    if (!(src.meta.session_end > 0.0))
      throw Error(ErrorCode::kNoSamples, fmt::format("{}: session {} has zero length", dir.string(), id));
    const Horizon h = trimmed_horizon(0.0, src.meta.session_end, warmup_fraction);
    SourceReport sr;
    sr.id = id;
    sr.protocol = src.log.protocol;
    sr.stats = summarize(src.log, deliveries, h, src.meta.semantics);
    protocols.insert(sr.protocol);
    const auto& st = sr.stats;
    const double age_ms = st.avg_age ? *st.avg_age * 1e3 : std::nan("");
    if (st.avg_age) ages.push_back(*st.avg_age);
    rows += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{:.3f},{:.6f},{:.6f},{:.6f},{},{},{:.6f}\n", id, sr.protocol,
                        to_string(st.semantics), age_ms, st.avg_delay * 1e3, st.avg_rtt * 1e3, st.throughput_bps,
                        st.avg_inter_delivery * 1e3, st.avg_inter_ack * 1e3, st.backlog_avg, st.delivered_count,
                        st.sent_count, st.loss_fraction);
    delay_age += fmt::format("{},{:.6f},{:.6f}\n", id, st.avg_delay * 1e3, age_ms);
    thr_age += fmt::format("{},{:.3f},{:.6f}\n", id, st.throughput_bps, age_ms);

    if (write_files) {
      std::vector<Observation> obs;
      if (src.meta.semantics == AgeSemantics::kOneWay)
        for (const auto& d : deliveries) obs.push_back({d.receive_time, d.gen_time});
      else
        for (const auto& a : src.log.acks) obs.push_back({a.ack_time, a.gen_time});
      if (!obs.empty() && obs.front().receive_time < h.end)
        write_age_trace(dir / fmt::format("age_trace-{}.csv", id),
                        age_trace_from_observations(obs, {std::max(h.start, obs.front().receive_time), h.end}));
    }
    report.sources.push_back(std::move(sr));
  }
  if (report.sources.size() >= 2 && !ages.empty()) report.fairness = jain_fairness(ages);

  RunSummary& s = report.summary;
  s.run_id = dir.filename().string();
  if (s.run_id.empty()) s.run_id = dir.parent_path().filename().string();
  s.protocol = protocols.size() == 1 ? *protocols.begin() : "mixed";
  s.sources = static_cast<int>(report.sources.size());
  std::vector<double> delay, thr, gap, backlog, rtt;
  for (const auto& sr : report.sources) {
    delay.push_back(sr.stats.avg_delay * 1e3);
    thr.push_back(sr.stats.throughput_bps);
    gap.push_back(sr.stats.avg_inter_delivery * 1e3);
    backlog.push_back(sr.stats.backlog_avg);
    rtt.push_back(sr.stats.avg_rtt * 1e3);
  }
  s.avg_age_ms = mean(ages) * 1e3;
  s.avg_delay_ms = mean(delay);
  s.throughput_bps = mean(thr);
  s.inter_delivery_ms = mean(gap);
  s.backlog_avg = mean(backlog);
  s.fairness = report.fairness.value_or(1.0);
  s.rtt_ms = mean(rtt);
  s.total_throughput_bps = mean(thr) * static_cast<double>(thr.size());

  if (write_files) {
    write_text(dir / "report.csv", rows);
    write_text(dir / "scatter_delay_age.csv", delay_age);
    write_text(dir / "scatter_throughput_age.csv", thr_age);
  }
  return report;
}

std::vector<RunReport> report_path(const fs::path& dir, double warmup_fraction, bool write_files) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::kIo, fmt::format("{}: not a directory", dir.string()));
  if (!session_ids(dir).empty()) return {report_run(dir, warmup_fraction, write_files)};
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.is_directory() && !session_ids(entry.path()).empty()) subdirs.push_back(entry.path());
  if (subdirs.empty()) throw Error(ErrorCode::kIo, fmt::format("{}: nothing to report (no source logs)", dir.string()));
  std::sort(subdirs.begin(), subdirs.end());
  std::vector<RunReport> out;
  for (const auto& d : subdirs) out.push_back(report_run(d, warmup_fraction, write_files));
  return out;
}

std::string format_report(const RunReport& report) {
  std::string out = fmt::format("{}\n", report.dir.string());
  out += fmt::format("{:>8} {:>12} {:>10} {:>10} {:>10} {:>10} {:>12} {:>9} {:>10}\n", "source", "protocol",
                     "age_ms", "delay_ms", "rtt_ms", "ideliv_ms", "thr_bps", "backlog", "delivered");
  for (const auto& s : report.sources) {
    const auto& st = s.stats;
    out += fmt::format("{:>8} {:>12} {:>10} {:>10.3f} {:>10.3f} {:>10.3f} {:>12.0f} {:>9.3f} {:>10}\n", s.id,
                       s.protocol, st.avg_age ? fmt::format("{:.3f}", *st.avg_age * 1e3) : std::string("n/a"),
                       st.avg_delay * 1e3, st.avg_rtt * 1e3, st.avg_inter_delivery * 1e3, st.throughput_bps,
                       st.backlog_avg, st.delivered_count);
  }
  if (!report.sources.empty())
    out += fmt::format("age semantics: {}\n", to_string(report.sources.front().stats.semantics));
  if (report.fairness) out += fmt::format("Jain fairness over per-source ages: {:.4f}\n", *report.fairness);
  return out;
}

}  // namespace agectl
