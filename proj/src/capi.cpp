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

#include "agectl/agectl.h"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <new>
#include <string>

#include "agectl/controller.hpp"
#include "agectl/error.hpp"
#include "agectl/experiment.hpp"
#include "agectl/metrics.hpp"
#include "agectl/netsim.hpp"
#include "agectl/transport.hpp"
#include "agectl/wire.hpp"

#ifndef AGECTL_VERSION_STRING
#define AGECTL_VERSION_STRING "unknown"
#endif

using namespace agectl;

struct agectl_controller {
  ControllerState state;
};

struct agectl_sim_config {
  SimConfig cfg;
};

struct agectl_sim_result {
  SimConfig cfg;
  SimResult result;
};

namespace {

static_assert(static_cast<int>(ErrorCode::kInvalidArgument) == AGECTL_E_INVALID_ARGUMENT);
static_assert(static_cast<int>(ErrorCode::kRuntime) == AGECTL_E_RUNTIME);

thread_local std::string g_last_error;
std::atomic<bool> g_stop{false};

agectl_status fail(agectl_status status, const std::string& what) {
  g_last_error = what;
  return status;
}

template <typename F>
agectl_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const Error& e) {
    return fail(static_cast<agectl_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(AGECTL_E_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(AGECTL_E_RUNTIME, e.what());
  }
}

agectl_status from_wire(WireError e) {
  switch (e) {
    case WireError::kNone: return AGECTL_OK;
    case WireError::kTruncated: return AGECTL_E_TRUNCATED;
    case WireError::kBadMagic: return AGECTL_E_BAD_MAGIC;
    case WireError::kUnsupportedVersion: return AGECTL_E_UNSUPPORTED_VERSION;
    case WireError::kLengthMismatch: return AGECTL_E_LENGTH_MISMATCH;
  }
  return AGECTL_E_RUNTIME;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

agectl_status copy_bytes(const std::vector<std::uint8_t>& bytes, uint8_t* out, size_t capacity, size_t* written) {
  if (written) *written = bytes.size();
  if (bytes.size() > capacity)
    return fail(AGECTL_E_BUFFER_TOO_SMALL, "output buffer needs " + std::to_string(bytes.size()) + " bytes");
  std::memcpy(out, bytes.data(), bytes.size());
  return AGECTL_OK;
}

void fill(agectl_summary* out, const SummaryStats& s) {
  out->one_way = s.semantics == AgeSemantics::kOneWay ? 1 : 0;
  out->has_age = s.avg_age ? 1 : 0;
  out->avg_age = s.avg_age.value_or(std::numeric_limits<double>::quiet_NaN());
  out->avg_delay = s.avg_delay;
  out->avg_rtt = s.avg_rtt;
  out->throughput_bps = s.throughput_bps;
  out->avg_inter_delivery = s.avg_inter_delivery;
  out->avg_inter_ack = s.avg_inter_ack;
  out->backlog_avg = s.backlog_avg;
  out->delivered = s.delivered_count;
  out->sent = s.sent_count;
  out->loss_fraction = s.loss_fraction;
}

#define AGECTL_REQUIRE(cond)                                                   \
  do {                                                                         \
    if (!(cond)) return fail(AGECTL_E_INVALID_ARGUMENT, "null or invalid argument: " #cond); \
  } while (0)

ReadyFn ready_adapter(agectl_ready_fn ready, void* user) {
  if (ready == nullptr) return {};
  return [ready, user](const std::string& addr) { ready(addr.c_str(), user); };
}

}  // namespace

extern "C" {

const char* agectl_version(void) { return AGECTL_VERSION_STRING; }

const char* agectl_status_string(agectl_status status) {
  switch (status) {
    case AGECTL_OK: return "ok";
    case AGECTL_E_BUFFER_TOO_SMALL: return "buffer too small";
    case AGECTL_E_RUN_FAILED: return "run failed";
    default:
      if (status >= AGECTL_E_INVALID_ARGUMENT && status <= AGECTL_E_RUNTIME)
        return to_string(static_cast<ErrorCode>(status));
      return "unknown status";
  }
}

const char* agectl_last_error(void) { return g_last_error.c_str(); }

void agectl_free_string(char* s) { std::free(s); }

void agectl_request_stop(void) { g_stop.store(true); }

void agectl_clear_stop(void) { g_stop.store(false); }

agectl_status agectl_encode_update(uint32_t seq, uint64_t gen_ts_ns, const uint8_t* payload, size_t payload_len,
                                   uint8_t* out, size_t capacity, size_t* written) {
  AGECTL_REQUIRE(payload != nullptr || payload_len == 0);
  AGECTL_REQUIRE(out != nullptr || capacity == 0);
  return guarded([&] {
    UpdatePacket p;
    p.seq = seq;
    p.gen_ts_ns = gen_ts_ns;
    if (payload_len > 0) p.payload.assign(payload, payload + payload_len);
    return copy_bytes(encode_update(p), out, capacity, written);
  });
}

agectl_status agectl_decode_update(const uint8_t* buf, size_t len, agectl_update_view* out) {
  AGECTL_REQUIRE(buf != nullptr || len == 0);
  AGECTL_REQUIRE(out != nullptr);
  return guarded([&] {
    const auto d = decode_update({buf, len});
    if (!d) return fail(from_wire(d.error), std::string("decode update: ") + to_string(d.error));
    out->version = d.packet->version;
    out->seq = d.packet->seq;
    out->gen_ts_ns = d.packet->gen_ts_ns;
    out->payload_len = d.packet->payload.size();
    out->payload = out->payload_len ? buf + kUpdateHeaderSize : nullptr;
    return AGECTL_OK;
  });
}

agectl_status agectl_encode_ack(uint32_t seq, uint64_t gen_ts_ns, uint8_t* out, size_t capacity, size_t* written) {
  AGECTL_REQUIRE(out != nullptr || capacity == 0);
  return guarded([&] {
    AckPacket a;
    a.seq = seq;
    a.gen_ts_ns = gen_ts_ns;
    return copy_bytes(encode_ack(a), out, capacity, written);
  });
}

agectl_status agectl_decode_ack(const uint8_t* buf, size_t len, uint32_t* seq, uint64_t* gen_ts_ns) {
  AGECTL_REQUIRE(buf != nullptr || len == 0);
  AGECTL_REQUIRE(seq != nullptr && gen_ts_ns != nullptr);
  return guarded([&] {
    const auto d = decode_ack({buf, len});
    if (!d) return fail(from_wire(d.error), std::string("decode ack: ") + to_string(d.error));
    *seq = d.packet->seq;
    *gen_ts_ns = d.packet->gen_ts_ns;
    return AGECTL_OK;
  });
}

agectl_status agectl_controller_create(double initial_lambda, agectl_controller** out) {
  AGECTL_REQUIRE(out != nullptr);
  if (!(initial_lambda > 0.0)) return fail(AGECTL_E_INVALID_ARGUMENT, "initial lambda must be positive");
  return guarded([&] {
    auto* c = new agectl_controller;
    c->state.lambda = initial_lambda;
    c->state.epoch_length = epoch_length(initial_lambda);
    *out = c;
    return AGECTL_OK;
  });
}

void agectl_controller_destroy(agectl_controller* c) { delete c; }

agectl_status agectl_controller_step(agectl_controller* c, double backlog_change, double age_change,
                                     double backlog_avg, double z_bar, double rtt_bar, agectl_control_result* out) {
  AGECTL_REQUIRE(c != nullptr && out != nullptr);
  return guarded([&] {
    const auto step = control_step(c->state, {backlog_change, age_change, backlog_avg});
    const double lambda = update_lambda(c->state.lambda, z_bar, rtt_bar, step.action.target_backlog_change);
    c->state = step.state;
    c->state.lambda = lambda;
    c->state.epoch_length = epoch_length(lambda);
    switch (step.action.kind) {
      case ActionKind::kInc: out->action = AGECTL_ACTION_INC; break;
      case ActionKind::kDec: out->action = AGECTL_ACTION_DEC; break;
      case ActionKind::kMdec: out->action = AGECTL_ACTION_MDEC; break;
    }
    out->gamma = step.action.gamma;
    out->target = step.action.target_backlog_change;
    out->lambda = lambda;
    out->flag = c->state.flag ? 1 : 0;
    return AGECTL_OK;
  });
}

agectl_status agectl_update_lambda(double z_bar, double target, double rtt_bar, double lambda_prev, double* out) {
  AGECTL_REQUIRE(out != nullptr);
  return guarded([&] {
    *out = update_lambda(lambda_prev, z_bar, rtt_bar, target);
    return AGECTL_OK;
  });
}

agectl_status agectl_time_average_age(const double* receive_times, const double* gen_times, size_t n, double start,
                                      double end, double* out) {
  AGECTL_REQUIRE((receive_times != nullptr && gen_times != nullptr) || n == 0);
  AGECTL_REQUIRE(out != nullptr);
  return guarded([&] {
    std::vector<Observation> obs(n);
    for (size_t i = 0; i < n; ++i) obs[i] = {receive_times[i], gen_times[i]};
    const Horizon h{start, end};
    *out = time_average_age(age_trace_from_observations(obs, h), h);
    return AGECTL_OK;
  });
}

agectl_status agectl_jain_fairness(const double* values, size_t n, double* out) {
  AGECTL_REQUIRE(values != nullptr || n == 0);
  AGECTL_REQUIRE(out != nullptr);
  return guarded([&] {
    *out = jain_fairness({values, n});
    return AGECTL_OK;
  });
}

agectl_status agectl_sim_config_parse(const char* yaml_text, agectl_sim_config** out) {
  AGECTL_REQUIRE(yaml_text != nullptr && out != nullptr);
  return guarded([&] {
    auto cfg = parse_sim_config(yaml_text);
    *out = new agectl_sim_config{std::move(cfg)};
    return AGECTL_OK;
  });
}

agectl_status agectl_sim_config_load(const char* path, agectl_sim_config** out) {
  AGECTL_REQUIRE(path != nullptr && out != nullptr);
  return guarded([&] {
    // An experiment spec is a superset of a sim config; take its base.
    auto spec = load_experiment(path);
    *out = new agectl_sim_config{std::move(spec.base)};
    return AGECTL_OK;
  });
}

void agectl_sim_config_destroy(agectl_sim_config* cfg) { delete cfg; }

agectl_status agectl_sim_config_to_yaml(const agectl_sim_config* cfg, char** yaml_out) {
  AGECTL_REQUIRE(cfg != nullptr && yaml_out != nullptr);
  return guarded([&] {
    *yaml_out = dup_string(to_yaml(cfg->cfg));
    return AGECTL_OK;
  });
}

agectl_status agectl_simulate(const agectl_sim_config* cfg, agectl_sim_result** out) {
  AGECTL_REQUIRE(cfg != nullptr && out != nullptr);
  return guarded([&] {
    auto* r = new agectl_sim_result{cfg->cfg, {}};
    try {
      r->result = run_simulation(cfg->cfg);
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
    return AGECTL_OK;
  });
}

void agectl_sim_result_destroy(agectl_sim_result* r) { delete r; }

size_t agectl_sim_result_sources(const agectl_sim_result* r) { return r ? r->result.sources.size() : 0; }

agectl_status agectl_sim_result_summary(const agectl_sim_result* r, size_t source, agectl_summary* out) {
  AGECTL_REQUIRE(r != nullptr && out != nullptr);
  if (source >= r->result.sources.size()) return fail(AGECTL_E_INVALID_ARGUMENT, "source index out of range");
  return guarded([&] {
    const auto& s = r->result.sources[source];
    fill(out, summarize(s.log, s.deliveries, r->result.horizon, AgeSemantics::kOneWay));
    return AGECTL_OK;
  });
}

agectl_status agectl_sim_result_write(const agectl_sim_result* r, const char* dir) {
  AGECTL_REQUIRE(r != nullptr && dir != nullptr);
  return guarded([&] {
    RunSpec run;
    run.run_id = std::filesystem::path(dir).filename().string();
    run.protocol = r->cfg.protocol;
    run.cfg = r->cfg;
    write_run(dir, run, r->result, "simulate");
    return AGECTL_OK;
  });
}

agectl_status agectl_experiment_run(const char* spec_path, const char* out_dir, int jobs, agectl_progress_fn progress,
                                    void* user, size_t* runs, size_t* failures) {
  AGECTL_REQUIRE(spec_path != nullptr);
  return guarded([&] {
    const auto spec = load_experiment(spec_path);
    std::string out = out_dir != nullptr ? out_dir : spec.output;
    if (out.empty()) out = spec.name;
    ProgressFn fn;
    if (progress != nullptr)
      fn = [progress, user](const RunOutcome& o, std::size_t done, std::size_t total) {
        progress(o.spec.run_id.c_str(), o.summary ? nullptr : o.error.c_str(), done, total, user);
      };
    const auto res = run_experiment(spec, out, jobs, fn);
    if (runs) *runs = res.runs.size();
    if (failures) *failures = res.failures;
    if (res.failures > 0)
      return fail(AGECTL_E_RUN_FAILED, std::to_string(res.failures) + " run(s) failed; see failures.csv in " + out);
    return AGECTL_OK;
  });
}

agectl_status agectl_report(const char* dir, double warmup_fraction, int write_files, char** text, size_t* runs) {
  AGECTL_REQUIRE(dir != nullptr);
  return guarded([&] {
    const auto reports = report_path(dir, warmup_fraction, write_files != 0);
    std::string all;
    for (const auto& r : reports) all += format_report(r) + "\n";
    if (runs) *runs = reports.size();
    if (text) *text = dup_string(all);
    return AGECTL_OK;
  });
}

agectl_status agectl_sweep_min_age(const agectl_sim_config* base, const double* rates, size_t n, double lo, double hi,
                                   int poisson, agectl_sweep_point* points, size_t* best_index) {
  AGECTL_REQUIRE(base != nullptr && points != nullptr && n > 0);
  return guarded([&] {
    const std::vector<double> grid = rates != nullptr ? std::vector<double>(rates, rates + n)
                                                      : utilization_grid(base->cfg, lo, hi, static_cast<int>(n));
    const auto res = sweep_min_age(base->cfg, grid, poisson != 0);
    for (size_t i = 0; i < res.points.size(); ++i) {
      points[i] = {res.points[i].rate, res.points[i].age, res.points[i].backlog};
      if (best_index && res.points[i].rate == res.best_rate) *best_index = i;
    }
    return AGECTL_OK;
  });
}

agectl_status agectl_rtt_curve(const agectl_station* station, double rtt_base, const double* loads, size_t n,
                               size_t packet_bits, int simulated, uint64_t packets, uint64_t seed,
                               agectl_load_point* out) {
  AGECTL_REQUIRE(station != nullptr && loads != nullptr && out != nullptr);
  return guarded([&] {
    Station st;
    st.service = station->exponential ? ServiceKind::kExponential : ServiceKind::kDeterministic;
    st.rate_bps = station->rate_bps;
    if (station->buffer_capacity > 0) st.buffer_capacity = station->buffer_capacity;
    st.prop_delay = station->prop_delay;
    if (!(st.rate_bps > 0.0)) return fail(AGECTL_E_INVALID_ARGUMENT, "station rate must be positive");
    const auto pts = rtt_vs_load_curve(st, rtt_base, {loads, loads + n}, packet_bits,
                                       simulated ? CurveMethod::kSimulated : CurveMethod::kAnalytic, packets, seed);
    for (size_t i = 0; i < pts.size(); ++i) out[i] = {pts[i].load, pts[i].mean_rtt, pts[i].unstable ? 1 : 0};
    return AGECTL_OK;
  });
}

agectl_status agectl_run_source(const agectl_source_options* opts, agectl_ready_fn ready, void* user,
                                agectl_source_report* out) {
  AGECTL_REQUIRE(opts != nullptr && opts->peer != nullptr);
  return guarded([&] {
    SourceRunOptions o;
    o.peer = opts->peer;
    o.bind = opts->bind ? opts->bind : "";
    o.mode = opts->mode ? opts->mode : "acp+";
    o.duration = opts->duration;
    o.payload_bytes = opts->payload_bytes;
    o.initial_rtt = opts->initial_rtt > 0.0 ? opts->initial_rtt : 1.0;
    o.seed = opts->seed;
    o.out = opts->out ? opts->out : "";
    o.stop = &g_stop;
    o.on_ready = ready_adapter(ready, user);
    const auto res = run_source(o);
    if (out != nullptr) {
      *out = {};
      out->sent = res.counters.sent;
      out->acked = res.counters.acked;
      out->superseded = res.counters.superseded;
      out->out_of_sequence = res.counters.out_of_sequence;
      out->epochs = res.log.epochs.size();
      out->elapsed = res.elapsed;
      out->final_lambda = res.log.epochs.empty() ? 0.0 : res.log.epochs.back().lambda;
      if (res.elapsed > 0.0)
        fill(&out->summary, summarize(res.log, {}, trimmed_horizon(0.0, res.elapsed), AgeSemantics::kRoundTrip));
    }
    return AGECTL_OK;
  });
}

agectl_status agectl_run_monitor(const agectl_monitor_options* opts, agectl_ready_fn ready, void* user,
                                 agectl_monitor_report* out) {
  AGECTL_REQUIRE(opts != nullptr && opts->listen != nullptr);
  return guarded([&] {
    MonitorRunOptions o;
    o.listen = opts->listen;
    o.duration = opts->duration;
    o.out = opts->out ? opts->out : "";
    o.stop = &g_stop;
    o.on_ready = ready_adapter(ready, user);
    const auto res = run_monitor(o);
    if (out != nullptr) *out = {res.datagrams, res.deliveries.size(), res.discards.size() - res.malformed, res.malformed, res.acks_sent};
    return AGECTL_OK;
  });
}

agectl_status agectl_run_proxy(const agectl_proxy_options* opts, agectl_ready_fn ready, void* user,
                               agectl_proxy_report* out) {
  AGECTL_REQUIRE(opts != nullptr && opts->listen != nullptr && opts->forward != nullptr);
  return guarded([&] {
    ProxyConfig c;
    c.listen = opts->listen;
    c.forward = opts->forward;
    const DelayDist dist = opts->exponential_delay ? DelayDist::kExponential : DelayDist::kConstant;
    c.upstream = {dist, opts->delay_up, opts->loss_up};
    c.downstream = {dist, opts->delay_down, opts->loss_down};
    c.reorder = opts->reorder != 0;
    c.seed = seed_from_env(opts->seed);
    c.duration = opts->duration;
    c.stop = &g_stop;
    c.on_ready = ready_adapter(ready, user);
    const auto s = run_proxy(c);
    if (out != nullptr) {
      const ProxyDirectionStats* d[2] = {&s.upstream, &s.downstream};
      for (int i = 0; i < 2; ++i) {
        out->received[i] = d[i]->received;
        out->forwarded[i] = d[i]->forwarded;
        out->dropped[i] = d[i]->dropped;
        out->pending[i] = d[i]->pending_at_exit;
      }
    }
    return AGECTL_OK;
  });
}

}  // extern "C"
