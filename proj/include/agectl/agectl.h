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

/* C interface to agectl. Every call returns an agectl_status; on failure
 * agectl_last_error() describes it (thread-local, valid until the next call
 * on the same thread). Handles are opaque and owned by the caller.
 * Strings returned through char** are heap allocated: release them with
 * agectl_free_string(). */

#ifndef AGECTL_AGECTL_H
#define AGECTL_AGECTL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AGECTL_API __declspec(dllexport)
#else
#define AGECTL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum agectl_status {
  AGECTL_OK = 0,
  AGECTL_E_INVALID_ARGUMENT = 1,
  AGECTL_E_TRUNCATED = 2,
  AGECTL_E_BAD_MAGIC = 3,
  AGECTL_E_UNSUPPORTED_VERSION = 4,
  AGECTL_E_LENGTH_MISMATCH = 5,
  AGECTL_E_OVERSIZE = 6,
  AGECTL_E_NO_SAMPLES = 7,
  AGECTL_E_CLOCK_ANOMALY = 8,
  AGECTL_E_CONFIG = 9,
  AGECTL_E_IO = 10,
  AGECTL_E_PROTOCOL_VIOLATION = 11,
  AGECTL_E_RUNTIME = 12,
  AGECTL_E_BUFFER_TOO_SMALL = 13,
  AGECTL_E_RUN_FAILED = 14 /* batch finished but at least one run failed */
} agectl_status;

AGECTL_API const char* agectl_version(void);
AGECTL_API const char* agectl_status_string(agectl_status status);
AGECTL_API const char* agectl_last_error(void);
AGECTL_API void agectl_free_string(char* s);

/* Live loops poll a process-wide stop flag; safe to call from a signal handler. */
AGECTL_API void agectl_request_stop(void);
AGECTL_API void agectl_clear_stop(void);

/* ---- wire format ------------------------------------------------------ */

#define AGECTL_UPDATE_HEADER_SIZE 19
#define AGECTL_ACK_SIZE 17

typedef struct agectl_update_view {
  uint8_t version;
  uint32_t seq;
  uint64_t gen_ts_ns;
  const uint8_t* payload; /* points into the decoded buffer */
  size_t payload_len;
} agectl_update_view;

AGECTL_API agectl_status agectl_encode_update(uint32_t seq, uint64_t gen_ts_ns, const uint8_t* payload,
                                              size_t payload_len, uint8_t* out, size_t capacity,
                                              size_t* written);
AGECTL_API agectl_status agectl_decode_update(const uint8_t* buf, size_t len, agectl_update_view* out);
AGECTL_API agectl_status agectl_encode_ack(uint32_t seq, uint64_t gen_ts_ns, uint8_t* out, size_t capacity,
                                           size_t* written);
AGECTL_API agectl_status agectl_decode_ack(const uint8_t* buf, size_t len, uint32_t* seq, uint64_t* gen_ts_ns);

/* ---- controller ------------------------------------------------------- */

typedef enum agectl_action { AGECTL_ACTION_INC = 0, AGECTL_ACTION_DEC = 1, AGECTL_ACTION_MDEC = 2 } agectl_action;

typedef struct agectl_control_result {
  agectl_action action;
  int gamma;     /* MDEC exponent used for this action */
  double target; /* desired backlog change b* */
  double lambda; /* clamped new rate */
  int flag;      /* controller flag after the step */
} agectl_control_result;

typedef struct agectl_controller agectl_controller;

AGECTL_API agectl_status agectl_controller_create(double initial_lambda, agectl_controller** out);
AGECTL_API void agectl_controller_destroy(agectl_controller* c);
/* One epoch: action from (b_k, delta_k), then the rate update from z_bar and rtt_bar. */
AGECTL_API agectl_status agectl_controller_step(agectl_controller* c, double backlog_change, double age_change,
                                                double backlog_avg, double z_bar, double rtt_bar,
                                                agectl_control_result* out);
AGECTL_API agectl_status agectl_update_lambda(double z_bar, double target, double rtt_bar, double lambda_prev,
                                              double* out);

/* ---- metrics ---------------------------------------------------------- */

/* Exact sawtooth average over [start, end] from deliveries sorted by receive time. */
AGECTL_API agectl_status agectl_time_average_age(const double* receive_times, const double* gen_times, size_t n,
                                                 double start, double end, double* out);
AGECTL_API agectl_status agectl_jain_fairness(const double* values, size_t n, double* out);

/* ---- simulation ------------------------------------------------------- */

typedef struct agectl_sim_config agectl_sim_config;
typedef struct agectl_sim_result agectl_sim_result;

typedef struct agectl_summary {
  int one_way;        /* 1: one-way age semantics, 0: round trip */
  int has_age;
  double avg_age;     /* seconds */
  double avg_delay;
  double avg_rtt;
  double throughput_bps;
  double avg_inter_delivery;
  double avg_inter_ack;
  double backlog_avg;
  uint64_t delivered;
  uint64_t sent;
  double loss_fraction;
} agectl_summary;

/* Parse a flat YAML config (see docs/config.md) from text or a file. */
AGECTL_API agectl_status agectl_sim_config_parse(const char* yaml_text, agectl_sim_config** out);
AGECTL_API agectl_status agectl_sim_config_load(const char* path, agectl_sim_config** out);
AGECTL_API void agectl_sim_config_destroy(agectl_sim_config* cfg);
AGECTL_API agectl_status agectl_sim_config_to_yaml(const agectl_sim_config* cfg, char** yaml_out);

AGECTL_API agectl_status agectl_simulate(const agectl_sim_config* cfg, agectl_sim_result** out);
AGECTL_API void agectl_sim_result_destroy(agectl_sim_result* r);
AGECTL_API size_t agectl_sim_result_sources(const agectl_sim_result* r);
AGECTL_API agectl_status agectl_sim_result_summary(const agectl_sim_result* r, size_t source, agectl_summary* out);
/* Session CSVs, monitor logs and manifest for this run. */
AGECTL_API agectl_status agectl_sim_result_write(const agectl_sim_result* r, const char* dir);

/* ---- experiments and reports ----------------------------------------- */

typedef void (*agectl_progress_fn)(const char* run_id, const char* error, size_t done, size_t total, void* user);

/* Runs every (protocol, sweep value, repetition) of a spec file into out_dir
 * (NULL: the spec's own output directory). Returns AGECTL_E_RUN_FAILED when
 * some runs failed; *failures counts them. */
AGECTL_API agectl_status agectl_experiment_run(const char* spec_path, const char* out_dir, int jobs,
                                               agectl_progress_fn progress, void* user, size_t* runs,
                                               size_t* failures);

/* Reports a run directory or a directory of runs; *text receives the table. */
AGECTL_API agectl_status agectl_report(const char* dir, double warmup_fraction, int write_files, char** text,
                                       size_t* runs);

/* ---- sweeps and load curves ------------------------------------------ */

typedef struct agectl_sweep_point {
  double rate;
  double age;
  double backlog;
} agectl_sweep_point;

/* rates == NULL sweeps n points between lo and hi times the slowest station's capacity. */
AGECTL_API agectl_status agectl_sweep_min_age(const agectl_sim_config* base, const double* rates, size_t n,
                                              double lo, double hi, int poisson, agectl_sweep_point* points,
                                              size_t* best_index);

typedef struct agectl_station {
  int exponential; /* 0: deterministic service */
  double rate_bps;
  size_t buffer_capacity; /* 0: unbounded */
  double prop_delay;
} agectl_station;

typedef struct agectl_load_point {
  double load;
  double mean_rtt; /* seconds; infinity when unstable */
  int unstable;
} agectl_load_point;

AGECTL_API agectl_status agectl_rtt_curve(const agectl_station* station, double rtt_base, const double* loads,
                                          size_t n, size_t packet_bits, int simulated, uint64_t packets,
                                          uint64_t seed, agectl_load_point* out);

/* ---- live sockets ----------------------------------------------------- */

typedef struct agectl_source_options {
  const char* peer;
  const char* bind; /* NULL or "" for any */
  const char* mode; /* "acp+", "lazy", "constant:<rate>", "poisson:<rate>" */
  double duration;
  size_t payload_bytes;
  double initial_rtt;
  uint64_t seed;
  const char* out; /* source CSV path or NULL */
} agectl_source_options;

typedef struct agectl_source_report {
  uint64_t sent;
  uint64_t acked;
  uint64_t superseded;
  uint64_t out_of_sequence;
  uint64_t epochs;
  double elapsed;
  double final_lambda;
  agectl_summary summary; /* round-trip semantics, default warm-up trim */
} agectl_source_report;

typedef struct agectl_monitor_options {
  const char* listen;
  double duration;
  const char* out; /* monitor CSV path or NULL */
} agectl_monitor_options;

typedef struct agectl_monitor_report {
  uint64_t datagrams;
  uint64_t delivered;
  uint64_t discarded;
  uint64_t malformed;
  uint64_t acks_sent;
} agectl_monitor_report;

typedef struct agectl_proxy_options {
  const char* listen;
  const char* forward;
  int exponential_delay; /* 0: constant delay */
  double delay_up;       /* seconds */
  double delay_down;
  double loss_up;
  double loss_down;
  int reorder;
  uint64_t seed; /* AGECTL_SEED in the environment takes precedence */
  double duration;
} agectl_proxy_options;

typedef struct agectl_proxy_report {
  uint64_t received[2]; /* [0] source->monitor, [1] monitor->source */
  uint64_t forwarded[2];
  uint64_t dropped[2];
  uint64_t pending[2];
} agectl_proxy_report;

typedef void (*agectl_ready_fn)(const char* local_address, void* user);

AGECTL_API agectl_status agectl_run_source(const agectl_source_options* opts, agectl_ready_fn ready, void* user,
                                           agectl_source_report* out);
AGECTL_API agectl_status agectl_run_monitor(const agectl_monitor_options* opts, agectl_ready_fn ready, void* user,
                                            agectl_monitor_report* out);
AGECTL_API agectl_status agectl_run_proxy(const agectl_proxy_options* opts, agectl_ready_fn ready, void* user,
                                          agectl_proxy_report* out);

#ifdef __cplusplus
}
#endif

#endif /* AGECTL_AGECTL_H */
