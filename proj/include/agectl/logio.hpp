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

// CSV files written by endpoints and the simulator and read back by reports.
// A source session is four files sharing a stem: <stem>.csv holds the epoch
// rows, <stem>.acks.csv, <stem>.backlog.csv and <stem>.meta.csv the rest.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agectl/endpoints.hpp"
#include "agectl/metrics.hpp"
#include "agectl/netsim.hpp"

namespace agectl {

inline constexpr std::string_view kAckCsvHeader = "ack_time,seq,gen_time,rtt";
inline constexpr std::string_view kBacklogCsvHeader = "time,backlog";
inline constexpr std::string_view kMetaCsvHeader = "key,value";
inline constexpr std::string_view kMonitorCsvHeader = "receive_time,seq,gen_ts";
inline constexpr std::string_view kDiscardCsvHeader = "receive_time,seq,reason";
inline constexpr std::string_view kAgeTraceCsvHeader = "time,age";

struct SessionMeta {
  std::uint64_t sent = 0;
  double session_end = 0;  // seconds on the session clock
  AgeSemantics semantics = AgeSemantics::kOneWay;
};

struct SourceFiles {
  std::filesystem::path epochs, acks, backlog, meta;

  // Accepts the epoch CSV path ("run/source-0.csv") or the bare stem.
  static SourceFiles for_log(const std::filesystem::path& path);
};

struct LoadedSource {
  SourceSessionLog log;
  SessionMeta meta;
};

// All writers create missing parent directories and throw Error(kIo) on failure.
void write_source_session(const std::filesystem::path& path, const SourceSessionLog& log,
                          const SessionMeta& meta);
LoadedSource read_source_session(const std::filesystem::path& path);

void write_monitor_log(const std::filesystem::path& path, std::span<const Delivery> deliveries);
std::vector<Delivery> read_monitor_log(const std::filesystem::path& path);

void write_discard_log(const std::filesystem::path& path, std::span<const DiscardRecord> discards);
void write_trace(const std::filesystem::path& path, std::span<const TraceRecord> trace);
void write_age_trace(const std::filesystem::path& path, const AgeTrace& trace);

// Minimal reader for the files above: no quoting, comma separated, header
// checked verbatim. Throws Error(kIo) naming the file and line.
class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, std::string_view expected_header);

  // False at end of file. Blank lines are skipped.
  bool next();
  std::size_t line() const { return line_no_; }
  const std::string& field(std::size_t i) const;
  double number(std::size_t i) const;
  std::uint64_t integer(std::size_t i) const;

 private:
  [[noreturn]] void fail(const std::string& what) const;

  std::filesystem::path path_;
  std::vector<std::string> lines_;
  std::size_t line_no_ = 1;
  std::size_t columns_ = 0;
  std::vector<std::string> fields_;
};

}  // namespace agectl
