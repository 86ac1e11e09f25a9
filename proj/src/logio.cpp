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

#include "agectl/logio.hpp"

#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "agectl/error.hpp"

namespace agectl {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, std::string_view header) : path_(path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    out_.open(path, std::ios::out | std::ios::trunc);
    if (!out_) throw Error(ErrorCode::kIo, fmt::format("cannot write {}", path.string()));
    out_ << header << '\n';
  }

  void row(const std::string& text) { out_ << text << '\n'; }

  void close() {
    out_.close();
    if (!out_) throw Error(ErrorCode::kIo, fmt::format("write to {} failed", path_.string()));
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

}  // namespace

SourceFiles SourceFiles::for_log(const fs::path& path) {
  fs::path stem = path;
  if (stem.extension() == ".csv") stem.replace_extension();
  const std::string base = stem.string();
  return {base + ".csv", base + ".acks.csv", base + ".backlog.csv", base + ".meta.csv"};
}

CsvReader::CsvReader(const fs::path& path, std::string_view expected_header) : path_(path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot read {}", path.string()));
  std::string line;
  if (!std::getline(in, line)) fail("empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) fail(fmt::format("unexpected header '{}'", line));
  columns_ = split(line).size();
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines_.push_back(std::move(line));
  }
  line_no_ = 1;
}

bool CsvReader::next() {
  while (line_no_ - 1 < lines_.size()) {
    const std::string& line = lines_[line_no_ - 1];
    ++line_no_;
    if (line.empty()) continue;
    fields_ = split(line);
    if (fields_.size() != columns_)
      fail(fmt::format("expected {} columns, found {}", columns_, fields_.size()));
    return true;
  }
  return false;
}

const std::string& CsvReader::field(std::size_t i) const { return fields_.at(i); }

double CsvReader::number(std::size_t i) const {
  const std::string& f = field(i);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) fail(fmt::format("bad number '{}'", f));
  return v;
}

std::uint64_t CsvReader::integer(std::size_t i) const {
  const std::string& f = field(i);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) fail(fmt::format("bad integer '{}'", f));
  return v;
}

void CsvReader::fail(const std::string& what) const {
  throw Error(ErrorCode::kIo, fmt::format("{}:{}: {}", path_.string(), line_no_, what));
}

void write_source_session(const fs::path& path, const SourceSessionLog& log, const SessionMeta& meta) {
  const auto files = SourceFiles::for_log(path);
  {
    CsvWriter w(files.epochs, kEpochCsvHeader);
    for (const auto& e : log.epochs) w.row(to_csv_row(e));
    w.close();
  }
  {
    CsvWriter w(files.acks, kAckCsvHeader);
    for (const auto& a : log.acks)
      w.row(fmt::format("{:.9f},{},{:.9f},{:.9f}", a.ack_time, a.seq, a.gen_time, a.rtt));
    w.close();
  }
  {
    CsvWriter w(files.backlog, kBacklogCsvHeader);
    for (const auto& b : log.backlog) w.row(fmt::format("{:.9f},{}", b.time, b.backlog));
    w.close();
  }
  CsvWriter w(files.meta, kMetaCsvHeader);
  w.row(fmt::format("protocol,{}", log.protocol));
  w.row(fmt::format("sent,{}", meta.sent));
  w.row(fmt::format("payload_bytes,{}", log.payload_bytes));
  w.row(fmt::format("session_end,{:.9f}", meta.session_end));
  w.row(fmt::format("age_semantics,{}", to_string(meta.semantics)));
  w.close();
}

LoadedSource read_source_session(const fs::path& path) {
  const auto files = SourceFiles::for_log(path);
  LoadedSource out;
  {
    CsvReader r(files.meta, kMetaCsvHeader);
    bool have_end = false;
    while (r.next()) {
      const auto& key = r.field(0);
      if (key == "protocol") {
        out.log.protocol = r.field(1);
      } else if (key == "sent") {
        out.meta.sent = r.integer(1);
        out.log.sent = out.meta.sent;
      } else if (key == "payload_bytes") {
        out.log.payload_bytes = r.integer(1);
      } else if (key == "session_end") {
        out.meta.session_end = r.number(1);
        have_end = true;
      } else if (key == "age_semantics") {
        if (r.field(1) == to_string(AgeSemantics::kOneWay))
          out.meta.semantics = AgeSemantics::kOneWay;
        else if (r.field(1) == to_string(AgeSemantics::kRoundTrip))
          out.meta.semantics = AgeSemantics::kRoundTrip;
        else
          throw Error(ErrorCode::kIo, fmt::format("{}: unknown age_semantics '{}'", files.meta.string(), r.field(1)));
      }
    }
    if (!have_end) throw Error(ErrorCode::kIo, fmt::format("{}: missing session_end", files.meta.string()));
  }
  {
    CsvReader r(files.epochs, kEpochCsvHeader);
    while (r.next()) {
      EpochRecord e;
      e.k = static_cast<std::int64_t>(r.integer(0));
      e.t_k = r.number(1);
      e.lambda = r.number(2);
      e.action = r.field(3);
      e.target = r.number(4);
      e.backlog_change = r.number(5);
      e.age_change = r.number(6);
      e.flag = r.integer(7) != 0;
      e.gamma = static_cast<int>(r.integer(8));
      out.log.epochs.push_back(std::move(e));
    }
  }
  {
    CsvReader r(files.acks, kAckCsvHeader);
    while (r.next())
      out.log.acks.push_back({r.number(0), static_cast<std::uint32_t>(r.integer(1)), r.number(2), r.number(3)});
  }
  {
    CsvReader r(files.backlog, kBacklogCsvHeader);
    while (r.next()) out.log.backlog.push_back({r.number(0), static_cast<int>(r.integer(1))});
  }
  return out;
}

void write_monitor_log(const fs::path& path, std::span<const Delivery> deliveries) {
  CsvWriter w(path, kMonitorCsvHeader);
  for (const auto& d : deliveries) w.row(fmt::format("{:.9f},{},{:.9f}", d.receive_time, d.seq, d.gen_time));
  w.close();
}

std::vector<Delivery> read_monitor_log(const fs::path& path) {
  CsvReader r(path, kMonitorCsvHeader);
  std::vector<Delivery> out;
  while (r.next()) out.push_back({r.number(0), static_cast<std::uint32_t>(r.integer(1)), r.number(2)});
  return out;
}

void write_discard_log(const fs::path& path, std::span<const DiscardRecord> discards) {
  CsvWriter w(path, kDiscardCsvHeader);
  for (const auto& d : discards) w.row(fmt::format("{:.9f},{},{}", d.receive_time, d.seq, to_string(d.reason)));
  w.close();
}

void write_trace(const fs::path& path, std::span<const TraceRecord> trace) {
  CsvWriter w(path, kTraceCsvHeader);
  for (const auto& t : trace)
    w.row(fmt::format("{:.9f},{},{},{},{},{}", t.time, t.source, to_string(t.kind), t.seq, t.hop, t.ack ? 1 : 0));
  w.close();
}

void write_age_trace(const fs::path& path, const AgeTrace& trace) {
  CsvWriter w(path, kAgeTraceCsvHeader);
  for (const auto& p : trace.breakpoints) w.row(fmt::format("{:.9f},{:.9f}", p.time, p.age));
  w.close();
}

}  // namespace agectl
