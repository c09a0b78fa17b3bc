/*
 * Copyright 2026 The CausalNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>

#include "causalnet/delay_ingest.hpp"
#include "causalnet/error.hpp"
#include "text_util.hpp"

namespace causalnet {
namespace {

int digits(std::string_view s, std::size_t pos, std::size_t count, std::string_view whole) {
  if (pos + count > s.size()) throw_error(ErrorKind::Input, "timestamp '" + std::string(whole) + "' is truncated");
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      throw_error(ErrorKind::Input, "timestamp '" + std::string(whole) + "' is malformed");
    }
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, std::string_view options, std::string_view whole) {
  if (pos >= s.size() || options.find(s[pos]) == std::string_view::npos) {
    throw_error(ErrorKind::Input, "timestamp '" + std::string(whole) + "' is malformed");
  }
}

}  // namespace

std::int64_t parse_rfc3339_minutes(std::string_view text) {
  const std::string_view s = detail::trim(text);
  // YYYY-MM-DDTHH:MM[:SS[.frac]](Z|+HH:MM|-HH:MM)
  const int year = digits(s, 0, 4, s);
  expect(s, 4, "-", s);
  const int month = digits(s, 5, 2, s);
  expect(s, 7, "-", s);
  const int day = digits(s, 8, 2, s);
  expect(s, 10, "Tt ", s);
  const int hour = digits(s, 11, 2, s);
  expect(s, 13, ":", s);
  const int minute = digits(s, 14, 2, s);
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    const int second = digits(s, pos + 1, 2, s);
    if (second > 60) throw_error(ErrorKind::Input, "timestamp '" + std::string(s) + "' has invalid seconds");
    pos += 3;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    }
  }
  int offset_minutes = 0;
  expect(s, pos, "Zz+-", s);
  if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '+' ? 1 : -1;
    const int oh = digits(s, pos + 1, 2, s);
    expect(s, pos + 3, ":", s);
    const int om = digits(s, pos + 4, 2, s);
    offset_minutes = sign * (oh * 60 + om);
    pos += 6;
  } else {
    pos += 1;
  }
  if (pos != s.size()) throw_error(ErrorKind::Input, "timestamp '" + std::string(s) + "' has trailing text");

  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59) {
    throw_error(ErrorKind::Input, "timestamp '" + std::string(s) + "' is not a valid date/time");
  }
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 1440 + hour * 60 + minute - offset_minutes;
}

std::string format_hour(std::int64_t hour) {
  std::int64_t day = hour / 24;
  std::int64_t h = hour % 24;
  if (h < 0) {
    h += 24;
    --day;
  }
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:00:00Z", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(h));
  return buf;
}

std::vector<FlightRecord> read_flight_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::Io, "cannot open flight records '" + path + "'");
  std::vector<FlightRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = detail::split(trimmed, ',');
    if (line_no == 1 && fields[0] == "airport_id") continue;
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != 4) throw_error(ErrorKind::Input, where + ": expected 4 fields, got " + std::to_string(fields.size()));
    FlightRecord r;
    r.airport = std::string(fields[0]);
    if (r.airport.empty()) throw_error(ErrorKind::Input, where + ": empty airport id");
    try {
      r.scheduled_minute = parse_rfc3339_minutes(fields[1]);
      if (!fields[2].empty()) r.actual_minute = parse_rfc3339_minutes(fields[2]);
    } catch (const Error& e) {
      throw_error(ErrorKind::Input, where + ": " + e.what());
    }
    if (fields[3] == "1" || fields[3] == "true") {
      r.cancelled = true;
    } else if (fields[3] == "0" || fields[3] == "false") {
      r.cancelled = false;
    } else {
      throw_error(ErrorKind::Input, where + ": cancelled must be 0 or 1");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> airports_of(std::span<const FlightRecord> records) {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.airport);
  return {ids.begin(), ids.end()};
}

void write_delay_matrix(const DelayMatrix& m, const std::string& values_path, const std::string& mask_path) {
  std::ofstream values(values_path, std::ios::binary);
  if (!values) throw_error(ErrorKind::Io, "cannot write '" + values_path + "'");
  std::ofstream mask;
  if (!mask_path.empty()) {
    mask.open(mask_path, std::ios::binary);
    if (!mask) throw_error(ErrorKind::Io, "cannot write '" + mask_path + "'");
  }
  std::string header = "time";
  for (const auto& a : m.airports) header += "," + a;
  header += "\n";
  values << header;
  if (mask) mask << header;
  for (Eigen::Index t = 0; t < m.values.cols(); ++t) {
    const std::string stamp = format_hour(m.start_hour + t);
    std::string vrow = stamp, mrow = stamp;
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
      vrow += "," + detail::format_double(m.values(i, t));
      mrow += m.mask(i, t) ? ",1" : ",0";
    }
    values << vrow << "\n";
    if (mask) mask << mrow << "\n";
  }
}

namespace {

struct HourTable {
  std::vector<std::string> columns;
  std::int64_t start_hour = 0;
  std::vector<std::vector<double>> rows;
};

HourTable read_hour_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::Io, "cannot open '" + path + "'");
  HourTable table;
  std::string line;
  if (!std::getline(in, line)) throw_error(ErrorKind::Input, path + ": empty file");
  const auto header = detail::split(detail::trim(line), ',');
  if (header.empty() || header[0] != "time" || header.size() < 2) {
    throw_error(ErrorKind::Input, path + ": header must be time,<airport_1>,...");
  }
  for (std::size_t i = 1; i < header.size(); ++i) table.columns.emplace_back(header[i]);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = detail::split(trimmed, ',');
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != header.size()) throw_error(ErrorKind::Input, where + ": wrong number of fields");
    std::int64_t minute = 0;
    try {
      minute = parse_rfc3339_minutes(fields[0]);
    } catch (const Error& e) {
      throw_error(ErrorKind::Input, where + ": " + e.what());
    }
    if (minute % 60 != 0) throw_error(ErrorKind::Input, where + ": time is not on an hour boundary");
    const std::int64_t hour = minute / 60;
    if (table.rows.empty()) {
      table.start_hour = hour;
    } else if (hour != table.start_hour + static_cast<std::int64_t>(table.rows.size())) {
      throw_error(ErrorKind::Input, where + ": hours must be consecutive");
    }
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(detail::parse_double(fields[i], where));
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw_error(ErrorKind::Input, path + ": no data rows");
  return table;
}

}  // namespace

DelayMatrix read_delay_matrix(const std::string& values_path, const std::string& mask_path) {
  const HourTable v = read_hour_table(values_path);
  DelayMatrix m;
  m.airports = v.columns;
  m.start_hour = v.start_hour;
  const auto n = static_cast<Eigen::Index>(v.columns.size());
  const auto t = static_cast<Eigen::Index>(v.rows.size());
  m.values.resize(n, t);
  for (Eigen::Index j = 0; j < t; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m.values(i, j) = v.rows[j][i];
  m.mask = MaskMatrix::Constant(n, t, true);
  if (!mask_path.empty()) {
    const HourTable k = read_hour_table(mask_path);
    if (k.columns != v.columns || k.start_hour != v.start_hour || k.rows.size() != v.rows.size()) {
      throw_error(ErrorKind::Input, mask_path + ": mask layout does not match '" + values_path + "'");
    }
    for (Eigen::Index j = 0; j < t; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const double b = k.rows[j][i];
        if (b != 0.0 && b != 1.0) throw_error(ErrorKind::Input, mask_path + ": mask entries must be 0 or 1");
        m.mask(i, j) = b == 1.0;
      }
  }
  return m;
}

}  // namespace causalnet
