#pragma once

#include <array>
#include <charconv>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include "model.hpp"

namespace esrp {

namespace detail {

inline void append_double(std::string& out, double x) {
  std::array<char, 32> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  out.append(buf.data(), res.ptr);
}

inline double parse_double(std::string_view field, const char* what) {
  double x = 0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), x);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw std::runtime_error(std::string("malformed CSV field for ") + what +
                             ": '" + std::string(field) + "'");
  return x;
}

}  // namespace detail

inline constexpr std::string_view kEventCsvHeader =
    "time,kind,mark,intensity_before,intensity_after";

/// Writes one row per event; doubles use shortest round-trip formatting so
/// read_event_log_csv restores them bit for bit.
inline void write_event_log_csv(std::ostream& os, const EventLog& log) {
  std::string out{kEventCsvHeader};
  out += '\n';
  for (const Event& ev : log.events) {
    detail::append_double(out, ev.time);
    out += ev.kind == EventKind::self ? ",self," : ",external,";
    detail::append_double(out, ev.mark);
    out += ',';
    detail::append_double(out, ev.intensity_before);
    out += ',';
    detail::append_double(out, ev.intensity_after);
    out += '\n';
  }
  os << out;
}

/// Parses the format produced by write_event_log_csv. The log's end_time is
/// recovered as the last event time (0 for an empty log); callers that know
/// the true horizon should overwrite it.
inline EventLog read_event_log_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("empty CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kEventCsvHeader)
    throw std::runtime_error("unexpected CSV header: '" + line + "'");

  EventLog log;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::array<std::string_view, 5> fields;
    std::string_view rest{line};
    for (int i = 0; i < 5; ++i) {
      std::size_t comma = rest.find(',');
      bool last = i == 4;
      if (last != (comma == std::string_view::npos))
        throw std::runtime_error("line " + std::to_string(lineno) +
                                 ": expected 5 comma-separated fields");
      fields[i] = last ? rest : rest.substr(0, comma);
      if (!last) rest = rest.substr(comma + 1);
    }

    Event ev;
    ev.time = detail::parse_double(fields[0], "time");
    if (fields[1] == "self") {
      ev.kind = EventKind::self;
    } else if (fields[1] == "external") {
      ev.kind = EventKind::external;
    } else {
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": unknown event kind '" +
                               std::string(fields[1]) + "'");
    }
    ev.mark = detail::parse_double(fields[2], "mark");
    ev.intensity_before = detail::parse_double(fields[3], "intensity_before");
    ev.intensity_after = detail::parse_double(fields[4], "intensity_after");
    log.events.push_back(ev);
  }
  log.end_time = log.events.empty() ? 0.0 : log.events.back().time;
  return log;
}

}  // namespace esrp
