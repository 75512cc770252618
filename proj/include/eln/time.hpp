#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace eln {

// Naive local wall-clock time. The folder convention carries no zone, so
// nothing in the engine converts to or from UTC except file mtimes.
using Timestamp = std::chrono::local_seconds;
using Date = std::chrono::year_month_day;
using Seconds = std::chrono::seconds;

// YYYY-MM-DDTHH:MM:SS
std::string format_iso(Timestamp ts);
// YYYY-MM-DD
std::string format_date(Date d);

// Accepts "YYYY-MM-DDTHH:MM:SS", "YYYY-MM-DD HH:MM:SS" and "YYYY-MM-DD"
// (midnight). Rejects impossible calendar dates and clock values.
std::optional<Timestamp> parse_iso(std::string_view text);
std::optional<Date> parse_date(std::string_view text);

// Strict YYYYMMDD / HHMMSS forms used by the path convention.
std::optional<Date> parse_compact_date(std::string_view text);
std::optional<Seconds> parse_compact_time(std::string_view text);

Date date_of(Timestamp ts);
Seconds time_of_day(Timestamp ts);
Timestamp at(Date d, Seconds time_of_day = Seconds{0});

// Wall clock, expressed in the machine's local zone.
Timestamp now_local();

}  // namespace eln
