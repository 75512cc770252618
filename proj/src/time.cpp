#include "eln/time.hpp"

#include <charconv>
#include <cstdio>
#include <ctime>

namespace eln {

namespace {

bool all_digits(std::string_view s) {
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return !s.empty();
}

int to_int(std::string_view s) {
    int v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

std::optional<Date> make_date(int y, int m, int d) {
    Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::optional<Seconds> make_clock(int h, int m, int s) {
    if (h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 59) return std::nullopt;
    return std::chrono::hours{h} + std::chrono::minutes{m} + Seconds{s};
}

}  // namespace

std::string format_date(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::string format_iso(Timestamp ts) {
    std::chrono::hh_mm_ss hms{time_of_day(ts)};
    char buf[16];
    std::snprintf(buf, sizeof buf, "T%02d:%02d:%02d", static_cast<int>(hms.hours().count()),
                  static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return format_date(date_of(ts)) + buf;
}

std::optional<Date> parse_date(std::string_view t) {
    if (t.size() != 10 || t[4] != '-' || t[7] != '-') return std::nullopt;
    auto y = t.substr(0, 4), m = t.substr(5, 2), d = t.substr(8, 2);
    if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
    return make_date(to_int(y), to_int(m), to_int(d));
}

std::optional<Timestamp> parse_iso(std::string_view t) {
    auto date = parse_date(t.substr(0, std::min<std::size_t>(10, t.size())));
    if (!date) return std::nullopt;
    if (t.size() == 10) return at(*date);
    if (t.size() != 19 || (t[10] != 'T' && t[10] != ' ') || t[13] != ':' || t[16] != ':')
        return std::nullopt;
    auto h = t.substr(11, 2), m = t.substr(14, 2), s = t.substr(17, 2);
    if (!all_digits(h) || !all_digits(m) || !all_digits(s)) return std::nullopt;
    auto clock = make_clock(to_int(h), to_int(m), to_int(s));
    if (!clock) return std::nullopt;
    return at(*date, *clock);
}

std::optional<Date> parse_compact_date(std::string_view t) {
    if (t.size() != 8 || !all_digits(t)) return std::nullopt;
    return make_date(to_int(t.substr(0, 4)), to_int(t.substr(4, 2)), to_int(t.substr(6, 2)));
}

std::optional<Seconds> parse_compact_time(std::string_view t) {
    if (t.size() != 6 || !all_digits(t)) return std::nullopt;
    return make_clock(to_int(t.substr(0, 2)), to_int(t.substr(2, 2)), to_int(t.substr(4, 2)));
}

Date date_of(Timestamp ts) {
    return Date{std::chrono::floor<std::chrono::days>(ts)};
}

Seconds time_of_day(Timestamp ts) {
    return ts - std::chrono::floor<std::chrono::days>(ts);
}

Timestamp at(Date d, Seconds tod) {
    return std::chrono::local_days{d} + tod;
}

Timestamp now_local() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    localtime_r(&t, &tm);
    auto d = make_date(tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday);
    return at(*d, std::chrono::hours{tm.tm_hour} + std::chrono::minutes{tm.tm_min} +
                      Seconds{tm.tm_sec});
}

}  // namespace eln
