#include "eln/convention.hpp"

#include <algorithm>
#include <ctime>
#include <vector>

#include "eln/error.hpp"

namespace eln {

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) {
    return is_upper(c) || is_digit(c) || (c >= 'a' && c <= 'z');
}

bool sample_at(std::string_view s, std::size_t i) {
    return i + 5 <= s.size() && is_upper(s[i]) && is_upper(s[i + 1]) && s[i + 2] == '_' &&
           is_digit(s[i + 3]) && is_digit(s[i + 4]);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

ParseFailure fail(PathSegment seg, std::string_view text, std::string reason) {
    return ParseFailure{seg, std::string(text), std::move(reason)};
}

}  // namespace

std::string_view to_string(TreeKind kind) noexcept {
    return kind == TreeKind::main ? "main" : "sub";
}

std::optional<TreeKind> tree_kind_from_string(std::string_view text) noexcept {
    if (text == "main") return TreeKind::main;
    if (text == "sub") return TreeKind::sub;
    return std::nullopt;
}

std::string_view to_string(PathSegment segment) noexcept {
    switch (segment) {
        case PathSegment::layout: return "layout";
        case PathSegment::root: return "root";
        case PathSegment::device: return "device";
        case PathSegment::date: return "date";
        case PathSegment::sample: return "sample";
        case PathSegment::filename: return "filename";
    }
    return "layout";
}

std::string ParseFailure::message() const {
    return std::string(to_string(segment)) + " segment '" + text + "': " + reason;
}

bool validate_sample_name(std::string_view name) noexcept {
    return name.size() == 5 && sample_at(name, 0);
}

bool validate_device_code(std::string_view code) noexcept {
    return code.size() == 3 && is_upper(code[0]) && is_upper(code[1]) && is_upper(code[2]);
}

ParseResult<std::string> extract_sample(std::string_view segment) {
    for (std::size_t i = 0; i + 5 <= segment.size(); ++i) {
        if (!sample_at(segment, i)) continue;
        bool left_ok = i == 0 || !is_alnum(segment[i - 1]);
        bool right_ok = i + 5 == segment.size() || !is_alnum(segment[i + 5]);
        if (left_ok && right_ok) return std::string(segment.substr(i, 5));
    }
    return fail(PathSegment::sample, segment, "no sample code");
}

ParseResult<DeviceFolder> parse_device_folder(std::string_view segment) {
    auto tokens = split(segment, '_');
    std::size_t found = tokens.size();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!validate_device_code(tokens[i])) continue;
        if (found != tokens.size()) {
            return fail(PathSegment::device, segment, "ambiguous device code");
        }
        found = i;
    }
    if (found == tokens.size()) return fail(PathSegment::device, segment, "no device code");

    DeviceFolder out{std::string(tokens[found]), {}};
    for (std::size_t i = found + 1; i < tokens.size(); ++i) {
        if (!out.instrument_variant.empty()) out.instrument_variant += '_';
        out.instrument_variant += tokens[i];
    }
    return out;
}

ParseResult<ParsedFileMeta> parse_path(std::string_view relative_path,
                                       const PathGrammar& grammar) {
    auto segments = split(relative_path, '/');
    if (segments.size() != 5) {
        return fail(PathSegment::layout, relative_path,
                    "expected root/device/date/sample/file, got " +
                        std::to_string(segments.size()) + " segments");
    }
    for (auto s : segments) {
        if (s.empty()) return fail(PathSegment::layout, relative_path, "empty path segment");
    }
    if (segments[0] != grammar.root_marker) {
        return fail(PathSegment::root, segments[0],
                    "expected tree root '" + grammar.root_marker + "'");
    }

    ParsedFileMeta meta;
    meta.relative_path = std::string(relative_path);

    auto device = parse_device_folder(segments[1]);
    if (auto* f = std::get_if<ParseFailure>(&device)) return *f;
    meta.device_code = std::get<DeviceFolder>(device).code;

    auto date = parse_compact_date(segments[2]);
    if (!date) return fail(PathSegment::date, segments[2], "invalid calendar date");
    meta.folder_date = *date;

    auto sample = extract_sample(segments[3]);
    if (auto* f = std::get_if<ParseFailure>(&sample)) return *f;
    meta.sample_name = std::get<std::string>(sample);

    std::string_view file = segments[4];
    std::string_view stem = file;
    if (auto dot = file.rfind('.'); dot != std::string_view::npos && dot > 0) {
        stem = file.substr(0, dot);
        for (char c : file.substr(dot + 1)) {
            meta.extension += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
        }
    }

    if (stem.size() >= 7 && stem[6] == '_' &&
        std::all_of(stem.begin(), stem.begin() + 6, is_digit)) {
        auto clock = parse_compact_time(stem.substr(0, 6));
        if (!clock) return fail(PathSegment::filename, file, "invalid time prefix");
        meta.observed_at = at(*date, *clock);
        stem.remove_prefix(7);
    }
    if (stem.empty()) return fail(PathSegment::filename, file, "empty description");
    meta.description = std::string(stem);
    return meta;
}

Timestamp fallback_time(Timestamp file_modification_time, Date date_folder) {
    return at(date_folder, time_of_day(file_modification_time));
}

Timestamp file_modification_time(const std::filesystem::path& file) {
    std::error_code ec;
    auto ftime = std::filesystem::last_write_time(file, ec);
    if (ec) {
        throw Error(ErrorCode::unreadable_metadata,
                    "no modification time for " + file.string() + ": " + ec.message());
    }
    auto sys = std::chrono::file_clock::to_sys(ftime);
    std::time_t t = std::chrono::system_clock::to_time_t(
        std::chrono::time_point_cast<std::chrono::system_clock::duration>(sys));
    std::tm tm{};
    if (!localtime_r(&t, &tm)) {
        throw Error(ErrorCode::unreadable_metadata, "unrepresentable mtime for " + file.string());
    }
    Date d{std::chrono::year{tm.tm_year + 1900},
           std::chrono::month{static_cast<unsigned>(tm.tm_mon + 1)},
           std::chrono::day{static_cast<unsigned>(tm.tm_mday)}};
    return at(d, std::chrono::hours{tm.tm_hour} + std::chrono::minutes{tm.tm_min} +
                     Seconds{tm.tm_sec});
}

}  // namespace eln
