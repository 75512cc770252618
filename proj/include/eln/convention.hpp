#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "eln/time.hpp"

namespace eln {

enum class TreeKind { main, sub };

std::string_view to_string(TreeKind kind) noexcept;
std::optional<TreeKind> tree_kind_from_string(std::string_view text) noexcept;

// Layout below the data root:
//   <root_marker>/<device folder>/<YYYYMMDD>/<sample folder>/<HHMMSS_description.ext>
struct PathGrammar {
    std::string root_marker;
    TreeKind tree_kind = TreeKind::main;
};

struct ParsedFileMeta {
    std::string device_code;
    std::string sample_name;
    std::optional<Timestamp> observed_at;
    std::string description;
    std::string extension;
    std::string relative_path;
    Date folder_date{};

    bool operator==(const ParsedFileMeta&) const = default;
};

enum class PathSegment { layout, root, device, date, sample, filename };

std::string_view to_string(PathSegment segment) noexcept;

struct ParseFailure {
    PathSegment segment = PathSegment::layout;
    std::string text;
    std::string reason;

    std::string message() const;
    bool operator==(const ParseFailure&) const = default;
};

template <class T>
using ParseResult = std::variant<T, ParseFailure>;

struct DeviceFolder {
    std::string code;
    // Tokens after the device code, kept verbatim ("01_OCA_35_XL" -> "35_XL").
    std::string instrument_variant;
};

bool validate_sample_name(std::string_view name) noexcept;
bool validate_device_code(std::string_view code) noexcept;

ParseResult<std::string> extract_sample(std::string_view segment);
ParseResult<DeviceFolder> parse_device_folder(std::string_view segment);

// Pure: no filesystem access. observed_at is only set when the filename
// carries an HHMMSS_ prefix.
ParseResult<ParsedFileMeta> parse_path(std::string_view relative_path, const PathGrammar& grammar);

// Folder date combined with the clock time of the modification timestamp.
Timestamp fallback_time(Timestamp file_modification_time, Date date_folder);

// Local wall-clock modification time of a file. Throws Error{unreadable_metadata}.
Timestamp file_modification_time(const std::filesystem::path& file);

}  // namespace eln
