#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eln/catalog.hpp"
#include "eln/error.hpp"

namespace eln {

struct TableFormat {
    char delimiter = ',';
    char decimal_separator = '.';
    std::string time_column;  // empty: first column
};

// Time values are seconds relative to the owning entry's observed_at.
struct TimeSeriesTable {
    std::string time_name;
    std::vector<double> time_s;
    std::vector<std::pair<std::string, std::vector<double>>> columns;
    std::optional<EntryId> source_entry_id;

    bool operator==(const TimeSeriesTable&) const = default;
};

enum class TableErrorKind {
    no_header,
    ragged_row,
    non_numeric,
    empty_table,
    missing_time_column,
    non_monotone_time,
};

std::string_view to_string(TableErrorKind kind) noexcept;

// Rows count data lines from 1 (the header is row 0); columns count from 1.
class TableError : public Error {
public:
    TableError(TableErrorKind kind, std::size_t row, std::size_t column, const std::string& msg)
        : Error(ErrorCode::table_parse, msg), kind_(kind), row_(row), column_(column) {}

    TableErrorKind kind() const noexcept { return kind_; }
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    TableErrorKind kind_;
    std::size_t row_;
    std::size_t column_;
};

TimeSeriesTable parse_table(std::string_view text, const TableFormat& format = {});
TimeSeriesTable parse_table_file(const std::filesystem::path& file, const TableFormat& format = {});

// Canonical form: ',' delimiter, '.' decimal, shortest round-trip numbers.
std::string serialize_table(const TimeSeriesTable& table);

struct SubSeries {
    EntryId entry_id = 0;
    double offset_s = 0;
    TimeSeriesTable table;
};

struct PlotPayload {
    TimeSeriesTable main;
    std::vector<SubSeries> subs;
};

struct TabularConfig {
    std::set<std::string> extensions{"csv", "txt", "dat"};
    TableFormat format;
};

// Main series plus every linked tabular sub, each with its offset in seconds
// from the main's observed_at. Throws Error{not_found} / Error{not_tabular}.
PlotPayload plot_payload(const Catalog& catalog, const std::filesystem::path& data_root,
                         EntryId entry_id, const TabularConfig& config);

}  // namespace eln
