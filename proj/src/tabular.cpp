#include "eln/tabular.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace eln {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::string_view unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split_cells(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view cell, char decimal) {
    if (cell.empty()) return std::nullopt;
    std::string buf(cell);
    if (decimal != '.') {
        for (char& c : buf) {
            if (c == '.') return std::nullopt;
            if (c == decimal) c = '.';
        }
    }
    std::string_view v = buf;
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    double out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) return std::nullopt;
    return out;
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

std::string_view to_string(TableErrorKind kind) noexcept {
    switch (kind) {
        case TableErrorKind::no_header: return "no_header";
        case TableErrorKind::ragged_row: return "ragged_row";
        case TableErrorKind::non_numeric: return "non_numeric";
        case TableErrorKind::empty_table: return "empty_table";
        case TableErrorKind::missing_time_column: return "missing_time_column";
        case TableErrorKind::non_monotone_time: return "non_monotone_time";
    }
    return "no_header";
}

TimeSeriesTable parse_table(std::string_view text, const TableFormat& format) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        auto line = text.substr(start, pos == std::string_view::npos ? pos : pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();

    if (lines.empty() || trim(lines.front()).empty()) {
        throw TableError(TableErrorKind::no_header, 0, 0, "table has no header row");
    }
    auto header = split_cells(lines.front(), format.delimiter);
    bool all_numeric = true;
    for (auto h : header) {
        if (!parse_number(h, format.decimal_separator)) all_numeric = false;
    }
    if (all_numeric) {
        throw TableError(TableErrorKind::no_header, 0, 0, "first row is numeric, not a header");
    }

    std::size_t time_index = 0;
    if (!format.time_column.empty()) {
        time_index = header.size();
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (unquote(header[i]) == format.time_column) time_index = i;
        }
        if (time_index == header.size()) {
            throw TableError(TableErrorKind::missing_time_column, 0, 0,
                             "time column '" + format.time_column + "' not in header");
        }
    }

    TimeSeriesTable table;
    table.time_name = std::string(unquote(header[time_index]));
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i != time_index) table.columns.emplace_back(std::string(unquote(header[i])),
                                                        std::vector<double>{});
    }

    for (std::size_t r = 1; r < lines.size(); ++r) {
        auto cells = split_cells(lines[r], format.delimiter);
        if (cells.size() != header.size()) {
            throw TableError(TableErrorKind::ragged_row, r, 0,
                             "row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                                 " cells, header has " + std::to_string(header.size()));
        }
        std::size_t out_col = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            auto v = parse_number(cells[c], format.decimal_separator);
            if (!v) {
                throw TableError(TableErrorKind::non_numeric, r, c + 1,
                                 "non-numeric cell '" + std::string(cells[c]) + "' at row " +
                                     std::to_string(r) + ", column " + std::to_string(c + 1));
            }
            if (c == time_index) {
                if (!table.time_s.empty() && *v < table.time_s.back()) {
                    throw TableError(TableErrorKind::non_monotone_time, r, c + 1,
                                     "time decreases at row " + std::to_string(r));
                }
                table.time_s.push_back(*v);
            } else {
                table.columns[out_col++].second.push_back(*v);
            }
        }
    }
    if (table.time_s.empty()) {
        throw TableError(TableErrorKind::empty_table, 0, 0, "table has no data rows");
    }
    return table;
}

TimeSeriesTable parse_table_file(const std::filesystem::path& file, const TableFormat& format) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::read_failure, "cannot open " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_table(buf.str(), format);
}

std::string serialize_table(const TimeSeriesTable& table) {
    std::string out = table.time_name;
    for (const auto& [name, _] : table.columns) out += "," + name;
    out += "\n";
    for (std::size_t r = 0; r < table.time_s.size(); ++r) {
        out += format_number(table.time_s[r]);
        for (const auto& [_, values] : table.columns) out += "," + format_number(values[r]);
        out += "\n";
    }
    return out;
}

PlotPayload plot_payload(const Catalog& catalog, const std::filesystem::path& data_root,
                         EntryId entry_id, const TabularConfig& config) {
    auto main = catalog.get_entry(entry_id);
    if (!config.extensions.count(main.extension)) {
        throw Error(ErrorCode::not_tabular, "entry " + std::to_string(entry_id) + " (" +
                                                main.extension + ") is not a tabular file");
    }
    PlotPayload payload;
    payload.main = parse_table_file(data_root / main.file_path, config.format);
    payload.main.source_entry_id = main.id;
    if (main.kind != TreeKind::main) return payload;

    for (const auto& link : catalog.links_from(main.id, LinkType::main_sub)) {
        auto sub = catalog.find_entry(link.to_id);
        if (!sub || !config.extensions.count(sub->extension)) continue;
        SubSeries s;
        s.entry_id = sub->id;
        s.offset_s = static_cast<double>((sub->observed_at - main.observed_at).count());
        s.table = parse_table_file(data_root / sub->file_path, config.format);
        s.table.source_entry_id = sub->id;
        payload.subs.push_back(std::move(s));
    }
    return payload;
}

}  // namespace eln
