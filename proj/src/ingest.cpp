#include "eln/ingest.hpp"

#include <algorithm>
#include <deque>

#include "eln/error.hpp"
#include "eln/serialize.hpp"

namespace eln {

namespace fs = std::filesystem;

std::string_view to_string(SkipReason reason) noexcept {
    switch (reason) {
        case SkipReason::too_old: return "too_old";
        case SkipReason::bad_extension: return "bad_extension";
        case SkipReason::parse_failure: return "parse_failure";
        case SkipReason::unknown_sample: return "unknown_sample";
        case SkipReason::unmatched_rule: return "unmatched_rule";
    }
    return "parse_failure";
}

std::vector<PathGrammar> default_grammars() {
    return {{"01_Main_Exp", TreeKind::main}, {"02_Sub_Exp", TreeKind::sub}};
}

namespace {

std::string file_extension(const std::string& name) {
    auto dot = name.rfind('.');
    if (dot == std::string::npos || dot == 0) return {};
    std::string ext = name.substr(dot + 1);
    for (char& c : ext) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return ext;
}

// Breadth-first; symlinked directories are not followed.
std::vector<std::string> walk(const fs::path& root, const std::string& marker) {
    std::vector<std::string> files;
    std::deque<std::pair<fs::path, std::string>> queue{{root / marker, marker}};
    while (!queue.empty()) {
        auto [dir, rel] = queue.front();
        queue.pop_front();
        std::error_code ec;
        fs::directory_iterator it(dir, ec);
        if (ec) continue;
        for (const auto& e : it) {
            auto name = e.path().filename().string();
            auto child = rel + "/" + name;
            std::error_code sec;
            if (e.is_directory(sec) && !e.is_symlink(sec)) {
                queue.emplace_back(e.path(), child);
            } else if (e.is_regular_file(sec)) {
                files.push_back(child);
            }
        }
    }
    return files;
}

}  // namespace

ScanResult scan(const fs::path& root, const std::vector<PathGrammar>& grammars,
                const PathRuleSet& rules, const RecencyPolicy& policy, Timestamp now) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw Error(ErrorCode::root_unreadable, "data root " + root.string() + " is not readable");
    }
    fs::directory_iterator probe(root, ec);
    if (ec) throw Error(ErrorCode::root_unreadable, "data root " + root.string() + ": " + ec.message());

    std::vector<std::pair<std::string, const PathGrammar*>> files;
    for (const auto& g : grammars) {
        for (auto& f : walk(root, g.root_marker)) files.emplace_back(std::move(f), &g);
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ScanResult out;
    const Timestamp oldest = now - policy.max_age;
    for (const auto& [path, grammar] : files) {
        const PathRule* rule = rules.match(path, grammar->tree_kind);
        if (!rule) {
            out.skipped.push_back({path, SkipReason::unmatched_rule, "no path rule covers this file"});
            continue;
        }
        auto ext = file_extension(fs::path(path).filename().string());
        if (!rule->allowed_extensions.count(ext)) {
            out.skipped.push_back({path, SkipReason::bad_extension,
                                   "extension '" + ext + "' not allowed for " + rule->device_code});
            continue;
        }
        auto parsed = parse_path(path, *grammar);
        if (auto* f = std::get_if<ParseFailure>(&parsed)) {
            out.skipped.push_back({path, SkipReason::parse_failure, f->message()});
            continue;
        }
        auto meta = std::get<ParsedFileMeta>(std::move(parsed));
        if (meta.device_code != rule->device_code) {
            out.skipped.push_back({path, SkipReason::unmatched_rule,
                                   "device " + meta.device_code + " under rule for " +
                                       rule->device_code});
            continue;
        }
        bool from_mtime = false;
        if (!meta.observed_at) {
            try {
                meta.observed_at = fallback_time(file_modification_time(root / path),
                                                 meta.folder_date);
                from_mtime = true;
            } catch (const Error& e) {
                out.skipped.push_back({path, SkipReason::parse_failure, e.what()});
                continue;
            }
        }
        if (policy.enabled && *meta.observed_at < oldest) {
            out.skipped.push_back({path, SkipReason::too_old,
                                   "observed " + format_iso(*meta.observed_at) + ", limit " +
                                       format_iso(oldest)});
            continue;
        }
        out.candidates.push_back({*rule, std::move(meta), from_mtime});
    }
    return out;
}

Ingestor::Ingestor(Catalog& catalog, Linker& linker, IngestOptions options)
    : catalog_(catalog), linker_(linker), options_(std::move(options)) {}

IngestReport Ingestor::generate_entries(const fs::path& root, const RecencyPolicy& policy,
                                        Timestamp now) {
    std::unique_lock lock(run_mutex_, std::try_to_lock);
    if (!lock) throw Error(ErrorCode::busy, "an ingest run is already active");

    IngestReport report;
    report.started_at = now_local();
    report.now_reference = now;

    auto rules = catalog_.path_rules();
    auto result = scan(root, options_.grammars, rules, policy, now);
    report.scanned = result.candidates.size() + result.skipped.size();
    report.skipped = std::move(result.skipped);

    catalog_.write([&] {
        std::vector<CatalogEntry> created;
        for (const auto& c : result.candidates) {
            ExtraMap extra;
            if (auto it = options_.profiles.find(c.meta.device_code); it != options_.profiles.end()) {
                extra = it->second;
            }
            if (!c.rule.instrument_variant.empty()) {
                extra["instrument_variant"] = c.rule.instrument_variant;
            }
            extra["time_source"] = c.time_from_mtime ? "file_mtime" : "filename";
            try {
                auto r = catalog_.upsert_entry(c.meta, c.rule.tree_kind, extra);
                if (r.was_created) {
                    created.push_back(std::move(r.entry));
                } else {
                    ++report.duplicates;
                }
            } catch (const Error& e) {
                if (e.code() != ErrorCode::unknown_sample) throw;
                report.skipped.push_back({c.meta.relative_path, SkipReason::unknown_sample, e.what()});
            }
        }
        for (const auto& e : created) report.entries.push_back(e.id);
        report.created = created.size();
        report.links_created = linker_.link_new_entries(created).size();
        catalog_.save_report(to_json(report).dump());
    });
    return report;
}

IngestReport Ingestor::latest_report() const {
    auto body = catalog_.latest_report();
    if (!body) throw Error(ErrorCode::no_reports, "no ingest run has been recorded");
    return report_from_json(nlohmann::json::parse(*body));
}

}  // namespace eln
