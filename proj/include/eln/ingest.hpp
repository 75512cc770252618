#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "eln/catalog.hpp"
#include "eln/convention.hpp"
#include "eln/linker.hpp"

namespace eln {

struct RecencyPolicy {
    Seconds max_age{std::chrono::days{5}};
    bool enabled = true;
};

enum class SkipReason { too_old, bad_extension, parse_failure, unknown_sample, unmatched_rule };

std::string_view to_string(SkipReason reason) noexcept;

struct SkippedFile {
    std::string path;
    SkipReason reason = SkipReason::parse_failure;
    std::string detail;

    bool operator==(const SkippedFile&) const = default;
};

struct Candidate {
    PathRule rule;
    ParsedFileMeta meta;  // observed_at always set
    bool time_from_mtime = false;
};

struct ScanResult {
    std::vector<Candidate> candidates;
    std::vector<SkippedFile> skipped;
};

struct IngestReport {
    Timestamp started_at{};
    Timestamp now_reference{};
    std::size_t scanned = 0;
    std::size_t created = 0;
    std::size_t duplicates = 0;
    std::vector<SkippedFile> skipped;
    std::size_t links_created = 0;
    std::vector<EntryId> entries;
};

// Walks <root>/<grammar.root_marker> for every grammar and classifies each
// regular file exactly once, in path order. Throws Error{root_unreadable}.
ScanResult scan(const std::filesystem::path& root, const std::vector<PathGrammar>& grammars,
                const PathRuleSet& rules, const RecencyPolicy& policy, Timestamp now);

std::vector<PathGrammar> default_grammars();

struct IngestOptions {
    std::vector<PathGrammar> grammars = default_grammars();
    // Default extra values per device code, merged into new entries.
    std::map<std::string, ExtraMap> profiles;
};

class Ingestor {
public:
    Ingestor(Catalog& catalog, Linker& linker, IngestOptions options = {});

    // One run at a time; a concurrent call throws Error{busy}.
    IngestReport generate_entries(const std::filesystem::path& root, const RecencyPolicy& policy,
                                  Timestamp now);

    // Throws Error{no_reports}.
    IngestReport latest_report() const;

private:
    Catalog& catalog_;
    Linker& linker_;
    IngestOptions options_;
    std::mutex run_mutex_;
};

}  // namespace eln
