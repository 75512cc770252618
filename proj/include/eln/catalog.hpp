#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "eln/convention.hpp"
#include "eln/merkle.hpp"
#include "eln/time.hpp"

struct sqlite3;

namespace eln {

// Persistent identifiers share one sequence across entries and notes.
using EntryId = std::int64_t;
using ExtraMap = std::map<std::string, std::string>;

struct CatalogEntry {
    EntryId id = 0;
    TreeKind kind = TreeKind::main;
    std::string device_code;
    std::string sample_name;
    Timestamp observed_at{};
    std::string file_path;
    std::string description;
    std::string extension;
    ExtraMap extra;
    Timestamp created_at{};

    bool operator==(const CatalogEntry&) const = default;
};

struct Sample {
    std::string name;
    std::string kind;
    std::map<std::string, std::string> properties;
    Timestamp created_at{};

    bool operator==(const Sample&) const = default;
};

struct PathRule {
    std::string device_code;
    TreeKind tree_kind = TreeKind::main;
    std::string root_subpath;
    std::set<std::string> allowed_extensions;
    std::string instrument_variant;

    bool operator==(const PathRule&) const = default;
};

struct PathRuleSet {
    std::vector<PathRule> rules;

    // Longest root_subpath that is a directory prefix of `relative_path`.
    const PathRule* match(std::string_view relative_path, TreeKind kind) const;
};

struct Note {
    EntryId id = 0;
    std::string sample_name;
    Timestamp written_at{};
    std::string body;

    bool operator==(const Note&) const = default;
};

enum class LinkType { main_sub, entry_note, entry_analysis, entry_entry };
enum class LinkOrigin { automatic, manual };

std::string_view to_string(LinkType t) noexcept;
std::optional<LinkType> link_type_from_string(std::string_view s) noexcept;
std::string_view to_string(LinkOrigin o) noexcept;  // "auto" / "manual"
std::optional<LinkOrigin> link_origin_from_string(std::string_view s) noexcept;

struct Link {
    std::int64_t id = 0;
    EntryId from_id = 0;
    EntryId to_id = 0;
    LinkType link_type = LinkType::entry_entry;
    LinkOrigin created_by = LinkOrigin::manual;

    bool operator==(const Link&) const = default;
};

struct EntryFilter {
    std::optional<std::string> sample;
    std::optional<std::string> device;
    std::optional<TreeKind> kind;
    std::optional<Timestamp> from;  // inclusive
    std::optional<Timestamp> to;    // inclusive
    std::optional<std::string> text;
    std::optional<std::pair<std::string, std::string>> extra_key_value;
};

struct UpsertResult {
    CatalogEntry entry;
    bool was_created = false;
};

struct StoredBatch {
    std::int64_t id = 0;
    StampBatch batch;
};

// Single-file SQLite store. Mutations are serialized through one writer and
// each public mutation commits before returning; readers share a lock and
// only ever see committed state. write() groups several mutations into one
// transaction (nested calls become savepoints).
class Catalog {
public:
    static constexpr int schema_version = 1;

    explicit Catalog(const std::filesystem::path& store_path);
    ~Catalog();
    Catalog(const Catalog&) = delete;
    Catalog& operator=(const Catalog&) = delete;

    void set_clock(std::function<Timestamp()> clock);

    template <class F>
    decltype(auto) write(F&& body);

    Sample register_sample(const std::string& name, const std::string& kind,
                           const std::map<std::string, std::string>& properties);
    std::optional<Sample> find_sample(const std::string& name) const;
    std::vector<Sample> samples() const;

    PathRuleSet register_path_rule(const PathRule& rule);
    PathRuleSet path_rules() const;

    UpsertResult upsert_entry(const ParsedFileMeta& meta, TreeKind kind, const ExtraMap& extra);
    CatalogEntry get_entry(EntryId id) const;
    std::optional<CatalogEntry> find_entry(EntryId id) const;
    std::vector<CatalogEntry> query_entries(const EntryFilter& filter) const;
    // Removes the entry and every incident link. Throws Error{not_found}.
    bool delete_entry(EntryId id);

    Note add_note(const std::string& sample, Timestamp written_at, const std::string& body);
    Note get_note(EntryId id) const;
    std::vector<Note> notes_for_sample(const std::string& sample) const;

    Link add_link(EntryId from, EntryId to, LinkType type, LinkOrigin created_by);
    void remove_link(std::int64_t link_id);
    std::vector<Link> links_for(EntryId id) const;  // either endpoint
    std::vector<Link> links_to(EntryId to, LinkType type) const;
    std::vector<Link> links_from(EntryId from, LinkType type) const;
    std::vector<Link> all_links() const;

    void save_report(const std::string& report_json);
    std::optional<std::string> latest_report() const;
    std::size_t report_count() const;
    static constexpr std::size_t report_history = 50;

    std::vector<CatalogEntry> unstamped_entries() const;
    std::int64_t insert_batch(const StampBatch& batch,
                              const std::vector<std::pair<EntryId, Digest>>& members);
    void mark_submitted(std::int64_t batch_id, Timestamp at, const std::string& receipt);
    std::optional<StoredBatch> pending_batch() const;
    std::optional<StoredBatch> batch_containing(const Digest& digest) const;

    // Canonical text dump of samples, rules, entries, notes and links.
    std::string snapshot() const;

private:
    class ReadGuard;
    void begin_write();
    void commit_write();
    void rollback_write();
    EntryId next_id();
    bool id_exists_as_entry(EntryId id) const;
    bool id_exists_as_note(EntryId id) const;

    sqlite3* db_ = nullptr;
    mutable std::shared_mutex mutex_;
    std::atomic<std::thread::id> writer_{};
    int write_depth_ = 0;
    std::function<Timestamp()> clock_;
};

template <class F>
decltype(auto) Catalog::write(F&& body) {
    if (writer_.load() == std::this_thread::get_id()) {
        begin_write();
        try {
            if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
                body();
                commit_write();
                return;
            } else {
                auto result = body();
                commit_write();
                return result;
            }
        } catch (...) {
            rollback_write();
            throw;
        }
    }
    std::unique_lock lock(mutex_);
    writer_.store(std::this_thread::get_id());
    struct Release {
        std::atomic<std::thread::id>& w;
        ~Release() { w.store(std::thread::id{}); }
    } release{writer_};
    begin_write();
    try {
        if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
            body();
            commit_write();
            return;
        } else {
            auto result = body();
            commit_write();
            return result;
        }
    } catch (...) {
        rollback_write();
        throw;
    }
}

}  // namespace eln
