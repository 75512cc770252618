#include "eln/catalog.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <sstream>

#include "eln/error.hpp"

namespace eln {

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS id_sequence (next_id INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS samples (
    name TEXT PRIMARY KEY,
    kind TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS sample_properties (
    sample_name TEXT NOT NULL REFERENCES samples(name),
    key TEXT NOT NULL,
    value TEXT NOT NULL,
    PRIMARY KEY (sample_name, key)
);
CREATE TABLE IF NOT EXISTS path_rules (
    device_code TEXT NOT NULL,
    tree_kind TEXT NOT NULL,
    root_subpath TEXT NOT NULL,
    allowed_extensions TEXT NOT NULL,
    instrument_variant TEXT NOT NULL,
    PRIMARY KEY (device_code, tree_kind)
);
CREATE TABLE IF NOT EXISTS entries (
    id INTEGER PRIMARY KEY,
    kind TEXT NOT NULL,
    device_code TEXT NOT NULL,
    sample_name TEXT NOT NULL,
    observed_at TEXT NOT NULL,
    file_path TEXT NOT NULL UNIQUE,
    description TEXT NOT NULL,
    extension TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS entries_by_sample ON entries (sample_name, observed_at);
CREATE INDEX IF NOT EXISTS entries_by_time ON entries (observed_at);
CREATE TABLE IF NOT EXISTS entry_extra (
    entry_id INTEGER NOT NULL,
    key TEXT NOT NULL,
    value TEXT NOT NULL,
    PRIMARY KEY (entry_id, key)
);
CREATE TABLE IF NOT EXISTS notes (
    id INTEGER PRIMARY KEY,
    sample_name TEXT NOT NULL,
    written_at TEXT NOT NULL,
    body TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS notes_by_sample ON notes (sample_name, written_at);
CREATE TABLE IF NOT EXISTS links (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    from_id INTEGER NOT NULL,
    to_id INTEGER NOT NULL,
    link_type TEXT NOT NULL,
    created_by TEXT NOT NULL,
    UNIQUE (from_id, to_id, link_type)
);
CREATE INDEX IF NOT EXISTS links_by_to ON links (to_id, link_type);
CREATE TABLE IF NOT EXISTS reports (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    body TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS stamp_batches (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    batch_date TEXT NOT NULL,
    root TEXT NOT NULL,
    leaves TEXT NOT NULL,
    submitted_at TEXT,
    backend_receipt TEXT
);
CREATE TABLE IF NOT EXISTS stamp_members (
    entry_id INTEGER PRIMARY KEY,
    digest TEXT NOT NULL,
    batch_id INTEGER NOT NULL REFERENCES stamp_batches(id)
);
CREATE INDEX IF NOT EXISTS stamp_members_by_digest ON stamp_members (digest);
)sql";

[[noreturn]] void storage_error(sqlite3* db, const std::string& what) {
    throw Error(ErrorCode::storage, what + ": " + sqlite3_errmsg(db));
}

void exec(sqlite3* db, const std::string& sql) {
    char* msg = nullptr;
    if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &msg) != SQLITE_OK) {
        std::string text = msg ? msg : "unknown";
        sqlite3_free(msg);
        throw Error(ErrorCode::storage, "sql failed (" + text + "): " + sql.substr(0, 60));
    }
}

class Statement {
public:
    Statement(sqlite3* db, std::string_view sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr) !=
            SQLITE_OK) {
            storage_error(db, "prepare");
        }
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    Statement& bind(int i, std::string_view v) {
        sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
        return *this;
    }
    Statement& bind(int i, std::int64_t v) {
        sqlite3_bind_int64(stmt_, i, v);
        return *this;
    }
    Statement& bind(int i, Timestamp t) { return bind(i, format_iso(t)); }
    Statement& bind_null(int i) {
        sqlite3_bind_null(stmt_, i);
        return *this;
    }

    bool step() {
        int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        if (rc == SQLITE_CONSTRAINT) throw Error(ErrorCode::duplicate_key, sqlite3_errmsg(db_));
        storage_error(db_, "step");
    }
    void run() {
        while (step()) {
        }
    }

    int columns() const { return sqlite3_column_count(stmt_); }
    std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
    bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
    std::string text(int col) const {
        auto* p = sqlite3_column_text(stmt_, col);
        return p ? std::string(reinterpret_cast<const char*>(p),
                               static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
                 : std::string();
    }
    Timestamp time(int col) const {
        auto t = parse_iso(text(col));
        if (!t) throw Error(ErrorCode::storage, "corrupt timestamp in store");
        return *t;
    }

private:
    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

std::string join_extensions(const std::set<std::string>& exts) {
    std::string out;
    for (const auto& e : exts) {
        if (!out.empty()) out += ',';
        out += e;
    }
    return out;
}

std::set<std::string> split_extensions(const std::string& s) {
    std::set<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(item);
    }
    return out;
}

std::string like_pattern(std::string_view needle) {
    std::string out = "%";
    for (char c : needle) {
        if (c == '%' || c == '_' || c == '\\') out += '\\';
        out += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    }
    return out + "%";
}

constexpr const char* kEntryColumns =
    "e.id, e.kind, e.device_code, e.sample_name, e.observed_at, e.file_path, e.description, "
    "e.extension, e.created_at";

CatalogEntry read_entry(const Statement& s) {
    CatalogEntry e;
    e.id = s.integer(0);
    e.kind = tree_kind_from_string(s.text(1)).value_or(TreeKind::main);
    e.device_code = s.text(2);
    e.sample_name = s.text(3);
    e.observed_at = s.time(4);
    e.file_path = s.text(5);
    e.description = s.text(6);
    e.extension = s.text(7);
    e.created_at = s.time(8);
    return e;
}

Link read_link(const Statement& s) {
    Link l;
    l.id = s.integer(0);
    l.from_id = s.integer(1);
    l.to_id = s.integer(2);
    l.link_type = link_type_from_string(s.text(3)).value_or(LinkType::entry_entry);
    l.created_by = link_origin_from_string(s.text(4)).value_or(LinkOrigin::manual);
    return l;
}

std::vector<Digest> decode_leaves(const std::string& s) {
    std::vector<Digest> out;
    for (std::size_t i = 0; i + 64 <= s.size(); i += 64) {
        auto d = digest_from_hex(std::string_view(s).substr(i, 64));
        if (!d) throw Error(ErrorCode::storage, "corrupt batch leaves");
        out.push_back(*d);
    }
    return out;
}

}  // namespace

std::string_view to_string(LinkType t) noexcept {
    switch (t) {
        case LinkType::main_sub: return "main_sub";
        case LinkType::entry_note: return "entry_note";
        case LinkType::entry_analysis: return "entry_analysis";
        case LinkType::entry_entry: return "entry_entry";
    }
    return "entry_entry";
}

std::optional<LinkType> link_type_from_string(std::string_view s) noexcept {
    if (s == "main_sub") return LinkType::main_sub;
    if (s == "entry_note") return LinkType::entry_note;
    if (s == "entry_analysis") return LinkType::entry_analysis;
    if (s == "entry_entry") return LinkType::entry_entry;
    return std::nullopt;
}

std::string_view to_string(LinkOrigin o) noexcept {
    return o == LinkOrigin::automatic ? "auto" : "manual";
}

std::optional<LinkOrigin> link_origin_from_string(std::string_view s) noexcept {
    if (s == "auto") return LinkOrigin::automatic;
    if (s == "manual") return LinkOrigin::manual;
    return std::nullopt;
}

const PathRule* PathRuleSet::match(std::string_view relative_path, TreeKind kind) const {
    const PathRule* best = nullptr;
    for (const auto& r : rules) {
        if (r.tree_kind != kind) continue;
        std::string_view root = r.root_subpath;
        while (!root.empty() && root.back() == '/') root.remove_suffix(1);
        if (relative_path.size() <= root.size() || relative_path.substr(0, root.size()) != root ||
            relative_path[root.size()] != '/') {
            continue;
        }
        if (!best || root.size() > best->root_subpath.size()) best = &r;
    }
    return best;
}

class Catalog::ReadGuard {
public:
    explicit ReadGuard(const Catalog& c) {
        if (c.writer_.load() != std::this_thread::get_id()) lock_ = std::shared_lock(c.mutex_);
    }

private:
    std::shared_lock<std::shared_mutex> lock_;
};

Catalog::Catalog(const std::filesystem::path& store_path) : clock_(now_local) {
    int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
    if (sqlite3_open_v2(store_path.string().c_str(), &db_, flags, nullptr) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        throw Error(ErrorCode::storage, "cannot open store " + store_path.string() + ": " + msg);
    }
    try {
        sqlite3_busy_timeout(db_, 5000);
        exec(db_, "PRAGMA journal_mode=WAL; PRAGMA synchronous=NORMAL; PRAGMA foreign_keys=ON;");
        Statement v(db_, "PRAGMA user_version");
        v.step();
        auto version = v.integer(0);
        if (version != 0 && version != schema_version) {
            throw Error(ErrorCode::storage, "store schema version " + std::to_string(version) +
                                                " is not supported (expected " +
                                                std::to_string(schema_version) + ")");
        }
        exec(db_, "BEGIN");
        exec(db_, kSchema);
        Statement count(db_, "SELECT COUNT(*) FROM id_sequence");
        count.step();
        if (count.integer(0) == 0) exec(db_, "INSERT INTO id_sequence (next_id) VALUES (1)");
        exec(db_, "PRAGMA user_version=" + std::to_string(schema_version));
        exec(db_, "COMMIT");
    } catch (...) {
        sqlite3_close(db_);
        throw;
    }
}

Catalog::~Catalog() { sqlite3_close(db_); }

void Catalog::set_clock(std::function<Timestamp()> clock) { clock_ = std::move(clock); }

void Catalog::begin_write() {
    exec(db_, write_depth_ == 0 ? std::string("BEGIN IMMEDIATE")
                                : "SAVEPOINT sp" + std::to_string(write_depth_));
    ++write_depth_;
}

void Catalog::commit_write() {
    --write_depth_;
    exec(db_, write_depth_ == 0 ? std::string("COMMIT")
                                : "RELEASE sp" + std::to_string(write_depth_));
}

void Catalog::rollback_write() {
    --write_depth_;
    try {
        if (write_depth_ == 0) {
            exec(db_, "ROLLBACK");
        } else {
            auto sp = "sp" + std::to_string(write_depth_);
            exec(db_, "ROLLBACK TO " + sp + "; RELEASE " + sp);
        }
    } catch (const Error&) {
        // The original exception is the one worth reporting.
    }
}

EntryId Catalog::next_id() {
    Statement s(db_, "UPDATE id_sequence SET next_id = next_id + 1 RETURNING next_id - 1");
    if (!s.step()) throw Error(ErrorCode::storage, "id sequence missing");
    auto id = s.integer(0);
    s.run();
    return id;
}

Sample Catalog::register_sample(const std::string& name, const std::string& kind,
                                const std::map<std::string, std::string>& properties) {
    if (!validate_sample_name(name)) {
        throw Error(ErrorCode::invalid_argument,
                    "sample name '" + name + "' must match two letters, underscore, two digits");
    }
    return write([&] {
        Statement exists(db_, "SELECT 1 FROM samples WHERE name = ?");
        exists.bind(1, name);
        if (exists.step()) throw Error(ErrorCode::duplicate_key, "sample " + name + " exists");
        Sample s{name, kind, properties, clock_()};
        Statement ins(db_, "INSERT INTO samples (name, kind, created_at) VALUES (?, ?, ?)");
        ins.bind(1, name).bind(2, kind).bind(3, s.created_at).run();
        for (const auto& [k, v] : properties) {
            Statement p(db_,
                        "INSERT INTO sample_properties (sample_name, key, value) VALUES (?, ?, ?)");
            p.bind(1, name).bind(2, k).bind(3, v).run();
        }
        return s;
    });
}

std::optional<Sample> Catalog::find_sample(const std::string& name) const {
    ReadGuard guard(*this);
    Statement s(db_, "SELECT name, kind, created_at FROM samples WHERE name = ?");
    s.bind(1, name);
    if (!s.step()) return std::nullopt;
    Sample out{s.text(0), s.text(1), {}, s.time(2)};
    Statement p(db_, "SELECT key, value FROM sample_properties WHERE sample_name = ?");
    p.bind(1, name);
    while (p.step()) out.properties[p.text(0)] = p.text(1);
    return out;
}

std::vector<Sample> Catalog::samples() const {
    ReadGuard guard(*this);
    std::vector<Sample> out;
    Statement s(db_, "SELECT name, kind, created_at FROM samples ORDER BY name");
    while (s.step()) out.push_back(Sample{s.text(0), s.text(1), {}, s.time(2)});
    Statement p(db_, "SELECT sample_name, key, value FROM sample_properties");
    while (p.step()) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const Sample& x) { return x.name == p.text(0); });
        if (it != out.end()) it->properties[p.text(1)] = p.text(2);
    }
    return out;
}

PathRuleSet Catalog::register_path_rule(const PathRule& rule) {
    if (!validate_device_code(rule.device_code)) {
        throw Error(ErrorCode::invalid_argument,
                    "device code '" + rule.device_code + "' must be three capital letters");
    }
    if (rule.allowed_extensions.empty()) {
        throw Error(ErrorCode::invalid_argument, "a path rule needs at least one extension");
    }
    for (const auto& e : rule.allowed_extensions) {
        bool ok = !e.empty() && std::none_of(e.begin(), e.end(), [](char c) {
            return c == '.' || c == ',' || (c >= 'A' && c <= 'Z');
        });
        if (!ok) {
            throw Error(ErrorCode::invalid_argument,
                        "extension '" + e + "' must be lowercase without dots");
        }
    }
    if (rule.root_subpath.empty()) {
        throw Error(ErrorCode::invalid_argument, "a path rule needs a root subpath");
    }
    write([&] {
        Statement ins(db_,
                      "INSERT INTO path_rules (device_code, tree_kind, root_subpath, "
                      "allowed_extensions, instrument_variant) VALUES (?, ?, ?, ?, ?)");
        ins.bind(1, rule.device_code)
            .bind(2, to_string(rule.tree_kind))
            .bind(3, rule.root_subpath)
            .bind(4, join_extensions(rule.allowed_extensions))
            .bind(5, rule.instrument_variant);
        try {
            ins.run();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::duplicate_key) throw;
            throw Error(ErrorCode::duplicate_key, "a " + std::string(to_string(rule.tree_kind)) +
                                                      " rule for " + rule.device_code +
                                                      " already exists");
        }
    });
    return path_rules();
}

PathRuleSet Catalog::path_rules() const {
    ReadGuard guard(*this);
    PathRuleSet out;
    Statement s(db_,
                "SELECT device_code, tree_kind, root_subpath, allowed_extensions, "
                "instrument_variant FROM path_rules ORDER BY device_code, tree_kind");
    while (s.step()) {
        out.rules.push_back(PathRule{s.text(0), tree_kind_from_string(s.text(1)).value(),
                                     s.text(2), split_extensions(s.text(3)), s.text(4)});
    }
    return out;
}

UpsertResult Catalog::upsert_entry(const ParsedFileMeta& meta, TreeKind kind,
                                   const ExtraMap& extra) {
    if (!meta.observed_at) {
        throw Error(ErrorCode::invalid_argument,
                    "entry for " + meta.relative_path + " has no observation time");
    }
    if (!validate_device_code(meta.device_code) || !validate_sample_name(meta.sample_name)) {
        throw Error(ErrorCode::invalid_argument, "unvalidated metadata for " + meta.relative_path);
    }
    return write([&]() -> UpsertResult {
        Statement existing(db_, std::string("SELECT e.id FROM entries e WHERE e.file_path = ?"));
        existing.bind(1, meta.relative_path);
        if (existing.step()) return UpsertResult{get_entry(existing.integer(0)), false};

        Statement sample(db_, "SELECT 1 FROM samples WHERE name = ?");
        sample.bind(1, meta.sample_name);
        if (!sample.step()) {
            throw Error(ErrorCode::unknown_sample, "unknown sample " + meta.sample_name);
        }

        CatalogEntry e;
        e.id = next_id();
        e.kind = kind;
        e.device_code = meta.device_code;
        e.sample_name = meta.sample_name;
        e.observed_at = *meta.observed_at;
        e.file_path = meta.relative_path;
        e.description = meta.description;
        e.extension = meta.extension;
        e.extra = extra;
        e.created_at = clock_();

        Statement ins(db_,
                      "INSERT INTO entries (id, kind, device_code, sample_name, observed_at, "
                      "file_path, description, extension, created_at) "
                      "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)");
        ins.bind(1, e.id)
            .bind(2, to_string(e.kind))
            .bind(3, e.device_code)
            .bind(4, e.sample_name)
            .bind(5, e.observed_at)
            .bind(6, e.file_path)
            .bind(7, e.description)
            .bind(8, e.extension)
            .bind(9, e.created_at)
            .run();
        for (const auto& [k, v] : extra) {
            Statement x(db_, "INSERT INTO entry_extra (entry_id, key, value) VALUES (?, ?, ?)");
            x.bind(1, e.id).bind(2, k).bind(3, v).run();
        }
        return UpsertResult{std::move(e), true};
    });
}

std::optional<CatalogEntry> Catalog::find_entry(EntryId id) const {
    ReadGuard guard(*this);
    Statement s(db_, std::string("SELECT ") + kEntryColumns + " FROM entries e WHERE e.id = ?");
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    auto e = read_entry(s);
    Statement x(db_, "SELECT key, value FROM entry_extra WHERE entry_id = ?");
    x.bind(1, id);
    while (x.step()) e.extra[x.text(0)] = x.text(1);
    return e;
}

CatalogEntry Catalog::get_entry(EntryId id) const {
    auto e = find_entry(id);
    if (!e) throw Error(ErrorCode::not_found, "no entry with id " + std::to_string(id));
    return *e;
}

std::vector<CatalogEntry> Catalog::query_entries(const EntryFilter& f) const {
    if (f.from && f.to && *f.from > *f.to) {
        throw Error(ErrorCode::invalid_range,
                    "time range start " + format_iso(*f.from) + " is after end " +
                        format_iso(*f.to));
    }
    std::string sql = " FROM entries e WHERE 1=1";
    std::vector<std::string> params;
    if (f.sample) {
        sql += " AND e.sample_name = ?";
        params.push_back(*f.sample);
    }
    if (f.device) {
        sql += " AND e.device_code = ?";
        params.push_back(*f.device);
    }
    if (f.kind) {
        sql += " AND e.kind = ?";
        params.emplace_back(to_string(*f.kind));
    }
    if (f.from) {
        sql += " AND e.observed_at >= ?";
        params.push_back(format_iso(*f.from));
    }
    if (f.to) {
        sql += " AND e.observed_at <= ?";
        params.push_back(format_iso(*f.to));
    }
    if (f.text) {
        sql +=
            " AND (lower(e.description) LIKE ? ESCAPE '\\' OR EXISTS ("
            "SELECT 1 FROM links l JOIN notes n ON n.id = l.to_id "
            "WHERE l.from_id = e.id AND l.link_type = 'entry_note' "
            "AND lower(n.body) LIKE ? ESCAPE '\\'))";
        params.push_back(like_pattern(*f.text));
        params.push_back(like_pattern(*f.text));
    }
    if (f.extra_key_value) {
        sql +=
            " AND EXISTS (SELECT 1 FROM entry_extra x WHERE x.entry_id = e.id "
            "AND x.key = ? AND x.value = ?)";
        params.push_back(f.extra_key_value->first);
        params.push_back(f.extra_key_value->second);
    }

    ReadGuard guard(*this);
    Statement s(db_, std::string("SELECT ") + kEntryColumns + sql +
                         " ORDER BY e.observed_at DESC, e.id DESC");
    for (std::size_t i = 0; i < params.size(); ++i) s.bind(static_cast<int>(i + 1), params[i]);

    std::vector<CatalogEntry> out;
    while (s.step()) out.push_back(read_entry(s));
    if (out.empty()) return out;

    Statement x(db_, "SELECT x.entry_id, x.key, x.value FROM entry_extra x "
                     "WHERE x.entry_id IN (SELECT e.id" + sql + ")");
    for (std::size_t i = 0; i < params.size(); ++i) x.bind(static_cast<int>(i + 1), params[i]);
    std::map<EntryId, std::size_t> index;
    for (std::size_t i = 0; i < out.size(); ++i) index[out[i].id] = i;
    while (x.step()) {
        auto it = index.find(x.integer(0));
        if (it != index.end()) out[it->second].extra[x.text(1)] = x.text(2);
    }
    return out;
}

bool Catalog::delete_entry(EntryId id) {
    return write([&] {
        if (!id_exists_as_entry(id)) {
            throw Error(ErrorCode::not_found, "no entry with id " + std::to_string(id));
        }
        Statement(db_, "DELETE FROM links WHERE from_id = ?1 OR to_id = ?1").bind(1, id).run();
        Statement(db_, "DELETE FROM entry_extra WHERE entry_id = ?").bind(1, id).run();
        Statement(db_, "DELETE FROM entries WHERE id = ?").bind(1, id).run();
        return true;
    });
}

bool Catalog::id_exists_as_entry(EntryId id) const {
    Statement s(db_, "SELECT 1 FROM entries WHERE id = ?");
    s.bind(1, id);
    return s.step();
}

bool Catalog::id_exists_as_note(EntryId id) const {
    Statement s(db_, "SELECT 1 FROM notes WHERE id = ?");
    s.bind(1, id);
    return s.step();
}

Note Catalog::add_note(const std::string& sample, Timestamp written_at, const std::string& body) {
    return write([&] {
        Statement exists(db_, "SELECT 1 FROM samples WHERE name = ?");
        exists.bind(1, sample);
        if (!exists.step()) throw Error(ErrorCode::unknown_sample, "unknown sample " + sample);
        Note n{next_id(), sample, written_at, body};
        Statement ins(db_, "INSERT INTO notes (id, sample_name, written_at, body) VALUES (?,?,?,?)");
        ins.bind(1, n.id).bind(2, n.sample_name).bind(3, n.written_at).bind(4, n.body).run();
        return n;
    });
}

Note Catalog::get_note(EntryId id) const {
    ReadGuard guard(*this);
    Statement s(db_, "SELECT id, sample_name, written_at, body FROM notes WHERE id = ?");
    s.bind(1, id);
    if (!s.step()) throw Error(ErrorCode::not_found, "no note with id " + std::to_string(id));
    return Note{s.integer(0), s.text(1), s.time(2), s.text(3)};
}

std::vector<Note> Catalog::notes_for_sample(const std::string& sample) const {
    ReadGuard guard(*this);
    Statement s(db_,
                "SELECT id, sample_name, written_at, body FROM notes WHERE sample_name = ? "
                "ORDER BY written_at, id");
    s.bind(1, sample);
    std::vector<Note> out;
    while (s.step()) out.push_back(Note{s.integer(0), s.text(1), s.time(2), s.text(3)});
    return out;
}

Link Catalog::add_link(EntryId from, EntryId to, LinkType type, LinkOrigin created_by) {
    return write([&] {
        auto from_entry = find_entry(from);
        if (!from_entry) throw Error(ErrorCode::not_found, "no entry with id " + std::to_string(from));
        switch (type) {
            case LinkType::main_sub: {
                auto to_entry = find_entry(to);
                if (!to_entry) {
                    throw Error(ErrorCode::not_found, "no entry with id " + std::to_string(to));
                }
                if (from_entry->kind != TreeKind::main || to_entry->kind != TreeKind::sub) {
                    throw Error(ErrorCode::invalid_argument,
                                "main_sub links run from a main entry to a sub entry");
                }
                break;
            }
            case LinkType::entry_note:
                if (!id_exists_as_note(to)) {
                    throw Error(ErrorCode::not_found, "no note with id " + std::to_string(to));
                }
                break;
            case LinkType::entry_analysis:
            case LinkType::entry_entry:
                if (!id_exists_as_entry(to)) {
                    throw Error(ErrorCode::not_found, "no entry with id " + std::to_string(to));
                }
                if (from == to) throw Error(ErrorCode::invalid_argument, "self link");
                break;
        }
        Statement ins(db_,
                      "INSERT INTO links (from_id, to_id, link_type, created_by) "
                      "VALUES (?, ?, ?, ?) RETURNING id");
        ins.bind(1, from).bind(2, to).bind(3, to_string(type)).bind(4, to_string(created_by));
        Link l{0, from, to, type, created_by};
        try {
            ins.step();
            l.id = ins.integer(0);
            ins.run();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::duplicate_key) throw;
            throw Error(ErrorCode::duplicate_key, "link " + std::to_string(from) + " -> " +
                                                      std::to_string(to) + " (" +
                                                      std::string(to_string(type)) +
                                                      ") already exists");
        }
        return l;
    });
}

void Catalog::remove_link(std::int64_t link_id) {
    write([&] {
        Statement s(db_, "DELETE FROM links WHERE id = ? RETURNING id");
        s.bind(1, link_id);
        if (!s.step()) throw Error(ErrorCode::not_found, "no link " + std::to_string(link_id));
        s.run();
    });
}

std::vector<Link> Catalog::links_for(EntryId id) const {
    ReadGuard guard(*this);
    Statement s(db_,
                "SELECT id, from_id, to_id, link_type, created_by FROM links "
                "WHERE from_id = ?1 OR to_id = ?1 ORDER BY id");
    s.bind(1, id);
    std::vector<Link> out;
    while (s.step()) out.push_back(read_link(s));
    return out;
}

std::vector<Link> Catalog::links_to(EntryId to, LinkType type) const {
    ReadGuard guard(*this);
    Statement s(db_,
                "SELECT id, from_id, to_id, link_type, created_by FROM links "
                "WHERE to_id = ? AND link_type = ? ORDER BY id");
    s.bind(1, to).bind(2, to_string(type));
    std::vector<Link> out;
    while (s.step()) out.push_back(read_link(s));
    return out;
}

std::vector<Link> Catalog::links_from(EntryId from, LinkType type) const {
    ReadGuard guard(*this);
    Statement s(db_,
                "SELECT id, from_id, to_id, link_type, created_by FROM links "
                "WHERE from_id = ? AND link_type = ? ORDER BY id");
    s.bind(1, from).bind(2, to_string(type));
    std::vector<Link> out;
    while (s.step()) out.push_back(read_link(s));
    return out;
}

std::vector<Link> Catalog::all_links() const {
    ReadGuard guard(*this);
    Statement s(db_, "SELECT id, from_id, to_id, link_type, created_by FROM links ORDER BY id");
    std::vector<Link> out;
    while (s.step()) out.push_back(read_link(s));
    return out;
}

void Catalog::save_report(const std::string& report_json) {
    write([&] {
        Statement(db_, "INSERT INTO reports (body) VALUES (?)").bind(1, report_json).run();
        Statement trim(db_,
                       "DELETE FROM reports WHERE id NOT IN "
                       "(SELECT id FROM reports ORDER BY id DESC LIMIT ?)");
        trim.bind(1, static_cast<std::int64_t>(report_history)).run();
    });
}

std::optional<std::string> Catalog::latest_report() const {
    ReadGuard guard(*this);
    Statement s(db_, "SELECT body FROM reports ORDER BY id DESC LIMIT 1");
    if (!s.step()) return std::nullopt;
    return s.text(0);
}

std::size_t Catalog::report_count() const {
    ReadGuard guard(*this);
    Statement s(db_, "SELECT COUNT(*) FROM reports");
    s.step();
    return static_cast<std::size_t>(s.integer(0));
}

std::vector<CatalogEntry> Catalog::unstamped_entries() const {
    ReadGuard guard(*this);
    Statement s(db_, std::string("SELECT ") + kEntryColumns +
                         " FROM entries e WHERE e.id NOT IN (SELECT entry_id FROM stamp_members)"
                         " ORDER BY e.id");
    std::vector<CatalogEntry> out;
    while (s.step()) out.push_back(read_entry(s));
    return out;
}

std::int64_t Catalog::insert_batch(const StampBatch& batch,
                                   const std::vector<std::pair<EntryId, Digest>>& members) {
    return write([&] {
        std::string leaves;
        for (const auto& l : batch.leaves) leaves += to_hex(l);
        Statement ins(db_,
                      "INSERT INTO stamp_batches (batch_date, root, leaves) VALUES (?, ?, ?) "
                      "RETURNING id");
        ins.bind(1, format_date(batch.batch_date)).bind(2, to_hex(batch.root)).bind(3, leaves);
        ins.step();
        auto id = ins.integer(0);
        ins.run();
        for (const auto& [entry, digest] : members) {
            Statement m(db_,
                        "INSERT INTO stamp_members (entry_id, digest, batch_id) VALUES (?, ?, ?)");
            m.bind(1, entry).bind(2, to_hex(digest)).bind(3, id).run();
        }
        return id;
    });
}

void Catalog::mark_submitted(std::int64_t batch_id, Timestamp at, const std::string& receipt) {
    write([&] {
        Statement s(db_,
                    "UPDATE stamp_batches SET submitted_at = ?, backend_receipt = ? WHERE id = ?");
        s.bind(1, at).bind(2, receipt).bind(3, batch_id).run();
    });
}

namespace {

std::optional<StoredBatch> read_batch(Statement& s) {
    if (!s.step()) return std::nullopt;
    StoredBatch b;
    b.id = s.integer(0);
    auto date = parse_date(s.text(1));
    auto root = digest_from_hex(s.text(2));
    if (!date || !root) throw Error(ErrorCode::storage, "corrupt stamp batch");
    b.batch.batch_date = *date;
    b.batch.root = *root;
    b.batch.leaves = decode_leaves(s.text(3));
    if (!s.is_null(4)) b.batch.submitted_at = s.time(4);
    if (!s.is_null(5)) b.batch.backend_receipt = s.text(5);
    return b;
}

}  // namespace

std::optional<StoredBatch> Catalog::pending_batch() const {
    ReadGuard guard(*this);
    Statement s(db_,
                "SELECT id, batch_date, root, leaves, submitted_at, backend_receipt "
                "FROM stamp_batches WHERE submitted_at IS NULL ORDER BY id LIMIT 1");
    return read_batch(s);
}

std::optional<StoredBatch> Catalog::batch_containing(const Digest& digest) const {
    ReadGuard guard(*this);
    Statement s(db_,
                "SELECT b.id, b.batch_date, b.root, b.leaves, b.submitted_at, b.backend_receipt "
                "FROM stamp_batches b JOIN stamp_members m ON m.batch_id = b.id "
                "WHERE m.digest = ? AND b.submitted_at IS NOT NULL ORDER BY b.id LIMIT 1");
    s.bind(1, to_hex(digest));
    return read_batch(s);
}

std::string Catalog::snapshot() const {
    ReadGuard guard(*this);
    std::ostringstream out;
    auto dump = [&](const char* title, const char* sql) {
        out << "[" << title << "]\n";
        Statement s(db_, sql);
        int cols = s.columns();
        while (s.step()) {
            for (int c = 0; c < cols; ++c) out << (c ? "\x1f" : "") << s.text(c);
            out << "\n";
        }
    };
    dump("id_sequence", "SELECT next_id FROM id_sequence");
    dump("samples", "SELECT name, kind, created_at FROM samples ORDER BY name");
    dump("sample_properties",
         "SELECT sample_name, key, value FROM sample_properties ORDER BY sample_name, key");
    dump("path_rules",
         "SELECT device_code, tree_kind, root_subpath, allowed_extensions, instrument_variant "
         "FROM path_rules ORDER BY device_code, tree_kind");
    dump("entries",
         "SELECT id, kind, device_code, sample_name, observed_at, file_path, description, "
         "extension, created_at FROM entries ORDER BY id");
    dump("entry_extra", "SELECT entry_id, key, value FROM entry_extra ORDER BY entry_id, key");
    dump("notes", "SELECT id, sample_name, written_at, body FROM notes ORDER BY id");
    dump("links", "SELECT id, from_id, to_id, link_type, created_by FROM links ORDER BY id");
    return out.str();
}

}  // namespace eln
