#include "eln/serialize.hpp"

#include "eln/error.hpp"

namespace eln {

namespace {

Timestamp require_time(const Json& j, const char* key) {
    auto t = parse_iso(j.at(key).get<std::string>());
    if (!t) throw Error(ErrorCode::invalid_argument, std::string("bad timestamp in ") + key);
    return *t;
}

Digest require_digest(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw Error(ErrorCode::invalid_proof, std::string("proof lacks '") + key + "'");
    }
    auto d = digest_from_hex(j.at(key).get<std::string>());
    if (!d) throw Error(ErrorCode::invalid_proof, std::string("'") + key + "' is not a digest");
    return *d;
}

}  // namespace

Json to_json(const ParsedFileMeta& m) {
    Json j{{"device_code", m.device_code},
           {"sample_name", m.sample_name},
           {"observed_at", nullptr},
           {"description", m.description},
           {"extension", m.extension},
           {"relative_path", m.relative_path}};
    if (m.observed_at) j["observed_at"] = format_iso(*m.observed_at);
    return j;
}

Json to_json(const CatalogEntry& e) {
    return Json{{"id", e.id},
                {"kind", to_string(e.kind)},
                {"device_code", e.device_code},
                {"sample_name", e.sample_name},
                {"observed_at", format_iso(e.observed_at)},
                {"file_path", e.file_path},
                {"description", e.description},
                {"extension", e.extension},
                {"extra", e.extra},
                {"created_at", format_iso(e.created_at)}};
}

Json to_json(const std::vector<CatalogEntry>& entries) {
    Json j = Json::array();
    for (const auto& e : entries) j.push_back(to_json(e));
    return j;
}

Json to_json(const Sample& s) {
    return Json{{"name", s.name},
                {"kind", s.kind},
                {"properties", s.properties},
                {"created_at", format_iso(s.created_at)}};
}

Json to_json(const PathRule& r) {
    return Json{{"device_code", r.device_code},
                {"tree_kind", to_string(r.tree_kind)},
                {"root_subpath", r.root_subpath},
                {"allowed_extensions", r.allowed_extensions},
                {"instrument_variant", r.instrument_variant}};
}

Json to_json(const PathRuleSet& rules) {
    Json j = Json::array();
    for (const auto& r : rules.rules) j.push_back(to_json(r));
    return Json{{"rules", j}};
}

Json to_json(const Note& n) {
    return Json{{"id", n.id},
                {"sample_name", n.sample_name},
                {"written_at", format_iso(n.written_at)},
                {"body", n.body}};
}

Json to_json(const Link& l) {
    return Json{{"id", l.id},
                {"from_id", l.from_id},
                {"to_id", l.to_id},
                {"link_type", to_string(l.link_type)},
                {"created_by", to_string(l.created_by)}};
}

Json to_json(const std::vector<Link>& links) {
    Json j = Json::array();
    for (const auto& l : links) j.push_back(to_json(l));
    return j;
}

Json to_json(const HistoryItem& item) {
    return std::visit(
        [](const auto& x) {
            Json j = to_json(x);
            j["type"] = std::is_same_v<std::decay_t<decltype(x)>, Note> ? "note" : "entry";
            return j;
        },
        item.item);
}

Json to_json(const std::vector<HistoryItem>& items) {
    Json j = Json::array();
    for (const auto& i : items) j.push_back(to_json(i));
    return j;
}

Json to_json(const IngestReport& r) {
    Json skipped = Json::array();
    for (const auto& s : r.skipped) {
        skipped.push_back(Json{{"path", s.path}, {"reason", to_string(s.reason)}});
    }
    return Json{{"started_at", format_iso(r.started_at)},
                {"now_reference", format_iso(r.now_reference)},
                {"scanned", r.scanned},
                {"created", r.created},
                {"duplicates", r.duplicates},
                {"skipped", skipped},
                {"links_created", r.links_created},
                {"entries", r.entries}};
}

IngestReport report_from_json(const Json& j) {
    try {
        IngestReport r;
        r.started_at = require_time(j, "started_at");
        r.now_reference = require_time(j, "now_reference");
        r.scanned = j.at("scanned").get<std::size_t>();
        r.created = j.at("created").get<std::size_t>();
        r.duplicates = j.at("duplicates").get<std::size_t>();
        r.links_created = j.at("links_created").get<std::size_t>();
        r.entries = j.at("entries").get<std::vector<EntryId>>();
        for (const auto& s : j.at("skipped")) {
            SkippedFile f;
            f.path = s.at("path").get<std::string>();
            auto reason = s.at("reason").get<std::string>();
            for (auto candidate : {SkipReason::too_old, SkipReason::bad_extension,
                                   SkipReason::parse_failure, SkipReason::unknown_sample,
                                   SkipReason::unmatched_rule}) {
                if (to_string(candidate) == reason) f.reason = candidate;
            }
            r.skipped.push_back(std::move(f));
        }
        return r;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("malformed report: ") + e.what());
    }
}

PathRule rule_from_json(const Json& j) {
    try {
        PathRule r;
        r.device_code = j.at("device_code").get<std::string>();
        auto kind = tree_kind_from_string(j.value("tree_kind", std::string("main")));
        if (!kind) throw Error(ErrorCode::invalid_argument, "tree_kind must be main or sub");
        r.tree_kind = *kind;
        r.root_subpath = j.at("root_subpath").get<std::string>();
        for (const auto& e : j.at("allowed_extensions")) {
            r.allowed_extensions.insert(e.get<std::string>());
        }
        r.instrument_variant = j.value("instrument_variant", std::string());
        return r;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("malformed rule: ") + e.what());
    }
}

Json to_json(const TimeSeriesTable& t) {
    Json columns = Json::object();
    for (const auto& [name, values] : t.columns) columns[name] = values;
    return Json{{"time_s", t.time_s}, {"columns", columns}};
}

Json to_json(const PlotPayload& p) {
    Json subs = Json::array();
    for (const auto& s : p.subs) {
        Json j = to_json(s.table);
        subs.push_back(Json{{"entry_id", s.entry_id},
                            {"offset_s", s.offset_s},
                            {"time_s", j["time_s"]},
                            {"columns", j["columns"]}});
    }
    return Json{{"main", to_json(p.main)}, {"subs", subs}};
}

Json to_json(const StampBatch& b) {
    Json leaves = Json::array();
    for (const auto& l : b.leaves) leaves.push_back(to_hex(l));
    return Json{{"batch_date", format_date(b.batch_date)},
                {"leaves", leaves},
                {"root", to_hex(b.root)},
                {"submitted_at", b.submitted_at ? Json(format_iso(*b.submitted_at)) : Json()},
                {"backend_receipt", b.backend_receipt ? Json(*b.backend_receipt) : Json()}};
}

Json to_json(const StampProof& p) {
    Json path = Json::array();
    for (const auto& s : p.path) {
        path.push_back(Json{{"sibling", to_hex(s.sibling)},
                            {"side", s.side == Side::left ? "left" : "right"}});
    }
    return Json{{"leaf", to_hex(p.leaf)},
                {"path", path},
                {"root", to_hex(p.root)},
                {"batch_date", format_date(p.batch_date)}};
}

StampProof proof_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_proof, "proof must be a JSON object");
    StampProof p;
    p.leaf = require_digest(j, "leaf");
    p.root = require_digest(j, "root");
    if (!j.contains("batch_date") || !j["batch_date"].is_string()) {
        throw Error(ErrorCode::invalid_proof, "proof lacks 'batch_date'");
    }
    auto date = parse_date(j["batch_date"].get<std::string>());
    if (!date) throw Error(ErrorCode::invalid_proof, "'batch_date' is not a date");
    p.batch_date = *date;
    if (!j.contains("path") || !j["path"].is_array()) {
        throw Error(ErrorCode::invalid_proof, "proof lacks 'path'");
    }
    for (const auto& step : j["path"]) {
        if (!step.is_object()) throw Error(ErrorCode::invalid_proof, "path step must be an object");
        ProofStep s;
        s.sibling = require_digest(step, "sibling");
        auto side = step.value("side", std::string());
        if (side == "left") {
            s.side = Side::left;
        } else if (side == "right") {
            s.side = Side::right;
        } else {
            throw Error(ErrorCode::invalid_proof, "path step side must be left or right");
        }
        p.path.push_back(s);
    }
    return p;
}

}  // namespace eln
