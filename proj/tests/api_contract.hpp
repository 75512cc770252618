#pragma once

#include <httplib.h>

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "eln/api.hpp"
#include "eln/error.hpp"
#include "eln/serialize.hpp"
#include "trees.hpp"

namespace eln::testing {

// Two engines over the same data tree: one is served over HTTP, the twin is
// driven directly. Every request must answer exactly what the twin returns.
struct ContractCheck {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct ContractEnv {
    TempDir tree;
    TempDir store;
    std::unique_ptr<Engine> served;
    std::unique_ptr<Engine> twin;

    static Timestamp fixed() { return ts("2021-02-02T08:00:00"); }

    std::unique_ptr<Engine> make(const std::string& db, const std::string& cors = "") {
        Config c;
        c.data_root = tree.path();
        c.store_path = store / db;
        c.api.cors_origin = cors;
        auto e = std::make_unique<Engine>(c, std::make_unique<MockStampBackend>(fixed));
        e->catalog().set_clock(fixed);
        return e;
    }

    explicit ContractEnv(const std::string& cors = "") {
        auto t0 = ts("2021-02-01T17:17:00");
        place(tree.path(), TreeKind::main, t0, "BA_01", "osz_wasser", "csv", "t,h\n0,1\n1,1.5\n");
        place(tree.path(), TreeKind::sub, t0 + std::chrono::minutes{10}, "BA_01", "pressure",
              "csv", "s,p\n0,10\n5,11\n");
        place(tree.path(), TreeKind::main, t0 + std::chrono::hours{1}, "BA_01", "photo", "png",
              "png");
        place(tree.path(), TreeKind::main, t0, "CC_01", "other", "csv", "t,h\n0,2\n");
        place(tree.path(), TreeKind::main, t0, "ZZ_99", "stranger", "csv", "t,h\n0,2\n");
        write_file(tree / "01_Main_Exp/01_OCA_35_XL/20211301/Probe_BA_01/080000_bad.csv");
        served = make("served.sqlite", cors);
        twin = make("twin.sqlite");
    }
};

struct ContractStep {
    std::string name;
    std::string method;
    std::string path;
    Json body;
    int success_status = 200;
    std::function<Json(Engine&)> expected;
    bool ignore_started_at = false;
};

inline std::vector<ContractStep> contract_steps() {
    using J = Json;
    auto rule_oca = J{{"device_code", "OCA"},
                      {"tree_kind", "main"},
                      {"root_subpath", "01_Main_Exp/" + kMainDevice},
                      {"allowed_extensions", {"csv", "png"}},
                      {"instrument_variant", "35_XL"}};
    auto rule_pre = J{{"device_code", "PRE"},
                      {"tree_kind", "sub"},
                      {"root_subpath", "02_Sub_Exp/" + kSubDevice},
                      {"allowed_extensions", {"csv"}}};
    std::vector<ContractStep> s;
    s.push_back({"GET /api/health", "GET", "/api/health", nullptr, 200, [](Engine&) {
                     return J{{"status", "ok"}, {"schema_version", Catalog::schema_version}};
                 }});
    s.push_back({"POST /api/samples", "POST", "/api/samples",
                 J{{"name", "BA_01"}, {"kind", "liquid"}, {"properties", {{"vendor", "acme"}}}}, 201,
                 [](Engine& e) {
                     return to_json(e.catalog().register_sample("BA_01", "liquid", {{"vendor", "acme"}}));
                 }});
    s.push_back({"POST /api/samples (second)", "POST", "/api/samples", J{{"name", "CC_01"}}, 201,
                 [](Engine& e) { return to_json(e.catalog().register_sample("CC_01", "", {})); }});
    s.push_back({"POST /api/samples duplicate", "POST", "/api/samples", J{{"name", "BA_01"}}, 201,
                 [](Engine& e) { return to_json(e.catalog().register_sample("BA_01", "", {})); }});
    s.push_back({"POST /api/samples invalid name", "POST", "/api/samples", J{{"name", "ba1"}}, 201,
                 [](Engine& e) { return to_json(e.catalog().register_sample("ba1", "", {})); }});
    s.push_back({"GET /api/samples", "GET", "/api/samples", nullptr, 200, [](Engine& e) {
                     J out = J::array();
                     for (const auto& x : e.catalog().samples()) out.push_back(to_json(x));
                     return out;
                 }});
    s.push_back({"POST /api/rules", "POST", "/api/rules", rule_oca, 201, [rule_oca](Engine& e) {
                     return to_json(e.catalog().register_path_rule(rule_from_json(rule_oca)));
                 }});
    s.push_back({"POST /api/rules (sub)", "POST", "/api/rules", rule_pre, 201, [rule_pre](Engine& e) {
                     return to_json(e.catalog().register_path_rule(rule_from_json(rule_pre)));
                 }});
    s.push_back({"GET /api/rules", "GET", "/api/rules", nullptr, 200,
                 [](Engine& e) { return to_json(e.catalog().path_rules()); }});
    s.push_back({"POST /api/notes", "POST", "/api/notes",
                 J{{"sample_name", "BA_01"}, {"written_at", "2021-02-01T17:00:00"}, {"body", "degassed water"}},
                 201, [](Engine& e) {
                     return to_json(e.add_note("BA_01", ts("2021-02-01T17:00:00"), "degassed water"));
                 }});
    s.push_back({"POST /api/notes unknown sample", "POST", "/api/notes",
                 J{{"sample", "ZZ_99"}, {"written_at", "2021-02-01T17:00:00"}, {"body", "x"}}, 201,
                 [](Engine& e) { return to_json(e.add_note("ZZ_99", ts("2021-02-01T17:00:00"), "x")); }});
    s.push_back({"GET /api/reports/latest before ingest", "GET", "/api/reports/latest", nullptr, 200,
                 [](Engine& e) { return to_json(e.ingestor().latest_report()); }});
    ContractStep ingest{"POST /api/ingest", "POST", "/api/ingest", J{{"now", "2021-02-02T00:00:00"}}, 200,
                        [](Engine& e) { return to_json(e.ingest(ts("2021-02-02T00:00:00"))); }};
    ingest.ignore_started_at = true;
    s.push_back(ingest);
    ContractStep report{"GET /api/reports/latest", "GET", "/api/reports/latest", nullptr, 200,
                        [](Engine& e) { return to_json(e.ingestor().latest_report()); }};
    report.ignore_started_at = true;
    s.push_back(report);
    s.push_back({"GET /api/entries", "GET", "/api/entries", nullptr, 200,
                 [](Engine& e) { return to_json(e.catalog().query_entries({})); }});
    s.push_back({"GET /api/entries filtered", "GET",
                 "/api/entries?sample=BA_01&device=OCA&kind=main&from=2021-02-01T17:00:00&to=2021-02-01T18:00:00",
                 nullptr, 200, [](Engine& e) {
                     EntryFilter f;
                     f.sample = "BA_01";
                     f.device = "OCA";
                     f.kind = TreeKind::main;
                     f.from = ts("2021-02-01T17:00:00");
                     f.to = ts("2021-02-01T18:00:00");
                     return to_json(e.catalog().query_entries(f));
                 }});
    s.push_back({"GET /api/entries text", "GET", "/api/entries?q=DEGASSED", nullptr, 200, [](Engine& e) {
                     EntryFilter f;
                     f.text = "DEGASSED";
                     return to_json(e.catalog().query_entries(f));
                 }});
    s.push_back({"GET /api/entries extra", "GET", "/api/entries?extra_key=instrument_variant&extra_value=35_XL",
                 nullptr, 200, [](Engine& e) {
                     EntryFilter f;
                     f.extra_key_value = std::pair{std::string("instrument_variant"), std::string("35_XL")};
                     return to_json(e.catalog().query_entries(f));
                 }});
    s.push_back({"GET /api/entries inverted range", "GET",
                 "/api/entries?from=2021-02-02T00:00:00&to=2021-02-01T00:00:00", nullptr, 200,
                 [](Engine& e) {
                     EntryFilter f;
                     f.from = ts("2021-02-02T00:00:00");
                     f.to = ts("2021-02-01T00:00:00");
                     return to_json(e.catalog().query_entries(f));
                 }});
    // ids follow the shared sequence: note 1, then entries in path order,
    // so 2 is the BA_01 csv main and 3 the png main.
    s.push_back({"GET /api/entries/{id}", "GET", "/api/entries/2", nullptr, 200,
                 [](Engine& e) { return to_json(e.catalog().get_entry(2)); }});
    s.push_back({"GET /api/entries/{id} missing", "GET", "/api/entries/999", nullptr, 200,
                 [](Engine& e) { return to_json(e.catalog().get_entry(999)); }});
    s.push_back({"GET /api/entries/{id}/links", "GET", "/api/entries/2/links", nullptr, 200,
                 [](Engine& e) { return to_json(e.catalog().links_for(2)); }});
    s.push_back({"GET /api/entries/{id}/plot", "GET", "/api/entries/2/plot", nullptr, 200,
                 [](Engine& e) { return to_json(e.plot(2)); }});
    s.push_back({"GET /api/entries/{id}/plot not tabular", "GET", "/api/entries/3/plot", nullptr, 200,
                 [](Engine& e) { return to_json(e.plot(3)); }});
    s.push_back({"POST /api/links", "POST", "/api/links",
                 J{{"from_id", 2}, {"to_id", 3}, {"link_type", "entry_entry"}}, 201, [](Engine& e) {
                     return to_json(e.catalog().add_link(2, 3, LinkType::entry_entry, LinkOrigin::manual));
                 }});
    s.push_back({"POST /api/links duplicate", "POST", "/api/links",
                 J{{"from_id", 2}, {"to_id", 3}, {"link_type", "entry_entry"}}, 201, [](Engine& e) {
                     return to_json(e.catalog().add_link(2, 3, LinkType::entry_entry, LinkOrigin::manual));
                 }});
    s.push_back({"GET /api/samples/{name}/history", "GET", "/api/samples/BA_01/history", nullptr, 200,
                 [](Engine& e) { return to_json(e.linker().sample_history("BA_01")); }});
    s.push_back({"GET /api/samples/{name}/history unknown", "GET", "/api/samples/ZZ_99/history", nullptr,
                 200, [](Engine& e) { return to_json(e.linker().sample_history("ZZ_99")); }});
    s.push_back({"POST /api/stamps/run", "POST", "/api/stamps/run", J{{"now", "2021-02-02T01:00:00"}}, 200,
                 [](Engine& e) { return to_json(e.stamper().run_daily(ts("2021-02-02T01:00:00"))); }});
    s.push_back({"POST /api/stamps/run nothing", "POST", "/api/stamps/run", J{{"now", "2021-02-03T01:00:00"}},
                 200, [](Engine& e) { return to_json(e.stamper().run_daily(ts("2021-02-03T01:00:00"))); }});
    s.push_back({"GET /api/stamps/{digest}", "GET", "/api/stamps/" + to_hex(sha256("t,h\n0,1\n1,1.5\n")),
                 nullptr, 200,
                 [](Engine& e) { return to_json(e.stamper().proof_for(sha256("t,h\n0,1\n1,1.5\n"))); }});
    s.push_back({"GET /api/stamps/{digest} unknown", "GET", "/api/stamps/" + to_hex(sha256("nope")), nullptr,
                 200, [](Engine& e) { return to_json(e.stamper().proof_for(sha256("nope"))); }});
    s.push_back({"DELETE /api/entries/{id}", "DELETE", "/api/entries/3", nullptr, 200,
                 [](Engine& e) { return J{{"removed", e.catalog().delete_entry(3)}}; }});
    s.push_back({"DELETE /api/entries/{id} again", "DELETE", "/api/entries/3", nullptr, 200,
                 [](Engine& e) { return J{{"removed", e.catalog().delete_entry(3)}}; }});
    s.push_back({"GET /api/entries/{id}/links after delete", "GET", "/api/entries/2/links", nullptr, 200,
                 [](Engine& e) { return to_json(e.catalog().links_for(2)); }});
    return s;
}

inline Json strip_started_at(Json j) {
    if (j.is_object()) j.erase("started_at");
    return j;
}

// Runs every step; the twin's thrown Error becomes the expected error body.
inline std::vector<ContractCheck> run_contract() {
    ContractEnv env;
    ApiServer server(*env.served);
    int port = server.bind("127.0.0.1", 0);
    server.start();
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(std::chrono::seconds{30});

    std::vector<ContractCheck> out;
    for (const auto& step : contract_steps()) {
        int want_status = step.success_status;
        Json want;
        try {
            want = step.expected(*env.twin);
        } catch (const Error& e) {
            want = Json{{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
            want_status = http_status(e.code());
        }
        httplib::Result res;
        auto body = step.body.is_null() ? std::string() : step.body.dump();
        if (step.method == "GET") {
            res = client.Get(step.path);
        } else if (step.method == "POST") {
            res = client.Post(step.path, body, "application/json");
        } else {
            res = client.Delete(step.path);
        }
        ContractCheck check{step.name, false, {}};
        if (!res) {
            check.detail = "no response: " + httplib::to_string(res.error());
        } else {
            Json got = Json::parse(res->body, nullptr, false);
            if (step.ignore_started_at) {
                got = strip_started_at(got);
                want = strip_started_at(want);
            }
            check.ok = res->status == want_status && got == want &&
                       res->get_header_value("Content-Type") == "application/json";
            if (!check.ok) {
                check.detail = "status " + std::to_string(res->status) + " want " +
                               std::to_string(want_status) + "; body " + res->body + " want " +
                               want.dump();
            }
        }
        out.push_back(std::move(check));
    }
    server.stop();
    return out;
}

}  // namespace eln::testing
