#include "eln/api.hpp"

#include <httplib.h>

#include "eln/error.hpp"
#include "eln/serialize.hpp"

namespace eln {

namespace {

using Request = httplib::Request;
using Response = httplib::Response;

void send(Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(Response& res, ErrorCode code, const std::string& message) {
    send(res, Json{{"error", {{"code", to_string(code)}, {"message", message}}}},
         http_status(code));
}

template <class F>
auto guarded(F&& f) {
    return [f = std::forward<F>(f)](const Request& req, Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send_error(res, e.code(), e.what());
        } catch (const Json::exception& e) {
            send_error(res, ErrorCode::invalid_argument, std::string("bad JSON: ") + e.what());
        } catch (const std::exception& e) {
            send_error(res, ErrorCode::storage, e.what());
        }
    };
}

Json body_json(const Request& req) {
    if (req.body.empty()) return Json::object();
    auto j = Json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "request body must be an object");
    return j;
}

Timestamp time_param(const std::string& text, const char* name) {
    auto t = parse_iso(text);
    if (!t) {
        throw Error(ErrorCode::invalid_argument,
                    std::string(name) + " must be an ISO-8601 local time, got '" + text + "'");
    }
    return *t;
}

EntryId id_param(const Request& req) {
    try {
        return std::stoll(req.matches[1].str());
    } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_argument, "bad id");
    }
}

std::string required_string(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
        throw Error(ErrorCode::invalid_argument, std::string("missing string field '") + key + "'");
    }
    return j[key].get<std::string>();
}

}  // namespace

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument:
        case ErrorCode::invalid_range:
        case ErrorCode::invalid_proof:
        case ErrorCode::empty_batch:
        case ErrorCode::config: return 400;
        case ErrorCode::not_found:
        case ErrorCode::unknown_sample:
        case ErrorCode::no_reports: return 404;
        case ErrorCode::duplicate_key:
        case ErrorCode::busy:
        case ErrorCode::nothing_to_stamp: return 409;
        case ErrorCode::not_tabular:
        case ErrorCode::table_parse: return 422;
        case ErrorCode::backend_unavailable: return 503;
        case ErrorCode::root_unreadable:
        case ErrorCode::unreadable_metadata:
        case ErrorCode::read_failure:
        case ErrorCode::storage:
        case ErrorCode::port_in_use: return 500;
    }
    return 500;
}

ApiServer::ApiServer(Engine& engine)
    : engine_(engine), server_(std::make_unique<httplib::Server>()) {
    // SO_REUSEPORT would let a second server share the port silently.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::routes() {
    auto& s = *server_;
    Engine& eng = engine_;

    s.Get("/api/health", guarded([](const Request&, Response& res) {
        send(res, Json{{"status", "ok"}, {"schema_version", Catalog::schema_version}});
    }));

    s.Get("/api/samples", guarded([&eng](const Request&, Response& res) {
        Json out = Json::array();
        for (const auto& sm : eng.catalog().samples()) out.push_back(to_json(sm));
        send(res, out);
    }));
    s.Post("/api/samples", guarded([&eng](const Request& req, Response& res) {
        auto j = body_json(req);
        auto props = j.value("properties", std::map<std::string, std::string>{});
        send(res,
             to_json(eng.catalog().register_sample(required_string(j, "name"),
                                                   j.value("kind", std::string()), props)),
             201);
    }));

    s.Get("/api/rules", guarded([&eng](const Request&, Response& res) {
        send(res, to_json(eng.catalog().path_rules()));
    }));
    s.Post("/api/rules", guarded([&eng](const Request& req, Response& res) {
        send(res, to_json(eng.catalog().register_path_rule(rule_from_json(body_json(req)))), 201);
    }));

    s.Get("/api/entries", guarded([&eng](const Request& req, Response& res) {
        EntryFilter f;
        if (req.has_param("sample")) f.sample = req.get_param_value("sample");
        if (req.has_param("device")) f.device = req.get_param_value("device");
        if (req.has_param("kind")) {
            f.kind = tree_kind_from_string(req.get_param_value("kind"));
            if (!f.kind) throw Error(ErrorCode::invalid_argument, "kind must be main or sub");
        }
        if (req.has_param("from")) f.from = time_param(req.get_param_value("from"), "from");
        if (req.has_param("to")) f.to = time_param(req.get_param_value("to"), "to");
        if (req.has_param("q")) f.text = req.get_param_value("q");
        if (req.has_param("extra_key")) {
            f.extra_key_value = std::pair{req.get_param_value("extra_key"),
                                          req.get_param_value("extra_value")};
        }
        send(res, to_json(eng.catalog().query_entries(f)));
    }));
    s.Get(R"(/api/entries/(-?\d+))", guarded([&eng](const Request& req, Response& res) {
        send(res, to_json(eng.catalog().get_entry(id_param(req))));
    }));
    s.Delete(R"(/api/entries/(-?\d+))", guarded([&eng](const Request& req, Response& res) {
        send(res, Json{{"removed", eng.catalog().delete_entry(id_param(req))}});
    }));
    s.Get(R"(/api/entries/(-?\d+)/plot)", guarded([&eng](const Request& req, Response& res) {
        send(res, to_json(eng.plot(id_param(req))));
    }));
    s.Get(R"(/api/entries/(-?\d+)/links)", guarded([&eng](const Request& req, Response& res) {
        auto id = id_param(req);
        eng.catalog().get_entry(id);
        send(res, to_json(eng.catalog().links_for(id)));
    }));

    s.Post("/api/links", guarded([&eng](const Request& req, Response& res) {
        auto j = body_json(req);
        auto type = link_type_from_string(required_string(j, "link_type"));
        if (!type) throw Error(ErrorCode::invalid_argument, "unknown link_type");
        if (!j.contains("from_id") || !j.contains("to_id")) {
            throw Error(ErrorCode::invalid_argument, "from_id and to_id are required");
        }
        send(res,
             to_json(eng.catalog().add_link(j["from_id"].get<EntryId>(), j["to_id"].get<EntryId>(),
                                            *type, LinkOrigin::manual)),
             201);
    }));
    s.Post("/api/notes", guarded([&eng](const Request& req, Response& res) {
        auto j = body_json(req);
        auto sample = j.contains("sample_name") ? required_string(j, "sample_name")
                                                : required_string(j, "sample");
        auto at = time_param(required_string(j, "written_at"), "written_at");
        send(res, to_json(eng.add_note(sample, at, required_string(j, "body"))), 201);
    }));
    s.Get(R"(/api/samples/([^/]+)/history)", guarded([&eng](const Request& req, Response& res) {
        send(res, to_json(eng.linker().sample_history(req.matches[1].str())));
    }));

    s.Post("/api/ingest", guarded([&eng](const Request& req, Response& res) {
        auto j = body_json(req);
        std::optional<Timestamp> now;
        std::optional<bool> recency;
        if (j.contains("now")) now = time_param(required_string(j, "now"), "now");
        if (j.value("no_recency", false)) recency = false;
        send(res, to_json(eng.ingest(now, recency)));
    }));
    s.Get("/api/reports/latest", guarded([&eng](const Request&, Response& res) {
        send(res, to_json(eng.ingestor().latest_report()));
    }));

    s.Post("/api/stamps/run", guarded([&eng](const Request& req, Response& res) {
        auto j = body_json(req);
        Timestamp now = j.contains("now") ? time_param(required_string(j, "now"), "now")
                                          : now_local();
        send(res, to_json(eng.stamper().run_daily(now)));
    }));
    s.Get(R"(/api/stamps/([^/]+))", guarded([&eng](const Request& req, Response& res) {
        auto digest = digest_from_hex(req.matches[1].str());
        if (!digest) throw Error(ErrorCode::invalid_argument, "expected a 64-digit hex digest");
        send(res, to_json(eng.stamper().proof_for(*digest)));
    }));

    const auto& api = eng.config().api;
    if (!api.cors_origin.empty()) {
        std::string origin = api.cors_origin;
        s.set_post_routing_handler([origin](const Request&, Response& res) {
            res.set_header("Access-Control-Allow-Origin", origin);
        });
        s.Options(R"(/api/.*)", [origin](const Request&, Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });
    }
    if (!api.ui_dir.empty()) s.set_mount_point("/", api.ui_dir.string());

    s.set_error_handler([](const Request& req, Response& res) {
        if (res.status == 404 && res.body.empty() && req.path.rfind("/api/", 0) == 0) {
            send_error(res, ErrorCode::not_found, "no route " + req.method + " " + req.path);
        }
    });
}

int ApiServer::bind(const std::string& host, int port) {
    int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound <= 0) {
        throw Error(ErrorCode::port_in_use,
                    "cannot bind " + host + ":" + std::to_string(port) + " (in use?)");
    }
    return bound;
}

void ApiServer::listen() { server_->listen_after_bind(); }

void ApiServer::start() {
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void ApiServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace eln
