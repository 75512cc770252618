#include "eln/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "eln/api.hpp"
#include "eln/engine.hpp"
#include "eln/error.hpp"
#include "eln/serialize.hpp"

namespace eln::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path;

    std::string root;
    std::string now;
    bool no_recency = false;
    bool json = false;

    int port = -1;
    std::string bind;

    std::string name;
    std::string kind;
    std::vector<std::string> props;

    std::string code;
    std::string rule_root;
    std::string extensions;
    std::string tree_kind = "main";
    std::string variant;

    std::string sample, device, from, to, text;

    std::string file;
    std::string proof;
};

Timestamp require_time(const std::string& text, const char* flag) {
    auto t = parse_iso(text);
    if (!t) throw CLI::ValidationError(flag, "expected ISO-8601 local time, got '" + text + "'");
    return *t;
}

Config resolve_config(const Options& o, bool must_exist) {
    std::string path = o.config_path;
    bool explicit_path = !path.empty();
    if (!explicit_path) {
        if (const char* env = std::getenv("ELN_CONFIG"); env && *env) {
            path = env;
            explicit_path = true;
        } else {
            path = "eln.toml";
        }
    }
    Config c;
    if (fs::exists(path)) {
        c = load_config(path);
    } else if (explicit_path && must_exist) {
        throw Error(ErrorCode::config, "config file " + path + " not found");
    }
    apply_environment(c);
    return c;
}

std::string human_report(const IngestReport& r) {
    std::ostringstream s;
    s << "scanned " << r.scanned << ", created " << r.created << ", duplicates " << r.duplicates
      << ", skipped " << r.skipped.size() << ", links " << r.links_created << "\n";
    for (const auto& k : r.skipped) s << "  skipped " << to_string(k.reason) << ": " << k.path << "\n";
    return s.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Electronic lab notebook engine", "eln"};
    app.require_subcommand(1);
    app.add_option("--config", o.config_path, "Config file (default ./eln.toml or $ELN_CONFIG)");

    auto* init = app.add_subcommand("init", "Create the store and a sample config");

    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->add_option("--port", o.port, "Port");
    serve->add_option("--bind", o.bind, "Bind address");

    auto* ingest = app.add_subcommand("ingest", "Generate entries from the data tree");
    ingest->add_option("--root", o.root, "Data root (overrides config)");
    ingest->add_option("--now", o.now, "Reference time for the recency rule");
    ingest->add_flag("--no-recency", o.no_recency, "Ignore file age");
    ingest->add_flag("--json", o.json, "Print the report as JSON");

    auto* report = app.add_subcommand("report", "Show the latest ingest report");
    report->add_flag("--json", o.json, "Print JSON");

    auto* sample = app.add_subcommand("sample", "Manage samples");
    sample->require_subcommand(1);
    auto* sample_add = sample->add_subcommand("add", "Register a sample");
    sample_add->add_option("NAME", o.name, "Sample code, e.g. CC_01")->required();
    sample_add->add_option("--kind", o.kind, "Sample kind");
    sample_add->add_option("--prop", o.props, "Property key=value (repeatable)");
    auto* sample_list = sample->add_subcommand("list", "List samples");

    auto* rule = app.add_subcommand("rule", "Manage path rules");
    rule->require_subcommand(1);
    auto* rule_add = rule->add_subcommand("add", "Register a path rule");
    rule_add->add_option("CODE", o.code, "Device code (three capital letters)")->required();
    rule_add->add_option("--root", o.rule_root, "Device folder relative to the data root")
        ->required();
    rule_add->add_option("--ext", o.extensions, "Allowed extensions, comma separated")->required();
    rule_add->add_option("--kind", o.tree_kind, "main or sub")
        ->check(CLI::IsMember({"main", "sub"}));
    rule_add->add_option("--variant", o.variant, "Instrument variant (default: from folder name)");
    auto* rule_list = rule->add_subcommand("list", "List path rules");

    auto* query = app.add_subcommand("query", "Filter catalog entries");
    query->add_option("--sample", o.sample);
    query->add_option("--device", o.device);
    query->add_option("--kind", o.tree_kind)->check(CLI::IsMember({"main", "sub"}));
    query->add_option("--from", o.from);
    query->add_option("--to", o.to);
    query->add_option("--q", o.text, "Substring in description or linked notes");
    query->add_flag("--json", o.json, "Print JSON");

    auto* stamp = app.add_subcommand("stamp", "Trusted timestamping");
    stamp->require_subcommand(1);
    auto* stamp_run = stamp->add_subcommand("run", "Batch and anchor new entries");
    stamp_run->add_option("--now", o.now);
    auto* stamp_proof = stamp->add_subcommand("proof", "Print the inclusion proof for a file");
    stamp_proof->add_option("FILE", o.file)->required();
    auto* stamp_verify = stamp->add_subcommand("verify", "Check a file against a proof");
    stamp_verify->add_option("FILE", o.file)->required();
    stamp_verify->add_option("PROOF", o.proof)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (init->parsed()) {
            fs::path cfg_path = o.config_path.empty() ? "eln.toml" : o.config_path;
            if (!fs::exists(cfg_path)) {
                std::ofstream f(cfg_path);
                f << default_config_text();
                if (!f) throw Error(ErrorCode::config, "cannot write " + cfg_path.string());
                out << "wrote " << cfg_path.string() << "\n";
            }
            auto config = load_config(cfg_path);
            for (const auto& g : config.grammars) {
                fs::create_directories(config.data_root / g.root_marker);
            }
            Engine engine(config);
            out << "store ready at " << config.store_path.string() << "\n";
            return 0;
        }

        auto config = resolve_config(o, true);

        if (serve->parsed()) {
            if (o.port >= 0) config.api.port = o.port;
            if (!o.bind.empty()) config.api.bind = o.bind;
            Engine engine(config);
            ApiServer server(engine);
            int port = server.bind(config.api.bind, config.api.port);
            out << "listening on http://" << config.api.bind << ":" << port << std::endl;
            server.listen();
            return 0;
        }
        if (ingest->parsed()) {
            if (!o.root.empty()) config.data_root = o.root;
            std::optional<Timestamp> now;
            if (!o.now.empty()) now = require_time(o.now, "--now");
            Engine engine(config);
            auto r = engine.ingest(now, o.no_recency ? std::optional<bool>(false) : std::nullopt);
            out << (o.json ? to_json(r).dump(2) + "\n" : human_report(r));
            return 0;
        }
        if (report->parsed()) {
            Engine engine(config);
            auto r = engine.ingestor().latest_report();
            out << (o.json ? to_json(r).dump(2) + "\n" : human_report(r));
            return 0;
        }
        if (sample_add->parsed()) {
            std::map<std::string, std::string> props;
            for (const auto& p : o.props) {
                auto eq = p.find('=');
                if (eq == std::string::npos) {
                    throw CLI::ValidationError("--prop", "expected key=value, got '" + p + "'");
                }
                props[p.substr(0, eq)] = p.substr(eq + 1);
            }
            Engine engine(config);
            auto s = engine.catalog().register_sample(o.name, o.kind, props);
            out << "sample " << s.name << " registered\n";
            return 0;
        }
        if (sample_list->parsed()) {
            Engine engine(config);
            Json j = Json::array();
            for (const auto& s : engine.catalog().samples()) j.push_back(to_json(s));
            out << j.dump(2) << "\n";
            return 0;
        }
        if (rule_add->parsed()) {
            PathRule r;
            r.device_code = o.code;
            r.tree_kind = *tree_kind_from_string(o.tree_kind);
            r.root_subpath = o.rule_root;
            std::stringstream exts(o.extensions);
            for (std::string e; std::getline(exts, e, ',');) {
                if (!e.empty() && e.front() == '.') e.erase(0, 1);
                if (!e.empty()) r.allowed_extensions.insert(e);
            }
            r.instrument_variant = o.variant;
            if (o.variant.empty()) {
                auto folder = fs::path(o.rule_root).filename().string();
                auto parsed = parse_device_folder(folder);
                if (auto* d = std::get_if<DeviceFolder>(&parsed); d && d->code == o.code) {
                    r.instrument_variant = d->instrument_variant;
                }
            }
            Engine engine(config);
            engine.catalog().register_path_rule(r);
            out << "rule " << r.device_code << " (" << to_string(r.tree_kind) << ") -> "
                << r.root_subpath << "\n";
            return 0;
        }
        if (rule_list->parsed()) {
            Engine engine(config);
            out << to_json(engine.catalog().path_rules()).dump(2) << "\n";
            return 0;
        }
        if (query->parsed()) {
            EntryFilter f;
            if (!o.sample.empty()) f.sample = o.sample;
            if (!o.device.empty()) f.device = o.device;
            if (query->count("--kind")) f.kind = tree_kind_from_string(o.tree_kind);
            if (!o.from.empty()) f.from = require_time(o.from, "--from");
            if (!o.to.empty()) f.to = require_time(o.to, "--to");
            if (!o.text.empty()) f.text = o.text;
            Engine engine(config);
            auto entries = engine.catalog().query_entries(f);
            if (o.json) {
                out << to_json(entries).dump(2) << "\n";
            } else {
                for (const auto& e : entries) {
                    out << e.id << "\t" << to_string(e.kind) << "\t" << e.device_code << "\t"
                        << e.sample_name << "\t" << format_iso(e.observed_at) << "\t"
                        << e.file_path << "\n";
                }
            }
            return 0;
        }
        if (stamp_run->parsed()) {
            Timestamp now = o.now.empty() ? now_local() : require_time(o.now, "--now");
            Engine engine(config);
            out << to_json(engine.stamper().run_daily(now)).dump(2) << "\n";
            return 0;
        }
        if (stamp_proof->parsed()) {
            Engine engine(config);
            out << to_json(engine.stamper().proof_for(hash_file(fs::path(o.file)))).dump(2) << "\n";
            return 0;
        }
        if (stamp_verify->parsed()) {
            std::ifstream in(o.proof);
            if (!in) throw Error(ErrorCode::read_failure, "cannot open " + o.proof);
            Json j;
            try {
                j = Json::parse(in);
            } catch (const Json::exception& e) {
                throw Error(ErrorCode::invalid_proof, std::string("proof is not JSON: ") + e.what());
            }
            auto proof = proof_from_json(j);
            auto digest = hash_file(fs::path(o.file));
            if (digest != proof.leaf) {
                out << "FAIL: file digest " << to_hex(digest) << " is not the proof leaf\n";
                return 1;
            }
            if (!verify(proof)) {
                out << "FAIL: proof does not reproduce root " << to_hex(proof.root) << "\n";
                return 1;
            }
            out << "OK " << to_hex(proof.root) << " " << format_date(proof.batch_date) << "\n";
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << app.help();
    return 2;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace eln::cli
