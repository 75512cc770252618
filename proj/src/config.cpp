#include "eln/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "eln/error.hpp"

namespace eln {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

std::int64_t non_negative(const toml::table& t, std::string_view key, std::int64_t fallback) {
    auto v = t[key].value<std::int64_t>();
    if (!v) {
        if (t.contains(key)) throw Error(ErrorCode::config, std::string(key) + " must be an integer");
        return fallback;
    }
    if (*v < 0) throw Error(ErrorCode::config, std::string(key) + " must not be negative");
    return *v;
}

}  // namespace

Config parse_config(std::string_view text, const fs::path& base_dir) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "config syntax error: " << e.description() << " at line " << e.source().begin.line;
        throw Error(ErrorCode::config, msg.str());
    }

    Config c;
    c.data_root = resolve(base_dir, root["data_root"].value_or(std::string("data")));
    c.store_path = resolve(base_dir, root["store_path"].value_or(std::string("eln.sqlite")));

    if (auto* g = root["grammar"].as_table()) {
        c.grammars = {{(*g)["main_root"].value_or(std::string("01_Main_Exp")), TreeKind::main},
                      {(*g)["sub_root"].value_or(std::string("02_Sub_Exp")), TreeKind::sub}};
    }
    if (auto* l = root["link"].as_table()) {
        c.link.sub.pre = Seconds{non_negative(*l, "sub_pre_s", c.link.sub.pre.count())};
        c.link.sub.post = Seconds{non_negative(*l, "sub_post_s", c.link.sub.post.count())};
        c.link.note = Seconds{non_negative(*l, "note_window_s", c.link.note.count())};
    }
    if (auto* r = root["recency"].as_table()) {
        c.recency.max_age = Seconds{non_negative(*r, "max_age_s", c.recency.max_age.count())};
        c.recency.enabled = (*r)["enabled"].value_or(true);
        if (c.recency.max_age.count() == 0) throw Error(ErrorCode::config, "max_age_s must be > 0");
    }
    if (auto* t = root["tabular"].as_table()) {
        if (auto* exts = (*t)["extensions"].as_array()) {
            c.tabular.extensions.clear();
            for (const auto& e : *exts) {
                auto s = e.value<std::string>();
                if (!s) throw Error(ErrorCode::config, "tabular.extensions must be strings");
                c.tabular.extensions.insert(*s);
            }
        }
        auto delim = (*t)["delimiter"].value_or(std::string(","));
        auto decimal = (*t)["decimal"].value_or(std::string("."));
        if (delim.size() != 1 || decimal.size() != 1 || delim == decimal) {
            throw Error(ErrorCode::config, "tabular delimiter/decimal must be distinct characters");
        }
        c.tabular.format.delimiter = delim[0];
        c.tabular.format.decimal_separator = decimal[0];
        c.tabular.format.time_column = (*t)["time_column"].value_or(std::string());
    }
    if (auto* s = root["stamp"].as_table()) {
        c.stamp.backend = (*s)["backend"].value_or(std::string("mock"));
        c.stamp.url = (*s)["url"].value_or(std::string());
        c.stamp.key = (*s)["key"].value_or(std::string());
        c.stamp.max_attempts = static_cast<int>(non_negative(*s, "retries", c.stamp.max_attempts));
        c.stamp.initial_backoff = std::chrono::milliseconds{
            non_negative(*s, "backoff_ms", c.stamp.initial_backoff.count())};
        if (c.stamp.backend != "mock" && c.stamp.backend != "http") {
            throw Error(ErrorCode::config, "stamp.backend must be 'mock' or 'http'");
        }
        if (c.stamp.max_attempts < 1) throw Error(ErrorCode::config, "stamp.retries must be >= 1");
    }
    if (auto* a = root["api"].as_table()) {
        auto port = non_negative(*a, "port", c.api.port);
        if (port > 65535) throw Error(ErrorCode::config, "api.port must be <= 65535");
        c.api.port = static_cast<int>(port);
        c.api.bind = (*a)["bind"].value_or(c.api.bind);
        c.api.cors_origin = (*a)["cors_origin"].value_or(std::string());
        if (auto ui = (*a)["ui_dir"].value<std::string>()) c.api.ui_dir = resolve(base_dir, *ui);
    }
    if (auto* p = root["profiles"].as_table()) {
        for (const auto& [device, node] : *p) {
            auto* defaults = node.as_table();
            if (!defaults || !validate_device_code(device.str())) {
                throw Error(ErrorCode::config,
                            "profiles." + std::string(device.str()) + " must be a device table");
            }
            ExtraMap extra;
            for (const auto& [k, v] : *defaults) {
                auto s = v.value<std::string>();
                if (!s) throw Error(ErrorCode::config, "profile values must be strings");
                extra[std::string(k.str())] = *s;
            }
            c.profiles[std::string(device.str())] = std::move(extra);
        }
    }
    return c;
}

Config load_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::config, "cannot read config " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), file.parent_path());
}

void apply_environment(Config& config) {
    if (const char* url = std::getenv("ELN_STAMP_URL"); url && *url) {
        config.stamp.url = url;
        config.stamp.backend = "http";
    }
    if (const char* key = std::getenv("ELN_STAMP_KEY"); key && *key) config.stamp.key = key;
}

std::string default_config_text() {
    return R"toml(# Electronic lab notebook configuration
data_root = "data"
store_path = "eln.sqlite"

[grammar]
main_root = "01_Main_Exp"
sub_root = "02_Sub_Exp"

[recency]
max_age_s = 432000   # 5 days
enabled = true

[link]
sub_pre_s = 0
sub_post_s = 7200
note_window_s = 43200

[tabular]
extensions = ["csv", "txt", "dat"]
delimiter = ","
decimal = "."
time_column = ""

[stamp]
backend = "mock"     # or "http" with url/key (ELN_STAMP_URL, ELN_STAMP_KEY)
url = ""
key = ""
retries = 5
backoff_ms = 500

[api]
port = 8080
bind = "127.0.0.1"
cors_origin = ""

# Default extra metadata per device code:
# [profiles.OCA]
# liquid = "water"
)toml";
}

}  // namespace eln
