#include <catch_amalgamated.hpp>

#include <cstdlib>

#include "eln/config.hpp"
#include "eln/engine.hpp"
#include "eln/error.hpp"
#include "testing.hpp"

using namespace eln;
using namespace std::chrono_literals;
using eln::testing::TempDir;
using eln::testing::write_file;

namespace {

ErrorCode config_error(std::string_view text) {
    try {
        parse_config(text, "/base");
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a config error for: " << text);
    return ErrorCode::storage;
}

}  // namespace

TEST_CASE("empty config gives defaults") {
    auto c = parse_config("", "/base");
    CHECK(c.data_root == "/base/data");
    CHECK(c.store_path == "/base/eln.sqlite");
    REQUIRE(c.grammars.size() == 2);
    CHECK(c.grammars[0].root_marker == "01_Main_Exp");
    CHECK(c.grammars[1].tree_kind == TreeKind::sub);
    CHECK(c.link.sub.pre == 0s);
    CHECK(c.link.sub.post == 2h);
    CHECK(c.link.note == 12h);
    CHECK(c.recency.max_age == Seconds{5 * 86400});
    CHECK(c.recency.enabled);
    CHECK(c.tabular.extensions == std::set<std::string>{"csv", "txt", "dat"});
    CHECK(c.stamp.backend == "mock");
    CHECK(c.stamp.max_attempts == 5);
    CHECK(c.api.port == 8080);
    CHECK(c.api.bind == "127.0.0.1");
    CHECK(c.api.ui_dir.empty());
    CHECK(c.profiles.empty());
}

TEST_CASE("default config text parses to the defaults") {
    auto a = parse_config(default_config_text(), "/base");
    auto b = parse_config("", "/base");
    CHECK(a.data_root == b.data_root);
    CHECK(a.link.sub.post == b.link.sub.post);
    CHECK(a.recency.max_age == b.recency.max_age);
    CHECK(a.tabular.extensions == b.tabular.extensions);
    CHECK(a.stamp.initial_backoff == b.stamp.initial_backoff);
    CHECK(a.api.port == b.api.port);
}

TEST_CASE("every key is read") {
    auto c = parse_config(R"(
data_root = "/srv/data"
store_path = "db/eln.sqlite"
[grammar]
main_root = "Main"
sub_root = "Sub"
[link]
sub_pre_s = 900
sub_post_s = 3600
note_window_s = 60
[recency]
max_age_s = 86400
enabled = false
[tabular]
extensions = ["csv"]
delimiter = ";"
decimal = ","
time_column = "time"
[stamp]
backend = "http"
url = "https://stamp.example/"
key = "k"
retries = 2
backoff_ms = 10
[api]
port = 9000
bind = "0.0.0.0"
cors_origin = "*"
ui_dir = "ui"
[profiles.OCA]
liquid = "water"
)",
                          "/base");
    CHECK(c.data_root == "/srv/data");
    CHECK(c.store_path == "/base/db/eln.sqlite");
    CHECK(c.grammars[0].root_marker == "Main");
    CHECK(c.grammars[1].root_marker == "Sub");
    CHECK(c.link.sub.pre == 900s);
    CHECK(c.link.sub.post == 3600s);
    CHECK(c.link.note == 60s);
    CHECK(c.recency.max_age == 86400s);
    CHECK_FALSE(c.recency.enabled);
    CHECK(c.tabular.extensions == std::set<std::string>{"csv"});
    CHECK(c.tabular.format.delimiter == ';');
    CHECK(c.tabular.format.decimal_separator == ',');
    CHECK(c.tabular.format.time_column == "time");
    CHECK(c.stamp.backend == "http");
    CHECK(c.stamp.url == "https://stamp.example/");
    CHECK(c.stamp.key == "k");
    CHECK(c.stamp.max_attempts == 2);
    CHECK(c.stamp.initial_backoff == 10ms);
    CHECK(c.api.port == 9000);
    CHECK(c.api.bind == "0.0.0.0");
    CHECK(c.api.cors_origin == "*");
    CHECK(c.api.ui_dir == "/base/ui");
    CHECK(c.profiles.at("OCA").at("liquid") == "water");
}

TEST_CASE("invalid configs are rejected") {
    CHECK(config_error("data_root = ") == ErrorCode::config);
    CHECK(config_error("[link]\nsub_pre_s = -1") == ErrorCode::config);
    CHECK(config_error("[link]\nsub_post_s = \"2h\"") == ErrorCode::config);
    CHECK(config_error("[recency]\nmax_age_s = 0") == ErrorCode::config);
    CHECK(config_error("[tabular]\ndelimiter = \",\"\ndecimal = \",\"") == ErrorCode::config);
    CHECK(config_error("[tabular]\nextensions = [1]") == ErrorCode::config);
    CHECK(config_error("[stamp]\nbackend = \"ftp\"") == ErrorCode::config);
    CHECK(config_error("[stamp]\nretries = 0") == ErrorCode::config);
    CHECK(config_error("[api]\nport = 70000") == ErrorCode::config);
    CHECK(config_error("[profiles.oca]\nx = \"y\"") == ErrorCode::config);
    CHECK(config_error("[profiles.OCA]\nx = 1") == ErrorCode::config);
}

TEST_CASE("load_config resolves against the file's directory") {
    TempDir dir;
    write_file(dir / "conf/eln.toml", "data_root = \"tree\"\n");
    auto c = load_config(dir / "conf/eln.toml");
    CHECK(c.data_root == dir / "conf/tree");
    CHECK(c.store_path == dir / "conf/eln.sqlite");
    try {
        load_config(dir / "missing.toml");
        FAIL("expected config error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config);
    }
}

TEST_CASE("environment overrides the stamp backend") {
    auto c = parse_config("", "/base");
    ::setenv("ELN_STAMP_URL", "http://127.0.0.1:1", 1);
    ::setenv("ELN_STAMP_KEY", "sekrit", 1);
    apply_environment(c);
    ::unsetenv("ELN_STAMP_URL");
    ::unsetenv("ELN_STAMP_KEY");
    CHECK(c.stamp.backend == "http");
    CHECK(c.stamp.url == "http://127.0.0.1:1");
    CHECK(c.stamp.key == "sekrit");

    auto d = parse_config("[stamp]\nurl = \"x\"", "/base");
    apply_environment(d);
    CHECK(d.stamp.backend == "mock");
}

TEST_CASE("http backend without url is a config error") {
    StampSettings s;
    s.backend = "http";
    try {
        make_backend(s);
        FAIL("expected config error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config);
    }
    CHECK(make_backend(StampSettings{}) != nullptr);
}
