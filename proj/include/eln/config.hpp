#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eln/catalog.hpp"
#include "eln/ingest.hpp"
#include "eln/linker.hpp"
#include "eln/stamper.hpp"
#include "eln/tabular.hpp"

namespace eln {

struct StampSettings {
    std::string backend = "mock";  // "mock" | "http"
    std::string url;
    std::string key;
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{500};
};

struct ApiSettings {
    int port = 8080;
    std::string bind = "127.0.0.1";
    std::string cors_origin;
    std::filesystem::path ui_dir;
};

struct Config {
    std::filesystem::path data_root = "data";
    std::filesystem::path store_path = "eln.sqlite";
    std::vector<PathGrammar> grammars = default_grammars();
    LinkWindows link;
    RecencyPolicy recency;
    TabularConfig tabular;
    StampSettings stamp;
    ApiSettings api;
    std::map<std::string, ExtraMap> profiles;
};

// Relative paths in the file resolve against `base_dir`.
// Throws Error{config} on syntax errors or invalid values.
Config parse_config(std::string_view toml_text, const std::filesystem::path& base_dir);
Config load_config(const std::filesystem::path& file);

// ELN_STAMP_URL / ELN_STAMP_KEY override the [stamp] table.
void apply_environment(Config& config);

std::string default_config_text();

}  // namespace eln
