#pragma once

#include <string>

#include "eln/catalog.hpp"
#include "testing.hpp"

namespace eln::testing {

// Synthetic metadata that passes the catalog's validation; no file needed.
inline ParsedFileMeta make_meta(const std::string& device, const std::string& sample,
                                Timestamp at, const std::string& description = "run",
                                const std::string& ext = "csv", TreeKind kind = TreeKind::main,
                                int serial = 0) {
    ParsedFileMeta m;
    m.device_code = device;
    m.sample_name = sample;
    m.observed_at = at;
    m.description = description;
    m.extension = ext;
    m.folder_date = date_of(at);
    std::string root = kind == TreeKind::main ? "01_Main_Exp" : "02_Sub_Exp";
    m.relative_path = root + "/01_" + device + "/" + compact_date(m.folder_date) + "/" + sample +
                      "/" + compact_time(at) + "_" + description +
                      (serial ? "_" + std::to_string(serial) : "") + "." + ext;
    return m;
}

inline CatalogEntry add_entry(Catalog& c, TreeKind kind, const std::string& sample, Timestamp at,
                              const std::string& description = "run", int serial = 0,
                              const std::string& device = "") {
    auto dev = device.empty() ? (kind == TreeKind::main ? "OCA" : "PRE") : device;
    return c.upsert_entry(make_meta(dev, sample, at, description, "csv", kind, serial), kind, {})
        .entry;
}

}  // namespace eln::testing
