#pragma once

#include <string>

#include "eln/catalog.hpp"
#include "testing.hpp"

namespace eln::testing {

inline const std::string kMainDevice = "01_OCA_35_XL";
inline const std::string kSubDevice = "01_PRE_Logger";

// Rules for OCA (main) and PRE (sub) plus samples BA_01 and CC_01.
inline void seed_standard(Catalog& c) {
    c.register_sample("BA_01", "", {});
    c.register_sample("CC_01", "", {});
    c.register_path_rule({"OCA", TreeKind::main, "01_Main_Exp/" + kMainDevice, {"png", "csv"}, "35_XL"});
    c.register_path_rule({"PRE", TreeKind::sub, "02_Sub_Exp/" + kSubDevice, {"csv", "txt"}, "Logger"});
}

inline std::string data_path(TreeKind kind, Timestamp at, const std::string& sample,
                             const std::string& description, const std::string& ext) {
    std::string head = kind == TreeKind::main ? "01_Main_Exp/" + kMainDevice
                                              : "02_Sub_Exp/" + kSubDevice;
    return head + "/" + compact_date(date_of(at)) + "/Probe_" + sample + "/" + compact_time(at) +
           "_" + description + "." + ext;
}

inline std::string place(const fs::path& root, TreeKind kind, Timestamp at,
                         const std::string& sample, const std::string& description,
                         const std::string& ext, const std::string& content = "t,v\n0,1\n") {
    auto rel = data_path(kind, at, sample, description, ext);
    write_file(root / rel, content);
    return rel;
}

}  // namespace eln::testing
