#include "eln/error.hpp"

namespace eln {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::duplicate_key: return "duplicate_key";
        case ErrorCode::unknown_sample: return "unknown_sample";
        case ErrorCode::invalid_range: return "invalid_range";
        case ErrorCode::root_unreadable: return "root_unreadable";
        case ErrorCode::unreadable_metadata: return "unreadable_metadata";
        case ErrorCode::busy: return "busy";
        case ErrorCode::no_reports: return "no_reports";
        case ErrorCode::not_tabular: return "not_tabular";
        case ErrorCode::table_parse: return "table_parse";
        case ErrorCode::read_failure: return "read_failure";
        case ErrorCode::empty_batch: return "empty_batch";
        case ErrorCode::nothing_to_stamp: return "nothing_to_stamp";
        case ErrorCode::backend_unavailable: return "backend_unavailable";
        case ErrorCode::invalid_proof: return "invalid_proof";
        case ErrorCode::config: return "config";
        case ErrorCode::storage: return "storage";
        case ErrorCode::port_in_use: return "port_in_use";
    }
    return "unknown";
}

}  // namespace eln
