#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eln {

enum class ErrorCode {
    invalid_argument,
    not_found,
    duplicate_key,
    unknown_sample,
    invalid_range,
    root_unreadable,
    unreadable_metadata,
    busy,
    no_reports,
    not_tabular,
    table_parse,
    read_failure,
    empty_batch,
    nothing_to_stamp,
    backend_unavailable,
    invalid_proof,
    config,
    storage,
    port_in_use,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every engine failure surfaces as an Error; the code is the stable,
// machine-readable part that the API and CLI report.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace eln
