#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "eln/catalog.hpp"
#include "eln/merkle.hpp"

namespace eln {

// Anchoring service. Only the Merkle root ever leaves the machine.
// Implementations throw Error{backend_unavailable} on any transport failure.
class StampBackend {
public:
    virtual ~StampBackend() = default;
    virtual std::string submit(const std::string& root_hex, Date batch_date) = 0;
};

// In-process stand-in for a public anchoring service.
class MockStampBackend : public StampBackend {
public:
    struct Submission {
        std::string root_hex;
        Date batch_date{};
        Timestamp received_at{};
        std::string receipt;
    };

    explicit MockStampBackend(std::function<Timestamp()> clock = now_local);

    std::string submit(const std::string& root_hex, Date batch_date) override;

    // The next `count` submissions fail with backend_unavailable.
    void fail_next(int count);
    std::vector<Submission> submissions() const;

private:
    mutable std::mutex mutex_;
    std::function<Timestamp()> clock_;
    std::vector<Submission> submissions_;
    int failures_pending_ = 0;
};

// POST {base_url}/api/v1/timestamp  {"hash": <root hex>, "date": "YYYY-MM-DD"}
// with "Authorization: <api_key>"; a 2xx body is the receipt.
class HttpStampBackend : public StampBackend {
public:
    HttpStampBackend(std::string base_url, std::string api_key,
                     std::chrono::seconds timeout = std::chrono::seconds{10});

    std::string submit(const std::string& root_hex, Date batch_date) override;

private:
    std::string origin_;
    std::string path_prefix_;
    std::string api_key_;
    std::chrono::seconds timeout_;
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_delay{500};
    double multiplier = 2.0;
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleep_for
};

// Delays between attempts: initial, initial*m, initial*m^2, ...
std::vector<std::chrono::milliseconds> backoff_schedule(const RetryPolicy& policy);

// Returns the batch with receipt and submitted_at set. After max_attempts
// failures rethrows Error{backend_unavailable}.
StampBatch submit_batch(StampBatch batch, StampBackend& backend, const RetryPolicy& policy,
                        Timestamp now);

class Stamper {
public:
    Stamper(Catalog& catalog, std::filesystem::path data_root, StampBackend& backend,
            RetryPolicy retry = {});

    // Hashes every entry not yet stamped, batches the digests and anchors the
    // root. A pending batch from an earlier failed run is resubmitted first.
    // Throws Error{nothing_to_stamp} when there is neither.
    StampBatch run_daily(Timestamp now);

    // Throws Error{not_found} when no anchored batch holds the digest.
    StampProof proof_for(const Digest& digest) const;

private:
    Catalog& catalog_;
    std::filesystem::path data_root_;
    StampBackend& backend_;
    RetryPolicy retry_;
    std::mutex run_mutex_;
};

}  // namespace eln
