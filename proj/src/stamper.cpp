#include "eln/stamper.hpp"

#include <thread>

#include "eln/error.hpp"

namespace eln {

MockStampBackend::MockStampBackend(std::function<Timestamp()> clock) : clock_(std::move(clock)) {}

std::string MockStampBackend::submit(const std::string& root_hex, Date batch_date) {
    std::lock_guard lock(mutex_);
    if (failures_pending_ > 0) {
        --failures_pending_;
        throw Error(ErrorCode::backend_unavailable, "mock backend refused submission");
    }
    Submission s{root_hex, batch_date, clock_(), {}};
    s.receipt = "mock:" + std::to_string(submissions_.size() + 1) + ":" + root_hex + "@" +
                format_iso(s.received_at);
    submissions_.push_back(s);
    return s.receipt;
}

void MockStampBackend::fail_next(int count) {
    std::lock_guard lock(mutex_);
    failures_pending_ = count;
}

std::vector<MockStampBackend::Submission> MockStampBackend::submissions() const {
    std::lock_guard lock(mutex_);
    return submissions_;
}

std::vector<std::chrono::milliseconds> backoff_schedule(const RetryPolicy& policy) {
    std::vector<std::chrono::milliseconds> out;
    double delay = static_cast<double>(policy.initial_delay.count());
    for (int i = 1; i < policy.max_attempts; ++i) {
        out.emplace_back(static_cast<std::int64_t>(delay));
        delay *= policy.multiplier;
    }
    return out;
}

StampBatch submit_batch(StampBatch batch, StampBackend& backend, const RetryPolicy& policy,
                        Timestamp now) {
    auto delays = backoff_schedule(policy);
    for (int attempt = 0;; ++attempt) {
        try {
            batch.backend_receipt = backend.submit(to_hex(batch.root), batch.batch_date);
            batch.submitted_at = now;
            return batch;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::backend_unavailable ||
                attempt + 1 >= policy.max_attempts) {
                throw;
            }
        }
        auto delay = delays[static_cast<std::size_t>(attempt)];
        if (policy.sleep) {
            policy.sleep(delay);
        } else {
            std::this_thread::sleep_for(delay);
        }
    }
}

Stamper::Stamper(Catalog& catalog, std::filesystem::path data_root, StampBackend& backend,
                 RetryPolicy retry)
    : catalog_(catalog),
      data_root_(std::move(data_root)),
      backend_(backend),
      retry_(std::move(retry)) {}

StampBatch Stamper::run_daily(Timestamp now) {
    std::unique_lock lock(run_mutex_, std::try_to_lock);
    if (!lock) throw Error(ErrorCode::busy, "a stamping run is already active");

    std::optional<StampBatch> last;
    if (auto pending = catalog_.pending_batch()) {
        auto done = submit_batch(pending->batch, backend_, retry_, now);
        catalog_.mark_submitted(pending->id, *done.submitted_at, *done.backend_receipt);
        last = done;
    }

    std::vector<std::pair<EntryId, Digest>> members;
    for (const auto& e : catalog_.unstamped_entries()) {
        try {
            members.emplace_back(e.id, hash_file(data_root_ / e.file_path));
        } catch (const Error&) {
            // Unreadable right now; it stays unstamped and is retried next run.
        }
    }
    if (members.empty()) {
        if (last) return *last;
        throw Error(ErrorCode::nothing_to_stamp, "no entries ingested since the last batch");
    }

    std::vector<Digest> digests;
    for (const auto& m : members) digests.push_back(m.second);
    auto batch = build_batch(std::move(digests), date_of(now));
    auto id = catalog_.insert_batch(batch, members);
    batch = submit_batch(std::move(batch), backend_, retry_, now);
    catalog_.mark_submitted(id, *batch.submitted_at, *batch.backend_receipt);
    return batch;
}

StampProof Stamper::proof_for(const Digest& digest) const {
    auto stored = catalog_.batch_containing(digest);
    if (!stored) throw Error(ErrorCode::not_found, "digest " + to_hex(digest) + " is not stamped");
    return prove(digest, stored->batch);
}

}  // namespace eln
