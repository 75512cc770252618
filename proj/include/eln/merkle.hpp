#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eln/time.hpp"

namespace eln {

using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(const Digest& d);
std::optional<Digest> digest_from_hex(std::string_view hex);

Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view bytes);

// Streams the input in fixed-size chunks. Throws Error{read_failure}.
Digest hash_file(std::istream& in);
Digest hash_file(const std::filesystem::path& file);

// H(left || right)
Digest hash_pair(const Digest& left, const Digest& right);

struct StampBatch {
    Date batch_date{};
    std::vector<Digest> leaves;  // sorted ascending, no duplicates
    Digest root{};
    std::optional<Timestamp> submitted_at;
    std::optional<std::string> backend_receipt;

    bool operator==(const StampBatch&) const = default;
};

enum class Side { left, right };

struct ProofStep {
    Digest sibling{};
    Side side = Side::left;  // where the sibling sits

    bool operator==(const ProofStep&) const = default;
};

struct StampProof {
    Digest leaf{};
    std::vector<ProofStep> path;
    Digest root{};
    Date batch_date{};

    bool operator==(const StampProof&) const = default;
};

// Pairs adjacent nodes level by level; an odd trailing node is promoted
// unchanged. `leaves` must be non-empty.
Digest merkle_root(std::span<const Digest> leaves);

// Sorts and deduplicates the digests. Throws Error{empty_batch}.
StampBatch build_batch(std::vector<Digest> digests, Date date);

// Throws Error{not_found} when the digest is not a leaf of the batch.
StampProof prove(const Digest& leaf, const StampBatch& batch);

bool verify(const StampProof& proof) noexcept;

}  // namespace eln
