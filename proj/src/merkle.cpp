#include "eln/merkle.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <memory>

#include "eln/error.hpp"

namespace eln {

namespace {

struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

MdCtx new_sha256() {
    MdCtx ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::storage, "sha256 unavailable");
    }
    return ctx;
}

Digest finish(EVP_MD_CTX* ctx) {
    Digest out{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, out.data(), &len);
    return out;
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::string to_hex(const Digest& d) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(64, '0');
    for (std::size_t i = 0; i < d.size(); ++i) {
        out[2 * i] = digits[d[i] >> 4];
        out[2 * i + 1] = digits[d[i] & 0xf];
    }
    return out;
}

std::optional<Digest> digest_from_hex(std::string_view hex) {
    if (hex.size() != 64) return std::nullopt;
    Digest out{};
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_value(hex[2 * i]), lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return out;
}

Digest sha256(std::span<const std::uint8_t> bytes) {
    auto ctx = new_sha256();
    EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
    return finish(ctx.get());
}

Digest sha256(std::string_view bytes) {
    return sha256(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

Digest hash_file(std::istream& in) {
    auto ctx = new_sha256();
    std::array<char, 64 * 1024> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.bad()) throw Error(ErrorCode::read_failure, "read error while hashing");
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    if (in.bad()) throw Error(ErrorCode::read_failure, "read error while hashing");
    return finish(ctx.get());
}

Digest hash_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::read_failure, "cannot open " + file.string());
    return hash_file(in);
}

Digest hash_pair(const Digest& left, const Digest& right) {
    auto ctx = new_sha256();
    EVP_DigestUpdate(ctx.get(), left.data(), left.size());
    EVP_DigestUpdate(ctx.get(), right.data(), right.size());
    return finish(ctx.get());
}

Digest merkle_root(std::span<const Digest> leaves) {
    if (leaves.empty()) throw Error(ErrorCode::empty_batch, "no leaves");
    std::vector<Digest> level(leaves.begin(), leaves.end());
    while (level.size() > 1) {
        std::vector<Digest> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
            next.push_back(hash_pair(level[i], level[i + 1]));
        }
        if (level.size() % 2 == 1) next.push_back(level.back());
        level = std::move(next);
    }
    return level.front();
}

StampBatch build_batch(std::vector<Digest> digests, Date date) {
    if (digests.empty()) throw Error(ErrorCode::empty_batch, "a stamp batch needs a digest");
    std::sort(digests.begin(), digests.end());
    digests.erase(std::unique(digests.begin(), digests.end()), digests.end());
    StampBatch batch;
    batch.batch_date = date;
    batch.root = merkle_root(digests);
    batch.leaves = std::move(digests);
    return batch;
}

StampProof prove(const Digest& leaf, const StampBatch& batch) {
    auto it = std::lower_bound(batch.leaves.begin(), batch.leaves.end(), leaf);
    if (it == batch.leaves.end() || *it != leaf) {
        throw Error(ErrorCode::not_found, "digest " + to_hex(leaf) + " is not in the batch");
    }
    StampProof proof{leaf, {}, batch.root, batch.batch_date};
    auto index = static_cast<std::size_t>(it - batch.leaves.begin());
    std::vector<Digest> level = batch.leaves;
    while (level.size() > 1) {
        bool promoted = index == level.size() - 1 && level.size() % 2 == 1;
        if (!promoted) {
            if (index % 2 == 0) {
                proof.path.push_back({level[index + 1], Side::right});
            } else {
                proof.path.push_back({level[index - 1], Side::left});
            }
        }
        std::vector<Digest> next;
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
            next.push_back(hash_pair(level[i], level[i + 1]));
        }
        if (level.size() % 2 == 1) next.push_back(level.back());
        level = std::move(next);
        index /= 2;
    }
    return proof;
}

bool verify(const StampProof& proof) noexcept {
    Digest acc = proof.leaf;
    try {
        for (const auto& step : proof.path) {
            acc = step.side == Side::left ? hash_pair(step.sibling, acc)
                                          : hash_pair(acc, step.sibling);
        }
    } catch (...) {
        return false;
    }
    return acc == proof.root;
}

}  // namespace eln
