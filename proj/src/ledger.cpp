#include "sepris/ledger.hpp"

#include <sodium.h>

#include <cstring>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sepris::ledger {

namespace {

Hash256 to_hash(BytesView data) {
    if (data.size() != 32) throw Error(Errc::ParseError, "hash field must be 32 bytes");
    Hash256 h{};
    std::copy(data.begin(), data.end(), h.begin());
    return h;
}

// Deterministic authenticated body encryption: the box nonce is derived
// from the key id and the plaintext digest, so mining identical inputs
// reproduces identical blocks while never reusing a (key, nonce) pair for
// distinct plaintexts.
std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> body_nonce(const std::string& key_id,
                                                                 const Hash256& plain_digest) {
    Sha256 h;
    h.update("sepris.body");
    h.update(key_id);
    h.update(BytesView(plain_digest.data(), plain_digest.size()));
    Hash256 d = h.finish();
    std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> nonce{};
    std::memcpy(nonce.data(), d.data(), nonce.size());
    return nonce;
}

Bytes encrypt_body(const Bytes& plaintext, const Key32& key, const std::string& key_id) {
    const auto nonce = body_nonce(key_id, sha256(BytesView(plaintext)));
    Bytes out(nonce.size() + crypto_secretbox_MACBYTES + plaintext.size());
    std::memcpy(out.data(), nonce.data(), nonce.size());
    crypto_secretbox_easy(out.data() + nonce.size(), plaintext.data(), plaintext.size(),
                          nonce.data(), key.data());
    return out;
}

Bytes decrypt_body_bytes(BytesView ciphertext, const Key32& key) {
    if (ciphertext.size() < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES) {
        throw Error(Errc::AuthTagMismatch, "body ciphertext too short");
    }
    const std::size_t body_len =
        ciphertext.size() - crypto_secretbox_NONCEBYTES - crypto_secretbox_MACBYTES;
    Bytes out(body_len);
    if (crypto_secretbox_open_easy(out.data(), ciphertext.data() + crypto_secretbox_NONCEBYTES,
                                   ciphertext.size() - crypto_secretbox_NONCEBYTES,
                                   ciphertext.data(), key.data()) != 0) {
        throw Error(Errc::AuthTagMismatch, "body authentication failed");
    }
    return out;
}

}  // namespace

Bytes serialize_header(const BlockHeader& h) {
    Bytes out;
    out.reserve(110);
    put_u16(out, h.version);
    out.insert(out.end(), h.prev_hash.begin(), h.prev_hash.end());
    put_u64(out, h.timestamp);
    put_u32(out, h.nonce);
    out.insert(out.end(), h.body_root_hash.begin(), h.body_root_hash.end());
    out.insert(out.end(), h.target_hash.begin(), h.target_hash.end());
    return out;
}

Hash256 header_hash(const BlockHeader& header) {
    return sha256(BytesView(serialize_header(header)));
}

Hash256 target_for_difficulty(int difficulty_bits) {
    if (difficulty_bits < 0 || difficulty_bits > 32) {
        throw Error(Errc::ParseError, "difficulty out of range [0, 32]");
    }
    Hash256 target;
    target.fill(0xff);
    int bits = difficulty_bits;
    for (std::size_t i = 0; i < target.size() && bits > 0; ++i) {
        const int take = std::min(bits, 8);
        target[i] = std::uint8_t(0xff >> take);
        bits -= take;
    }
    return target;
}

Hash256 merkle_root(const std::vector<Bytes>& chunks) {
    if (chunks.empty()) {
        const std::uint8_t leaf_domain = 0x00;
        return sha256(BytesView(&leaf_domain, 1));
    }
    std::vector<Hash256> level;
    level.reserve(chunks.size());
    for (const auto& chunk : chunks) {
        Sha256 h;
        const std::uint8_t domain = 0x00;
        h.update(BytesView(&domain, 1));
        h.update(BytesView(chunk));
        level.push_back(h.finish());
    }
    while (level.size() > 1 || chunks.size() == 1) {
        std::vector<Hash256> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i < level.size(); i += 2) {
            const Hash256& left = level[i];
            const Hash256& right = i + 1 < level.size() ? level[i + 1] : level[i];
            Sha256 h;
            const std::uint8_t domain = 0x01;
            h.update(BytesView(&domain, 1));
            h.update(BytesView(left.data(), left.size()));
            h.update(BytesView(right.data(), right.size()));
            next.push_back(h.finish());
        }
        level = std::move(next);
        if (chunks.size() == 1) break;  // single leaf: one duplicated-node level
    }
    return level[0];
}

Hash256 body_root(BytesView body_ciphertext) {
    std::vector<Bytes> chunks;
    for (std::size_t off = 0; off < body_ciphertext.size(); off += kMerkleChunk) {
        const std::size_t len = std::min(kMerkleChunk, body_ciphertext.size() - off);
        chunks.emplace_back(body_ciphertext.begin() + off, body_ciphertext.begin() + off + len);
    }
    return merkle_root(chunks);
}

std::string body_key_id(const Key32& body_key) {
    Sha256 h;
    h.update("sepris.bodykey");
    h.update(BytesView(body_key.data(), body_key.size()));
    Hash256 d = h.finish();
    return to_hex(BytesView(d.data(), 8));
}

Bytes serialize_transactions(const std::vector<Transaction>& txs) {
    Bytes out;
    put_u32(out, std::uint32_t(txs.size()));
    for (const auto& tx : txs) {
        out.push_back(std::uint8_t(tx.kind));
        put_u32(out, std::uint32_t(tx.payload.size()));
        out.insert(out.end(), tx.payload.begin(), tx.payload.end());
        put_u16(out, std::uint16_t(tx.submitter_uid.size()));
        out.insert(out.end(), tx.submitter_uid.begin(), tx.submitter_uid.end());
        put_u32(out, std::uint32_t(tx.signature.size()));
        out.insert(out.end(), tx.signature.begin(), tx.signature.end());
    }
    return out;
}

std::vector<Transaction> parse_transactions(BytesView data) {
    ByteReader r(data);
    const std::uint32_t count = r.u32();
    std::vector<Transaction> txs;
    txs.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Transaction tx;
        const std::uint8_t kind = r.u8();
        if (kind < 1 || kind > 3) throw Error(Errc::ParseError, "bad transaction kind");
        tx.kind = TxKind(kind);
        tx.payload = r.take(r.u32());
        tx.submitter_uid = to_string(r.take(r.u16()));
        tx.signature = r.take(r.u32());
        txs.push_back(std::move(tx));
    }
    if (!r.done()) throw Error(Errc::ParseError, "trailing bytes after transactions");
    return txs;
}

Chain genesis(int difficulty_bits, std::uint64_t timestamp) {
    Chain chain;
    chain.difficulty_bits = difficulty_bits;
    Block g;
    g.header.timestamp = timestamp;
    g.header.body_root_hash = merkle_root({});
    g.header.target_hash = target_for_difficulty(difficulty_bits);
    chain.blocks.push_back(std::move(g));
    return chain;
}

Block mine_block(const Chain& chain, const std::vector<Transaction>& txs, const Key32& body_key,
                 std::uint64_t clock, const TxVerifier& verifier, std::uint64_t* attempts,
                 std::uint64_t nonce_space) {
    if (chain.blocks.empty()) throw Error(Errc::ParseError, "cannot mine onto an empty chain");
    if (nonce_space == 0 || nonce_space > (1ULL << 32)) {
        throw Error(Errc::ParseError, "nonce space must be in (0, 2^32]");
    }
    if (verifier) {
        for (const auto& tx : txs) {
            if (!verifier(tx)) {
                throw Error(Errc::InvalidTransaction,
                            "transaction signature rejected for " + tx.submitter_uid);
            }
        }
    }

    Block block;
    block.body_key_id = body_key_id(body_key);
    block.body_ciphertext = encrypt_body(serialize_transactions(txs), body_key,
                                         block.body_key_id);
    block.header.prev_hash = header_hash(chain.blocks.back().header);
    block.header.timestamp = std::max(clock, chain.blocks.back().header.timestamp);
    block.header.body_root_hash = body_root(BytesView(block.body_ciphertext));
    block.header.target_hash = target_for_difficulty(chain.difficulty_bits);

    std::uint64_t tried = 0;
    for (;;) {
        for (std::uint64_t nonce = 0; nonce < nonce_space; ++nonce) {
            block.header.nonce = std::uint32_t(nonce);
            ++tried;
            if (leading_zero_bits(header_hash(block.header)) >= chain.difficulty_bits) {
                if (attempts) *attempts = tried;
                return block;
            }
        }
        ++block.header.timestamp;  // nonce space exhausted
    }
}

Validity validate_block(const Block& prev, const Block& candidate, int difficulty_bits) {
    if (candidate.header.prev_hash != header_hash(prev.header)) {
        return {false, "PrevHashMismatch"};
    }
    if (candidate.header.target_hash != target_for_difficulty(difficulty_bits)) {
        return {false, "TargetMismatch"};
    }
    if (leading_zero_bits(header_hash(candidate.header)) < difficulty_bits) {
        return {false, "PowInvalid"};
    }
    if (candidate.header.body_root_hash != body_root(BytesView(candidate.body_ciphertext))) {
        return {false, "MerkleMismatch"};
    }
    if (candidate.header.timestamp < prev.header.timestamp) {
        return {false, "TimestampRegressed"};
    }
    return {};
}

ChainValidity validate_chain(const Chain& chain) {
    if (chain.blocks.empty()) return {false, 0, "EmptyChain"};

    const Block& g = chain.blocks.front();
    Hash256 zero{};
    if (g.header.prev_hash != zero) return {false, 0, "GenesisPrevNonzero"};
    if (!g.body_ciphertext.empty()) return {false, 0, "GenesisBodyNonempty"};
    if (g.header.body_root_hash != merkle_root({})) return {false, 0, "GenesisRootMismatch"};
    if (g.header.target_hash != target_for_difficulty(chain.difficulty_bits)) {
        return {false, 0, "TargetMismatch"};
    }

    for (std::size_t i = 1; i < chain.blocks.size(); ++i) {
        Validity v = validate_block(chain.blocks[i - 1], chain.blocks[i], chain.difficulty_bits);
        if (!v.valid) return {false, i, v.reason};
    }
    return {};
}

std::vector<Transaction> decrypt_body(const Block& block, const Keystore& keystore) {
    auto it = keystore.find(block.body_key_id);
    if (it == keystore.end()) {
        throw Error(Errc::UnknownBodyKey, "no key for id " + block.body_key_id);
    }
    return parse_transactions(BytesView(decrypt_body_bytes(BytesView(block.body_ciphertext),
                                                           it->second)));
}

std::string chain_to_text(const Chain& chain) {
    std::ostringstream os;
    os << nlohmann::json{{"format_version", 1},
                         {"hash_algo", "sha256"},
                         {"difficulty", chain.difficulty_bits}}
              .dump()
       << "\n";
    for (const auto& b : chain.blocks) {
        nlohmann::json j{
            {"version", b.header.version},
            {"prev_hash", hash_hex(b.header.prev_hash)},
            {"timestamp", b.header.timestamp},
            {"nonce", b.header.nonce},
            {"body_root_hash", hash_hex(b.header.body_root_hash)},
            {"target_hash", hash_hex(b.header.target_hash)},
            {"body_ciphertext", to_base64(BytesView(b.body_ciphertext))},
            {"body_key_id", b.body_key_id},
        };
        os << j.dump() << "\n";
    }
    return os.str();
}

Chain chain_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw Error(Errc::ParseError, "empty chain file");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad chain file header: ") + e.what());
    }
    if (header.value("format_version", 0) != 1 || header.value("hash_algo", "") != "sha256") {
        throw Error(Errc::ParseError, "unsupported chain file format");
    }

    Chain chain;
    chain.difficulty_bits = header.value("difficulty", 0);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, std::string("bad block line: ") + e.what());
        }
        Block b;
        b.header.version = j.at("version").get<std::uint16_t>();
        b.header.prev_hash = to_hash(BytesView(from_hex(j.at("prev_hash").get<std::string>())));
        b.header.timestamp = j.at("timestamp").get<std::uint64_t>();
        b.header.nonce = j.at("nonce").get<std::uint32_t>();
        b.header.body_root_hash =
            to_hash(BytesView(from_hex(j.at("body_root_hash").get<std::string>())));
        b.header.target_hash =
            to_hash(BytesView(from_hex(j.at("target_hash").get<std::string>())));
        b.body_ciphertext = from_base64(j.at("body_ciphertext").get<std::string>());
        b.body_key_id = j.at("body_key_id").get<std::string>();
        chain.blocks.push_back(std::move(b));
    }
    return chain;
}

}  // namespace sepris::ledger
