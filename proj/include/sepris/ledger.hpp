#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sepris/common.hpp"
#include "sepris/hash.hpp"

namespace sepris::ledger {

using Key32 = std::array<std::uint8_t, 32>;

struct BlockHeader {
    std::uint16_t version = 1;
    Hash256 prev_hash{};
    std::uint64_t timestamp = 0;
    std::uint32_t nonce = 0;
    Hash256 body_root_hash{};
    Hash256 target_hash{};

    bool operator==(const BlockHeader&) const = default;
};

enum class TxKind : std::uint8_t { RequestRecord = 1, AuditRecord = 2, UserRegistration = 3 };

struct Transaction {
    TxKind kind = TxKind::RequestRecord;
    Bytes payload;
    std::string submitter_uid;
    Bytes signature;

    bool operator==(const Transaction&) const = default;
};

struct Block {
    BlockHeader header;
    Bytes body_ciphertext;
    std::string body_key_id;

    bool operator==(const Block&) const = default;
};

struct Chain {
    std::vector<Block> blocks;
    int difficulty_bits = 0;
};

struct Validity {
    bool valid = true;
    std::string reason;  // first failed check when invalid
};

struct ChainValidity {
    bool valid = true;
    std::size_t block_index = 0;  // index of the first failing block
    std::string reason;
};

// Fixed little-endian header serialization (110 bytes) and its hash.
Bytes serialize_header(const BlockHeader& header);
Hash256 header_hash(const BlockHeader& header);

// Difficulty expressed as required leading zero bits of the header hash;
// the equivalent explicit target is stored in the header.
Hash256 target_for_difficulty(int difficulty_bits);

// Binary Merkle tree with domain-separated leaves (0x00) and nodes (0x01);
// odd nodes are duplicated at every level; empty input hashes the empty
// leaf.
Hash256 merkle_root(const std::vector<Bytes>& chunks);

// Body ciphertext is hashed in fixed-size chunks.
inline constexpr std::size_t kMerkleChunk = 256;
Hash256 body_root(BytesView body_ciphertext);

std::string body_key_id(const Key32& body_key);

Bytes serialize_transactions(const std::vector<Transaction>& txs);
std::vector<Transaction> parse_transactions(BytesView data);

// difficulty <= 32 (desk scale); timestamp pins the genesis header.
Chain genesis(int difficulty_bits, std::uint64_t timestamp = 0);

using TxVerifier = std::function<bool(const Transaction&)>;

// Serializes and encrypts the body, then searches nonces from zero until
// the header hash meets the difficulty; on nonce exhaustion the timestamp
// advances one second and the search restarts. Lowest qualifying nonce
// wins, so mining is deterministic for a pinned clock. nonce_space narrows
// the 32-bit search space so the exhaustion path is exercisable.
Block mine_block(const Chain& chain, const std::vector<Transaction>& txs, const Key32& body_key,
                 std::uint64_t clock, const TxVerifier& verifier = nullptr,
                 std::uint64_t* attempts = nullptr, std::uint64_t nonce_space = 1ULL << 32);

Validity validate_block(const Block& prev, const Block& candidate, int difficulty_bits);
ChainValidity validate_chain(const Chain& chain);

using Keystore = std::map<std::string, Key32>;

std::vector<Transaction> decrypt_body(const Block& block, const Keystore& keystore);

// Chain file: a JSON header line (format version, hash algorithm,
// difficulty) followed by one JSON line per block.
std::string chain_to_text(const Chain& chain);
Chain chain_from_text(const std::string& text);

}  // namespace sepris::ledger
