#pragma once

#include <sodium.h>

#include <array>

#include "sepris/common.hpp"

namespace sepris {

using Hash256 = std::array<std::uint8_t, 32>;

// Incremental variant for hashing composite records without concatenating.
class Sha256 {
public:
    Sha256() { crypto_hash_sha256_init(&state_); }

    Sha256& update(BytesView data) {
        crypto_hash_sha256_update(&state_, data.data(), data.size());
        return *this;
    }

    Sha256& update(const std::string& s) {
        crypto_hash_sha256_update(&state_, reinterpret_cast<const std::uint8_t*>(s.data()),
                                  s.size());
        return *this;
    }

    Sha256& update_u64(std::uint64_t v) {
        std::uint8_t buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
        crypto_hash_sha256_update(&state_, buf, 8);
        return *this;
    }

    Hash256 finish() {
        Hash256 out;
        crypto_hash_sha256_final(&state_, out.data());
        return out;
    }

private:
    crypto_hash_sha256_state state_;
};

inline Hash256 sha256(BytesView data) {
    Hash256 out;
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

inline Bytes hash_bytes(const Hash256& h) { return Bytes(h.begin(), h.end()); }

inline std::string hash_hex(const Hash256& h) { return to_hex(BytesView(h.data(), h.size())); }

// Leading zero bits of a 256-bit digest, used as the mining difficulty measure.
inline int leading_zero_bits(const Hash256& h) {
    int bits = 0;
    for (std::uint8_t byte : h) {
        if (byte == 0) {
            bits += 8;
            continue;
        }
        for (int b = 7; b >= 0; --b) {
            if (byte & (1u << b)) return bits;
            ++bits;
        }
    }
    return bits;
}

// Call once at startup; safe to call repeatedly.
inline void init_crypto() {
    if (sodium_init() < 0) throw Error(Errc::IoError, "libsodium initialization failed");
}

}  // namespace sepris
