#include "sepris/drbg.hpp"

#include <sodium.h>

#include <cstring>

#include "sepris/hash.hpp"

namespace sepris {

Drbg::Drbg(std::uint64_t seed) {
    Sha256 h;
    h.update(std::string("sepris.drbg.v1"));
    h.update_u64(seed);
    key_ = h.finish();
}

Drbg::Drbg(BytesView seed_material) {
    Sha256 h;
    h.update(std::string("sepris.drbg.v1"));
    h.update(seed_material);
    key_ = h.finish();
}

void Drbg::fill(std::uint8_t* out, std::size_t n) {
    std::uint8_t nonce[8];
    for (int i = 0; i < 8; ++i) nonce[i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
    ++counter_;
    crypto_stream_chacha20(out, n, nonce, key_.data());
}

Bytes Drbg::bytes(std::size_t n) {
    Bytes out(n);
    if (n > 0) fill(out.data(), n);
    return out;
}

std::uint64_t Drbg::next_u64() {
    std::uint8_t buf[8];
    fill(buf, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

std::uint64_t Drbg::uniform(std::uint64_t bound) {
    if (bound < 2) return 0;
    // Rejection sampling over the largest multiple of bound.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % bound;
}

Drbg Drbg::derive(const std::string& label) const {
    Sha256 h;
    h.update(BytesView(key_.data(), key_.size()));
    h.update(std::string("sepris.drbg.child"));
    h.update(label);
    Hash256 child_key = h.finish();
    Drbg child(std::uint64_t{0});
    child.key_ = child_key;
    child.counter_ = 0;
    return child;
}

std::string Drbg::digits(std::size_t count) {
    std::string out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(static_cast<char>('0' + uniform(10)));
    return out;
}

}  // namespace sepris
