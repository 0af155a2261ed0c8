#pragma once

#include <array>
#include <string>

#include "sepris/common.hpp"

namespace sepris {

// Deterministic random byte generator (ChaCha20 keystream over an
// incrementing block counter). Everything in the project that needs
// randomness draws from one of these, so runs are replayable from a seed.
class Drbg {
public:
    explicit Drbg(std::uint64_t seed);
    explicit Drbg(BytesView seed_material);

    void fill(std::uint8_t* out, std::size_t n);
    Bytes bytes(std::size_t n);

    std::uint64_t next_u64();

    // Uniform value in [0, bound) without modulo bias.
    std::uint64_t uniform(std::uint64_t bound);

    // Independent child stream; children with distinct labels never overlap.
    Drbg derive(const std::string& label) const;

    // Decimal digit string of the given length, e.g. UID and access-code
    // suffixes.
    std::string digits(std::size_t count);

private:
    std::array<std::uint8_t, 32> key_;
    std::uint64_t counter_ = 0;
};

}  // namespace sepris
