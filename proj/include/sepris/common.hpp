#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sepris {

using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;

// Every recoverable failure in the library carries one of these codes so
// callers (and the CLI exit-code mapping) can dispatch without string
// matching.
enum class Errc {
    InvalidQuality,
    WeakKey,
    GeometryError,
    WrongShuffleKey,
    DimensionMismatch,
    TooFewBits,
    EmptyInput,
    ZeroVariance,
    EntropyError,
    AuthTagMismatch,
    SignatureInvalid,
    WrongRecipient,
    UnknownUser,
    CredentialMismatch,
    RegistryCollision,
    CodeAlreadyConsumed,
    UnknownBodyKey,
    InvalidTransaction,
    UnknownStorageSite,
    DuplicateSegment,
    NoMatchingGrant,
    SegmentNotFound,
    DivergentAcl,
    DuplicateLabel,
    IoError,
    ParseError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

std::string to_hex(BytesView data);
Bytes from_hex(const std::string& hex);
std::string to_base64(BytesView data);
Bytes from_base64(const std::string& b64);

inline Bytes to_bytes(const std::string& s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(BytesView b) {
    return std::string(b.begin(), b.end());
}

// Little-endian scalar append/read used by every fixed binary layout in the
// project (headers, envelopes, container files).
void put_u16(Bytes& out, std::uint16_t v);
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);

class ByteReader {
public:
    explicit ByteReader(BytesView data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    Bytes take(std::size_t n);
    bool done() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n) const;

    BytesView data_;
    std::size_t pos_ = 0;
};

}  // namespace sepris
