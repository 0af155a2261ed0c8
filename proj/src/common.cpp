#include "sepris/common.hpp"

#include <sodium.h>

namespace sepris {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::InvalidQuality: return "InvalidQuality";
        case Errc::WeakKey: return "WeakKey";
        case Errc::GeometryError: return "GeometryError";
        case Errc::WrongShuffleKey: return "WrongShuffleKey";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::TooFewBits: return "TooFewBits";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::ZeroVariance: return "ZeroVariance";
        case Errc::EntropyError: return "EntropyError";
        case Errc::AuthTagMismatch: return "AuthTagMismatch";
        case Errc::SignatureInvalid: return "SignatureInvalid";
        case Errc::WrongRecipient: return "WrongRecipient";
        case Errc::UnknownUser: return "UnknownUser";
        case Errc::CredentialMismatch: return "CredentialMismatch";
        case Errc::RegistryCollision: return "RegistryCollision";
        case Errc::CodeAlreadyConsumed: return "CodeAlreadyConsumed";
        case Errc::UnknownBodyKey: return "UnknownBodyKey";
        case Errc::InvalidTransaction: return "InvalidTransaction";
        case Errc::UnknownStorageSite: return "UnknownStorageSite";
        case Errc::DuplicateSegment: return "DuplicateSegment";
        case Errc::NoMatchingGrant: return "NoMatchingGrant";
        case Errc::SegmentNotFound: return "SegmentNotFound";
        case Errc::DivergentAcl: return "DivergentAcl";
        case Errc::DuplicateLabel: return "DuplicateLabel";
        case Errc::IoError: return "IoError";
        case Errc::ParseError: return "ParseError";
    }
    return "UnknownError";
}

std::string to_hex(BytesView data) {
    std::string out(data.size() * 2 + 1, '\0');
    sodium_bin2hex(out.data(), out.size(), data.data(), data.size());
    out.resize(data.size() * 2);
    return out;
}

Bytes from_hex(const std::string& hex) {
    Bytes out(hex.size() / 2 + 1);
    std::size_t written = 0;
    if (sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr, &written,
                       nullptr) != 0) {
        throw Error(Errc::ParseError, "invalid hex string");
    }
    out.resize(written);
    return out;
}

std::string to_base64(BytesView data) {
    const std::size_t max = sodium_base64_encoded_len(data.size(), sodium_base64_VARIANT_ORIGINAL);
    std::string out(max, '\0');
    sodium_bin2base64(out.data(), out.size(), data.data(), data.size(),
                      sodium_base64_VARIANT_ORIGINAL);
    out.resize(out.find('\0'));
    return out;
}

Bytes from_base64(const std::string& b64) {
    Bytes out(b64.size());
    std::size_t written = 0;
    if (sodium_base642bin(out.data(), out.size(), b64.data(), b64.size(), nullptr, &written,
                          nullptr, sodium_base64_VARIANT_ORIGINAL) != 0) {
        throw Error(Errc::ParseError, "invalid base64 string");
    }
    out.resize(written);
    return out;
}

void put_u16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteReader::need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(Errc::ParseError, "truncated input");
}

std::uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

std::uint16_t ByteReader::u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
}

std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
}

Bytes ByteReader::take(std::size_t n) {
    need(n);
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
}

}  // namespace sepris
