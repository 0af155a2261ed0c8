#include "sepris/envelope.hpp"

#include <sodium.h>

#include <cstring>
#include <fstream>

#include "sepris/hash.hpp"

namespace sepris::envelope {

namespace {

struct SignKeys {
    std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> pk;
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk;
};

SignKeys expand(const Key32& scalar) {
    SignKeys keys{};
    crypto_sign_seed_keypair(keys.pk.data(), keys.sk.data(), scalar.data());
    return keys;
}

Key32 derive_symmetric_key(const Key32& shared, const Key32& ephemeral_pub,
                           const Key32& receiver_x_pub) {
    Sha256 h;
    h.update("sepris.envelope.key");
    h.update(BytesView(shared.data(), shared.size()));
    h.update(BytesView(ephemeral_pub.data(), ephemeral_pub.size()));
    h.update(BytesView(receiver_x_pub.data(), receiver_x_pub.size()));
    Hash256 d = h.finish();
    Key32 key{};
    std::memcpy(key.data(), d.data(), key.size());
    return key;
}

// Inner plaintext: u32 payload length, payload, detached signature,
// u16 label length, sender label.
Bytes pack_inner(BytesView payload, const std::array<std::uint8_t, 64>& sig,
                 const std::string& label) {
    Bytes inner;
    inner.reserve(4 + payload.size() + sig.size() + 2 + label.size());
    put_u32(inner, std::uint32_t(payload.size()));
    inner.insert(inner.end(), payload.begin(), payload.end());
    inner.insert(inner.end(), sig.begin(), sig.end());
    put_u16(inner, std::uint16_t(label.size()));
    inner.insert(inner.end(), label.begin(), label.end());
    return inner;
}

}  // namespace

KeyPair generate_keypair(const std::string& label, BytesView seed) {
    if (seed.empty()) throw Error(Errc::EntropyError, "empty keypair seed");
    KeyPair pair;
    pair.owner_label = label;
    Sha256 h;
    h.update("sepris.keypair.v1");
    h.update(seed);
    Hash256 d = h.finish();
    std::memcpy(pair.private_scalar.data(), d.data(), pair.private_scalar.size());
    pair.public_point = [&] {
        auto keys = expand(pair.private_scalar);
        Key32 pk{};
        std::memcpy(pk.data(), keys.pk.data(), pk.size());
        return pk;
    }();
    return pair;
}

std::array<std::uint8_t, 8> key_fingerprint(const Key32& public_point) {
    Sha256 h;
    h.update("sepris.fp");
    h.update(BytesView(public_point.data(), public_point.size()));
    Hash256 d = h.finish();
    std::array<std::uint8_t, 8> fp{};
    std::memcpy(fp.data(), d.data(), fp.size());
    return fp;
}

Envelope seal(const KeyPair& sender, const Key32& receiver_pub, BytesView payload, Drbg& rng) {
    if (payload.empty()) throw Error(Errc::EmptyInput, "empty payload");

    // Inner layer: detached signature under the sender's signing key.
    auto sender_keys = expand(sender.private_scalar);
    std::array<std::uint8_t, 64> sig{};
    crypto_sign_detached(sig.data(), nullptr, payload.data(), payload.size(),
                         sender_keys.sk.data());
    Bytes inner = pack_inner(payload, sig, sender.owner_label);

    // Outer layer: ephemeral agreement against the receiver's key converted
    // to the Montgomery curve, then an authenticated symmetric box. The
    // symmetric key is single-use, so a fixed all-zero box nonce is safe.
    Key32 receiver_x{};
    if (crypto_sign_ed25519_pk_to_curve25519(receiver_x.data(), receiver_pub.data()) != 0) {
        throw Error(Errc::ParseError, "receiver public key is not convertible");
    }

    Envelope env;
    env.recipient_hint = key_fingerprint(receiver_pub);
    Key32 shared{};
    for (;;) {
        Key32 eph_sk{};
        rng.fill(eph_sk.data(), eph_sk.size());
        crypto_scalarmult_base(env.encapsulation.data(), eph_sk.data());
        if (crypto_scalarmult(shared.data(), eph_sk.data(), receiver_x.data()) == 0) break;
    }
    Key32 sym = derive_symmetric_key(shared, env.encapsulation, receiver_x);

    std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> nonce{};
    env.ciphertext.resize(inner.size());
    crypto_secretbox_detached(env.ciphertext.data(), env.auth_tag.data(), inner.data(),
                              inner.size(), nonce.data(), sym.data());
    return env;
}

Bytes open(const KeyPair& receiver, const Key32& expected_sender_pub, const Envelope& env,
           std::string* sender_label) {
    if (env.recipient_hint != key_fingerprint(receiver.public_point)) {
        throw Error(Errc::WrongRecipient, "envelope addressed to a different key");
    }

    auto receiver_keys = expand(receiver.private_scalar);
    Key32 receiver_x_sk{}, receiver_x_pk{};
    if (crypto_sign_ed25519_sk_to_curve25519(receiver_x_sk.data(), receiver_keys.sk.data()) != 0 ||
        crypto_sign_ed25519_pk_to_curve25519(receiver_x_pk.data(),
                                             receiver.public_point.data()) != 0) {
        throw Error(Errc::ParseError, "receiver key is not convertible");
    }

    Key32 shared{};
    if (crypto_scalarmult(shared.data(), receiver_x_sk.data(), env.encapsulation.data()) != 0) {
        throw Error(Errc::AuthTagMismatch, "degenerate encapsulation");
    }
    Key32 sym = derive_symmetric_key(shared, env.encapsulation, receiver_x_pk);

    std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> nonce{};
    Bytes inner(env.ciphertext.size());
    if (crypto_secretbox_open_detached(inner.data(), env.ciphertext.data(), env.auth_tag.data(),
                                       env.ciphertext.size(), nonce.data(), sym.data()) != 0) {
        throw Error(Errc::AuthTagMismatch, "envelope authentication failed");
    }

    ByteReader r{BytesView(inner)};
    const std::uint32_t payload_len = r.u32();
    Bytes payload = r.take(payload_len);
    Bytes sig = r.take(64);
    const std::uint16_t label_len = r.u16();
    Bytes label = r.take(label_len);
    if (!r.done()) throw Error(Errc::ParseError, "trailing bytes in envelope body");

    if (crypto_sign_verify_detached(sig.data(), payload.data(), payload.size(),
                                    expected_sender_pub.data()) != 0) {
        throw Error(Errc::SignatureInvalid, "inner signature does not verify");
    }
    if (sender_label) *sender_label = to_string(label);
    return payload;
}

Bytes serialize_envelope(const Envelope& env) {
    Bytes out;
    auto field = [&out](BytesView data) {
        put_u32(out, std::uint32_t(data.size()));
        out.insert(out.end(), data.begin(), data.end());
    };
    field(BytesView(env.recipient_hint.data(), env.recipient_hint.size()));
    field(BytesView(env.encapsulation.data(), env.encapsulation.size()));
    field(BytesView(env.ciphertext));
    field(BytesView(env.auth_tag.data(), env.auth_tag.size()));
    return out;
}

Envelope parse_envelope(BytesView data) {
    ByteReader r(data);
    auto field = [&r](std::size_t expected) {
        const std::uint32_t len = r.u32();
        if (expected != 0 && len != expected) {
            throw Error(Errc::ParseError, "unexpected envelope field length");
        }
        return r.take(len);
    };
    Envelope env;
    Bytes hint = field(8);
    std::copy(hint.begin(), hint.end(), env.recipient_hint.begin());
    Bytes encap = field(32);
    std::copy(encap.begin(), encap.end(), env.encapsulation.begin());
    env.ciphertext = field(0);
    Bytes tag = field(16);
    std::copy(tag.begin(), tag.end(), env.auth_tag.begin());
    if (!r.done()) throw Error(Errc::ParseError, "trailing bytes after envelope");
    return env;
}

namespace {

constexpr std::uint16_t kKeyFileVersion = 1;

void save_key_file(const std::string& path, const std::string& label, const Key32& material) {
    Bytes out;
    out.insert(out.end(), {'S', 'P', 'R', 'K'});
    put_u16(out, kKeyFileVersion);
    put_u16(out, std::uint16_t(label.size()));
    out.insert(out.end(), label.begin(), label.end());
    out.insert(out.end(), material.begin(), material.end());

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::IoError, "cannot write key file: " + path);
    f.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
    if (!f) throw Error(Errc::IoError, "short write: " + path);
}

std::pair<Key32, std::string> load_key_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::IoError, "cannot read key file: " + path);
    Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    ByteReader r{BytesView(data)};
    Bytes magic = r.take(4);
    if (std::memcmp(magic.data(), "SPRK", 4) != 0) {
        throw Error(Errc::ParseError, "bad key file magic: " + path);
    }
    if (r.u16() != kKeyFileVersion) throw Error(Errc::ParseError, "unsupported key file version");
    const std::uint16_t label_len = r.u16();
    std::string label = to_string(r.take(label_len));
    Bytes material = r.take(32);
    if (!r.done()) throw Error(Errc::ParseError, "trailing bytes in key file");
    Key32 key{};
    std::copy(material.begin(), material.end(), key.begin());
    return {key, label};
}

}  // namespace

void save_secret_key(const std::string& path, const KeyPair& pair) {
    save_key_file(path, pair.owner_label, pair.private_scalar);
}

void save_public_key(const std::string& path, const KeyPair& pair) {
    save_key_file(path, pair.owner_label, pair.public_point);
}

KeyPair load_secret_key(const std::string& path) {
    auto [scalar, label] = load_key_file(path);
    KeyPair pair;
    pair.private_scalar = scalar;
    pair.owner_label = label;
    auto keys = expand(scalar);
    std::memcpy(pair.public_point.data(), keys.pk.data(), pair.public_point.size());
    return pair;
}

std::pair<Key32, std::string> load_public_key(const std::string& path) {
    return load_key_file(path);
}

void KeyRegistry::add(const std::string& label, const Key32& public_point) {
    if (!keys_.emplace(label, public_point).second) {
        throw Error(Errc::DuplicateLabel, "label already registered: " + label);
    }
}

const Key32& KeyRegistry::get(const std::string& label) const {
    auto it = keys_.find(label);
    if (it == keys_.end()) throw Error(Errc::UnknownUser, "no key for label: " + label);
    return it->second;
}

}  // namespace sepris::envelope
