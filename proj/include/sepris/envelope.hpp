#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>

#include "sepris/common.hpp"
#include "sepris/drbg.hpp"

namespace sepris::envelope {

using Key32 = std::array<std::uint8_t, 32>;

struct KeyPair {
    Key32 private_scalar{};  // deterministic signing-key seed
    Key32 public_point{};
    std::string owner_label;
};

// Double lock-box wire object: sign-then-encrypt. The inner layer is the
// sender's signature over the payload; the outer layer is hybrid
// public-key encryption (ephemeral key agreement + authenticated symmetric
// cipher) to the receiver. Only the recipient hint is visible on the wire.
struct Envelope {
    std::array<std::uint8_t, 8> recipient_hint{};
    Key32 encapsulation{};  // ephemeral public key
    Bytes ciphertext;
    std::array<std::uint8_t, 16> auth_tag{};

    bool operator==(const Envelope&) const = default;
};

// Deterministic from the seed material; throws EntropyError on empty seed.
KeyPair generate_keypair(const std::string& label, BytesView seed);

// Short public-key fingerprint used as the recipient hint.
std::array<std::uint8_t, 8> key_fingerprint(const Key32& public_point);

// Ephemeral material comes from the caller's seeded generator so that whole
// scenario runs stay replayable.
Envelope seal(const KeyPair& sender, const Key32& receiver_pub, BytesView payload, Drbg& rng);

// Decrypts, verifies the inner signature against expected_sender_pub and
// returns the payload. sender_label (carried inside the ciphertext) is
// reported when requested.
Bytes open(const KeyPair& receiver, const Key32& expected_sender_pub, const Envelope& env,
           std::string* sender_label = nullptr);

Bytes serialize_envelope(const Envelope& env);
Envelope parse_envelope(BytesView data);

// "SPRK" key files: private files carry the 32-byte private scalar, public
// files the 32-byte public point; same layout otherwise.
void save_secret_key(const std::string& path, const KeyPair& pair);
void save_public_key(const std::string& path, const KeyPair& pair);
KeyPair load_secret_key(const std::string& path);
std::pair<Key32, std::string> load_public_key(const std::string& path);

// Label -> public key directory with unique labels.
class KeyRegistry {
public:
    void add(const std::string& label, const Key32& public_point);
    const Key32& get(const std::string& label) const;
    bool contains(const std::string& label) const { return keys_.contains(label); }

private:
    std::map<std::string, Key32> keys_;
};

}  // namespace sepris::envelope
