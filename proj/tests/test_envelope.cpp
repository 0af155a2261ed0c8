#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include "sepris/envelope.hpp"

#include <set>
#include <string>

#include "sepris/drbg.hpp"
#include "sepris/hash.hpp"
#include "support.hpp"
#include "testutil.hpp"

using namespace sepris;
using testutil::error_code_of;

namespace {

envelope::KeyPair keypair_for(const std::string& label, std::uint64_t seed) {
    const Bytes material = Drbg(seed).bytes(32);
    return envelope::generate_keypair(label, BytesView(material));
}

constexpr const char* kSampleUid = "court322874352017640022980892363199962446587";

}  // namespace

TEST_CASE("keypair generation is deterministic in the seed") {
    init_crypto();
    const envelope::KeyPair a = keypair_for("alice", 1);
    const envelope::KeyPair b = keypair_for("alice", 1);
    CHECK(a.private_scalar == b.private_scalar);
    CHECK(a.public_point == b.public_point);
    CHECK(a.owner_label == "alice");

    CHECK(error_code_of([] { envelope::generate_keypair("x", BytesView()); }) ==
          Errc::EntropyError);
}

TEST_CASE("distinct seeds give distinct public points") {
    init_crypto();
    std::set<envelope::Key32> points;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        points.insert(keypair_for("k", seed).public_point);
    }
    CHECK(points.size() == 10000);
}

TEST_CASE("seal and open round trip the sample identity string") {
    init_crypto();
    const envelope::KeyPair court = keypair_for("court", 10);
    const envelope::KeyPair node = keypair_for("sac2", 11);
    Drbg rng(12);

    const Bytes payload = to_bytes(kSampleUid);
    const envelope::Envelope env =
        envelope::seal(court, node.public_point, BytesView(payload), rng);

    std::string sender_label;
    const Bytes opened =
        envelope::open(node, court.public_point, env, &sender_label);
    CHECK(to_string(BytesView(opened)) == kSampleUid);
    CHECK(sender_label == "court");

    CHECK(error_code_of([&] {
              Drbg r(0);
              envelope::seal(court, node.public_point, BytesView(), r);
          }) == Errc::EmptyInput);
}

TEST_CASE("fresh ephemerals change the wire bytes but not the payload") {
    init_crypto();
    const envelope::KeyPair sender = keypair_for("s", 20);
    const envelope::KeyPair receiver = keypair_for("r", 21);
    Drbg rng(22);

    const Bytes payload = to_bytes("the same message");
    const envelope::Envelope a =
        envelope::seal(sender, receiver.public_point, BytesView(payload), rng);
    const envelope::Envelope b =
        envelope::seal(sender, receiver.public_point, BytesView(payload), rng);

    CHECK(a.encapsulation != b.encapsulation);
    CHECK(a.ciphertext != b.ciphertext);
    CHECK(envelope::open(receiver, sender.public_point, a) == payload);
    CHECK(envelope::open(receiver, sender.public_point, b) == payload);

    // Equal-length payloads produce equal-length ciphertexts.
    const Bytes other = to_bytes("a different text");
    REQUIRE(other.size() == payload.size());
    const envelope::Envelope c =
        envelope::seal(sender, receiver.public_point, BytesView(other), rng);
    CHECK(c.ciphertext.size() == a.ciphertext.size());
}

TEST_CASE("tampering with the wire is detected") {
    init_crypto();
    const envelope::KeyPair sender = keypair_for("s", 30);
    const envelope::KeyPair receiver = keypair_for("r", 31);
    Drbg rng(32);
    const Bytes payload = to_bytes("guarded payload");
    const envelope::Envelope env =
        envelope::seal(sender, receiver.public_point, BytesView(payload), rng);

    envelope::Envelope flipped = env;
    flipped.ciphertext[0] ^= 0x01;
    CHECK(error_code_of([&] { envelope::open(receiver, sender.public_point, flipped); }) ==
          Errc::AuthTagMismatch);

    flipped = env;
    flipped.ciphertext[flipped.ciphertext.size() / 2] ^= 0x80;
    CHECK(error_code_of([&] { envelope::open(receiver, sender.public_point, flipped); }) ==
          Errc::AuthTagMismatch);

    flipped = env;
    flipped.auth_tag[5] ^= 0x10;
    CHECK(error_code_of([&] { envelope::open(receiver, sender.public_point, flipped); }) ==
          Errc::AuthTagMismatch);
}

TEST_CASE("only the addressed key opens the envelope") {
    init_crypto();
    const envelope::KeyPair sender = keypair_for("s", 40);
    const envelope::KeyPair receiver = keypair_for("r", 41);
    const envelope::KeyPair outsider = keypair_for("o", 42);
    Drbg rng(43);
    const Bytes payload = to_bytes("addressed");
    const envelope::Envelope env =
        envelope::seal(sender, receiver.public_point, BytesView(payload), rng);

    CHECK(error_code_of([&] { envelope::open(outsider, sender.public_point, env); }) ==
          Errc::WrongRecipient);
}

TEST_CASE("a different sender's valid envelope is not accepted as the claimed sender") {
    init_crypto();
    const envelope::KeyPair claimed = keypair_for("claimed", 50);
    const envelope::KeyPair forger = keypair_for("forger", 51);
    const envelope::KeyPair receiver = keypair_for("r", 52);
    Drbg rng(53);

    // The forger signs the same payload with their own key; the receiver
    // expects the claimed sender, so the inner layer must reject it.
    const Bytes payload = to_bytes(kSampleUid);
    const envelope::Envelope spliced =
        envelope::seal(forger, receiver.public_point, BytesView(payload), rng);
    CHECK(error_code_of([&] { envelope::open(receiver, claimed.public_point, spliced); }) ==
          Errc::SignatureInvalid);
}

TEST_CASE("payloads up to a mebibyte round trip") {
    init_crypto();
    const envelope::KeyPair sender = keypair_for("s", 60);
    const envelope::KeyPair receiver = keypair_for("r", 61);
    Drbg rng(62);

    const Bytes payload = Drbg(63).bytes(1 << 20);
    const envelope::Envelope env =
        envelope::seal(sender, receiver.public_point, BytesView(payload), rng);
    CHECK(envelope::open(receiver, sender.public_point, env) == payload);
}

TEST_CASE("envelope wire form round trips") {
    init_crypto();
    const envelope::KeyPair sender = keypair_for("s", 70);
    const envelope::KeyPair receiver = keypair_for("r", 71);
    Drbg rng(72);
    const envelope::Envelope env = envelope::seal(
        sender, receiver.public_point, BytesView(to_bytes("wire form")), rng);

    const Bytes wire = envelope::serialize_envelope(env);
    CHECK(envelope::parse_envelope(BytesView(wire)) == env);

    Bytes truncated(wire.begin(), wire.begin() + wire.size() - 3);
    CHECK_THROWS_AS(envelope::parse_envelope(BytesView(truncated)), Error);

    Bytes trailing = wire;
    trailing.push_back(0);
    CHECK(error_code_of([&] { envelope::parse_envelope(BytesView(trailing)); }) ==
          Errc::ParseError);
}

TEST_CASE("key files round trip both halves of the pair") {
    init_crypto();
    const testutil::TempDir dir("sepris-envelope");
    const envelope::KeyPair pair = keypair_for("site-key", 80);

    const std::string secret_path = (dir.path() / "site.key").string();
    const std::string public_path = (dir.path() / "site.pub").string();
    envelope::save_secret_key(secret_path, pair);
    envelope::save_public_key(public_path, pair);

    const envelope::KeyPair loaded = envelope::load_secret_key(secret_path);
    CHECK(loaded.private_scalar == pair.private_scalar);
    CHECK(loaded.public_point == pair.public_point);
    CHECK(loaded.owner_label == "site-key");

    const auto [pub, label] = envelope::load_public_key(public_path);
    CHECK(pub == pair.public_point);
    CHECK(label == "site-key");

    // A loaded pair is fully functional.
    Drbg rng(81);
    const envelope::Envelope env =
        envelope::seal(loaded, pub, BytesView(to_bytes("self venture")), rng);
    CHECK(to_string(BytesView(envelope::open(loaded, pair.public_point, env))) ==
          "self venture");

    CHECK(error_code_of([&] {
              envelope::load_secret_key((dir.path() / "absent.key").string());
          }) == Errc::IoError);
}

TEST_CASE("registry labels are unique") {
    envelope::KeyRegistry registry;
    const envelope::Key32 a{{1}};
    const envelope::Key32 b{{2}};
    registry.add("alice", a);
    CHECK(registry.contains("alice"));
    CHECK(registry.get("alice") == a);
    CHECK(error_code_of([&] { registry.add("alice", b); }) == Errc::DuplicateLabel);
    CHECK(error_code_of([&] { registry.get("bob"); }) == Errc::UnknownUser);
}

TEST_CASE("recipient hints identify the addressed key") {
    init_crypto();
    const envelope::KeyPair receiver = keypair_for("r", 90);
    const envelope::KeyPair sender = keypair_for("s", 91);
    Drbg rng(92);
    const envelope::Envelope env = envelope::seal(
        sender, receiver.public_point, BytesView(to_bytes("hint check")), rng);
    CHECK(env.recipient_hint == envelope::key_fingerprint(receiver.public_point));
    CHECK(envelope::key_fingerprint(receiver.public_point) !=
          envelope::key_fingerprint(sender.public_point));
}
