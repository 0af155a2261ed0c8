// Tests for the node network: signed transactions, node-side
// authentication, request broadcast, unanimous consensus, code issuance,
// audit mining, and the end-to-end scenario driver.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"
#include "fixtures.hpp"
#include "testutil.hpp"

#include <sepris/contract.hpp>
#include <sepris/dab.hpp>
#include <sepris/ledger.hpp>
#include <sepris/metrics.hpp>
#include <sepris/network.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

using namespace sepris;
using namespace sepris::network;
using nlohmann::json;
using testutil::error_code_of;

namespace {

envelope::KeyPair kp(const std::string& label, std::uint64_t seed) {
    Drbg rng(seed);
    const Bytes material = rng.bytes(32);
    return envelope::generate_keypair(label, BytesView(material));
}

// Parsed transcript lines of a given event name.
std::vector<json> events_named(const std::vector<std::string>& transcript,
                               const std::string& name) {
    std::vector<json> out;
    for (const auto& line : transcript) {
        json j = json::parse(line);
        if (j.at("event").get<std::string>() == name) out.push_back(std::move(j));
    }
    return out;
}

bool bytes_contain(const Bytes& haystack, const std::string& needle) {
    return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
           haystack.end();
}

// The court walkthrough, run once and shared by read-only test cases.
const ScenarioResult& court_result() {
    static const ScenarioResult result = run_scenario(testutil::court_config());
    return result;
}

}  // namespace

TEST_CASE("transactions verify only under the signer's key") {
    const envelope::KeyPair signer = kp("sac1", 1);
    const std::string uid = "court" + std::string(39, '3');
    const Bytes payload = to_bytes(std::string("{\"x\":1}"));

    ledger::Transaction tx =
        make_transaction(ledger::TxKind::RequestRecord, BytesView(payload), uid, signer);
    CHECK(tx.kind == ledger::TxKind::RequestRecord);
    CHECK(tx.payload == payload);
    CHECK(tx.submitter_uid == uid);
    CHECK(tx.signature.size() == 64);
    CHECK(verify_transaction(tx, signer.public_point));

    CHECK_FALSE(verify_transaction(tx, kp("sac2", 2).public_point));

    ledger::Transaction bad = tx;
    bad.payload.push_back(0x00);
    CHECK_FALSE(verify_transaction(bad, signer.public_point));

    bad = tx;
    bad.submitter_uid += "9";
    CHECK_FALSE(verify_transaction(bad, signer.public_point));

    bad = tx;
    bad.kind = ledger::TxKind::AuditRecord;
    CHECK_FALSE(verify_transaction(bad, signer.public_point));

    bad = tx;
    bad.signature.resize(10);
    CHECK_FALSE(verify_transaction(bad, signer.public_point));
}

TEST_CASE("node authentication issues node-bound session tokens") {
    Drbg rng(5);
    const std::string uid = contract::issue_uid("court", rng);
    const Bytes digest = rng.bytes(32);

    SacNode node;
    node.node_id = "sac1";
    node.uid_registry[uid] = UserEntry{kp("u", 3).public_point, digest, "court"};

    const std::string token = authenticate_user(node, uid, BytesView(digest), 7);
    REQUIRE(token.size() == 32);
    CHECK(node.sessions.at(token) == uid);

    // Distinct per logical time and per node identity.
    CHECK(authenticate_user(node, uid, BytesView(digest), 8) != token);
    SacNode other = node;
    other.node_id = "sac2";
    CHECK(authenticate_user(other, uid, BytesView(digest), 7) != token);

    CHECK(error_code_of([&] {
              authenticate_user(node, "court" + std::string(39, '0'), BytesView(digest), 9);
          }) == Errc::UnknownUser);

    Bytes flipped = digest;
    flipped[5] ^= 0x01;
    CHECK(error_code_of([&] { authenticate_user(node, uid, BytesView(flipped), 9); }) ==
          Errc::CredentialMismatch);
}

TEST_CASE("broadcast reseals the request for every peer except the origin") {
    Network net = court_result().net;  // fully enrolled five-node network
    const ScenarioActor& actor = court_result().actors.front();
    const std::size_t before = net.bus.events().size();

    const Bytes payload = to_bytes(std::string("broadcast probe"));
    Drbg rng(6);
    envelope::Envelope env = envelope::seal(
        actor.keypair, find_node(net, "sac1").keypair.public_point, BytesView(payload), rng);

    std::vector<ProtocolEvent> deliveries =
        broadcast_request(net, "sac1", env, actor.keypair.public_point);
    REQUIRE(deliveries.size() == 4);
    const std::vector<std::string> expected{"sac2", "sac3", "sac4", "sac5"};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(deliveries[i].sender == "sac1");
        CHECK(deliveries[i].receiver == expected[i]);
        const Bytes opened =
            envelope::open(find_node(net, expected[i]).keypair,
                           find_node(net, "sac1").keypair.public_point, deliveries[i].envelope);
        CHECK(opened == payload);
        // Fresh ephemeral per copy: no two wire objects are identical.
        for (std::size_t j = i + 1; j < 4; ++j) {
            CHECK(deliveries[i].envelope.encapsulation != deliveries[j].envelope.encapsulation);
        }
    }
    CHECK(net.bus.events().size() == before + 4);
    CHECK(error_code_of([&] {
              broadcast_request(net, "sac9", env, actor.keypair.public_point);
          }) == Errc::ParseError);
}

TEST_CASE("the message bus totally orders posts and feeds the tap") {
    MessageBus bus;
    std::vector<std::uint64_t> tapped;
    bus.set_tap([&](const ProtocolEvent& ev) { tapped.push_back(ev.logical_time); });

    envelope::Envelope env;
    bus.post(1, "a", "b", env);
    bus.post(2, "b", "c", env);
    const ProtocolEvent& third = bus.post(3, "c", "a", env);

    CHECK(bus.now() == 3);
    CHECK(third.logical_time == 3);
    REQUIRE(bus.events().size() == 3);
    CHECK(bus.events()[0].logical_time == 1);
    CHECK(bus.events()[1].sender == "b");
    CHECK(tapped == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("consensus requires unanimity and mints one replicated block") {
    Network net = court_result().net;
    const ScenarioActor& actor = court_result().actors.front();

    contract::AccessRequest req;
    req.uid = actor.uid;
    req.camera_ids = {"cam-7"};
    req.date = contract::parse_date("2021-03-09");
    req.range = {contract::parse_time("14:00"), contract::parse_time("15:00")};
    req.type = contract::VideoType::WholeContext;
    req.storage_name = "store-a";
    req.storage_address = "off-bc:store-a";

    const std::size_t height = net.nodes.front().chain.blocks.size();

    SUBCASE("unanimous approval grows every replica identically") {
        ConsensusOutcome out = consensus_round(net, req);
        CHECK(out.approved);
        CHECK_FALSE(out.divergent);
        CHECK(out.miner_id == net.nodes[height % net.nodes.size()].node_id);
        REQUIRE(out.decisions.size() == net.nodes.size());
        for (const auto& d : out.decisions) CHECK(d.approved);

        const std::string tip_text = ledger::chain_to_text(net.nodes.front().chain);
        for (const auto& node : net.nodes) {
            CHECK(node.chain.blocks.size() == height + 1);
            CHECK(ledger::validate_chain(node.chain).valid);
            CHECK(ledger::chain_to_text(node.chain) == tip_text);

            const auto txs = ledger::decrypt_body(node.chain.blocks.back(), node.body_keystore);
            REQUIRE(txs.size() == 1);
            CHECK(txs[0].kind == ledger::TxKind::RequestRecord);
            CHECK(contract::request_from_json(to_string(txs[0].payload)) == req);
        }
    }
    SUBCASE("a single dissenting replica aborts the round") {
        net.nodes[2].acl.clear();
        ConsensusOutcome out = consensus_round(net, req);
        CHECK_FALSE(out.approved);
        CHECK(out.divergent);
        CHECK(out.reason == contract::Reason::UnknownUser);
        CHECK(out.miner_id.empty());
        for (const auto& node : net.nodes) CHECK(node.chain.blocks.size() == height);
    }
    SUBCASE("a unanimous denial is not divergent") {
        req.uid = "court" + std::string(39, '0');
        ConsensusOutcome out = consensus_round(net, req);
        CHECK_FALSE(out.approved);
        CHECK_FALSE(out.divergent);
        CHECK(out.reason == contract::Reason::UnknownUser);
    }
    SUBCASE("an empty network cannot reach consensus") {
        Network empty;
        CHECK(error_code_of([&] { consensus_round(empty, req); }) == Errc::EmptyInput);
    }
}

TEST_CASE("issued codes reach the requestor and the site in matching envelopes") {
    Network net = court_result().net;
    const ScenarioActor& actor = court_result().actors.front();

    contract::AccessRequest req;
    req.uid = actor.uid;
    req.camera_ids = {"cam-7"};
    req.date = contract::parse_date("2021-03-09");
    req.range = {contract::parse_time("14:00"), contract::parse_time("15:00")};
    req.type = contract::VideoType::WholeContext;
    req.storage_name = "store-a";
    req.storage_address = "off-bc:store-a";

    CodeIssue issue = issue_and_forward_code(net, "sac1", "sac2", req);
    CHECK(issue.updated.request == req);
    CHECK(issue.updated.access_code.rfind("courtTostore-a", 0) == 0);
    CHECK(net.issued_codes.state(issue.updated.access_code) ==
          contract::AccessCodeRegistry::State::Issued);

    const Bytes code_bytes = envelope::open(
        actor.keypair, find_node(net, "sac1").keypair.public_point, issue.to_requestor);
    CHECK(to_string(code_bytes) == issue.updated.access_code);

    storage::StorageSite& site = net.sites.at("store-a");
    const Bytes forwarded = envelope::open(
        site.keypair, find_node(net, "sac2").keypair.public_point, issue.to_storage);
    CHECK(contract::updated_request_from_json(to_string(forwarded)) == issue.updated);

    CodeIssue second = issue_and_forward_code(net, "sac1", "sac2", req);
    CHECK(second.updated.access_code != issue.updated.access_code);

    req.storage_name = "store-z";
    CHECK(error_code_of([&] { issue_and_forward_code(net, "sac1", "sac2", req); }) ==
          Errc::UnknownStorageSite);
    req.storage_name = "store-a";
    req.uid = "court" + std::string(39, '0');
    CHECK(error_code_of([&] { issue_and_forward_code(net, "sac1", "sac2", req); }) ==
          Errc::UnknownUser);
}

TEST_CASE("audit records are mined onto every replica") {
    Network net = court_result().net;
    const std::size_t height = net.nodes.front().chain.blocks.size();

    AuditRecord record;
    record.requestor_uid = court_result().actors.front().uid;
    record.device_info = "storage:store-a";
    record.accessed_reference = "0011223344556677";
    record.viewer_watermark = "cafe";
    record.action = AuditRecord::Action::Granted;
    record.timestamp = 42;

    const ledger::Block& block = record_audit(net, record);
    CHECK(ledger::validate_chain(net.nodes.front().chain).valid);
    for (const auto& node : net.nodes) {
        CHECK(node.chain.blocks.size() == height + 1);
        CHECK(node.chain.blocks.back() == block);
        const auto txs = ledger::decrypt_body(node.chain.blocks.back(), node.body_keystore);
        REQUIRE(txs.size() == 1);
        CHECK(txs[0].kind == ledger::TxKind::AuditRecord);
        CHECK(to_string(txs[0].payload) == record.to_json());
    }

    record.viewer_watermark.clear();
    CHECK(error_code_of([&] { record_audit(net, record); }) == Errc::InvalidTransaction);

    record.action = AuditRecord::Action::Denied;  // denials carry no watermark
    const std::size_t grown = net.nodes.front().chain.blocks.size();
    record_audit(net, record);
    CHECK(net.nodes.front().chain.blocks.size() == grown + 1);
}

TEST_CASE("the court walkthrough logs all ten steps and serves the video") {
    const ScenarioResult& result = court_result();

    REQUIRE_FALSE(result.transcript.empty());
    CHECK(json::parse(result.transcript.front()).at("event") == "scenario_start");

    const json end = json::parse(result.transcript.back());
    CHECK(end.at("event") == "scenario_end");
    CHECK(end.at("blocks") == 3);  // genesis + request record + audit record
    CHECK(end.at("replicas_identical") == true);
    CHECK(end.at("served") == 1);

    CHECK(events_named(result.transcript, "enroll").size() == 1);
    CHECK(events_named(result.transcript, "decision").size() == 5);
    CHECK(events_named(result.transcript, "denial").empty());

    // One transcript event for every protocol step, in order.
    std::vector<int> steps;
    for (const auto& line : result.transcript) {
        json j = json::parse(line);
        if (j.contains("step")) steps.push_back(j.at("step").get<int>());
    }
    CHECK(std::is_sorted(steps.begin(), steps.end()));
    for (int step = 1; step <= 10; ++step) {
        CHECK(std::count(steps.begin(), steps.end(), step) >= 1);
    }

    const json consensus = events_named(result.transcript, "consensus").at(0);
    CHECK(consensus.at("approved") == true);
    const std::vector<json> blocks = events_named(result.transcript, "block");
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].at("kind") == "RequestRecord");
    CHECK(blocks[1].at("kind") == "AuditRecord");
    CHECK(blocks[1].at("replicas_identical") == true);

    // Every replica holds the same validated three-block chain.
    REQUIRE(result.net.nodes.size() == 5);
    const std::string tip = ledger::chain_to_text(result.net.nodes.front().chain);
    for (const auto& node : result.net.nodes) {
        CHECK(node.chain.blocks.size() == 3);
        CHECK(ledger::validate_chain(node.chain).valid);
        CHECK(ledger::chain_to_text(node.chain) == tip);
    }

    // The client-side view is exactly the decipherment of the served
    // stream under the sealed session keyset.
    REQUIRE(result.served.size() == 1);
    const ServedStream& served = result.served.front();
    REQUIRE(served.viewed.size() == 120);  // 60 s at 2 fps
    const ScenarioActor& court = result.actors.front();
    const storage::StorageSite& site = result.net.sites.at("store-a");
    const dab::DabKeyset keyset = dab::keyset_from_json(to_string(
        envelope::open(court.keypair, site.keypair.public_point, served.sealed_keys)));
    const auto stream_frames = storage::decode_stream(BytesView(served.stream));
    REQUIRE(stream_frames.size() == served.viewed.size());
    for (std::size_t i : {std::size_t(0), std::size_t(60), std::size_t(119)}) {
        const FrameBuffer shown = dab::decipher_frame(stream_frames[i], keyset);
        CHECK(served.viewed[i].pixels == shown.pixels);
    }
    // Noise-like test footage is the hardest case for the lossy transform;
    // the reconstruction still clears a recognizability floor.
    const storage::VideoRecord& stored = site.records.at(served.reference);
    CHECK(metrics::psnr(stored.frames[0], served.viewed[0]) > 15.0);
}

TEST_CASE("scenario runs are a pure function of the config") {
    const ScenarioResult& first = court_result();
    ScenarioResult second = run_scenario(testutil::court_config());
    CHECK(second.transcript == first.transcript);
    CHECK(ledger::chain_to_text(second.net.nodes.front().chain) ==
          ledger::chain_to_text(first.net.nodes.front().chain));
    REQUIRE(second.served.size() == first.served.size());
    CHECK(second.served.front().stream == first.served.front().stream);

    ScenarioConfig reseeded = testutil::court_config();
    reseeded.seed += 1;
    ScenarioResult other = run_scenario(reseeded);
    CHECK(other.served.front().stream != first.served.front().stream);
    CHECK(other.transcript != first.transcript);
}

TEST_CASE("nothing crossing the bus leaks the request in plaintext") {
    const ScenarioResult& result = court_result();
    const std::string uid = result.actors.front().uid;
    REQUIRE_FALSE(result.net.bus.events().empty());

    for (const auto& ev : result.net.bus.events()) {
        CHECK_FALSE(bytes_contain(ev.envelope.ciphertext, uid));
        CHECK_FALSE(bytes_contain(ev.envelope.ciphertext, "cam-7"));
        CHECK_FALSE(bytes_contain(ev.envelope.ciphertext, "2021-03-09"));
    }

    // The served pixels cross the wire enciphered: the stream envelope is
    // opaque, and even its decrypted payload scores as cipher imagery.
    const ServedStream& served = result.served.front();
    const auto frames = storage::decode_stream(BytesView(served.stream));
    REQUIRE_FALSE(frames.empty());
    const storage::StorageSite& site = result.net.sites.at("store-a");
    const storage::VideoRecord& stored = site.records.at(served.reference);
    const FrameBuffer vis = dab::cipher_visualization(frames.front());
    CHECK(metrics::encryption_quality(stored.frames.front(), vis) > 0.9);
}

TEST_CASE("identity and authorization failures become transcript denials") {
    ScenarioResult result = run_scenario(testutil::negative_config());

    const std::vector<json> denials = events_named(result.transcript, "denial");
    REQUIRE(denials.size() == 3);
    for (const auto& d : denials) {
        CHECK(d.contains("step"));
        CHECK(d.contains("reason"));
        CHECK(d.contains("user"));
    }

    CHECK(denials[0].at("user") == "mallory");  // never enrolled
    CHECK(denials[0].at("step") == 1);
    CHECK(denials[0].at("reason") == "UnknownUser");
    CHECK(denials[0].contains("detail"));  // rejection message travels along

    CHECK(denials[1].at("user") == "clerk");  // ACL missing on one replica
    CHECK(denials[1].at("step") == 5);
    CHECK(denials[1].at("reason") == "DivergentAcl");

    CHECK(denials[2].at("user") == "court");  // replaying the consumed code
    CHECK(denials[2].at("step") == 9);
    CHECK(denials[2].at("reason") == "CodeAlreadyConsumed");
    CHECK(denials[2].contains("detail"));

    // Only the court's lawful request minted blocks; denials minted none.
    const json end = json::parse(result.transcript.back());
    CHECK(end.at("blocks") == 3);
    CHECK(end.at("served") == 1);
    CHECK(end.at("replicas_identical") == true);

    // The divergent round reported its split without touching any chain.
    const std::vector<json> consensus = events_named(result.transcript, "consensus");
    bool saw_divergent_round = false;
    for (const auto& c : consensus) {
        if (c.at("approved") == false) saw_divergent_round = true;
    }
    CHECK(saw_divergent_round);
}

TEST_CASE("scenario configs round trip through JSON") {
    const ScenarioConfig config = testutil::negative_config();
    const std::string text = scenario_to_json(config);
    const ScenarioConfig back = scenario_from_json(text);
    CHECK(scenario_to_json(back) == text);
    CHECK(back.node_count == config.node_count);
    CHECK(back.difficulty_bits == config.difficulty_bits);
    CHECK(back.seed == config.seed);
    CHECK(back.users.size() == config.users.size());
    CHECK(back.script.size() == config.script.size());
    CHECK(back.script[3].kind == "replay");

    CHECK(error_code_of([] { scenario_from_json("{"); }) == Errc::ParseError);
    CHECK(error_code_of([] { scenario_from_json("[]"); }) == Errc::ParseError);
}

TEST_CASE("transcript text joins one JSON object per line") {
    const std::vector<std::string> lines{"{\"a\":1}", "{\"b\":2}"};
    CHECK(transcript_text(lines) == "{\"a\":1}\n{\"b\":2}\n");
    CHECK(transcript_text({}).empty());
}

TEST_CASE("structural script errors carry the entry index and step") {
    // A site every node authorizes but nobody hosts is a deployment bug,
    // not an access denial: the run aborts with the failing entry pinned.
    ScenarioConfig config = testutil::court_config();
    config.acl[0].sites.push_back("store-gone");
    config.script[0].storage = "store-gone";
    try {
        run_scenario(config);
        FAIL("expected a structural error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnknownStorageSite);
        CHECK(std::string(e.what()).find("script entry 0") != std::string::npos);
        CHECK(std::string(e.what()).find("step 7") != std::string::npos);
    }

    // A request for a site outside the grant is an ordinary denial instead.
    ScenarioConfig denied = testutil::court_config();
    denied.script[0].storage = "store-gone";
    const ScenarioResult result = run_scenario(denied);
    const std::vector<json> denials = events_named(result.transcript, "denial");
    REQUIRE(denials.size() == 1);
    CHECK(denials[0].at("reason") == "SiteDenied");

    ScenarioConfig empty = testutil::court_config();
    empty.node_count = 0;
    CHECK(error_code_of([&] { run_scenario(empty); }) == Errc::EmptyInput);
}
