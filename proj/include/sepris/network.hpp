#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sepris/common.hpp"
#include "sepris/contract.hpp"
#include "sepris/drbg.hpp"
#include "sepris/envelope.hpp"
#include "sepris/ledger.hpp"
#include "sepris/storage.hpp"

namespace sepris::network {

using storage::AuditRecord;

struct UserEntry {
    envelope::Key32 public_key{};
    Bytes credential_digest;  // enrollment fingerprint digest
    std::string role;
};

struct SacNode {
    std::string node_id;
    envelope::KeyPair keypair;
    ledger::Chain chain;
    contract::Acl acl;
    std::map<std::string, UserEntry> uid_registry;  // uid -> enrollment
    ledger::Keystore body_keystore;
    std::set<std::string> peers;
    std::map<std::string, std::string> sessions;  // token -> uid, node-bound
};

struct ProtocolEvent {
    int step = 0;  // 1..10
    std::string sender;
    std::string receiver;
    envelope::Envelope envelope;
    std::uint64_t logical_time = 0;
};

// Reliable, ordered, single-threaded delivery with a logical clock; every
// post gets a fresh tick, so events are totally ordered. The optional tap
// lets tests observe exactly what crosses the wire.
class MessageBus {
public:
    using Tap = std::function<void(const ProtocolEvent&)>;

    const ProtocolEvent& post(int step, const std::string& sender, const std::string& receiver,
                              envelope::Envelope env);

    const std::vector<ProtocolEvent>& events() const { return events_; }
    std::uint64_t now() const { return clock_; }
    void set_tap(Tap tap) { tap_ = std::move(tap); }

private:
    std::uint64_t clock_ = 0;
    std::vector<ProtocolEvent> events_;
    Tap tap_;
};

struct Network {
    std::vector<SacNode> nodes;  // stable order defines round-robin mining
    std::map<std::string, storage::StorageSite> sites;
    MessageBus bus;
    ledger::Key32 body_key{};  // shared block-body key, in every keystore
    std::string body_key_label;
    contract::AccessCodeRegistry issued_codes;
    contract::UidRegistry uid_names;
    std::uint64_t clock_seconds = 0;  // logical wall clock for blocks/TTL
    Drbg rng{0};
};

SacNode& find_node(Network& net, const std::string& node_id);

// Transaction payloads are signed by the submitting node over
// (kind, payload, submitter_uid).
ledger::Transaction make_transaction(ledger::TxKind kind, BytesView payload,
                                     const std::string& submitter_uid,
                                     const envelope::KeyPair& signer);
bool verify_transaction(const ledger::Transaction& tx, const envelope::Key32& signer_pub);

// Constant-time digest comparison; the returned token is bound to
// (uid, node, logical_time) and only this node's session table knows it.
std::string authenticate_user(SacNode& node, const std::string& uid_claim,
                              BytesView credential_digest, std::uint64_t logical_time);

// Opens the user's envelope at the origin and re-seals the payload for each
// peer; deliveries are ordered by node label and exclude the originator.
std::vector<ProtocolEvent> broadcast_request(Network& net, const std::string& origin_id,
                                             const envelope::Envelope& env,
                                             const envelope::Key32& user_pub, int step = 3);

struct ConsensusOutcome {
    bool approved = false;
    bool divergent = false;  // nodes disagreed; round aborted without a block
    contract::Reason reason = contract::Reason::Approved;  // first denial
    std::string miner_id;                                  // set when approved
    std::vector<contract::Decision> decisions;             // in node order
};

// Unanimous approval mints a block with the request record: the round-robin
// miner (chain height modulo node count) mines it and every node validates,
// decrypts and appends the same block.
ConsensusOutcome consensus_round(Network& net, const contract::AccessRequest& req);

struct CodeIssue {
    contract::UpdatedRequest updated;
    envelope::Envelope to_requestor;  // sealed by the origin node to the user
    envelope::Envelope to_storage;    // sealed by the miner node to the site
    std::string origin_id;
    std::string miner_id;
};

// Generates the single-use access code (seeded, registered once) and seals
// it separately for the requestor and for the storage site; the storage
// copy carries the full updated request.
CodeIssue issue_and_forward_code(Network& net, const std::string& origin_id,
                                 const std::string& miner_id,
                                 const contract::AccessRequest& req);

// Mines the audit record into a new block on all replicas. Granted records
// must carry a viewer watermark.
const ledger::Block& record_audit(Network& net, const AuditRecord& record);

// ---- Scenario driver ------------------------------------------------------

struct ScenarioUser {
    std::string name;
    std::string role = "court";
    bool enrolled = true;  // unenrolled users exist only to be turned away
};

struct ScenarioAcl {
    std::string user;  // ScenarioUser name; uid is assigned during setup
    std::vector<std::string> cameras;
    std::string window_start;  // "YYYY-MM-DD", inclusive
    std::string window_end;
    int max_range_minutes = 0;
    std::vector<std::string> types;
    std::vector<std::string> sites;
    std::vector<std::string> nodes;  // empty = install on every node
};

struct ScenarioVideo {
    std::string camera;
    std::string date;   // "YYYY-MM-DD"
    std::string start;  // "HH:MM"
    int fps = 2;
    int seconds = 60;
    int width = 32;
    int height = 32;
    int channels = 1;
};

struct ScenarioSite {
    std::string name;
    std::string address;
    int quality = 50;
    std::vector<ScenarioVideo> videos;
};

struct ScriptEntry {
    std::string kind = "request";  // "request" or "replay"
    std::string user;
    std::string origin;            // SAC node label; default: first node
    std::string uid_override;      // present a different uid claim
    bool flip_credential = false;  // corrupt one digest bit
    std::vector<std::string> cameras;
    std::string date;
    std::string start;
    std::string end;
    std::string type = "whole_context";
    std::string storage;
};

struct ScenarioConfig {
    int node_count = 5;
    int difficulty_bits = 8;
    std::uint64_t seed = 1;
    std::vector<ScenarioUser> users;
    std::vector<ScenarioAcl> acl;
    std::vector<ScenarioSite> sites;
    std::vector<ScriptEntry> script;
};

ScenarioConfig scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& config);

struct ScenarioActor {
    std::string name;
    std::string role;
    std::string uid;
    envelope::KeyPair keypair;
    Bytes credential_digest;
};

struct ServedStream {
    std::size_t script_index = 0;
    std::string user;
    std::string uid;
    std::string reference;
    Bytes stream;                      // enciphered, as it crossed the bus
    envelope::Envelope sealed_keys;    // session keyset, sealed to the user
    std::vector<FrameBuffer> viewed;   // client-side reconstruction
};

struct ScenarioResult {
    std::vector<std::string> transcript;  // one JSON object per line
    std::vector<ScenarioActor> actors;
    std::vector<ServedStream> served;
    Network net;
};

// Builds the network from the config and walks every script entry through
// the ten protocol steps. Identity and authorization denials become
// transcript events; structural failures are rethrown with the step number
// attached. The whole run is a pure function of the config (seed included).
ScenarioResult run_scenario(const ScenarioConfig& config);

std::string transcript_text(const std::vector<std::string>& lines);

}  // namespace sepris::network
