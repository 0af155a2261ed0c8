#include "sepris/network.hpp"

#include <sodium.h>

#include <algorithm>
#include <utility>

#include <nlohmann/json.hpp>

#include "sepris/dab.hpp"
#include "sepris/hash.hpp"

namespace sepris::network {

namespace {

using nlohmann::json;

Bytes transaction_message(ledger::TxKind kind, BytesView payload, const std::string& uid) {
    Bytes msg;
    msg.push_back(std::uint8_t(kind));
    put_u32(msg, std::uint32_t(payload.size()));
    msg.insert(msg.end(), payload.begin(), payload.end());
    msg.insert(msg.end(), uid.begin(), uid.end());
    return msg;
}

// Mines one block from `txs` signed by the round-robin miner and appends it
// to every replica after each node has independently validated the header,
// decrypted the body and checked the transaction signatures.
const ledger::Block& mine_and_replicate(Network& net, const std::vector<ledger::Transaction>& txs,
                                        SacNode& miner) {
    ledger::TxVerifier verifier = [&](const ledger::Transaction& tx) {
        return verify_transaction(tx, miner.keypair.public_point);
    };
    ledger::Block block =
        ledger::mine_block(miner.chain, txs, net.body_key, net.clock_seconds, verifier);
    for (auto& node : net.nodes) {
        ledger::Validity v =
            ledger::validate_block(node.chain.blocks.back(), block, node.chain.difficulty_bits);
        if (!v.valid) {
            throw Error(Errc::InvalidTransaction,
                        node.node_id + " rejected the mined block: " + v.reason);
        }
        for (const auto& tx : ledger::decrypt_body(block, node.body_keystore)) {
            if (!verify_transaction(tx, miner.keypair.public_point)) {
                throw Error(Errc::InvalidTransaction,
                            node.node_id + " rejected a transaction signature");
            }
        }
        node.chain.blocks.push_back(block);
    }
    return net.nodes.front().chain.blocks.back();
}

SacNode& round_robin_miner(Network& net) {
    const std::size_t height = net.nodes.front().chain.blocks.size();
    return net.nodes[height % net.nodes.size()];
}

}  // namespace

const ProtocolEvent& MessageBus::post(int step, const std::string& sender,
                                      const std::string& receiver, envelope::Envelope env) {
    ProtocolEvent ev;
    ev.step = step;
    ev.sender = sender;
    ev.receiver = receiver;
    ev.envelope = std::move(env);
    ev.logical_time = ++clock_;
    events_.push_back(std::move(ev));
    if (tap_) tap_(events_.back());
    return events_.back();
}

SacNode& find_node(Network& net, const std::string& node_id) {
    for (auto& node : net.nodes) {
        if (node.node_id == node_id) return node;
    }
    throw Error(Errc::ParseError, "unknown node id: " + node_id);
}

ledger::Transaction make_transaction(ledger::TxKind kind, BytesView payload,
                                     const std::string& submitter_uid,
                                     const envelope::KeyPair& signer) {
    ledger::Transaction tx;
    tx.kind = kind;
    tx.payload = Bytes(payload.begin(), payload.end());
    tx.submitter_uid = submitter_uid;

    std::array<std::uint8_t, 32> pk{};
    std::array<std::uint8_t, 64> sk{};
    crypto_sign_seed_keypair(pk.data(), sk.data(), signer.private_scalar.data());
    Bytes msg = transaction_message(kind, payload, submitter_uid);
    tx.signature.resize(crypto_sign_BYTES);
    crypto_sign_detached(tx.signature.data(), nullptr, msg.data(), msg.size(), sk.data());
    sodium_memzero(sk.data(), sk.size());
    return tx;
}

bool verify_transaction(const ledger::Transaction& tx, const envelope::Key32& signer_pub) {
    if (tx.signature.size() != crypto_sign_BYTES) return false;
    Bytes msg = transaction_message(tx.kind, BytesView(tx.payload), tx.submitter_uid);
    return crypto_sign_verify_detached(tx.signature.data(), msg.data(), msg.size(),
                                       signer_pub.data()) == 0;
}

std::string authenticate_user(SacNode& node, const std::string& uid_claim,
                              BytesView credential_digest, std::uint64_t logical_time) {
    auto it = node.uid_registry.find(uid_claim);
    if (it == node.uid_registry.end()) {
        throw Error(Errc::UnknownUser, "uid not registered: " + uid_claim);
    }
    const Bytes& registered = it->second.credential_digest;
    if (registered.size() != credential_digest.size() ||
        sodium_memcmp(registered.data(), credential_digest.data(), registered.size()) != 0) {
        throw Error(Errc::CredentialMismatch, "credential digest mismatch for " + uid_claim);
    }

    Sha256 h;
    h.update("sepris.sac.session");
    h.update(node.node_id);
    h.update(uid_claim);
    h.update_u64(logical_time);
    const std::string token = to_hex(BytesView(h.finish().data(), 16));
    node.sessions[token] = uid_claim;
    return token;
}

std::vector<ProtocolEvent> broadcast_request(Network& net, const std::string& origin_id,
                                             const envelope::Envelope& env,
                                             const envelope::Key32& user_pub, int step) {
    SacNode& origin = find_node(net, origin_id);
    Bytes payload = envelope::open(origin.keypair, user_pub, env);

    std::vector<ProtocolEvent> deliveries;
    for (const auto& peer_id : origin.peers) {  // std::set: label order
        if (peer_id == origin_id) continue;
        SacNode& peer = find_node(net, peer_id);
        envelope::Envelope resealed =
            envelope::seal(origin.keypair, peer.keypair.public_point, BytesView(payload), net.rng);
        deliveries.push_back(net.bus.post(step, origin_id, peer_id, std::move(resealed)));
        // Receiving side: confirm the copy opens cleanly.
        (void)envelope::open(peer.keypair, origin.keypair.public_point,
                             deliveries.back().envelope);
    }
    return deliveries;
}

ConsensusOutcome consensus_round(Network& net, const contract::AccessRequest& req) {
    if (net.nodes.empty()) throw Error(Errc::EmptyInput, "consensus needs at least one node");

    ConsensusOutcome outcome;
    std::size_t approvals = 0;
    for (const auto& node : net.nodes) {
        contract::Decision d = contract::validate_request(req, node.acl);
        if (d.approved) {
            ++approvals;
        } else if (outcome.reason == contract::Reason::Approved) {
            outcome.reason = d.reason;
        }
        outcome.decisions.push_back(d);
    }
    outcome.approved = approvals == net.nodes.size();
    outcome.divergent = approvals != 0 && !outcome.approved;
    if (!outcome.approved) return outcome;  // round aborted, no block

    SacNode& miner = round_robin_miner(net);
    outcome.miner_id = miner.node_id;
    ledger::Transaction tx =
        make_transaction(ledger::TxKind::RequestRecord, to_bytes(contract::request_to_json(req)),
                         req.uid, miner.keypair);
    mine_and_replicate(net, {tx}, miner);
    return outcome;
}

CodeIssue issue_and_forward_code(Network& net, const std::string& origin_id,
                                 const std::string& miner_id,
                                 const contract::AccessRequest& req) {
    SacNode& origin = find_node(net, origin_id);
    SacNode& miner = find_node(net, miner_id);
    auto site = net.sites.find(req.storage_name);
    if (site == net.sites.end()) {
        throw Error(Errc::UnknownStorageSite, "no such storage site: " + req.storage_name);
    }
    auto user = origin.uid_registry.find(req.uid);
    if (user == origin.uid_registry.end()) {
        throw Error(Errc::UnknownUser, "uid not registered: " + req.uid);
    }

    CodeIssue issue;
    issue.origin_id = origin_id;
    issue.miner_id = miner_id;
    issue.updated.request = req;
    issue.updated.access_code = contract::generate_access_code(
        user->second.role, req.storage_name, net.rng, &net.issued_codes);

    const Bytes code_bytes = to_bytes(issue.updated.access_code);
    issue.to_requestor =
        envelope::seal(origin.keypair, user->second.public_key, BytesView(code_bytes), net.rng);
    const Bytes updated_json = to_bytes(contract::request_to_json(issue.updated));
    issue.to_storage = envelope::seal(miner.keypair, site->second.keypair.public_point,
                                      BytesView(updated_json), net.rng);
    return issue;
}

const ledger::Block& record_audit(Network& net, const AuditRecord& record) {
    if (net.nodes.empty()) throw Error(Errc::EmptyInput, "audit needs at least one node");
    if (record.action == AuditRecord::Action::Granted && record.viewer_watermark.empty()) {
        throw Error(Errc::InvalidTransaction, "granted audit record lacks a viewer watermark");
    }
    SacNode& miner = round_robin_miner(net);
    ledger::Transaction tx =
        make_transaction(ledger::TxKind::AuditRecord, to_bytes(record.to_json()),
                         record.requestor_uid, miner.keypair);
    return mine_and_replicate(net, {tx}, miner);
}

// ---- Scenario driver --------------------------------------------------------

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
    std::vector<std::string> out;
    if (j.contains(key)) {
        for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
    }
    return out;
}

json string_array(const std::vector<std::string>& v) {
    return json(v.empty() ? json::array() : json(v));
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad scenario JSON: ") + e.what());
    }
    try {
        ScenarioConfig cfg;
        cfg.node_count = j.value("node_count", 5);
        cfg.difficulty_bits = j.value("difficulty_bits", 8);
        cfg.seed = j.value("seed", std::uint64_t(1));
        for (const auto& u : j.value("users", json::array())) {
            ScenarioUser user;
            user.name = u.at("name").get<std::string>();
            user.role = u.value("role", "court");
            user.enrolled = u.value("enrolled", true);
            cfg.users.push_back(std::move(user));
        }
        for (const auto& a : j.value("acl", json::array())) {
            ScenarioAcl acl;
            acl.user = a.at("user").get<std::string>();
            acl.cameras = string_list(a, "cameras");
            acl.window_start = a.at("window_start").get<std::string>();
            acl.window_end = a.at("window_end").get<std::string>();
            acl.max_range_minutes = a.value("max_range_minutes", 60);
            acl.types = string_list(a, "types");
            acl.sites = string_list(a, "sites");
            acl.nodes = string_list(a, "nodes");
            cfg.acl.push_back(std::move(acl));
        }
        for (const auto& s : j.value("sites", json::array())) {
            ScenarioSite site;
            site.name = s.at("name").get<std::string>();
            site.address = s.value("address", "off-bc:" + site.name);
            site.quality = s.value("quality", 50);
            for (const auto& v : s.value("videos", json::array())) {
                ScenarioVideo video;
                video.camera = v.at("camera").get<std::string>();
                video.date = v.at("date").get<std::string>();
                video.start = v.at("start").get<std::string>();
                video.fps = v.value("fps", 2);
                video.seconds = v.value("seconds", 60);
                video.width = v.value("width", 32);
                video.height = v.value("height", 32);
                video.channels = v.value("channels", 1);
                site.videos.push_back(std::move(video));
            }
            cfg.sites.push_back(std::move(site));
        }
        for (const auto& s : j.value("script", json::array())) {
            ScriptEntry entry;
            entry.kind = s.value("kind", "request");
            entry.user = s.at("user").get<std::string>();
            entry.origin = s.value("origin", "");
            entry.uid_override = s.value("uid_override", "");
            entry.flip_credential = s.value("flip_credential", false);
            entry.cameras = string_list(s, "cameras");
            entry.date = s.value("date", "");
            entry.start = s.value("start", "");
            entry.end = s.value("end", "");
            entry.type = s.value("type", "whole_context");
            entry.storage = s.value("storage", "");
            cfg.script.push_back(std::move(entry));
        }
        return cfg;
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad scenario JSON: ") + e.what());
    }
}

std::string scenario_to_json(const ScenarioConfig& config) {
    json users = json::array();
    for (const auto& u : config.users) {
        users.push_back({{"name", u.name}, {"role", u.role}, {"enrolled", u.enrolled}});
    }
    json acl = json::array();
    for (const auto& a : config.acl) {
        acl.push_back({{"user", a.user},
                       {"cameras", string_array(a.cameras)},
                       {"window_start", a.window_start},
                       {"window_end", a.window_end},
                       {"max_range_minutes", a.max_range_minutes},
                       {"types", string_array(a.types)},
                       {"sites", string_array(a.sites)},
                       {"nodes", string_array(a.nodes)}});
    }
    json sites = json::array();
    for (const auto& s : config.sites) {
        json videos = json::array();
        for (const auto& v : s.videos) {
            videos.push_back({{"camera", v.camera},
                              {"date", v.date},
                              {"start", v.start},
                              {"fps", v.fps},
                              {"seconds", v.seconds},
                              {"width", v.width},
                              {"height", v.height},
                              {"channels", v.channels}});
        }
        sites.push_back({{"name", s.name},
                         {"address", s.address},
                         {"quality", s.quality},
                         {"videos", videos}});
    }
    json script = json::array();
    for (const auto& s : config.script) {
        script.push_back({{"kind", s.kind},
                          {"user", s.user},
                          {"origin", s.origin},
                          {"uid_override", s.uid_override},
                          {"flip_credential", s.flip_credential},
                          {"cameras", string_array(s.cameras)},
                          {"date", s.date},
                          {"start", s.start},
                          {"end", s.end},
                          {"type", s.type},
                          {"storage", s.storage}});
    }
    return json{{"node_count", config.node_count},
                {"difficulty_bits", config.difficulty_bits},
                {"seed", config.seed},
                {"users", users},
                {"acl", acl},
                {"sites", sites},
                {"script", script}}
        .dump(2);
}

namespace {

struct ActorState {
    ScenarioActor info;
    Drbg rng{0};
    bool enrolled = true;
};

bool is_denial(Errc code) {
    switch (code) {
        case Errc::UnknownUser:
        case Errc::CredentialMismatch:
        case Errc::NoMatchingGrant:
        case Errc::CodeAlreadyConsumed:
        case Errc::SegmentNotFound:
            return true;
        default:
            return false;
    }
}

bool replicas_identical(const Network& net) {
    for (const auto& node : net.nodes) {
        if (!(node.chain.blocks == net.nodes.front().chain.blocks)) return false;
    }
    return true;
}

// Identifies the sealed sender by trying every enrolled key; unidentified
// senders are turned away rather than reported as a crypto failure.
template <typename Map, typename KeyOf>
Bytes open_from_enrolled(const envelope::KeyPair& receiver, const Map& directory, KeyOf key_of,
                         const envelope::Envelope& env, std::string* found_id) {
    for (const auto& [id, entry] : directory) {
        try {
            Bytes payload = envelope::open(receiver, key_of(entry), env);
            if (found_id) *found_id = id;
            return payload;
        } catch (const Error& e) {
            if (e.code() != Errc::SignatureInvalid) throw;
        }
    }
    throw Error(Errc::UnknownUser, "envelope matches no enrolled identity");
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
    if (config.node_count <= 0) {
        throw Error(Errc::EmptyInput, "scenario needs at least one node");
    }

    ScenarioResult result;
    Network& net = result.net;
    Drbg root(config.seed);
    net.rng = root.derive("net");

    Bytes bk = root.derive("bodykey").bytes(32);
    std::copy(bk.begin(), bk.end(), net.body_key.begin());
    net.body_key_label = ledger::body_key_id(net.body_key);

    std::vector<std::string> labels;
    for (int i = 1; i <= config.node_count; ++i) labels.push_back("sac" + std::to_string(i));
    for (const auto& label : labels) {
        SacNode node;
        node.node_id = label;
        node.keypair = envelope::generate_keypair(label, BytesView(root.derive("key." + label).bytes(32)));
        node.chain = ledger::genesis(config.difficulty_bits);
        node.body_keystore[net.body_key_label] = net.body_key;
        for (const auto& other : labels) {
            if (other != label) node.peers.insert(other);
        }
        net.nodes.push_back(std::move(node));
    }

    std::map<std::string, ActorState> actors;
    for (const auto& u : config.users) {
        ActorState actor;
        actor.info.name = u.name;
        actor.info.role = u.role;
        Drbg uid_rng = root.derive("uid." + u.name);
        actor.info.uid = contract::issue_uid(u.role, uid_rng, &net.uid_names);
        actor.info.keypair = envelope::generate_keypair(
            "user." + u.name, BytesView(root.derive("key.user." + u.name).bytes(32)));
        actor.info.credential_digest = root.derive("cred." + u.name).bytes(32);
        actor.rng = root.derive("session." + u.name);
        actor.enrolled = u.enrolled;
        if (u.enrolled) {
            for (auto& node : net.nodes) {
                node.uid_registry[actor.info.uid] =
                    UserEntry{actor.info.keypair.public_point, actor.info.credential_digest, u.role};
            }
        }
        result.actors.push_back(actor.info);
        actors.emplace(u.name, std::move(actor));
    }

    for (const auto& a : config.acl) {
        auto actor = actors.find(a.user);
        if (actor == actors.end()) {
            throw Error(Errc::ParseError, "acl entry names unknown user: " + a.user);
        }
        contract::AclEntry entry;
        entry.uid = actor->second.info.uid;
        entry.role = contract::role_from_name(actor->second.info.role);
        entry.allowed_cameras.insert(a.cameras.begin(), a.cameras.end());
        entry.window_start = contract::parse_date(a.window_start);
        entry.window_end = contract::parse_date(a.window_end);
        entry.max_range_minutes = a.max_range_minutes;
        for (const auto& t : a.types) entry.allowed_types.insert(contract::video_type_from_name(t));
        entry.allowed_storage_sites.insert(a.sites.begin(), a.sites.end());
        for (auto& node : net.nodes) {
            if (!a.nodes.empty() &&
                std::find(a.nodes.begin(), a.nodes.end(), node.node_id) == a.nodes.end()) {
                continue;
            }
            node.acl[entry.uid] = entry;
        }
    }

    for (const auto& s : config.sites) {
        envelope::KeyPair kp = envelope::generate_keypair(
            "site." + s.name, BytesView(root.derive("key.site." + s.name).bytes(32)));
        storage::StorageSite site = storage::make_site(s.name, s.address, kp, config.seed);
        site.serve_quality = s.quality;
        for (const auto& node : net.nodes) {
            site.trusted_senders[node.node_id] = node.keypair.public_point;
        }
        for (const auto& [name, actor] : actors) {
            if (!actor.enrolled) continue;
            site.user_keys[actor.info.uid] = actor.info.keypair.public_point;
            site.user_credentials[actor.info.uid] = actor.info.credential_digest;
        }
        for (const auto& v : s.videos) {
            storage::VideoRecord rec;
            rec.camera_id = v.camera;
            rec.date = contract::parse_date(v.date);
            rec.start_time = contract::parse_time(v.start);
            rec.fps = v.fps;
            Drbg vrng = root.derive("video." + s.name + "." + v.camera + "." + v.date + "." + v.start);
            const int frame_count = v.fps * v.seconds;
            for (int i = 0; i < frame_count; ++i) {
                FrameBuffer fb(std::size_t(v.width), std::size_t(v.height), std::size_t(v.channels));
                fb.pixels = vrng.bytes(fb.pixels.size());
                rec.frames.push_back(std::move(fb));
            }
            storage::ingest_video(site, rec);
        }
        net.sites.emplace(s.name, std::move(site));
    }

    auto emit = [&result](json j) { result.transcript.push_back(j.dump()); };
    net.bus.set_tap([&result](const ProtocolEvent& ev) {
        Bytes wire = envelope::serialize_envelope(ev.envelope);
        result.transcript.push_back(json{{"event", "bus"},
                                         {"step", ev.step},
                                         {"sender", ev.sender},
                                         {"receiver", ev.receiver},
                                         {"logical_time", ev.logical_time},
                                         {"envelope_sha256", hash_hex(sha256(BytesView(wire)))},
                                         {"bytes", wire.size()}}
                                        .dump());
    });

    emit({{"event", "scenario_start"},
          {"nodes", config.node_count},
          {"difficulty_bits", config.difficulty_bits},
          {"seed", config.seed},
          {"users", config.users.size()},
          {"sites", config.sites.size()}});
    for (const auto& actor : result.actors) {
        emit({{"event", "enroll"},
              {"user", actor.name},
              {"role", actor.role},
              {"uid", actor.uid},
              {"enrolled", actors.at(actor.name).enrolled}});
    }

    // Presentation retained so replay entries can re-present a consumed code.
    contract::UpdatedRequest last_presented;
    std::string last_storage;
    bool have_presentation = false;

    for (std::size_t index = 0; index < config.script.size(); ++index) {
        const ScriptEntry& entry = config.script[index];
        if (!actors.contains(entry.user)) {
            throw Error(Errc::ParseError, "script entry names unknown user: " + entry.user);
        }
        ActorState& actor = actors.at(entry.user);
        int step = 0;
        try {
            if (entry.kind == "replay") {
                if (!have_presentation) {
                    throw Error(Errc::ParseError, "replay entry before any successful request");
                }
                storage::StorageSite& site = net.sites.at(last_storage);

                step = 8;
                net.clock_seconds += 1;
                json auth_payload = {{"uid", actor.info.uid},
                                     {"digest", to_hex(BytesView(actor.info.credential_digest))}};
                envelope::Envelope env_auth =
                    envelope::seal(actor.info.keypair, site.keypair.public_point,
                                   BytesView(to_bytes(auth_payload.dump())), actor.rng);
                net.bus.post(8, entry.user, site.name, env_auth);
                std::string sender_uid;
                Bytes opened = open_from_enrolled(
                    site.keypair, site.user_keys, [](const envelope::Key32& k) { return k; },
                    env_auth, &sender_uid);
                json aj = json::parse(to_string(opened));
                std::string site_token =
                    storage::authenticate(site, aj.at("uid").get<std::string>(),
                                          BytesView(from_hex(aj.at("digest").get<std::string>())),
                                          net.clock_seconds);
                emit({{"event", "auth"}, {"step", 8}, {"site", site.name},
                      {"uid", actor.info.uid}, {"outcome", "token issued"}});

                step = 9;
                net.clock_seconds += 1;
                json p9 = {{"token", site_token},
                           {"updated", json::parse(contract::request_to_json(last_presented))}};
                envelope::Envelope env_present =
                    envelope::seal(actor.info.keypair, site.keypair.public_point,
                                   BytesView(to_bytes(p9.dump())), actor.rng);
                net.bus.post(9, entry.user, site.name, env_present);
                Bytes presented_bytes = envelope::open(site.keypair, actor.info.keypair.public_point,
                                                       env_present);
                json pj = json::parse(to_string(presented_bytes));
                contract::UpdatedRequest presented =
                    contract::updated_request_from_json(pj.at("updated").dump());
                storage::ServeResult served = storage::serve_request(
                    site, pj.at("token").get<std::string>(), presented, net.clock_seconds);
                // A replay should never get here; a fresh grant would have to
                // exist under the same single-use code.
                emit({{"event", "serve"}, {"step", 9}, {"site", site.name},
                      {"frames", served.frame_count}, {"reference", served.reference}});
                continue;
            }

            SacNode& origin =
                find_node(net, entry.origin.empty() ? labels.front() : entry.origin);

            // Step 1: identity + credential authentication at the origin node.
            step = 1;
            net.clock_seconds += 1;
            std::string claim = entry.uid_override.empty() ? actor.info.uid : entry.uid_override;
            Bytes digest = actor.info.credential_digest;
            if (entry.flip_credential) digest.back() ^= 0x01;
            json auth_payload = {{"uid", claim}, {"digest", to_hex(BytesView(digest))}};
            envelope::Envelope env_auth =
                envelope::seal(actor.info.keypair, origin.keypair.public_point,
                               BytesView(to_bytes(auth_payload.dump())), actor.rng);
            net.bus.post(1, entry.user, origin.node_id, env_auth);

            std::string sender_uid;
            Bytes opened = open_from_enrolled(
                origin.keypair, origin.uid_registry,
                [](const UserEntry& e) { return e.public_key; }, env_auth, &sender_uid);
            json aj = json::parse(to_string(opened));
            std::string token = authenticate_user(
                origin, aj.at("uid").get<std::string>(),
                BytesView(from_hex(aj.at("digest").get<std::string>())), net.bus.now());
            envelope::Envelope env_token =
                envelope::seal(origin.keypair, actor.info.keypair.public_point,
                               BytesView(to_bytes(token)), net.rng);
            net.bus.post(1, origin.node_id, entry.user, env_token);
            token = to_string(
                envelope::open(actor.info.keypair, origin.keypair.public_point, env_token));
            emit({{"event", "auth"}, {"step", 1}, {"node", origin.node_id},
                  {"uid", claim}, {"outcome", "token issued"}});

            // Step 2: sealed request submission, session bound to this node.
            step = 2;
            net.clock_seconds += 1;
            contract::AccessRequest req;
            req.uid = actor.info.uid;
            req.camera_ids = entry.cameras;
            req.date = contract::parse_date(entry.date);
            req.range = {contract::parse_time(entry.start), contract::parse_time(entry.end)};
            req.type = contract::video_type_from_name(entry.type);
            req.storage_name = entry.storage;
            if (auto site = net.sites.find(entry.storage); site != net.sites.end()) {
                req.storage_address = site->second.address;
            }
            json req_payload = {{"token", token},
                                {"request", json::parse(contract::request_to_json(req))}};
            envelope::Envelope env_req =
                envelope::seal(actor.info.keypair, origin.keypair.public_point,
                               BytesView(to_bytes(req_payload.dump())), actor.rng);
            net.bus.post(2, entry.user, origin.node_id, env_req);
            Bytes req_opened =
                envelope::open(origin.keypair, actor.info.keypair.public_point, env_req);
            json rj = json::parse(to_string(req_opened));
            auto session = origin.sessions.find(rj.at("token").get<std::string>());
            if (session == origin.sessions.end() || session->second != req.uid) {
                throw Error(Errc::CredentialMismatch, "session token not valid at this node");
            }
            emit({{"event", "request"}, {"step", 2}, {"uid", req.uid},
                  {"cameras", req.camera_ids}, {"date", entry.date},
                  {"start", entry.start}, {"end", entry.end}, {"type", entry.type},
                  {"storage", entry.storage}});

            // Step 3: peer-to-peer broadcast, re-sealed per peer.
            step = 3;
            net.clock_seconds += 1;
            auto deliveries =
                broadcast_request(net, origin.node_id, env_req, actor.info.keypair.public_point, 3);
            emit({{"event", "broadcast"}, {"step", 3}, {"origin", origin.node_id},
                  {"deliveries", deliveries.size()}});

            // Steps 4-6: distributed validation, consensus, mining.
            step = 4;
            net.clock_seconds += 1;
            ConsensusOutcome outcome = consensus_round(net, req);
            for (std::size_t n = 0; n < outcome.decisions.size(); ++n) {
                emit({{"event", "decision"}, {"step", 4}, {"node", net.nodes[n].node_id},
                      {"approved", outcome.decisions[n].approved},
                      {"reason", contract::reason_name(outcome.decisions[n].reason)}});
            }
            step = 5;
            emit({{"event", "consensus"}, {"step", 5}, {"approved", outcome.approved},
                  {"divergent", outcome.divergent},
                  {"reason", contract::reason_name(outcome.reason)},
                  {"miner", outcome.miner_id}});
            if (!outcome.approved) {
                emit({{"event", "denial"}, {"step", 5},
                      {"reason", outcome.divergent ? errc_name(Errc::DivergentAcl)
                                                   : contract::reason_name(outcome.reason)},
                      {"user", entry.user}});
                continue;
            }
            step = 6;
            emit({{"event", "block"}, {"step", 6},
                  {"height", net.nodes.front().chain.blocks.size() - 1},
                  {"hash", to_hex(BytesView(
                               ledger::header_hash(net.nodes.front().chain.blocks.back().header)
                                   .data(),
                               32))},
                  {"kind", "RequestRecord"},
                  {"replicas_identical", replicas_identical(net)}});

            // Step 7: access code issuance and forwarding.
            step = 7;
            net.clock_seconds += 1;
            CodeIssue issue =
                issue_and_forward_code(net, origin.node_id, outcome.miner_id, req);
            net.bus.post(7, origin.node_id, entry.user, issue.to_requestor);
            net.bus.post(7, outcome.miner_id, entry.storage, issue.to_storage);
            const std::string code = to_string(envelope::open(
                actor.info.keypair, origin.keypair.public_point, issue.to_requestor));
            emit({{"event", "code_issued"}, {"step", 7}, {"origin", origin.node_id},
                  {"miner", outcome.miner_id},
                  {"code_sha256", hash_hex(sha256(BytesView(to_bytes(code))))}});

            // Step 8: storage site receives the forwarded request; the user
            // authenticates against the site.
            step = 8;
            net.clock_seconds += 1;
            storage::StorageSite& site = net.sites.at(entry.storage);
            storage::Grant grant =
                storage::receive_forwarded_request(site, issue.to_storage, net.clock_seconds);
            emit({{"event", "grant"}, {"step", 8}, {"site", site.name},
                  {"state", grant.state == storage::GrantState::Pending ? "Pending" : "Consumed"}});
            json sauth = {{"uid", actor.info.uid},
                          {"digest", to_hex(BytesView(actor.info.credential_digest))}};
            envelope::Envelope env_sauth =
                envelope::seal(actor.info.keypair, site.keypair.public_point,
                               BytesView(to_bytes(sauth.dump())), actor.rng);
            net.bus.post(8, entry.user, site.name, env_sauth);
            std::string site_sender;
            Bytes sopened = open_from_enrolled(
                site.keypair, site.user_keys, [](const envelope::Key32& k) { return k; },
                env_sauth, &site_sender);
            json sj = json::parse(to_string(sopened));
            std::string site_token =
                storage::authenticate(site, sj.at("uid").get<std::string>(),
                                      BytesView(from_hex(sj.at("digest").get<std::string>())),
                                      net.clock_seconds);
            envelope::Envelope env_stoken =
                envelope::seal(site.keypair, actor.info.keypair.public_point,
                               BytesView(to_bytes(site_token)), site.rng);
            net.bus.post(8, site.name, entry.user, env_stoken);
            site_token = to_string(
                envelope::open(actor.info.keypair, site.keypair.public_point, env_stoken));
            emit({{"event", "auth"}, {"step", 8}, {"site", site.name},
                  {"uid", actor.info.uid}, {"outcome", "token issued"}});

            // Step 9: updated request presented; matched, served enciphered.
            step = 9;
            net.clock_seconds += 1;
            contract::UpdatedRequest presented;
            presented.request = req;
            presented.access_code = code;
            json p9 = {{"token", site_token},
                       {"updated", json::parse(contract::request_to_json(presented))}};
            envelope::Envelope env_present =
                envelope::seal(actor.info.keypair, site.keypair.public_point,
                               BytesView(to_bytes(p9.dump())), actor.rng);
            net.bus.post(9, entry.user, site.name, env_present);
            Bytes presented_bytes =
                envelope::open(site.keypair, actor.info.keypair.public_point, env_present);
            json pj = json::parse(to_string(presented_bytes));
            contract::UpdatedRequest site_view =
                contract::updated_request_from_json(pj.at("updated").dump());
            storage::ServeResult served = storage::serve_request(
                site, pj.at("token").get<std::string>(), site_view, net.clock_seconds);
            envelope::Envelope env_stream = envelope::seal(
                site.keypair, actor.info.keypair.public_point, BytesView(served.stream), site.rng);
            net.bus.post(9, site.name, entry.user, env_stream);
            net.bus.post(9, site.name, entry.user, served.session_keys);
            emit({{"event", "serve"}, {"step", 9}, {"site", site.name},
                  {"frames", served.frame_count}, {"reference", served.reference},
                  {"stream_sha256", hash_hex(sha256(BytesView(served.stream)))}});

            // Client side: open the stream and the sealed keyset, decipher.
            ServedStream viewed;
            viewed.script_index = index;
            viewed.user = entry.user;
            viewed.uid = actor.info.uid;
            viewed.reference = served.reference;
            viewed.stream =
                envelope::open(actor.info.keypair, site.keypair.public_point, env_stream);
            viewed.sealed_keys = served.session_keys;
            dab::DabKeyset keyset = dab::keyset_from_json(to_string(envelope::open(
                actor.info.keypair, site.keypair.public_point, served.session_keys)));
            for (const auto& cf : storage::decode_stream(BytesView(viewed.stream))) {
                viewed.viewed.push_back(dab::decipher_frame(cf, keyset));
            }
            emit({{"event", "view"}, {"step", 9}, {"user", entry.user},
                  {"frames", viewed.viewed.size()}});
            result.served.push_back(std::move(viewed));
            last_presented = presented;
            last_storage = entry.storage;
            have_presentation = true;

            // Step 10: audit record mined on every replica.
            step = 10;
            net.clock_seconds += 1;
            record_audit(net, served.audit);
            emit({{"event", "audit"}, {"step", 10},
                  {"record", json::parse(served.audit.to_json())}});
            emit({{"event", "block"}, {"step", 10},
                  {"height", net.nodes.front().chain.blocks.size() - 1},
                  {"hash", to_hex(BytesView(
                               ledger::header_hash(net.nodes.front().chain.blocks.back().header)
                                   .data(),
                               32))},
                  {"kind", "AuditRecord"},
                  {"replicas_identical", replicas_identical(net)}});
        } catch (const Error& e) {
            if (is_denial(e.code())) {
                emit({{"event", "denial"}, {"step", step}, {"reason", errc_name(e.code())},
                      {"user", entry.user}, {"detail", e.what()}});
                continue;
            }
            net.bus.set_tap(nullptr);
            throw Error(e.code(), "script entry " + std::to_string(index) + " step " +
                                      std::to_string(step) + ": " + e.what());
        }
    }

    emit({{"event", "scenario_end"},
          {"blocks", net.nodes.front().chain.blocks.size()},
          {"replicas_identical", replicas_identical(net)},
          {"served", result.served.size()},
          {"bus_events", net.bus.events().size()}});
    net.bus.set_tap(nullptr);
    return result;
}

std::string transcript_text(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& line : lines) {
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace sepris::network
