#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sepris/contract.hpp"
#include "sepris/dab.hpp"
#include "sepris/drbg.hpp"
#include "sepris/envelope.hpp"
#include "sepris/frame.hpp"

namespace sepris::storage {

struct VideoRecord {
    std::string camera_id;
    contract::Date date;
    contract::TimeOfDay start_time;
    int fps = 0;
    std::vector<FrameBuffer> frames;

    void validate() const;  // fps > 0, frames nonempty and uniform dims
    int duration_seconds() const { return int(frames.size()) / fps; }
};

enum class GrantState { Pending, Consumed, Expired };

struct Grant {
    contract::UpdatedRequest updated_request;
    GrantState state = GrantState::Pending;
    std::uint64_t received_at = 0;  // logical seconds
    dab::DabKeyset session_keys;    // fresh per grant
};

// Opaque reference -> stored segment; references never reveal paths or
// camera identities.
struct MappingEntry {
    std::string camera_id;
    contract::Date date;
    std::uint32_t start_second = 0;  // within the day
    std::uint32_t frame_count = 0;
};

using MappingTable = std::map<std::string, MappingEntry>;

struct AuditRecord {
    std::string requestor_uid;
    std::string device_info;
    std::string accessed_reference;  // opaque MappingTable key
    std::string viewer_watermark;    // credential digest, hex
    enum class Action { Viewed, Granted, Denied } action = Action::Denied;
    std::uint64_t timestamp = 0;

    std::string to_json() const;
    static AuditRecord from_json(const std::string& text);
};

struct StorageSite {
    std::string name;
    std::string address;
    envelope::KeyPair keypair;
    std::map<std::string, envelope::Key32> trusted_senders;  // SAC node label -> key
    std::map<std::string, envelope::Key32> user_keys;        // uid -> user public key
    std::map<std::string, Bytes> user_credentials;           // uid -> credential digest
    std::map<std::string, std::string> sessions;             // token -> uid
    std::map<std::string, Grant> grants;                     // access code -> grant
    contract::AccessCodeRegistry code_registry;
    MappingTable mapping;
    std::map<std::string, VideoRecord> records;  // reference -> video
    int serve_quality = 50;
    std::uint64_t grant_ttl_seconds = 3600;
    Drbg rng{0};
};

StorageSite make_site(const std::string& name, const std::string& address,
                      const envelope::KeyPair& keypair, std::uint64_t seed);

// Stores the record and creates a MappingTable entry; overlapping segments
// for the same camera and date are rejected.
std::string ingest_video(StorageSite& site, const VideoRecord& record);

// Site-side identity check (constant-time digest comparison); the returned
// token is bound to this site.
std::string authenticate(StorageSite& site, const std::string& uid, BytesView credential_digest,
                         std::uint64_t now);

// Opens the forwarded envelope against the trusted SAC keys, registers the
// code and stores a Pending grant (idempotent for duplicate forwards).
Grant receive_forwarded_request(StorageSite& site, const envelope::Envelope& env,
                                std::uint64_t now);

struct ServeResult {
    Bytes stream;                       // length-prefixed cipher-frame records
    envelope::Envelope session_keys;    // DabKeyset sealed to the requestor
    AuditRecord audit;
    std::string reference;              // opaque reference that was read
    std::uint32_t frame_count = 0;
};

// Matches the presented request against the stored grant (consuming the
// access code), enciphers the selected frames with the grant's session
// keyset and emits the audit record.
ServeResult serve_request(StorageSite& site, const std::string& session_token,
                          const contract::UpdatedRequest& presented, std::uint64_t now);

std::size_t expire_grants(StorageSite& site, std::uint64_t now);

// "SPRS" video container.
Bytes serialize_video(const VideoRecord& record);
VideoRecord parse_video(BytesView data);
void save_video(const std::string& path, const VideoRecord& record);
VideoRecord load_video(const std::string& path);

// Served stream framing: u32 record length + SPRC record, repeated.
Bytes encode_stream(const std::vector<dab::CipherFrame>& frames);
std::vector<dab::CipherFrame> decode_stream(BytesView stream);

}  // namespace sepris::storage
