#include "sepris/storage.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sepris/hash.hpp"

namespace sepris::storage {

namespace {

const char* action_name(AuditRecord::Action a) {
    switch (a) {
        case AuditRecord::Action::Viewed: return "Viewed";
        case AuditRecord::Action::Granted: return "Granted";
        case AuditRecord::Action::Denied: return "Denied";
    }
    return "Denied";
}

AuditRecord::Action action_from_name(const std::string& s) {
    if (s == "Viewed") return AuditRecord::Action::Viewed;
    if (s == "Granted") return AuditRecord::Action::Granted;
    if (s == "Denied") return AuditRecord::Action::Denied;
    throw Error(Errc::ParseError, "unknown audit action: " + s);
}

dab::Key128 nonzero_key16(Drbg& rng) {
    dab::Key128 key{};
    do {
        rng.fill(key.data(), key.size());
    } while (std::all_of(key.begin(), key.end(), [](std::uint8_t b) { return b == 0; }));
    return key;
}

// Interval of a stored segment in frame ticks (seconds scaled by fps).
std::pair<std::int64_t, std::int64_t> segment_ticks(const VideoRecord& rec) {
    const std::int64_t start = std::int64_t(rec.start_time.minutes) * 60 * rec.fps;
    return {start, start + std::int64_t(rec.frames.size())};
}

}  // namespace

void VideoRecord::validate() const {
    if (fps <= 0 || fps > 255) throw Error(Errc::GeometryError, "fps must be in [1, 255]");
    if (frames.empty()) throw Error(Errc::EmptyInput, "video has no frames");
    frames.front().validate();
    for (const auto& f : frames) {
        if (f.width != frames.front().width || f.height != frames.front().height ||
            f.channels != frames.front().channels) {
            throw Error(Errc::DimensionMismatch, "video frames must share dimensions");
        }
        f.validate();
    }
}

std::string AuditRecord::to_json() const {
    return nlohmann::json{
        {"requestor_uid", requestor_uid},
        {"device_info", device_info},
        {"accessed_reference", accessed_reference},
        {"viewer_watermark", viewer_watermark},
        {"action", action_name(action)},
        {"timestamp", timestamp},
    }.dump();
}

AuditRecord AuditRecord::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad audit JSON: ") + e.what());
    }
    AuditRecord rec;
    try {
        rec.requestor_uid = j.at("requestor_uid").get<std::string>();
        rec.device_info = j.at("device_info").get<std::string>();
        rec.accessed_reference = j.at("accessed_reference").get<std::string>();
        rec.viewer_watermark = j.at("viewer_watermark").get<std::string>();
        rec.action = action_from_name(j.at("action").get<std::string>());
        rec.timestamp = j.at("timestamp").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad audit JSON: ") + e.what());
    }
    return rec;
}

StorageSite make_site(const std::string& name, const std::string& address,
                      const envelope::KeyPair& keypair, std::uint64_t seed) {
    StorageSite site;
    site.name = name;
    site.address = address;
    site.keypair = keypair;
    site.rng = Drbg(seed).derive("storage." + name);
    return site;
}

std::string ingest_video(StorageSite& site, const VideoRecord& record) {
    record.validate();
    const auto [lo, hi] = segment_ticks(record);
    for (const auto& [ref, existing] : site.records) {
        if (existing.camera_id != record.camera_id || existing.date != record.date ||
            existing.fps != record.fps) {
            continue;
        }
        const auto [elo, ehi] = segment_ticks(existing);
        if (lo < ehi && elo < hi) {
            throw Error(Errc::DuplicateSegment, "overlapping segment for camera " +
                                                    record.camera_id + " on " +
                                                    contract::format_date(record.date));
        }
    }

    Sha256 h;
    h.update("sepris.ref");
    h.update(site.name);
    h.update(record.camera_id);
    h.update_u64(contract::days_since_epoch(record.date));
    h.update_u64(std::uint64_t(record.start_time.minutes));
    h.update_u64(record.frames.size());
    h.update_u64(site.records.size());
    const std::string ref = to_hex(BytesView(h.finish().data(), 12));

    site.mapping[ref] = MappingEntry{record.camera_id, record.date,
                                     std::uint32_t(record.start_time.minutes) * 60,
                                     std::uint32_t(record.frames.size())};
    site.records.emplace(ref, record);
    return ref;
}

std::string authenticate(StorageSite& site, const std::string& uid, BytesView credential_digest,
                         std::uint64_t now) {
    auto it = site.user_credentials.find(uid);
    if (it == site.user_credentials.end()) {
        throw Error(Errc::UnknownUser, "uid not enrolled at site: " + uid);
    }
    const Bytes& registered = it->second;
    if (registered.size() != credential_digest.size() ||
        sodium_memcmp(registered.data(), credential_digest.data(), registered.size()) != 0) {
        throw Error(Errc::CredentialMismatch, "credential digest mismatch");
    }

    Sha256 h;
    h.update("sepris.session");
    h.update(site.name);
    h.update(uid);
    h.update_u64(now);
    Bytes fresh = site.rng.bytes(16);
    h.update(BytesView(fresh));
    const std::string token = to_hex(BytesView(h.finish().data(), 16));
    site.sessions[token] = uid;
    return token;
}

Grant receive_forwarded_request(StorageSite& site, const envelope::Envelope& env,
                                std::uint64_t now) {
    Bytes payload;
    bool verified = false;
    for (const auto& [label, pk] : site.trusted_senders) {
        try {
            payload = envelope::open(site.keypair, pk, env);
            verified = true;
            break;
        } catch (const Error& e) {
            if (e.code() == Errc::SignatureInvalid) continue;  // try the next SAC key
            throw;
        }
    }
    if (!verified) {
        throw Error(Errc::SignatureInvalid, "forwarded request not signed by a known SAC node");
    }

    contract::UpdatedRequest req = contract::updated_request_from_json(to_string(payload));
    if (auto it = site.grants.find(req.access_code); it != site.grants.end()) {
        return it->second;  // duplicate forward: keep the single existing grant
    }

    Grant grant;
    grant.updated_request = req;
    grant.state = GrantState::Pending;
    grant.received_at = now;
    grant.session_keys.aes_key = nonzero_key16(site.rng);
    grant.session_keys.shuffle_seed = nonzero_key16(site.rng);
    grant.session_keys.quality = site.serve_quality;
    grant.session_keys.frame_nonce_base = site.rng.next_u64();

    site.code_registry.register_code(req.access_code);
    site.grants.emplace(req.access_code, grant);
    return grant;
}

ServeResult serve_request(StorageSite& site, const std::string& session_token,
                          const contract::UpdatedRequest& presented, std::uint64_t now) {
    auto session = site.sessions.find(session_token);
    if (session == site.sessions.end()) {
        throw Error(Errc::CredentialMismatch, "unknown session token");
    }
    if (session->second != presented.request.uid) {
        throw Error(Errc::CredentialMismatch, "session belongs to a different uid");
    }

    auto grant_it = site.grants.find(presented.access_code);
    if (grant_it == site.grants.end()) {
        throw Error(Errc::NoMatchingGrant, "no grant for the presented code");
    }
    Grant& grant = grant_it->second;
    if (grant.state == GrantState::Expired) {
        throw Error(Errc::NoMatchingGrant, "grant expired");
    }

    // Select frames before consuming the single-use code so a missing
    // segment does not burn the grant.
    const std::int64_t lo = std::int64_t(presented.request.range.start.minutes) * 60;
    const std::int64_t hi = std::int64_t(presented.request.range.end.minutes) * 60;
    std::vector<const FrameBuffer*> selected;
    std::vector<std::string> touched_refs;
    for (const auto& camera : presented.request.camera_ids) {
        for (const auto& [ref, rec] : site.records) {
            if (rec.camera_id != camera || rec.date != presented.request.date) continue;
            const auto [seg_lo, seg_hi] = segment_ticks(rec);
            const std::int64_t want_lo = std::max(lo * rec.fps, seg_lo);
            const std::int64_t want_hi = std::min(hi * rec.fps, seg_hi);
            if (want_lo >= want_hi) continue;
            touched_refs.push_back(ref);
            for (std::int64_t t = want_lo; t < want_hi; ++t) {
                selected.push_back(&rec.frames[std::size_t(t - seg_lo)]);
            }
        }
    }
    if (selected.empty()) {
        throw Error(Errc::SegmentNotFound, "no stored frames cover the requested range");
    }

    if (!contract::match_requests(presented, grant.updated_request, site.code_registry)) {
        throw Error(Errc::NoMatchingGrant, "presented request does not match the forwarded one");
    }
    grant.state = GrantState::Consumed;

    auto user_key = site.user_keys.find(presented.request.uid);
    if (user_key == site.user_keys.end()) {
        throw Error(Errc::UnknownUser, "no public key enrolled for " + presented.request.uid);
    }

    ServeResult result;
    std::vector<dab::CipherFrame> cipher_frames;
    cipher_frames.reserve(selected.size());
    for (std::size_t i = 0; i < selected.size(); ++i) {
        cipher_frames.push_back(dab::encipher_frame(*selected[i], grant.session_keys, i));
    }
    result.stream = encode_stream(cipher_frames);
    result.frame_count = std::uint32_t(selected.size());

    const Bytes keyset_json = to_bytes(dab::keyset_to_json(grant.session_keys));
    result.session_keys =
        envelope::seal(site.keypair, user_key->second, BytesView(keyset_json), site.rng);

    std::string joined;
    for (const auto& r : touched_refs) {
        if (!joined.empty()) joined += ",";
        joined += r;
    }
    result.reference = joined;
    result.audit.requestor_uid = presented.request.uid;
    result.audit.device_info = "storage:" + site.name;
    result.audit.accessed_reference = joined;
    result.audit.viewer_watermark =
        to_hex(BytesView(site.user_credentials.at(presented.request.uid)));
    result.audit.action = AuditRecord::Action::Granted;
    result.audit.timestamp = now;
    return result;
}

std::size_t expire_grants(StorageSite& site, std::uint64_t now) {
    std::size_t expired = 0;
    for (auto& [code, grant] : site.grants) {
        if (grant.state == GrantState::Pending && now > grant.received_at &&
            now - grant.received_at > site.grant_ttl_seconds) {
            grant.state = GrantState::Expired;
            ++expired;
        }
    }
    return expired;
}

Bytes serialize_video(const VideoRecord& record) {
    record.validate();
    const FrameBuffer& first = record.frames.front();
    if (first.width > 0xffff || first.height > 0xffff) {
        throw Error(Errc::GeometryError, "frame dimensions exceed container limits");
    }

    Bytes out;
    out.insert(out.end(), {'S', 'P', 'R', 'S'});
    put_u16(out, 1);
    put_u16(out, std::uint16_t(record.camera_id.size()));
    out.insert(out.end(), record.camera_id.begin(), record.camera_id.end());
    put_u32(out, contract::days_since_epoch(record.date));
    put_u32(out, std::uint32_t(record.start_time.minutes) * 60);
    put_u16(out, std::uint16_t(first.width));
    put_u16(out, std::uint16_t(first.height));
    out.push_back(std::uint8_t(first.channels));
    out.push_back(std::uint8_t(record.fps));
    put_u32(out, std::uint32_t(record.frames.size()));
    for (const auto& frame : record.frames) {
        out.insert(out.end(), frame.pixels.begin(), frame.pixels.end());
    }
    return out;
}

VideoRecord parse_video(BytesView data) {
    ByteReader r(data);
    Bytes magic = r.take(4);
    if (std::memcmp(magic.data(), "SPRS", 4) != 0) {
        throw Error(Errc::ParseError, "bad video container magic");
    }
    if (r.u16() != 1) throw Error(Errc::ParseError, "unsupported video container version");

    VideoRecord rec;
    rec.camera_id = to_string(r.take(r.u16()));
    rec.date = contract::date_from_days(r.u32());
    const std::uint32_t start_seconds = r.u32();
    if (start_seconds % 60 != 0 || start_seconds >= 86400) {
        throw Error(Errc::ParseError, "bad start time");
    }
    rec.start_time = contract::TimeOfDay{int(start_seconds / 60)};
    const std::uint16_t width = r.u16();
    const std::uint16_t height = r.u16();
    const std::uint8_t channels = r.u8();
    rec.fps = r.u8();
    const std::uint32_t count = r.u32();

    const std::size_t frame_bytes = std::size_t(width) * height * channels;
    if (r.remaining() != frame_bytes * count) {
        throw Error(Errc::ParseError, "video payload length mismatch");
    }
    rec.frames.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        FrameBuffer f(width, height, channels);
        f.pixels = r.take(frame_bytes);
        rec.frames.push_back(std::move(f));
    }
    rec.validate();
    return rec;
}

void save_video(const std::string& path, const VideoRecord& record) {
    Bytes data = serialize_video(record);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::IoError, "cannot write video file: " + path);
    f.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!f) throw Error(Errc::IoError, "short write: " + path);
}

VideoRecord load_video(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::IoError, "cannot read video file: " + path);
    Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_video(BytesView(data));
}

Bytes encode_stream(const std::vector<dab::CipherFrame>& frames) {
    Bytes out;
    for (const auto& cf : frames) {
        Bytes rec = dab::serialize_cipher_frame(cf);
        put_u32(out, std::uint32_t(rec.size()));
        out.insert(out.end(), rec.begin(), rec.end());
    }
    return out;
}

std::vector<dab::CipherFrame> decode_stream(BytesView stream) {
    std::vector<dab::CipherFrame> frames;
    ByteReader r(stream);
    while (!r.done()) {
        Bytes rec = r.take(r.u32());
        frames.push_back(dab::parse_cipher_frame(BytesView(rec)));
    }
    return frames;
}

}  // namespace sepris::storage
