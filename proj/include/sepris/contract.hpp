#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sepris/common.hpp"
#include "sepris/drbg.hpp"

namespace sepris::contract {

enum class Role { Court, Police, LawEnforcer, SocOperator };

std::string role_name(Role role);
Role role_from_name(const std::string& name);

enum class VideoType { WholeContext, Activities };

std::string video_type_name(VideoType type);
VideoType video_type_from_name(const std::string& name);

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;
};

Date parse_date(const std::string& iso);   // "YYYY-MM-DD"
std::string format_date(const Date& date);
std::uint32_t days_since_epoch(const Date& date);
Date date_from_days(std::uint32_t days);

// Minutes since midnight, wire form "HH:MM".
struct TimeOfDay {
    int minutes = 0;

    auto operator<=>(const TimeOfDay&) const = default;
};

TimeOfDay parse_time(const std::string& hhmm);
std::string format_time(const TimeOfDay& t);

// Half-open [start, end) interval within one day.
struct TimeRange {
    TimeOfDay start;
    TimeOfDay end;

    int duration_minutes() const { return end.minutes - start.minutes; }
    auto operator<=>(const TimeRange&) const = default;
};

struct AclEntry {
    std::string uid;
    Role role = Role::Court;
    std::set<std::string> allowed_cameras;
    Date window_start;  // inclusive date window
    Date window_end;
    int max_range_minutes = 0;
    std::set<VideoType> allowed_types;
    std::set<std::string> allowed_storage_sites;
};

using Acl = std::map<std::string, AclEntry>;  // keyed by uid

struct AccessRequest {
    std::string uid;
    std::vector<std::string> camera_ids;
    Date date;
    TimeRange range;
    VideoType type = VideoType::WholeContext;
    std::string storage_name;
    std::string storage_address;

    bool operator==(const AccessRequest&) const = default;
};

struct UpdatedRequest {
    AccessRequest request;
    std::string access_code;

    bool operator==(const UpdatedRequest&) const = default;
};

enum class Reason {
    Approved,
    UnknownUser,
    CameraDenied,
    DateDenied,
    RangeExceeded,
    TypeDenied,
    SiteDenied,
};

std::string reason_name(Reason reason);

struct Decision {
    bool approved = false;
    Reason reason = Reason::UnknownUser;
};

// Registry backing UID uniqueness.
class UidRegistry {
public:
    bool insert(const std::string& uid) { return uids_.insert(uid).second; }
    bool contains(const std::string& uid) const { return uids_.contains(uid); }

private:
    std::set<std::string> uids_;
};

// Role name + 39 seeded decimal digits; retries internally on registry
// collisions and surfaces RegistryCollision only after 8 failures.
std::string issue_uid(const std::string& role, Drbg& rng, UidRegistry* registry = nullptr);

// Fixed evaluation order: UID known, cameras allowed, date inside window,
// duration under cap, type allowed, site allowed; the first failing check
// names the decision reason.
Decision validate_request(const AccessRequest& req, const Acl& acl);

// Tracks issued access codes and their single-use consumption; persistable.
class AccessCodeRegistry {
public:
    enum class State { Unknown, Issued, Consumed };

    void register_code(const std::string& code);
    State state(const std::string& code) const;
    void consume(const std::string& code);

    std::string to_text() const;
    static AccessCodeRegistry from_text(const std::string& text);

private:
    std::set<std::string> issued_;
    std::set<std::string> consumed_;
};

// role + "To" + storage_name + 18 seeded decimal digits; registered as
// unconsumed when a registry is supplied.
std::string generate_access_code(const std::string& role, const std::string& storage_name,
                                 Drbg& rng, AccessCodeRegistry* registry = nullptr);

// Field-by-field equality including the access code; a successful match
// consumes the code atomically. A repeated presentation of an already
// matched pair raises CodeAlreadyConsumed; differing fields return false
// without consuming anything.
bool match_requests(const UpdatedRequest& presented, const UpdatedRequest& forwarded,
                    AccessCodeRegistry& registry);

// Canonical request JSON (keys: uid, camera_ids, date, range{start,end},
// type, storage_name, storage_address, optional access_code).
std::string request_to_json(const AccessRequest& req);
std::string request_to_json(const UpdatedRequest& req);
AccessRequest request_from_json(const std::string& text);
UpdatedRequest updated_request_from_json(const std::string& text);

}  // namespace sepris::contract
