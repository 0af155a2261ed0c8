#include "sepris/contract.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace sepris::contract {

namespace {

bool all_digits(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

nlohmann::json parse_json(const std::string& text, const char* what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string(what) + ": " + e.what());
    }
}

nlohmann::json request_json(const AccessRequest& req) {
    return nlohmann::json{
        {"uid", req.uid},
        {"camera_ids", req.camera_ids},
        {"date", format_date(req.date)},
        {"range", {{"start", format_time(req.range.start)}, {"end", format_time(req.range.end)}}},
        {"type", video_type_name(req.type)},
        {"storage_name", req.storage_name},
        {"storage_address", req.storage_address},
    };
}

AccessRequest request_from(const nlohmann::json& j) {
    try {
        AccessRequest req;
        req.uid = j.at("uid").get<std::string>();
        req.camera_ids = j.at("camera_ids").get<std::vector<std::string>>();
        req.date = parse_date(j.at("date").get<std::string>());
        req.range.start = parse_time(j.at("range").at("start").get<std::string>());
        req.range.end = parse_time(j.at("range").at("end").get<std::string>());
        req.type = video_type_from_name(j.at("type").get<std::string>());
        req.storage_name = j.at("storage_name").get<std::string>();
        req.storage_address = j.at("storage_address").get<std::string>();
        if (req.camera_ids.empty()) throw Error(Errc::ParseError, "camera_ids must be nonempty");
        if (!(req.range.start < req.range.end)) {
            throw Error(Errc::ParseError, "range start must precede end");
        }
        return req;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad request JSON: ") + e.what());
    }
}

}  // namespace

std::string role_name(Role role) {
    switch (role) {
        case Role::Court: return "court";
        case Role::Police: return "police";
        case Role::LawEnforcer: return "law_enforcer";
        case Role::SocOperator: return "soc_operator";
    }
    return "court";
}

Role role_from_name(const std::string& name) {
    if (name == "court") return Role::Court;
    if (name == "police") return Role::Police;
    if (name == "law_enforcer") return Role::LawEnforcer;
    if (name == "soc_operator") return Role::SocOperator;
    throw Error(Errc::ParseError, "unknown role: " + name);
}

std::string video_type_name(VideoType type) {
    return type == VideoType::WholeContext ? "whole_context" : "activities";
}

VideoType video_type_from_name(const std::string& name) {
    if (name == "whole_context") return VideoType::WholeContext;
    if (name == "activities") return VideoType::Activities;
    throw Error(Errc::ParseError, "unknown video type: " + name);
}

Date parse_date(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    char extra = 0;
    if (std::sscanf(iso.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &extra) != 3 || iso.size() != 10) {
        throw Error(Errc::ParseError, "bad date: " + iso);
    }
    static const int days_in_month[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    const int cap = m == 2 && leap ? 29 : m >= 1 && m <= 12 ? days_in_month[m - 1] : 0;
    if (y < 1970 || m < 1 || m > 12 || d < 1 || d > cap) {
        throw Error(Errc::ParseError, "bad date: " + iso);
    }
    return Date{y, m, d};
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", date.year, date.month, date.day);
    return buf;
}

std::uint32_t days_since_epoch(const Date& date) {
    // Civil-from-days inverse (Howard Hinnant's algorithm).
    const int y = date.year - (date.month <= 2);
    const int era = y / 400;
    const unsigned yoe = unsigned(y - era * 400);
    const unsigned doy = (153u * (date.month + (date.month > 2 ? -3 : 9)) + 2) / 5 + date.day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return std::uint32_t(era * 146097 + int(doe) - 719468);
}

Date date_from_days(std::uint32_t days) {
    const int z = int(days) + 719468;
    const int era = z / 146097;
    const unsigned doe = unsigned(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = int(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const int m = int(mp) + (mp < 10 ? 3 : -9);
    return Date{y + (m <= 2), m, int(d)};
}

TimeOfDay parse_time(const std::string& hhmm) {
    int h = 0, m = 0;
    char extra = 0;
    if (std::sscanf(hhmm.c_str(), "%2d:%2d%c", &h, &m, &extra) != 2 || hhmm.size() != 5 ||
        h < 0 || h > 23 || m < 0 || m > 59) {
        throw Error(Errc::ParseError, "bad time of day: " + hhmm);
    }
    return TimeOfDay{h * 60 + m};
}

std::string format_time(const TimeOfDay& t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d", t.minutes / 60, t.minutes % 60);
    return buf;
}

std::string reason_name(Reason reason) {
    switch (reason) {
        case Reason::Approved: return "Approved";
        case Reason::UnknownUser: return "UnknownUser";
        case Reason::CameraDenied: return "CameraDenied";
        case Reason::DateDenied: return "DateDenied";
        case Reason::RangeExceeded: return "RangeExceeded";
        case Reason::TypeDenied: return "TypeDenied";
        case Reason::SiteDenied: return "SiteDenied";
    }
    return "UnknownUser";
}

std::string issue_uid(const std::string& role, Drbg& rng, UidRegistry* registry) {
    if (role.empty()) throw Error(Errc::EmptyInput, "role must be nonempty");
    for (int attempt = 0; attempt < 8; ++attempt) {
        std::string uid = role + rng.digits(39);
        if (!registry || registry->insert(uid)) return uid;
    }
    throw Error(Errc::RegistryCollision, "could not find a fresh UID after 8 attempts");
}

Decision validate_request(const AccessRequest& req, const Acl& acl) {
    auto it = acl.find(req.uid);
    if (it == acl.end()) return {false, Reason::UnknownUser};
    const AclEntry& entry = it->second;

    for (const auto& cam : req.camera_ids) {
        if (!entry.allowed_cameras.contains(cam)) return {false, Reason::CameraDenied};
    }
    if (req.date < entry.window_start || entry.window_end < req.date) {
        return {false, Reason::DateDenied};
    }
    if (req.range.duration_minutes() > entry.max_range_minutes) {
        return {false, Reason::RangeExceeded};
    }
    if (!entry.allowed_types.contains(req.type)) return {false, Reason::TypeDenied};
    if (!entry.allowed_storage_sites.contains(req.storage_name)) {
        return {false, Reason::SiteDenied};
    }
    return {true, Reason::Approved};
}

void AccessCodeRegistry::register_code(const std::string& code) {
    if (consumed_.contains(code) || !issued_.insert(code).second) {
        throw Error(Errc::RegistryCollision, "access code already registered");
    }
}

AccessCodeRegistry::State AccessCodeRegistry::state(const std::string& code) const {
    if (consumed_.contains(code)) return State::Consumed;
    if (issued_.contains(code)) return State::Issued;
    return State::Unknown;
}

void AccessCodeRegistry::consume(const std::string& code) {
    if (!issued_.erase(code)) {
        throw Error(Errc::CodeAlreadyConsumed, "access code is not live");
    }
    consumed_.insert(code);
}

std::string AccessCodeRegistry::to_text() const {
    return nlohmann::json{{"issued", issued_}, {"consumed", consumed_}}.dump();
}

AccessCodeRegistry AccessCodeRegistry::from_text(const std::string& text) {
    nlohmann::json j = parse_json(text, "bad access-code registry");
    AccessCodeRegistry reg;
    try {
        reg.issued_ = j.at("issued").get<std::set<std::string>>();
        reg.consumed_ = j.at("consumed").get<std::set<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad access-code registry: ") + e.what());
    }
    return reg;
}

std::string generate_access_code(const std::string& role, const std::string& storage_name,
                                 Drbg& rng, AccessCodeRegistry* registry) {
    if (role.empty() || storage_name.empty()) {
        throw Error(Errc::EmptyInput, "role and storage name must be nonempty");
    }
    std::string code = role + "To" + storage_name + rng.digits(18);
    if (registry) registry->register_code(code);
    return code;
}

bool match_requests(const UpdatedRequest& presented, const UpdatedRequest& forwarded,
                    AccessCodeRegistry& registry) {
    if (!(presented == forwarded)) return false;
    switch (registry.state(presented.access_code)) {
        case AccessCodeRegistry::State::Consumed:
            throw Error(Errc::CodeAlreadyConsumed,
                        "access code was already used: " + presented.access_code);
        case AccessCodeRegistry::State::Unknown:
            return false;
        case AccessCodeRegistry::State::Issued:
            break;
    }
    registry.consume(presented.access_code);
    return true;
}

std::string request_to_json(const AccessRequest& req) { return request_json(req).dump(); }

std::string request_to_json(const UpdatedRequest& req) {
    nlohmann::json j = request_json(req.request);
    j["access_code"] = req.access_code;
    return j.dump();
}

AccessRequest request_from_json(const std::string& text) {
    return request_from(parse_json(text, "bad request JSON"));
}

UpdatedRequest updated_request_from_json(const std::string& text) {
    nlohmann::json j = parse_json(text, "bad request JSON");
    UpdatedRequest u;
    u.request = request_from(j);
    try {
        u.access_code = j.at("access_code").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("missing access_code: ") + e.what());
    }
    if (u.access_code.size() < 18 || !all_digits(u.access_code.substr(u.access_code.size() - 18))) {
        throw Error(Errc::ParseError, "access code does not match the issued format");
    }
    return u;
}

}  // namespace sepris::contract
