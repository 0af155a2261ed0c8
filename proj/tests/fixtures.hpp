#pragma once

// Canonical simulation scenarios shared by the network/CLI suites and the
// acceptance gate: a five-node court walkthrough that grants one request,
// and a negative variant exercising the denial paths.

#include <string>
#include <vector>

#include "sepris/network.hpp"

namespace testutil {

inline sepris::network::ScenarioConfig court_config() {
    using namespace sepris::network;
    ScenarioConfig cfg;
    cfg.node_count = 5;
    cfg.difficulty_bits = 8;
    cfg.seed = 42;
    cfg.users = {{"court", "court", true}};

    ScenarioAcl acl;
    acl.user = "court";
    acl.cameras = {"cam-7"};
    acl.window_start = "2021-03-01";
    acl.window_end = "2021-03-31";
    acl.max_range_minutes = 120;
    acl.types = {"whole_context"};
    acl.sites = {"store-a"};
    cfg.acl = {acl};

    ScenarioVideo video;
    video.camera = "cam-7";
    video.date = "2021-03-09";
    video.start = "14:00";
    video.fps = 2;
    video.seconds = 120;
    video.width = 32;
    video.height = 32;
    video.channels = 1;

    ScenarioSite site;
    site.name = "store-a";
    site.address = "off-bc:store-a";
    site.quality = 50;
    site.videos = {video};
    cfg.sites = {site};

    ScriptEntry request;
    request.kind = "request";
    request.user = "court";
    request.origin = "sac1";
    request.cameras = {"cam-7"};
    request.date = "2021-03-09";
    request.start = "14:00";
    request.end = "14:01";
    request.type = "whole_context";
    request.storage = "store-a";
    cfg.script = {request};
    return cfg;
}

// Adds an unenrolled intruder, a user whose privileges exist on only four of
// the five nodes, and a replay of the granted request's access code.
inline sepris::network::ScenarioConfig negative_config() {
    using namespace sepris::network;
    ScenarioConfig cfg = court_config();
    cfg.users.push_back({"clerk", "police", true});
    cfg.users.push_back({"mallory", "court", false});

    ScenarioAcl clerk_acl = cfg.acl.front();
    clerk_acl.user = "clerk";
    clerk_acl.nodes = {"sac1", "sac2", "sac3", "sac4"};
    cfg.acl.push_back(clerk_acl);

    ScriptEntry intruder = cfg.script.front();
    intruder.user = "mallory";
    ScriptEntry divergent = cfg.script.front();
    divergent.user = "clerk";
    ScriptEntry replay;
    replay.kind = "replay";
    replay.user = "court";

    ScriptEntry granted = cfg.script.front();
    cfg.script = {intruder, divergent, granted, replay};
    return cfg;
}

}  // namespace testutil
