#include "swarmsteer/scenario_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace swarmsteer {

using nlohmann::json;

namespace {

const char* axis_name(int axis) {
    static const char* names[] = {"x", "y", "z"};
    return names[axis];
}

json vec_json(const Vec3& v) {
    return json::array({v.x, v.y, v.z});
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) {
        throw SchemaError(path.empty() ? "<root>" : path, "expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(path.empty() ? key : path + "." + key, "missing field");
    }
    return *it;
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

double number(const json& obj, const std::string& key, const std::string& path) {
    const json& v = member(obj, key, path);
    if (!v.is_number()) {
        throw SchemaError(join(path, key), "expected a number");
    }
    return v.get<double>();
}

std::int64_t integer(const json& obj, const std::string& key, const std::string& path) {
    const json& v = member(obj, key, path);
    if (!v.is_number_integer()) {
        throw SchemaError(join(path, key), "expected an integer");
    }
    return v.get<std::int64_t>();
}

Vec3 vec(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
        throw SchemaError(path, "expected an array of 3 numbers");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

Vec3 vec_member(const json& obj, const std::string& key, const std::string& path) {
    return vec(member(obj, key, path), join(path, key));
}

int axis_from(const json& v, const std::string& path) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "x") return 0;
        if (s == "y") return 1;
        if (s == "z") return 2;
    }
    throw SchemaError(path, "expected \"x\", \"y\" or \"z\"");
}

// Maps an invariant violation from Scenario::validate() onto the schema field
// it names (the message starts with the field path).
[[noreturn]] void rethrow_as_schema(const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto space = msg.find(' ');
    throw SchemaError(msg.substr(0, space), space == std::string::npos ? msg : msg.substr(space + 1));
}

Scenario canyon_base() {
    Scenario s;
    s.influence = InfluenceParams{5.0, 1.0, 0.5, +1};
    s.agent_count = 16;
    s.spawn_region = {{-24.0, 8.0, 6.0}, {-16.0, 16.0, 14.0}};
    // Canyon: wall plane y in [30, 31], x in [-40, 40], z in [0, 20], 4 m gap at x = 0.
    s.walls = {WallBox{{-40.0, 30.0, 0.0}, {-2.0, 31.0, 20.0}},
               WallBox{{2.0, 30.0, 0.0}, {40.0, 31.0, 20.0}}};
    CrossingPlane c;
    c.axis = 1;
    c.threshold = 31.0;
    c.direction = +1;
    c.span_min = Vec3{-40.0, 0.0, 0.0};
    c.span_max = Vec3{40.0, 0.0, 20.0};
    s.crossing = c;
    s.seed = 1;
    s.max_ticks = 600;
    return s;
}

}  // namespace

json scenario_to_json(const Scenario& s) {
    json walls = json::array();
    for (const WallBox& w : s.walls) {
        walls.push_back({{"min", vec_json(w.min_corner)}, {"max", vec_json(w.max_corner)}});
    }
    json doc = {
        {"name", s.name},
        {"zones",
         {{"r_repulsion", s.zones.r_repulsion},
          {"r_orientation", s.zones.r_orientation},
          {"r_attraction", s.zones.r_attraction},
          {"max_turn_rate", s.zones.max_turn_rate},
          {"speed", s.zones.speed},
          {"tau", s.zones.tau}}},
        {"influence", {{"alpha", s.influence.alpha}, {"K", s.influence.stiffness}, {"B", s.influence.damping}}},
        {"influence_sign", s.influence.sign},
        {"agent_count", s.agent_count},
        {"spawn_region", {{"min", vec_json(s.spawn_region.min_corner)}, {"max", vec_json(s.spawn_region.max_corner)}}},
        {"spawn_heading_mode", s.spawn_heading_mode == HeadingMode::aligned ? "aligned" : "random"},
        {"spawn_heading", vec_json(s.spawn_heading)},
        {"walls", walls},
        {"seed", s.seed},
        {"max_ticks", s.max_ticks},
    };
    if (s.crossing) {
        json c = {{"axis", axis_name(s.crossing->axis)},
                  {"beyond", s.crossing->threshold},
                  {"direction", s.crossing->direction}};
        if (s.crossing->span_min) c["span_min"] = vec_json(*s.crossing->span_min);
        if (s.crossing->span_max) c["span_max"] = vec_json(*s.crossing->span_max);
        doc["crossing"] = c;
    }
    return doc;
}

Scenario scenario_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw SchemaError("<root>", "scenario must be a JSON object");
    }
    Scenario s;
    const json& name = member(doc, "name", "");
    if (!name.is_string()) {
        throw SchemaError("name", "expected a string");
    }
    s.name = name.get<std::string>();

    const json& zones = member(doc, "zones", "");
    s.zones.r_repulsion = number(zones, "r_repulsion", "zones");
    s.zones.r_orientation = number(zones, "r_orientation", "zones");
    s.zones.r_attraction = number(zones, "r_attraction", "zones");
    s.zones.max_turn_rate = number(zones, "max_turn_rate", "zones");
    s.zones.speed = number(zones, "speed", "zones");
    s.zones.tau = number(zones, "tau", "zones");

    const json& influence = member(doc, "influence", "");
    s.influence.alpha = number(influence, "alpha", "influence");
    s.influence.stiffness = number(influence, "K", "influence");
    s.influence.damping = number(influence, "B", "influence");
    s.influence.sign = doc.contains("influence_sign") ? static_cast<int>(integer(doc, "influence_sign", "")) : 1;

    const std::int64_t count = integer(doc, "agent_count", "");
    if (count < 1 || count > 100000) {
        throw SchemaError("agent_count", "must be in [1, 100000]");
    }
    s.agent_count = static_cast<int>(count);

    const json& spawn = member(doc, "spawn_region", "");
    s.spawn_region.min_corner = vec_member(spawn, "min", "spawn_region");
    s.spawn_region.max_corner = vec_member(spawn, "max", "spawn_region");

    const json& mode = member(doc, "spawn_heading_mode", "");
    if (mode == "random") {
        s.spawn_heading_mode = HeadingMode::random;
    } else if (mode == "aligned") {
        s.spawn_heading_mode = HeadingMode::aligned;
    } else {
        throw SchemaError("spawn_heading_mode", "expected \"random\" or \"aligned\"");
    }
    if (doc.contains("spawn_heading")) {
        s.spawn_heading = vec_member(doc, "spawn_heading", "");
    }

    if (doc.contains("walls")) {
        const json& walls = doc["walls"];
        if (!walls.is_array()) {
            throw SchemaError("walls", "expected an array");
        }
        for (std::size_t i = 0; i < walls.size(); ++i) {
            const std::string path = "walls[" + std::to_string(i) + "]";
            s.walls.push_back({vec_member(walls[i], "min", path), vec_member(walls[i], "max", path)});
        }
    }

    if (doc.contains("crossing")) {
        const json& c = doc["crossing"];
        CrossingPlane plane;
        plane.axis = axis_from(member(c, "axis", "crossing"), "crossing.axis");
        plane.threshold = number(c, "beyond", "crossing");
        plane.direction = c.contains("direction") ? static_cast<int>(integer(c, "direction", "crossing")) : 1;
        if (c.contains("span_min")) plane.span_min = vec_member(c, "span_min", "crossing");
        if (c.contains("span_max")) plane.span_max = vec_member(c, "span_max", "crossing");
        s.crossing = plane;
    }

    const json& seed = member(doc, "seed", "");
    if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
        throw SchemaError("seed", "expected a non-negative integer");
    }
    s.seed = seed.get<std::uint64_t>();
    const std::int64_t ticks = integer(doc, "max_ticks", "");
    if (ticks < 0 || ticks > 100000000) {
        throw SchemaError("max_ticks", "must be in [0, 1e8]");
    }
    s.max_ticks = static_cast<int>(ticks);

    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        rethrow_as_schema(e);
    }
    return s;
}

Scenario load_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError("<document>", std::string("not valid JSON: ") + e.what());
    }
    return scenario_from_json(doc);
}

std::string save_scenario(const Scenario& scenario) {
    return scenario_to_json(scenario).dump(2) + "\n";
}

std::string scenario_hash(const Scenario& scenario) {
    const std::string canonical = scenario_to_json(scenario).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> preset_names() {
    return {"paper-canyon", "milling", "cohesive", "milling-canyon"};
}

Scenario preset(std::string_view name) {
    if (name == "paper-canyon") {
        Scenario s = canyon_base();
        s.name = "paper-canyon";
        s.spawn_heading_mode = HeadingMode::aligned;
        s.spawn_heading = {1.0, 0.0, 0.0};
        return s;
    }
    if (name == "milling-canyon") {
        Scenario s = canyon_base();
        s.name = "milling-canyon";
        s.zones.r_orientation = 1.5;
        s.spawn_heading_mode = HeadingMode::random;
        return s;
    }
    if (name == "milling" || name == "cohesive") {
        Scenario s;
        s.name = std::string(name);
        s.influence = InfluenceParams{5.0, 1.0, 0.5, +1};
        s.agent_count = 16;
        s.spawn_region = {{-5.0, -5.0, 5.0}, {5.0, 5.0, 15.0}};
        s.spawn_heading_mode = HeadingMode::random;
        s.seed = 1;
        s.max_ticks = 600;
        if (name == "milling") {
            s.zones.r_orientation = 1.5;
        }
        return s;
    }
    throw SchemaError("name", "unknown scenario preset \"" + std::string(name) + "\"");
}

Scenario resolve_scenario(const std::string& name_or_path) {
    for (const std::string& p : preset_names()) {
        if (p == name_or_path) {
            return preset(p);
        }
    }
    // A bare word is a preset name; anything path-like is a file.
    if (name_or_path.find_first_of("/.") == std::string::npos && !std::filesystem::exists(name_or_path)) {
        return preset(name_or_path);
    }
    std::ifstream in(name_or_path);
    if (!in) {
        throw IoError("cannot open scenario file " + name_or_path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

}  // namespace swarmsteer
