#include "camforge/scene.hpp"

#include "camforge/rng.hpp"

#include <array>
#include <cctype>
#include <cmath>

namespace camforge::scene {

namespace {

constexpr std::array<const char*, 4> kBackgroundNames = {"sky", "far_mountains",
                                                         "closer_mountains", "both_mountains"};
constexpr std::array<const char*, 6> kFloorNames = {"brick_stone",  "black_sand",
                                                    "green_grass",  "brown_ground",
                                                    "yellow_grass", "light_green_grass"};
constexpr std::array<const char*, 3> kStaticNames = {"tree", "bush", "grass"};
constexpr std::array<const char*, 4> kMovingNames = {"sphere", "cube", "polygon", "cylinder"};

constexpr std::array<const char*, 6> kFloorProse = {
    "brick and stone floor", "black sand ground",  "green grassland",
    "brown ground",          "yellow grassland",   "light green grassland"};

// Moving-object color palette; flat saturated low-poly tones.
constexpr std::array<Color, 8> kPalette = {{{0.85, 0.2, 0.2},
                                            {0.2, 0.45, 0.85},
                                            {0.95, 0.75, 0.2},
                                            {0.6, 0.25, 0.75},
                                            {0.9, 0.45, 0.15},
                                            {0.2, 0.75, 0.7},
                                            {0.85, 0.35, 0.6},
                                            {0.45, 0.7, 0.25}}};

template <typename E, size_t N>
E enum_from_string(const std::string& s, const std::array<const char*, N>& names,
                   const char* what) {
    for (size_t i = 0; i < N; ++i)
        if (s == names[i]) return static_cast<E>(i);
    throw std::runtime_error(std::string("unknown ") + what + ": " + s);
}

double footprint_radius(double scale) { return 0.6 * scale; }

}  // namespace

const char* to_string(Background b) { return kBackgroundNames[static_cast<size_t>(b)]; }
const char* to_string(FloorTexture f) { return kFloorNames[static_cast<size_t>(f)]; }
const char* to_string(StaticKind k) { return kStaticNames[static_cast<size_t>(k)]; }
const char* to_string(MovingKind k) { return kMovingNames[static_cast<size_t>(k)]; }

Background background_from_string(const std::string& s) {
    return enum_from_string<Background>(s, kBackgroundNames, "background");
}
FloorTexture floor_from_string(const std::string& s) {
    return enum_from_string<FloorTexture>(s, kFloorNames, "floor texture");
}
StaticKind static_kind_from_string(const std::string& s) {
    return enum_from_string<StaticKind>(s, kStaticNames, "static object kind");
}
MovingKind moving_kind_from_string(const std::string& s) {
    return enum_from_string<MovingKind>(s, kMovingNames, "moving object kind");
}

std::string floor_prose(FloorTexture f) { return kFloorProse[static_cast<size_t>(f)]; }
std::string moving_prose(MovingKind k) { return std::string("a moving ") + to_string(k); }

void SceneConfig::validate() const {
    if (min_static > max_static || min_moving > max_moving)
        throw ConfigError("scene config: inverted object count range");
    if (min_static_scale > max_static_scale || min_moving_scale > max_moving_scale)
        throw ConfigError("scene config: inverted scale range");
    if (min_speed > max_speed) throw ConfigError("scene config: inverted speed range");
    if (interior_half <= 0 || arena_half < interior_half)
        throw ConfigError("scene config: arena must contain the interior");
    if (max_place_attempts < 1) throw ConfigError("scene config: retry cap must be >= 1");
}

SceneSpec sample_scene(std::uint64_t seed, const SceneConfig& config) {
    config.validate();
    Rng rng(derive_seed(seed, 0x5CE2E, 0));

    SceneSpec spec;
    spec.seed = seed;
    spec.background = static_cast<Background>(rng.uniform_index(4));
    spec.floor = static_cast<FloorTexture>(rng.uniform_index(6));

    const int n_static = rng.uniform_int(config.min_static, config.max_static);
    const int n_moving = rng.uniform_int(config.min_moving, config.max_moving);

    struct Placed {
        Vec3 pos;
        double radius;
    };
    std::vector<Placed> placed;

    auto try_place = [&](double scale) -> Vec3 {
        const double radius = footprint_radius(scale);
        for (int attempt = 0; attempt < config.max_place_attempts; ++attempt) {
            const Vec3 pos(rng.uniform(-config.interior_half, config.interior_half), 0.0,
                           rng.uniform(-config.interior_half, config.interior_half));
            bool free = true;
            for (const auto& p : placed) {
                const double dx = pos.x() - p.pos.x();
                const double dz = pos.z() - p.pos.z();
                if (std::hypot(dx, dz) < radius + p.radius) {
                    free = false;
                    break;
                }
            }
            if (free) {
                placed.push_back({pos, radius});
                return pos;
            }
        }
        throw PlacementFailure("sample_scene: exceeded placement retry cap");
    };

    for (int i = 0; i < n_static; ++i) {
        StaticObject obj;
        obj.kind = static_cast<StaticKind>(rng.uniform_index(3));
        obj.scale = rng.uniform(config.min_static_scale, config.max_static_scale);
        obj.position = try_place(obj.scale);
        spec.static_objects.push_back(obj);
    }

    for (int i = 0; i < n_moving; ++i) {
        MovingObject obj;
        obj.kind = static_cast<MovingKind>(rng.uniform_index(4));
        obj.scale = rng.uniform(config.min_moving_scale, config.max_moving_scale);
        obj.start = try_place(obj.scale);
        obj.color = kPalette[rng.uniform_index(kPalette.size())];

        if (rng.uniform() < 0.5) {
            const double heading = rng.uniform(0.0, 2.0 * M_PI);
            const double speed = rng.uniform(config.min_speed, config.max_speed);
            obj.motion = LinearMotion{Vec3(speed * std::cos(heading), 0.0,
                                           speed * std::sin(heading))};
        } else {
            CircularMotion c;
            // Keep the whole circle inside the interior.
            const double margin = config.interior_half -
                                  std::max(std::abs(obj.start.x()), std::abs(obj.start.z()));
            c.radius = rng.uniform(0.5, std::max(0.6, std::min(4.0, margin)));
            c.phase = rng.uniform(0.0, 2.0 * M_PI);
            c.angular_speed = rng.uniform(0.2, 0.8) * (rng.uniform() < 0.5 ? 1.0 : -1.0);
            c.center = obj.start - c.radius * Vec3(std::cos(c.phase), 0.0, std::sin(c.phase));
            obj.motion = c;
        }
        spec.moving_objects.push_back(obj);
    }

    return spec;
}

namespace {

double reflect_into(double x, double lo, double hi) {
    const double span = hi - lo;
    double y = std::fmod(x - lo, 2.0 * span);
    if (y < 0) y += 2.0 * span;
    return lo + (y <= span ? y : 2.0 * span - y);
}

}  // namespace

Vec3 position_at(const MovingObject& obj, double t, const SceneConfig& config) {
    if (const auto* lin = std::get_if<LinearMotion>(&obj.motion)) {
        const Vec3 raw = obj.start + t * lin->velocity;
        return Vec3(reflect_into(raw.x(), -config.interior_half, config.interior_half), 0.0,
                    reflect_into(raw.z(), -config.interior_half, config.interior_half));
    }
    const auto& c = std::get<CircularMotion>(obj.motion);
    const double a = c.phase + c.angular_speed * t;
    return c.center + c.radius * Vec3(std::cos(a), 0.0, std::sin(a));
}

std::string content_clause(const SceneSpec& spec, bool virtual_indicator) {
    std::string body;
    if (spec.moving_objects.empty()) {
        body = "there are small plants and geometries on the " + floor_prose(spec.floor) + ".";
    } else {
        if (spec.moving_objects.size() == 1) {
            body = "there is " + moving_prose(spec.moving_objects[0].kind) + ".";
        } else {
            body = "there are ";
            for (size_t i = 0; i < spec.moving_objects.size(); ++i) {
                if (i > 0) body += (i + 1 == spec.moving_objects.size()) ? " and " : ", ";
                body += moving_prose(spec.moving_objects[i].kind);
            }
            body += ".";
        }
        body += " There are also small plants and geometries on the " + floor_prose(spec.floor) +
                ".";
    }

    if (virtual_indicator) return "In this low-poly 3D <VIRTUAL> scene, " + body;
    body[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(body[0])));
    return body;
}

std::string scene_description(const SceneSpec& spec, bool virtual_indicator) {
    return "Content: " + content_clause(spec, virtual_indicator);
}

namespace {

nlohmann::json vec3_json(const Vec3& v) { return nlohmann::json{v.x(), v.y(), v.z()}; }
Vec3 vec3_from(const nlohmann::json& j) { return Vec3(j.at(0), j.at(1), j.at(2)); }

nlohmann::json color_json(const Color& c) { return nlohmann::json{c.r, c.g, c.b}; }
Color color_from(const nlohmann::json& j) { return Color{j.at(0), j.at(1), j.at(2)}; }

}  // namespace

nlohmann::json to_json(const SceneSpec& spec) {
    nlohmann::json statics = nlohmann::json::array();
    for (const auto& o : spec.static_objects)
        statics.push_back({{"kind", to_string(o.kind)},
                           {"position", vec3_json(o.position)},
                           {"scale", o.scale}});

    nlohmann::json movers = nlohmann::json::array();
    for (const auto& o : spec.moving_objects) {
        nlohmann::json m{{"kind", to_string(o.kind)},
                         {"start", vec3_json(o.start)},
                         {"scale", o.scale},
                         {"color", color_json(o.color)}};
        if (const auto* lin = std::get_if<LinearMotion>(&o.motion)) {
            m["motion"] = {{"type", "linear"}, {"velocity", vec3_json(lin->velocity)}};
        } else {
            const auto& c = std::get<CircularMotion>(o.motion);
            m["motion"] = {{"type", "circular"},
                           {"center", vec3_json(c.center)},
                           {"radius", c.radius},
                           {"angular_speed", c.angular_speed},
                           {"phase", c.phase}};
        }
        movers.push_back(m);
    }

    return nlohmann::json{{"background", to_string(spec.background)},
                          {"floor", to_string(spec.floor)},
                          {"static_objects", statics},
                          {"moving_objects", movers},
                          {"seed", spec.seed}};
}

SceneSpec scene_from_json(const nlohmann::json& j) {
    SceneSpec spec;
    spec.background = background_from_string(j.at("background"));
    spec.floor = floor_from_string(j.at("floor"));
    spec.seed = j.at("seed");
    for (const auto& s : j.at("static_objects")) {
        StaticObject o;
        o.kind = static_kind_from_string(s.at("kind"));
        o.position = vec3_from(s.at("position"));
        o.scale = s.at("scale");
        spec.static_objects.push_back(o);
    }
    for (const auto& m : j.at("moving_objects")) {
        MovingObject o;
        o.kind = moving_kind_from_string(m.at("kind"));
        o.start = vec3_from(m.at("start"));
        o.scale = m.at("scale");
        o.color = color_from(m.at("color"));
        const auto& mo = m.at("motion");
        if (mo.at("type") == "linear") {
            o.motion = LinearMotion{vec3_from(mo.at("velocity"))};
        } else {
            CircularMotion c;
            c.center = vec3_from(mo.at("center"));
            c.radius = mo.at("radius");
            c.angular_speed = mo.at("angular_speed");
            c.phase = mo.at("phase");
            o.motion = c;
        }
        spec.moving_objects.push_back(o);
    }
    return spec;
}

}  // namespace camforge::scene
