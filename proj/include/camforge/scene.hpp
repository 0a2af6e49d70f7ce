#pragma once

#include "camforge/geometry.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace camforge::scene {

using geom::Vec3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PlacementFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Background { sky, far_mountains, closer_mountains, both_mountains };
enum class FloorTexture {
    brick_stone,
    black_sand,
    green_grass,
    brown_ground,
    yellow_grass,
    light_green_grass
};
enum class StaticKind { tree, bush, grass };
enum class MovingKind { sphere, cube, polygon, cylinder };

const char* to_string(Background b);
const char* to_string(FloorTexture f);
const char* to_string(StaticKind k);
const char* to_string(MovingKind k);
Background background_from_string(const std::string& s);
FloorTexture floor_from_string(const std::string& s);
StaticKind static_kind_from_string(const std::string& s);
MovingKind moving_kind_from_string(const std::string& s);

// Prose forms used in prompts ("black sand ground", "a moving sphere", ...).
std::string floor_prose(FloorTexture f);
std::string moving_prose(MovingKind k);

struct Color {
    double r = 0, g = 0, b = 0;
    bool operator==(const Color&) const = default;
};

struct LinearMotion {
    Vec3 velocity = Vec3::Zero();  // ground-plane velocity, reflected at bounds
};
struct CircularMotion {
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
    double angular_speed = 0.5;  // rad/s
    double phase = 0.0;
};

struct StaticObject {
    StaticKind kind = StaticKind::tree;
    Vec3 position = Vec3::Zero();  // ground contact point, y = 0
    double scale = 1.0;
};

struct MovingObject {
    MovingKind kind = MovingKind::sphere;
    Vec3 start = Vec3::Zero();  // ground contact point at t = 0
    double scale = 1.0;
    std::variant<LinearMotion, CircularMotion> motion = LinearMotion{};
    Color color;
};

struct SceneSpec {
    Background background = Background::sky;
    FloorTexture floor = FloorTexture::green_grass;
    std::vector<StaticObject> static_objects;
    std::vector<MovingObject> moving_objects;
    std::uint64_t seed = 0;
};

struct SceneConfig {
    double arena_half = 20.0;     // floor extends to +-arena_half
    double interior_half = 15.0;  // objects stay within +-interior_half
    int min_static = 4;
    int max_static = 10;
    int min_moving = 1;
    int max_moving = 3;
    double min_static_scale = 0.6;
    double max_static_scale = 1.8;
    double min_moving_scale = 0.5;
    double max_moving_scale = 1.2;
    double min_speed = 0.4;  // m/s for linear movers
    double max_speed = 1.6;
    int max_place_attempts = 100;

    void validate() const;
};

SceneSpec sample_scene(std::uint64_t seed, const SceneConfig& config);

// Ground-contact position of a moving object at time t (seconds). Linear
// movers reflect elastically off the interior bounds.
Vec3 position_at(const MovingObject& obj, double t, const SceneConfig& config = {});

// Content clause without the "Content: " prefix; the virtual indicator
// prefixes "In this low-poly 3D <VIRTUAL> scene, " when set.
std::string content_clause(const SceneSpec& spec, bool virtual_indicator);

// Full "Content: ..." prompt text.
std::string scene_description(const SceneSpec& spec, bool virtual_indicator);

nlohmann::json to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const nlohmann::json& j);

}  // namespace camforge::scene
