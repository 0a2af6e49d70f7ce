#pragma once

#include "camforge/renderer.hpp"
#include "camforge/scene.hpp"
#include "camforge/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace camforge::data {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingAsset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PromptPair {
    std::string camera_text;   // c_m, empty for static/appearance samples
    std::string content_text;  // c, without the "Content: " prefix
    bool virtual_indicator = false;

    // "Camera: <c_m> | Content: <c>" when c_m is non-empty, else
    // "Content: <c>". The <VIRTUAL> token lives inside content_text and is
    // present iff virtual_indicator is set.
    std::string composite() const;
    bool operator==(const PromptPair&) const = default;
};

struct MotionParams {
    double speed = 1.0;           // m/s for translations, deg/s for pans/tilts
    double speed2 = 1.0;          // second leg of composed motions
    traj::MotionKind composed_first = traj::MotionKind::push_in;
    traj::MotionKind composed_second = traj::MotionKind::truck_left;
    double orbit_degrees = 120.0;
    double dolly_d0 = 8.0;
    double dolly_d1 = 4.0;
    double shake_amp_rot = 1.5;   // degrees
    double shake_amp_trans = 0.05;
    double shake_smoothness = 0.8;
    double explosive_amp = 4.0;
    double explosive_omega = 1.2;
    double explosive_decay = 0.12;
    double roll_degrees = 90.0;
    double seek_sweep_amp = 25.0;
    int seek_sweeps = 2;
    double seek_push_ratio = 0.55;
};

struct DatasetConfig {
    int frames = 49;
    int width = 128;
    int height = 96;
    double f_px = 110.0;
    double fps = 12.0;
    int n_per_motion = 2;
    std::vector<traj::MotionKind> motions = {traj::MotionKind::push_in};
    std::uint64_t base_seed = 1;
    int threads = 0;
    scene::SceneConfig scene;
    MotionParams motion_params;

    void validate() const;
    geom::Intrinsics intrinsics() const;
};

struct ManifestEntry {
    std::string video_dir;  // relative to the manifest location
    std::string set;        // "X_a", "X_c" (toy corpora also use "X_n")
    std::string motion;
    std::uint64_t seed = 0;
    PromptPair prompt;
    std::string trajectory_file;  // relative path to poses.jsonl
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    nlohmann::json config;
    std::filesystem::path root;  // set on load/build; not serialized
};

// Per-sample seed derivation, splitmix-based: documented and stable.
std::uint64_t sample_seed(std::uint64_t base_seed, int motion_index, int sample_index);

struct SamplePair {
    scene::SceneSpec scene_spec;
    traj::TimedTrajectory static_traj;  // X_a
    traj::TimedTrajectory motion_traj;  // X_c
    PromptPair static_prompt;
    PromptPair motion_prompt;
};

// Builds the paired sample: both sets share the SceneSpec; X_a uses a
// randomized fixed pose, X_c the requested motion from a randomized start.
SamplePair build_pair(std::uint64_t scene_seed, traj::MotionKind motion,
                      const DatasetConfig& cfg);

// Renders n_per_motion pairs per motion kind under root and writes
// root/manifest.json. Layout per entry:
//   {X_a,X_c}/<motion>/<index>/frame_%04d.ppm, poses.jsonl, prompt.txt, meta.json
DatasetManifest build_corpus(const std::filesystem::path& root, const DatasetConfig& cfg);

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Writes one rendered video directory (frames + poses + prompt + meta).
void write_video_dir(const std::filesystem::path& dir, const render::RenderedVideo& video,
                     const traj::TimedTrajectory& trajectory, const PromptPair& prompt,
                     const nlohmann::json& extra_meta);

render::VideoTensor load_video_dir(const std::filesystem::path& dir, double fps);

}  // namespace camforge::data
