#pragma once

#include "camforge/geometry.hpp"
#include "camforge/scene.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace camforge::traj {

using geom::CameraPose;
using geom::Intrinsics;
using geom::Vec3;

struct WrongKind : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadAngle : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownTarget : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MotionKind {
    static_cam,
    push_in,
    pull_out,
    truck_left,
    truck_right,
    pedestal_up,
    pedestal_down,
    pan_left,
    pan_right,
    tilt_up,
    tilt_down,
    composed,
    seek_then_focus,
    switch_focus,
    orbit,
    handheld_shake,
    dolly_zoom,
    explosive_shake,
    roll_rotation
};

const char* to_string(MotionKind k);
MotionKind motion_kind_from_string(const std::string& s);
bool is_simple(MotionKind k);       // the ten single-verb motions
bool is_translation(MotionKind k);  // push/pull/truck/pedestal

struct Frame {
    CameraPose pose;
    Intrinsics intr;
};

struct TimedTrajectory {
    std::vector<Frame> frames;
    MotionKind kind = MotionKind::static_cam;
    nlohmann::json params;  // generating parameters, serialized in the header line
    std::uint64_t seed = 0;
    double fps = 12.0;

    int size() const { return static_cast<int>(frames.size()); }
};

// Simple motions: translations at `speed` m/s along the start pose's axes,
// pans/tilts at `speed` deg/s about the start pose's up/right axis.
TimedTrajectory make_simple(MotionKind kind, const CameraPose& start, const Intrinsics& intr,
                            double speed, int K, double fps);

struct SimpleSpec {
    MotionKind kind = MotionKind::push_in;  // a simple kind, or static_cam
    double speed = 1.0;
};

// First ceil(K/2) frames follow m1; the rest follow m2 re-based at the
// handoff pose, which both segments share exactly.
TimedTrajectory compose(const SimpleSpec& m1, const SimpleSpec& m2, const CameraPose& start,
                        const Intrinsics& intr, int K, double fps);

TimedTrajectory static_trajectory(const CameraPose& pose, const Intrinsics& intr, int K,
                                  double fps = 12.0);

TimedTrajectory orbit(const Vec3& center, double radius, double height, double degrees,
                      const Intrinsics& intr, int K, double fps);

// Camera approaches the target from `approach_dir`, distance d0 -> d1 linear
// in t, focal length f(t) = f0 * d(t)/d0 (constant projected subject width).
TimedTrajectory dolly_zoom(const Vec3& target, const Intrinsics& intr0, double d0, double d1,
                           int K, double fps, const Vec3& approach_dir = Vec3(0, 0, 1),
                           double height = 0.0);

// Band-limited noise: per-frame rotation-vector and center offsets built from
// seeded Gaussian steps through an EMA (coefficient = smoothness), then
// rescaled so the max per-frame deviation equals the requested amplitude.
TimedTrajectory handheld_shake(const TimedTrajectory& base, double amp_rot_deg, double amp_trans,
                               double smoothness, std::uint64_t seed);

// Decaying oscillation about a seeded fixed axis starting at frame t0:
// angle(k) = A * exp(-decay*(k-t0)) * sin(omega*(k-t0)).
TimedTrajectory explosive_shake(const TimedTrajectory& base, int t0, double amp_deg, double omega,
                                double decay, std::uint64_t seed);

// Phase 1: sinusoidal yaw sweep; phase 2: slerp the aim onto the target over
// a transition window; phase 3: push toward the target, ending at
// push_ratio * initial distance. Targets the moving object's frame-0 center.
TimedTrajectory seek_then_focus(const scene::SceneSpec& spec, int target_index,
                                double sweep_amp_deg, int n_sweeps, int lock_frame,
                                double push_ratio, const CameraPose& start,
                                const Intrinsics& intr, int K, double fps,
                                int transition_frames = -1);

// Aim at object a for the first third, slerp the aim to b over the middle
// third, hold b for the last third; camera center fixed.
TimedTrajectory switch_focus(const scene::SceneSpec& spec, int index_a, int index_b,
                             const Vec3& camera_center, const Intrinsics& intr, int K, double fps);

// Linear roll about the view axis; degrees must be 90 or 180.
TimedTrajectory roll_rotation(const CameraPose& base_pose, double degrees, const Intrinsics& intr,
                              int K, double fps);

// Camera instruction clause without the "Camera: " prefix ("" for static).
std::string camera_clause(const TimedTrajectory& traj, const scene::SceneSpec& spec);

// Full "Camera: ..." prompt text; empty string for static trajectories.
std::string describe(const TimedTrajectory& traj, const scene::SceneSpec& spec);

// JSON Lines: header {kind, params, seed, fps}, then one pose record per frame.
void save_jsonl(const TimedTrajectory& traj, std::ostream& out);
TimedTrajectory load_jsonl(std::istream& in);
void save_jsonl_file(const TimedTrajectory& traj, const std::string& path);
TimedTrajectory load_jsonl_file(const std::string& path);

// Per-frame focus point for seek/switch motions: the object's frame-0
// geometric center (ground position lifted by half its scale).
Vec3 object_focus_point(const scene::SceneSpec& spec, int moving_index);

}  // namespace camforge::traj
