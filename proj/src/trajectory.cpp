#include "camforge/trajectory.hpp"

#include "camforge/rng.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace camforge::traj {

namespace {

constexpr std::array<const char*, 19> kKindNames = {
    "static",          "push_in",      "pull_out",     "truck_left",    "truck_right",
    "pedestal_up",     "pedestal_down", "pan_left",    "pan_right",     "tilt_up",
    "tilt_down",       "composed",     "seek_then_focus", "switch_focus", "orbit",
    "handheld_shake",  "dolly_zoom",   "explosive_shake", "roll_rotation"};

constexpr double kDegToRad = M_PI / 180.0;

geom::Mat3 axis_angle(const Vec3& axis, double angle) {
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

// Rotate the camera rig about a world-frame axis, keeping the center fixed.
CameraPose rotate_in_place(const CameraPose& pose, const Vec3& axis, double angle) {
    const geom::Mat3 R = pose.R * axis_angle(axis, angle).transpose();
    return CameraPose::from_center(R, pose.center());
}

void check_frames(int K, int min_frames) {
    if (K < min_frames)
        throw std::invalid_argument("trajectory: frame count K below minimum");
}

}  // namespace

const char* to_string(MotionKind k) { return kKindNames[static_cast<size_t>(k)]; }

MotionKind motion_kind_from_string(const std::string& s) {
    for (size_t i = 0; i < kKindNames.size(); ++i)
        if (s == kKindNames[i]) return static_cast<MotionKind>(i);
    throw std::runtime_error("unknown motion kind: " + s);
}

bool is_simple(MotionKind k) {
    switch (k) {
        case MotionKind::push_in:
        case MotionKind::pull_out:
        case MotionKind::truck_left:
        case MotionKind::truck_right:
        case MotionKind::pedestal_up:
        case MotionKind::pedestal_down:
        case MotionKind::pan_left:
        case MotionKind::pan_right:
        case MotionKind::tilt_up:
        case MotionKind::tilt_down:
            return true;
        default:
            return false;
    }
}

bool is_translation(MotionKind k) {
    switch (k) {
        case MotionKind::push_in:
        case MotionKind::pull_out:
        case MotionKind::truck_left:
        case MotionKind::truck_right:
        case MotionKind::pedestal_up:
        case MotionKind::pedestal_down:
            return true;
        default:
            return false;
    }
}

TimedTrajectory make_simple(MotionKind kind, const CameraPose& start, const Intrinsics& intr,
                            double speed, int K, double fps) {
    if (!is_simple(kind)) throw WrongKind("make_simple: not a simple motion kind");
    check_frames(K, 2);

    TimedTrajectory traj;
    traj.kind = kind;
    traj.fps = fps;
    traj.params = {{"speed", speed}, {"K", K}};
    traj.frames.reserve(static_cast<size_t>(K));
    traj.frames.push_back({start, intr});

    if (is_translation(kind)) {
        Vec3 dir;
        switch (kind) {
            case MotionKind::push_in: dir = start.forward(); break;
            case MotionKind::pull_out: dir = -start.forward(); break;
            case MotionKind::truck_left: dir = -start.right(); break;
            case MotionKind::truck_right: dir = start.right(); break;
            case MotionKind::pedestal_up: dir = start.up(); break;
            default: dir = -start.up(); break;  // pedestal_down
        }
        for (int k = 1; k < K; ++k) {
            const Vec3 delta = dir * (speed * k / fps);
            // t' = t - R*delta keeps frame 0 bit-exact and avoids a
            // center round trip.
            traj.frames.push_back({CameraPose{start.R, start.t - start.R * delta}, intr});
        }
    } else {
        Vec3 axis;
        double sign = 1.0;
        switch (kind) {
            case MotionKind::pan_left: axis = start.up(); sign = 1.0; break;
            case MotionKind::pan_right: axis = start.up(); sign = -1.0; break;
            case MotionKind::tilt_up: axis = start.right(); sign = 1.0; break;
            default: axis = start.right(); sign = -1.0; break;  // tilt_down
        }
        for (int k = 1; k < K; ++k) {
            const double angle = sign * speed * kDegToRad * k / fps;
            traj.frames.push_back({rotate_in_place(start, axis, angle), intr});
        }
    }
    return traj;
}

namespace {

TimedTrajectory segment(const SimpleSpec& m, const CameraPose& start, const Intrinsics& intr,
                        int K, double fps) {
    if (m.kind == MotionKind::static_cam) return static_trajectory(start, intr, K, fps);
    return make_simple(m.kind, start, intr, m.speed, K, fps);
}

}  // namespace

TimedTrajectory compose(const SimpleSpec& m1, const SimpleSpec& m2, const CameraPose& start,
                        const Intrinsics& intr, int K, double fps) {
    check_frames(K, 2);
    const int n1 = (K + 1) / 2;  // frames 0..n1-1 follow motion 1
    const TimedTrajectory seg1 = segment(m1, start, intr, n1, fps);
    const TimedTrajectory seg2 = segment(m2, seg1.frames.back().pose, intr, K - n1 + 1, fps);

    TimedTrajectory traj;
    traj.kind = MotionKind::composed;
    traj.fps = fps;
    traj.params = {{"first", to_string(m1.kind)},
                   {"second", to_string(m2.kind)},
                   {"speed1", m1.speed},
                   {"speed2", m2.speed},
                   {"K", K}};
    traj.frames = seg1.frames;
    traj.frames.insert(traj.frames.end(), seg2.frames.begin() + 1, seg2.frames.end());
    return traj;
}

TimedTrajectory static_trajectory(const CameraPose& pose, const Intrinsics& intr, int K,
                                  double fps) {
    check_frames(K, 1);
    TimedTrajectory traj;
    traj.kind = MotionKind::static_cam;
    traj.fps = fps;
    traj.params = {{"K", K}};
    traj.frames.assign(static_cast<size_t>(K), Frame{pose, intr});
    return traj;
}

TimedTrajectory orbit(const Vec3& center, double radius, double height, double degrees,
                      const Intrinsics& intr, int K, double fps) {
    if (radius <= 0) throw std::invalid_argument("orbit: radius must be positive");
    check_frames(K, 2);

    TimedTrajectory traj;
    traj.kind = MotionKind::orbit;
    traj.fps = fps;
    traj.params = {{"center", {center.x(), center.y(), center.z()}},
                   {"radius", radius},
                   {"height", height},
                   {"degrees", degrees},
                   {"K", K}};
    for (int k = 0; k < K; ++k) {
        const double az = degrees * kDegToRad * k / (K - 1);
        const Vec3 pos = center + Vec3(radius * std::cos(az), height, radius * std::sin(az));
        traj.frames.push_back({geom::look_at(pos, center, Vec3(0, 1, 0)), intr});
    }
    return traj;
}

TimedTrajectory dolly_zoom(const Vec3& target, const Intrinsics& intr0, double d0, double d1,
                           int K, double fps, const Vec3& approach_dir, double height) {
    if (d0 <= 0 || d1 <= 0) throw std::invalid_argument("dolly_zoom: distances must be positive");
    check_frames(K, 2);

    Vec3 dir = approach_dir;
    dir.y() = 0;
    if (dir.norm() < 1e-12) dir = Vec3(0, 0, 1);
    dir.normalize();

    TimedTrajectory traj;
    traj.kind = MotionKind::dolly_zoom;
    traj.fps = fps;
    traj.params = {{"d0", d0}, {"d1", d1}, {"f0", intr0.f_px}, {"K", K}};
    for (int k = 0; k < K; ++k) {
        const double s = static_cast<double>(k) / (K - 1);
        const double d = d0 + (d1 - d0) * s;
        const Vec3 pos = target + dir * d + Vec3(0, height, 0);
        Intrinsics intr = intr0;
        intr.f_px = intr0.f_px * d / d0;
        traj.frames.push_back({geom::look_at(pos, target, Vec3(0, 1, 0)), intr});
    }
    return traj;
}

TimedTrajectory handheld_shake(const TimedTrajectory& base, double amp_rot_deg, double amp_trans,
                               double smoothness, std::uint64_t seed) {
    if (amp_rot_deg < 0 || amp_trans < 0)
        throw std::invalid_argument("handheld_shake: amplitudes must be >= 0");
    if (amp_rot_deg == 0 && amp_trans == 0) return base;

    const int K = base.size();
    Rng rng(derive_seed(seed, 0x44A2, 0));

    // Six EMA-filtered Gaussian streams: rotation vector (3) + center (3).
    std::vector<Vec3> rot(K, Vec3::Zero()), trans(K, Vec3::Zero());
    Vec3 er = Vec3::Zero(), et = Vec3::Zero();
    for (int k = 0; k < K; ++k) {
        const Vec3 gr(rng.normal(), rng.normal(), rng.normal());
        const Vec3 gt(rng.normal(), rng.normal(), rng.normal());
        er = smoothness * er + (1.0 - smoothness) * gr;
        et = smoothness * et + (1.0 - smoothness) * gt;
        rot[k] = er;
        trans[k] = et;
    }

    double max_rot = 0, max_trans = 0;
    for (int k = 0; k < K; ++k) {
        max_rot = std::max(max_rot, rot[k].norm());
        max_trans = std::max(max_trans, trans[k].norm());
    }
    const double sr = (amp_rot_deg > 0 && max_rot > 0) ? amp_rot_deg * kDegToRad / max_rot : 0.0;
    const double st = (amp_trans > 0 && max_trans > 0) ? amp_trans / max_trans : 0.0;

    TimedTrajectory traj = base;
    traj.kind = MotionKind::handheld_shake;
    traj.seed = seed;
    traj.params = {{"base", to_string(base.kind)},
                   {"amp_rot_deg", amp_rot_deg},
                   {"amp_trans", amp_trans},
                   {"smoothness", smoothness}};
    for (int k = 0; k < K; ++k) {
        const Frame& f = base.frames[static_cast<size_t>(k)];
        geom::Mat3 R = f.pose.R;
        if (sr > 0 && rot[k].norm() > 0) {
            // Rotation-vector perturbation in the camera frame; the angular
            // deviation from the base frame is exactly ||sr * rot[k]||.
            R = axis_angle(rot[k], sr * rot[k].norm()) * f.pose.R;
        }
        const Vec3 c = f.pose.center() + f.pose.R.transpose() * (st * trans[k]);
        traj.frames[static_cast<size_t>(k)] = {CameraPose::from_center(R, c), f.intr};
    }
    return traj;
}

TimedTrajectory explosive_shake(const TimedTrajectory& base, int t0, double amp_deg, double omega,
                                double decay, std::uint64_t seed) {
    const int K = base.size();
    if (t0 < 0 || t0 >= K) throw std::invalid_argument("explosive_shake: t0 outside [0, K)");
    if (amp_deg == 0) return base;

    Rng rng(derive_seed(seed, 0xE58A, 0));
    Vec3 axis(rng.normal(), rng.normal(), rng.normal());
    if (axis.norm() < 1e-12) axis = Vec3(1, 0, 0);
    axis.normalize();

    TimedTrajectory traj = base;
    traj.kind = MotionKind::explosive_shake;
    traj.seed = seed;
    traj.params = {{"base", to_string(base.kind)},
                   {"t0", t0},
                   {"amp_deg", amp_deg},
                   {"omega", omega},
                   {"decay", decay}};
    for (int k = t0; k < K; ++k) {
        const double dt = k - t0;
        const double angle = amp_deg * kDegToRad * std::exp(-decay * dt) * std::sin(omega * dt);
        if (angle == 0.0) continue;
        const Frame& f = base.frames[static_cast<size_t>(k)];
        const geom::Mat3 R = axis_angle(axis, angle) * f.pose.R;
        traj.frames[static_cast<size_t>(k)] = {CameraPose::from_center(R, f.pose.center()),
                                               f.intr};
    }
    return traj;
}

Vec3 object_focus_point(const scene::SceneSpec& spec, int moving_index) {
    if (moving_index < 0 || moving_index >= static_cast<int>(spec.moving_objects.size()))
        throw UnknownTarget("focus target index out of range");
    const auto& obj = spec.moving_objects[static_cast<size_t>(moving_index)];
    return obj.start + Vec3(0, 0.5 * obj.scale, 0);
}

TimedTrajectory seek_then_focus(const scene::SceneSpec& spec, int target_index,
                                double sweep_amp_deg, int n_sweeps, int lock_frame,
                                double push_ratio, const CameraPose& start,
                                const Intrinsics& intr, int K, double fps,
                                int transition_frames) {
    check_frames(K, 2);
    if (lock_frame < 1 || lock_frame >= K)
        throw std::invalid_argument("seek_then_focus: lock_frame outside [1, K)");
    const Vec3 target = object_focus_point(spec, target_index);

    if (transition_frames < 0)
        transition_frames = std::max(1, static_cast<int>(std::lround(0.15 * K)));
    const int push_start = std::min(K - 1, lock_frame + transition_frames);

    TimedTrajectory traj;
    traj.kind = MotionKind::seek_then_focus;
    traj.fps = fps;
    traj.params = {{"target", target_index},
                   {"sweep_amp_deg", sweep_amp_deg},
                   {"n_sweeps", n_sweeps},
                   {"lock_frame", lock_frame},
                   {"push_ratio", push_ratio},
                   {"K", K}};

    const Vec3 up_axis = start.up();
    // Phase 1: sinusoidal yaw about the start pose.
    for (int k = 0; k < lock_frame; ++k) {
        const double yaw = sweep_amp_deg * kDegToRad *
                           std::sin(2.0 * M_PI * n_sweeps * k / lock_frame);
        traj.frames.push_back({rotate_in_place(start, up_axis, yaw), intr});
    }

    // Phase 2: slerp the aim from the last sweep pose onto the target.
    const CameraPose sweep_end = traj.frames.back().pose;
    const CameraPose aimed = geom::look_at(start.center(), target, Vec3(0, 1, 0));
    for (int k = lock_frame; k < push_start; ++k) {
        const double s = static_cast<double>(k - lock_frame + 1) / (push_start - lock_frame);
        traj.frames.push_back({geom::interpolate_pose(sweep_end, aimed, s), intr});
    }

    // Phase 3: push along the aim ray, ending at push_ratio * initial distance.
    const Vec3 offset = start.center() - target;
    const double d_start = offset.norm();
    for (int k = push_start; k < K; ++k) {
        const double s = (K - 1 == push_start) ? 1.0
                                               : static_cast<double>(k - push_start) /
                                                     (K - 1 - push_start);
        const double d = d_start * (1.0 + (push_ratio - 1.0) * s);
        const Vec3 pos = target + offset * (d / d_start);
        traj.frames.push_back({geom::look_at(pos, target, Vec3(0, 1, 0)), intr});
    }
    return traj;
}

TimedTrajectory switch_focus(const scene::SceneSpec& spec, int index_a, int index_b,
                             const Vec3& camera_center, const Intrinsics& intr, int K,
                             double fps) {
    check_frames(K, 3);
    const Vec3 pa = object_focus_point(spec, index_a);
    const Vec3 pb = object_focus_point(spec, index_b);
    const CameraPose pose_a = geom::look_at(camera_center, pa, Vec3(0, 1, 0));
    const CameraPose pose_b =
        (pb - pa).norm() < 1e-12 ? pose_a : geom::look_at(camera_center, pb, Vec3(0, 1, 0));

    const int first_end = K / 3;        // frames [0, first_end) aim at A
    const int mid_end = (2 * K) / 3;    // frames [first_end, mid_end) blend

    TimedTrajectory traj;
    traj.kind = MotionKind::switch_focus;
    traj.fps = fps;
    traj.params = {{"from", index_a}, {"to", index_b}, {"K", K}};
    for (int k = 0; k < K; ++k) {
        if (k < first_end) {
            traj.frames.push_back({pose_a, intr});
        } else if (k < mid_end) {
            const double s = static_cast<double>(k - first_end + 1) / (mid_end - first_end + 1);
            traj.frames.push_back({geom::interpolate_pose(pose_a, pose_b, s), intr});
        } else {
            traj.frames.push_back({pose_b, intr});
        }
    }
    return traj;
}

TimedTrajectory roll_rotation(const CameraPose& base_pose, double degrees, const Intrinsics& intr,
                              int K, double fps) {
    if (degrees != 90.0 && degrees != 180.0)
        throw BadAngle("roll_rotation: angle must be 90 or 180 degrees");
    check_frames(K, 2);

    TimedTrajectory traj;
    traj.kind = MotionKind::roll_rotation;
    traj.fps = fps;
    traj.params = {{"degrees", degrees}, {"K", K}};
    const Vec3 view_axis = base_pose.forward();
    traj.frames.push_back({base_pose, intr});
    for (int k = 1; k < K; ++k) {
        const double roll = degrees * kDegToRad * k / (K - 1);
        traj.frames.push_back({rotate_in_place(base_pose, view_axis, roll), intr});
    }
    return traj;
}

namespace {

std::string verb_phrase(MotionKind k) {
    switch (k) {
        case MotionKind::push_in: return "pushes forward";
        case MotionKind::pull_out: return "pulls out";
        case MotionKind::truck_left: return "trucks left";
        case MotionKind::truck_right: return "trucks right";
        case MotionKind::pedestal_up: return "pedestals up";
        case MotionKind::pedestal_down: return "pedestals down";
        case MotionKind::pan_left: return "pans left";
        case MotionKind::pan_right: return "pans right";
        case MotionKind::tilt_up: return "tilts up";
        case MotionKind::tilt_down: return "tilts down";
        case MotionKind::static_cam: return "holds still";
        default: return "moves";
    }
}

std::string focus_suffix(const scene::SceneSpec& spec) {
    if (spec.moving_objects.empty()) return "";
    return ", focusing on " + scene::moving_prose(spec.moving_objects[0].kind);
}

std::string object_name(const scene::SceneSpec& spec, int index) {
    return scene::to_string(spec.moving_objects[static_cast<size_t>(index)].kind);
}

}  // namespace

std::string camera_clause(const TimedTrajectory& traj, const scene::SceneSpec& spec) {
    switch (traj.kind) {
        case MotionKind::static_cam:
            return "";
        case MotionKind::composed: {
            const MotionKind first = motion_kind_from_string(traj.params.at("first"));
            const MotionKind second = motion_kind_from_string(traj.params.at("second"));
            return "The camera " + verb_phrase(first) + focus_suffix(spec) +
                   ". Then the camera " + verb_phrase(second) + ".";
        }
        case MotionKind::seek_then_focus: {
            const int idx = traj.params.at("target");
            return "The camera pans around, searching for a " + object_name(spec, idx) +
                   ", then locks focus and pushes in upon finding it.";
        }
        case MotionKind::switch_focus: {
            const int a = traj.params.at("from");
            const int b = traj.params.at("to");
            return "The camera switches focus from the " + object_name(spec, a) + " to the " +
                   object_name(spec, b) + ".";
        }
        case MotionKind::orbit:
            return "The camera orbits around the scene.";
        case MotionKind::handheld_shake: {
            const MotionKind base = motion_kind_from_string(traj.params.at("base"));
            if (base == MotionKind::static_cam) return "The camera shakes as if held by hand.";
            return "The camera " + verb_phrase(base) + " with a handheld shake.";
        }
        case MotionKind::dolly_zoom:
            return "The camera performs a dolly zoom" +
                   (spec.moving_objects.empty()
                        ? std::string(".")
                        : ", keeping the " + object_name(spec, 0) + " at a constant size.");
        case MotionKind::explosive_shake:
            return "The camera shakes violently as if hit by an explosion.";
        case MotionKind::roll_rotation: {
            const double deg = traj.params.at("degrees");
            return "The camera rotates " + std::to_string(static_cast<int>(deg)) +
                   " degrees around its view axis.";
        }
        default:
            return "The camera " + verb_phrase(traj.kind) + focus_suffix(spec) + ".";
    }
}

std::string describe(const TimedTrajectory& traj, const scene::SceneSpec& spec) {
    const std::string clause = camera_clause(traj, spec);
    if (clause.empty()) return "";
    return "Camera: " + clause;
}

void save_jsonl(const TimedTrajectory& traj, std::ostream& out) {
    nlohmann::json header{{"kind", to_string(traj.kind)},
                          {"params", traj.params},
                          {"seed", traj.seed},
                          {"fps", traj.fps}};
    out << header.dump() << "\n";
    for (const auto& f : traj.frames) out << geom::pose_record_to_json(f.pose, f.intr).dump() << "\n";
}

TimedTrajectory load_jsonl(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trajectory jsonl: empty stream");
    const nlohmann::json header = nlohmann::json::parse(line);

    TimedTrajectory traj;
    traj.kind = motion_kind_from_string(header.at("kind"));
    traj.params = header.at("params");
    traj.seed = header.at("seed");
    traj.fps = header.at("fps");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto [pose, intr] = geom::pose_record_from_json(nlohmann::json::parse(line));
        traj.frames.push_back({pose, intr});
    }
    if (traj.frames.empty()) throw std::runtime_error("trajectory jsonl: no frames");
    return traj;
}

void save_jsonl_file(const TimedTrajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save_jsonl(traj, out);
}

TimedTrajectory load_jsonl_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return load_jsonl(in);
}

}  // namespace camforge::traj
