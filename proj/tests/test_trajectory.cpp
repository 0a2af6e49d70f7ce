#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "camforge/trajectory.hpp"

#include <cmath>
#include <sstream>

using namespace camforge;
using geom::CameraPose;
using geom::Intrinsics;
using geom::Vec3;
using traj::MotionKind;
using traj::TimedTrajectory;

namespace {

const Intrinsics kIntr{110.0, 64.0, 48.0, 128, 96};

CameraPose start_pose() {
    return geom::look_at(Vec3(0, 2, 8), Vec3(0, 0.5, 0), Vec3(0, 1, 0));
}

bool poses_equal(const CameraPose& a, const CameraPose& b, double tol = 0.0) {
    return (a.R - b.R).cwiseAbs().maxCoeff() <= tol && (a.t - b.t).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

TEST_CASE("push_in displaces the center by speed * T along the initial forward axis") {
    const CameraPose start = start_pose();
    const double speed = 0.8, fps = 10.0;
    const int K = 21;
    const TimedTrajectory t = traj::make_simple(MotionKind::push_in, start, kIntr, speed, K, fps);
    REQUIRE(t.size() == K);
    const double duration = (K - 1) / fps;
    const Vec3 expected = start.center() + speed * duration * start.forward();
    CHECK((t.frames.back().pose.center() - expected).norm() < 1e-9);
    CHECK(poses_equal(t.frames[0].pose, start));
}

TEST_CASE("truck keeps the rotation constant on every frame") {
    const CameraPose start = start_pose();
    const TimedTrajectory t =
        traj::make_simple(MotionKind::truck_left, start, kIntr, 1.0, 13, 12.0);
    for (const auto& f : t.frames) CHECK((f.pose.R - start.R).cwiseAbs().maxCoeff() == 0.0);
    // Moves along the camera's left.
    const Vec3 d = t.frames.back().pose.center() - start.center();
    CHECK(d.normalized().dot(-start.right()) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pan rotates at constant angular speed about the up axis, center fixed") {
    const CameraPose start = start_pose();
    const double speed_deg = 30.0, fps = 10.0;
    const TimedTrajectory t =
        traj::make_simple(MotionKind::pan_left, start, kIntr, speed_deg, 11, fps);
    for (int k = 0; k < t.size(); ++k) {
        CHECK((t.frames[static_cast<size_t>(k)].pose.center() - start.center()).norm() < 1e-9);
        const double angle =
            geom::rotation_angle(t.frames[static_cast<size_t>(k)].pose.R, start.R);
        CHECK(angle == doctest::Approx(speed_deg * M_PI / 180.0 * k / fps).epsilon(1e-9));
    }
    // Pan left swings the forward axis toward the camera's left.
    CHECK(t.frames.back().pose.forward().dot(-start.right()) > 0.0);
}

TEST_CASE("make_simple rejects non-simple kinds") {
    CHECK_THROWS_AS(traj::make_simple(MotionKind::orbit, start_pose(), kIntr, 1.0, 10, 12.0),
                    traj::WrongKind);
}

TEST_CASE("compose splits 49 frames into 25 + 24 and matches the standalone first half") {
    const CameraPose start = start_pose();
    const int K = 49;
    const TimedTrajectory composed = traj::compose({MotionKind::push_in, 1.0},
                                                   {MotionKind::truck_left, 1.0}, start, kIntr,
                                                   K, 12.0);
    REQUIRE(composed.size() == K);

    const TimedTrajectory standalone =
        traj::make_simple(MotionKind::push_in, start, kIntr, 1.0, 25, 12.0);
    for (int k = 0; k < 25; ++k)
        CHECK(poses_equal(composed.frames[static_cast<size_t>(k)].pose,
                          standalone.frames[static_cast<size_t>(k)].pose));

    // Second half: truck preserves the handoff rotation.
    const auto& handoff = composed.frames[24].pose;
    for (int k = 24; k < K; ++k)
        CHECK((composed.frames[static_cast<size_t>(k)].pose.R - handoff.R).cwiseAbs().maxCoeff() ==
              0.0);
}

TEST_CASE("compose with a static second half holds the handoff pose") {
    const CameraPose start = start_pose();
    const TimedTrajectory t = traj::compose({MotionKind::push_in, 1.0},
                                            {MotionKind::static_cam, 0.0}, start, kIntr, 9, 12.0);
    const auto& handoff = t.frames[4].pose;
    for (int k = 4; k < t.size(); ++k)
        CHECK(poses_equal(t.frames[static_cast<size_t>(k)].pose, handoff));
}

TEST_CASE("orbit keeps the slant distance and aims at the center") {
    const Vec3 center(1, 0.5, -2);
    const double radius = 6.0, height = 3.0;
    const int K = 49;
    const TimedTrajectory t = traj::orbit(center, radius, height, 360.0, kIntr, K, 12.0);
    const double slant = std::hypot(radius, height);
    for (const auto& f : t.frames) {
        CHECK(std::abs((f.pose.center() - center).norm() - slant) < 1e-9);
        const Vec3 to_center = (center - f.pose.center()).normalized();
        const double aim = std::acos(std::clamp(f.pose.forward().dot(to_center), -1.0, 1.0));
        CHECK(aim < 1e-6);
    }
    // Quarter index of a 360 degree sweep is 90 degrees of azimuth.
    const Vec3 start_xz = (t.frames[0].pose.center() - center);
    const Vec3 quarter_xz = (t.frames[12].pose.center() - center);
    const double az = std::atan2(quarter_xz.z(), quarter_xz.x()) -
                      std::atan2(start_xz.z(), start_xz.x());
    CHECK(std::abs(std::remainder(az, 2 * M_PI)) == doctest::Approx(M_PI / 2).epsilon(1e-9));
}

TEST_CASE("dolly_zoom compensation law") {
    const Vec3 target(0, 0.5, 0);
    Intrinsics intr = kIntr;
    intr.f_px = 400.0;

    SUBCASE("d1 == d0 keeps the focal length constant") {
        const TimedTrajectory t = traj::dolly_zoom(target, intr, 4.0, 4.0, 25, 12.0);
        for (const auto& f : t.frames) CHECK(f.intr.f_px == doctest::Approx(400.0));
    }

    SUBCASE("f(t)/d(t) is constant so projected width is preserved") {
        const TimedTrajectory t = traj::dolly_zoom(target, intr, 4.0, 2.0, 25, 12.0);
        const double ratio0 = t.frames[0].intr.f_px / (t.frames[0].pose.center() - target).norm();
        for (const auto& f : t.frames) {
            const double ratio = f.intr.f_px / (f.pose.center() - target).norm();
            CHECK(ratio == doctest::Approx(ratio0).epsilon(1e-9));
        }
        // Intrinsics genuinely vary for this kind.
        CHECK(t.frames.front().intr.f_px != t.frames.back().intr.f_px);
    }
}

TEST_CASE("handheld_shake determinism and exact amplitude rescaling") {
    const TimedTrajectory base =
        traj::static_trajectory(start_pose(), kIntr, 33, 12.0);

    SUBCASE("zero amplitudes return the base bit-exactly") {
        const TimedTrajectory t = traj::handheld_shake(base, 0.0, 0.0, 0.8, 5);
        for (int k = 0; k < t.size(); ++k)
            CHECK(poses_equal(t.frames[static_cast<size_t>(k)].pose,
                              base.frames[static_cast<size_t>(k)].pose));
    }

    SUBCASE("same seed twice gives the identical trajectory") {
        const TimedTrajectory a = traj::handheld_shake(base, 2.0, 0.1, 0.8, 42);
        const TimedTrajectory b = traj::handheld_shake(base, 2.0, 0.1, 0.8, 42);
        for (int k = 0; k < a.size(); ++k)
            CHECK(poses_equal(a.frames[static_cast<size_t>(k)].pose,
                              b.frames[static_cast<size_t>(k)].pose));
        const TimedTrajectory c = traj::handheld_shake(base, 2.0, 0.1, 0.8, 43);
        bool any_diff = false;
        for (int k = 0; k < a.size(); ++k)
            any_diff |= !poses_equal(a.frames[static_cast<size_t>(k)].pose,
                                     c.frames[static_cast<size_t>(k)].pose);
        CHECK(any_diff);
    }

    SUBCASE("max angular deviation equals the requested amplitude") {
        const double amp_deg = 2.5, amp_trans = 0.2;
        const TimedTrajectory t = traj::handheld_shake(base, amp_deg, amp_trans, 0.7, 9);
        double max_rot = 0, max_trans = 0;
        for (int k = 0; k < t.size(); ++k) {
            max_rot = std::max(max_rot,
                               geom::rotation_angle(t.frames[static_cast<size_t>(k)].pose.R,
                                                    base.frames[static_cast<size_t>(k)].pose.R));
            max_trans = std::max(max_trans,
                                 (t.frames[static_cast<size_t>(k)].pose.center() -
                                  base.frames[static_cast<size_t>(k)].pose.center())
                                     .norm());
        }
        CHECK(std::abs(max_rot - amp_deg * M_PI / 180.0) < 1e-9);
        CHECK(std::abs(max_trans - amp_trans) < 1e-9);
    }
}

TEST_CASE("explosive_shake envelope and untouched prefix") {
    const TimedTrajectory base = traj::static_trajectory(start_pose(), kIntr, 41, 12.0);
    const int t0 = 10;
    const double amp = 3.0, omega = M_PI / 2, decay = 0.2;
    const TimedTrajectory t = traj::explosive_shake(base, t0, amp, omega, decay, 3);

    for (int k = 0; k < t0; ++k)
        CHECK(poses_equal(t.frames[static_cast<size_t>(k)].pose,
                          base.frames[static_cast<size_t>(k)].pose));

    // omega = pi/2: |sin| peaks at odd offsets; envelope strictly decays.
    std::vector<double> peaks;
    for (int k = t0 + 1; k < t.size(); k += 2)
        peaks.push_back(geom::rotation_angle(t.frames[static_cast<size_t>(k)].pose.R,
                                             base.frames[static_cast<size_t>(k)].pose.R));
    for (size_t i = 1; i < peaks.size(); ++i) CHECK(peaks[i] < peaks[i - 1]);

    // Deviation magnitude matches the formula.
    const int k = t0 + 1;
    const double expected = amp * M_PI / 180.0 * std::exp(-decay * 1.0) * std::sin(omega * 1.0);
    CHECK(std::abs(geom::rotation_angle(t.frames[static_cast<size_t>(k)].pose.R, base.frames[0].pose.R) -
                   std::abs(expected)) < 1e-9);

    const TimedTrajectory zero = traj::explosive_shake(base, t0, 0.0, omega, decay, 3);
    for (int i = 0; i < zero.size(); ++i)
        CHECK(poses_equal(zero.frames[static_cast<size_t>(i)].pose,
                          base.frames[static_cast<size_t>(i)].pose));
}

namespace {

scene::SceneSpec two_object_scene() {
    scene::SceneSpec spec;
    scene::MovingObject a;
    a.kind = scene::MovingKind::sphere;
    a.start = Vec3(3, 0, -2);
    a.scale = 1.0;
    scene::MovingObject b;
    b.kind = scene::MovingKind::cube;
    b.start = Vec3(-4, 0, 1);
    b.scale = 1.0;
    spec.moving_objects = {a, b};
    return spec;
}

}  // namespace

TEST_CASE("seek_then_focus ends aimed at the target") {
    const scene::SceneSpec spec = two_object_scene();
    const CameraPose start = geom::look_at(Vec3(0, 2, 10), Vec3(0, 1, 0), Vec3(0, 1, 0));
    const int K = 49, lock = 29;
    const TimedTrajectory t =
        traj::seek_then_focus(spec, 0, 25.0, 2, lock, 0.6, start, kIntr, K, 12.0);
    REQUIRE(t.size() == K);

    const Vec3 target = traj::object_focus_point(spec, 0);
    const auto& last = t.frames.back().pose;
    const double aim = std::acos(std::clamp(
        last.forward().dot((target - last.center()).normalized()), -1.0, 1.0));
    CHECK(aim < 0.5 * M_PI / 180.0);

    // Phase-1 yaw alternates sign across sweep extrema: the first extremum
    // of n sweeps over `lock` frames sits near lock/(4n).
    const int quarter = lock / (4 * 2);
    const Vec3 f0 = start.forward();
    const auto yaw_sign = [&](int k) {
        const Vec3 f = t.frames[static_cast<size_t>(k)].pose.forward();
        return f.cross(f0).dot(start.up()) > 0 ? 1 : -1;
    };
    CHECK(yaw_sign(quarter) != yaw_sign(3 * quarter));

    CHECK_THROWS_AS(
        traj::seek_then_focus(spec, 7, 25.0, 2, lock, 0.6, start, kIntr, K, 12.0),
        traj::UnknownTarget);
}

TEST_CASE("seek_then_focus with push_ratio 1 keeps the distance") {
    const scene::SceneSpec spec = two_object_scene();
    const CameraPose start = geom::look_at(Vec3(0, 2, 10), Vec3(0, 1, 0), Vec3(0, 1, 0));
    const TimedTrajectory t =
        traj::seek_then_focus(spec, 0, 20.0, 2, 20, 1.0, start, kIntr, 33, 12.0);
    const Vec3 target = traj::object_focus_point(spec, 0);
    const double d0 = (start.center() - target).norm();
    CHECK(std::abs((t.frames.back().pose.center() - target).norm() - d0) < 1e-9);
}

TEST_CASE("switch_focus thirds aim exactly, and a == b is constant") {
    const scene::SceneSpec spec = two_object_scene();
    const Vec3 cam(0, 3, 12);
    const int K = 30;
    const TimedTrajectory t = traj::switch_focus(spec, 0, 1, cam, kIntr, K, 12.0);
    const Vec3 pa = traj::object_focus_point(spec, 0);
    const Vec3 pb = traj::object_focus_point(spec, 1);

    for (int k = 0; k < K / 3; ++k) {
        const auto& f = t.frames[static_cast<size_t>(k)].pose;
        CHECK(std::acos(std::clamp(f.forward().dot((pa - cam).normalized()), -1.0, 1.0)) < 1e-6);
    }
    for (int k = 2 * K / 3; k < K; ++k) {
        const auto& f = t.frames[static_cast<size_t>(k)].pose;
        CHECK(std::acos(std::clamp(f.forward().dot((pb - cam).normalized()), -1.0, 1.0)) < 1e-6);
    }
    for (const auto& f : t.frames) CHECK((f.pose.center() - cam).norm() < 1e-9);

    const TimedTrajectory same = traj::switch_focus(spec, 0, 0, cam, kIntr, K, 12.0);
    for (const auto& f : same.frames)
        CHECK((f.pose.R - same.frames[0].pose.R).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(traj::switch_focus(spec, 0, 9, cam, kIntr, K, 12.0), traj::UnknownTarget);
}

TEST_CASE("roll_rotation flips the up vector at 180 and is linear") {
    const CameraPose start = start_pose();
    const TimedTrajectory t180 = traj::roll_rotation(start, 180.0, kIntr, 31, 12.0);
    CHECK((t180.frames.back().pose.up() + start.up()).norm() < 1e-9);

    const TimedTrajectory t90 = traj::roll_rotation(start, 90.0, kIntr, 31, 12.0);
    const double mid = geom::rotation_angle(t90.frames[15].pose.R, start.R);
    CHECK(mid == doctest::Approx(M_PI / 4).epsilon(1e-9));
    for (const auto& f : t90.frames) CHECK((f.pose.center() - start.center()).norm() < 1e-9);

    CHECK_THROWS_AS(traj::roll_rotation(start, 0.0, kIntr, 31, 12.0), traj::BadAngle);
    CHECK_THROWS_AS(traj::roll_rotation(start, 45.0, kIntr, 31, 12.0), traj::BadAngle);
}

TEST_CASE("static_trajectory holds one pose and describes to an empty clause") {
    const CameraPose pose = start_pose();
    const TimedTrajectory t = traj::static_trajectory(pose, kIntr, 17, 12.0);
    for (const auto& f : t.frames) CHECK(poses_equal(f.pose, pose));
    for (int k = 0; k < t.size(); ++k) {
        const auto rel = geom::relative_pose(t.frames[0].pose, t.frames[static_cast<size_t>(k)].pose);
        CHECK((rel.R - geom::Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(rel.t.norm() < 1e-12);
    }
    CHECK(traj::describe(t, scene::SceneSpec{}) == "");
}

TEST_CASE("describe matches the composite prompt template") {
    scene::SceneSpec spec;
    spec.floor = scene::FloorTexture::black_sand;
    scene::MovingObject sphere;
    sphere.kind = scene::MovingKind::sphere;
    spec.moving_objects.push_back(sphere);

    const TimedTrajectory composed =
        traj::compose({MotionKind::push_in, 1.0}, {MotionKind::truck_left, 1.0}, start_pose(),
                      kIntr, 49, 12.0);
    CHECK(traj::describe(composed, spec) ==
          "Camera: The camera pushes forward, focusing on a moving sphere. "
          "Then the camera trucks left.");
    CHECK(traj::describe(composed, spec) == traj::describe(composed, spec));

    const TimedTrajectory seek =
        traj::seek_then_focus(spec, 0, 25.0, 2, 29, 0.6,
                              geom::look_at(Vec3(0, 2, 10), Vec3(0, 1, 0), Vec3(0, 1, 0)),
                              kIntr, 49, 12.0);
    CHECK(traj::describe(seek, spec).rfind("Camera: The camera pans around, searching for a "
                                           "sphere",
                                           0) == 0);
}

TEST_CASE("intrinsics are constant across frames except for dolly zoom") {
    const CameraPose start = start_pose();
    for (const MotionKind kind :
         {MotionKind::push_in, MotionKind::pan_right, MotionKind::pedestal_up}) {
        const TimedTrajectory t = traj::make_simple(kind, start, kIntr, 1.0, 15, 12.0);
        for (const auto& f : t.frames) CHECK(f.intr == kIntr);
    }
}

TEST_CASE("trajectory jsonl round trip") {
    const TimedTrajectory t = traj::compose({MotionKind::pull_out, 0.7},
                                            {MotionKind::truck_right, 1.1}, start_pose(), kIntr,
                                            21, 10.0);
    std::stringstream ss;
    traj::save_jsonl(t, ss);
    const TimedTrajectory back = traj::load_jsonl(ss);
    REQUIRE(back.size() == t.size());
    CHECK(back.kind == t.kind);
    CHECK(back.fps == t.fps);
    for (int k = 0; k < t.size(); ++k) {
        CHECK(poses_equal(back.frames[static_cast<size_t>(k)].pose,
                          t.frames[static_cast<size_t>(k)].pose));
        CHECK(back.frames[static_cast<size_t>(k)].intr == t.frames[static_cast<size_t>(k)].intr);
    }
}

TEST_CASE("all trajectory poses are orthonormal") {
    const CameraPose start = start_pose();
    const scene::SceneSpec spec = two_object_scene();
    std::vector<TimedTrajectory> all;
    all.push_back(traj::make_simple(MotionKind::tilt_down, start, kIntr, 12.0, 15, 12.0));
    all.push_back(traj::orbit(Vec3(0, 0, 0), 5.0, 2.0, 270.0, kIntr, 15, 12.0));
    all.push_back(traj::dolly_zoom(Vec3(0, 0.5, 0), kIntr, 5.0, 2.5, 15, 12.0));
    all.push_back(traj::handheld_shake(traj::static_trajectory(start, kIntr, 15, 12.0), 2.0,
                                       0.1, 0.8, 1));
    all.push_back(traj::explosive_shake(traj::static_trajectory(start, kIntr, 15, 12.0), 3, 4.0,
                                        1.0, 0.1, 2));
    all.push_back(traj::switch_focus(spec, 0, 1, Vec3(0, 3, 12), kIntr, 15, 12.0));
    for (const auto& t : all)
        for (const auto& f : t.frames) CHECK(f.pose.is_valid());
}
