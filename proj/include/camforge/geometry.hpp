#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <stdexcept>
#include <vector>

namespace camforge::geom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Conventions used everywhere in this project:
//   * World frame is right-handed, +y up.
//   * CameraPose stores world->camera extrinsics: x_cam = R * x_world + t.
//   * Camera frame axes: +x right, +y up, +z backward; the viewing
//     direction is -z. A camera at rest (R = I, t = 0) looks down world -z.
//   * Image coordinates: u right, v down, origin at the top-left pixel.
//     Projection depth is the distance along the viewing axis, -z_cam.

struct DegenerateFrame : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BehindCamera : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotARotation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CameraPose {
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();

    bool is_valid(double tol = 1e-9) const;

    Vec3 center() const { return -R.transpose() * t; }
    // Camera axes expressed in the world frame.
    Vec3 right() const { return R.transpose() * Vec3(1, 0, 0); }
    Vec3 up() const { return R.transpose() * Vec3(0, 1, 0); }
    Vec3 forward() const { return R.transpose() * Vec3(0, 0, -1); }

    static CameraPose from_center(const Mat3& R, const Vec3& center) {
        return CameraPose{R, -R * center};
    }
};

struct Intrinsics {
    double f_px = 100.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    bool is_valid() const {
        return f_px > 0 && width > 0 && height > 0 && cx >= 0 && cx < width && cy >= 0 &&
               cy < height;
    }
    bool operator==(const Intrinsics&) const = default;
};

// Per-pixel 6-channel (direction, moment) map, row-major, pixel-center rays.
struct PluckerImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // height*width*6, [dx dy dz mx my mz]

    const double* at(int x, int y) const { return data.data() + 6 * (y * width + x); }
    double* at(int x, int y) { return data.data() + 6 * (y * width + x); }
};

CameraPose look_at(const Vec3& eye, const Vec3& target, const Vec3& up);

// Transform taking a's camera frame to b's camera frame: x_b = R x_a + t.
CameraPose relative_pose(const CameraPose& a, const CameraPose& b);

// Pinhole projection of a world point; throws BehindCamera when the
// projection depth (-z_cam) is <= 0.
Eigen::Vector2d project(const Intrinsics& intr, const CameraPose& pose, const Vec3& point);

PluckerImage plucker_map(const Intrinsics& intr, const CameraPose& pose);

// Geodesic distance between two rotations, radians in [0, pi].
double rotation_angle(const Mat3& Ra, const Mat3& Rb);

// Slerp on rotations, lerp on camera centers. s=0 and s=1 return the inputs
// verbatim. Antipodal rotations take the branch through the quaternion with
// non-negative scalar part.
CameraPose interpolate_pose(const CameraPose& a, const CameraPose& b, double s);

// One JSON object per frame: R (9 row-major), t (3), f_px, cx, cy, w, h.
nlohmann::json pose_record_to_json(const CameraPose& pose, const Intrinsics& intr);
std::pair<CameraPose, Intrinsics> pose_record_from_json(const nlohmann::json& j);

}  // namespace camforge::geom
