#include "camforge/geometry.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace camforge::geom {

namespace {

bool orthonormal(const Mat3& R, double tol) {
    const Mat3 err = R.transpose() * R - Mat3::Identity();
    return err.cwiseAbs().maxCoeff() < tol && R.determinant() > 0.0;
}

}  // namespace

bool CameraPose::is_valid(double tol) const {
    if (!R.allFinite() || !t.allFinite()) return false;
    return orthonormal(R, tol);
}

CameraPose look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
    const Vec3 view = target - eye;
    if (view.norm() < 1e-12) throw DegenerateFrame("look_at: eye equals target");
    const Vec3 back = -view.normalized();
    Vec3 right = up.cross(back);
    const double rn = right.norm();
    if (rn < 1e-9) throw DegenerateFrame("look_at: up is parallel to the view direction");
    right /= rn;
    const Vec3 cam_up = back.cross(right);

    Mat3 R;
    R.row(0) = right.transpose();
    R.row(1) = cam_up.transpose();
    R.row(2) = back.transpose();
    return CameraPose{R, -R * eye};
}

CameraPose relative_pose(const CameraPose& a, const CameraPose& b) {
    const Mat3 R = b.R * a.R.transpose();
    return CameraPose{R, b.t - R * a.t};
}

Eigen::Vector2d project(const Intrinsics& intr, const CameraPose& pose, const Vec3& point) {
    const Vec3 pc = pose.R * point + pose.t;
    const double depth = -pc.z();
    if (depth <= 0.0) throw BehindCamera("project: point has non-positive depth");
    return {intr.cx + intr.f_px * pc.x() / depth, intr.cy - intr.f_px * pc.y() / depth};
}

PluckerImage plucker_map(const Intrinsics& intr, const CameraPose& pose) {
    PluckerImage img;
    img.width = intr.width;
    img.height = intr.height;
    img.data.resize(static_cast<size_t>(intr.width) * intr.height * 6);

    const Mat3 Rt = pose.R.transpose();
    const Vec3 origin = pose.center();
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            // Pixel-center ray in the camera frame; v grows downward, so the
            // camera-frame y component flips sign.
            const double xc = (x + 0.5 - intr.cx) / intr.f_px;
            const double yc = -(y + 0.5 - intr.cy) / intr.f_px;
            const Vec3 d = (Rt * Vec3(xc, yc, -1.0)).normalized();
            const Vec3 m = origin.cross(d);
            double* px = img.at(x, y);
            px[0] = d.x();
            px[1] = d.y();
            px[2] = d.z();
            px[3] = m.x();
            px[4] = m.y();
            px[5] = m.z();
        }
    }
    return img;
}

double rotation_angle(const Mat3& Ra, const Mat3& Rb) {
    if (!orthonormal(Ra, 1e-8) || !orthonormal(Rb, 1e-8))
        throw NotARotation("rotation_angle: input is not a rotation matrix");
    const Mat3 M = Ra * Rb.transpose();
    // atan2 form of acos((tr-1)/2): identical in exact arithmetic, well
    // conditioned near 0 and pi.
    const double c = (M.trace() - 1.0) / 2.0;
    const Vec3 skew(M(2, 1) - M(1, 2), M(0, 2) - M(2, 0), M(1, 0) - M(0, 1));
    return std::atan2(skew.norm() / 2.0, std::clamp(c, -1.0, 1.0));
}

CameraPose interpolate_pose(const CameraPose& a, const CameraPose& b, double s) {
    if (s < 0.0 || s > 1.0) throw OutOfRange("interpolate_pose: s outside [0,1]");
    if (s == 0.0) return a;
    if (s == 1.0) return b;

    Eigen::Quaterniond qa(a.R);
    Eigen::Quaterniond qb(b.R);
    qa.normalize();
    qb.normalize();
    double dot = qa.dot(qb);
    if (dot < 0.0) {
        qb.coeffs() = -qb.coeffs();
        dot = -dot;
    }
    // Antipodal tie-break: both arcs are equal length, pick the endpoint
    // representative with non-negative scalar part (flip again if needed).
    if (dot < 1e-12 && qb.w() < 0.0) qb.coeffs() = -qb.coeffs();

    const Vec3 c = (1.0 - s) * a.center() + s * b.center();
    // Identical rotations skip the quaternion round trip entirely.
    if ((qa.coeffs() - qb.coeffs()).cwiseAbs().maxCoeff() == 0.0)
        return CameraPose::from_center(a.R, c);

    Eigen::Quaterniond q;
    if (dot > 1.0 - 1e-12) {
        q.coeffs() = (1.0 - s) * qa.coeffs() + s * qb.coeffs();
        q.normalize();
    } else {
        const double theta = std::acos(std::clamp(dot, -1.0, 1.0));
        const double sin_theta = std::sin(theta);
        const double wa = std::sin((1.0 - s) * theta) / sin_theta;
        const double wb = std::sin(s * theta) / sin_theta;
        q.coeffs() = wa * qa.coeffs() + wb * qb.coeffs();
        q.normalize();
    }
    return CameraPose::from_center(q.toRotationMatrix(), c);
}

nlohmann::json pose_record_to_json(const CameraPose& pose, const Intrinsics& intr) {
    std::vector<double> r(9);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[static_cast<size_t>(i) * 3 + j] = pose.R(i, j);
    return nlohmann::json{{"R", r},
                          {"t", {pose.t.x(), pose.t.y(), pose.t.z()}},
                          {"f_px", intr.f_px},
                          {"cx", intr.cx},
                          {"cy", intr.cy},
                          {"w", intr.width},
                          {"h", intr.height}};
}

std::pair<CameraPose, Intrinsics> pose_record_from_json(const nlohmann::json& j) {
    CameraPose pose;
    const auto& r = j.at("R");
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) pose.R(i, k) = r.at(static_cast<size_t>(i) * 3 + k);
    const auto& t = j.at("t");
    pose.t = Vec3(t.at(0), t.at(1), t.at(2));
    Intrinsics intr;
    intr.f_px = j.at("f_px");
    intr.cx = j.at("cx");
    intr.cy = j.at("cy");
    intr.width = j.at("w");
    intr.height = j.at("h");
    return {pose, intr};
}

}  // namespace camforge::geom
