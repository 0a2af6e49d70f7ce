#include "camforge/metrics.hpp"

#include <cmath>

namespace camforge::metrics {

namespace {

constexpr double kStatsEpsilon = 1e-6;

struct RebasedFrames {
    std::vector<geom::Mat3> R;
    std::vector<geom::Vec3> t;
};

RebasedFrames rebase(const traj::TimedTrajectory& traj) {
    RebasedFrames out;
    const auto& frames = traj.frames;
    out.R.reserve(frames.size());
    out.t.reserve(frames.size());
    for (const auto& f : frames) {
        const geom::CameraPose rel = geom::relative_pose(frames[0].pose, f.pose);
        out.R.push_back(rel.R);
        out.t.push_back(rel.t);
    }
    return out;
}

void check_lengths(const traj::TimedTrajectory& gt, const traj::TimedTrajectory& est) {
    if (gt.size() != est.size())
        throw LengthMismatch("trajectory metrics: frame counts differ");
    if (gt.size() < 2) throw LengthMismatch("trajectory metrics: need K >= 2");
}

}  // namespace

TrajectoryError trajectory_error(const traj::TimedTrajectory& gt,
                                 const traj::TimedTrajectory& est) {
    check_lengths(gt, est);
    const RebasedFrames g = rebase(gt);
    const RebasedFrames e = rebase(est);
    const size_t K = g.R.size();

    double max_norm = 0.0;
    for (size_t k = 0; k < K; ++k) max_norm = std::max(max_norm, g.t[k].norm());
    const double scale = max_norm > 0.0 ? 1.0 / max_norm : 1.0;

    TrajectoryError err;
    for (size_t k = 1; k < K; ++k) {
        err.per_frame_trans.push_back((scale * e.t[k] - scale * g.t[k]).norm());
        err.per_frame_rot.push_back(geom::rotation_angle(e.R[k], g.R[k]) * 180.0 / M_PI);
    }
    for (const double v : err.per_frame_trans) err.trans_err += v;
    for (const double v : err.per_frame_rot) err.rot_err += v;
    err.trans_err /= static_cast<double>(K - 1);
    err.rot_err /= static_cast<double>(K - 1);
    return err;
}

double trans_err(const traj::TimedTrajectory& gt, const traj::TimedTrajectory& est) {
    return trajectory_error(gt, est).trans_err;
}

double rot_err(const traj::TimedTrajectory& gt, const traj::TimedTrajectory& est) {
    return trajectory_error(gt, est).rot_err;
}

double flow_loss(const render::VideoTensor& pred, const render::VideoTensor& gt) {
    if (pred.frames != gt.frames || pred.height != gt.height || pred.width != gt.width ||
        pred.channels != gt.channels)
        throw ShapeMismatch("flow_loss: video shapes differ");
    if (pred.frames < 2) throw DegenerateLength("flow_loss: need at least 2 frames");

    const size_t stride = pred.pixels_per_frame();
    double total = 0.0;
    for (int k = 0; k + 1 < pred.frames; ++k) {
        const float* p0 = pred.data.data() + static_cast<size_t>(k) * stride;
        const float* p1 = p0 + stride;
        const float* g0 = gt.data.data() + static_cast<size_t>(k) * stride;
        const float* g1 = g0 + stride;
        double gap_sum = 0.0;
        for (size_t i = 0; i < stride; ++i) {
            const double dp = static_cast<double>(p1[i]) - static_cast<double>(p0[i]);
            const double dg = static_cast<double>(g1[i]) - static_cast<double>(g0[i]);
            gap_sum += std::abs(dp - dg);
        }
        total += gap_sum / static_cast<double>(stride);
    }
    return total / static_cast<double>(pred.frames - 1);
}

ChannelStats compute_stats(const render::VideoTensor& video) {
    return pooled_stats({video});
}

ChannelStats pooled_stats(const std::vector<render::VideoTensor>& videos) {
    ChannelStats stats;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
    double n = 0.0;
    for (const auto& v : videos) {
        if (v.channels != 3) throw ShapeMismatch("channel stats: expected 3 channels");
        for (size_t i = 0; i < v.data.size(); i += 3) {
            const Eigen::Vector3d px(v.data[i], v.data[i + 1], v.data[i + 2]);
            sum += px;
            outer += px * px.transpose();
            n += 1.0;
        }
    }
    if (n == 0.0) throw ShapeMismatch("channel stats: empty video");
    stats.mean = sum / n;
    stats.cov = outer / n - stats.mean * stats.mean.transpose();
    return stats;
}

double style_score(const ChannelStats& stats, const ChannelStats& ref) {
    const Eigen::Matrix3d reg = ref.cov + kStatsEpsilon * Eigen::Matrix3d::Identity();
    const Eigen::Vector3d dmu = stats.mean - ref.mean;
    const double mahal = dmu.dot(reg.ldlt().solve(dmu));
    const double cov_term =
        (stats.cov - ref.cov).squaredNorm() / (ref.cov.squaredNorm() + kStatsEpsilon);
    return std::sqrt(mahal + cov_term);
}

double style_score(const render::VideoTensor& video, const ChannelStats& ref) {
    return style_score(compute_stats(video), ref);
}

namespace {

// Mean absolute difference between frame k and frame k+1 shifted by (sx, sy)
// with toroidal wrap; matches the wrap semantics of the pattern corpora and
// stays a usable proxy for rendered footage.
double wrapped_sad(const render::VideoTensor& v, int k, int sx, int sy) {
    double sum = 0.0;
    for (int y = 0; y < v.height; ++y) {
        const int ys = ((y + sy) % v.height + v.height) % v.height;
        for (int x = 0; x < v.width; ++x) {
            const int xs = ((x + sx) % v.width + v.width) % v.width;
            for (int c = 0; c < v.channels; ++c)
                sum += std::abs(static_cast<double>(v.at(k + 1, ys, xs, c)) -
                                static_cast<double>(v.at(k, y, x, c)));
        }
    }
    return sum;
}

}  // namespace

std::vector<Eigen::Vector2i> estimate_displacements(const render::VideoTensor& video,
                                                    int max_shift) {
    std::vector<Eigen::Vector2i> est;
    for (int k = 0; k + 1 < video.frames; ++k) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Vector2i best_shift(0, 0);
        // Scan small shifts first so ties resolve toward the smallest motion.
        for (int radius = 0; radius <= max_shift; ++radius) {
            for (int sy = -radius; sy <= radius; ++sy) {
                for (int sx = -radius; sx <= radius; ++sx) {
                    if (std::max(std::abs(sx), std::abs(sy)) != radius) continue;
                    const double sad = wrapped_sad(video, k, sx, sy);
                    if (sad < best) {
                        best = sad;
                        best_shift = {sx, sy};
                    }
                }
            }
        }
        est.push_back(best_shift);
    }
    return est;
}

MotionCorrelation motion_correlation(const render::VideoTensor& video,
                                     const std::vector<Eigen::Vector2d>& target_disp,
                                     int max_shift) {
    if (video.frames < 3) throw ShapeMismatch("motion_correlation: need K >= 3");
    if (static_cast<int>(target_disp.size()) != video.frames - 1)
        throw ShapeMismatch("motion_correlation: target_disp must have K-1 entries");

    float lo = video.data.empty() ? 0.0f : video.data[0];
    float hi = lo;
    for (const float v : video.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo < 1e-6) return {0.0, true};

    const auto est = estimate_displacements(video, max_shift);
    const size_t n = est.size();
    std::vector<double> xs(2 * n), ys(2 * n);
    for (size_t k = 0; k < n; ++k) {
        xs[k] = est[k].x();
        xs[n + k] = est[k].y();
        ys[k] = target_disp[k].x();
        ys[n + k] = target_disp[k].y();
    }

    const auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (const double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    const double mx = mean(xs), my = mean(ys);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0 || syy <= 0) return {0.0, true};
    return {sxy / std::sqrt(sxx * syy), false};
}

nlohmann::json trajectory_report(const traj::TimedTrajectory& gt,
                                 const traj::TimedTrajectory& est) {
    const TrajectoryError err = trajectory_error(gt, est);
    return nlohmann::json{{"trans_err", err.trans_err},
                          {"rot_err", err.rot_err},
                          {"per_frame",
                           {{"trans", err.per_frame_trans}, {"rot", err.per_frame_rot}}}};
}

}  // namespace camforge::metrics
