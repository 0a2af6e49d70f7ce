#pragma once

#include "camforge/renderer.hpp"
#include "camforge/trajectory.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <vector>

namespace camforge::metrics {

struct LengthMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateLength : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrajectoryError {
    double trans_err = 0.0;  // normalized units
    double rot_err = 0.0;    // degrees
    std::vector<double> per_frame_trans;  // one entry per frame k >= 1
    std::vector<double> per_frame_rot;
};

// Both trajectories are re-based so frame 0 is the identity; ground-truth
// translations are scale-normalized so max ||t_k|| = 1 (skipped when all
// zero) and the same scale is applied to the estimate. Returns the mean over
// frames k = 1..K-1 of ||t_hat_k - t_k||_2; frame 0 is identity by
// construction and carries no information.
double trans_err(const traj::TimedTrajectory& gt, const traj::TimedTrajectory& est);

// Mean over frames k = 1..K-1 of the rotation angle between re-based
// rotations, in degrees.
double rot_err(const traj::TimedTrajectory& gt, const traj::TimedTrajectory& est);

TrajectoryError trajectory_error(const traj::TimedTrajectory& gt,
                                 const traj::TimedTrajectory& est);

// Frame-difference alignment loss: mean over the K-1 frame gaps of the mean
// absolute difference between consecutive-frame deltas of pred and gt. The
// L1 norm is realized as a mean over pixels and channels so values compare
// across resolutions. Accumulation order: per gap, row-major pixel loop,
// then channel; per-gap sums divide by the element count before averaging
// over gaps.
double flow_loss(const render::VideoTensor& pred, const render::VideoTensor& gt);

struct ChannelStats {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
};

ChannelStats compute_stats(const render::VideoTensor& video);
ChannelStats pooled_stats(const std::vector<render::VideoTensor>& videos);

// Mahalanobis distance of the mean under the (epsilon-regularized) reference
// covariance plus a normalized Frobenius covariance discrepancy. Zero on an
// exact match; degenerate reference covariances are regularized with
// epsilon = 1e-6 rather than rejected.
double style_score(const render::VideoTensor& video, const ChannelStats& ref);
double style_score(const ChannelStats& stats, const ChannelStats& ref);

struct MotionCorrelation {
    double value = 0.0;  // Pearson correlation in [-1, 1]
    bool flat = false;   // frames constant, correlation undefined -> 0
};

// Estimates per-gap global translation by integer-shift search (wrapped SAD,
// window +-max_shift) and returns the Pearson correlation between the
// estimated and target displacement sequences, both axes concatenated.
// target_disp holds K-1 (dx, dy) pixel displacements.
MotionCorrelation motion_correlation(const render::VideoTensor& video,
                                     const std::vector<Eigen::Vector2d>& target_disp,
                                     int max_shift = 3);

// Estimated per-gap integer displacements, exposed for diagnostics.
std::vector<Eigen::Vector2i> estimate_displacements(const render::VideoTensor& video,
                                                    int max_shift = 3);

nlohmann::json trajectory_report(const traj::TimedTrajectory& gt,
                                 const traj::TimedTrajectory& est);

}  // namespace camforge::metrics
