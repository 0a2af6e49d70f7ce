#pragma once

#include "camforge/dataset.hpp"
#include "camforge/metrics.hpp"
#include "camforge/toytrain.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace camforge::toy {

// The disentanglement toy world: a bright square pattern ("content") on a
// floor background, translating globally frame to frame ("camera motion",
// toroidal wrap). The virtual style is a checkerboard floor plus a strong
// global tint; the neutral reference set renders the same content without
// either. Sets:
//   X_n  neutral pretraining corpus (static + the four cardinal shifts)
//   X_a  virtual static corpus (appearance adaptation)
//   X_c  virtual composed-shift corpus (camera adaptation; motions unseen
//        during pretraining)

struct ToyConfig {
    int K = 8, H = 16, W = 16;
    double fps = 8.0;
    int n_neutral = 40;
    int n_appearance = 40;
    int n_camera = 40;
    std::uint64_t seed = 7;
};

// Motion vocabulary, fixed order; ids index the condition one-hot.
const std::vector<std::string>& motion_vocab();
int n_content_classes();  // fixed square positions, one per quadrant

bool is_composed_shift(const std::string& motion);
const std::vector<std::string>& pretrain_motions();  // static + cardinal
const std::vector<std::string>& camera_motions();    // composed shifts

// Per-gap pixel displacement of the content for a motion, image coordinates
// (x right, y down), K-1 entries.
std::vector<Eigen::Vector2d> target_displacements(const std::string& motion, int K);

render::VideoTensor make_toy_video(const std::string& motion, int content_class,
                                   bool virtual_style, const ToyConfig& cfg);

// Camera trajectory whose image-space effect matches the content shift
// (content moving right = camera trucking left, etc.); written per entry so
// the trajectory paradigm has real pose sequences to encode.
traj::TimedTrajectory toy_trajectory(const std::string& motion, const ToyConfig& cfg);

// Flattened K*6 relative-pose features of a trajectory (axis-angle +
// translation of relative_pose(frame_0, frame_k)).
train::VectorXd trajectory_features(const traj::TimedTrajectory& trajectory);

// Writes the three sets under root in the dataset layout, plus manifest.json
// (with motion_vocab/n_content in its config block) and ref_stats.json
// computed over the neutral set.
data::DatasetManifest build_toy_corpus(const std::filesystem::path& root, const ToyConfig& cfg);

metrics::ChannelStats load_ref_stats(const std::filesystem::path& path);
void save_ref_stats(const metrics::ChannelStats& stats, const std::filesystem::path& path);

// Loads a manifest's entries of one set into a training set for the model
// layout (motion ids via the vocabulary, content ids from meta.json,
// trajectory features from poses.jsonl when with_features is set).
train::TrainSet load_train_set(const data::DatasetManifest& manifest, const std::string& set,
                               const train::CondLayout& layout, bool with_features);

}  // namespace camforge::toy
