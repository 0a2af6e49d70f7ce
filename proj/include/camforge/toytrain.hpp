#pragma once

#include "camforge/renderer.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace camforge::train {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

struct ShapeMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RankMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyDataset : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingAppearanceAdapter : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoiseSchedule {
    int T = 0;
    VectorXd betas;
    VectorXd alphas;
    VectorXd alpha_bars;  // strictly decreasing, alpha_bars[0] > 0.99 for defaults

    static NoiseSchedule linear(int T, double beta_start = 1e-4, double beta_end = 0.02);
    void validate() const;
    double sqrt_ab(int t) const { return std::sqrt(alpha_bars[t]); }
    double sqrt_1mab(int t) const { return std::sqrt(1.0 - alpha_bars[t]); }
};

struct VideoDims {
    int K = 8, H = 16, W = 16, C = 3;
    int flat() const { return K * H * W * C; }
    int frame() const { return H * W * C; }
    bool operator==(const VideoDims&) const = default;
};

// Condition vector layout: [motion slot | content one-hot | virtual bit].
// The motion slot holds a one-hot motion-instruction id in the text paradigm
// and the trajectory-encoder output in the trajectory paradigm.
struct CondLayout {
    int n_motion = 0;
    int n_content = 0;
    std::vector<std::string> motion_vocab;

    int cond_dim() const { return n_motion + n_content + 1; }
    int motion_id(const std::string& name) const;
};

// Two affine layers with a tanh between. The raw output of the stack is the
// x0-space prediction; predict_eps converts it to an epsilon estimate through
// the schedule identity eps = (x_t - sqrt(ab)*x0) / sqrt(1-ab). A hidden
// bottleneck cannot carry the x_t passthrough an epsilon-space output would
// need, while the x0-space target is bottleneck-sized.
struct Denoiser {
    int video_dim = 0;
    int temb_dim = 16;
    int cond_dim = 0;
    int hidden = 256;
    bool linear_activation = false;  // identity nonlinearity (gradient checks)

    MatrixXd W1;  // hidden x in_dim
    VectorXd b1;
    MatrixXd W2;  // video_dim x hidden
    VectorXd b2;

    int in_dim() const { return video_dim + temb_dim + cond_dim; }
    static Denoiser create(int video_dim, int temb_dim, int cond_dim, int hidden,
                           std::uint64_t seed);
};

enum class AdapterRole { appearance, camera };

// Low-rank deltas on both affine layers: W_eff = W + (alpha/rank) * B * A.
// B starts at zero, so a fresh adapter is a no-op.
struct Adapter {
    AdapterRole role = AdapterRole::appearance;
    int rank = 4;
    double alpha = 4.0;
    MatrixXd B1, A1;  // hidden x r, r x in_dim
    MatrixXd B2, A2;  // video_dim x r, r x hidden

    double scale() const { return alpha / rank; }
    static Adapter create(AdapterRole role, const Denoiser& net, int rank, double alpha,
                          std::uint64_t seed);
    void check_compatible(const Denoiser& net) const;
};

// One affine layer over pooled per-frame relative-pose features: each frame
// contributes (axis-angle, translation) of relative_pose(frame_0, frame_k),
// flattened to K*6 values. This is the trainer's trajectory representation,
// standing in for spatially pooled per-pixel embeddings.
struct TrajectoryEncoder {
    MatrixXd W;  // enc_dim x feat_dim
    VectorXd b;

    int enc_dim() const { return static_cast<int>(W.rows()); }
    int feat_dim() const { return static_cast<int>(W.cols()); }
    VectorXd encode(const VectorXd& feat) const { return W * feat + b; }
    static TrajectoryEncoder create(int enc_dim, int feat_dim, std::uint64_t seed);
};

struct DiffusionModel {
    VideoDims dims;
    CondLayout layout;
    Denoiser net;
    NoiseSchedule sched;
    double fps = 8.0;
};

enum class Paradigm { text, trajectory };
const char* to_string(Paradigm p);
Paradigm paradigm_from_string(const std::string& s);

struct TrainConfig {
    double lambda = 0.1;       // flow-loss weight in step 2
    double lr = 0.05;
    int steps = 800;
    int batch = 8;
    int rank = 4;
    double adapter_alpha = 0;  // 0 -> alpha = rank (unit scale)
    std::uint64_t seed = 1;
    int t_min = 5;             // lowest sampled diffusion step during training
    double warmup_frac = 0.05; // linear warm-up fraction of steps
    double grad_clip = 1.0;    // global gradient norm clip; <= 0 disables
    double flow_delta = 1e-3;  // Charbonnier smoothing of the trainer flow term
    bool ablate_appearance = false;  // step 2 without the appearance adapter
};

struct TrainSample {
    VectorXd x0;  // flattened video, [-1, 1]
    int motion_id = 0;
    int content_id = 0;
    bool virtual_bit = false;
    VectorXd traj_feat;  // K*6 relative-pose features; may be empty (text paradigm)
};

struct TrainSet {
    std::vector<TrainSample> samples;
    bool empty() const { return samples.empty(); }
};

VectorXd time_embedding(int t, int dim);

// Text-paradigm condition: one-hot motion id | one-hot content | virtual bit.
VectorXd make_cond_text(const CondLayout& layout, int motion_id, int content_id,
                        bool virtual_bit);
// Trajectory-paradigm condition with an explicit motion-slot vector.
VectorXd make_cond_slot(const CondLayout& layout, const VectorXd& motion_slot, int content_id,
                        bool virtual_bit);

// x_t = sqrt(ab_t) x0 + sqrt(1 - ab_t) eps
VectorXd forward_noise(const VectorXd& x0, int t, const VectorXd& eps,
                       const NoiseSchedule& sched);

// Forward pass with the active adapters' deltas applied to both layers.
VectorXd predict_eps(const DiffusionModel& model, const std::vector<const Adapter*>& adapters,
                     const VectorXd& cond, const VectorXd& x_t, int t);

// x0_hat = (x_t - sqrt(1-ab_t) eps_hat) / sqrt(ab_t)
VectorXd predict_x0(const VectorXd& x_t, const VectorXd& eps_hat, int t,
                    const NoiseSchedule& sched);

struct LossParts {
    double total = 0, diffusion = 0, flow = 0;
};

struct Batch {
    MatrixXd x0;       // D x B
    MatrixXd eps;      // D x B
    VectorXi t;        // B
    MatrixXd cond;     // cond_dim x B; motion slot zeroed when feats drive it
    MatrixXd feats;    // feat_dim x B, cols used when encoder != nullptr
};

// Per-step objective: mean_s [ w(t) * mean_j (eps - eps_hat)^2
//                              + lambda * flow(x0_hat, x0) ],
// with w(t) = (1 - ab_t)/ab_t, the reweighting that gives the noise MSE
// unit scale in x0 space across all steps. The flow term uses a Charbonnier
// |v| ~ sqrt(v^2 + delta^2) so the objective stays differentiable.
LossParts total_loss(const DiffusionModel& model, const std::vector<const Adapter*>& adapters,
                     const TrajectoryEncoder* encoder, const Batch& batch, double lambda,
                     double flow_delta);

struct TrainLogRow {
    int step = 0;
    double loss = 0, diffusion = 0, flow = 0;
};
struct TrainResult {
    std::vector<TrainLogRow> log;
};

// Pretrains the base denoiser (and, in the trajectory paradigm, the base
// encoder) standing in for the upstream pretrained backbone.
TrainResult train_base(DiffusionModel& model, TrajectoryEncoder* encoder, const TrainSet& data,
                       const TrainConfig& cfg, Paradigm paradigm);

// Step 1: optimizes only the appearance adapter on the static set; the base
// weights are never touched. Trajectory paradigm conditions through the
// frozen encoder.
Adapter train_appearance(const DiffusionModel& model, const TrajectoryEncoder* encoder,
                         const TrainSet& x_a, const TrainConfig& cfg, Paradigm paradigm,
                         TrainResult* result = nullptr);

// Step 2, text paradigm: trains the camera adapter stacked on base +
// appearance (appearance frozen). cfg.ablate_appearance drops the appearance
// adapter from the stack (the "without step 1" ablation).
Adapter train_camera_text(const DiffusionModel& model, const Adapter* appearance,
                          const TrainSet& x_c, const TrainConfig& cfg,
                          TrainResult* result = nullptr);

// Step 2, trajectory paradigm: fully fine-tunes a copy of the encoder while
// base + appearance stay fixed.
TrajectoryEncoder train_camera_trajectory(const DiffusionModel& model, const Adapter* appearance,
                                          const TrajectoryEncoder& encoder, const TrainSet& x_c,
                                          const TrainConfig& cfg, TrainResult* result = nullptr);

// Seeded ancestral denoising from pure noise through the full schedule.
VectorXd sample(const DiffusionModel& model, const std::vector<const Adapter*>& adapters,
                const VectorXd& cond, std::uint64_t seed);

render::VideoTensor to_video(const VectorXd& flat, const VideoDims& dims, double fps);
VectorXd flatten_video(const render::VideoTensor& video);

struct GradCheckResult {
    double max_rel_err = 0.0;
    int n_checked = 0;
};

// Central finite differences (h on 64-bit scalars) against the analytic
// gradients of the total loss, over every trainable scalar: base weights,
// all listed adapters, and the encoder when present. The reported error is
// |g_analytic - g_fd| / max(1, |g_analytic|, |g_fd|), relative error with a
// unit floor so near-zero gradients compare on an absolute scale.
GradCheckResult grad_check(DiffusionModel model, std::vector<Adapter> adapters,
                           std::optional<TrajectoryEncoder> encoder, Batch probe, double lambda,
                           double flow_delta = 1e-3, double h = 1e-5, bool check_base = true);

std::uint64_t checksum(const Denoiser& net);
std::uint64_t checksum(const Adapter& adapter);
std::uint64_t checksum(const TrajectoryEncoder& encoder);

// Checkpoints: little-endian binary container (magic, kind, JSON meta, named
// f64 tensors). Base weights and adapters live in separate files so dropping
// the appearance adapter at inference is a file-selection act.
void save_base_checkpoint(const std::filesystem::path& path, const DiffusionModel& model,
                          const TrajectoryEncoder* encoder, Paradigm paradigm);
struct BaseCheckpoint {
    DiffusionModel model;
    std::optional<TrajectoryEncoder> encoder;
    Paradigm paradigm = Paradigm::text;
};
BaseCheckpoint load_base_checkpoint(const std::filesystem::path& path);

void save_adapter_checkpoint(const std::filesystem::path& path, const Adapter& adapter);
Adapter load_adapter_checkpoint(const std::filesystem::path& path);

void save_encoder_checkpoint(const std::filesystem::path& path, const TrajectoryEncoder& encoder);
TrajectoryEncoder load_encoder_checkpoint(const std::filesystem::path& path);

}  // namespace camforge::train
