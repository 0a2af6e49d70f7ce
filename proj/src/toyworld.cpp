#include "camforge/toyworld.hpp"

#include "camforge/rng.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <fstream>

namespace camforge::toy {

namespace {

const std::vector<std::string> kVocab = {
    "static",          "shift_right",          "shift_left", "shift_down",
    "shift_up",        "shift_right_then_down", "shift_left_then_up"};

const std::vector<std::string> kPretrain = {"static", "shift_right", "shift_left", "shift_down",
                                            "shift_up"};
const std::vector<std::string> kCamera = {"shift_right_then_down", "shift_left_then_up"};

constexpr int kContentClasses = 4;

Eigen::Vector2i content_anchor(int content_class) {
    // Square top-left corners, one per quadrant of the 16x16 canvas.
    switch (content_class) {
        case 0: return {3, 3};
        case 1: return {9, 3};
        case 2: return {3, 9};
        default: return {9, 9};
    }
}

constexpr int kSquare = 5;

struct Rgb {
    float r, g, b;
};

constexpr Rgb kNeutralBg{-0.35f, -0.35f, -0.35f};
constexpr Rgb kSquareColor{0.85f, 0.85f, 0.85f};
constexpr Rgb kCheckerA{0.65f, -0.55f, 0.65f};
constexpr Rgb kCheckerB{-0.55f, 0.65f, -0.55f};
// Global tint: x' = 0.8 x + shift.
constexpr float kTintScale = 0.8f;
constexpr Rgb kTintShift{0.18f, -0.18f, 0.18f};

}  // namespace

const std::vector<std::string>& motion_vocab() { return kVocab; }
int n_content_classes() { return kContentClasses; }
const std::vector<std::string>& pretrain_motions() { return kPretrain; }
const std::vector<std::string>& camera_motions() { return kCamera; }

bool is_composed_shift(const std::string& motion) {
    return motion == "shift_right_then_down" || motion == "shift_left_then_up";
}

std::vector<Eigen::Vector2d> target_displacements(const std::string& motion, int K) {
    std::vector<Eigen::Vector2d> disp(static_cast<size_t>(K - 1), Eigen::Vector2d::Zero());
    auto fill = [&](int from, int to, double dx, double dy) {
        for (int g = from; g < to; ++g) disp[static_cast<size_t>(g)] = {dx, dy};
    };
    const int n1 = (K + 1) / 2;  // frames 0..n1-1 follow the first leg
    if (motion == "static") {
    } else if (motion == "shift_right") {
        fill(0, K - 1, 1, 0);
    } else if (motion == "shift_left") {
        fill(0, K - 1, -1, 0);
    } else if (motion == "shift_down") {
        fill(0, K - 1, 0, 1);
    } else if (motion == "shift_up") {
        fill(0, K - 1, 0, -1);
    } else if (motion == "shift_right_then_down") {
        fill(0, n1 - 1, 1, 0);
        fill(n1 - 1, K - 1, 0, 1);
    } else if (motion == "shift_left_then_up") {
        fill(0, n1 - 1, -1, 0);
        fill(n1 - 1, K - 1, 0, -1);
    } else {
        throw std::invalid_argument("unknown toy motion: " + motion);
    }
    return disp;
}

render::VideoTensor make_toy_video(const std::string& motion, int content_class,
                                   bool virtual_style, const ToyConfig& cfg) {
    render::VideoTensor v = render::VideoTensor::zeros(cfg.K, cfg.H, cfg.W, 3, cfg.fps);
    const auto disp = target_displacements(motion, cfg.K);
    const Eigen::Vector2i anchor = content_anchor(content_class);

    auto wrap = [](int x, int n) { return ((x % n) + n) % n; };

    int px = anchor.x(), py = anchor.y();
    for (int k = 0; k < cfg.K; ++k) {
        if (k > 0) {
            px += static_cast<int>(disp[static_cast<size_t>(k - 1)].x());
            py += static_cast<int>(disp[static_cast<size_t>(k - 1)].y());
        }
        for (int y = 0; y < cfg.H; ++y) {
            for (int x = 0; x < cfg.W; ++x) {
                Rgb c = kNeutralBg;
                if (virtual_style)
                    c = (((x / 4) + (y / 4)) % 2 == 0) ? kCheckerA : kCheckerB;

                const int dx = wrap(x - px, cfg.W);
                const int dy = wrap(y - py, cfg.H);
                if (dx < kSquare && dy < kSquare) c = kSquareColor;

                if (virtual_style) {
                    c = {kTintScale * c.r + kTintShift.r, kTintScale * c.g + kTintShift.g,
                         kTintScale * c.b + kTintShift.b};
                }
                v.at(k, y, x, 0) = c.r;
                v.at(k, y, x, 1) = c.g;
                v.at(k, y, x, 2) = c.b;
            }
        }
    }
    return v;
}

traj::TimedTrajectory toy_trajectory(const std::string& motion, const ToyConfig& cfg) {
    const geom::Intrinsics intr{32.0, cfg.W / 2.0, cfg.H / 2.0, cfg.W, cfg.H};
    const geom::CameraPose start;  // rest pose looking down world -z
    const double speed = 1.0 * cfg.fps;  // 1 world unit per frame

    // Content shifting right on screen reads as the camera trucking left;
    // content shifting down reads as the camera pedestaling up.
    auto leg = [&](const std::string& m) -> traj::MotionKind {
        if (m == "right") return traj::MotionKind::truck_left;
        if (m == "left") return traj::MotionKind::truck_right;
        if (m == "down") return traj::MotionKind::pedestal_up;
        return traj::MotionKind::pedestal_down;  // "up"
    };

    if (motion == "static") return traj::static_trajectory(start, intr, cfg.K, cfg.fps);
    if (motion == "shift_right")
        return traj::make_simple(leg("right"), start, intr, speed, cfg.K, cfg.fps);
    if (motion == "shift_left")
        return traj::make_simple(leg("left"), start, intr, speed, cfg.K, cfg.fps);
    if (motion == "shift_down")
        return traj::make_simple(leg("down"), start, intr, speed, cfg.K, cfg.fps);
    if (motion == "shift_up")
        return traj::make_simple(leg("up"), start, intr, speed, cfg.K, cfg.fps);
    if (motion == "shift_right_then_down")
        return traj::compose({leg("right"), speed}, {leg("down"), speed}, start, intr, cfg.K,
                             cfg.fps);
    if (motion == "shift_left_then_up")
        return traj::compose({leg("left"), speed}, {leg("up"), speed}, start, intr, cfg.K,
                             cfg.fps);
    throw std::invalid_argument("unknown toy motion: " + motion);
}

train::VectorXd trajectory_features(const traj::TimedTrajectory& trajectory) {
    const int K = trajectory.size();
    train::VectorXd feat(6 * K);
    for (int k = 0; k < K; ++k) {
        const geom::CameraPose rel =
            geom::relative_pose(trajectory.frames[0].pose, trajectory.frames[static_cast<size_t>(k)].pose);
        const Eigen::AngleAxisd aa(rel.R);
        const geom::Vec3 rot = aa.angle() * aa.axis();
        feat.segment<3>(6 * k) = rot;
        feat.segment<3>(6 * k + 3) = rel.t;
    }
    return feat;
}

namespace {

struct ToyEntrySpec {
    std::string set;
    std::string motion;
    int content_class;
    bool virtual_style;
};

}  // namespace

data::DatasetManifest build_toy_corpus(const std::filesystem::path& root, const ToyConfig& cfg) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw data::IoError("cannot create toy corpus root: " + root.string());

    Rng rng(derive_seed(cfg.seed, 0x70F, 0));

    std::vector<ToyEntrySpec> specs;
    for (int i = 0; i < cfg.n_neutral; ++i) {
        const auto& motions = pretrain_motions();
        specs.push_back({"X_n", motions[i % motions.size()],
                         static_cast<int>(rng.uniform_index(kContentClasses)), false});
    }
    for (int i = 0; i < cfg.n_appearance; ++i)
        specs.push_back(
            {"X_a", "static", static_cast<int>(rng.uniform_index(kContentClasses)), true});
    for (int i = 0; i < cfg.n_camera; ++i) {
        const auto& motions = camera_motions();
        specs.push_back({"X_c", motions[i % motions.size()],
                         static_cast<int>(rng.uniform_index(kContentClasses)), true});
    }

    data::DatasetManifest manifest;
    manifest.root = root;
    manifest.config = {{"toy", true},
                       {"frames", cfg.K},
                       {"width", cfg.W},
                       {"height", cfg.H},
                       {"fps", cfg.fps},
                       {"seed", cfg.seed},
                       {"motion_vocab", motion_vocab()},
                       {"n_content", kContentClasses},
                       {"paired", false}};

    std::map<std::string, int> set_counters;
    std::vector<render::VideoTensor> neutral_videos;

    for (const auto& spec : specs) {
        const int index = set_counters[spec.set]++;
        const render::VideoTensor video =
            make_toy_video(spec.motion, spec.content_class, spec.virtual_style, cfg);
        const traj::TimedTrajectory trajectory = toy_trajectory(spec.motion, cfg);
        if (spec.set == "X_n") neutral_videos.push_back(video);

        render::RenderedVideo rendered;
        rendered.video = video;
        for (int k = 0; k < cfg.K; ++k)
            rendered.images.push_back(render::image_from_video_frame(video, k));
        rendered.pose_records = trajectory.frames;

        std::string content = "there is a bright square drifting over the floor.";
        data::PromptPair prompt;
        prompt.virtual_indicator = spec.virtual_style;
        prompt.content_text = spec.virtual_style
                                  ? "In this low-poly 3D <VIRTUAL> scene, " + content
                                  : "There is a bright square drifting over the floor.";
        if (spec.motion != "static")
            prompt.camera_text = "The camera shifts the view (" + spec.motion + ").";

        const std::string rel =
            spec.set + "/" + spec.motion + "/" + std::to_string(index);
        const fs::path dir = root / rel;
        data::write_video_dir(dir, rendered, trajectory, prompt,
                              {{"content_class", spec.content_class},
                               {"set", spec.set},
                               {"toy_motion", spec.motion}});

        manifest.entries.push_back({rel, spec.set, spec.motion,
                                    static_cast<std::uint64_t>(index), prompt,
                                    rel + "/poses.jsonl"});
    }

    save_ref_stats(metrics::pooled_stats(neutral_videos), root / "ref_stats.json");
    data::save_manifest(manifest, root / "manifest.json");
    return manifest;
}

void save_ref_stats(const metrics::ChannelStats& stats, const std::filesystem::path& path) {
    nlohmann::json j;
    j["mean"] = {stats.mean[0], stats.mean[1], stats.mean[2]};
    std::vector<double> cov;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) cov.push_back(stats.cov(r, c));
    j["cov"] = cov;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data::IoError("cannot write ref stats: " + path.string());
    out << j.dump(2) << "\n";
}

metrics::ChannelStats load_ref_stats(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data::IoError("cannot open ref stats: " + path.string());
    nlohmann::json j;
    in >> j;
    metrics::ChannelStats stats;
    for (int i = 0; i < 3; ++i) stats.mean[i] = j.at("mean").at(static_cast<size_t>(i));
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            stats.cov(r, c) = j.at("cov").at(static_cast<size_t>(r * 3 + c));
    return stats;
}

train::TrainSet load_train_set(const data::DatasetManifest& manifest, const std::string& set,
                               const train::CondLayout& layout, bool with_features) {
    train::TrainSet out;
    const double fps = manifest.config.value("fps", 8.0);
    for (const auto& entry : manifest.entries) {
        if (entry.set != set) continue;
        train::TrainSample sample;
        const auto dir = manifest.root / entry.video_dir;
        sample.x0 = train::flatten_video(data::load_video_dir(dir, fps));
        sample.motion_id = layout.motion_id(entry.motion);
        sample.virtual_bit = entry.prompt.virtual_indicator;

        std::ifstream meta_in(dir / "meta.json");
        if (!meta_in) throw data::MissingAsset("missing meta.json in " + dir.string());
        nlohmann::json meta;
        meta_in >> meta;
        sample.content_id = meta.value("content_class", 0);

        if (with_features) {
            const auto trajectory =
                traj::load_jsonl_file((manifest.root / entry.trajectory_file).string());
            sample.traj_feat = trajectory_features(trajectory);
        }
        out.samples.push_back(std::move(sample));
    }
    if (out.empty())
        throw train::EmptyDataset("no entries for set " + set + " in the manifest");
    return out;
}

}  // namespace camforge::toy
