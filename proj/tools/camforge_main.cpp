#include "camforge/dataset.hpp"
#include "camforge/metrics.hpp"
#include "camforge/renderer.hpp"
#include "camforge/scene.hpp"
#include "camforge/toytrain.hpp"
#include "camforge/toyworld.hpp"
#include "camforge/trajectory.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace camforge;

namespace {

// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct ConfigKeyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& scope) {
    if (!j.is_object()) throw ConfigKeyError("config section '" + scope + "' must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key))
            throw ConfigKeyError("unknown config key '" + scope + key + "'");
}

json load_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigKeyError("cannot open config file: " + path.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ConfigKeyError(std::string("config parse failure: ") + e.what());
    }
}

void write_json_file(const json& j, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data::IoError("cannot write: " + path.string());
    out << j.dump(2) << "\n";
}

// --- dataset config -------------------------------------------------------

void apply_scene_config(const json& j, scene::SceneConfig& cfg) {
    reject_unknown_keys(j,
                        {"arena_half", "interior_half", "min_static", "max_static", "min_moving",
                         "max_moving", "min_static_scale", "max_static_scale",
                         "min_moving_scale", "max_moving_scale", "min_speed", "max_speed",
                         "max_place_attempts"},
                        "scene.");
    cfg.arena_half = j.value("arena_half", cfg.arena_half);
    cfg.interior_half = j.value("interior_half", cfg.interior_half);
    cfg.min_static = j.value("min_static", cfg.min_static);
    cfg.max_static = j.value("max_static", cfg.max_static);
    cfg.min_moving = j.value("min_moving", cfg.min_moving);
    cfg.max_moving = j.value("max_moving", cfg.max_moving);
    cfg.min_static_scale = j.value("min_static_scale", cfg.min_static_scale);
    cfg.max_static_scale = j.value("max_static_scale", cfg.max_static_scale);
    cfg.min_moving_scale = j.value("min_moving_scale", cfg.min_moving_scale);
    cfg.max_moving_scale = j.value("max_moving_scale", cfg.max_moving_scale);
    cfg.min_speed = j.value("min_speed", cfg.min_speed);
    cfg.max_speed = j.value("max_speed", cfg.max_speed);
    cfg.max_place_attempts = j.value("max_place_attempts", cfg.max_place_attempts);
}

void apply_motion_params(const json& j, data::MotionParams& mp) {
    reject_unknown_keys(j,
                        {"speed", "speed2", "composed_first", "composed_second", "orbit_degrees",
                         "dolly_d0", "dolly_d1", "shake_amp_rot", "shake_amp_trans",
                         "shake_smoothness", "explosive_amp", "explosive_omega",
                         "explosive_decay", "roll_degrees", "seek_sweep_amp", "seek_sweeps",
                         "seek_push_ratio"},
                        "motion_params.");
    mp.speed = j.value("speed", mp.speed);
    mp.speed2 = j.value("speed2", mp.speed2);
    if (j.contains("composed_first"))
        mp.composed_first = traj::motion_kind_from_string(j.at("composed_first"));
    if (j.contains("composed_second"))
        mp.composed_second = traj::motion_kind_from_string(j.at("composed_second"));
    mp.orbit_degrees = j.value("orbit_degrees", mp.orbit_degrees);
    mp.dolly_d0 = j.value("dolly_d0", mp.dolly_d0);
    mp.dolly_d1 = j.value("dolly_d1", mp.dolly_d1);
    mp.shake_amp_rot = j.value("shake_amp_rot", mp.shake_amp_rot);
    mp.shake_amp_trans = j.value("shake_amp_trans", mp.shake_amp_trans);
    mp.shake_smoothness = j.value("shake_smoothness", mp.shake_smoothness);
    mp.explosive_amp = j.value("explosive_amp", mp.explosive_amp);
    mp.explosive_omega = j.value("explosive_omega", mp.explosive_omega);
    mp.explosive_decay = j.value("explosive_decay", mp.explosive_decay);
    mp.roll_degrees = j.value("roll_degrees", mp.roll_degrees);
    mp.seek_sweep_amp = j.value("seek_sweep_amp", mp.seek_sweep_amp);
    mp.seek_sweeps = j.value("seek_sweeps", mp.seek_sweeps);
    mp.seek_push_ratio = j.value("seek_push_ratio", mp.seek_push_ratio);
}

data::DatasetConfig dataset_config_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"frames", "width", "height", "f_px", "fps", "n_per_motion", "motions",
                         "base_seed", "threads", "scene", "motion_params"},
                        "");
    data::DatasetConfig cfg;
    cfg.frames = j.value("frames", cfg.frames);
    cfg.width = j.value("width", cfg.width);
    cfg.height = j.value("height", cfg.height);
    cfg.f_px = j.value("f_px", cfg.f_px);
    cfg.fps = j.value("fps", cfg.fps);
    cfg.n_per_motion = j.value("n_per_motion", cfg.n_per_motion);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("motions")) {
        cfg.motions.clear();
        for (const auto& m : j.at("motions"))
            cfg.motions.push_back(traj::motion_kind_from_string(m));
    }
    if (j.contains("scene")) apply_scene_config(j.at("scene"), cfg.scene);
    if (j.contains("motion_params")) apply_motion_params(j.at("motion_params"), cfg.motion_params);
    return cfg;
}

json dataset_config_to_json(const data::DatasetConfig& cfg) {
    json motions = json::array();
    for (const auto m : cfg.motions) motions.push_back(traj::to_string(m));
    return json{{"frames", cfg.frames},
                {"width", cfg.width},
                {"height", cfg.height},
                {"f_px", cfg.f_px},
                {"fps", cfg.fps},
                {"n_per_motion", cfg.n_per_motion},
                {"motions", motions},
                {"base_seed", cfg.base_seed},
                {"threads", cfg.threads},
                {"scene",
                 {{"arena_half", cfg.scene.arena_half},
                  {"interior_half", cfg.scene.interior_half},
                  {"min_static", cfg.scene.min_static},
                  {"max_static", cfg.scene.max_static},
                  {"min_moving", cfg.scene.min_moving},
                  {"max_moving", cfg.scene.max_moving},
                  {"min_static_scale", cfg.scene.min_static_scale},
                  {"max_static_scale", cfg.scene.max_static_scale},
                  {"min_moving_scale", cfg.scene.min_moving_scale},
                  {"max_moving_scale", cfg.scene.max_moving_scale},
                  {"min_speed", cfg.scene.min_speed},
                  {"max_speed", cfg.scene.max_speed},
                  {"max_place_attempts", cfg.scene.max_place_attempts}}},
                {"motion_params",
                 {{"speed", cfg.motion_params.speed},
                  {"speed2", cfg.motion_params.speed2},
                  {"composed_first", traj::to_string(cfg.motion_params.composed_first)},
                  {"composed_second", traj::to_string(cfg.motion_params.composed_second)},
                  {"orbit_degrees", cfg.motion_params.orbit_degrees},
                  {"dolly_d0", cfg.motion_params.dolly_d0},
                  {"dolly_d1", cfg.motion_params.dolly_d1},
                  {"shake_amp_rot", cfg.motion_params.shake_amp_rot},
                  {"shake_amp_trans", cfg.motion_params.shake_amp_trans},
                  {"shake_smoothness", cfg.motion_params.shake_smoothness},
                  {"explosive_amp", cfg.motion_params.explosive_amp},
                  {"explosive_omega", cfg.motion_params.explosive_omega},
                  {"explosive_decay", cfg.motion_params.explosive_decay},
                  {"roll_degrees", cfg.motion_params.roll_degrees},
                  {"seek_sweep_amp", cfg.motion_params.seek_sweep_amp},
                  {"seek_sweeps", cfg.motion_params.seek_sweeps},
                  {"seek_push_ratio", cfg.motion_params.seek_push_ratio}}}};
}

// --- train config ---------------------------------------------------------

struct TrainCliConfig {
    train::TrainConfig train;
    int hidden = 256;
    int temb_dim = 16;
    int T = 100;
    double beta_start = 1e-4;
    double beta_end = 0.02;
};

TrainCliConfig train_config_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"lambda", "lr", "steps", "batch", "rank", "adapter_alpha", "seed",
                         "t_min", "warmup_frac", "grad_clip", "flow_delta", "hidden", "temb_dim",
                         "T", "beta_start", "beta_end"},
                        "");
    TrainCliConfig cfg;
    cfg.train.lambda = j.value("lambda", cfg.train.lambda);
    cfg.train.lr = j.value("lr", cfg.train.lr);
    cfg.train.steps = j.value("steps", cfg.train.steps);
    cfg.train.batch = j.value("batch", cfg.train.batch);
    cfg.train.rank = j.value("rank", cfg.train.rank);
    cfg.train.adapter_alpha = j.value("adapter_alpha", cfg.train.adapter_alpha);
    cfg.train.seed = j.value("seed", cfg.train.seed);
    cfg.train.t_min = j.value("t_min", cfg.train.t_min);
    cfg.train.warmup_frac = j.value("warmup_frac", cfg.train.warmup_frac);
    cfg.train.grad_clip = j.value("grad_clip", cfg.train.grad_clip);
    cfg.train.flow_delta = j.value("flow_delta", cfg.train.flow_delta);
    cfg.hidden = j.value("hidden", cfg.hidden);
    cfg.temb_dim = j.value("temb_dim", cfg.temb_dim);
    cfg.T = j.value("T", cfg.T);
    cfg.beta_start = j.value("beta_start", cfg.beta_start);
    cfg.beta_end = j.value("beta_end", cfg.beta_end);
    return cfg;
}

json train_config_to_json(const TrainCliConfig& cfg) {
    return json{{"lambda", cfg.train.lambda},
                {"lr", cfg.train.lr},
                {"steps", cfg.train.steps},
                {"batch", cfg.train.batch},
                {"rank", cfg.train.rank},
                {"adapter_alpha", cfg.train.adapter_alpha},
                {"seed", cfg.train.seed},
                {"t_min", cfg.train.t_min},
                {"warmup_frac", cfg.train.warmup_frac},
                {"grad_clip", cfg.train.grad_clip},
                {"flow_delta", cfg.train.flow_delta},
                {"hidden", cfg.hidden},
                {"temb_dim", cfg.temb_dim},
                {"T", cfg.T},
                {"beta_start", cfg.beta_start},
                {"beta_end", cfg.beta_end}};
}

void write_curve_csv(const train::TrainResult& result, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data::IoError("cannot write curve: " + path.string());
    out << "step,loss,diffusion,flow\n";
    for (const auto& row : result.log)
        out << row.step << "," << row.loss << "," << row.diffusion << "," << row.flow << "\n";
}

train::CondLayout layout_from_manifest(const data::DatasetManifest& manifest) {
    train::CondLayout layout;
    if (manifest.config.contains("motion_vocab")) {
        layout.motion_vocab =
            manifest.config.at("motion_vocab").get<std::vector<std::string>>();
    } else {
        std::set<std::string> names;
        for (const auto& e : manifest.entries) names.insert(e.motion);
        layout.motion_vocab.assign(names.begin(), names.end());
    }
    layout.n_motion = static_cast<int>(layout.motion_vocab.size());
    if (manifest.config.contains("n_content")) {
        layout.n_content = manifest.config.at("n_content");
    } else {
        layout.n_content = 5;  // rendered corpora: none + four moving kinds
    }
    return layout;
}

// --- subcommands ----------------------------------------------------------

int cmd_scene_gen(std::uint64_t seed, const std::string& out_path, bool virtual_indicator) {
    const scene::SceneSpec spec = scene::sample_scene(seed, scene::SceneConfig{});
    write_json_file(scene::to_json(spec), out_path);
    std::cout << scene::scene_description(spec, virtual_indicator) << "\n";
    std::cout << out_path << "\n";
    return 0;
}

int cmd_render(const std::string& scene_path, const std::string& motion, const fs::path& out,
               int frames, int width, int height, double f_px, double fps, double speed,
               int threads) {
    const scene::SceneSpec spec = scene::scene_from_json(load_json_file(scene_path));

    data::DatasetConfig cfg;
    cfg.frames = frames;
    cfg.width = width;
    cfg.height = height;
    cfg.f_px = f_px;
    cfg.fps = fps;
    cfg.motion_params.speed = speed;
    cfg.motions = {traj::motion_kind_from_string(motion)};
    cfg.validate();

    const data::SamplePair pair = data::build_pair(spec.seed, cfg.motions[0], cfg);
    // Render the requested motion over the supplied scene (not the pair's
    // regenerated one) so edits to the scene file are honored.
    const render::RenderedVideo video =
        render::render_video(spec, pair.motion_traj, threads, cfg.scene);
    const data::PromptPair prompt{traj::camera_clause(pair.motion_traj, spec),
                                  scene::content_clause(spec, true), true};
    data::write_video_dir(out, video, pair.motion_traj, prompt, {{"seed", spec.seed}});
    write_json_file(json{{"scene", scene_path},
                         {"motion", motion},
                         {"frames", frames},
                         {"width", width},
                         {"height", height},
                         {"f_px", f_px},
                         {"fps", fps},
                         {"speed", speed}},
                    out / "resolved_config.json");
    std::cout << out.string() << "\n";
    return 0;
}

int cmd_dataset_build(const std::optional<std::string>& config_path, const fs::path& out,
                      std::optional<std::uint64_t> base_seed, std::optional<int> n_per_motion,
                      std::optional<int> threads) {
    data::DatasetConfig cfg;
    if (config_path) cfg = dataset_config_from_json(load_json_file(*config_path));
    if (base_seed) cfg.base_seed = *base_seed;
    if (n_per_motion) cfg.n_per_motion = *n_per_motion;
    if (threads) cfg.threads = *threads;
    cfg.validate();

    const data::DatasetManifest manifest = data::build_corpus(out, cfg);
    write_json_file(dataset_config_to_json(cfg), out / "resolved_config.json");
    std::cout << (out / "manifest.json").string() << "\n";
    return 0;
}

int cmd_metrics_traj(const std::string& gt_path, const std::string& est_path) {
    const auto gt = traj::load_jsonl_file(gt_path);
    const auto est = traj::load_jsonl_file(est_path);
    std::cout << metrics::trajectory_report(gt, est).dump(2) << "\n";
    return 0;
}

int cmd_metrics_flow(const std::string& pred_dir, const std::string& gt_dir, double fps) {
    const render::VideoTensor pred = data::load_video_dir(pred_dir, fps);
    const render::VideoTensor gt = data::load_video_dir(gt_dir, fps);
    std::cout << json{{"flow_loss", metrics::flow_loss(pred, gt)}}.dump(2) << "\n";
    return 0;
}

int cmd_toyworld_build(const fs::path& out, std::uint64_t seed, int n_neutral, int n_appearance,
                       int n_camera) {
    toy::ToyConfig cfg;
    cfg.seed = seed;
    cfg.n_neutral = n_neutral;
    cfg.n_appearance = n_appearance;
    cfg.n_camera = n_camera;
    toy::build_toy_corpus(out, cfg);
    write_json_file(json{{"seed", seed},
                         {"n_neutral", n_neutral},
                         {"n_appearance", n_appearance},
                         {"n_camera", n_camera},
                         {"K", cfg.K},
                         {"H", cfg.H},
                         {"W", cfg.W},
                         {"fps", cfg.fps}},
                    out / "resolved_config.json");
    std::cout << (out / "manifest.json").string() << "\n";
    return 0;
}

int cmd_train(const std::string& stage, const std::string& paradigm_name,
              const std::string& dataset_root, const fs::path& out,
              const std::optional<std::string>& config_path,
              const std::optional<std::string>& base_ckpt,
              const std::optional<std::string>& appearance_ckpt,
              const std::optional<std::string>& train_set_name, bool ablate_appearance,
              std::optional<int> steps, std::optional<double> lr,
              std::optional<double> lambda, std::optional<int> rank,
              std::optional<std::uint64_t> seed) {
    TrainCliConfig cfg;
    if (config_path) cfg = train_config_from_json(load_json_file(*config_path));
    if (steps) cfg.train.steps = *steps;
    if (lr) cfg.train.lr = *lr;
    if (lambda) cfg.train.lambda = *lambda;
    if (rank) cfg.train.rank = *rank;
    if (seed) cfg.train.seed = *seed;
    cfg.train.ablate_appearance = ablate_appearance;

    const train::Paradigm paradigm = train::paradigm_from_string(paradigm_name);
    const data::DatasetManifest manifest =
        data::load_manifest(fs::path(dataset_root) / "manifest.json");

    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw data::IoError("cannot create output dir: " + out.string());

    const bool needs_feats = paradigm == train::Paradigm::trajectory;

    if (stage == "base") {
        const train::CondLayout layout = layout_from_manifest(manifest);
        train::DiffusionModel model;
        model.dims = {manifest.config.value("frames", 8), manifest.config.value("height", 16),
                      manifest.config.value("width", 16), 3};
        model.fps = manifest.config.value("fps", 8.0);
        model.layout = layout;
        model.sched = train::NoiseSchedule::linear(cfg.T, cfg.beta_start, cfg.beta_end);
        model.net = train::Denoiser::create(model.dims.flat(), cfg.temb_dim, layout.cond_dim(),
                                            cfg.hidden, cfg.train.seed);

        const std::string set_name = train_set_name.value_or("X_n");
        const train::TrainSet set =
            toy::load_train_set(manifest, set_name, layout, needs_feats);

        std::optional<train::TrajectoryEncoder> encoder;
        if (needs_feats) {
            const int feat_dim = static_cast<int>(set.samples[0].traj_feat.size());
            encoder = train::TrajectoryEncoder::create(layout.n_motion, feat_dim,
                                                       cfg.train.seed + 1);
        }
        const train::TrainResult result = train::train_base(
            model, encoder.has_value() ? &*encoder : nullptr, set, cfg.train, paradigm);
        train::save_base_checkpoint(out / "base.ckpt", model,
                                    encoder.has_value() ? &*encoder : nullptr, paradigm);
        write_curve_csv(result, out / "base_curve.csv");
        write_json_file(train_config_to_json(cfg), out / "resolved_config.json");
        std::cout << (out / "base.ckpt").string() << "\n";
        return 0;
    }

    if (!base_ckpt) throw ConfigKeyError("--base checkpoint is required for stage " + stage);
    const train::BaseCheckpoint base = train::load_base_checkpoint(*base_ckpt);

    if (stage == "appearance") {
        const std::string set_name = train_set_name.value_or("X_a");
        const train::TrainSet set =
            toy::load_train_set(manifest, set_name, base.model.layout, needs_feats);
        train::TrainResult result;
        const train::Adapter adapter = train::train_appearance(
            base.model, base.encoder.has_value() ? &*base.encoder : nullptr, set, cfg.train,
            paradigm, &result);
        train::save_adapter_checkpoint(out / "appearance.ckpt", adapter);
        write_curve_csv(result, out / "appearance_curve.csv");
        write_json_file(train_config_to_json(cfg), out / "resolved_config.json");
        std::cout << (out / "appearance.ckpt").string() << "\n";
        return 0;
    }

    if (stage == "camera") {
        std::optional<train::Adapter> appearance;
        if (!ablate_appearance) {
            if (!appearance_ckpt)
                throw train::MissingAppearanceAdapter(
                    "camera stage requires --appearance (or --ablate-appearance)");
            appearance = train::load_adapter_checkpoint(*appearance_ckpt);
        }
        const std::string set_name = train_set_name.value_or("X_c");
        const train::TrainSet set =
            toy::load_train_set(manifest, set_name, base.model.layout, needs_feats);
        train::TrainResult result;
        if (paradigm == train::Paradigm::text) {
            const train::Adapter camera = train::train_camera_text(
                base.model, appearance.has_value() ? &*appearance : nullptr, set, cfg.train,
                &result);
            train::save_adapter_checkpoint(out / "camera.ckpt", camera);
        } else {
            if (!base.encoder.has_value())
                throw train::CheckpointError("base checkpoint lacks a trajectory encoder");
            const train::TrajectoryEncoder tuned = train::train_camera_trajectory(
                base.model, appearance.has_value() ? &*appearance : nullptr, *base.encoder, set,
                cfg.train, &result);
            train::save_encoder_checkpoint(out / "encoder.ckpt", tuned);
        }
        write_curve_csv(result, out / "camera_curve.csv");
        write_json_file(train_config_to_json(cfg), out / "resolved_config.json");
        std::cout << (out / (paradigm == train::Paradigm::text ? "camera.ckpt" : "encoder.ckpt"))
                         .string()
                  << "\n";
        return 0;
    }

    throw ConfigKeyError("unknown training stage: " + stage);
}

int cmd_sample(const std::string& base_ckpt, const fs::path& out,
               const std::optional<std::string>& camera_ckpt,
               const std::optional<std::string>& appearance_ckpt,
               const std::optional<std::string>& encoder_ckpt, bool drop_appearance,
               const std::string& motion, int content, bool virtual_bit, std::uint64_t seed,
               int count, const std::optional<std::string>& ref_stats_path,
               const std::optional<std::string>& trajectory_path) {
    const train::BaseCheckpoint base = train::load_base_checkpoint(base_ckpt);
    const train::DiffusionModel& model = base.model;

    std::optional<train::Adapter> camera, appearance;
    if (camera_ckpt) camera = train::load_adapter_checkpoint(*camera_ckpt);
    // With --drop-appearance the appearance file is never opened.
    if (appearance_ckpt && !drop_appearance)
        appearance = train::load_adapter_checkpoint(*appearance_ckpt);

    std::vector<const train::Adapter*> adapters;
    if (appearance.has_value()) adapters.push_back(&*appearance);
    if (camera.has_value()) adapters.push_back(&*camera);

    train::VectorXd cond;
    if (base.paradigm == train::Paradigm::text) {
        cond = train::make_cond_text(model.layout, model.layout.motion_id(motion), content,
                                     virtual_bit);
    } else {
        train::TrajectoryEncoder encoder =
            encoder_ckpt ? train::load_encoder_checkpoint(*encoder_ckpt)
                         : base.encoder.value();
        traj::TimedTrajectory trajectory =
            trajectory_path ? traj::load_jsonl_file(*trajectory_path)
                            : toy::toy_trajectory(motion, toy::ToyConfig{});
        cond = train::make_cond_slot(model.layout,
                                     encoder.encode(toy::trajectory_features(trajectory)),
                                     content, virtual_bit);
    }

    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw data::IoError("cannot create output dir: " + out.string());

    json report;
    report["samples"] = json::array();
    double style_sum = 0.0, corr_sum = 0.0;
    int corr_count = 0;

    std::optional<metrics::ChannelStats> ref;
    if (ref_stats_path) ref = toy::load_ref_stats(*ref_stats_path);

    for (int i = 0; i < count; ++i) {
        const train::VectorXd flat = train::sample(model, adapters, cond, seed + i);
        const render::VideoTensor video = train::to_video(flat, model.dims, model.fps);

        char dir_name[32];
        std::snprintf(dir_name, sizeof(dir_name), "sample_%03d", i);
        const fs::path sample_dir = out / dir_name;
        fs::create_directories(sample_dir);
        char frame_name[32];
        for (int k = 0; k < video.frames; ++k) {
            std::snprintf(frame_name, sizeof(frame_name), "frame_%04d.ppm", k);
            render::write_ppm(render::image_from_video_frame(video, k),
                              (sample_dir / frame_name).string());
        }

        json entry{{"dir", dir_name}, {"seed", seed + i}};
        if (ref.has_value()) {
            const double s = metrics::style_score(video, *ref);
            entry["style_score"] = s;
            style_sum += s;
        }
        try {
            const auto disp = toy::target_displacements(motion, video.frames);
            const auto corr = metrics::motion_correlation(video, disp);
            entry["motion_correlation"] = corr.value;
            entry["flat_video"] = corr.flat;
            corr_sum += corr.value;
            ++corr_count;
        } catch (const std::invalid_argument&) {
            // Non-toy motion names have no displacement table.
        }
        report["samples"].push_back(entry);
    }

    if (ref.has_value()) report["mean_style_score"] = style_sum / count;
    if (corr_count > 0) report["mean_motion_correlation"] = corr_sum / corr_count;
    report["motion"] = motion;
    report["content"] = content;
    report["virtual"] = virtual_bit;
    report["drop_appearance"] = drop_appearance;

    write_json_file(report, out / "report.json");
    write_json_file(json{{"base", base_ckpt},
                         {"camera", camera_ckpt.value_or("")},
                         {"appearance", appearance_ckpt.value_or("")},
                         {"drop_appearance", drop_appearance},
                         {"motion", motion},
                         {"content", content},
                         {"virtual", virtual_bit},
                         {"seed", seed},
                         {"count", count}},
                    out / "resolved_config.json");
    std::cout << (out / "report.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"camforge: scripted low-poly camera-motion corpora and a desk-scale "
                 "dual-adaptation trainer"};
    app.require_subcommand(1);

    // scene gen
    auto* scene_cmd = app.add_subcommand("scene", "Scene utilities");
    scene_cmd->require_subcommand(1);
    auto* scene_gen = scene_cmd->add_subcommand("gen", "Sample a procedural scene");
    std::uint64_t scene_seed = 1;
    std::string scene_out = "scene.json";
    bool scene_virtual = false;
    scene_gen->add_option("--seed", scene_seed, "Scene seed");
    scene_gen->add_option("--out", scene_out, "Output scene json");
    scene_gen->add_flag("--virtual", scene_virtual, "Include the virtual indicator");

    // render
    auto* render_cmd = app.add_subcommand("render", "Render one video of a scene");
    std::string render_scene, render_motion = "push_in", render_out = "render_out";
    int render_frames = 49, render_width = 128, render_height = 96, render_threads = 0;
    double render_fpx = 110.0, render_fps = 12.0, render_speed = 1.0;
    render_cmd->add_option("--scene", render_scene, "Scene json path")->required();
    render_cmd->add_option("--motion", render_motion, "Motion kind");
    render_cmd->add_option("--out", render_out, "Output directory");
    render_cmd->add_option("--frames", render_frames, "Frame count");
    render_cmd->add_option("--width", render_width, "Width px");
    render_cmd->add_option("--height", render_height, "Height px");
    render_cmd->add_option("--f-px", render_fpx, "Focal length px");
    render_cmd->add_option("--fps", render_fps, "Frames per second");
    render_cmd->add_option("--speed", render_speed, "Motion speed");
    render_cmd->add_option("--threads", render_threads, "Render threads (0 = auto)");

    // dataset build
    auto* dataset_cmd = app.add_subcommand("dataset", "Dataset pipeline");
    dataset_cmd->require_subcommand(1);
    auto* dataset_build = dataset_cmd->add_subcommand("build", "Build a paired corpus");
    std::string dataset_out = "dataset_root";
    std::string dataset_config;
    std::uint64_t dataset_seed = 0;
    int dataset_n = 0, dataset_threads = -1;
    dataset_build->add_option("--config", dataset_config, "Dataset config json");
    dataset_build->add_option("--out", dataset_out, "Dataset root");
    auto* seed_opt = dataset_build->add_option("--base-seed", dataset_seed, "Base seed override");
    auto* n_opt = dataset_build->add_option("--n-per-motion", dataset_n, "Samples per motion");
    auto* thr_opt = dataset_build->add_option("--threads", dataset_threads, "Worker threads");

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "Trajectory and video metrics");
    metrics_cmd->require_subcommand(1);
    auto* metrics_traj = metrics_cmd->add_subcommand("traj", "TransErr / RotErr");
    std::string mt_gt, mt_est;
    metrics_traj->add_option("--gt", mt_gt, "Ground-truth poses jsonl")->required();
    metrics_traj->add_option("--est", mt_est, "Estimated poses jsonl")->required();
    auto* metrics_flow = metrics_cmd->add_subcommand("flow", "Frame-difference flow loss");
    std::string mf_pred, mf_gt;
    double mf_fps = 12.0;
    metrics_flow->add_option("--pred", mf_pred, "Predicted video dir")->required();
    metrics_flow->add_option("--gt", mf_gt, "Ground-truth video dir")->required();
    metrics_flow->add_option("--fps", mf_fps, "Frames per second");

    // toyworld build
    auto* toy_cmd = app.add_subcommand("toyworld", "Disentanglement toy corpora");
    toy_cmd->require_subcommand(1);
    auto* toy_build = toy_cmd->add_subcommand("build", "Build the toy corpus");
    std::string toy_out = "toy_root";
    std::uint64_t toy_seed = 7;
    int toy_n_neutral = 40, toy_n_app = 40, toy_n_cam = 40;
    toy_build->add_option("--out", toy_out, "Toy corpus root");
    toy_build->add_option("--seed", toy_seed, "Seed");
    toy_build->add_option("--n-neutral", toy_n_neutral, "Neutral pretraining samples");
    toy_build->add_option("--n-appearance", toy_n_app, "X_a samples");
    toy_build->add_option("--n-camera", toy_n_cam, "X_c samples");

    // train
    auto* train_cmd = app.add_subcommand("train", "Two-step adaptation training");
    std::string tr_stage, tr_paradigm = "text", tr_dataset, tr_out = "train_out";
    std::string tr_config, tr_base, tr_appearance, tr_set;
    bool tr_ablate = false;
    int tr_steps = -1, tr_rank = -1;
    double tr_lr = -1, tr_lambda = -1;
    std::uint64_t tr_seed = 0;
    train_cmd->add_option("--stage", tr_stage, "base | appearance | camera")->required();
    train_cmd->add_option("--paradigm", tr_paradigm, "text | trajectory");
    train_cmd->add_option("--dataset", tr_dataset, "Dataset root")->required();
    train_cmd->add_option("--out", tr_out, "Output directory");
    train_cmd->add_option("--config", tr_config, "Train config json");
    train_cmd->add_option("--base", tr_base, "Base checkpoint (appearance/camera stages)");
    train_cmd->add_option("--appearance", tr_appearance, "Appearance adapter checkpoint");
    train_cmd->add_option("--train-set", tr_set, "Manifest set to train on");
    train_cmd->add_flag("--ablate-appearance", tr_ablate, "Train step 2 without step 1");
    auto* tr_steps_opt = train_cmd->add_option("--steps", tr_steps, "Step count override");
    auto* tr_lr_opt = train_cmd->add_option("--lr", tr_lr, "Learning rate override");
    auto* tr_lambda_opt = train_cmd->add_option("--lambda", tr_lambda, "Flow weight override");
    auto* tr_rank_opt = train_cmd->add_option("--rank", tr_rank, "Adapter rank override");
    auto* tr_seed_opt = train_cmd->add_option("--seed", tr_seed, "Seed override");

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "Ancestral sampling from checkpoints");
    std::string sm_base, sm_out = "sample_out", sm_camera, sm_appearance, sm_encoder;
    std::string sm_motion = "static", sm_ref, sm_traj;
    bool sm_drop = false, sm_virtual = false;
    int sm_content = 0, sm_count = 1;
    std::uint64_t sm_seed = 1;
    sample_cmd->add_option("--base", sm_base, "Base checkpoint")->required();
    sample_cmd->add_option("--out", sm_out, "Output directory");
    sample_cmd->add_option("--camera-adapter", sm_camera, "Camera adapter checkpoint");
    sample_cmd->add_option("--appearance-adapter", sm_appearance,
                           "Appearance adapter checkpoint");
    sample_cmd->add_option("--encoder", sm_encoder, "Tuned trajectory encoder checkpoint");
    sample_cmd->add_flag("--drop-appearance", sm_drop,
                         "Never load the appearance adapter file");
    sample_cmd->add_option("--motion", sm_motion, "Motion name from the model vocabulary");
    sample_cmd->add_option("--content", sm_content, "Content class id");
    sample_cmd->add_flag("--virtual", sm_virtual, "Set the virtual indicator bit");
    sample_cmd->add_option("--seed", sm_seed, "Sampling seed");
    sample_cmd->add_option("--count", sm_count, "Number of videos");
    sample_cmd->add_option("--ref-stats", sm_ref, "Reference channel stats json");
    sample_cmd->add_option("--trajectory", sm_traj, "Trajectory jsonl (trajectory paradigm)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (scene_gen->parsed()) return cmd_scene_gen(scene_seed, scene_out, scene_virtual);
        if (render_cmd->parsed())
            return cmd_render(render_scene, render_motion, render_out, render_frames,
                              render_width, render_height, render_fpx, render_fps, render_speed,
                              render_threads);
        if (dataset_build->parsed())
            return cmd_dataset_build(
                dataset_config.empty() ? std::nullopt : std::optional(dataset_config),
                dataset_out, seed_opt->count() ? std::optional(dataset_seed) : std::nullopt,
                n_opt->count() ? std::optional(dataset_n) : std::nullopt,
                thr_opt->count() ? std::optional(dataset_threads) : std::nullopt);
        if (metrics_traj->parsed()) return cmd_metrics_traj(mt_gt, mt_est);
        if (metrics_flow->parsed()) return cmd_metrics_flow(mf_pred, mf_gt, mf_fps);
        if (toy_build->parsed())
            return cmd_toyworld_build(toy_out, toy_seed, toy_n_neutral, toy_n_app, toy_n_cam);
        if (train_cmd->parsed())
            return cmd_train(tr_stage, tr_paradigm, tr_dataset, tr_out,
                             tr_config.empty() ? std::nullopt : std::optional(tr_config),
                             tr_base.empty() ? std::nullopt : std::optional(tr_base),
                             tr_appearance.empty() ? std::nullopt : std::optional(tr_appearance),
                             tr_set.empty() ? std::nullopt : std::optional(tr_set), tr_ablate,
                             tr_steps_opt->count() ? std::optional(tr_steps) : std::nullopt,
                             tr_lr_opt->count() ? std::optional(tr_lr) : std::nullopt,
                             tr_lambda_opt->count() ? std::optional(tr_lambda) : std::nullopt,
                             tr_rank_opt->count() ? std::optional(tr_rank) : std::nullopt,
                             tr_seed_opt->count() ? std::optional(tr_seed) : std::nullopt);
        if (sample_cmd->parsed())
            return cmd_sample(sm_base, sm_out,
                              sm_camera.empty() ? std::nullopt : std::optional(sm_camera),
                              sm_appearance.empty() ? std::nullopt : std::optional(sm_appearance),
                              sm_encoder.empty() ? std::nullopt : std::optional(sm_encoder),
                              sm_drop, sm_motion, sm_content, sm_virtual, sm_seed, sm_count,
                              sm_ref.empty() ? std::nullopt : std::optional(sm_ref),
                              sm_traj.empty() ? std::nullopt : std::optional(sm_traj));
    } catch (const ConfigKeyError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const scene::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
