#include "camforge/dataset.hpp"

#include "camforge/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

namespace camforge::data {

namespace fs = std::filesystem;

std::string PromptPair::composite() const {
    if (camera_text.empty()) return "Content: " + content_text;
    return "Camera: " + camera_text + " | Content: " + content_text;
}

void DatasetConfig::validate() const {
    if (frames < 1) throw std::invalid_argument("dataset config: frames must be >= 1");
    if (width < 1 || height < 1)
        throw std::invalid_argument("dataset config: resolution must be positive");
    if (n_per_motion < 1)
        throw std::invalid_argument("dataset config: n_per_motion must be >= 1");
    if (motions.empty()) throw std::invalid_argument("dataset config: no motions requested");
    if (fps <= 0) throw std::invalid_argument("dataset config: fps must be positive");
    if (f_px <= 0) throw std::invalid_argument("dataset config: focal length must be positive");
    scene.validate();
}

geom::Intrinsics DatasetConfig::intrinsics() const {
    return geom::Intrinsics{f_px, width / 2.0, height / 2.0, width, height};
}

std::uint64_t sample_seed(std::uint64_t base_seed, int motion_index, int sample_index) {
    return derive_seed(base_seed, static_cast<std::uint64_t>(motion_index),
                       static_cast<std::uint64_t>(sample_index));
}

namespace {

// Randomized camera placement looking into the arena, used for both the
// X_a fixed pose and the X_c start pose.
geom::CameraPose random_view_pose(Rng& rng, const scene::SceneConfig& scfg) {
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    const double radius = rng.uniform(0.45, 0.8) * scfg.interior_half;
    const double height = rng.uniform(1.2, 4.0);
    const geom::Vec3 eye(radius * std::cos(angle), height, radius * std::sin(angle));
    const geom::Vec3 target(rng.uniform(-2.0, 2.0), rng.uniform(0.3, 1.2),
                            rng.uniform(-2.0, 2.0));
    return geom::look_at(eye, target, geom::Vec3(0, 1, 0));
}

traj::TimedTrajectory make_motion_trajectory(traj::MotionKind motion,
                                             const scene::SceneSpec& spec,
                                             const geom::CameraPose& start,
                                             const DatasetConfig& cfg, Rng& rng) {
    const geom::Intrinsics intr = cfg.intrinsics();
    const MotionParams& mp = cfg.motion_params;
    const int K = cfg.frames;
    const double fps = cfg.fps;

    if (traj::is_simple(motion))
        return traj::make_simple(motion, start, intr, mp.speed, K, fps);

    switch (motion) {
        case traj::MotionKind::composed:
            return traj::compose({mp.composed_first, mp.speed}, {mp.composed_second, mp.speed2},
                                 start, intr, K, fps);
        case traj::MotionKind::orbit: {
            const geom::Vec3 center(0, 0.8, 0);
            const double radius = std::max(2.0, start.center().head<2>().norm());
            return traj::orbit(center, radius, start.center().y(), mp.orbit_degrees, intr, K,
                               fps);
        }
        case traj::MotionKind::dolly_zoom: {
            geom::Vec3 target(0, 0.8, 0);
            if (!spec.moving_objects.empty()) target = traj::object_focus_point(spec, 0);
            geom::Vec3 dir = start.center() - target;
            return traj::dolly_zoom(target, intr, mp.dolly_d0, mp.dolly_d1, K, fps, dir,
                                    start.center().y() - target.y());
        }
        case traj::MotionKind::handheld_shake:
            return traj::handheld_shake(traj::static_trajectory(start, intr, K, fps),
                                        mp.shake_amp_rot, mp.shake_amp_trans,
                                        mp.shake_smoothness, rng.next_u64());
        case traj::MotionKind::explosive_shake:
            return traj::explosive_shake(traj::static_trajectory(start, intr, K, fps), K / 4,
                                         mp.explosive_amp, mp.explosive_omega,
                                         mp.explosive_decay, rng.next_u64());
        case traj::MotionKind::roll_rotation:
            return traj::roll_rotation(start, mp.roll_degrees, intr, K, fps);
        case traj::MotionKind::seek_then_focus: {
            if (spec.moving_objects.empty())
                throw traj::UnknownTarget("seek_then_focus needs a moving object");
            const int lock = std::max(1, static_cast<int>(std::lround(0.6 * K)));
            return traj::seek_then_focus(spec, 0, mp.seek_sweep_amp, mp.seek_sweeps, lock,
                                         mp.seek_push_ratio, start, intr, K, fps);
        }
        case traj::MotionKind::switch_focus: {
            if (spec.moving_objects.size() < 2)
                throw traj::UnknownTarget("switch_focus needs two moving objects");
            return traj::switch_focus(spec, 0, 1, start.center(), intr, K, fps);
        }
        default:
            throw std::invalid_argument(std::string("unsupported corpus motion: ") +
                                        traj::to_string(motion));
    }
}

}  // namespace

SamplePair build_pair(std::uint64_t scene_seed, traj::MotionKind motion,
                      const DatasetConfig& cfg) {
    cfg.validate();

    SamplePair pair;
    pair.scene_spec = scene::sample_scene(scene_seed, cfg.scene);

    Rng cam_rng(derive_seed(scene_seed, 0xCA3E7A, 1));
    const geom::Intrinsics intr = cfg.intrinsics();

    const geom::CameraPose static_pose = random_view_pose(cam_rng, cfg.scene);
    pair.static_traj = traj::static_trajectory(static_pose, intr, cfg.frames, cfg.fps);

    const geom::CameraPose start_pose = random_view_pose(cam_rng, cfg.scene);
    pair.motion_traj = make_motion_trajectory(motion, pair.scene_spec, start_pose, cfg, cam_rng);
    pair.motion_traj.seed = scene_seed;

    const std::string content = scene::content_clause(pair.scene_spec, true);
    pair.static_prompt = PromptPair{"", content, true};
    pair.motion_prompt =
        PromptPair{traj::camera_clause(pair.motion_traj, pair.scene_spec), content, true};
    return pair;
}

namespace {

int content_class_of(const scene::SceneSpec& spec) {
    // Content classes 0..4: no mover, else kind of the first moving object.
    if (spec.moving_objects.empty()) return 0;
    return 1 + static_cast<int>(spec.moving_objects[0].kind);
}

}  // namespace

void write_video_dir(const fs::path& dir, const render::RenderedVideo& video,
                     const traj::TimedTrajectory& trajectory, const PromptPair& prompt,
                     const nlohmann::json& extra_meta) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create video dir: " + dir.string());

    char name[32];
    for (size_t k = 0; k < video.images.size(); ++k) {
        std::snprintf(name, sizeof(name), "frame_%04zu.ppm", k);
        render::write_ppm(video.images[k], (dir / name).string());
    }
    traj::save_jsonl_file(trajectory, (dir / "poses.jsonl").string());

    {
        std::ofstream out(dir / "prompt.txt", std::ios::binary);
        if (!out) throw IoError("cannot write prompt: " + dir.string());
        out << prompt.composite() << "\n";
    }

    nlohmann::json meta = extra_meta;
    meta["width"] = video.video.width;
    meta["height"] = video.video.height;
    meta["frames"] = video.video.frames;
    meta["fps"] = video.video.fps;
    meta["motion"] = traj::to_string(trajectory.kind);
    meta["virtual"] = prompt.virtual_indicator;
    std::ofstream out(dir / "meta.json", std::ios::binary);
    if (!out) throw IoError("cannot write meta: " + dir.string());
    out << meta.dump(2) << "\n";
}

render::VideoTensor load_video_dir(const fs::path& dir, double fps) {
    std::vector<render::Image> images;
    char name[32];
    for (int k = 0;; ++k) {
        std::snprintf(name, sizeof(name), "frame_%04d.ppm", k);
        const fs::path p = dir / name;
        if (!fs::exists(p)) break;
        images.push_back(render::read_ppm(p.string()));
    }
    if (images.empty()) throw MissingAsset("no frames in " + dir.string());
    return render::video_from_images(images, fps);
}

DatasetManifest build_corpus(const fs::path& root, const DatasetConfig& cfg) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create dataset root: " + root.string());

    struct Job {
        int motion_index;
        int sample_index;
        traj::MotionKind motion;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (int m = 0; m < static_cast<int>(cfg.motions.size()); ++m)
        for (int i = 0; i < cfg.n_per_motion; ++i)
            jobs.push_back({m, i, cfg.motions[static_cast<size_t>(m)],
                            sample_seed(cfg.base_seed, m, i)});

    std::vector<std::pair<ManifestEntry, ManifestEntry>> results(jobs.size());

    auto run_job = [&](const Job& job, size_t slot) {
        const SamplePair pair = build_pair(job.seed, job.motion, cfg);
        const std::string motion_name = traj::to_string(job.motion);
        const std::string index_name = std::to_string(job.sample_index);

        const nlohmann::json extra{{"seed", job.seed},
                                   {"scene", scene::to_json(pair.scene_spec)},
                                   {"content_class", content_class_of(pair.scene_spec)}};

        const render::RenderedVideo va =
            render::render_video(pair.scene_spec, pair.static_traj, 1, cfg.scene);
        const fs::path dir_a = root / "X_a" / motion_name / index_name;
        write_video_dir(dir_a, va, pair.static_traj, pair.static_prompt, extra);

        const render::RenderedVideo vc =
            render::render_video(pair.scene_spec, pair.motion_traj, 1, cfg.scene);
        const fs::path dir_c = root / "X_c" / motion_name / index_name;
        write_video_dir(dir_c, vc, pair.motion_traj, pair.motion_prompt, extra);

        const std::string rel_a = "X_a/" + motion_name + "/" + index_name;
        const std::string rel_c = "X_c/" + motion_name + "/" + index_name;
        results[slot] = {
            ManifestEntry{rel_a, "X_a", traj::to_string(traj::MotionKind::static_cam), job.seed,
                          pair.static_prompt, rel_a + "/poses.jsonl"},
            ManifestEntry{rel_c, "X_c", motion_name, job.seed, pair.motion_prompt,
                          rel_c + "/poses.jsonl"}};
    };

    int threads = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min<int>(threads, static_cast<int>(jobs.size()));
    if (threads <= 1) {
        for (size_t i = 0; i < jobs.size(); ++i) run_job(jobs[i], i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
                    run_job(jobs[i], i);
            });
        for (auto& th : pool) th.join();
    }

    DatasetManifest manifest;
    manifest.root = root;
    manifest.config = {{"frames", cfg.frames},
                       {"width", cfg.width},
                       {"height", cfg.height},
                       {"f_px", cfg.f_px},
                       {"fps", cfg.fps},
                       {"n_per_motion", cfg.n_per_motion},
                       {"base_seed", cfg.base_seed},
                       {"paired", true}};
    nlohmann::json motion_names = nlohmann::json::array();
    for (const auto m : cfg.motions) motion_names.push_back(traj::to_string(m));
    manifest.config["motions"] = motion_names;

    for (const auto& [a, c] : results) {
        manifest.entries.push_back(a);
        manifest.entries.push_back(c);
    }
    save_manifest(manifest, root / "manifest.json");
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : manifest.entries)
        entries.push_back({{"video_dir", e.video_dir},
                           {"set", e.set},
                           {"motion", e.motion},
                           {"seed", e.seed},
                           {"prompt",
                            {{"camera", e.prompt.camera_text},
                             {"content", e.prompt.content_text},
                             {"virtual", e.prompt.virtual_indicator}}},
                           {"trajectory_file", e.trajectory_file}});
    const nlohmann::json j{{"config", manifest.config}, {"entries", entries}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    out << j.dump(2) << "\n";
}

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest: " + path.string());

    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest parse failure: ") + e.what());
    }

    DatasetManifest manifest;
    manifest.root = path.parent_path();
    try {
        manifest.config = j.at("config");
        for (const auto& e : j.at("entries")) {
            ManifestEntry entry;
            entry.video_dir = e.at("video_dir");
            entry.set = e.at("set");
            entry.motion = e.at("motion");
            entry.seed = e.at("seed");
            entry.prompt.camera_text = e.at("prompt").at("camera");
            entry.prompt.content_text = e.at("prompt").at("content");
            entry.prompt.virtual_indicator = e.at("prompt").at("virtual");
            entry.trajectory_file = e.at("trajectory_file");
            manifest.entries.push_back(entry);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest schema failure: ") + e.what());
    }

    for (const auto& e : manifest.entries) {
        if (!fs::exists(manifest.root / e.video_dir))
            throw MissingAsset("manifest references missing dir: " + e.video_dir);
        if (!fs::exists(manifest.root / e.trajectory_file))
            throw MissingAsset("manifest references missing trajectory: " + e.trajectory_file);
    }
    return manifest;
}

}  // namespace camforge::data
