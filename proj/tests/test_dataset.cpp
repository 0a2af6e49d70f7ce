#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "camforge/dataset.hpp"

#include <filesystem>
#include <fstream>

using namespace camforge;
namespace fs = std::filesystem;

namespace {

data::DatasetConfig tiny_config() {
    data::DatasetConfig cfg;
    cfg.frames = 8;
    cfg.width = 32;
    cfg.height = 24;
    cfg.f_px = 28.0;
    cfg.n_per_motion = 2;
    cfg.motions = {traj::MotionKind::push_in, traj::MotionKind::composed};
    cfg.base_seed = 77;
    cfg.threads = 1;
    cfg.scene.min_static = 2;
    cfg.scene.max_static = 4;
    return cfg;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("camforge_" + tag + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("prompt composite rendering") {
    data::PromptPair scene_only{"", "There is a sphere.", false};
    CHECK(scene_only.composite() == "Content: There is a sphere.");
    data::PromptPair full{"The camera pushes forward.", "There is a sphere.", false};
    CHECK(full.composite() == "Camera: The camera pushes forward. | Content: There is a sphere.");
}

TEST_CASE("build_pair shares the scene and separates the trajectories") {
    const auto cfg = tiny_config();
    const data::SamplePair pair = data::build_pair(123, traj::MotionKind::composed, cfg);

    // X_a: every pose identical to frame 0.
    for (const auto& f : pair.static_traj.frames) {
        CHECK((f.pose.R - pair.static_traj.frames[0].pose.R).cwiseAbs().maxCoeff() == 0.0);
        CHECK((f.pose.t - pair.static_traj.frames[0].pose.t).norm() == 0.0);
    }
    CHECK(pair.static_traj.size() == cfg.frames);
    CHECK(pair.motion_traj.size() == cfg.frames);

    // Both prompts carry the virtual indicator; X_a has no camera clause.
    CHECK(pair.static_prompt.virtual_indicator);
    CHECK(pair.motion_prompt.virtual_indicator);
    CHECK(pair.static_prompt.camera_text.empty());
    CHECK(!pair.motion_prompt.camera_text.empty());
    CHECK(pair.static_prompt.content_text == pair.motion_prompt.content_text);
    CHECK(pair.motion_prompt.content_text.rfind("In this low-poly 3D <VIRTUAL> scene,", 0) == 0);

    // Composite prompt regenerates from (scene, trajectory) byte-identically.
    const std::string regenerated =
        "Camera: " + traj::camera_clause(pair.motion_traj, pair.scene_spec) +
        " | Content: " + scene::content_clause(pair.scene_spec, true);
    CHECK(pair.motion_prompt.composite() == regenerated);

    // Shared scene spec, byte for byte.
    const data::SamplePair again = data::build_pair(123, traj::MotionKind::composed, cfg);
    CHECK(scene::to_json(pair.scene_spec).dump() == scene::to_json(again.scene_spec).dump());
}

TEST_CASE("build_corpus writes the documented layout and counts") {
    const auto cfg = tiny_config();
    TempDir tmp("corpus");
    const data::DatasetManifest manifest = data::build_corpus(tmp.path, cfg);

    // 2 motions x 2 samples -> 4 pairs -> 8 entries.
    CHECK(manifest.entries.size() == 8);
    int n_a = 0, n_c = 0;
    for (const auto& e : manifest.entries) {
        if (e.set == "X_a") ++n_a;
        if (e.set == "X_c") ++n_c;
        CHECK(fs::exists(tmp.path / e.video_dir / "frame_0000.ppm"));
        CHECK(fs::exists(tmp.path / e.video_dir / "prompt.txt"));
        CHECK(fs::exists(tmp.path / e.video_dir / "meta.json"));
        CHECK(fs::exists(tmp.path / e.trajectory_file));
    }
    CHECK(n_a == 4);
    CHECK(n_c == 4);
    CHECK(fs::exists(tmp.path / "manifest.json"));
}

TEST_CASE("build_corpus is deterministic: byte-identical manifests") {
    const auto cfg = tiny_config();
    TempDir a("corpus_a"), b("corpus_b");
    data::build_corpus(a.path, cfg);
    data::build_corpus(b.path, cfg);

    const auto read = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(read(a.path / "manifest.json") == read(b.path / "manifest.json"));

    // Rendered bytes too, for one spot-checked pair of files.
    CHECK(read(a.path / "X_c/push_in/0/frame_0000.ppm") ==
          read(b.path / "X_c/push_in/0/frame_0000.ppm"));
}

TEST_CASE("X_a entries pair X_c entries by shared scene seed") {
    const auto cfg = tiny_config();
    TempDir tmp("corpus_pairing");
    const data::DatasetManifest manifest = data::build_corpus(tmp.path, cfg);
    std::map<std::uint64_t, int> a_seeds, c_seeds;
    for (const auto& e : manifest.entries) {
        if (e.set == "X_a") a_seeds[e.seed]++;
        if (e.set == "X_c") c_seeds[e.seed]++;
    }
    CHECK(a_seeds == c_seeds);
    for (const auto& [seed, count] : a_seeds) CHECK(count == 1);
}

TEST_CASE("X_a trajectories satisfy identity relative poses on disk") {
    const auto cfg = tiny_config();
    TempDir tmp("corpus_xa");
    const data::DatasetManifest manifest = data::build_corpus(tmp.path, cfg);
    for (const auto& e : manifest.entries) {
        if (e.set != "X_a") continue;
        const auto t = traj::load_jsonl_file((tmp.path / e.trajectory_file).string());
        for (const auto& f : t.frames) {
            const auto rel = geom::relative_pose(t.frames[0].pose, f.pose);
            CHECK((rel.R - geom::Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(rel.t.norm() < 1e-12);
        }
    }
}

TEST_CASE("load_manifest round trips and validates assets") {
    const auto cfg = tiny_config();
    TempDir tmp("corpus_load");
    const data::DatasetManifest written = data::build_corpus(tmp.path, cfg);
    const data::DatasetManifest loaded = data::load_manifest(tmp.path / "manifest.json");
    REQUIRE(loaded.entries.size() == written.entries.size());
    for (size_t i = 0; i < loaded.entries.size(); ++i) {
        CHECK(loaded.entries[i].video_dir == written.entries[i].video_dir);
        CHECK(loaded.entries[i].set == written.entries[i].set);
        CHECK(loaded.entries[i].prompt == written.entries[i].prompt);
    }

    SUBCASE("deleting a referenced directory raises MissingAsset") {
        fs::remove_all(tmp.path / written.entries[0].video_dir);
        CHECK_THROWS_AS(data::load_manifest(tmp.path / "manifest.json"), data::MissingAsset);
    }

    SUBCASE("a truncated manifest raises ParseError") {
        std::ofstream out(tmp.path / "manifest.json", std::ios::binary | std::ios::trunc);
        out << "{\"config\": {\"frames\": 8";
        out.close();
        CHECK_THROWS_AS(data::load_manifest(tmp.path / "manifest.json"), data::ParseError);
    }
}

TEST_CASE("paper-scale defaults pass config validation without rendering") {
    data::DatasetConfig cfg;
    cfg.frames = 49;
    cfg.width = 720;
    cfg.height = 480;
    cfg.n_per_motion = 500;
    cfg.motions = {traj::MotionKind::push_in, traj::MotionKind::composed,
                   traj::MotionKind::orbit};
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("sample_seed derivation is stable and collision-free on a grid") {
    std::set<std::uint64_t> seen;
    for (int m = 0; m < 8; ++m)
        for (int i = 0; i < 64; ++i) seen.insert(data::sample_seed(42, m, i));
    CHECK(seen.size() == 8 * 64);
    CHECK(data::sample_seed(42, 3, 5) == data::sample_seed(42, 3, 5));
}

TEST_CASE("load_video_dir reads back rendered frames") {
    const auto cfg = tiny_config();
    TempDir tmp("corpus_video");
    const data::DatasetManifest manifest = data::build_corpus(tmp.path, cfg);
    const auto& entry = manifest.entries[0];
    const render::VideoTensor v = data::load_video_dir(tmp.path / entry.video_dir, cfg.fps);
    CHECK(v.frames == cfg.frames);
    CHECK(v.width == cfg.width);
    CHECK(v.height == cfg.height);
}
