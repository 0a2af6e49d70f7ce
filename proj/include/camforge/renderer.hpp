#pragma once

#include "camforge/geometry.hpp"
#include "camforge/scene.hpp"
#include "camforge/trajectory.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace camforge::render {

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

    const std::uint8_t* at(int x, int y) const {
        return rgb.data() + 3 * (static_cast<size_t>(y) * width + x);
    }
    std::uint8_t* at(int x, int y) {
        return rgb.data() + 3 * (static_cast<size_t>(y) * width + x);
    }
    bool operator==(const Image&) const = default;
};

// K x H x W x C frame stack; float values in [-1, 1] in memory, 8-bit in files.
struct VideoTensor {
    int frames = 0;
    int height = 0;
    int width = 0;
    int channels = 3;
    double fps = 12.0;
    std::vector<float> data;

    static VideoTensor zeros(int K, int H, int W, int C = 3, double fps = 12.0) {
        VideoTensor v;
        v.frames = K;
        v.height = H;
        v.width = W;
        v.channels = C;
        v.fps = fps;
        v.data.assign(static_cast<size_t>(K) * H * W * C, 0.0f);
        return v;
    }

    size_t index(int k, int y, int x, int c) const {
        return ((static_cast<size_t>(k) * height + y) * width + x) * channels + c;
    }
    float at(int k, int y, int x, int c) const { return data[index(k, y, x, c)]; }
    float& at(int k, int y, int x, int c) { return data[index(k, y, x, c)]; }

    size_t pixels_per_frame() const { return static_cast<size_t>(height) * width * channels; }
};

VideoTensor video_from_images(const std::vector<Image>& images, double fps);
Image image_from_video_frame(const VideoTensor& video, int k);

// Flat-shaded triangle soup; colors per triangle.
struct Triangle {
    geom::Vec3 a, b, c;
    scene::Color color;
};

struct Mesh {
    std::vector<geom::Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<scene::Color> colors;  // one per triangle

    void append_to(std::vector<Triangle>& out, const geom::Vec3& translate, double scale) const;
};

// Unit meshes (base at y=0, unit footprint) used by the scene builder; also
// handy for tests.
const Mesh& unit_mesh(scene::MovingKind kind);
const Mesh& unit_mesh(scene::StaticKind kind);

// World-space triangle soup for one frame; moving objects evaluated at
// time = frame_index / fps.
std::vector<Triangle> build_frame_triangles(const scene::SceneSpec& spec, int frame_index,
                                            double fps, const scene::SceneConfig& config = {});

struct RenderOptions {
    double fps = 12.0;  // drives moving-object positions in render_frame
    scene::SceneConfig scene_config = {};
    bool with_depth = false;
};

// Deterministic rasterization: perspective projection, z-buffer, flat shading
// with one directional light plus an ambient term.
Image render_frame(const scene::SceneSpec& spec, const geom::CameraPose& pose,
                   const geom::Intrinsics& intr, int frame_index,
                   const RenderOptions& options = {});

Image render_frame_depth(const scene::SceneSpec& spec, const geom::CameraPose& pose,
                         const geom::Intrinsics& intr, int frame_index,
                         std::vector<float>& depth_out, const RenderOptions& options = {});

struct RenderedVideo {
    VideoTensor video;
    std::vector<Image> images;
    std::vector<traj::Frame> pose_records;  // equals the trajectory bit-exactly
};

// One frame per trajectory entry; frames render in parallel across `threads`
// workers with output bytes independent of the thread count.
RenderedVideo render_video(const scene::SceneSpec& spec, const traj::TimedTrajectory& trajectory,
                           int threads = 0, const scene::SceneConfig& config = {});

scene::Color sky_color(scene::Background b);

void write_ppm(const Image& img, const std::string& path);
Image read_ppm(const std::string& path);
// Grayscale PFM, little-endian (scale header -1.0).
void write_pfm(const std::vector<float>& depth, int width, int height, const std::string& path);

}  // namespace camforge::render
