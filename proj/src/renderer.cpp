#include "camforge/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <thread>

namespace camforge::render {

using geom::Vec3;
using scene::Color;

namespace {

constexpr double kNearPlane = 0.05;

// Fixed directional light (world frame) and shading constants.
const Vec3 kLightDir = Vec3(0.5, 1.0, 0.3).normalized();
constexpr double kAmbient = 0.35;
constexpr double kDiffuse = 0.65;

constexpr Color kSky{0.53, 0.81, 0.92};
constexpr Color kSkyMountains{0.62, 0.78, 0.90};

struct FloorTones {
    Color a, b;
};

FloorTones floor_tones(scene::FloorTexture f) {
    switch (f) {
        case scene::FloorTexture::brick_stone: return {{0.55, 0.42, 0.38}, {0.48, 0.46, 0.45}};
        case scene::FloorTexture::black_sand: return {{0.16, 0.15, 0.16}, {0.22, 0.21, 0.22}};
        case scene::FloorTexture::green_grass: return {{0.25, 0.55, 0.25}, {0.30, 0.62, 0.28}};
        case scene::FloorTexture::brown_ground: return {{0.45, 0.33, 0.22}, {0.52, 0.38, 0.26}};
        case scene::FloorTexture::yellow_grass: return {{0.72, 0.66, 0.30}, {0.78, 0.72, 0.36}};
        default: return {{0.52, 0.72, 0.42}, {0.58, 0.78, 0.48}};  // light_green_grass
    }
}

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

// --- mesh builders -------------------------------------------------------

void add_tri(Mesh& m, int a, int b, int c, const Color& color) {
    m.triangles.push_back({a, b, c});
    m.colors.push_back(color);
}

Mesh make_cube(const Color& color) {
    Mesh m;
    // Unit cube, base at y=0, footprint [-0.5, 0.5]^2.
    for (int i = 0; i < 8; ++i)
        m.vertices.emplace_back((i & 1) ? 0.5 : -0.5, (i & 2) ? 1.0 : 0.0, (i & 4) ? 0.5 : -0.5);
    const int f[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 4, 6, 2},
                         {1, 3, 7, 5}, {2, 6, 7, 3}, {0, 1, 5, 4}};
    for (const auto& q : f) {
        add_tri(m, q[0], q[1], q[2], color);
        add_tri(m, q[0], q[2], q[3], color);
    }
    return m;
}

Mesh make_icosphere(int subdivisions, const Color& color, double squash_y = 1.0) {
    // Icosahedron, subdivided and projected back to the unit sphere; centered
    // at y=0.5 with radius 0.5 so the base touches y=0.
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                               {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                               {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& v : verts) v.normalize();
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoints;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoints.find(key);
            if (it != midpoints.end()) return it->second;
            verts.push_back(((verts[a] + verts[b]) / 2.0).normalized());
            const int idx = static_cast<int>(verts.size()) - 1;
            midpoints[key] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        for (const auto& f : faces) {
            const int ab = midpoint(f[0], f[1]);
            const int bc = midpoint(f[1], f[2]);
            const int ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    Mesh m;
    for (const auto& v : verts)
        m.vertices.emplace_back(0.5 * v.x(), 0.5 + 0.5 * squash_y * v.y(), 0.5 * v.z());
    for (const auto& f : faces) add_tri(m, f[0], f[1], f[2], color);
    return m;
}

Mesh make_prism(int sides, double radius, double height, double y0, const Color& color) {
    Mesh m;
    for (int i = 0; i < sides; ++i) {
        const double a = 2.0 * M_PI * i / sides;
        m.vertices.emplace_back(radius * std::cos(a), y0, radius * std::sin(a));
        m.vertices.emplace_back(radius * std::cos(a), y0 + height, radius * std::sin(a));
    }
    const int bc = static_cast<int>(m.vertices.size());
    m.vertices.emplace_back(0, y0, 0);
    const int tc = bc + 1;
    m.vertices.emplace_back(0, y0 + height, 0);
    for (int i = 0; i < sides; ++i) {
        const int j = (i + 1) % sides;
        add_tri(m, 2 * i, 2 * j, 2 * i + 1, color);
        add_tri(m, 2 * j, 2 * j + 1, 2 * i + 1, color);
        add_tri(m, 2 * j, 2 * i, bc, color);      // bottom cap
        add_tri(m, 2 * i + 1, 2 * j + 1, tc, color);  // top cap
    }
    return m;
}

Mesh make_cone(int sides, double radius, double height, double y0, const Color& color) {
    Mesh m;
    for (int i = 0; i < sides; ++i) {
        const double a = 2.0 * M_PI * i / sides;
        m.vertices.emplace_back(radius * std::cos(a), y0, radius * std::sin(a));
    }
    const int apex = static_cast<int>(m.vertices.size());
    m.vertices.emplace_back(0, y0 + height, 0);
    const int base = apex + 1;
    m.vertices.emplace_back(0, y0, 0);
    for (int i = 0; i < sides; ++i) {
        const int j = (i + 1) % sides;
        add_tri(m, i, j, apex, color);
        add_tri(m, j, i, base, color);
    }
    return m;
}

void merge(Mesh& dst, const Mesh& src) {
    const int offset = static_cast<int>(dst.vertices.size());
    dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
    for (size_t i = 0; i < src.triangles.size(); ++i) {
        dst.triangles.push_back({src.triangles[i][0] + offset, src.triangles[i][1] + offset,
                                 src.triangles[i][2] + offset});
        dst.colors.push_back(src.colors[i]);
    }
}

Mesh make_tree() {
    const Color trunk{0.42, 0.28, 0.15};
    const Color crown{0.18, 0.45, 0.20};
    Mesh m = make_prism(6, 0.1, 0.4, 0.0, trunk);
    merge(m, make_cone(8, 0.45, 1.0, 0.35, crown));
    return m;
}

Mesh make_grass_tuft() {
    const Color blade{0.45, 0.65, 0.25};
    Mesh m = make_cone(4, 0.08, 0.35, 0.0, blade);
    Mesh b = make_cone(4, 0.07, 0.28, 0.0, blade);
    for (auto& v : b.vertices) v += Vec3(0.12, 0, 0.05);
    merge(m, b);
    Mesh c = make_cone(4, 0.06, 0.30, 0.0, blade);
    for (auto& v : c.vertices) v += Vec3(-0.08, 0, -0.10);
    merge(m, c);
    return m;
}

// Far/near mountain ridgelines: rings of large triangles at fixed radii with
// a fixed per-peak height pattern (independent of the scene seed).
Mesh make_ridge(double radius, double base_height, double spread, const Color& color, int peaks) {
    Mesh m;
    for (int i = 0; i < peaks; ++i) {
        const double a0 = 2.0 * M_PI * i / peaks;
        const double a1 = 2.0 * M_PI * (i + 1) / peaks;
        const double am = 0.5 * (a0 + a1);
        // Deterministic pseudo-variation from the peak index.
        const double h = base_height + spread * (0.5 + 0.5 * std::sin(i * 2.39996));
        const int base = static_cast<int>(m.vertices.size());
        m.vertices.emplace_back(radius * std::cos(a0), 0.0, radius * std::sin(a0));
        m.vertices.emplace_back(radius * std::cos(a1), 0.0, radius * std::sin(a1));
        m.vertices.emplace_back(radius * std::cos(am), h, radius * std::sin(am));
        // Double-sided so the ring shades consistently from inside.
        add_tri(m, base, base + 1, base + 2, color);
        add_tri(m, base + 1, base, base + 2, color);
    }
    return m;
}

const Mesh& floor_mesh(scene::FloorTexture f, double arena_half) {
    // 8x8 checker grid; two alternating tones per floor texture.
    static std::map<std::pair<int, double>, Mesh> cache;
    const auto key = std::make_pair(static_cast<int>(f), arena_half);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const FloorTones tones = floor_tones(f);
    Mesh m;
    const int cells = 8;
    const double step = 2.0 * arena_half / cells;
    for (int i = 0; i < cells; ++i) {
        for (int j = 0; j < cells; ++j) {
            const double x0 = -arena_half + i * step;
            const double z0 = -arena_half + j * step;
            const Color& c = ((i + j) % 2 == 0) ? tones.a : tones.b;
            const int base = static_cast<int>(m.vertices.size());
            m.vertices.emplace_back(x0, 0, z0);
            m.vertices.emplace_back(x0 + step, 0, z0);
            m.vertices.emplace_back(x0 + step, 0, z0 + step);
            m.vertices.emplace_back(x0, 0, z0 + step);
            add_tri(m, base, base + 2, base + 1, c);
            add_tri(m, base, base + 3, base + 2, c);
        }
    }
    return cache.emplace(key, std::move(m)).first->second;
}

}  // namespace

void Mesh::append_to(std::vector<Triangle>& out, const Vec3& translate, double scale) const {
    for (size_t i = 0; i < triangles.size(); ++i) {
        const auto& t = triangles[i];
        out.push_back({translate + scale * vertices[static_cast<size_t>(t[0])],
                       translate + scale * vertices[static_cast<size_t>(t[1])],
                       translate + scale * vertices[static_cast<size_t>(t[2])], colors[i]});
    }
}

const Mesh& unit_mesh(scene::MovingKind kind) {
    // Subdivision 3 keeps the silhouette within ~0.4% of a true sphere,
    // which the dolly-zoom constancy checks rely on.
    static const Mesh sphere = make_icosphere(3, Color{1, 1, 1});
    static const Mesh cube = make_cube(Color{1, 1, 1});
    static const Mesh polygon = make_prism(5, 0.5, 1.0, 0.0, Color{1, 1, 1});
    static const Mesh cylinder = make_prism(12, 0.5, 1.0, 0.0, Color{1, 1, 1});
    switch (kind) {
        case scene::MovingKind::sphere: return sphere;
        case scene::MovingKind::cube: return cube;
        case scene::MovingKind::polygon: return polygon;
        default: return cylinder;
    }
}

const Mesh& unit_mesh(scene::StaticKind kind) {
    static const Mesh tree = make_tree();
    static const Mesh bush = make_icosphere(0, Color{0.25, 0.50, 0.22}, 0.7);
    static const Mesh grass = make_grass_tuft();
    switch (kind) {
        case scene::StaticKind::tree: return tree;
        case scene::StaticKind::bush: return bush;
        default: return grass;
    }
}

scene::Color sky_color(scene::Background b) {
    return b == scene::Background::sky ? kSky : kSkyMountains;
}

std::vector<Triangle> build_frame_triangles(const scene::SceneSpec& spec, int frame_index,
                                            double fps, const scene::SceneConfig& config) {
    std::vector<Triangle> tris;
    const double t = frame_index / fps;

    floor_mesh(spec.floor, config.arena_half).append_to(tris, Vec3::Zero(), 1.0);

    static const Mesh far_ridge = make_ridge(180.0, 24.0, 16.0, Color{0.55, 0.60, 0.70}, 26);
    static const Mesh near_ridge = make_ridge(110.0, 14.0, 10.0, Color{0.42, 0.48, 0.55}, 20);
    if (spec.background == scene::Background::far_mountains ||
        spec.background == scene::Background::both_mountains)
        far_ridge.append_to(tris, Vec3::Zero(), 1.0);
    if (spec.background == scene::Background::closer_mountains ||
        spec.background == scene::Background::both_mountains)
        near_ridge.append_to(tris, Vec3::Zero(), 1.0);

    for (const auto& obj : spec.static_objects)
        unit_mesh(obj.kind).append_to(tris, obj.position, obj.scale);

    for (const auto& obj : spec.moving_objects) {
        const Vec3 pos = scene::position_at(obj, t, config);
        const Mesh& base = unit_mesh(obj.kind);
        const size_t first = tris.size();
        base.append_to(tris, pos, obj.scale);
        for (size_t i = first; i < tris.size(); ++i) tris[i].color = obj.color;
    }
    return tris;
}

namespace {

struct ProjectedVertex {
    double u, v, inv_depth;
};

ProjectedVertex project_camera_point(const geom::Intrinsics& intr, const Vec3& pc) {
    const double depth = -pc.z();
    return {intr.cx + intr.f_px * pc.x() / depth, intr.cy - intr.f_px * pc.y() / depth,
            1.0 / depth};
}

void rasterize_triangle(const ProjectedVertex& a, const ProjectedVertex& b,
                        const ProjectedVertex& c, const Color& shaded, Image& img,
                        std::vector<double>& zbuf) {
    const double area = (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
    if (std::abs(area) < 1e-12) return;

    // Consistent winding regardless of facing; colors are flat so only the
    // depth ordering matters.
    const ProjectedVertex& v1 = a;
    const ProjectedVertex& v2 = (area > 0) ? b : c;
    const ProjectedVertex& v3 = (area > 0) ? c : b;
    const double inv_area = 1.0 / std::abs(area);

    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({v1.u, v2.u, v3.u}))));
    const int x1 = std::min(img.width - 1,
                            static_cast<int>(std::ceil(std::max({v1.u, v2.u, v3.u}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({v1.v, v2.v, v3.v}))));
    const int y1 = std::min(img.height - 1,
                            static_cast<int>(std::ceil(std::max({v1.v, v2.v, v3.v}))));

    for (int y = y0; y <= y1; ++y) {
        const double py = y + 0.5;
        for (int x = x0; x <= x1; ++x) {
            const double px = x + 0.5;
            const double w1 = (v3.u - v2.u) * (py - v2.v) - (v3.v - v2.v) * (px - v2.u);
            const double w2 = (v1.u - v3.u) * (py - v3.v) - (v1.v - v3.v) * (px - v3.u);
            const double w3 = (v2.u - v1.u) * (py - v1.v) - (v2.v - v1.v) * (px - v1.u);
            if (w1 < 0 || w2 < 0 || w3 < 0) continue;
            const double l1 = w1 * inv_area;
            const double l2 = w2 * inv_area;
            const double l3 = w3 * inv_area;
            // 1/depth interpolates linearly in screen space.
            const double inv_z = l1 * v1.inv_depth + l2 * v2.inv_depth + l3 * v3.inv_depth;
            double& zref = zbuf[static_cast<size_t>(y) * img.width + x];
            if (inv_z > zref) {
                zref = inv_z;
                std::uint8_t* px8 = img.at(x, y);
                px8[0] = to_byte(shaded.r);
                px8[1] = to_byte(shaded.g);
                px8[2] = to_byte(shaded.b);
            }
        }
    }
}

Image render_impl(const scene::SceneSpec& spec, const geom::CameraPose& pose,
                  const geom::Intrinsics& intr, int frame_index, const RenderOptions& options,
                  std::vector<float>* depth_out) {
    Image img;
    img.width = intr.width;
    img.height = intr.height;
    img.rgb.resize(static_cast<size_t>(intr.width) * intr.height * 3);

    const Color sky = sky_color(spec.background);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            std::uint8_t* px = img.at(x, y);
            px[0] = to_byte(sky.r);
            px[1] = to_byte(sky.g);
            px[2] = to_byte(sky.b);
        }

    std::vector<double> zbuf(static_cast<size_t>(img.width) * img.height, 0.0);

    const std::vector<Triangle> tris =
        build_frame_triangles(spec, frame_index, options.fps, options.scene_config);

    for (const Triangle& tri : tris) {
        // World-space flat shading, two-sided so winding never darkens a face.
        const Vec3 n = (tri.b - tri.a).cross(tri.c - tri.a);
        const double nn = n.norm();
        if (nn < 1e-15) continue;
        const double lambert = std::abs(n.dot(kLightDir)) / nn;
        const double shade = kAmbient + kDiffuse * lambert;
        const Color shaded{tri.color.r * shade, tri.color.g * shade, tri.color.b * shade};

        // Clip against the near plane (depth >= kNearPlane) in camera space.
        std::array<Vec3, 4> poly;
        int n_poly = 0;
        const std::array<Vec3, 3> cam = {pose.R * tri.a + pose.t, pose.R * tri.b + pose.t,
                                         pose.R * tri.c + pose.t};
        for (int i = 0; i < 3; ++i) {
            const Vec3& cur = cam[static_cast<size_t>(i)];
            const Vec3& nxt = cam[static_cast<size_t>((i + 1) % 3)];
            const double dc = -cur.z() - kNearPlane;
            const double dn = -nxt.z() - kNearPlane;
            if (dc >= 0) poly[n_poly++] = cur;
            if ((dc >= 0) != (dn >= 0)) {
                const double s = dc / (dc - dn);
                poly[n_poly++] = cur + s * (nxt - cur);
            }
        }
        if (n_poly < 3) continue;

        std::array<ProjectedVertex, 4> proj;
        for (int i = 0; i < n_poly; ++i) proj[i] = project_camera_point(intr, poly[i]);
        for (int i = 1; i + 1 < n_poly; ++i)
            rasterize_triangle(proj[0], proj[i], proj[i + 1], shaded, img, zbuf);
    }

    if (depth_out) {
        depth_out->resize(zbuf.size());
        for (size_t i = 0; i < zbuf.size(); ++i)
            (*depth_out)[i] = zbuf[i] > 0 ? static_cast<float>(1.0 / zbuf[i]) : 0.0f;
    }
    return img;
}

}  // namespace

Image render_frame(const scene::SceneSpec& spec, const geom::CameraPose& pose,
                   const geom::Intrinsics& intr, int frame_index, const RenderOptions& options) {
    return render_impl(spec, pose, intr, frame_index, options, nullptr);
}

Image render_frame_depth(const scene::SceneSpec& spec, const geom::CameraPose& pose,
                         const geom::Intrinsics& intr, int frame_index,
                         std::vector<float>& depth_out, const RenderOptions& options) {
    return render_impl(spec, pose, intr, frame_index, options, &depth_out);
}

RenderedVideo render_video(const scene::SceneSpec& spec, const traj::TimedTrajectory& trajectory,
                           int threads, const scene::SceneConfig& config) {
    const int K = trajectory.size();
    if (K < 1) throw std::invalid_argument("render_video: empty trajectory");
    if (threads <= 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, K);

    RenderOptions options;
    options.fps = trajectory.fps;
    options.scene_config = config;

    RenderedVideo out;
    out.images.resize(static_cast<size_t>(K));
    out.pose_records = trajectory.frames;

    auto worker = [&](int first, int last) {
        for (int k = first; k < last; ++k) {
            const auto& f = trajectory.frames[static_cast<size_t>(k)];
            out.images[static_cast<size_t>(k)] = render_frame(spec, f.pose, f.intr, k, options);
        }
    };

    if (threads == 1) {
        worker(0, K);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (K + threads - 1) / threads;
        for (int i = 0; i < threads; ++i) {
            const int first = i * chunk;
            const int last = std::min(K, first + chunk);
            if (first < last) pool.emplace_back(worker, first, last);
        }
        for (auto& th : pool) th.join();
    }

    out.video = video_from_images(out.images, trajectory.fps);
    return out;
}

VideoTensor video_from_images(const std::vector<Image>& images, double fps) {
    if (images.empty()) throw std::invalid_argument("video_from_images: no frames");
    VideoTensor v = VideoTensor::zeros(static_cast<int>(images.size()), images[0].height,
                                       images[0].width, 3, fps);
    size_t idx = 0;
    for (const auto& img : images) {
        if (img.width != v.width || img.height != v.height)
            throw std::invalid_argument("video_from_images: frame dimensions differ");
        for (const std::uint8_t b : img.rgb)
            v.data[idx++] = static_cast<float>(b) / 255.0f * 2.0f - 1.0f;
    }
    return v;
}

Image image_from_video_frame(const VideoTensor& video, int k) {
    Image img;
    img.width = video.width;
    img.height = video.height;
    img.rgb.resize(static_cast<size_t>(video.width) * video.height * 3);
    size_t idx = 0;
    for (int y = 0; y < video.height; ++y)
        for (int x = 0; x < video.width; ++x)
            for (int c = 0; c < 3; ++c)
                img.rgb[idx++] = to_byte((video.at(k, y, x, std::min(c, video.channels - 1)) +
                                          1.0) / 2.0);
    return img;
}

void write_ppm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.rgb.data()),
              static_cast<std::streamsize>(img.rgb.size()));
}

Image read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6") throw std::runtime_error("not a P6 ppm: " + path);
    int w, h, maxval;
    in >> w >> h >> maxval;
    if (maxval != 255) throw std::runtime_error("unsupported ppm maxval");
    in.get();  // single whitespace after header
    Image img;
    img.width = w;
    img.height = h;
    img.rgb.resize(static_cast<size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
    if (!in) throw std::runtime_error("truncated ppm: " + path);
    return img;
}

void write_pfm(const std::vector<float>& depth, int width, int height, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "Pf\n" << width << " " << height << "\n-1.0\n";
    // PFM rows run bottom-to-top.
    for (int y = height - 1; y >= 0; --y)
        out.write(reinterpret_cast<const char*>(depth.data() + static_cast<size_t>(y) * width),
                  static_cast<std::streamsize>(sizeof(float) * width));
}

}  // namespace camforge::render
