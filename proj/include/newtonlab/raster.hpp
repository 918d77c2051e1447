#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "newtonlab/orbit.hpp"
#include "newtonlab/parallel.hpp"

namespace newtonlab {

enum class PixelKind : uint8_t { root = 0, petal = 1, cycle = 2, undecided = 3 };

struct Viewport {
    double x0 = -2, x1 = 2, y0 = -2, y1 = 2;
};

/// Per-pixel outcome labels and iteration counts over a viewport.
/// Row 0 is the top of the image (largest imaginary part).
struct BasinRaster {
    int width = 0, height = 0;
    Viewport viewport;
    std::vector<int32_t> labels; // kind << 16 | index
    std::vector<int32_t> iterations;

    static int32_t encode(PixelKind kind, int index) {
        return (int32_t(kind) << 16) | (index & 0xffff);
    }
    static PixelKind kind_of(int32_t label) { return PixelKind((label >> 16) & 0xff); }
    static int index_of(int32_t label) { return label & 0xffff; }

    cplx pixel_center(int x, int y) const {
        double px = viewport.x0 + (x + 0.5) * (viewport.x1 - viewport.x0) / width;
        double py = viewport.y1 - (y + 0.5) * (viewport.y1 - viewport.y0) / height;
        return cplx{px, py};
    }

    int32_t label_at(int x, int y) const { return labels[size_t(y) * width + x]; }

    /// nearest pixel of a plane point; (-1,-1) when outside
    std::pair<int, int> locate(cplx z) const {
        double fx = (z.real() - viewport.x0) / (viewport.x1 - viewport.x0) * width;
        double fy = (viewport.y1 - z.imag()) / (viewport.y1 - viewport.y0) * height;
        int x = static_cast<int>(fx), y = static_cast<int>(fy);
        if (x < 0 || x >= width || y < 0 || y >= height) return {-1, -1};
        return {x, y};
    }
};

struct GridOptions {
    int max_steps = 2000;
    double eps_conv = 1e-9;
    int workers = 0; // 0: automatic
};

/// Per-pixel orbit classification; deterministic for fixed inputs and
/// independent of the worker count (row-striped disjoint buffers).
inline BasinRaster classify_grid(const Dynamics& dyn, const Viewport& vp, int width, int height,
                                 const GridOptions& opt = {}) {
    if (width < 1 || height < 1)
        throw Error("DegenerateInput", "resolution must be at least 1x1");
    BasinRaster raster;
    raster.width = width;
    raster.height = height;
    raster.viewport = vp;
    raster.labels.assign(size_t(width) * height, 0);
    raster.iterations.assign(size_t(width) * height, 0);

    Dynamics grid_dyn = dyn;
    grid_dyn.opts.max_steps = opt.max_steps;
    grid_dyn.opts.eps_conv = opt.eps_conv;

    parallel_rows(height, [&](int y) {
        for (int x = 0; x < width; ++x) {
            OrbitRecord rec = iterate(grid_dyn, SpherePoint::finite(raster.pixel_center(x, y)));
            PixelKind kind = PixelKind::undecided;
            int index = 0;
            switch (rec.outcome.type) {
                case OutcomeType::converged_to:
                    kind = PixelKind::root;
                    index = rec.outcome.index;
                    break;
                case OutcomeType::petal:
                    kind = PixelKind::petal;
                    index = rec.outcome.index;
                    break;
                case OutcomeType::cycle: kind = PixelKind::cycle; break;
                default: break;
            }
            raster.labels[size_t(y) * width + x] = BasinRaster::encode(kind, index);
            raster.iterations[size_t(y) * width + x] = rec.steps;
        }
    }, opt.workers);
    return raster;
}

struct Rgb {
    uint8_t r = 0, g = 0, b = 0;
};

namespace detail {

inline Rgb hsv(double h, double s, double v) {
    h = std::fmod(std::fmod(h, 360.0) + 360.0, 360.0) / 60.0;
    int i = static_cast<int>(h);
    double f = h - i;
    double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double r, g, b;
    switch (i % 6) {
        case 0: r = v, g = t, b = p; break;
        case 1: r = q, g = v, b = p; break;
        case 2: r = p, g = v, b = t; break;
        case 3: r = p, g = q, b = v; break;
        case 4: r = t, g = p, b = v; break;
        default: r = v, g = p, b = q; break;
    }
    return {uint8_t(r * 255.0 + 0.5), uint8_t(g * 255.0 + 0.5), uint8_t(b * 255.0 + 0.5)};
}

} // namespace detail

struct RenderOptions {
    int n_roots = 1;
    int n_petals = 0;
    double shade_rate = 0.02; // color scaled by 1/(1 + rate * iterations)
    std::vector<cplx> fixed_point_overlay;
    std::vector<cplx> critical_point_overlay;
    std::vector<std::vector<cplx>> ray_overlays;
    std::vector<cplx> petal_direction_overlay; // unit chart directions at infinity
};

/// PPM (P6) bytes: evenly spaced hues for roots, a yellow band for petals,
/// undecided black; optional fixed/critical point and ray overlays.
inline std::vector<uint8_t> render(const BasinRaster& raster, const RenderOptions& opt) {
    char header[64];
    int hn = std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n", raster.width,
                           raster.height);
    std::vector<uint8_t> out(header, header + hn);
    size_t base = out.size();
    out.resize(base + size_t(raster.width) * raster.height * 3);

    for (int y = 0; y < raster.height; ++y) {
        for (int x = 0; x < raster.width; ++x) {
            int32_t label = raster.label_at(x, y);
            int32_t iters = raster.iterations[size_t(y) * raster.width + x];
            Rgb color;
            switch (BasinRaster::kind_of(label)) {
                case PixelKind::root: {
                    double hue = 360.0 * BasinRaster::index_of(label) /
                                 std::max(1, opt.n_roots);
                    color = detail::hsv(hue, 0.85, 1.0);
                    break;
                }
                case PixelKind::petal: {
                    // yellow band ramp
                    double hue = 48.0 + 14.0 * BasinRaster::index_of(label) /
                                            std::max(1, opt.n_petals);
                    color = detail::hsv(hue, 0.95, 1.0);
                    break;
                }
                case PixelKind::cycle: color = {110, 110, 110}; break;
                case PixelKind::undecided: color = {0, 0, 0}; break;
            }
            double shade = 1.0 / (1.0 + opt.shade_rate * iters);
            color.r = uint8_t(color.r * shade);
            color.g = uint8_t(color.g * shade);
            color.b = uint8_t(color.b * shade);
            size_t off = base + (size_t(y) * raster.width + x) * 3;
            out[off] = color.r;
            out[off + 1] = color.g;
            out[off + 2] = color.b;
        }
    }

    auto put = [&](int x, int y, Rgb c) {
        if (x < 0 || x >= raster.width || y < 0 || y >= raster.height) return;
        size_t off = base + (size_t(y) * raster.width + x) * 3;
        out[off] = c.r;
        out[off + 1] = c.g;
        out[off + 2] = c.b;
    };
    auto dot = [&](cplx z, int r_fill, Rgb fill, int r_ring, Rgb ring) {
        auto [cx, cy] = raster.locate(z);
        if (cx < 0) return;
        for (int dy = -r_ring; dy <= r_ring; ++dy)
            for (int dx = -r_ring; dx <= r_ring; ++dx) {
                int d2 = dx * dx + dy * dy;
                if (d2 <= r_fill * r_fill)
                    put(cx + dx, cy + dy, fill);
                else if (d2 <= r_ring * r_ring)
                    put(cx + dx, cy + dy, ring);
            }
    };

    int rdot = std::max(2, raster.width / 170);
    // attracting directions at infinity: chart direction v maps to the plane
    // direction 1/v; drawn as spokes through the outer third of the viewport
    for (cplx v : opt.petal_direction_overlay) {
        cplx dir = std::conj(v) / std::abs(v);
        double ext = 0.5 * std::max(raster.viewport.x1 - raster.viewport.x0,
                                    raster.viewport.y1 - raster.viewport.y0);
        cplx mid{0.5 * (raster.viewport.x0 + raster.viewport.x1),
                 0.5 * (raster.viewport.y0 + raster.viewport.y1)};
        int steps = 2 * std::max(raster.width, raster.height);
        for (int s = steps * 2 / 3; s <= steps; ++s) {
            auto [cx, cy] = raster.locate(mid + dir * (ext * 1.42 * s / steps));
            if (cx >= 0) put(cx, cy, {255, 255, 255});
        }
    }
    for (const auto& poly : opt.ray_overlays) {
        for (size_t i = 0; i + 1 < poly.size(); ++i) {
            // sample the segment densely enough for pixel coverage
            double len = std::abs(poly[i + 1] - poly[i]);
            double px = (raster.viewport.x1 - raster.viewport.x0) / raster.width;
            int steps = std::max(1, static_cast<int>(len / px) + 1);
            for (int s = 0; s <= steps; ++s) {
                cplx z = poly[i] + (poly[i + 1] - poly[i]) * (double(s) / steps);
                auto [cx, cy] = raster.locate(z);
                if (cx >= 0) put(cx, cy, {255, 255, 255});
            }
        }
    }
    for (cplx z : opt.critical_point_overlay) dot(z, rdot - 1, {255, 255, 255}, rdot - 1, {255, 255, 255});
    for (cplx z : opt.fixed_point_overlay) dot(z, rdot, {255, 255, 255}, rdot + 2, {0, 0, 0});
    return out;
}

inline void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error("IoError", "cannot open " + path + " for writing");
    std::fwrite(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
}

} // namespace newtonlab
