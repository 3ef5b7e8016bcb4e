#pragma once

// Reference implementations used only by the test suites. They are written
// for obviousness, not speed, and share no code with include/leafmetric.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

/// Plain 0/1 grid, row-major.
struct Grid {
    int w = 0;
    int h = 0;
    std::vector<int> v;

    Grid(int width, int height) : w(width), h(height), v(static_cast<std::size_t>(width * height), 0) {}

    int get(int x, int y) const {
        if (x < 0 || y < 0 || x >= w || y >= h)
            return 0;
        return v[static_cast<std::size_t>(y * w + x)];
    }
    void put(int x, int y, int value) { v[static_cast<std::size_t>(y * w + x)] = value; }
    bool operator==(const Grid&) const = default;
};

/// Flood-fill labeling, 8-connectivity, ids in raster order of first pixel.
struct FloodResult {
    std::vector<int> labels;
    std::vector<std::size_t> areas; // areas[id - 1]
};

inline FloodResult flood_fill_label(const Grid& g) {
    FloodResult r;
    r.labels.assign(g.v.size(), 0);
    int next = 0;
    for (int y = 0; y < g.h; ++y) {
        for (int x = 0; x < g.w; ++x) {
            if (!g.get(x, y) || r.labels[static_cast<std::size_t>(y * g.w + x)] != 0)
                continue;
            ++next;
            std::size_t area = 0;
            std::vector<std::pair<int, int>> stack{{x, y}};
            r.labels[static_cast<std::size_t>(y * g.w + x)] = next;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                ++area;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = cx + dx, ny = cy + dy;
                        if ((dx || dy) && g.get(nx, ny) &&
                            r.labels[static_cast<std::size_t>(ny * g.w + nx)] == 0) {
                            r.labels[static_cast<std::size_t>(ny * g.w + nx)] = next;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }
            r.areas.push_back(area);
        }
    }
    return r;
}

/// Textbook Zhang-Suen: full-image sweeps, explicit neighbour tests, copy of
/// the image per subiteration.
inline Grid zhang_suen(Grid g) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (int step = 0; step < 2; ++step) {
            Grid next = g;
            for (int y = 0; y < g.h; ++y) {
                for (int x = 0; x < g.w; ++x) {
                    if (!g.get(x, y))
                        continue;
                    int p2 = g.get(x, y - 1), p3 = g.get(x + 1, y - 1), p4 = g.get(x + 1, y);
                    int p5 = g.get(x + 1, y + 1), p6 = g.get(x, y + 1), p7 = g.get(x - 1, y + 1);
                    int p8 = g.get(x - 1, y), p9 = g.get(x - 1, y - 1);
                    int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
                    int seq[9] = {p2, p3, p4, p5, p6, p7, p8, p9, p2};
                    int a = 0;
                    for (int k = 0; k < 8; ++k)
                        if (seq[k] == 0 && seq[k + 1] == 1)
                            ++a;
                    bool c1 = step == 0 ? p2 * p4 * p6 == 0 : p2 * p4 * p8 == 0;
                    bool c2 = step == 0 ? p4 * p6 * p8 == 0 : p2 * p6 * p8 == 0;
                    if (b >= 2 && b <= 6 && a == 1 && c1 && c2) {
                        next.put(x, y, 0);
                        changed = true;
                    }
                }
            }
            g = std::move(next);
        }
    }
    return g;
}

inline std::size_t count(const Grid& g) {
    std::size_t n = 0;
    for (int v : g.v)
        n += v != 0;
    return n;
}

inline bool has_2x2_block(const Grid& g) {
    for (int y = 0; y + 1 < g.h; ++y)
        for (int x = 0; x + 1 < g.w; ++x)
            if (g.get(x, y) && g.get(x + 1, y) && g.get(x, y + 1) && g.get(x + 1, y + 1))
                return true;
    return false;
}

/// Random mask: either iid noise at a random density or a union of random
/// rectangles and disks, so both speckle and blob-like inputs are covered.
inline Grid random_grid(std::mt19937& rng) {
    std::uniform_int_distribution<int> dim(1, 64);
    Grid g(dim(rng), dim(rng));
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) {
        std::uniform_real_distribution<double> density_dist(0.05, 0.95);
        std::bernoulli_distribution fg(density_dist(rng));
        for (auto& v : g.v)
            v = fg(rng) ? 1 : 0;
    } else {
        int shapes = std::uniform_int_distribution<int>(1, 6)(rng);
        for (int s = 0; s < shapes; ++s) {
            int cx = std::uniform_int_distribution<int>(0, g.w - 1)(rng);
            int cy = std::uniform_int_distribution<int>(0, g.h - 1)(rng);
            int r = std::uniform_int_distribution<int>(1, 16)(rng);
            bool disk = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
            for (int y = 0; y < g.h; ++y)
                for (int x = 0; x < g.w; ++x) {
                    bool in = disk ? (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r
                                   : std::abs(x - cx) <= r && std::abs(y - cy) <= r / 2;
                    if (in)
                        g.put(x, y, 1);
                }
        }
    }
    return g;
}

/// Disk inclusion rule: a pixel is inside iff its centre lies within radius r
/// of (cx, cy).
inline bool disk_contains(double cx, double cy, double r, int x, int y) {
    const double dx = x + 0.5 - cx;
    const double dy = y + 0.5 - cy;
    return dx * dx + dy * dy <= r * r;
}

inline std::size_t disk_pixel_count(double cx, double cy, double r, int w, int h) {
    std::size_t n = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            n += disk_contains(cx, cy, r, x, y);
    return n;
}

} // namespace oracle
