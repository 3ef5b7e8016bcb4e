#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "leafmetric/segmentation.hpp"

namespace leafmetric {

/// Partition of a mask's foreground into 8-connected objects. Label 0 is
/// background; objects are numbered 1..count() in raster order of their first
/// pixel.
class LabeledComponents {
public:
    LabeledComponents(std::size_t width, std::size_t height, std::vector<std::uint32_t> labels,
                      std::vector<std::size_t> areas)
        : width_(width), height_(height), labels_(std::move(labels)), areas_(std::move(areas)) {}

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t count() const noexcept { return areas_.size(); }

    std::uint32_t label(std::size_t x, std::size_t y) const noexcept {
        return labels_[y * width_ + x];
    }
    std::span<const std::uint32_t> labels() const noexcept { return labels_; }

    /// Pixel count of object `id` (1-based).
    std::size_t area(std::uint32_t id) const noexcept { return areas_[id - 1]; }
    std::span<const std::size_t> areas() const noexcept { return areas_; }

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint32_t> labels_;
    std::vector<std::size_t> areas_;
};

namespace detail {

class DisjointSets {
public:
    std::uint32_t make() {
        parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
        return parent_.back();
    }

    std::uint32_t find(std::uint32_t x) {
        std::uint32_t root = x;
        while (parent_[root] != root)
            root = parent_[root];
        while (parent_[x] != root)
            x = std::exchange(parent_[x], root);
        return root;
    }

    void join(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b)
            parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::uint32_t> parent_;
};

} // namespace detail

/// Two-pass labeling with union-find over the already-visited half of the
/// 8-neighbourhood (W, NW, N, NE).
inline LabeledComponents label_components(const BinaryMask& mask) {
    const std::size_t w = mask.width();
    const std::size_t h = mask.height();
    constexpr std::uint32_t none = 0xffffffffu;
    std::vector<std::uint32_t> provisional(w * h, none);
    detail::DisjointSets sets;

    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            if (!mask(x, y))
                continue;
            std::uint32_t current = none;
            auto visit = [&](std::size_t nx, std::size_t ny) {
                const std::uint32_t l = provisional[ny * w + nx];
                if (l == none)
                    return;
                if (current == none)
                    current = l;
                else
                    sets.join(current, l);
            };
            if (x > 0)
                visit(x - 1, y);
            if (y > 0) {
                if (x > 0)
                    visit(x - 1, y - 1);
                visit(x, y - 1);
                if (x + 1 < w)
                    visit(x + 1, y - 1);
            }
            provisional[y * w + x] = current == none ? sets.make() : current;
        }
    }

    // Roots get final ids in the order they are first met, i.e. raster order
    // of each component's first pixel.
    std::vector<std::uint32_t> labels(w * h, 0);
    std::vector<std::uint32_t> root_to_id;
    std::vector<std::size_t> areas;
    for (std::size_t i = 0; i < provisional.size(); ++i) {
        if (provisional[i] == none)
            continue;
        const std::uint32_t root = sets.find(provisional[i]);
        if (root >= root_to_id.size())
            root_to_id.resize(root + 1, 0);
        if (root_to_id[root] == 0) {
            areas.push_back(0);
            root_to_id[root] = static_cast<std::uint32_t>(areas.size());
        }
        const std::uint32_t id = root_to_id[root];
        labels[i] = id;
        ++areas[id - 1];
    }
    return LabeledComponents(w, h, std::move(labels), std::move(areas));
}

/// Keeps every object whose area is at least `min_area`.
inline BinaryMask remove_small_components(const LabeledComponents& lc, std::size_t min_area) {
    BinaryMask out(lc.width(), lc.height());
    const auto labels = lc.labels();
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != 0 && lc.area(labels[i]) >= min_area)
            out.set(i, true);
    return out;
}

inline std::size_t count_foreground(const BinaryMask& mask) noexcept {
    const auto bits = mask.bits();
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

namespace detail {

// Neighbourhood code: bit k set when neighbour P(k+2) is foreground, with
// P2 = N, P3 = NE, P4 = E, P5 = SE, P6 = S, P7 = SW, P8 = W, P9 = NW.
constexpr bool neighbour(unsigned code, int p) noexcept { return (code >> (p - 2)) & 1u; }

constexpr int foreground_neighbours(unsigned code) noexcept { return std::popcount(code); }

/// Number of 0 -> 1 transitions walking P2, P3, ..., P9, P2.
constexpr int crossing_number(unsigned code) noexcept {
    int transitions = 0;
    for (int p = 2; p <= 9; ++p) {
        const int next = p == 9 ? 2 : p + 1;
        if (!neighbour(code, p) && neighbour(code, next))
            ++transitions;
    }
    return transitions;
}

using ThinningTable = std::array<bool, 256>;

constexpr ThinningTable make_zhang_suen_table(int subiteration) {
    ThinningTable table{};
    for (unsigned code = 0; code < 256; ++code) {
        const int b = foreground_neighbours(code);
        if (b < 2 || b > 6 || crossing_number(code) != 1)
            continue;
        const bool p2 = neighbour(code, 2), p4 = neighbour(code, 4);
        const bool p6 = neighbour(code, 6), p8 = neighbour(code, 8);
        table[code] = subiteration == 0 ? !(p2 && p4 && p6) && !(p4 && p6 && p8)
                                        : !(p2 && p4 && p8) && !(p2 && p6 && p8);
    }
    return table;
}

inline constexpr std::array<ThinningTable, 2> zhang_suen_tables = {make_zhang_suen_table(0),
                                                                   make_zhang_suen_table(1)};

/// Mask copy with a one-pixel background border so every neighbourhood read
/// is in range.
class PaddedMask {
public:
    explicit PaddedMask(const BinaryMask& mask)
        : w_(mask.width() + 2), h_(mask.height() + 2), bits_(w_ * h_, 0) {
        for (std::size_t y = 0; y < mask.height(); ++y)
            for (std::size_t x = 0; x < mask.width(); ++x)
                bits_[(y + 1) * w_ + x + 1] = mask(x, y) ? 1 : 0;
    }

    std::size_t stride() const noexcept { return w_; }
    std::size_t size() const noexcept { return bits_.size(); }
    bool fg(std::size_t i) const noexcept { return bits_[i] != 0; }
    void clear(std::size_t i) noexcept { bits_[i] = 0; }

    // Valid for interior indices only.
    unsigned code(std::size_t i) const noexcept {
        const std::uint8_t* c = bits_.data() + i;
        const std::size_t s = w_;
        return unsigned{c[-static_cast<std::ptrdiff_t>(s)]} |
               (unsigned{c[1 - static_cast<std::ptrdiff_t>(s)]} << 1) | (unsigned{c[1]} << 2) |
               (unsigned{c[s + 1]} << 3) | (unsigned{c[s]} << 4) | (unsigned{c[s - 1]} << 5) |
               (unsigned{c[-1]} << 6) | (unsigned{c[-1 - static_cast<std::ptrdiff_t>(s)]} << 7);
    }

    std::array<std::size_t, 8> neighbours(std::size_t i) const noexcept {
        const std::size_t s = w_;
        return {i - s, i - s + 1, i + 1, i + s + 1, i + s, i + s - 1, i - 1, i - s - 1};
    }

    BinaryMask unpad() const {
        BinaryMask out(w_ - 2, h_ - 2);
        for (std::size_t y = 0; y + 2 < h_; ++y)
            for (std::size_t x = 0; x + 2 < w_; ++x)
                out.set(x, y, bits_[(y + 1) * w_ + x + 1] != 0);
        return out;
    }

private:
    std::size_t w_;
    std::size_t h_;
    std::vector<std::uint8_t> bits_;
};

/// Runs Zhang-Suen until a full pass (both subiterations) deletes nothing.
/// Each subiteration decides on the pre-subiteration state, so the result does
/// not depend on visiting order. Returns whether anything was deleted.
///
/// Only pixels touching the background can ever be deleted (B <= 6), so the
/// scan is restricted to a candidate list that grows as deletions expose new
/// border pixels.
inline bool zhang_suen_in_place(PaddedMask& img) {
    std::vector<std::uint8_t> queued(img.size(), 0);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (img.fg(i) && foreground_neighbours(img.code(i)) < 8) {
            candidates.push_back(i);
            queued[i] = 1;
        }
    }

    bool any = false;
    std::vector<std::size_t> doomed;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& table : zhang_suen_tables) {
            doomed.clear();
            for (std::size_t i : candidates)
                if (table[img.code(i)])
                    doomed.push_back(i);
            if (doomed.empty())
                continue;
            changed = any = true;
            for (std::size_t i : doomed) {
                img.clear(i);
                queued[i] = 0;
            }
            std::erase_if(candidates, [&](std::size_t i) { return !img.fg(i); });
            for (std::size_t i : doomed) {
                for (std::size_t n : img.neighbours(i)) {
                    if (img.fg(n) && !queued[n]) {
                        queued[n] = 1;
                        candidates.push_back(n);
                    }
                }
            }
        }
    }
    return any;
}

struct RingOffset {
    int dx;
    int dy;
};

// Same order as the neighbourhood code bits: N, NE, E, SE, S, SW, W, NW.
inline constexpr std::array<RingOffset, 8> ring = {
    {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};

/// Yokoi connectivity number for 8-connected foreground. A pixel with value 1
/// can be deleted without changing the number of objects or holes.
constexpr int yokoi_c8(unsigned code) noexcept {
    // Yokoi walks E, NE, N, NW, W, SW, S, SE; map onto our bit order.
    constexpr int order[8] = {4, 3, 2, 9, 8, 7, 6, 5};
    int x[9]{};
    for (int k = 0; k < 8; ++k)
        x[k] = neighbour(code, order[k]) ? 0 : 1; // complemented
    x[8] = x[0];
    int c = 0;
    for (int k = 0; k < 8; k += 2)
        c += x[k] - x[k] * x[k + 1] * x[(k + 2) % 8];
    return c;
}

/// True when the foreground neighbours form a single 8-connected group inside
/// the ring, i.e. deleting the centre cannot split an object.
constexpr bool ring_connected(unsigned code) noexcept {
    unsigned seen = 0;
    int groups = 0;
    for (int start = 0; start < 8; ++start) {
        if (!((code >> start) & 1u) || ((seen >> start) & 1u))
            continue;
        ++groups;
        int stack[8]{};
        int top = 0;
        stack[top++] = start;
        seen |= 1u << start;
        while (top > 0) {
            const int a = stack[--top];
            for (int b = 0; b < 8; ++b) {
                const int ddx = ring[a].dx - ring[b].dx;
                const int ddy = ring[a].dy - ring[b].dy;
                const bool adjacent = ddx >= -1 && ddx <= 1 && ddy >= -1 && ddy <= 1;
                if (((code >> b) & 1u) && !((seen >> b) & 1u) && adjacent) {
                    seen |= 1u << b;
                    stack[top++] = b;
                }
            }
        }
    }
    return groups == 1;
}

inline bool in_2x2_block(const PaddedMask& img, std::size_t i) noexcept {
    const unsigned c = img.code(i);
    auto all = [c](int a, int b, int d) {
        return neighbour(c, a) && neighbour(c, b) && neighbour(c, d);
    };
    return all(2, 3, 4) || all(4, 5, 6) || all(6, 7, 8) || all(8, 9, 2);
}

enum class BlockRule { Simple, KeepsConnected, Any };

/// One sequential raster sweep deleting 2x2-block pixels allowed by `rule`.
/// For BlockRule::Any at most one pixel per block goes (the first met).
inline bool sweep_blocks(PaddedMask& img, BlockRule rule) {
    bool changed = false;
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (!img.fg(i) || !in_2x2_block(img, i))
            continue;
        const unsigned c = img.code(i);
        const bool remove = rule == BlockRule::Simple           ? yokoi_c8(c) == 1
                            : rule == BlockRule::KeepsConnected ? ring_connected(c)
                                                                : true;
        if (remove) {
            img.clear(i);
            changed = true;
        }
    }
    return changed;
}

inline bool has_2x2_block(const PaddedMask& img) {
    for (std::size_t i = 0; i < img.size(); ++i)
        if (img.fg(i) && in_2x2_block(img, i))
            return true;
    return false;
}

/// Removes 2x2 foreground blocks left behind by Zhang-Suen, preferring
/// deletions that keep topology, then ones that keep objects connected, and
/// only then breaking a block outright (X-shaped crossings of diagonal lines).
inline bool clear_blocks(PaddedMask& img) {
    bool changed = false;
    while (sweep_blocks(img, BlockRule::Simple))
        changed = true;
    if (changed || !has_2x2_block(img))
        return changed;
    if (sweep_blocks(img, BlockRule::KeepsConnected))
        return true;
    return sweep_blocks(img, BlockRule::Any);
}

} // namespace detail

/// Plain Zhang-Suen thinning to convergence.
inline BinaryMask zhang_suen(const BinaryMask& mask) {
    detail::PaddedMask img(mask);
    detail::zhang_suen_in_place(img);
    return img.unpad();
}

/// One-pixel-wide skeleton: Zhang-Suen followed by removal of any remaining
/// 2x2 blocks, repeated until neither step changes the mask. The output is a
/// subset of the input and thin(thin(m)) == thin(m).
inline BinaryMask thin(const BinaryMask& mask) {
    detail::PaddedMask img(mask);
    detail::zhang_suen_in_place(img);
    while (detail::clear_blocks(img))
        detail::zhang_suen_in_place(img);
    return img.unpad();
}

/// Skeleton pixels where three or more branches meet (crossing number >= 3).
inline std::size_t count_branch_points(const BinaryMask& skeleton) {
    detail::PaddedMask img(skeleton);
    std::size_t branches = 0;
    for (std::size_t i = 0; i < img.size(); ++i)
        if (img.fg(i) && detail::crossing_number(img.code(i)) >= 3)
            ++branches;
    return branches;
}

} // namespace leafmetric
