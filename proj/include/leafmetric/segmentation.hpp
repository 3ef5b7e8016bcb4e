#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "leafmetric/error.hpp"
#include "leafmetric/image.hpp"

namespace leafmetric {

/// Leaf/background classification. Stored one byte per pixel (0 or 1) so the
/// morphology passes can index it directly.
class BinaryMask {
public:
    BinaryMask(std::size_t width, std::size_t height, bool fill = false)
        : bits_(width, height, fill ? 1 : 0) {}

    std::size_t width() const noexcept { return bits_.width(); }
    std::size_t height() const noexcept { return bits_.height(); }
    std::size_t size() const noexcept { return bits_.size(); }

    bool operator()(std::size_t x, std::size_t y) const noexcept { return bits_(x, y) != 0; }
    void set(std::size_t x, std::size_t y, bool fg) noexcept { bits_(x, y) = fg ? 1 : 0; }

    bool at(std::size_t index) const noexcept { return bits_.pixels()[index] != 0; }
    void set(std::size_t index, bool fg) noexcept { bits_.pixels()[index] = fg ? 1 : 0; }

    std::span<const std::uint8_t> bits() const noexcept { return bits_.pixels(); }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    Image<std::uint8_t> bits_;
};

enum class Polarity { White, Black };

constexpr std::string_view to_string(Polarity p) noexcept {
    return p == Polarity::White ? "white" : "black";
}

inline std::optional<Polarity> parse_polarity(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "white")
        return Polarity::White;
    if (lower == "black")
        return Polarity::Black;
    return std::nullopt;
}

/// White background: the leaf is darker, foreground iff gray < threshold.
/// Black background: foreground iff gray > threshold.
inline BinaryMask threshold_mask(const GrayImage& img, std::uint8_t threshold, Polarity bg) {
    BinaryMask mask(img.width(), img.height());
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i)
        mask.set(i, bg == Polarity::White ? px[i] < threshold : px[i] > threshold);
    return mask;
}

struct Hsv {
    double h = 0.0; ///< degrees, [0, 360)
    double s = 0.0; ///< [0, 1]
    double v = 0.0; ///< [0, 1]
};

/// Hexcone HSV. Achromatic pixels (max == min) get h = 0.
inline Hsv rgb_to_hsv(Rgb p) noexcept {
    const int mx = std::max({p.r, p.g, p.b});
    const int mn = std::min({p.r, p.g, p.b});
    const int delta = mx - mn;
    Hsv out;
    out.v = mx / 255.0;
    out.s = mx == 0 ? 0.0 : static_cast<double>(delta) / mx;
    if (delta == 0)
        return out;
    double h;
    if (mx == p.r)
        h = 60.0 * static_cast<double>(p.g - p.b) / delta;
    else if (mx == p.g)
        h = 60.0 * (2.0 + static_cast<double>(p.b - p.r) / delta);
    else
        h = 60.0 * (4.0 + static_cast<double>(p.r - p.g) / delta);
    if (h < 0.0)
        h += 360.0;
    out.h = h >= 360.0 ? 0.0 : h;
    return out;
}

/// Inclusive hue interval; lo > hi wraps through 0 degrees. The saturation and
/// value gates keep achromatic background pixels (undefined hue) out of a hue
/// selection; set both to 0 for hue-only selection.
struct HueRange {
    double lo = 0.0;
    double hi = 0.0;
    double min_saturation = 0.15;
    double min_value = 0.15;

    static HueRange full() noexcept { return {0.0, std::nextafter(360.0, 0.0), 0.0, 0.0}; }

    bool valid() const noexcept {
        auto in_unit = [](double f) { return f >= 0.0 && f <= 1.0; };
        return lo >= 0.0 && lo < 360.0 && hi >= 0.0 && hi < 360.0 && in_unit(min_saturation) &&
               in_unit(min_value);
    }

    bool contains_hue(double h) const noexcept {
        return lo <= hi ? (h >= lo && h <= hi) : (h >= lo || h <= hi);
    }

    bool accepts(const Hsv& c) const noexcept {
        return c.s >= min_saturation && c.v >= min_value && contains_hue(c.h);
    }
};

inline BinaryMask hue_range_mask(const RgbImage& img, const HueRange& range) {
    if (!range.valid())
        throw Error(ErrorCode::InvalidParameter,
                    "hue range bounds must lie in [0,360) and gates in [0,1]");
    BinaryMask mask(img.width(), img.height());
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i)
        mask.set(i, range.accepts(rgb_to_hsv(px[i])));
    return mask;
}

} // namespace leafmetric
