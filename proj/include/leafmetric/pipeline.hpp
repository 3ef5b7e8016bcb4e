#pragma once

// The measurement chain shared by the batch CLI and the HTTP service:
// (crop) -> grayscale -> threshold | hue selection -> label -> denoise -> metrics.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "leafmetric/image.hpp"
#include "leafmetric/metrics.hpp"
#include "leafmetric/morphology.hpp"
#include "leafmetric/segmentation.hpp"

namespace leafmetric {

inline constexpr std::size_t default_min_area = 50;
inline constexpr Rgb default_tint{255, 0, 0};

struct MeasureParams {
    std::optional<CropRect> crop;
    Polarity polarity = Polarity::White;
    std::uint8_t threshold = 128;
    std::size_t min_area = default_min_area;
    /// When set, replaces the brightness threshold as the classifier.
    std::optional<HueRange> hue;
};

struct Segmented {
    RgbImage region;  ///< cropped input
    BinaryMask mask;  ///< after noise removal
    std::vector<std::size_t> component_areas;
};

inline Segmented segment(const RgbImage& img, const MeasureParams& params) {
    RgbImage region = params.crop ? crop(img, *params.crop) : img;
    const BinaryMask raw = params.hue ? hue_range_mask(region, *params.hue)
                                      : threshold_mask(to_grayscale(region), params.threshold,
                                                       params.polarity);
    const LabeledComponents lc = label_components(raw);
    BinaryMask mask = remove_small_components(lc, params.min_area);

    std::vector<std::size_t> kept;
    for (std::size_t a : lc.areas())
        if (a >= params.min_area)
            kept.push_back(a);
    return {std::move(region), std::move(mask), std::move(kept)};
}

inline LeafMetrics measure(const RgbImage& img, const MeasureParams& params,
                           const Calibration& cal) {
    return compute_metrics(segment(img, params).mask, cal);
}

/// 50/50 blend of source and tint on foreground pixels, rounded half up.
inline RgbImage render_overlay(const RgbImage& img, const BinaryMask& mask, Rgb tint = default_tint) {
    if (img.width() != mask.width() || img.height() != mask.height())
        throw Error(ErrorCode::DimensionMismatch,
                    "overlay image is " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()) + " but mask is " +
                        std::to_string(mask.width()) + "x" + std::to_string(mask.height()));
    RgbImage out = img;
    auto px = out.pixels();
    auto blend = [](std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>((unsigned{a} + b + 1u) / 2u);
    };
    for (std::size_t i = 0; i < px.size(); ++i)
        if (mask.at(i))
            px[i] = {blend(px[i].r, tint.r), blend(px[i].g, tint.g), blend(px[i].b, tint.b)};
    return out;
}

inline std::vector<std::string> measurement_warnings(const LeafMetrics& m) {
    std::vector<std::string> warnings;
    if (m.component_count > 1)
        warnings.push_back("multiple components retained (" + std::to_string(m.component_count) +
                           "); area is the total over all of them");
    if (m.skeleton_branch_points > 0)
        warnings.push_back("skeleton has " + std::to_string(m.skeleton_branch_points) +
                           " branch points; length counts every branch");
    if (m.length_px == 0)
        warnings.push_back("skeleton is empty; mean width is unavailable");
    return warnings;
}

} // namespace leafmetric
