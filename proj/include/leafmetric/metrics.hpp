#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "leafmetric/error.hpp"
#include "leafmetric/morphology.hpp"

namespace leafmetric {

inline constexpr double mm_per_inch = 25.4;

enum class CalibrationSource { Declared, TwoPoint };

constexpr std::string_view to_string(CalibrationSource s) noexcept {
    return s == CalibrationSource::Declared ? "declared" : "two_point";
}

/// Scan resolution in pixels per inch.
class Calibration {
public:
    Calibration(double dpi, CalibrationSource source) : dpi_(dpi), source_(source) {
        if (!(dpi > 0.0) || !std::isfinite(dpi))
            throw Error(ErrorCode::InvalidCalibration,
                        "dpi must be positive and finite, got " + std::to_string(dpi));
    }

    static Calibration declared(double dpi) { return {dpi, CalibrationSource::Declared}; }

    double dpi() const noexcept { return dpi_; }
    CalibrationSource source() const noexcept { return source_; }

private:
    double dpi_;
    CalibrationSource source_;
};

struct PixelPoint {
    double x = 0.0;
    double y = 0.0;

    friend constexpr bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Two points on a reference object of known length (e.g. a ruler) in image
/// pixel coordinates.
struct ReferenceMeasurement {
    PixelPoint p1;
    PixelPoint p2;
    double real_length_mm = 0.0;
};

inline double pixel_distance(PixelPoint a, PixelPoint b) noexcept {
    return std::hypot(b.x - a.x, b.y - a.y);
}

/// dpi = pixel distance / physical distance in inches.
inline Calibration dpi_from_reference(const ReferenceMeasurement& ref) {
    if (ref.p1 == ref.p2)
        throw Error(ErrorCode::DegenerateReference, "reference points coincide");
    if (!(ref.real_length_mm > 0.0) || !std::isfinite(ref.real_length_mm))
        throw Error(ErrorCode::NonPositiveLength,
                    "reference length must be positive, got " + std::to_string(ref.real_length_mm));
    return {pixel_distance(ref.p1, ref.p2) / (ref.real_length_mm / mm_per_inch),
            CalibrationSource::TwoPoint};
}

inline double px_to_mm(double length_px, const Calibration& cal) noexcept {
    return length_px / cal.dpi() * mm_per_inch;
}

inline double px2_to_mm2(double area_px, const Calibration& cal) noexcept {
    return area_px / (cal.dpi() * cal.dpi()) * (mm_per_inch * mm_per_inch);
}

struct LeafMetrics {
    std::size_t area_px = 0;
    std::size_t length_px = 0;
    double mean_width_px = 0.0;
    double area_mm2 = 0.0;
    double length_mm = 0.0;
    double width_mm = 0.0;
    std::size_t component_count = 0;
    std::size_t skeleton_branch_points = 0;
    std::vector<std::size_t> component_areas;
};

/// Area is the foreground pixel count, length the pixel count of the
/// Zhang-Suen skeleton, and mean width their ratio. No diagonal correction is
/// applied to the skeleton count.
inline LeafMetrics compute_metrics(const BinaryMask& mask, const Calibration& cal) {
    LeafMetrics m;
    m.area_px = count_foreground(mask);
    if (m.area_px == 0)
        throw Error(ErrorCode::EmptyMask,
                    "no foreground pixels: threshold or noise removal rejected everything");
    const BinaryMask skeleton = thin(mask);
    m.length_px = count_foreground(skeleton);
    // Zhang-Suen erases a lone 2x2 block entirely; width is reported as 0
    // rather than dividing by zero.
    m.mean_width_px =
        m.length_px > 0 ? static_cast<double>(m.area_px) / static_cast<double>(m.length_px) : 0.0;
    m.area_mm2 = px2_to_mm2(static_cast<double>(m.area_px), cal);
    m.length_mm = px_to_mm(static_cast<double>(m.length_px), cal);
    m.width_mm = px_to_mm(m.mean_width_px, cal);

    const LabeledComponents lc = label_components(mask);
    m.component_count = lc.count();
    m.component_areas.assign(lc.areas().begin(), lc.areas().end());
    m.skeleton_branch_points = count_branch_points(skeleton);
    return m;
}

} // namespace leafmetric
