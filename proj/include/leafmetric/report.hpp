#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "leafmetric/config.hpp"
#include "leafmetric/metrics.hpp"

namespace leafmetric {

inline constexpr int report_version = 1;

struct ImageRecord {
    std::string path;
    std::optional<LeafMetrics> metrics;
    std::optional<Calibration> calibration;
    std::vector<std::string> warnings;
    std::optional<Error> error;
    double processing_ms = 0.0;
};

struct MeasurementReport {
    nlohmann::json config;
    std::vector<ImageRecord> images;

    bool all_succeeded() const {
        for (const auto& r : images)
            if (r.error)
                return false;
        return true;
    }
};

inline nlohmann::json to_json(const LeafMetrics& m) {
    return {{"area_px", m.area_px},
            {"length_px", m.length_px},
            {"mean_width_px", m.mean_width_px},
            {"area_mm2", m.area_mm2},
            {"length_mm", m.length_mm},
            {"width_mm", m.width_mm},
            {"component_count", m.component_count},
            {"skeleton_branch_points", m.skeleton_branch_points}};
}

inline nlohmann::json to_json(const Calibration& c) {
    return {{"dpi", c.dpi()}, {"source", std::string(to_string(c.source()))}};
}

inline nlohmann::json to_json(const Error& e) {
    return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
}

inline nlohmann::json to_json(const MeasureParams& p) {
    nlohmann::json j = {{"bg", std::string(to_string(p.polarity))},
                        {"threshold", p.threshold},
                        {"min_area", p.min_area}};
    if (p.crop)
        j["crop"] = {{"x", p.crop->x}, {"y", p.crop->y}, {"w", p.crop->w}, {"h", p.crop->h}};
    if (p.hue)
        j["hue"] = {{"lo", p.hue->lo},
                    {"hi", p.hue->hi},
                    {"min_saturation", p.hue->min_saturation},
                    {"min_value", p.hue->min_value}};
    return j;
}

inline nlohmann::json config_echo(const PipelineConfig& cfg) {
    nlohmann::json j = to_json(cfg.params);
    if (cfg.dpi)
        j["dpi"] = *cfg.dpi;
    if (cfg.reference) {
        const auto& r = *cfg.reference;
        j["ref"] = {{"p1", {r.p1.x, r.p1.y}}, {"p2", {r.p2.x, r.p2.y}},
                    {"real_length_mm", r.real_length_mm}};
    }
    return j;
}

inline nlohmann::json to_json(const ImageRecord& r, const nlohmann::json& config) {
    nlohmann::json j = {{"path", r.path}, {"config", config}, {"warnings", r.warnings},
                        {"processing_ms", r.processing_ms}};
    if (r.metrics) {
        j["metrics"] = to_json(*r.metrics);
        j["component_areas"] = r.metrics->component_areas;
    }
    if (r.calibration)
        j["calibration"] = to_json(*r.calibration);
    if (r.error)
        j["error"] = to_json(*r.error);
    return j;
}

inline nlohmann::json to_json(const MeasurementReport& report) {
    nlohmann::json images = nlohmann::json::array();
    for (const auto& r : report.images)
        images.push_back(to_json(r, report.config));
    return {{"version", report_version}, {"images", images}};
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

inline std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace detail

/// One row per image; lengths and areas rounded to 2 decimals.
inline std::string to_csv(const MeasurementReport& report) {
    std::string out = "path,status,area_px,length_px,mean_width_px,area_mm2,length_mm,width_mm,"
                      "component_count,skeleton_branch_points,warnings,error\n";
    for (const auto& r : report.images) {
        out += detail::csv_field(r.path);
        if (r.metrics) {
            const auto& m = *r.metrics;
            out += ",ok," + std::to_string(m.area_px) + "," + std::to_string(m.length_px) + "," +
                   detail::fixed2(m.mean_width_px) + "," + detail::fixed2(m.area_mm2) + "," +
                   detail::fixed2(m.length_mm) + "," + detail::fixed2(m.width_mm) + "," +
                   std::to_string(m.component_count) + "," +
                   std::to_string(m.skeleton_branch_points) + ",";
        } else {
            out += ",error,,,,,,,,,";
        }
        std::string joined;
        for (const auto& w : r.warnings)
            joined += (joined.empty() ? "" : "; ") + w;
        out += detail::csv_field(joined) + ",";
        if (r.error)
            out += detail::csv_field(std::string(to_string(r.error->code())) + ": " + r.error->what());
        out += "\n";
    }
    return out;
}

} // namespace leafmetric
