#pragma once

#include <glob.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "leafmetric/error.hpp"
#include "leafmetric/metrics.hpp"
#include "leafmetric/pipeline.hpp"

namespace leafmetric {

/// Raw key -> values settings, as read from a config file or the command line.
/// Keys match the long flag names without dashes (e.g. "min-area").
using Settings = std::map<std::string, std::vector<std::string>>;

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            return parts;
        start = pos + 1;
    }
}

[[noreturn]] inline void config_error(const std::string& what) {
    throw Error(ErrorCode::ConfigError, what);
}

template <typename Int>
Int parse_integer(std::string_view s, std::string_view what) {
    s = trim(s);
    Int value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        config_error(std::string(what) + ": expected an integer, got '" + std::string(s) + "'");
    return value;
}

inline double parse_real(std::string_view s, std::string_view what) {
    s = trim(s);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value))
        config_error(std::string(what) + ": expected a number, got '" + std::string(s) + "'");
    return value;
}

} // namespace detail

inline CropRect parse_crop(std::string_view s) {
    const auto parts = detail::split(s, ',');
    if (parts.size() != 4)
        detail::config_error("crop: expected x,y,w,h");
    CropRect r;
    r.x = detail::parse_integer<std::size_t>(parts[0], "crop x");
    r.y = detail::parse_integer<std::size_t>(parts[1], "crop y");
    r.w = detail::parse_integer<std::size_t>(parts[2], "crop w");
    r.h = detail::parse_integer<std::size_t>(parts[3], "crop h");
    if (r.w == 0 || r.h == 0)
        detail::config_error("crop: width and height must be at least 1");
    return r;
}

inline ReferenceMeasurement parse_reference(std::string_view s) {
    const auto parts = detail::split(s, ',');
    if (parts.size() != 5)
        detail::config_error("ref: expected x1,y1,x2,y2,mm");
    return {{detail::parse_real(parts[0], "ref x1"), detail::parse_real(parts[1], "ref y1")},
            {detail::parse_real(parts[2], "ref x2"), detail::parse_real(parts[3], "ref y2")},
            detail::parse_real(parts[4], "ref length")};
}

inline HueRange parse_hue(std::string_view s) {
    const auto parts = detail::split(s, ',');
    if (parts.size() != 2 && parts.size() != 4)
        detail::config_error("hue: expected lo,hi or lo,hi,min-s,min-v");
    HueRange r;
    r.lo = detail::parse_real(parts[0], "hue lo");
    r.hi = detail::parse_real(parts[1], "hue hi");
    if (parts.size() == 4) {
        r.min_saturation = detail::parse_real(parts[2], "hue min-s");
        r.min_value = detail::parse_real(parts[3], "hue min-v");
    }
    if (!r.valid())
        detail::config_error("hue: bounds must lie in [0,360) and gates in [0,1]");
    return r;
}

inline std::uint8_t parse_threshold(std::string_view s) {
    const int t = detail::parse_integer<int>(s, "threshold");
    if (t < 0 || t > 255)
        detail::config_error("threshold must be in [0,255], got " + std::to_string(t));
    return static_cast<std::uint8_t>(t);
}

enum class ReportFormat { Json, Csv, Both };

struct PipelineConfig {
    std::vector<std::filesystem::path> inputs;
    MeasureParams params;
    std::optional<double> dpi;
    std::optional<ReferenceMeasurement> reference;
    std::filesystem::path out_dir = ".";
    ReportFormat format = ReportFormat::Json;
    bool overlay = false;

    /// Throws ConfigError unless exactly one calibration source is usable.
    Calibration calibration() const {
        if (dpi.has_value() == reference.has_value())
            detail::config_error("exactly one of dpi or ref must be given");
        try {
            return dpi ? Calibration::declared(*dpi) : dpi_from_reference(*reference);
        } catch (const Error& e) {
            detail::config_error(std::string("calibration: ") + e.what());
        }
    }

    bool writes_json() const { return format != ReportFormat::Csv; }
    bool writes_csv() const { return format != ReportFormat::Json; }
};

/// Expands one --input pattern. Patterns without wildcards are kept verbatim
/// so a missing file surfaces as a per-image error instead of vanishing.
inline std::vector<std::filesystem::path> expand_input(const std::string& pattern) {
    if (pattern.find_first_of("*?[") == std::string::npos)
        return {pattern};
    glob_t g{};
    std::vector<std::filesystem::path> out;
    if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i)
            out.emplace_back(g.gl_pathv[i]);
    }
    ::globfree(&g);
    return out;
}

/// Reads `key = value` lines; `#` starts a comment. Repeated keys accumulate.
inline Settings parse_settings(std::string_view text) {
    Settings out;
    std::size_t line_no = 0;
    for (std::string_view line : detail::split(text, '\n')) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            detail::config_error("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key(detail::trim(line.substr(0, eq)));
        out[key].emplace_back(detail::trim(line.substr(eq + 1)));
    }
    return out;
}

inline Settings load_settings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        detail::config_error("cannot read config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_settings(text);
}

/// Later sources win key by key.
inline Settings merge_settings(Settings base, const Settings& overrides) {
    for (const auto& [key, values] : overrides)
        base[key] = values;
    return base;
}

inline PipelineConfig make_config(const Settings& settings) {
    static const std::vector<std::string> known = {"input", "crop", "bg",  "threshold",
                                                   "min-area", "dpi", "ref", "hue",
                                                   "out",   "format", "overlay"};
    for (const auto& [key, values] : settings)
        if (std::find(known.begin(), known.end(), key) == known.end())
            detail::config_error("unknown setting '" + key + "'");

    auto single = [&](const std::string& key) -> std::optional<std::string> {
        auto it = settings.find(key);
        if (it == settings.end() || it->second.empty())
            return std::nullopt;
        if (it->second.size() > 1)
            detail::config_error(key + " given more than once");
        return it->second.front();
    };

    PipelineConfig cfg;
    if (auto it = settings.find("input"); it != settings.end())
        for (const auto& pattern : it->second)
            for (auto& p : expand_input(pattern))
                cfg.inputs.push_back(std::move(p));
    if (auto v = single("crop"))
        cfg.params.crop = parse_crop(*v);
    if (auto v = single("bg")) {
        auto p = parse_polarity(*v);
        if (!p)
            detail::config_error("bg must be white or black, got '" + *v + "'");
        cfg.params.polarity = *p;
    } else {
        detail::config_error("bg is required (white or black)");
    }
    if (auto v = single("threshold"))
        cfg.params.threshold = parse_threshold(*v);
    else
        detail::config_error("threshold is required");
    if (auto v = single("min-area"))
        cfg.params.min_area = detail::parse_integer<std::size_t>(*v, "min-area");
    if (auto v = single("hue"))
        cfg.params.hue = parse_hue(*v);
    if (auto v = single("dpi"))
        cfg.dpi = detail::parse_real(*v, "dpi");
    if (auto v = single("ref"))
        cfg.reference = parse_reference(*v);
    if (auto v = single("out"))
        cfg.out_dir = *v;
    else
        detail::config_error("out is required");
    if (auto v = single("format")) {
        if (*v == "json")
            cfg.format = ReportFormat::Json;
        else if (*v == "csv")
            cfg.format = ReportFormat::Csv;
        else if (*v == "both")
            cfg.format = ReportFormat::Both;
        else
            detail::config_error("format must be json, csv or both");
    }
    if (auto v = single("overlay"))
        cfg.overlay = *v == "true" || *v == "1" || *v == "yes" || v->empty();

    cfg.calibration(); // validates the calibration source
    return cfg;
}

} // namespace leafmetric
