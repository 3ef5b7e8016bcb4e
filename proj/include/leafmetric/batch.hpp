#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "leafmetric/codec.hpp"
#include "leafmetric/config.hpp"
#include "leafmetric/pipeline.hpp"
#include "leafmetric/report.hpp"

namespace leafmetric {

enum ExitCode : int { exit_ok = 0, exit_image_failed = 1, exit_config_error = 2 };

struct BatchResult {
    MeasurementReport report;
    int exit_code = exit_ok;
};

namespace detail {

/// `<stem>.overlay.png`, with `-N` appended when stems repeat in a batch.
inline std::vector<std::filesystem::path> overlay_names(
    const std::vector<std::filesystem::path>& inputs) {
    std::map<std::string, int> seen;
    std::vector<std::filesystem::path> names;
    for (const auto& in : inputs) {
        const std::string stem = in.stem().string();
        const int n = seen[stem]++;
        names.emplace_back(stem + (n == 0 ? "" : "-" + std::to_string(n)) + ".overlay.png");
    }
    return names;
}

inline ImageRecord process_one(const std::filesystem::path& path, const PipelineConfig& cfg,
                               const Calibration& cal,
                               const std::optional<std::filesystem::path>& overlay_path) {
    const auto start = std::chrono::steady_clock::now();
    ImageRecord rec;
    rec.path = path.string();
    try {
        const RgbImage img = load_image(path);
        const Segmented seg = segment(img, cfg.params);
        if (overlay_path)
            write_file(*overlay_path, encode_png(render_overlay(seg.region, seg.mask)));
        LeafMetrics m = compute_metrics(seg.mask, cal);
        rec.warnings = measurement_warnings(m);
        rec.calibration = cal;
        rec.metrics = std::move(m);
    } catch (const Error& e) {
        rec.error = e;
    } catch (const std::exception& e) {
        rec.error = Error(ErrorCode::IoError, e.what());
    }
    rec.processing_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

} // namespace detail

/// Measures every input. Images are processed on a small worker pool; the
/// report keeps input order. Config errors propagate as Error(ConfigError)
/// before any image is touched.
inline BatchResult run_pipeline(const PipelineConfig& cfg, unsigned max_workers = 0) {
    const Calibration cal = cfg.calibration();
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec)
        throw Error(ErrorCode::ConfigError,
                    "cannot create output directory " + cfg.out_dir.string() + ": " + ec.message());

    const auto names = detail::overlay_names(cfg.inputs);
    std::vector<ImageRecord> records(cfg.inputs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.inputs.size(); i = next++) {
            std::optional<std::filesystem::path> overlay;
            if (cfg.overlay)
                overlay = cfg.out_dir / names[i];
            records[i] = detail::process_one(cfg.inputs[i], cfg, cal, overlay);
        }
    };
    unsigned workers = max_workers != 0 ? max_workers : std::thread::hardware_concurrency();
    workers = static_cast<unsigned>(
        std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, cfg.inputs.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < workers; ++t)
            pool.emplace_back(worker);
        worker();
    }

    BatchResult result;
    result.report.config = config_echo(cfg);
    result.report.images = std::move(records);
    result.exit_code = result.report.all_succeeded() ? exit_ok : exit_image_failed;

    if (cfg.writes_json()) {
        const std::string text = to_json(result.report).dump(2) + "\n";
        write_file(cfg.out_dir / "report.json",
                   std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    }
    if (cfg.writes_csv()) {
        const std::string text = to_csv(result.report);
        write_file(cfg.out_dir / "report.csv",
                   std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    }
    return result;
}

} // namespace leafmetric
