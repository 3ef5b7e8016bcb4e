#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "leafmetric/batch.hpp"
#include "leafmetric/codec.hpp"
#include "leafmetric/config.hpp"
#include "leafmetric/service.hpp"

namespace {

using namespace leafmetric;

struct MeasureArgs {
    std::optional<std::string> config_file;
    Settings flags;
};

void add_setting(CLI::App& cmd, Settings& flags, const std::string& name,
                 const std::string& help, bool repeatable = false) {
    auto* opt = cmd.add_option_function<std::vector<std::string>>(
        "--" + name, [&flags, name](const std::vector<std::string>& v) { flags[name] = v; },
        help);
    if (repeatable)
        opt->expected(1, -1);
    else
        opt->expected(1);
}

int run_measure(const MeasureArgs& args) {
    try {
        Settings settings = args.config_file ? load_settings(*args.config_file) : Settings{};
        settings = merge_settings(std::move(settings), args.flags);
        const PipelineConfig cfg = make_config(settings);
        const BatchResult result = run_pipeline(cfg);
        for (const auto& rec : result.report.images) {
            if (rec.error)
                std::cerr << rec.path << ": " << to_string(rec.error->code()) << ": "
                          << rec.error->what() << "\n";
        }
        std::cout << "measured " << result.report.images.size() << " image(s); report in "
                  << cfg.out_dir.string() << "\n";
        return result.exit_code;
    } catch (const Error& e) {
        std::cerr << "leafmetric: " << e.what() << "\n";
        return e.code() == ErrorCode::ConfigError ? exit_config_error : exit_image_failed;
    }
}

int run_calibrate(const std::string& input, const std::string& ref_text) {
    try {
        const ReferenceMeasurement ref = parse_reference(ref_text);
        const RgbImage img = load_image(input);
        for (const PixelPoint& p : {ref.p1, ref.p2}) {
            if (p.x < 0 || p.y < 0 || p.x >= static_cast<double>(img.width()) ||
                p.y >= static_cast<double>(img.height()))
                throw Error(ErrorCode::ConfigError, "reference point lies outside the image");
        }
        const Calibration cal = dpi_from_reference(ref);
        std::printf("%.12g\n", cal.dpi());
        return exit_ok;
    } catch (const Error& e) {
        std::cerr << "leafmetric: " << e.what() << "\n";
        switch (e.code()) {
        case ErrorCode::ConfigError:
        case ErrorCode::DegenerateReference:
        case ErrorCode::NonPositiveLength: return exit_config_error;
        default: return exit_image_failed;
        }
    }
}

int run_serve(const std::string& bind, int port, const std::optional<std::string>& static_dir,
              int idle_minutes) {
    ServiceOptions options;
    options.idle_timeout = std::chrono::minutes(idle_minutes);
    if (static_dir)
        options.static_dir = *static_dir;
    Service service(options);
    httplib::Server server;
    service.mount(server);
    std::cout << "leafmetric service on http://" << bind << ":" << port << "\n" << std::flush;
    if (!server.listen(bind, port)) {
        std::cerr << "leafmetric: cannot listen on " << bind << ":" << port << "\n";
        return exit_image_failed;
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Leaf area, length and width from scanned images"};
    app.require_subcommand(1);

    MeasureArgs measure_args;
    auto* measure = app.add_subcommand("measure", "Measure a batch of scans");
    measure->add_option("--config", measure_args.config_file,
                        "key = value settings file; flags override it");
    add_setting(*measure, measure_args.flags, "input", "Image path or glob (repeatable)", true);
    add_setting(*measure, measure_args.flags, "crop", "Crop rectangle x,y,w,h");
    add_setting(*measure, measure_args.flags, "bg", "Background: white or black");
    add_setting(*measure, measure_args.flags, "threshold", "Brightness threshold 0-255");
    add_setting(*measure, measure_args.flags, "min-area",
                "Drop objects smaller than this many pixels (default 50)");
    add_setting(*measure, measure_args.flags, "dpi", "Declared scan resolution");
    add_setting(*measure, measure_args.flags, "ref",
                "Reference calibration x1,y1,x2,y2,mm in original-image pixels");
    add_setting(*measure, measure_args.flags, "hue",
                "Hue selection lo,hi[,min-s,min-v] instead of the threshold");
    add_setting(*measure, measure_args.flags, "out", "Output directory");
    add_setting(*measure, measure_args.flags, "format", "json, csv or both (default json)");
    measure->add_flag_callback(
        "--overlay", [&] { measure_args.flags["overlay"] = {"true"}; },
        "Write <stem>.overlay.png next to the report");

    std::string cal_input, cal_ref;
    auto* calibrate = app.add_subcommand("calibrate", "Print dpi from a two-point reference");
    calibrate->add_option("--input", cal_input, "Scan containing the reference")->required();
    calibrate->add_option("--ref", cal_ref, "x1,y1,x2,y2,mm")->required();

    std::string bind = "127.0.0.1";
    int port = 8080;
    int idle_minutes = 30;
    std::optional<std::string> static_dir;
    auto* serve = app.add_subcommand("serve", "Run the local HTTP service");
    serve->add_option("--bind", bind, "Bind address")->capture_default_str();
    serve->add_option("--port", port, "TCP port")->capture_default_str();
    serve->add_option("--static", static_dir, "Directory served at /");
    serve->add_option("--idle-minutes", idle_minutes, "Evict sessions idle this long")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config_error;
    }

    if (measure->parsed())
        return run_measure(measure_args);
    if (calibrate->parsed())
        return run_calibrate(cal_input, cal_ref);
    return run_serve(bind, port, static_dir, idle_minutes);
}
