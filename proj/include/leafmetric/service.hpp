#pragma once

// Local HTTP API behind the interactive workflow: upload a scan, preview the
// threshold overlay, calibrate from two reference points, measure.
//
//   POST   /api/v1/sessions                  multipart "image" -> {id,width,height}
//   GET    /api/v1/sessions/{id}/image       original as PNG
//   POST   /api/v1/sessions/{id}/preview     params -> multipart/mixed (PNG + counts)
//   POST   /api/v1/sessions/{id}/calibration {p1,p2,real_length_mm} | {dpi}
//   POST   /api/v1/sessions/{id}/measure     -> LeafMetrics JSON
//   DELETE /api/v1/sessions/{id}
//
// Errors are JSON {code, message}.

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "leafmetric/codec.hpp"
#include "leafmetric/pipeline.hpp"
#include "leafmetric/report.hpp"

namespace leafmetric {

using Clock = std::chrono::steady_clock;

struct Session {
    Session(std::string session_id, RgbImage img, Clock::time_point now)
        : id(std::move(session_id)), image(std::move(img)), created(now), accessed(now) {}

    const std::string id;
    const RgbImage image;
    const Clock::time_point created;

    /// Guards params, calibration and accessed. Mutations take it exclusively.
    mutable std::shared_mutex mutex;
    MeasureParams params;
    std::optional<Calibration> calibration;
    Clock::time_point accessed;
};

/// In-memory sessions with idle eviction. Eviction is lazy: every lookup or
/// creation first drops sessions idle for longer than the timeout.
class SessionStore {
public:
    using ClockFn = std::function<Clock::time_point()>;

    explicit SessionStore(std::chrono::seconds idle_timeout = std::chrono::minutes(30),
                          ClockFn clock = [] { return Clock::now(); })
        : idle_timeout_(idle_timeout), clock_(std::move(clock)) {}

    std::shared_ptr<Session> create(RgbImage image) {
        const auto now = clock_();
        std::lock_guard lock(mutex_);
        evict_locked(now);
        std::string id;
        do {
            id = random_id();
        } while (sessions_.contains(id));
        auto session = std::make_shared<Session>(id, std::move(image), now);
        sessions_.emplace(id, session);
        return session;
    }

    std::shared_ptr<Session> find(const std::string& id) {
        const auto now = clock_();
        std::shared_ptr<Session> session;
        {
            std::lock_guard lock(mutex_);
            evict_locked(now);
            auto it = sessions_.find(id);
            if (it == sessions_.end())
                throw Error(ErrorCode::SessionNotFound, "no session '" + id + "'");
            session = it->second;
        }
        std::unique_lock slock(session->mutex);
        session->accessed = now;
        return session;
    }

    bool erase(const std::string& id) {
        std::lock_guard lock(mutex_);
        return sessions_.erase(id) > 0;
    }

    std::size_t size() {
        std::lock_guard lock(mutex_);
        evict_locked(clock_());
        return sessions_.size();
    }

private:
    void evict_locked(Clock::time_point now) {
        std::erase_if(sessions_, [&](const auto& entry) {
            std::shared_lock slock(entry.second->mutex);
            return now - entry.second->accessed > idle_timeout_;
        });
    }

    std::string random_id() {
        static constexpr char hex[] = "0123456789abcdef";
        std::uniform_int_distribution<int> nibble(0, 15);
        std::string id(32, '0');
        for (char& c : id)
            c = hex[nibble(rng_)];
        return id;
    }

    std::chrono::seconds idle_timeout_;
    ClockFn clock_;
    std::mutex mutex_;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
    std::mt19937_64 rng_{std::random_device{}()};
};

namespace detail {

inline int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnsupportedFormat: return 415;
    case ErrorCode::CorruptFile:
    case ErrorCode::ZeroDimension:
    case ErrorCode::ConfigError: return 400;
    case ErrorCode::SessionNotFound: return 404;
    case ErrorCode::CalibrationMissing: return 409;
    case ErrorCode::IoError: return 500;
    default: return 422;
    }
}

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, const Error& e) {
    send_json(res, http_status(e.code()), to_json(e));
}

[[noreturn]] inline void bad_param(const std::string& what) {
    throw Error(ErrorCode::InvalidParameter, what);
}

inline nlohmann::json parse_body(const httplib::Request& req) {
    if (req.body.empty())
        return nlohmann::json::object();
    auto j = nlohmann::json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        bad_param("request body must be a JSON object");
    return j;
}

inline std::int64_t integer_field(const nlohmann::json& j, const char* key, std::int64_t lo,
                                  std::int64_t hi) {
    const auto& v = j.at(key);
    if (!v.is_number_integer())
        bad_param(std::string(key) + " must be an integer");
    const auto n = v.get<std::int64_t>();
    if (n < lo || n > hi)
        bad_param(std::string(key) + " must be in [" + std::to_string(lo) + "," +
                  std::to_string(hi) + "]");
    return n;
}

inline double number_field(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number())
        bad_param(std::string(key) + " must be a number");
    return v.get<double>();
}

/// Applies the optional fields of a preview/measure body on top of `base`.
/// A JSON null crop or hue clears the stored one.
inline MeasureParams apply_params(const nlohmann::json& body, MeasureParams base,
                                  const RgbImage& image) {
    if (body.contains("polarity")) {
        const auto& v = body["polarity"];
        auto p = v.is_string() ? parse_polarity(v.get<std::string>()) : std::nullopt;
        if (!p)
            bad_param("polarity must be \"white\" or \"black\"");
        base.polarity = *p;
    }
    if (body.contains("threshold"))
        base.threshold = static_cast<std::uint8_t>(integer_field(body, "threshold", 0, 255));
    if (body.contains("min_area"))
        base.min_area = static_cast<std::size_t>(
            integer_field(body, "min_area", 0, std::numeric_limits<std::int64_t>::max()));
    if (body.contains("crop")) {
        const auto& c = body["crop"];
        if (c.is_null()) {
            base.crop.reset();
        } else {
            if (!c.is_object())
                bad_param("crop must be an object {x,y,w,h}");
            constexpr auto max = std::numeric_limits<std::int64_t>::max();
            CropRect r{static_cast<std::size_t>(integer_field(c, "x", 0, max)),
                       static_cast<std::size_t>(integer_field(c, "y", 0, max)),
                       static_cast<std::size_t>(integer_field(c, "w", 1, max)),
                       static_cast<std::size_t>(integer_field(c, "h", 1, max))};
            if (!fits(r, image.width(), image.height()))
                throw Error(ErrorCode::RectOutOfBounds, "crop rect does not fit the image");
            base.crop = r;
        }
    }
    if (body.contains("hue")) {
        const auto& h = body["hue"];
        if (h.is_null()) {
            base.hue.reset();
        } else {
            if (!h.is_object())
                bad_param("hue must be an object {lo,hi,min_saturation?,min_value?}");
            HueRange r;
            r.lo = number_field(h, "lo");
            r.hi = number_field(h, "hi");
            if (h.contains("min_saturation"))
                r.min_saturation = number_field(h, "min_saturation");
            if (h.contains("min_value"))
                r.min_value = number_field(h, "min_value");
            if (!r.valid())
                bad_param("hue bounds must lie in [0,360) and gates in [0,1]");
            base.hue = r;
        }
    }
    return base;
}

inline PixelPoint point_field(const nlohmann::json& body, const char* key) {
    const auto& v = body.at(key);
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    if (v.is_object() && v.contains("x") && v.contains("y"))
        return {number_field(v, "x"), number_field(v, "y")};
    bad_param(std::string(key) + " must be [x,y] or {x,y}");
}

inline Calibration parse_calibration(const nlohmann::json& body) {
    const bool declared = body.contains("dpi");
    const bool reference = body.contains("p1") || body.contains("p2") ||
                           body.contains("real_length_mm");
    if (declared == reference)
        bad_param("give either {dpi} or {p1,p2,real_length_mm}");
    if (declared)
        return Calibration::declared(number_field(body, "dpi"));
    if (!body.contains("p1") || !body.contains("p2") || !body.contains("real_length_mm"))
        bad_param("reference calibration needs p1, p2 and real_length_mm");
    return dpi_from_reference(
        {point_field(body, "p1"), point_field(body, "p2"), number_field(body, "real_length_mm")});
}

inline constexpr std::string_view preview_boundary = "leafmetric-preview-boundary";

inline std::string multipart_preview(const Bytes& png, const nlohmann::json& counts) {
    std::string b(preview_boundary);
    std::string out;
    out += "--" + b + "\r\n";
    out += "Content-Type: image/png\r\n";
    out += "Content-Disposition: inline; name=\"overlay\"; filename=\"overlay.png\"\r\n\r\n";
    out.append(reinterpret_cast<const char*>(png.data()), png.size());
    out += "\r\n--" + b + "\r\n";
    out += "Content-Type: application/json\r\n";
    out += "Content-Disposition: inline; name=\"counts\"\r\n\r\n";
    out += counts.dump();
    out += "\r\n--" + b + "--\r\n";
    return out;
}

inline Bytes image_upload(const httplib::Request& req) {
    if (req.is_multipart_form_data()) {
        if (req.has_file("image")) {
            const auto& f = req.get_file_value("image");
            return Bytes(f.content.begin(), f.content.end());
        }
        if (!req.files.empty()) {
            const auto& f = req.files.begin()->second;
            return Bytes(f.content.begin(), f.content.end());
        }
        bad_param("multipart upload carries no file");
    }
    if (req.body.empty())
        bad_param("empty upload");
    return Bytes(req.body.begin(), req.body.end());
}

} // namespace detail

struct ServiceOptions {
    std::chrono::seconds idle_timeout = std::chrono::minutes(30);
    /// Directory with the browser UI bundle, served at "/" when set.
    std::optional<std::filesystem::path> static_dir;
};

/// Request handlers over a SessionStore; mount() wires them into a server.
class Service {
public:
    explicit Service(ServiceOptions options = {}, SessionStore::ClockFn clock = [] {
        return Clock::now();
    })
        : options_(std::move(options)), store_(options_.idle_timeout, std::move(clock)) {}

    SessionStore& sessions() noexcept { return store_; }

    void mount(httplib::Server& server) {
        using httplib::Request;
        using httplib::Response;
        const std::string base = "/api/v1/sessions";

        server.Post(base, wrap([this](const Request& req, Response& res) {
            const RgbImage img = decode_image(detail::image_upload(req));
            const auto s = store_.create(img);
            detail::send_json(res, 201,
                              {{"id", s->id}, {"width", img.width()}, {"height", img.height()}});
        }));

        server.Get(base + "/:id/image", wrap([this](const Request& req, Response& res) {
            const auto s = store_.find(req.path_params.at("id"));
            const Bytes png = encode_png(s->image);
            res.set_content(reinterpret_cast<const char*>(png.data()), png.size(), "image/png");
        }));

        server.Post(base + "/:id/preview", wrap([this](const Request& req, Response& res) {
            const auto s = store_.find(req.path_params.at("id"));
            const auto body = detail::parse_body(req);
            const MeasureParams params = detail::apply_params(body, current_params(*s), s->image);
            if (body.contains("persist") && body["persist"] == true) {
                std::unique_lock lock(s->mutex);
                s->params = params;
            }
            const Segmented seg = segment(s->image, params);
            const Bytes png = encode_png(render_overlay(seg.region, seg.mask));
            const nlohmann::json counts = {{"area_px", count_foreground(seg.mask)},
                                           {"component_count", seg.component_areas.size()},
                                           {"width", seg.region.width()},
                                           {"height", seg.region.height()}};
            res.set_content(detail::multipart_preview(png, counts),
                            "multipart/mixed; boundary=" +
                                std::string(detail::preview_boundary));
        }));

        server.Post(base + "/:id/calibration", wrap([this](const Request& req, Response& res) {
            const auto s = store_.find(req.path_params.at("id"));
            const Calibration cal = detail::parse_calibration(detail::parse_body(req));
            {
                std::unique_lock lock(s->mutex);
                s->calibration = cal;
            }
            detail::send_json(res, 200, to_json(cal));
        }));

        server.Post(base + "/:id/measure", wrap([this](const Request& req, Response& res) {
            const auto s = store_.find(req.path_params.at("id"));
            const auto body = detail::parse_body(req);
            std::optional<Calibration> cal;
            MeasureParams stored;
            {
                std::shared_lock lock(s->mutex);
                cal = s->calibration;
                stored = s->params;
            }
            if (!cal)
                throw Error(ErrorCode::CalibrationMissing,
                            "calibrate the session before measuring");
            const MeasureParams params = detail::apply_params(body, stored, s->image);
            const LeafMetrics m = measure(s->image, params, *cal);
            nlohmann::json j = to_json(m);
            j["component_areas"] = m.component_areas;
            j["warnings"] = measurement_warnings(m);
            j["calibration"] = to_json(*cal);
            detail::send_json(res, 200, j);
        }));

        server.Delete(base + "/:id", wrap([this](const Request& req, Response& res) {
            if (!store_.erase(req.path_params.at("id")))
                throw Error(ErrorCode::SessionNotFound,
                            "no session '" + req.path_params.at("id") + "'");
            res.status = 204;
        }));

        if (options_.static_dir)
            server.set_mount_point("/", options_.static_dir->string());
    }

private:
    template <typename F>
    static httplib::Server::Handler wrap(F f) {
        return [f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const Error& e) {
                detail::send_error(res, e);
            } catch (const nlohmann::json::exception& e) {
                detail::send_error(res, Error(ErrorCode::InvalidParameter, e.what()));
            } catch (const std::exception& e) {
                detail::send_json(res, 500, {{"code", "Internal"}, {"message", e.what()}});
            }
        };
    }

    static MeasureParams current_params(const Session& s) {
        std::shared_lock lock(s.mutex);
        return s.params;
    }

    ServiceOptions options_;
    SessionStore store_;
};

} // namespace leafmetric
