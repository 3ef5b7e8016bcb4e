#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <thread>

#include <httplib.h>

#include "leafmetric/codec.hpp"
#include "leafmetric/segmentation.hpp"
#include "leafmetric/service.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace leafmetric;

inline BinaryMask to_mask(const oracle::Grid& g) {
    BinaryMask m(static_cast<std::size_t>(g.w), static_cast<std::size_t>(g.h));
    for (int y = 0; y < g.h; ++y)
        for (int x = 0; x < g.w; ++x)
            m.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), g.get(x, y) != 0);
    return m;
}

inline oracle::Grid to_grid(const BinaryMask& m) {
    oracle::Grid g(static_cast<int>(m.width()), static_cast<int>(m.height()));
    for (int y = 0; y < g.h; ++y)
        for (int x = 0; x < g.w; ++x)
            g.put(x, y, m(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) ? 1 : 0);
    return g;
}

inline constexpr Rgb white{255, 255, 255};
inline constexpr Rgb black{0, 0, 0};

/// 300x150 black rectangle at (50, 40) on a 400x230 white canvas.
inline RgbImage rectangle_scan() {
    RgbImage img(400, 230, white);
    for (std::size_t y = 40; y < 190; ++y)
        for (std::size_t x = 50; x < 350; ++x)
            img(x, y) = black;
    return img;
}

inline BinaryMask filled_rect_mask(std::size_t canvas_w, std::size_t canvas_h, std::size_t x0,
                                   std::size_t y0, std::size_t w, std::size_t h) {
    BinaryMask m(canvas_w, canvas_h);
    for (std::size_t y = y0; y < y0 + h; ++y)
        for (std::size_t x = x0; x < x0 + w; ++x)
            m.set(x, y, true);
    return m;
}

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("leafmetric-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void save_png(const std::filesystem::path& path, const RgbImage& img) {
    write_file(path, encode_png(img));
}

/// Service bound to an ephemeral loopback port for the lifetime of the object.
class RunningService {
public:
    explicit RunningService(ServiceOptions options = {},
                            SessionStore::ClockFn clock = [] { return Clock::now(); })
        : service_(std::move(options), std::move(clock)) {
        service_.mount(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~RunningService() {
        server_.stop();
        thread_.join();
    }

    int port() const { return port_; }
    Service& service() { return service_; }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(std::chrono::seconds(30));
        return c;
    }

private:
    Service service_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

struct PreviewParts {
    std::string png;
    std::string json;
};

/// Splits the two-part multipart/mixed preview payload.
inline PreviewParts split_preview(const std::string& body, const std::string& content_type) {
    const std::string key = "boundary=";
    const std::string boundary = "--" + content_type.substr(content_type.find(key) + key.size());
    PreviewParts parts;
    std::size_t pos = 0;
    for (std::string* out : {&parts.png, &parts.json}) {
        pos = body.find(boundary, pos);
        const std::size_t header_end = body.find("\r\n\r\n", pos);
        const std::size_t start = header_end + 4;
        const std::size_t end = body.find("\r\n" + boundary, start);
        *out = body.substr(start, end - start);
        pos = end + 2;
    }
    return parts;
}

inline std::string upload_body(const Bytes& bytes) {
    return std::string(bytes.begin(), bytes.end());
}

inline httplib::Result create_session(httplib::Client& c, const Bytes& bytes) {
    httplib::MultipartFormDataItems items = {
        {"image", upload_body(bytes), "scan.png", "application/octet-stream"}};
    return c.Post("/api/v1/sessions", items);
}

} // namespace fixtures
