#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>

namespace qrc {

/// Local stand-in for the quantum random number service. Serves the same
/// JSON shape on `/API/jsonI.php`, with deterministic bytes so runs against
/// it can be reproduced.
class StubQrngServer {
public:
    enum class Mode { sequence, seeded, http_error, unsuccessful, malformed };

    explicit StubQrngServer(Mode mode = Mode::seeded, std::uint64_t seed = 1);
    ~StubQrngServer();
    StubQrngServer(const StubQrngServer&) = delete;
    StubQrngServer& operator=(const StubQrngServer&) = delete;

    /// Binds to `host:port` (port 0 picks a free one) and serves in a background thread.
    void start(const std::string& host = "127.0.0.1", int port = 0);
    /// Blocks serving on the calling thread.
    void listen(const std::string& host, int port);
    void stop();

    int port() const noexcept { return port_; }
    std::string endpoint() const;
    std::uint64_t requests() const noexcept { return requests_.load(); }
    void set_mode(Mode mode);

private:
    void install_routes();
    std::string respond(std::size_t length, int& status);

    struct Impl;
    std::unique_ptr<Impl> impl_;
    Mode mode_;
    std::mt19937_64 engine_;
    std::uint8_t counter_ = 0;
    std::mutex mutex_;
    std::thread thread_;
    std::string host_ = "127.0.0.1";
    int port_ = 0;
    std::atomic<std::uint64_t> requests_{0};
};

}  // namespace qrc
