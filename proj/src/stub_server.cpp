#include "qrc/stub_server.hpp"

#include "httplib.h"
#include "json.hpp"
#include "qrc/error.hpp"

namespace qrc {

struct StubQrngServer::Impl {
    httplib::Server server;
};

StubQrngServer::StubQrngServer(Mode mode, std::uint64_t seed)
    : impl_(std::make_unique<Impl>()), mode_(mode), engine_(seed) {
    install_routes();
}

StubQrngServer::~StubQrngServer() { stop(); }

void StubQrngServer::set_mode(Mode mode) {
    std::lock_guard lock(mutex_);
    mode_ = mode;
}

std::string StubQrngServer::respond(std::size_t length, int& status) {
    std::lock_guard lock(mutex_);
    status = 200;
    switch (mode_) {
        case Mode::http_error:
            status = 500;
            return "internal error";
        case Mode::unsuccessful:
            return R"({"type":"uint8","length":0,"data":[],"success":false})";
        case Mode::malformed:
            return R"({"type":"uint8","data":[1,2)";
        case Mode::sequence:
        case Mode::seeded:
            break;
    }
    nlohmann::json data = nlohmann::json::array();
    for (std::size_t i = 0; i < length; ++i) {
        if (mode_ == Mode::sequence) data.push_back(counter_++);
        else data.push_back(static_cast<int>(engine_() >> 56));
    }
    nlohmann::json doc{{"type", "uint8"}, {"length", length}, {"data", data}, {"success", true}};
    return doc.dump();
}

void StubQrngServer::install_routes() {
    impl_->server.Get("/API/jsonI.php", [this](const httplib::Request& req, httplib::Response& res) {
        ++requests_;
        std::size_t length = 1;
        if (req.has_param("length")) {
            try {
                length = std::stoul(req.get_param_value("length"));
            } catch (const std::exception&) {
                length = 0;
            }
        }
        if (length < 1 || length > 1024 || req.get_param_value("type") != "uint8") {
            res.status = 400;
            res.set_content(R"({"success":false})", "application/json");
            return;
        }
        int status = 200;
        auto body = respond(length, status);
        res.status = status;
        res.set_content(body, "application/json");
    });
}

void StubQrngServer::start(const std::string& host, int port) {
    host_ = host;
    if (port == 0) port_ = impl_->server.bind_to_any_port(host);
    else if (impl_->server.bind_to_port(host, port)) port_ = port;
    else port_ = -1;
    if (port_ <= 0) throw IoError("stub server could not bind " + host);
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void StubQrngServer::listen(const std::string& host, int port) {
    host_ = host;
    port_ = port;
    if (!impl_->server.listen(host, port)) throw IoError("stub server could not listen on port " + std::to_string(port));
}

void StubQrngServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

std::string StubQrngServer::endpoint() const {
    return "http://" + host_ + ":" + std::to_string(port_) + "/API/jsonI.php";
}

}  // namespace qrc
