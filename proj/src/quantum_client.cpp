#include "qrc/quantum_client.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>

#include "httplib.h"
#include "json.hpp"

namespace qrc {
namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
    return os.str();
}

}  // namespace

void QuantumClientConfig::check() const {
    if (block_size < 1 || block_size > 1024) throw ContractError("quantum block_size must be in [1, 1024]");
    if (low_watermark >= block_size) throw ContractError("quantum low_watermark must be below block_size");
    if (request_timeout.count() <= 0) throw ContractError("quantum request_timeout must be positive");
}

// --- HTTP ------------------------------------------------------------------

HttpByteFeed::HttpByteFeed(std::string endpoint_url, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint_url)), timeout_(timeout) {
    const auto scheme_end = endpoint_.find("://");
    if (scheme_end == std::string::npos) throw ContractError("endpoint URL needs a scheme: " + endpoint_);
    const auto path_begin = endpoint_.find('/', scheme_end + 3);
    scheme_host_port_ = endpoint_.substr(0, path_begin);
    path_ = path_begin == std::string::npos ? "/" : endpoint_.substr(path_begin);
}

std::vector<std::uint8_t> parse_qrng_response(const std::string& body, std::size_t expected) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw FetchError(std::string("malformed response: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("success") || !doc["success"].is_boolean())
        throw FetchError("malformed response: missing 'success'");
    if (!doc["success"].get<bool>()) throw FetchError("server reported success=false");
    if (!doc.contains("data") || !doc["data"].is_array()) throw FetchError("malformed response: missing 'data'");
    const auto& data = doc["data"];
    if (data.size() != expected)
        throw FetchError("malformed response: expected " + std::to_string(expected) + " values, got " +
                         std::to_string(data.size()));
    std::vector<std::uint8_t> out;
    out.reserve(expected);
    for (const auto& v : data) {
        if (!v.is_number_integer()) throw FetchError("malformed response: non-integer datum");
        const auto x = v.get<long long>();
        if (x < 0 || x > 255) throw FetchError("malformed response: datum outside 0..255");
        out.push_back(static_cast<std::uint8_t>(x));
    }
    return out;
}

std::vector<std::uint8_t> HttpByteFeed::request(std::size_t count) {
    httplib::Client client(scheme_host_port_);
    if (!client.is_valid()) throw FetchError("unsupported endpoint: " + endpoint_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    const char sep = path_.find('?') == std::string::npos ? '?' : '&';
    const std::string target = path_ + sep + "length=" + std::to_string(count) + "&type=uint8";
    auto res = client.Get(target);
    if (!res) throw FetchError("request to " + endpoint_ + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw FetchError("request to " + endpoint_ + " returned HTTP " + std::to_string(res->status));
    return parse_qrng_response(res->body, count);
}

// --- files and memory ------------------------------------------------------

ReplayByteFeed::ReplayByteFeed(const std::filesystem::path& path, std::uintmax_t offset, std::uintmax_t length)
    : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open replay file " + path.string());
    const auto size = std::filesystem::file_size(path);
    if (offset > size) throw ContractError("replay offset beyond end of " + path.string());
    remaining_ = std::min(length, size - offset);
    in_.seekg(static_cast<std::streamoff>(offset));
}

std::vector<std::uint8_t> ReplayByteFeed::request(std::size_t count) {
    if (count > remaining_) throw FetchError("replay file exhausted: " + path_.string());
    std::vector<std::uint8_t> out(count);
    in_.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in_.gcount()) != count) throw FetchError("short read from " + path_.string());
    remaining_ -= count;
    return out;
}

std::vector<std::uint8_t> MemoryByteFeed::request(std::size_t count) {
    if (count > bytes_.size() - pos_) throw FetchError("memory feed exhausted");
    std::vector<std::uint8_t> out(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + count));
    pos_ += count;
    return out;
}

RecordingByteFeed::RecordingByteFeed(std::unique_ptr<ByteFeed> inner, const std::filesystem::path& path)
    : inner_(std::move(inner)), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open recording file " + path.string());
}

std::vector<std::uint8_t> RecordingByteFeed::request(std::size_t count) {
    auto bytes = inner_->request(count);
    out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out_.flush();
    return bytes;
}

// --- buffered client -------------------------------------------------------

QuantumClient::QuantumClient(std::unique_ptr<ByteFeed> feed, QuantumClientConfig config, std::ostream* audit)
    : feed_(std::move(feed)), config_(std::move(config)), audit_(audit) {
    if (!feed_) throw ContractError("quantum client needs a byte feed");
    config_.check();
}

void QuantumClient::refill() {
    ++requests_;
    try {
        auto bytes = feed_->request(config_.block_size);
        buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
        if (audit_) *audit_ << utc_timestamp() << ' ' << bytes.size() << " ok\n";
    } catch (const FetchError& e) {
        ++failures_;
        if (audit_) *audit_ << utc_timestamp() << ' ' << config_.block_size << " error " << e.what() << '\n';
        throw;
    }
}

void QuantumClient::fetch_into(std::span<std::uint8_t> out) {
    if (out.empty()) throw ContractError("quantum fetch count must be at least 1");
    while (buffer_.size() < out.size()) refill();
    std::copy_n(buffer_.begin(), out.size(), out.begin());
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(out.size()));
    served_ += out.size();
    if (buffer_.size() < config_.low_watermark) {
        // A failed prefetch is not fatal: the bytes for this call are already served.
        try {
            refill();
        } catch (const FetchError&) {
        }
    }
}

std::vector<std::uint8_t> QuantumClient::fetch(std::size_t count) {
    std::vector<std::uint8_t> out(count);
    fetch_into(out);
    return out;
}

}  // namespace qrc
