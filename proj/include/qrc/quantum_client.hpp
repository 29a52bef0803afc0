#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qrc/entropy.hpp"

namespace qrc {

/// One failed acquisition attempt (timeout, bad status, malformed body,
/// exhausted replay file).
class FetchError : public IoError {
public:
    using IoError::IoError;
};

inline constexpr const char* default_qrng_endpoint = "https://qrng.anu.edu.au/API/jsonI.php";
inline constexpr const char* qrng_endpoint_env = "QRC_QRNG_ENDPOINT";

struct QuantumClientConfig {
    std::string endpoint_url = default_qrng_endpoint;
    std::size_t block_size = 1024;
    std::size_t low_watermark = 128;
    std::chrono::milliseconds request_timeout{5000};
    FallbackPolicy fallback_policy = FallbackPolicy::use_pseudo;

    /// Throws ContractError unless 1 <= block_size <= 1024 and low_watermark < block_size.
    void check() const;
};

/// A raw supplier of bytes; each call is one request to the backing medium.
class ByteFeed {
public:
    virtual ~ByteFeed() = default;
    /// Exactly `count` bytes or a FetchError.
    virtual std::vector<std::uint8_t> request(std::size_t count) = 0;
    virtual std::string describe() const = 0;
};

/// HTTP GET `<endpoint>?length=N&type=uint8`, JSON body with `data` and `success`.
class HttpByteFeed final : public ByteFeed {
public:
    HttpByteFeed(std::string endpoint_url, std::chrono::milliseconds timeout);
    std::vector<std::uint8_t> request(std::size_t count) override;
    std::string describe() const override { return endpoint_; }

private:
    std::string endpoint_;
    std::string scheme_host_port_;
    std::string path_;
    std::chrono::milliseconds timeout_;
};

/// Parses a server response body; throws FetchError when malformed or unsuccessful.
std::vector<std::uint8_t> parse_qrng_response(const std::string& body, std::size_t expected);

/// Reads a byte file in order, optionally restricted to a slice.
class ReplayByteFeed final : public ByteFeed {
public:
    explicit ReplayByteFeed(const std::filesystem::path& path, std::uintmax_t offset = 0,
                            std::uintmax_t length = UINTMAX_MAX);
    std::vector<std::uint8_t> request(std::size_t count) override;
    std::string describe() const override { return path_.string(); }
    std::uintmax_t remaining() const noexcept { return remaining_; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::uintmax_t remaining_;
};

/// In-memory bytes, consumed in order; mostly for tests.
class MemoryByteFeed final : public ByteFeed {
public:
    explicit MemoryByteFeed(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}
    std::vector<std::uint8_t> request(std::size_t count) override;
    std::string describe() const override { return "memory"; }

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

/// Tees every successful request to a file, so a live run can be replayed.
class RecordingByteFeed final : public ByteFeed {
public:
    RecordingByteFeed(std::unique_ptr<ByteFeed> inner, const std::filesystem::path& path);
    std::vector<std::uint8_t> request(std::size_t count) override;
    std::string describe() const override { return inner_->describe(); }

private:
    std::unique_ptr<ByteFeed> inner_;
    std::ofstream out_;
};

/// Buffered quantum byte acquisition over a ByteFeed.
///
/// Refill rule: whole blocks are requested while fewer than the requested
/// bytes are buffered; after serving, one more block is prefetched whenever
/// the buffer has dropped below the low watermark. Serving n bytes from a
/// fresh client therefore costs ceil((n + low_watermark) / block_size)
/// requests.
class QuantumClient {
public:
    QuantumClient(std::unique_ptr<ByteFeed> feed, QuantumClientConfig config, std::ostream* audit = nullptr);

    /// Exactly `count` bytes; throws FetchError after recording the failure.
    std::vector<std::uint8_t> fetch(std::size_t count);
    void fetch_into(std::span<std::uint8_t> out);

    const QuantumClientConfig& config() const noexcept { return config_; }
    std::uint64_t requests() const noexcept { return requests_; }
    std::uint64_t failures() const noexcept { return failures_; }
    std::uint64_t bytes_served() const noexcept { return served_; }
    std::size_t buffered() const noexcept { return buffer_.size(); }

private:
    void refill();

    std::unique_ptr<ByteFeed> feed_;
    QuantumClientConfig config_;
    std::ostream* audit_;
    std::deque<std::uint8_t> buffer_;
    std::uint64_t requests_ = 0;
    std::uint64_t failures_ = 0;
    std::uint64_t served_ = 0;
};

}  // namespace qrc
