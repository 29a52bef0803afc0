#pragma once

#include <cstdint>
#include <random>

#include "qrc/error.hpp"

namespace qrc {

class QuantumClient;

enum class Origin : std::uint8_t { pseudo, quantum };

/// One uniform value on [0, 1) and where it came from.
struct UnitDraw {
    double value = 0.0;
    Origin origin = Origin::pseudo;
};

/// Probability that a draw is served from the quantum stream.
class MixRatio {
public:
    constexpr MixRatio() = default;
    explicit MixRatio(double p) : p_(p) {
        if (!(p >= 0.0 && p <= 1.0)) throw ContractError("mix ratio must lie in [0, 1]");
    }
    constexpr double value() const noexcept { return p_; }
    bool operator==(const MixRatio&) const = default;

private:
    double p_ = 0.0;
};

/// The ratio recommended as a starting point when nothing better is known.
inline const MixRatio default_mix_ratio{0.15};

enum class FallbackPolicy : std::uint8_t { fail, use_pseudo };

struct EntropyStats {
    std::uint64_t pseudo_draws = 0;
    std::uint64_t quantum_draws = 0;
    std::uint64_t quantum_fetch_failures = 0;
    std::uint64_t fallback_events = 0;
    std::uint64_t selection_coins = 0;  // pseudo values spent on the mix coin

    std::uint64_t total_draws() const noexcept { return pseudo_draws + quantum_draws; }
    bool operator==(const EntropyStats&) const = default;
};

/// Anything that serves uniform unit draws.
class EntropySource {
public:
    virtual ~EntropySource() = default;
    virtual UnitDraw next_unit() = 0;
};

/// floor(n * unit): the generalised `Int(n * Rnd)`. Throws ContractError for n == 0.
std::uint32_t next_int_below(EntropySource& source, std::uint32_t n);
std::uint32_t int_below(double unit, std::uint32_t n);

/// Seeded std::mt19937_64; each draw keeps the top 53 bits.
class PseudoSource final : public EntropySource {
public:
    explicit PseudoSource(std::uint64_t seed) : engine_(seed) {}
    UnitDraw next_unit() override;

private:
    std::mt19937_64 engine_;
};

/// Seven quantum bytes per draw: 56 bits big-endian, top 53 kept, divided by 2^53.
class QuantumSource final : public EntropySource {
public:
    explicit QuantumSource(QuantumClient& client) : client_(client) {}
    /// Throws FetchError when the client cannot deliver bytes.
    UnitDraw next_unit() override;

private:
    QuantumClient& client_;
};

/// Chooses quantum with probability p per draw; the selection coin always
/// comes from the pseudo stream. A null quantum source behaves like one
/// whose every fetch fails.
class MixedSource final : public EntropySource {
public:
    MixedSource(EntropySource& pseudo, EntropySource* quantum, MixRatio ratio,
                FallbackPolicy policy = FallbackPolicy::use_pseudo);

    /// Throws EntropyUnavailable on quantum failure under FallbackPolicy::fail.
    UnitDraw next_unit() override;

    const EntropyStats& stats() const noexcept { return stats_; }
    MixRatio ratio() const noexcept { return ratio_; }

private:
    EntropySource& pseudo_;
    EntropySource* quantum_;
    MixRatio ratio_;
    FallbackPolicy policy_;
    EntropyStats stats_;
};

/// Assembles a unit value from 7 bytes (the first is most significant).
double unit_from_bytes(const std::uint8_t* bytes) noexcept;

/// splitmix64 finaliser, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

}  // namespace qrc
