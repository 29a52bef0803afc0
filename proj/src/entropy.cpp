#include "qrc/entropy.hpp"

#include <array>
#include <cmath>

#include "qrc/quantum_client.hpp"

namespace qrc {

std::uint32_t int_below(double unit, std::uint32_t n) {
    if (n == 0) throw ContractError("next_int_below: n must be at least 1");
    const auto r = static_cast<std::uint64_t>(std::floor(static_cast<double>(n) * unit));
    return static_cast<std::uint32_t>(r < n ? r : n - 1);
}

std::uint32_t next_int_below(EntropySource& source, std::uint32_t n) {
    if (n == 0) throw ContractError("next_int_below: n must be at least 1");
    return int_below(source.next_unit().value, n);
}

double unit_from_bytes(const std::uint8_t* bytes) noexcept {
    std::uint64_t bits = 0;
    for (int i = 0; i < 7; ++i) bits = (bits << 8) | bytes[i];
    return static_cast<double>(bits >> 3) * 0x1.0p-53;
}

std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

UnitDraw PseudoSource::next_unit() {
    return {static_cast<double>(engine_() >> 11) * 0x1.0p-53, Origin::pseudo};
}

UnitDraw QuantumSource::next_unit() {
    std::array<std::uint8_t, 7> bytes{};
    client_.fetch_into(bytes);
    return {unit_from_bytes(bytes.data()), Origin::quantum};
}

MixedSource::MixedSource(EntropySource& pseudo, EntropySource* quantum, MixRatio ratio, FallbackPolicy policy)
    : pseudo_(pseudo), quantum_(quantum), ratio_(ratio), policy_(policy) {}

UnitDraw MixedSource::next_unit() {
    const double coin = pseudo_.next_unit().value;
    ++stats_.selection_coins;
    if (coin < ratio_.value()) {
        try {
            if (!quantum_) throw FetchError("no quantum source configured");
            UnitDraw d = quantum_->next_unit();
            d.origin = Origin::quantum;
            ++stats_.quantum_draws;
            return d;
        } catch (const FetchError& e) {
            ++stats_.quantum_fetch_failures;
            if (policy_ == FallbackPolicy::fail)
                throw EntropyUnavailable(std::string("quantum entropy unavailable: ") + e.what());
            ++stats_.fallback_events;
        }
    }
    UnitDraw d = pseudo_.next_unit();
    d.origin = Origin::pseudo;
    ++stats_.pseudo_draws;
    return d;
}

}  // namespace qrc
