#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrc/aesthetics.hpp"
#include "qrc/chess.hpp"
#include "qrc/entropy.hpp"

namespace qrc::composer {

/// Material to compose with, kings implicit. Written as "QR/P": White's
/// pieces, a slash, Black's pieces.
struct PieceConfiguration {
    std::vector<chess::PieceKind> white;
    std::vector<chess::PieceKind> black;

    static PieceConfiguration parse(std::string_view text);
    std::string notation() const;
    bool operator==(const PieceConfiguration&) const = default;
};

struct ComposerSettings {
    std::vector<PieceConfiguration> permissible;
    std::uint32_t attempts_min = 1;
    std::uint32_t attempts_max = 50;
    int target_depth = 3;
    std::uint32_t max_placement_retries = 20;

    void check() const;
    /// Stable text form, hashed into record and report headers.
    std::string canonical() const;
};

/// The twelve shipped material sets, from K+Q vs K up to eight-piece mixes.
const std::vector<PieceConfiguration>& default_configurations();
ComposerSettings default_settings();

PieceConfiguration select_configuration(EntropySource& entropy, const ComposerSettings& settings);
std::uint32_t attempts_count(EntropySource& entropy, const ComposerSettings& settings);

/// Random legal placement with White to move, or nullopt once every retry
/// failed. Kings go first on non-adjacent squares, then White's pieces, then
/// Black's, each on a uniformly drawn eligible empty square.
std::optional<chess::Position> generate_candidate(EntropySource& entropy, const PieceConfiguration& configuration,
                                                  std::uint32_t max_placement_retries = 20);

enum class Classification : std::uint8_t { mate_in_3, mate_in_2_byproduct, rejected_invalid, rejected_no_mate };
std::string_view to_string(Classification c);
Classification classification_from_string(std::string_view text);

struct CompositionRecord {
    std::string fen;
    Classification classification = Classification::rejected_no_mate;
    std::string configuration;
    std::vector<std::string> key_moves;
    std::vector<std::string> principal_variation;
    std::optional<aesthetics::AestheticBreakdown> aesthetics;
    EntropyStats entropy;
    std::string set_label;
    int instance_id = 0;
    std::uint64_t seed = 0;
    std::uint64_t timestamp = 0;  // attempt ordinal within the instance

    bool accepted() const noexcept {
        return classification == Classification::mate_in_3 || classification == Classification::mate_in_2_byproduct;
    }
    std::optional<double> aesthetic_score() const {
        return aesthetics ? std::optional<double>(aesthetics->total) : std::nullopt;
    }
    bool operator==(const CompositionRecord&) const = default;
};

struct ComposeDiagnostics {
    std::uint64_t attempts = 0;
    std::uint64_t placement_failures = 0;
    std::uint64_t rejected_invalid = 0;
    std::uint64_t rejected_no_mate = 0;
    std::uint64_t mate_in_1_discarded = 0;
    std::uint64_t mate_in_3 = 0;
    std::uint64_t mate_in_2 = 0;
    bool operator==(const ComposeDiagnostics&) const = default;
};

struct Budget {
    std::optional<std::uint64_t> attempts;
    std::optional<std::chrono::milliseconds> wall_clock;

    static Budget of_attempts(std::uint64_t n) { return {n, std::nullopt}; }
};

struct ComposeContext {
    std::string set_label;
    int instance_id = 0;
    std::uint64_t seed = 0;
    const MixedSource* provenance = nullptr;  // source of entropy snapshots, if any
    ComposeDiagnostics* progress = nullptr;   // kept current after every attempt, if given
};

using RecordSink = std::function<void(const CompositionRecord&)>;

/// The composing loop: pick a configuration, draw how many attempts to give
/// it, then generate and prove candidates until the budget runs out.
/// Accepted records go to `sink` as they are produced. EntropyUnavailable
/// propagates; records already sunk stay valid.
ComposeDiagnostics compose(EntropySource& entropy, const ComposerSettings& settings, const Budget& budget,
                           const ComposeContext& context, const RecordSink& sink);

}  // namespace qrc::composer
