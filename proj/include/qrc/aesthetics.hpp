#pragma once

#include <string_view>

#include "qrc/chess.hpp"
#include "qrc/prover.hpp"

namespace qrc::aesthetics {

/// Written into every record file and report header.
inline constexpr std::string_view scorer_version = "surrogate-1";

/// economy + sparsity + theme_bonus, in [0, 3.5].
///
/// economy: value-weighted share of White's non-king material that moves
/// somewhere in the solution tree or gives check in one of its final
/// mates (1 when White has only a king). sparsity: 1 - pieces/32.
/// theme_bonus: 0.5 for each of pin, fork and sacrifice seen along the
/// principal variation.
struct AestheticBreakdown {
    double economy = 0.0;
    double sparsity = 0.0;
    double theme_bonus = 0.0;
    double total = 0.0;
    bool pin = false;
    bool fork = false;
    bool sacrifice = false;

    bool operator==(const AestheticBreakdown&) const = default;
};

/// Throws ContractError unless the verdict is a mate with a principal variation.
AestheticBreakdown score(const chess::Position& pos, const chess::MateVerdict& verdict);

/// Some Black non-king piece has a pseudo-legal move that is illegal only
/// because it opens a line onto its own king.
bool detect_pin(const chess::Position& pos);

/// After `move`, the moved White piece attacks the Black king or at least
/// two Black pieces worth 3 or more.
bool detect_fork(const chess::Position& pos, const chess::Move& move);

/// After `move`, the destination is attacked by a Black piece of strictly
/// lower value. The arriving piece must be worth at least 3.
bool detect_sacrifice(const chess::Position& pos, const chess::Move& move);

}  // namespace qrc::aesthetics
