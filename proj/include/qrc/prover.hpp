#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "qrc/chess.hpp"

namespace qrc::chess {

enum class MateOutcome : std::uint8_t { mate_in_k, no_forced_mate };

struct MateVerdict {
    MateOutcome outcome = MateOutcome::no_forced_mate;
    int k = 0;                              // > 0 iff outcome == mate_in_k
    std::vector<Move> key_moves;            // every first move forcing mate in k
    std::vector<Move> principal_variation;  // key, longest defence, shortest mate, ...

    bool is_mate() const noexcept { return outcome == MateOutcome::mate_in_k; }
};

inline constexpr int max_mate_depth = 5;

/// Depth-limited AND-OR search for forced mates. The side to move is the
/// attacker. Memo entries are keyed by position hash and kept between calls
/// until clear() is called; an instance must not be shared between threads.
class MateProver {
public:
    /// Minimal forced mate within `n_max` attacker moves (1 <= n_max <= 5).
    /// Throws ContractError for illegal or already-finished positions.
    MateVerdict prove(const Position& pos, int n_max);

    /// True iff the side to move can force mate within `moves` of its moves.
    bool mates_within(const Position& pos, int moves);

    /// True iff the side to move (the defender) is mated now or within
    /// `remaining` further attacker moves whatever it plays.
    bool defender_loses(const Position& pos, int remaining);

    void clear() { memo_.clear(); }
    std::uint64_t nodes() const noexcept { return nodes_; }

private:
    struct Bounds {
        std::uint8_t true_from = 255;  // proven for every depth >= true_from
        std::uint8_t false_to = 0;     // refuted for every depth <= false_to
    };
    std::unordered_map<std::uint64_t, Bounds> memo_;
    std::uint64_t nodes_ = 0;
};

/// Convenience wrapper with a fresh prover.
MateVerdict prove_mate_in_n(const Position& pos, int n_max);

}  // namespace qrc::chess
