#include "qrc/prover.hpp"

#include <algorithm>

namespace qrc::chess {
namespace {

struct Child {
    Position pos;
    bool check;
    bool capture;
};

// Checks first, then captures, then quiet moves; stable within each group.
std::vector<Child> ordered_children(const Position& pos) {
    std::vector<Child> out;
    const auto moves = pos.legal_moves();
    out.reserve(moves.size());
    for (const auto& m : moves) {
        Position next = pos.after(m);
        const bool check = next.in_check();
        out.push_back(Child{std::move(next), check, m.is_capture()});
    }
    std::stable_sort(out.begin(), out.end(), [](const Child& a, const Child& b) {
        const int ra = a.check ? 0 : a.capture ? 1 : 2;
        const int rb = b.check ? 0 : b.capture ? 1 : 2;
        return ra < rb;
    });
    return out;
}

}  // namespace

bool MateProver::mates_within(const Position& pos, int moves) {
    if (moves <= 0) return false;
    auto& entry = memo_[pos.hash()];
    if (moves >= entry.true_from) return true;
    if (moves <= entry.false_to) return false;
    ++nodes_;

    bool found = false;
    if (moves == 1) {
        std::vector<Move> list = pos.legal_moves();
        for (const auto& m : list) {
            const Position next = pos.after(m);
            if (next.in_check() && !next.has_legal_move()) {
                found = true;
                break;
            }
        }
    } else {
        for (const auto& child : ordered_children(pos)) {
            if (defender_loses(child.pos, moves - 1)) {
                found = true;
                break;
            }
        }
    }
    // The reference may have been invalidated by rehashing during recursion.
    auto& slot = memo_[pos.hash()];
    if (found) slot.true_from = std::min<std::uint8_t>(slot.true_from, static_cast<std::uint8_t>(moves));
    else slot.false_to = std::max<std::uint8_t>(slot.false_to, static_cast<std::uint8_t>(moves));
    return found;
}

bool MateProver::defender_loses(const Position& pos, int remaining) {
    ++nodes_;
    const auto replies = pos.legal_moves();
    if (replies.empty()) return pos.in_check();
    if (remaining <= 0) return false;
    // Captures first: they most often refute.
    std::vector<const Move*> order;
    order.reserve(replies.size());
    for (const auto& m : replies)
        if (m.is_capture()) order.push_back(&m);
    for (const auto& m : replies)
        if (!m.is_capture()) order.push_back(&m);
    for (const Move* m : order)
        if (!mates_within(pos.after(*m), remaining)) return false;
    return true;
}

MateVerdict MateProver::prove(const Position& pos, int n_max) {
    if (n_max < 1 || n_max > max_mate_depth)
        throw ContractError("mate depth must be between 1 and " + std::to_string(max_mate_depth));
    if (auto problem = pos.validate()) throw ContractError("illegal position: " + *problem);
    const auto moves = pos.legal_moves();
    if (moves.empty() && pos.in_check()) throw ContractError("position is already checkmate");

    MateVerdict verdict;
    for (int k = 1; k <= n_max && !verdict.is_mate(); ++k) {
        for (const auto& m : moves)
            if (defender_loses(pos.after(m), k - 1)) verdict.key_moves.push_back(m);
        if (!verdict.key_moves.empty()) {
            verdict.outcome = MateOutcome::mate_in_k;
            verdict.k = k;
        }
    }
    if (!verdict.is_mate()) return verdict;

    Position cur = pos.after(verdict.key_moves.front());
    verdict.principal_variation.push_back(verdict.key_moves.front());
    int remaining = verdict.k - 1;
    while (true) {
        const auto replies = cur.legal_moves();
        if (replies.empty()) break;
        // Longest resistance: the reply whose shortest mate is largest.
        const Move* best = nullptr;
        int best_len = 0;
        for (const auto& r : replies) {
            const Position next = cur.after(r);
            int len = 1;
            while (len < remaining && !mates_within(next, len)) ++len;
            if (len > best_len) {
                best_len = len;
                best = &r;
            }
        }
        verdict.principal_variation.push_back(*best);
        cur = cur.after(*best);
        for (const auto& m : cur.legal_moves()) {
            const Position next = cur.after(m);
            if (defender_loses(next, best_len - 1)) {
                verdict.principal_variation.push_back(m);
                cur = next;
                break;
            }
        }
        remaining = best_len - 1;
    }
    return verdict;
}

MateVerdict prove_mate_in_n(const Position& pos, int n_max) {
    MateProver prover;
    return prover.prove(pos, n_max);
}

}  // namespace qrc::chess
