#include "qrc/aesthetics.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <set>

namespace qrc::aesthetics {

using chess::Color;
using chess::Move;
using chess::PieceKind;
using chess::Position;
using chess::Square;

namespace {

int sign(int x) { return (x > 0) - (x < 0); }

// True iff `between` lies strictly inside the straight line from `a` to `b`.
bool on_segment(Square a, Square b, Square between) {
    const int df = chess::file_of(b) - chess::file_of(a);
    const int dr = chess::rank_of(b) - chess::rank_of(a);
    if (df != 0 && dr != 0 && std::abs(df) != std::abs(dr)) return false;
    const int step = sign(dr) * 8 + sign(df);
    for (Square s = a + step; s != b; s += step)
        if (s == between) return true;
    return false;
}

bool is_slider(PieceKind k) {
    return k == PieceKind::bishop || k == PieceKind::rook || k == PieceKind::queen;
}

PieceKind arriving_kind(const Position& pos, const Move& m) {
    return m.promotion ? *m.promotion : pos.at(m.from)->kind;
}

/// Identity of each White piece (its starting square), carried through moves.
using Identities = std::array<int, 64>;

void carry(Identities& ids, const Position& before, const Move& m) {
    const Color mover = before.at(m.from)->color;
    Square captured = m.to;
    if (m.flags & chess::flag_en_passant) captured = mover == Color::white ? m.to - 8 : m.to + 8;
    ids[captured] = -1;
    ids[m.to] = ids[m.from];
    ids[m.from] = -1;
    if (m.flags & chess::flag_castle) {
        const int home = mover == Color::white ? 0 : 56;
        const bool kingside = m.to == home + 6;
        const Square rook_from = kingside ? home + 7 : home;
        const Square rook_to = kingside ? home + 5 : home + 3;
        ids[rook_to] = ids[rook_from];
        ids[rook_from] = -1;
    }
}

struct TreeWalker {
    chess::MateProver& prover;
    std::set<int> participating;

    // Attacker to move with a forced mate in exactly `moves`.
    void attacker_node(const Position& pos, const Identities& ids, int moves) {
        for (const auto& m : pos.legal_moves()) {
            const Position next = pos.after(m);
            if (!prover.defender_loses(next, moves - 1)) continue;
            participating.insert(ids[m.from]);
            Identities next_ids = ids;
            carry(next_ids, pos, m);
            defender_node(next, next_ids, moves - 1);
            return;
        }
    }

    void defender_node(const Position& pos, const Identities& ids, int remaining) {
        const auto replies = pos.legal_moves();
        if (replies.empty()) {
            const Square k = pos.king_square(pos.side_to_move());
            for (Square a : pos.attackers(k, chess::opposite(pos.side_to_move()))) participating.insert(ids[a]);
            return;
        }
        for (const auto& r : replies) {
            const Position next = pos.after(r);
            int len = 1;
            while (len < remaining && !prover.mates_within(next, len)) ++len;
            Identities next_ids = ids;
            carry(next_ids, pos, r);
            attacker_node(next, next_ids, len);
        }
    }
};

}  // namespace

bool detect_pin(const Position& pos) {
    Position black = pos;
    black.set_en_passant(pos.side_to_move() == Color::black ? pos.en_passant() : std::nullopt);
    black.set_side_to_move(Color::black);
    for (const auto& m : black.pseudo_legal_moves()) {
        if (black.at(m.from)->kind == PieceKind::king) continue;
        const Position next = black.after(m);
        const Square k = next.king_square(Color::black);
        const auto hits = next.attackers(k, Color::white);
        if (hits.empty()) continue;
        bool exposed_only = true;
        for (Square a : hits)
            if (!is_slider(next.at(a)->kind) || !on_segment(a, k, m.from)) exposed_only = false;
        if (exposed_only) return true;
    }
    return false;
}

bool detect_fork(const Position& pos, const Move& move) {
    const Color mover = pos.at(move.from)->color;
    const Color them = chess::opposite(mover);
    const Position next = pos.after(move);
    int valuable = 0;
    for (Square sq = 0; sq < 64; ++sq) {
        const auto p = next.at(sq);
        if (!p || p->color != them) continue;
        const auto hits = next.attackers(sq, mover);
        if (std::find(hits.begin(), hits.end(), static_cast<Square>(move.to)) == hits.end()) continue;
        if (p->kind == PieceKind::king) return true;
        if (chess::piece_value(p->kind) >= 3) ++valuable;
    }
    return valuable >= 2;
}

bool detect_sacrifice(const Position& pos, const Move& move) {
    const int value = chess::piece_value(arriving_kind(pos, move));
    if (value < 3) throw ContractError("sacrifice detection needs a moving piece worth at least 3");
    const Color them = chess::opposite(pos.at(move.from)->color);
    const Position next = pos.after(move);
    for (Square a : next.attackers(move.to, them)) {
        const auto kind = next.at(a)->kind;
        if (kind != PieceKind::king && chess::piece_value(kind) < value) return true;
    }
    return false;
}

AestheticBreakdown score(const Position& pos, const chess::MateVerdict& verdict) {
    if (!verdict.is_mate() || verdict.principal_variation.empty())
        throw ContractError("scoring needs a mate verdict with a principal variation");
    const Color attacker = pos.side_to_move();

    Identities ids;
    ids.fill(-1);
    int material = 0;
    for (Square sq = 0; sq < 64; ++sq) {
        const auto p = pos.at(sq);
        if (p && p->color == attacker && p->kind != PieceKind::king) {
            ids[sq] = sq;
            material += chess::piece_value(p->kind);
        }
    }

    chess::MateProver prover;
    TreeWalker walker{prover, {}};
    const Move& key = verdict.principal_variation.front();
    walker.participating.insert(ids[key.from]);
    Identities after_key = ids;
    carry(after_key, pos, key);
    walker.defender_node(pos.after(key), after_key, verdict.k - 1);

    AestheticBreakdown out;
    if (material == 0) {
        out.economy = 1.0;
    } else {
        int used = 0;
        for (int id : walker.participating)
            if (id >= 0) used += chess::piece_value(pos.at(id)->kind);
        out.economy = static_cast<double>(used) / material;
    }
    out.sparsity = 1.0 - pos.piece_count() / 32.0;

    Position cur = pos;
    for (const auto& m : verdict.principal_variation) {
        if (cur.side_to_move() == attacker) {
            out.fork = out.fork || detect_fork(cur, m);
            if (chess::piece_value(arriving_kind(cur, m)) >= 3)
                out.sacrifice = out.sacrifice || detect_sacrifice(cur, m);
            cur = cur.after(m);
            out.pin = out.pin || detect_pin(cur);
        } else {
            cur = cur.after(m);
        }
    }
    out.theme_bonus = 0.5 * (out.pin + out.fork + out.sacrifice);
    out.total = out.economy + out.sparsity + out.theme_bonus;
    return out;
}

}  // namespace qrc::aesthetics
