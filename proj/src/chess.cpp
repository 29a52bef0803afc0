#include "qrc/chess.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

namespace qrc::chess {
namespace {

constexpr std::uint8_t color_bit = 8;

constexpr std::uint8_t encode(Piece p) noexcept {
    return static_cast<std::uint8_t>(p.kind) | (p.color == Color::black ? color_bit : 0);
}
constexpr PieceKind kind_of(std::uint8_t code) noexcept { return static_cast<PieceKind>(code & 7); }
constexpr Color color_of(std::uint8_t code) noexcept {
    return (code & color_bit) ? Color::black : Color::white;
}
constexpr std::uint8_t code_of(Color c, PieceKind k) noexcept { return encode(Piece{c, k}); }

struct Targets {
    std::array<std::int8_t, 8> sq{};
    int count = 0;
};

// Rays are indexed orthogonal first (0..3), then diagonal (4..7).
constexpr std::array<std::pair<int, int>, 8> ray_steps{{
    {0, 1}, {0, -1}, {1, 0}, {-1, 0}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};

struct Tables {
    std::array<Targets, 64> knight{};
    std::array<Targets, 64> king{};
    std::array<std::array<Targets, 8>, 64> rays{};
    std::array<std::uint64_t, 16 * 64> piece_keys{};
    std::array<std::uint64_t, 16> castling_keys{};
    std::array<std::uint64_t, 8> ep_keys{};
    std::uint64_t side_key = 0;

    Tables() {
        constexpr std::array<std::pair<int, int>, 8> jumps{{
            {1, 2}, {2, 1}, {2, -1}, {1, -2}, {-1, -2}, {-2, -1}, {-2, 1}, {-1, 2}}};
        for (Square sq = 0; sq < 64; ++sq) {
            const int f = file_of(sq), r = rank_of(sq);
            for (auto [df, dr] : jumps) {
                const int nf = f + df, nr = r + dr;
                if (nf >= 0 && nf < 8 && nr >= 0 && nr < 8)
                    knight[sq].sq[knight[sq].count++] = static_cast<std::int8_t>(make_square(nf, nr));
            }
            for (int d = 0; d < 8; ++d) {
                auto [df, dr] = ray_steps[d];
                const int nf = f + df, nr = r + dr;
                if (nf >= 0 && nf < 8 && nr >= 0 && nr < 8)
                    king[sq].sq[king[sq].count++] = static_cast<std::int8_t>(make_square(nf, nr));
                int cf = nf, cr = nr;
                while (cf >= 0 && cf < 8 && cr >= 0 && cr < 8) {
                    rays[sq][d].sq[rays[sq][d].count++] = static_cast<std::int8_t>(make_square(cf, cr));
                    cf += df;
                    cr += dr;
                }
            }
        }
        // splitmix64 with a fixed seed, so hashes are stable across runs.
        std::uint64_t state = 0x5157'4e47'4348'4553ULL;
        auto next = [&state] {
            std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            return z ^ (z >> 31);
        };
        for (auto& k : piece_keys) k = next();
        for (auto& k : castling_keys) k = next();
        for (auto& k : ep_keys) k = next();
        side_key = next();
    }
};

const Tables& tables() {
    static const Tables t;
    return t;
}

constexpr std::array<PieceKind, 4> promotion_kinds{
    PieceKind::queen, PieceKind::rook, PieceKind::bishop, PieceKind::knight};

// Castling rights that survive a move touching the given square.
constexpr std::uint8_t castling_mask(Square sq) noexcept {
    switch (sq) {
        case 0: return static_cast<std::uint8_t>(~white_queenside);
        case 4: return static_cast<std::uint8_t>(~(white_kingside | white_queenside));
        case 7: return static_cast<std::uint8_t>(~white_kingside);
        case 56: return static_cast<std::uint8_t>(~black_queenside);
        case 60: return static_cast<std::uint8_t>(~(black_kingside | black_queenside));
        case 63: return static_cast<std::uint8_t>(~black_kingside);
        default: return 0xff;
    }
}

}  // namespace

int piece_value(PieceKind kind) noexcept {
    switch (kind) {
        case PieceKind::pawn: return 1;
        case PieceKind::knight: return 3;
        case PieceKind::bishop: return 3;
        case PieceKind::rook: return 5;
        case PieceKind::queen: return 9;
        case PieceKind::king: return 0;
    }
    return 0;
}

char piece_char(Piece piece) noexcept {
    constexpr std::string_view letters = " pnbrqk";
    char c = letters[static_cast<int>(piece.kind)];
    return piece.color == Color::white ? static_cast<char>(c - 'a' + 'A') : c;
}

std::optional<Piece> piece_from_char(char c) noexcept {
    const Color color = (c >= 'A' && c <= 'Z') ? Color::white : Color::black;
    switch (c | 0x20) {
        case 'p': return Piece{color, PieceKind::pawn};
        case 'n': return Piece{color, PieceKind::knight};
        case 'b': return Piece{color, PieceKind::bishop};
        case 'r': return Piece{color, PieceKind::rook};
        case 'q': return Piece{color, PieceKind::queen};
        case 'k': return Piece{color, PieceKind::king};
        default: return std::nullopt;
    }
}

std::string square_name(Square sq) {
    return {static_cast<char>('a' + file_of(sq)), static_cast<char>('1' + rank_of(sq))};
}

std::optional<Square> parse_square(std::string_view text) noexcept {
    if (text.size() != 2) return std::nullopt;
    const int f = text[0] - 'a', r = text[1] - '1';
    if (f < 0 || f > 7 || r < 0 || r > 7) return std::nullopt;
    return make_square(f, r);
}

std::string Move::uci() const {
    std::string s = square_name(from) + square_name(to);
    if (promotion) s += static_cast<char>(piece_char(Piece{Color::black, *promotion}));
    return s;
}

// ---------------------------------------------------------------------------

Position::Position() { hash_ = compute_hash(); }

Position Position::start() { return from_fen(start_fen); }

std::optional<Piece> Position::at(Square sq) const noexcept {
    const auto code = board_[sq];
    if (!code) return std::nullopt;
    return Piece{color_of(code), kind_of(code)};
}

void Position::set_cell(Square sq, std::uint8_t code) noexcept {
    const auto& t = tables();
    if (board_[sq]) hash_ ^= t.piece_keys[board_[sq] * 64 + sq];
    board_[sq] = code;
    if (code) {
        hash_ ^= t.piece_keys[code * 64 + sq];
        if (kind_of(code) == PieceKind::king) kings_[static_cast<int>(color_of(code))] = static_cast<std::int8_t>(sq);
    }
}

void Position::put(Square sq, Piece piece) {
    if (sq < 0 || sq > 63) throw ContractError("square out of range");
    remove(sq);
    set_cell(sq, encode(piece));
}

void Position::remove(Square sq) {
    if (sq < 0 || sq > 63) throw ContractError("square out of range");
    const auto code = board_[sq];
    if (!code) return;
    set_cell(sq, 0);
    if (kind_of(code) == PieceKind::king && kings_[static_cast<int>(color_of(code))] == sq) {
        auto& k = kings_[static_cast<int>(color_of(code))];
        k = -1;
        for (Square s = 0; s < 64; ++s)
            if (board_[s] == code) k = static_cast<std::int8_t>(s);
    }
}

void Position::set_side_to_move(Color c) {
    if (c != side_) hash_ ^= tables().side_key;
    side_ = c;
}

void Position::set_castling(std::uint8_t rights) {
    const auto& t = tables();
    hash_ ^= t.castling_keys[castling_] ^ t.castling_keys[rights & 15];
    castling_ = rights & 15;
}

std::optional<Square> Position::en_passant() const noexcept {
    if (en_passant_ < 0) return std::nullopt;
    return en_passant_;
}

void Position::set_en_passant(std::optional<Square> sq) {
    const auto& t = tables();
    if (en_passant_ >= 0) hash_ ^= t.ep_keys[file_of(en_passant_)];
    en_passant_ = sq ? static_cast<std::int8_t>(*sq) : std::int8_t{-1};
    if (en_passant_ >= 0) hash_ ^= t.ep_keys[file_of(en_passant_)];
}

void Position::set_counters(int halfmove, int fullmove) {
    if (halfmove < 0 || halfmove > 65535 || fullmove < 1 || fullmove > 65535)
        throw ContractError("move counters out of range");
    halfmove_ = static_cast<std::uint16_t>(halfmove);
    fullmove_ = static_cast<std::uint16_t>(fullmove);
}

int Position::piece_count() const noexcept {
    int n = 0;
    for (auto c : board_) n += c != 0;
    return n;
}

std::uint64_t Position::compute_hash() const noexcept {
    const auto& t = tables();
    std::uint64_t h = 0;
    for (Square sq = 0; sq < 64; ++sq)
        if (board_[sq]) h ^= t.piece_keys[board_[sq] * 64 + sq];
    if (side_ == Color::black) h ^= t.side_key;
    h ^= t.castling_keys[castling_];
    if (en_passant_ >= 0) h ^= t.ep_keys[file_of(en_passant_)];
    return h;
}

// --- FEN -------------------------------------------------------------------

Position Position::from_fen(std::string_view fen) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < fen.size()) {
        while (i < fen.size() && (fen[i] == ' ' || fen[i] == '\t')) ++i;
        const std::size_t begin = i;
        while (i < fen.size() && fen[i] != ' ' && fen[i] != '\t') ++i;
        if (i > begin) fields.push_back(fen.substr(begin, i - begin));
    }
    if (fields.size() != 4 && fields.size() != 6)
        throw FenError("FEN: expected 4 or 6 fields, got " + std::to_string(fields.size()));

    Position pos;
    int rank = 7, file = 0;
    for (char c : fields[0]) {
        if (c == '/') {
            if (file != 8) throw FenError("FEN placement: rank " + std::to_string(rank + 1) + " does not have 8 squares");
            --rank;
            file = 0;
            if (rank < 0) throw FenError("FEN placement: more than 8 ranks");
        } else if (c >= '1' && c <= '8') {
            file += c - '0';
            if (file > 8) throw FenError("FEN placement: rank " + std::to_string(rank + 1) + " overflows");
        } else if (auto piece = piece_from_char(c)) {
            if (file >= 8) throw FenError("FEN placement: rank " + std::to_string(rank + 1) + " overflows");
            pos.put(make_square(file, rank), *piece);
            ++file;
        } else {
            throw FenError(std::string("FEN placement: bad piece character '") + c + "'");
        }
    }
    if (rank != 0 || file != 8) throw FenError("FEN placement: expected 8 ranks of 8 squares");

    if (fields[1] == "w") pos.set_side_to_move(Color::white);
    else if (fields[1] == "b") pos.set_side_to_move(Color::black);
    else throw FenError("FEN side to move: expected 'w' or 'b'");

    std::uint8_t rights = 0;
    if (fields[2] != "-") {
        for (char c : fields[2]) {
            std::uint8_t bit = 0;
            switch (c) {
                case 'K': bit = white_kingside; break;
                case 'Q': bit = white_queenside; break;
                case 'k': bit = black_kingside; break;
                case 'q': bit = black_queenside; break;
                default: throw FenError(std::string("FEN castling: bad character '") + c + "'");
            }
            if (rights & bit) throw FenError("FEN castling: repeated right");
            rights |= bit;
        }
    }
    pos.set_castling(rights);

    if (fields[3] != "-") {
        auto sq = parse_square(fields[3]);
        if (!sq) throw FenError("FEN en passant: bad square");
        const int need = pos.side_ == Color::white ? 5 : 2;
        if (rank_of(*sq) != need) throw FenError("FEN en passant: square on wrong rank");
        pos.set_en_passant(sq);
    }

    if (fields.size() == 6) {
        auto parse_counter = [](std::string_view s, const char* name) {
            int v = 0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0 || v > 65535)
                throw FenError(std::string("FEN ") + name + ": not a valid counter");
            return v;
        };
        const int half = parse_counter(fields[4], "halfmove clock");
        const int full = parse_counter(fields[5], "fullmove number");
        if (full < 1) throw FenError("FEN fullmove number: must be at least 1");
        pos.set_counters(half, full);
    }
    return pos;
}

std::string Position::fen() const {
    std::string out;
    for (int rank = 7; rank >= 0; --rank) {
        int empty = 0;
        for (int file = 0; file < 8; ++file) {
            const auto code = board_[make_square(file, rank)];
            if (!code) {
                ++empty;
                continue;
            }
            if (empty) out += static_cast<char>('0' + empty);
            empty = 0;
            out += piece_char(Piece{color_of(code), kind_of(code)});
        }
        if (empty) out += static_cast<char>('0' + empty);
        if (rank) out += '/';
    }
    out += side_ == Color::white ? " w " : " b ";
    if (!castling_) out += '-';
    if (castling_ & white_kingside) out += 'K';
    if (castling_ & white_queenside) out += 'Q';
    if (castling_ & black_kingside) out += 'k';
    if (castling_ & black_queenside) out += 'q';
    out += ' ';
    out += en_passant_ >= 0 ? square_name(en_passant_) : "-";
    out += ' ' + std::to_string(halfmove_) + ' ' + std::to_string(fullmove_);
    return out;
}

// --- attacks ---------------------------------------------------------------

bool Position::attacked(Square sq, Color by) const noexcept {
    const auto& t = tables();
    const int f = file_of(sq);
    const std::uint8_t pawn = code_of(by, PieceKind::pawn);
    if (by == Color::white) {
        if (f > 0 && sq >= 9 && board_[sq - 9] == pawn) return true;
        if (f < 7 && sq >= 7 && board_[sq - 7] == pawn) return true;
    } else {
        if (f > 0 && sq + 7 < 64 && board_[sq + 7] == pawn) return true;
        if (f < 7 && sq + 9 < 64 && board_[sq + 9] == pawn) return true;
    }
    const std::uint8_t knight = code_of(by, PieceKind::knight);
    for (int i = 0; i < t.knight[sq].count; ++i)
        if (board_[t.knight[sq].sq[i]] == knight) return true;
    const std::uint8_t king = code_of(by, PieceKind::king);
    for (int i = 0; i < t.king[sq].count; ++i)
        if (board_[t.king[sq].sq[i]] == king) return true;
    const std::uint8_t queen = code_of(by, PieceKind::queen);
    const std::uint8_t rook = code_of(by, PieceKind::rook);
    const std::uint8_t bishop = code_of(by, PieceKind::bishop);
    for (int d = 0; d < 8; ++d) {
        const auto& ray = t.rays[sq][d];
        const std::uint8_t slider = d < 4 ? rook : bishop;
        for (int i = 0; i < ray.count; ++i) {
            const auto code = board_[ray.sq[i]];
            if (!code) continue;
            if (code == slider || code == queen) return true;
            break;
        }
    }
    return false;
}

std::vector<Square> Position::attackers(Square sq, Color by) const {
    std::vector<Square> out;
    const auto& t = tables();
    const int f = file_of(sq);
    const std::uint8_t pawn = code_of(by, PieceKind::pawn);
    if (by == Color::white) {
        if (f > 0 && sq >= 9 && board_[sq - 9] == pawn) out.push_back(sq - 9);
        if (f < 7 && sq >= 7 && board_[sq - 7] == pawn) out.push_back(sq - 7);
    } else {
        if (f > 0 && sq + 7 < 64 && board_[sq + 7] == pawn) out.push_back(sq + 7);
        if (f < 7 && sq + 9 < 64 && board_[sq + 9] == pawn) out.push_back(sq + 9);
    }
    for (int i = 0; i < t.knight[sq].count; ++i)
        if (board_[t.knight[sq].sq[i]] == code_of(by, PieceKind::knight)) out.push_back(t.knight[sq].sq[i]);
    for (int i = 0; i < t.king[sq].count; ++i)
        if (board_[t.king[sq].sq[i]] == code_of(by, PieceKind::king)) out.push_back(t.king[sq].sq[i]);
    for (int d = 0; d < 8; ++d) {
        const auto& ray = t.rays[sq][d];
        const auto slider = code_of(by, d < 4 ? PieceKind::rook : PieceKind::bishop);
        for (int i = 0; i < ray.count; ++i) {
            const auto code = board_[ray.sq[i]];
            if (!code) continue;
            if (code == slider || code == code_of(by, PieceKind::queen)) out.push_back(ray.sq[i]);
            break;
        }
    }
    return out;
}

bool Position::checked(Color c) const noexcept {
    const Square k = kings_[static_cast<int>(c)];
    return k >= 0 && attacked(k, opposite(c));
}

// --- move generation -------------------------------------------------------

void Position::generate(std::vector<Move>& out) const {
    const auto& t = tables();
    const Color us = side_;
    const Color them = opposite(us);
    auto push = [&out](Square from, Square to, std::uint8_t flags) {
        out.push_back(Move{static_cast<std::uint8_t>(from), static_cast<std::uint8_t>(to), std::nullopt, flags});
    };
    auto push_pawn = [&out](Square from, Square to, std::uint8_t flags) {
        const int r = rank_of(to);
        if (r == 0 || r == 7) {
            for (auto k : promotion_kinds)
                out.push_back(Move{static_cast<std::uint8_t>(from), static_cast<std::uint8_t>(to), k, flags});
        } else {
            out.push_back(Move{static_cast<std::uint8_t>(from), static_cast<std::uint8_t>(to), std::nullopt, flags});
        }
    };
    auto enemy = [&](Square sq) { return board_[sq] && color_of(board_[sq]) == them; };

    for (Square from = 0; from < 64; ++from) {
        const auto code = board_[from];
        if (!code || color_of(code) != us) continue;
        switch (kind_of(code)) {
            case PieceKind::pawn: {
                const int step = us == Color::white ? 8 : -8;
                const int start_rank = us == Color::white ? 1 : 6;
                const Square one = from + step;
                if (one < 0 || one > 63) break;
                if (!board_[one]) {
                    push_pawn(from, one, flag_none);
                    const Square two = one + step;
                    if (rank_of(from) == start_rank && !board_[two]) push(from, two, flag_double_push);
                }
                const int f = file_of(from);
                for (int df : {-1, 1}) {
                    if (f + df < 0 || f + df > 7) continue;
                    const Square to = one + df;
                    if (enemy(to)) push_pawn(from, to, flag_capture);
                    else if (to == en_passant_) push(from, to, flag_capture | flag_en_passant);
                }
                break;
            }
            case PieceKind::knight:
            case PieceKind::king: {
                const auto& tg = kind_of(code) == PieceKind::knight ? t.knight[from] : t.king[from];
                for (int i = 0; i < tg.count; ++i) {
                    const Square to = tg.sq[i];
                    if (!board_[to]) push(from, to, flag_none);
                    else if (color_of(board_[to]) == them) push(from, to, flag_capture);
                }
                break;
            }
            default: {
                const auto kind = kind_of(code);
                const int d_begin = kind == PieceKind::bishop ? 4 : 0;
                const int d_end = kind == PieceKind::rook ? 4 : 8;
                for (int d = d_begin; d < d_end; ++d) {
                    const auto& ray = t.rays[from][d];
                    for (int i = 0; i < ray.count; ++i) {
                        const Square to = ray.sq[i];
                        if (!board_[to]) {
                            push(from, to, flag_none);
                            continue;
                        }
                        if (color_of(board_[to]) == them) push(from, to, flag_capture);
                        break;
                    }
                }
                break;
            }
        }
    }

    // Castling: the rook and the empty path are checked here, attacked
    // squares on the king's path too; the destination is checked by the
    // legality filter like any other king move.
    const Square k = kings_[static_cast<int>(us)];
    const int home = us == Color::white ? 0 : 56;
    if (k != home + 4) return;
    const std::uint8_t rook = code_of(us, PieceKind::rook);
    const std::uint8_t ks = us == Color::white ? white_kingside : black_kingside;
    const std::uint8_t qs = us == Color::white ? white_queenside : black_queenside;
    if ((castling_ & ks) && board_[home + 7] == rook && !board_[home + 5] && !board_[home + 6] &&
        !attacked(home + 4, them) && !attacked(home + 5, them))
        push(home + 4, home + 6, flag_castle);
    if ((castling_ & qs) && board_[home] == rook && !board_[home + 1] && !board_[home + 2] && !board_[home + 3] &&
        !attacked(home + 4, them) && !attacked(home + 3, them))
        push(home + 4, home + 2, flag_castle);
}

std::vector<Move> Position::pseudo_legal_moves() const {
    std::vector<Move> moves;
    moves.reserve(64);
    generate(moves);
    return moves;
}

std::vector<Move> Position::legal_moves() const {
    std::vector<Move> moves;
    moves.reserve(64);
    generate(moves);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < moves.size(); ++i) {
        Position next = *this;
        next.make(moves[i]);
        if (!next.checked(side_)) moves[kept++] = moves[i];
    }
    moves.resize(kept);
    return moves;
}

bool Position::has_legal_move() const {
    std::vector<Move> moves;
    moves.reserve(64);
    generate(moves);
    for (const auto& m : moves) {
        Position next = *this;
        next.make(m);
        if (!next.checked(side_)) return true;
    }
    return false;
}

Undo Position::make(const Move& m) {
    const auto& t = tables();
    Undo undo;
    undo.castling = castling_;
    undo.en_passant = en_passant_;
    undo.halfmove = halfmove_;
    undo.hash = hash_;

    const auto code = board_[m.from];
    const Color us = color_of(code);
    Square captured_sq = m.to;
    if (m.flags & flag_en_passant) captured_sq = us == Color::white ? m.to - 8 : m.to + 8;
    undo.captured = board_[captured_sq];
    if (undo.captured) set_cell(captured_sq, 0);

    set_cell(m.from, 0);
    set_cell(m.to, m.promotion ? code_of(us, *m.promotion) : code);

    if (m.flags & flag_castle) {
        const int home = us == Color::white ? 0 : 56;
        const bool kingside = m.to == home + 6;
        const Square rook_from = kingside ? home + 7 : home;
        const Square rook_to = kingside ? home + 5 : home + 3;
        const auto rook = board_[rook_from];
        set_cell(rook_from, 0);
        set_cell(rook_to, rook);
    }

    const std::uint8_t rights = castling_ & castling_mask(m.from) & castling_mask(m.to);
    if (rights != castling_) hash_ ^= t.castling_keys[castling_] ^ t.castling_keys[rights];
    castling_ = rights;

    if (en_passant_ >= 0) hash_ ^= t.ep_keys[file_of(en_passant_)];
    en_passant_ = -1;
    if (m.flags & flag_double_push) {
        en_passant_ = static_cast<std::int8_t>((m.from + m.to) / 2);
        hash_ ^= t.ep_keys[file_of(en_passant_)];
    }

    if (kind_of(code) == PieceKind::pawn || undo.captured) halfmove_ = 0;
    else if (halfmove_ < 65535) ++halfmove_;
    if (us == Color::black && fullmove_ < 65535) ++fullmove_;
    side_ = opposite(side_);
    hash_ ^= t.side_key;
    return undo;
}

void Position::unmake(const Move& m, const Undo& undo) {
    side_ = opposite(side_);
    const Color us = side_;
    if (us == Color::black) --fullmove_;
    auto moved = board_[m.to];
    if (m.promotion) moved = code_of(us, PieceKind::pawn);
    set_cell(m.to, 0);
    set_cell(m.from, moved);
    if (undo.captured) {
        Square captured_sq = m.to;
        if (m.flags & flag_en_passant) captured_sq = us == Color::white ? m.to - 8 : m.to + 8;
        set_cell(captured_sq, undo.captured);
    }
    if (m.flags & flag_castle) {
        const int home = us == Color::white ? 0 : 56;
        const bool kingside = m.to == home + 6;
        const Square rook_from = kingside ? home + 7 : home;
        const Square rook_to = kingside ? home + 5 : home + 3;
        const auto rook = board_[rook_to];
        set_cell(rook_to, 0);
        set_cell(rook_from, rook);
    }
    castling_ = undo.castling;
    en_passant_ = undo.en_passant;
    halfmove_ = undo.halfmove;
    hash_ = undo.hash;
}

Position Position::after(const Move& m) const {
    Position next = *this;
    next.make(m);
    return next;
}

std::optional<Move> Position::find_move(std::string_view uci) const {
    for (const auto& m : legal_moves())
        if (m.uci() == uci) return m;
    return std::nullopt;
}

std::optional<std::string> Position::validate() const {
    int kings[2] = {0, 0};
    for (Square sq = 0; sq < 64; ++sq) {
        const auto code = board_[sq];
        if (!code) continue;
        if (kind_of(code) == PieceKind::king) ++kings[static_cast<int>(color_of(code))];
        if (kind_of(code) == PieceKind::pawn && (rank_of(sq) == 0 || rank_of(sq) == 7))
            return "pawn on first or last rank at " + square_name(sq);
    }
    if (kings[0] != 1) return "White must have exactly one king";
    if (kings[1] != 1) return "Black must have exactly one king";
    const Square wk = kings_[0], bk = kings_[1];
    if (std::abs(file_of(wk) - file_of(bk)) <= 1 && std::abs(rank_of(wk) - rank_of(bk)) <= 1)
        return "kings on adjacent squares";
    if (checked(opposite(side_))) return "side not to move is in check";

    auto has = [this](Square sq, Color c, PieceKind k) { return board_[sq] == code_of(c, k); };
    if ((castling_ & white_kingside) && !(has(4, Color::white, PieceKind::king) && has(7, Color::white, PieceKind::rook)))
        return "castling right K without king and rook on home squares";
    if ((castling_ & white_queenside) && !(has(4, Color::white, PieceKind::king) && has(0, Color::white, PieceKind::rook)))
        return "castling right Q without king and rook on home squares";
    if ((castling_ & black_kingside) && !(has(60, Color::black, PieceKind::king) && has(63, Color::black, PieceKind::rook)))
        return "castling right k without king and rook on home squares";
    if ((castling_ & black_queenside) && !(has(60, Color::black, PieceKind::king) && has(56, Color::black, PieceKind::rook)))
        return "castling right q without king and rook on home squares";

    if (en_passant_ >= 0) {
        const Color mover = opposite(side_);
        const Square pawn_sq = mover == Color::white ? en_passant_ + 8 : en_passant_ - 8;
        const Square origin = mover == Color::white ? en_passant_ - 8 : en_passant_ + 8;
        if (board_[en_passant_] || board_[origin] || !has(pawn_sq, mover, PieceKind::pawn))
            return "en passant square inconsistent with the last move";
    }
    return std::nullopt;
}

std::uint64_t perft(const Position& pos, int depth) {
    if (depth <= 0) return 1;
    const auto moves = pos.legal_moves();
    if (depth == 1) return moves.size();
    std::uint64_t nodes = 0;
    Position work = pos;
    for (const auto& m : moves) {
        const Undo u = work.make(m);
        nodes += perft(work, depth - 1);
        work.unmake(m, u);
    }
    return nodes;
}

}  // namespace qrc::chess
