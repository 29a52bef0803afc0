#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrc/error.hpp"

namespace qrc::chess {

enum class Color : std::uint8_t { white = 0, black = 1 };

constexpr Color opposite(Color c) noexcept {
    return c == Color::white ? Color::black : Color::white;
}

enum class PieceKind : std::uint8_t { pawn = 1, knight, bishop, rook, queen, king };

struct Piece {
    Color color;
    PieceKind kind;
    bool operator==(const Piece&) const = default;
};

/// Conventional material value; the king has none.
int piece_value(PieceKind kind) noexcept;
char piece_char(Piece piece) noexcept;
std::optional<Piece> piece_from_char(char c) noexcept;

/// Squares are numbered a1 = 0, b1 = 1, ..., h8 = 63.
using Square = int;
constexpr int file_of(Square sq) noexcept { return sq & 7; }
constexpr int rank_of(Square sq) noexcept { return sq >> 3; }
constexpr Square make_square(int file, int rank) noexcept { return rank * 8 + file; }
std::string square_name(Square sq);
std::optional<Square> parse_square(std::string_view text) noexcept;

enum MoveFlag : std::uint8_t {
    flag_none = 0,
    flag_capture = 1,
    flag_castle = 2,
    flag_en_passant = 4,
    flag_double_push = 8,
};

struct Move {
    std::uint8_t from = 0;
    std::uint8_t to = 0;
    std::optional<PieceKind> promotion;
    std::uint8_t flags = flag_none;

    bool is_capture() const noexcept { return flags & flag_capture; }
    /// Long algebraic notation, e.g. "a1a8" or "e7e8q".
    std::string uci() const;

    // Flags are derived from the position, so identity is from/to/promotion.
    bool operator==(const Move& o) const noexcept {
        return from == o.from && to == o.to && promotion == o.promotion;
    }
};

/// Thrown by Position::from_fen; the message names the offending field.
class FenError : public ContractError {
public:
    using ContractError::ContractError;
};

enum CastlingRight : std::uint8_t {
    white_kingside = 1,
    white_queenside = 2,
    black_kingside = 4,
    black_queenside = 8,
};

/// State needed to retract a move made with Position::make.
struct Undo {
    std::uint8_t captured = 0;
    std::uint8_t castling = 0;
    std::int8_t en_passant = -1;
    std::uint16_t halfmove = 0;
    std::uint64_t hash = 0;
};

/// Complete chess state. Value type; copying is cheap (about 90 bytes).
class Position {
public:
    /// Empty board, White to move, no rights. Used as a builder seed.
    Position();

    static Position start();
    static Position from_fen(std::string_view fen);
    std::string fen() const;

    std::optional<Piece> at(Square sq) const noexcept;
    void put(Square sq, Piece piece);
    void remove(Square sq);

    Color side_to_move() const noexcept { return side_; }
    void set_side_to_move(Color c);
    std::uint8_t castling() const noexcept { return castling_; }
    void set_castling(std::uint8_t rights);
    std::optional<Square> en_passant() const noexcept;
    void set_en_passant(std::optional<Square> sq);
    int halfmove_clock() const noexcept { return halfmove_; }
    int fullmove_number() const noexcept { return fullmove_; }
    void set_counters(int halfmove, int fullmove);

    /// -1 when the colour has no king on the board.
    Square king_square(Color c) const noexcept { return kings_[static_cast<int>(c)]; }
    int piece_count() const noexcept;

    bool attacked(Square sq, Color by) const noexcept;
    /// Squares holding pieces of colour `by` that attack `sq`.
    std::vector<Square> attackers(Square sq, Color by) const;
    bool in_check() const noexcept { return checked(side_); }
    bool checked(Color c) const noexcept;

    std::vector<Move> legal_moves() const;
    /// Moves obeying piece movement rules, not yet filtered for king safety.
    std::vector<Move> pseudo_legal_moves() const;
    bool has_legal_move() const;
    bool is_checkmate() const { return in_check() && !has_legal_move(); }
    bool is_stalemate() const { return !in_check() && !has_legal_move(); }

    /// Applies a move produced by this position's generator.
    Undo make(const Move& m);
    void unmake(const Move& m, const Undo& undo);
    Position after(const Move& m) const;

    /// Finds the legal move written in long algebraic notation.
    std::optional<Move> find_move(std::string_view uci) const;

    /// Empty when the position satisfies the legality invariants, otherwise
    /// a description of the first violation found.
    std::optional<std::string> validate() const;

    std::uint64_t hash() const noexcept { return hash_; }

    bool operator==(const Position&) const = default;

private:
    void generate(std::vector<Move>& out) const;
    void set_cell(Square sq, std::uint8_t code) noexcept;
    std::uint64_t compute_hash() const noexcept;

    std::array<std::uint8_t, 64> board_{};
    std::array<std::int8_t, 2> kings_{-1, -1};
    Color side_ = Color::white;
    std::uint8_t castling_ = 0;
    std::int8_t en_passant_ = -1;
    std::uint16_t halfmove_ = 0;
    std::uint16_t fullmove_ = 1;
    std::uint64_t hash_ = 0;
};

/// Number of leaf nodes of the legal move tree at exactly `depth` plies.
std::uint64_t perft(const Position& pos, int depth);

inline constexpr std::string_view start_fen = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

}  // namespace qrc::chess
