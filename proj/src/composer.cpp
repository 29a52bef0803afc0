#include "qrc/composer.hpp"

#include <cstdlib>
#include <sstream>

#include "qrc/prover.hpp"

namespace qrc::composer {

using chess::Color;
using chess::Piece;
using chess::PieceKind;
using chess::Position;
using chess::Square;

PieceConfiguration PieceConfiguration::parse(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos || text.find('/', slash + 1) != std::string_view::npos)
        throw ContractError("piece configuration must look like 'QR/P': " + std::string(text));
    PieceConfiguration cfg;
    auto read = [&text](std::string_view side, std::vector<PieceKind>& out) {
        for (char c : side) {
            const auto p = chess::piece_from_char(c);
            if (!p || p->kind == PieceKind::king)
                throw ContractError("bad piece '" + std::string(1, c) + "' in configuration " + std::string(text));
            out.push_back(p->kind);
        }
    };
    read(text.substr(0, slash), cfg.white);
    read(text.substr(slash + 1), cfg.black);
    for (const auto* side : {&cfg.white, &cfg.black}) {
        int pawns = 0;
        for (auto k : *side) pawns += k == PieceKind::pawn;
        if (pawns > 8) throw ContractError("more than eight pawns per side in " + std::string(text));
        if (side->size() > 15) throw ContractError("more than fifteen non-king pieces per side in " + std::string(text));
    }
    return cfg;
}

std::string PieceConfiguration::notation() const {
    std::string out;
    for (auto k : white) out += chess::piece_char(Piece{Color::white, k});
    out += '/';
    for (auto k : black) out += chess::piece_char(Piece{Color::white, k});
    return out;
}

void ComposerSettings::check() const {
    if (permissible.empty()) throw ContractError("composer needs at least one permissible configuration");
    if (attempts_min < 1 || attempts_min > attempts_max)
        throw ContractError("composer attempts bounds must satisfy 1 <= min <= max");
    if (target_depth != 3) throw ContractError("composer target depth is mate in three");
}

std::string ComposerSettings::canonical() const {
    std::ostringstream os;
    os << "configurations=";
    for (std::size_t i = 0; i < permissible.size(); ++i) os << (i ? "," : "") << permissible[i].notation();
    os << ";attempts=" << attempts_min << '-' << attempts_max << ";depth=" << target_depth
       << ";retries=" << max_placement_retries;
    return os.str();
}

const std::vector<PieceConfiguration>& default_configurations() {
    static const std::vector<PieceConfiguration> list = [] {
        std::vector<PieceConfiguration> out;
        for (const char* s : {"Q/", "RR/", "QR/", "QB/P", "RB/P", "QN/PP", "RBN/P", "QR/PP", "RBN/PP", "QBN/PN",
                              "RBNP/PP", "QRP/PNP"})
            out.push_back(PieceConfiguration::parse(s));
        return out;
    }();
    return list;
}

ComposerSettings default_settings() {
    ComposerSettings s;
    s.permissible = default_configurations();
    return s;
}

PieceConfiguration select_configuration(EntropySource& entropy, const ComposerSettings& settings) {
    if (settings.permissible.empty()) throw ContractError("composer needs at least one permissible configuration");
    const auto n = static_cast<std::uint32_t>(settings.permissible.size());
    return settings.permissible[next_int_below(entropy, n)];
}

std::uint32_t attempts_count(EntropySource& entropy, const ComposerSettings& settings) {
    if (settings.attempts_min < 1 || settings.attempts_min > settings.attempts_max)
        throw ContractError("composer attempts bounds must satisfy 1 <= min <= max");
    return settings.attempts_min + next_int_below(entropy, settings.attempts_max - settings.attempts_min + 1);
}

namespace {

std::optional<Position> place_once(EntropySource& entropy, const PieceConfiguration& cfg) {
    Position pos;
    std::vector<Square> eligible;
    eligible.reserve(64);
    auto pick = [&](bool pawn) -> std::optional<Square> {
        eligible.clear();
        for (Square sq = 0; sq < 64; ++sq) {
            if (pos.at(sq)) continue;
            if (pawn && (chess::rank_of(sq) == 0 || chess::rank_of(sq) == 7)) continue;
            eligible.push_back(sq);
        }
        if (eligible.empty()) return std::nullopt;
        return eligible[next_int_below(entropy, static_cast<std::uint32_t>(eligible.size()))];
    };

    const Square wk = static_cast<Square>(next_int_below(entropy, 64));
    pos.put(wk, Piece{Color::white, PieceKind::king});
    eligible.clear();
    for (Square sq = 0; sq < 64; ++sq)
        if (std::abs(chess::file_of(sq) - chess::file_of(wk)) > 1 || std::abs(chess::rank_of(sq) - chess::rank_of(wk)) > 1)
            eligible.push_back(sq);
    pos.put(eligible[next_int_below(entropy, static_cast<std::uint32_t>(eligible.size()))],
            Piece{Color::black, PieceKind::king});

    for (const auto* side : {&cfg.white, &cfg.black}) {
        const Color color = side == &cfg.white ? Color::white : Color::black;
        for (auto kind : *side) {
            const auto sq = pick(kind == PieceKind::pawn);
            if (!sq) return std::nullopt;
            pos.put(*sq, Piece{color, kind});
        }
    }
    pos.set_side_to_move(Color::white);

    // Black is not to move, so it may not stand in check: lift one checker.
    const Square bk = pos.king_square(Color::black);
    if (const auto checkers = pos.attackers(bk, Color::white); !checkers.empty()) {
        pos.remove(checkers[next_int_below(entropy, static_cast<std::uint32_t>(checkers.size()))]);
    }
    if (pos.validate() || !pos.has_legal_move()) return std::nullopt;
    return pos;
}

}  // namespace

std::optional<Position> generate_candidate(EntropySource& entropy, const PieceConfiguration& configuration,
                                           std::uint32_t max_placement_retries) {
    for (std::uint32_t attempt = 0; attempt <= max_placement_retries; ++attempt)
        if (auto pos = place_once(entropy, configuration)) return pos;
    return std::nullopt;
}

std::string_view to_string(Classification c) {
    switch (c) {
        case Classification::mate_in_3: return "mate_in_3";
        case Classification::mate_in_2_byproduct: return "mate_in_2_byproduct";
        case Classification::rejected_invalid: return "rejected_invalid";
        case Classification::rejected_no_mate: return "rejected_no_mate";
    }
    return "unknown";
}

Classification classification_from_string(std::string_view text) {
    for (auto c : {Classification::mate_in_3, Classification::mate_in_2_byproduct, Classification::rejected_invalid,
                   Classification::rejected_no_mate})
        if (to_string(c) == text) return c;
    throw ContractError("unknown classification '" + std::string(text) + "'");
}

ComposeDiagnostics compose(EntropySource& entropy, const ComposerSettings& settings, const Budget& budget,
                           const ComposeContext& context, const RecordSink& sink) {
    settings.check();
    ComposeDiagnostics local;
    ComposeDiagnostics& diag = context.progress ? *context.progress : local;
    diag = {};
    const auto started = std::chrono::steady_clock::now();
    auto exhausted = [&] {
        if (budget.attempts && diag.attempts >= *budget.attempts) return true;
        if (budget.wall_clock && std::chrono::steady_clock::now() - started >= *budget.wall_clock) return true;
        return !budget.attempts && !budget.wall_clock;
    };

    chess::MateProver prover;
    while (!exhausted()) {
        const PieceConfiguration cfg = select_configuration(entropy, settings);
        const std::uint32_t tries = attempts_count(entropy, settings);
        for (std::uint32_t i = 0; i < tries && !exhausted(); ++i) {
            ++diag.attempts;
            auto candidate = generate_candidate(entropy, cfg, settings.max_placement_retries);
            if (!candidate) {
                ++diag.placement_failures;
                continue;
            }
            if (candidate->validate()) {
                ++diag.rejected_invalid;
                continue;
            }
            prover.clear();
            const auto verdict = prover.prove(*candidate, settings.target_depth);
            if (!verdict.is_mate()) {
                ++diag.rejected_no_mate;
                continue;
            }
            if (verdict.k == 1) {
                ++diag.mate_in_1_discarded;
                continue;
            }
            CompositionRecord rec;
            rec.fen = candidate->fen();
            rec.classification = verdict.k == 3 ? Classification::mate_in_3 : Classification::mate_in_2_byproduct;
            ++(verdict.k == 3 ? diag.mate_in_3 : diag.mate_in_2);
            rec.configuration = cfg.notation();
            for (const auto& m : verdict.key_moves) rec.key_moves.push_back(m.uci());
            for (const auto& m : verdict.principal_variation) rec.principal_variation.push_back(m.uci());
            rec.aesthetics = aesthetics::score(*candidate, verdict);
            if (context.provenance) rec.entropy = context.provenance->stats();
            rec.set_label = context.set_label;
            rec.instance_id = context.instance_id;
            rec.seed = context.seed;
            rec.timestamp = diag.attempts;
            sink(rec);
        }
    }
    return diag;
}

}  // namespace qrc::composer
