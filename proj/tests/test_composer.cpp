#include <cmath>
#include <map>

#include "doctest.h"
#include "qrc/composer.hpp"
#include "qrc/prover.hpp"
#include "qrc/quantum_client.hpp"
#include "reference_chess.hpp"

using namespace qrc;
using namespace qrc::composer;
using chess::Position;

namespace {

class Scripted final : public EntropySource {
public:
    explicit Scripted(std::vector<double> v) : values_(std::move(v)) {}
    UnitDraw next_unit() override {
        ++used;
        return {values_.at(i_++ % values_.size()), Origin::pseudo};
    }
    int used = 0;

private:
    std::vector<double> values_;
    std::size_t i_ = 0;
};

class FailingFeed final : public ByteFeed {
public:
    std::vector<std::uint8_t> request(std::size_t) override { throw FetchError("down"); }
    std::string describe() const override { return "failing"; }
};

ComposerSettings settings_of(std::initializer_list<const char*> configs) {
    ComposerSettings s;
    for (const char* c : configs) s.permissible.push_back(PieceConfiguration::parse(c));
    return s;
}

std::vector<CompositionRecord> run(std::uint64_t seed, std::uint64_t attempts, const ComposerSettings& s = default_settings()) {
    PseudoSource src(seed);
    std::vector<CompositionRecord> out;
    compose(src, s, Budget::of_attempts(attempts), {"t", 0, seed, nullptr, nullptr},
            [&](const CompositionRecord& r) { out.push_back(r); });
    return out;
}

}  // namespace

TEST_CASE("configuration notation") {
    const auto c = PieceConfiguration::parse("QRP/PNP");
    CHECK(c.white.size() == 3);
    CHECK(c.black.size() == 3);
    CHECK(c.notation() == "QRP/PNP");
    CHECK(PieceConfiguration::parse("Q/").black.empty());
    CHECK(PieceConfiguration::parse("/").white.empty());
    CHECK_THROWS_AS(PieceConfiguration::parse("QK/"), ContractError);
    CHECK_THROWS_AS(PieceConfiguration::parse("QX/"), ContractError);
    CHECK_THROWS_AS(PieceConfiguration::parse("Q"), ContractError);
    CHECK_THROWS_AS(PieceConfiguration::parse("Q/R/B"), ContractError);
    CHECK_THROWS_AS(PieceConfiguration::parse("PPPPPPPPP/"), ContractError);
    CHECK_THROWS_AS(PieceConfiguration::parse("QQQQQQQQQQQQQQQQ/"), ContractError);
    // Promotion surplus is allowed.
    CHECK(PieceConfiguration::parse("NNN/").white.size() == 3);
}

TEST_CASE("shipped settings") {
    const auto& list = default_configurations();
    CHECK(list.size() == 12);
    CHECK(list.front().notation() == "Q/");
    std::size_t largest = 0;
    for (const auto& c : list) largest = std::max(largest, c.white.size() + c.black.size() + 2);
    CHECK(largest == 8);
    const auto s = default_settings();
    CHECK(s.attempts_min == 1);
    CHECK(s.attempts_max == 50);
    CHECK(s.target_depth == 3);
    CHECK_NOTHROW(s.check());
    auto bad = s;
    bad.permissible.clear();
    CHECK_THROWS_AS(bad.check(), ContractError);
    bad = s;
    bad.attempts_min = 60;
    CHECK_THROWS_AS(bad.check(), ContractError);
    bad = s;
    bad.target_depth = 2;
    CHECK_THROWS_AS(bad.check(), ContractError);
}

TEST_CASE("select_configuration") {
    const auto one = settings_of({"RR/"});
    Scripted any({0.73});
    CHECK(select_configuration(any, one).notation() == "RR/");
    const auto four = settings_of({"Q/", "RR/", "QR/", "QB/P"});
    Scripted half({0.5});
    CHECK(select_configuration(half, four).notation() == "QR/");
    ComposerSettings empty;
    CHECK_THROWS_AS(select_configuration(any, empty), ContractError);

    PseudoSource src(12);
    std::map<std::string, int> counts;
    for (int i = 0; i < 1000; ++i) ++counts[select_configuration(src, four).notation()];
    const double sigma = std::sqrt(1000 * 0.25 * 0.75);
    for (const auto& [label, n] : counts) CHECK(std::abs(n - 250.0) <= 4.0 * sigma);
    CHECK(counts.size() == 4);
}

TEST_CASE("attempts_count") {
    auto s = default_settings();
    s.attempts_min = s.attempts_max = 10;
    PseudoSource src(1);
    for (int i = 0; i < 50; ++i) CHECK(attempts_count(src, s) == 10);
    s.attempts_min = 1;
    s.attempts_max = 100;
    Scripted low({0.0}), high({0.999});
    CHECK(attempts_count(low, s) == 1);
    CHECK(attempts_count(high, s) == 100);
}

TEST_CASE("scripted placements") {
    // King a1, king h8, queen on the middle of the 62 free squares (a5).
    Scripted a({0.0, 0.999, 0.5});
    auto p = generate_candidate(a, PieceConfiguration::parse("Q/"));
    REQUIRE(p);
    CHECK(p->fen() == "7k/8/8/Q7/8/8/8/K7 w - - 0 1");
    CHECK(a.used == 3);

    // Queen lands on h1 giving check; the only checker is lifted (one draw).
    Scripted b({0.0, 0.999, 0.1, 0.3});
    p = generate_candidate(b, PieceConfiguration::parse("Q/"));
    REQUIRE(p);
    CHECK(p->fen() == "7k/8/8/8/8/8/8/K7 w - - 0 1");
    CHECK(b.used == 4);

    // A pawn skips the first rank: index 0 of its eligible squares is a2.
    Scripted c({0.0, 0.999, 0.0});
    p = generate_candidate(c, PieceConfiguration::parse("P/"));
    REQUIRE(p);
    CHECK(p->fen() == "7k/8/8/8/8/8/P7/K7 w - - 0 1");

    // Black kings are never drawn next to the White king.
    Scripted d({0.0, 0.0});
    p = generate_candidate(d, PieceConfiguration::parse("/"));
    REQUIRE(p);
    CHECK(p->fen() == "8/8/8/8/8/8/8/K1k5 w - - 0 1");
}

TEST_CASE("retries run out") {
    // Kings a1 and h8, queens h1 and a8 both giving check; lifting one leaves
    // the other, so every retry fails the same way.
    Scripted double_check({0.0, 0.999, 0.1, 54.5 / 61.0, 0.3});
    CHECK_FALSE(generate_candidate(double_check, PieceConfiguration::parse("QQ/"), 2).has_value());
    CHECK(double_check.used == 15);
}

TEST_CASE("candidates always satisfy the position invariants") {
    PseudoSource src(77);
    const auto& configs = default_configurations();
    int produced = 0;
    for (int i = 0; i < 3000; ++i) {
        const auto& cfg = configs[i % configs.size()];
        const auto p = generate_candidate(src, cfg);
        if (!p) continue;
        ++produced;
        CAPTURE(p->fen());
        REQUIRE_FALSE(p->validate().has_value());
        REQUIRE(p->side_to_move() == chess::Color::white);
        REQUIRE(p->has_legal_move());
        REQUIRE_FALSE(p->checked(chess::Color::black));
        const int expected = static_cast<int>(cfg.white.size() + cfg.black.size()) + 2;
        REQUIRE(p->piece_count() >= expected - 1);
        REQUIRE(p->piece_count() <= expected);
        const auto k1 = p->king_square(chess::Color::white), k2 = p->king_square(chess::Color::black);
        REQUIRE((std::abs(chess::file_of(k1) - chess::file_of(k2)) > 1 || std::abs(chess::rank_of(k1) - chess::rank_of(k2)) > 1));
    }
    CHECK(produced > 2900);
}

TEST_CASE("golden placement for queen and rook against a bare king") {
    PseudoSource src(20201);
    const auto p = generate_candidate(src, PieceConfiguration::parse("QR/"));
    REQUIRE(p);
    // Captured once; the queen was drawn onto a checking square and lifted.
    CHECK(p->fen() == "8/8/8/8/7k/8/R7/K7 w - - 0 1");
    PseudoSource again(20201);
    CHECK(generate_candidate(again, PieceConfiguration::parse("QR/"))->fen() == p->fen());
}

TEST_CASE("empty budget gives an empty stream") {
    PseudoSource src(1);
    int n = 0;
    const auto d = compose(src, default_settings(), Budget::of_attempts(0), {}, [&](const CompositionRecord&) { ++n; });
    CHECK(n == 0);
    CHECK(d.attempts == 0);
    const auto unbounded = compose(src, default_settings(), Budget{}, {}, [&](const CompositionRecord&) { ++n; });
    CHECK(unbounded.attempts == 0);
}

TEST_CASE("composing is deterministic and monotone in the budget") {
    const auto a = run(5, 600);
    CHECK(a == run(5, 600));
    CHECK(a != run(6, 600));
    std::size_t last = 0;
    for (std::uint64_t budget : {50, 150, 300, 600}) {
        const auto r = run(5, budget);
        CHECK(r.size() >= last);
        last = r.size();
        // A smaller budget yields a prefix of a larger one.
        REQUIRE(r.size() <= a.size());
        for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == a[i]);
    }
    CHECK(last > 0);
}

TEST_CASE("every emitted record is sound") {
    PseudoSource ps(8);
    PseudoSource qs(9);
    MixedSource mixed(ps, &qs, MixRatio(0.15));
    std::vector<CompositionRecord> out;
    ComposeDiagnostics progress;
    const auto diag = compose(mixed, default_settings(), Budget::of_attempts(1500),
                              {"Q15", 2, 8, &mixed, &progress}, [&](const CompositionRecord& r) { out.push_back(r); });
    CHECK(diag == progress);
    CHECK(diag.attempts == 1500);
    CHECK(diag.mate_in_3 + diag.mate_in_2 == out.size());
    CHECK(diag.attempts == diag.placement_failures + diag.rejected_invalid + diag.rejected_no_mate +
                               diag.mate_in_1_discarded + diag.mate_in_3 + diag.mate_in_2);
    REQUIRE(out.size() > 20);
    std::uint64_t last_draws = 0, last_time = 0;
    for (const auto& r : out) {
        CAPTURE(r.fen);
        const auto pos = Position::from_fen(r.fen);
        REQUIRE_FALSE(pos.validate().has_value());
        const int k = r.classification == Classification::mate_in_3 ? 3 : 2;
        REQUIRE(r.accepted());
        REQUIRE(r.aesthetics.has_value());
        CHECK(r.aesthetic_score() == r.aesthetics->total);
        CHECK(chess::prove_mate_in_n(pos, 3).k == k);
        CHECK(chess::prove_mate_in_n(pos, k - 1).outcome == chess::MateOutcome::no_forced_mate);
        CHECK(refchess::check_solution(r.fen, k, r.key_moves, r.principal_variation) == "");
        CHECK(r.set_label == "Q15");
        CHECK(r.instance_id == 2);
        CHECK(r.entropy.total_draws() > last_draws);
        CHECK(r.timestamp > last_time);
        last_draws = r.entropy.total_draws();
        last_time = r.timestamp;
    }
    const auto& st = mixed.stats();
    CHECK(st.pseudo_draws + st.quantum_draws == st.selection_coins);
    const double n = static_cast<double>(st.total_draws());
    const double frac = static_cast<double>(st.quantum_draws) / n;
    CHECK(std::abs(frac - 0.15) <= 4.0 * std::sqrt(0.15 * 0.85 / n));
}

TEST_CASE("entropy outage under the fail policy aborts composing") {
    QuantumClient client(std::make_unique<FailingFeed>(), [] {
        QuantumClientConfig c;
        c.block_size = 64;
        c.low_watermark = 16;
        return c;
    }());
    QuantumSource q(client);
    PseudoSource p(3);
    MixedSource mixed(p, &q, MixRatio(0.01), FallbackPolicy::fail);
    ComposeDiagnostics progress;
    std::vector<CompositionRecord> out;
    CHECK_THROWS_AS(compose(mixed, default_settings(), Budget::of_attempts(100000), {"x", 0, 3, &mixed, &progress},
                            [&](const CompositionRecord& r) { out.push_back(r); }),
                    EntropyUnavailable);
    CHECK(progress.attempts > 0);
    CHECK(progress.attempts < 100000);
    for (const auto& r : out) CHECK(refchess::check_solution(r.fen, r.classification == Classification::mate_in_3 ? 3 : 2,
                                                             r.key_moves, r.principal_variation) == "");
}

TEST_CASE("classification names") {
    for (auto c : {Classification::mate_in_3, Classification::mate_in_2_byproduct, Classification::rejected_invalid,
                   Classification::rejected_no_mate})
        CHECK(classification_from_string(to_string(c)) == c);
    CHECK_THROWS_AS(classification_from_string("mate_in_1"), ContractError);
}
