#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "doctest.h"
#include "qrc/stats.hpp"

using namespace qrc::stats;
using doctest::Approx;

namespace {

const std::vector<std::vector<double>> quantities = {
    {138, 5, 135, 138, 126, 117, 143, 117, 139, 142},
    {151, 133, 127, 73, 116, 67, 123, 158, 140, 121},
    {174, 108, 120, 132, 122, 122, 88, 124, 125, 105},
    {128, 114, 0, 98, 131, 0, 141, 0, 186, 102},
};

std::vector<SampleSet> quantity_sets() {
    const char* labels[] = {"Pseudo", "Q 5%", "Q 15%", "Q 25%"};
    std::vector<SampleSet> out;
    for (int i = 0; i < 4; ++i) out.push_back({labels[i], quantities[i]});
    return out;
}

std::vector<SampleSet> random_groups(std::mt19937_64& rng, int groups) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_int_distribution<int> size(2, 15);
    std::vector<SampleSet> out;
    for (int g = 0; g < groups; ++g) {
        SampleSet s{"g" + std::to_string(g), {}};
        const double offset = noise(rng);
        const int n = size(rng);
        for (int i = 0; i < n; ++i) s.values.push_back(offset + noise(rng) * (1.0 + g));
        out.push_back(s);
    }
    return out;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("quantity table ANOVA") {
    const auto r = one_way_anova(quantity_sets());
    CHECK(r.df_between == 3);
    CHECK(r.df_within == 36);
    CHECK(std::abs(r.f_stat - 1.271) <= 0.005);
    CHECK(std::abs(r.p_value - 0.299) <= 0.005);
    // Tighter, against Boost's F distribution and a direct sum-of-squares computation.
    boost::math::fisher_f_distribution<double> f(3, 36);
    CHECK(std::abs(r.p_value - boost::math::cdf(boost::math::complement(f, r.f_stat))) < 1e-10);
    CHECK(std::abs(r.f_stat - 1.2713561490696) < 1e-10);
}

TEST_CASE("quantity table means") {
    const double expected[] = {120.0, 120.9, 122.0, 90.0};
    for (int i = 0; i < 4; ++i) CHECK(mean(quantities[i]) == Approx(expected[i]).epsilon(1e-15));
}

TEST_CASE("ANOVA with equal group means") {
    const std::vector<SampleSet> g = {{"a", {1, 3}}, {"b", {2, 2}}, {"c", {3, 1}}};
    const auto r = one_way_anova(g);
    CHECK(r.f_stat == 0.0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("ANOVA input errors") {
    CHECK_THROWS_AS(one_way_anova(std::vector<SampleSet>{{"a", {1, 2}}}), qrc::ContractError);
    CHECK_THROWS_AS(one_way_anova(std::vector<SampleSet>{{"a", {1, 2}}, {"b", {3}}}), qrc::ContractError);
    CHECK_THROWS_AS(one_way_anova(std::vector<SampleSet>{{"a", {2, 2}}, {"b", {2, 2}}}), UndefinedStatistic);
    const auto r = one_way_anova(std::vector<SampleSet>{{"a", {1, 1}}, {"b", {2, 2}}});
    CHECK(std::isinf(r.f_stat));
    CHECK(r.p_value == 0.0);
}

TEST_CASE("two-group F equals the pooled t squared") {
    const SampleSet a{"a", {2.1, 3.4, 1.9, 4.4, 3.0}};
    const SampleSet b{"b", {5.0, 4.2, 6.1, 3.9, 5.5}};
    const double t = pooled_t_stat(a, b);
    CHECK(std::abs(one_way_anova(std::vector<SampleSet>{a, b}).f_stat - t * t) < 1e-9);

    std::mt19937_64 rng(4);
    for (int i = 0; i < 500; ++i) {
        const auto g = random_groups(rng, 2);
        const double tp = pooled_t_stat(g[0], g[1]);
        REQUIRE(close(one_way_anova(g).f_stat, tp * tp, 1e-9));
    }
}

TEST_CASE("F is invariant under scaling and shifting") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> factor(-50.0, 50.0);
    for (int i = 0; i < 300; ++i) {
        auto g = random_groups(rng, 2 + i % 4);
        const double f0 = one_way_anova(g).f_stat;
        double c = factor(rng);
        if (c == 0.0) c = 1.0;
        const double shift = factor(rng) * 10.0;
        auto scaled = g, shifted = g;
        for (auto& s : scaled)
            for (auto& v : s.values) v *= c;
        for (auto& s : shifted)
            for (auto& v : s.values) v += shift;
        REQUIRE(close(one_way_anova(scaled).f_stat, f0, 1e-9));
        REQUIRE(close(one_way_anova(shifted).f_stat, f0, 1e-9));
        const auto w0 = welch_t_test(g[0], g[1]);
        REQUIRE(close(welch_t_test(shifted[0], shifted[1]).t_stat, w0.t_stat, 1e-9));
    }
}

TEST_CASE("Welch test on identical samples") {
    const SampleSet a{"a", {1, 2, 3, 4, 5}};
    const auto r = welch_t_test(a, a);
    CHECK(r.t_stat == 0.0);
    CHECK(r.p_value == Approx(1.0).epsilon(1e-12));
    CHECK(r.df == Approx(8.0));
}

TEST_CASE("Welch test against a hand computation") {
    const SampleSet a{"a", {120, 121, 119, 122, 118}};
    const SampleSet b{"b", {90, 95, 85, 92, 88}};
    // Independent evaluation of the textbook formulas.
    const double ma = 120.0, mb = 90.0;
    double va = 0, vb = 0;
    for (double x : a.values) va += (x - ma) * (x - ma);
    for (double x : b.values) vb += (x - mb) * (x - mb);
    va /= 4.0;
    vb /= 4.0;
    const double se2 = va / 5.0 + vb / 5.0;
    const double t = (ma - mb) / std::sqrt(se2);
    const double df = se2 * se2 / ((va / 5.0) * (va / 5.0) / 4.0 + (vb / 5.0) * (vb / 5.0) / 4.0);
    boost::math::students_t_distribution<double> dist(df);
    const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));

    const auto r = welch_t_test(a, b);
    CHECK(std::abs(r.t_stat - t) < 1e-6);
    CHECK(std::abs(r.df - df) < 1e-9);
    CHECK(std::abs(r.p_value - p) < 1e-4);
    // Same numbers as precomputed before the build.
    CHECK(std::abs(r.t_stat - 16.269784336399212) < 1e-6);
    CHECK(std::abs(r.df - 5.339491916859122) < 1e-6);
    CHECK(std::abs(r.p_value - 9.376504351945647e-06) < 1e-9);
}

TEST_CASE("Welch antisymmetry and p-value range") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 500; ++i) {
        const auto g = random_groups(rng, 2);
        const auto ab = welch_t_test(g[0], g[1]);
        const auto ba = welch_t_test(g[1], g[0]);
        REQUIRE(ab.t_stat == -ba.t_stat);
        REQUIRE(ab.p_value == ba.p_value);
        REQUIRE(ab.df == ba.df);
        REQUIRE(ab.df > 0.0);
        REQUIRE(ab.p_value >= 0.0);
        REQUIRE(ab.p_value <= 1.0);
        const auto an = one_way_anova(random_groups(rng, 3));
        REQUIRE(an.p_value >= 0.0);
        REQUIRE(an.p_value <= 1.0);
    }
}

TEST_CASE("Welch undefined without variance") {
    CHECK_THROWS_AS(welch_t_test({"a", {3, 3, 3}}, {"b", {3, 3}}), UndefinedStatistic);
    CHECK_THROWS_AS(welch_t_test({"a", {3}}, {"b", {1, 3}}), qrc::ContractError);
}

TEST_CASE("quartiles") {
    auto q = quartiles(std::vector<double>{1, 2, 3, 4, 5});
    CHECK(q.first == 2.0);
    CHECK(q.second == 4.0);
    q = quartiles(std::vector<double>{4, 1, 3, 2});
    CHECK(q.first == 1.75);
    CHECK(q.second == 3.25);
    const auto s = summarize(std::vector<double>{5, 5, 5, 5, 5});
    CHECK(s.q1 == 5.0);
    CHECK(s.q3 == 5.0);
    CHECK(s.iqr == 0.0);
    CHECK_THROWS_AS(quartiles(std::vector<double>{1, 2, 3}), qrc::ContractError);
}

TEST_CASE("outlier bounds from the published quartiles") {
    auto s = outlier_bounds(1.948, 2.688);
    CHECK(std::abs(s.iqr - 0.740) <= 0.002);
    CHECK(std::abs(s.ub - 3.798) <= 0.002);
    CHECK(std::abs(s.lb - 0.838) <= 0.002);
    s = outlier_bounds(1.925, 2.662);
    CHECK(std::abs(s.iqr - 0.737) <= 0.002);
    CHECK(std::abs(s.ub - 3.767) <= 0.002);
    CHECK(std::abs(s.lb - 0.820) <= 0.002);
    s = outlier_bounds(1.852, 2.639);
    CHECK(std::abs(s.ub - 3.819) <= 0.002);
    CHECK(std::abs(s.lb - 0.672) <= 0.002);
    CHECK_THROWS_AS(outlier_bounds(2.0, 1.0), qrc::ContractError);
}

TEST_CASE("published outlier counts") {
    const std::vector<std::vector<double>> tails = {
        {4.219, 4.055, 4.049, 3.909, 3.835, 3.817, 3.776},
        {4.154, 3.984, 3.82, 3.765, 3.698, 3.654, 3.636},
        {4.359, 4.023, 3.773, 3.671, 3.671, 3.645, 3.642},
        {4.3, 3.959, 3.827, 3.783, 3.782, 3.776, 3.76},
    };
    const double q[4][2] = {{1.948, 2.688}, {1.935, 2.655}, {1.925, 2.662}, {1.852, 2.639}};
    const std::size_t expected[] = {6, 4, 3, 3};
    for (int i = 0; i < 4; ++i) {
        const auto r = detect_outliers(tails[i], outlier_bounds(q[i][0], q[i][1]));
        CHECK(r.upper.size() == expected[i]);
        CHECK(r.lower.empty());
        CHECK(std::is_sorted(r.upper.rbegin(), r.upper.rend()));
    }
    // With the printed bound itself as well.
    QuartileSummary printed{1.948, 2.688, 0.740, 3.798, 0.838};
    const auto r = detect_outliers(tails[0], printed);
    CHECK(r.upper.size() == 6);
    CHECK(std::find(r.upper.begin(), r.upper.end(), 3.776) == r.upper.end());
}

TEST_CASE("outlier detection is permutation invariant and strict") {
    std::mt19937_64 rng(8);
    std::lognormal_distribution<double> d(0.0, 0.8);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> v(5 + rng() % 60);
        for (auto& x : v) x = d(rng);
        const auto s = summarize(v);
        const auto r = detect_outliers(v, s);
        for (double x : r.upper) REQUIRE(x > s.ub);
        for (double x : r.lower) REQUIRE(x < s.lb);
        REQUIRE(std::is_sorted(r.lower.begin(), r.lower.end()));
        REQUIRE(std::is_sorted(r.upper.rbegin(), r.upper.rend()));
        std::size_t inside = 0;
        for (double x : v) inside += (x >= s.lb && x <= s.ub);
        REQUIRE(inside + r.upper.size() + r.lower.size() == v.size());
        std::shuffle(v.begin(), v.end(), rng);
        REQUIRE(detect_outliers(v, summarize(v)) == r);
    }
    // Values sitting exactly on a fence are not outliers.
    const QuartileSummary fences = outlier_bounds(1.0, 2.0);
    CHECK(detect_outliers(std::vector<double>{3.5, -0.5, 3.5000001}, fences).upper.size() == 1);
    CHECK(detect_outliers(std::vector<double>{3.5, -0.5}, fences).lower.empty());
}

TEST_CASE("distribution functions") {
    for (double df : {0.5, 1.0, 3.0, 36.0, 4090.0}) CHECK(t_cdf(0.0, df) == 0.5);
    CHECK(f_cdf(0.0, 3, 36) == 0.0);
    CHECK(f_cdf(-1.0, 3, 36) == 0.0);
    CHECK(std::abs(f_cdf(1.2714, 3, 36) - 0.701) <= 0.005);
    CHECK_THROWS_AS(t_cdf(1.0, 0.0), qrc::ContractError);
    CHECK_THROWS_AS(f_cdf(1.0, 0.0, 3.0), qrc::ContractError);
    CHECK_THROWS_AS(f_cdf(1.0, 3.0, -1.0), qrc::ContractError);
}

TEST_CASE("distribution functions match Boost to 1e-8") {
    for (double df : {0.7, 1.0, 2.0, 5.3394, 10.0, 36.0, 1724.0, 4090.0}) {
        boost::math::students_t_distribution<double> t(df);
        for (double x = -12.0; x <= 12.0; x += 0.37) REQUIRE(std::abs(t_cdf(x, df) - boost::math::cdf(t, x)) < 1e-8);
    }
    for (double d1 : {1.0, 2.0, 3.0, 7.5, 30.0}) {
        for (double d2 : {1.0, 4.0, 36.0, 4090.0}) {
            boost::math::fisher_f_distribution<double> f(d1, d2);
            for (double x = 0.01; x <= 40.0; x *= 1.4) {
                REQUIRE(std::abs(f_cdf(x, d1, d2) - boost::math::cdf(f, x)) < 1e-8);
                REQUIRE(std::abs(f_sf(x, d1, d2) - boost::math::cdf(boost::math::complement(f, x))) < 1e-8);
            }
        }
    }
    for (double a : {0.5, 1.0, 2.5, 18.0, 2045.0})
        for (double b : {0.5, 1.5, 18.0, 862.0})
            for (double x = 0.0; x <= 1.0; x += 0.05)
                REQUIRE(std::abs(regularized_incomplete_beta(a, b, x) - boost::math::ibeta(a, b, x)) < 1e-8);
}

TEST_CASE("mean and variance") {
    CHECK(mean(std::vector<double>{1, 2, 3, 4}) == 2.5);
    CHECK(sample_variance(std::vector<double>{1, 2, 3, 4}) == Approx(5.0 / 3.0));
    CHECK_THROWS_AS(mean(std::vector<double>{}), qrc::ContractError);
    CHECK_THROWS_AS(sample_variance(std::vector<double>{1}), qrc::ContractError);
}
