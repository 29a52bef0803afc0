#include "qrc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qrc::stats {
namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iter = 100000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    return h;
}

void require_df(double df, const char* what) {
    if (!(df > 0.0) || !std::isfinite(df)) throw ContractError(std::string(what) + ": degrees of freedom must be positive");
}

}  // namespace

double mean(std::span<const double> xs) {
    if (xs.empty()) throw ContractError("mean of an empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) throw ContractError("variance needs at least two values");
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw ContractError("incomplete beta: shape parameters must be positive");
    if (std::isnan(x)) throw ContractError("incomplete beta: x is NaN");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_cdf(double x, double d1, double d2) {
    require_df(d1, "f_cdf");
    require_df(d2, "f_cdf");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return regularized_incomplete_beta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

double f_sf(double x, double d1, double d2) {
    require_df(d1, "f_sf");
    require_df(d2, "f_sf");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x));
}

double t_cdf(double x, double df) {
    require_df(df, "t_cdf");
    if (x == 0.0) return 0.5;
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    const double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + x * x));
    return x > 0 ? 1.0 - tail : tail;
}

AnovaResult one_way_anova(std::span<const SampleSet> groups) {
    if (groups.size() < 2) throw ContractError("ANOVA needs at least two groups");
    std::size_t total = 0;
    double grand = 0.0;
    for (const auto& g : groups) {
        if (g.values.size() < 2) throw ContractError("ANOVA group '" + g.label + "' has fewer than two values");
        total += g.values.size();
        for (double x : g.values) grand += x;
    }
    grand /= static_cast<double>(total);

    double ss_between = 0.0, ss_within = 0.0;
    for (const auto& g : groups) {
        const double m = mean(g.values);
        ss_between += static_cast<double>(g.values.size()) * (m - grand) * (m - grand);
        for (double x : g.values) ss_within += (x - m) * (x - m);
    }
    AnovaResult r;
    r.df_between = static_cast<int>(groups.size()) - 1;
    r.df_within = static_cast<int>(total - groups.size());
    const double ms_between = ss_between / r.df_between;
    const double ms_within = ss_within / r.df_within;
    if (ms_within == 0.0) {
        if (ms_between == 0.0) throw UndefinedStatistic("ANOVA F undefined: no variance within or between groups");
        r.f_stat = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
        return r;
    }
    r.f_stat = ms_between / ms_within;
    r.p_value = f_sf(r.f_stat, r.df_between, r.df_within);
    return r;
}

WelchResult welch_t_test(const SampleSet& a, const SampleSet& b) {
    if (a.values.size() < 2 || b.values.size() < 2)
        throw ContractError("Welch t-test needs at least two values per sample");
    const double na = static_cast<double>(a.values.size());
    const double nb = static_cast<double>(b.values.size());
    const double va = sample_variance(a.values) / na;
    const double vb = sample_variance(b.values) / nb;
    const double diff = mean(a.values) - mean(b.values);
    const double se2 = va + vb;
    if (se2 == 0.0) {
        if (diff == 0.0) throw UndefinedStatistic("Welch t undefined: both samples constant and equal");
        throw UndefinedStatistic("Welch t undefined: both samples have zero variance");
    }
    WelchResult r;
    r.t_stat = diff / std::sqrt(se2);
    r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p_value = std::min(1.0, regularized_incomplete_beta(r.df / 2.0, 0.5, r.df / (r.df + r.t_stat * r.t_stat)));
    return r;
}

double pooled_t_stat(const SampleSet& a, const SampleSet& b) {
    if (a.values.size() < 2 || b.values.size() < 2) throw ContractError("pooled t-test needs two values per sample");
    const double na = static_cast<double>(a.values.size());
    const double nb = static_cast<double>(b.values.size());
    const double sp2 = ((na - 1.0) * sample_variance(a.values) + (nb - 1.0) * sample_variance(b.values)) / (na + nb - 2.0);
    if (sp2 == 0.0) throw UndefinedStatistic("pooled t undefined: zero variance");
    return (mean(a.values) - mean(b.values)) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
}

std::pair<double, double> quartiles(std::span<const double> values) {
    if (values.size() < 4) throw ContractError("quartiles need at least four values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    auto at = [&sorted](double pos) {
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(lo);
        if (lo + 1 >= sorted.size()) return sorted[lo];
        return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
    };
    const double last = static_cast<double>(sorted.size() - 1);
    return {at(0.25 * last), at(0.75 * last)};
}

QuartileSummary outlier_bounds(double q1, double q3) {
    if (!(q3 >= q1)) throw ContractError("outlier bounds need q3 >= q1");
    QuartileSummary s;
    s.q1 = q1;
    s.q3 = q3;
    s.iqr = q3 - q1;
    s.ub = q3 + 1.5 * s.iqr;
    s.lb = q1 - 1.5 * s.iqr;
    return s;
}

QuartileSummary summarize(std::span<const double> values) {
    const auto [q1, q3] = quartiles(values);
    return outlier_bounds(q1, q3);
}

OutlierReport detect_outliers(std::span<const double> values, const QuartileSummary& summary) {
    OutlierReport r;
    for (double x : values) {
        if (x > summary.ub) r.upper.push_back(x);
        else if (x < summary.lb) r.lower.push_back(x);
    }
    std::sort(r.upper.begin(), r.upper.end(), std::greater<>());
    std::sort(r.lower.begin(), r.lower.end());
    return r;
}

}  // namespace qrc::stats
