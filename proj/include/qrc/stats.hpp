#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrc/error.hpp"

namespace qrc::stats {

/// A statistic whose value is undefined for the given data (e.g. F with no
/// variance at all).
class UndefinedStatistic : public ContractError {
public:
    using ContractError::ContractError;
};

struct SampleSet {
    std::string label;
    std::vector<double> values;
};

struct AnovaResult {
    double f_stat = 0.0;
    int df_between = 0;
    int df_within = 0;
    double p_value = 1.0;
    bool operator==(const AnovaResult&) const = default;
};

struct WelchResult {
    double t_stat = 0.0;
    double df = 0.0;  // Welch-Satterthwaite, generally non-integer
    double p_value = 1.0;  // two-sided
    bool operator==(const WelchResult&) const = default;
};

struct QuartileSummary {
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double ub = 0.0;
    double lb = 0.0;
    bool operator==(const QuartileSummary&) const = default;
};

struct OutlierReport {
    std::vector<double> upper;  // descending
    std::vector<double> lower;  // ascending
    bool operator==(const OutlierReport&) const = default;
};

double mean(std::span<const double> xs);
/// n - 1 denominator.
double sample_variance(std::span<const double> xs);

/// Classical single-factor ANOVA. Needs at least two groups of two values.
AnovaResult one_way_anova(std::span<const SampleSet> groups);

/// Two-sample t-test assuming unequal variances, two-sided.
WelchResult welch_t_test(const SampleSet& a, const SampleSet& b);

/// Student's t with pooled variance; for two groups its square equals the ANOVA F.
double pooled_t_stat(const SampleSet& a, const SampleSet& b);

/// Linear interpolation between order statistics at 0.25(n-1) and 0.75(n-1).
std::pair<double, double> quartiles(std::span<const double> values);

/// Tukey fences at 1.5 IQR.
QuartileSummary outlier_bounds(double q1, double q3);
QuartileSummary summarize(std::span<const double> values);

/// Values strictly above ub or strictly below lb.
OutlierReport detect_outliers(std::span<const double> values, const QuartileSummary& summary);

/// I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

double f_cdf(double x, double d1, double d2);
/// 1 - f_cdf, computed without cancellation.
double f_sf(double x, double d1, double d2);
double t_cdf(double x, double df);

}  // namespace qrc::stats
