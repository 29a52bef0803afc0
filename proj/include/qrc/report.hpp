#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qrc/records.hpp"
#include "qrc/stats.hpp"

namespace qrc::report {

struct PairwiseWelch {
    std::string a;
    std::string b;
    std::optional<stats::WelchResult> result;
    std::string note;  // why the result is missing
    bool operator==(const PairwiseWelch&) const = default;
};

/// Per-set statistics of one measured quantity.
struct SetMeasure {
    std::size_t n = 0;
    std::optional<double> mean;
    std::optional<stats::QuartileSummary> quartiles;
    std::optional<stats::OutlierReport> outliers;
    bool operator==(const SetMeasure&) const = default;
};

/// One measured quantity compared across sets: per-set summaries, a
/// single-factor ANOVA and every pairwise Welch test.
struct MeasureAnalysis {
    std::vector<SetMeasure> per_set;  // parallel to Report::sets
    std::optional<stats::AnovaResult> anova;
    std::string anova_note;
    std::vector<PairwiseWelch> welch;
    bool operator==(const MeasureAnalysis&) const = default;
};

struct SetInfo {
    std::string label;
    double mix_ratio = 0.0;
    int instances = 0;
    bool complete = true;
    std::size_t records = 0;
    std::size_t mate_in_3 = 0;
    std::size_t mate_in_2 = 0;
    composer::ComposeDiagnostics diagnostics;
    EntropyStats entropy;
    bool operator==(const SetInfo&) const = default;
};

struct Report {
    std::string source;  // "records" or "table"
    std::string scorer_version;
    std::string settings;
    std::string settings_hash;
    std::vector<SetInfo> sets;
    std::vector<std::vector<double>> quantity_matrix;  // instances x sets
    MeasureAnalysis scores;      // aesthetic scores, pooled flat per set
    MeasureAnalysis quantities;  // per-instance output counts
    std::vector<std::string> notes;

    bool operator==(const Report&) const = default;
    /// False when not even one set mean could be computed.
    bool computable() const;
};

/// Recomputes every statistic from record files. Files may come in any order;
/// sets are ordered by their header's set index.
Report analyze_records(const std::vector<records::RecordFile>& files);

/// A delimited table: header row of labels, one column per set. A column
/// labelled '#' is treated as a row index and ignored; empty cells are skipped.
struct Table {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> columns;
};
Table read_table(const std::filesystem::path& path);
Table parse_table(const std::string& text);

/// Q1/Q3 supplied per label, e.g. from a published summary table.
using QuartileOverrides = std::map<std::string, std::pair<double, double>>;
QuartileOverrides read_quartiles(const std::filesystem::path& path);
QuartileOverrides parse_quartiles(const std::string& text);

enum class TableMeasure { quantities, scores };

/// Treats each column as one set's sample of the given measure.
Report analyze_table(const Table& table, TableMeasure measure = TableMeasure::quantities,
                     const QuartileOverrides& quartiles = {});

std::string render_text(const Report& report);
nlohmann::json to_json(const Report& report);

}  // namespace qrc::report
