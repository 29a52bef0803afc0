#include "qrc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace qrc::report {

using nlohmann::json;

namespace {

std::string fixed(double v, int digits = 3) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    const char delim = line.find('\t') != std::string::npos ? '\t' : line.find(';') != std::string::npos ? ';' : ',';
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, delim)) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == delim) cells.emplace_back();
    return cells;
}

double parse_number(const std::string& cell, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != cell.size() || !std::isfinite(v))
        throw ContractError("table line " + std::to_string(line) + ": '" + cell + "' is not a number");
    return v;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fills `analysis` from one sample per set. `usable[i]` false excludes set i
/// from the cross-set tests (its summary is still computed).
void analyze_measure(const std::vector<std::string>& labels, const std::vector<std::vector<double>>& samples,
                     const std::vector<bool>& usable, const QuartileOverrides& overrides, MeasureAnalysis& analysis) {
    analysis = {};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        SetMeasure m;
        const auto& xs = samples[i];
        m.n = xs.size();
        if (!xs.empty()) m.mean = stats::mean(xs);
        if (auto it = overrides.find(labels[i]); it != overrides.end()) {
            m.quartiles = stats::outlier_bounds(it->second.first, it->second.second);
        } else if (xs.size() >= 4) {
            m.quartiles = stats::summarize(xs);
        }
        if (m.quartiles) m.outliers = stats::detect_outliers(xs, *m.quartiles);
        analysis.per_set.push_back(std::move(m));
    }

    std::vector<stats::SampleSet> groups;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (usable[i]) groups.push_back({labels[i], samples[i]});
    if (groups.size() < 2) {
        analysis.anova_note = "fewer than two comparable sets";
    } else {
        try {
            analysis.anova = stats::one_way_anova(groups);
        } catch (const ContractError& e) {
            analysis.anova_note = e.what();
        }
    }
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            PairwiseWelch w{groups[i].label, groups[j].label, std::nullopt, {}};
            try {
                w.result = stats::welch_t_test(groups[i], groups[j]);
            } catch (const ContractError& e) {
                w.note = e.what();
            }
            analysis.welch.push_back(std::move(w));
        }
    }
}

}  // namespace

bool Report::computable() const {
    for (const auto& m : scores.per_set)
        if (m.mean) return true;
    for (const auto& m : quantities.per_set)
        if (m.mean) return true;
    return false;
}

Report analyze_records(const std::vector<records::RecordFile>& files) {
    Report r;
    r.source = "records";

    std::vector<const records::RecordFile*> usable;
    for (const auto& f : files) {
        if (f.empty) {
            r.notes.push_back("empty record file skipped: " + f.path.string());
            continue;
        }
        for (const auto& p : f.problems) r.notes.push_back("skipped line " + p);
        usable.push_back(&f);
    }
    std::stable_sort(usable.begin(), usable.end(), [](const auto* a, const auto* b) {
        if (a->header.set_index != b->header.set_index) return a->header.set_index < b->header.set_index;
        return a->header.instance_id < b->header.instance_id;
    });

    // set_index -> position in r.sets
    std::map<int, std::size_t> slot;
    std::vector<std::map<int, std::size_t>> counts;  // per set: instance -> accepted records
    std::vector<std::vector<double>> scores;
    for (const auto* f : usable) {
        const auto& h = f->header;
        auto [it, inserted] = slot.emplace(h.set_index, r.sets.size());
        if (inserted) {
            SetInfo info;
            info.label = h.set_label;
            info.mix_ratio = h.mix_ratio;
            r.sets.push_back(info);
            counts.emplace_back();
            scores.emplace_back();
        }
        const std::size_t s = it->second;
        SetInfo& info = r.sets[s];
        info.instances = std::max(info.instances, h.instance_id + 1);
        if (!f->complete()) {
            info.complete = false;
            r.notes.push_back("set " + info.label + " instance " + std::to_string(h.instance_id) + " is incomplete" +
                              (f->footer && !f->footer->error.empty() ? ": " + f->footer->error : ""));
        }
        std::size_t accepted = 0;
        for (const auto& rec : f->records) {
            if (!rec.accepted()) continue;
            ++accepted;
            ++(rec.classification == composer::Classification::mate_in_3 ? info.mate_in_3 : info.mate_in_2);
            scores[s].push_back(*rec.aesthetic_score());
        }
        info.records += accepted;
        counts[s][h.instance_id] += accepted;
        if (f->footer) {
            auto& d = info.diagnostics;
            const auto& fd = f->footer->diagnostics;
            d.attempts += fd.attempts;
            d.placement_failures += fd.placement_failures;
            d.rejected_invalid += fd.rejected_invalid;
            d.rejected_no_mate += fd.rejected_no_mate;
            d.mate_in_1_discarded += fd.mate_in_1_discarded;
            d.mate_in_3 += fd.mate_in_3;
            d.mate_in_2 += fd.mate_in_2;
            auto& e = info.entropy;
            const auto& fe = f->footer->entropy;
            e.pseudo_draws += fe.pseudo_draws;
            e.quantum_draws += fe.quantum_draws;
            e.quantum_fetch_failures += fe.quantum_fetch_failures;
            e.fallback_events += fe.fallback_events;
            e.selection_coins += fe.selection_coins;
        }
        if (r.scorer_version.empty()) r.scorer_version = h.scorer_version;
        else if (r.scorer_version != h.scorer_version) r.scorer_version = "mixed";
        if (r.settings_hash.empty()) {
            r.settings_hash = h.settings_hash;
            r.settings = h.settings;
        } else if (r.settings_hash != h.settings_hash) {
            r.settings_hash = "mixed";
            r.settings = "mixed";
        }
    }

    int rows = 0;
    for (auto& info : r.sets) {
        const std::size_t s = &info - r.sets.data();
        if (static_cast<int>(counts[s].size()) != info.instances) {
            info.complete = false;
            r.notes.push_back("set " + info.label + " is missing instance files");
        }
        rows = std::max(rows, info.instances);
    }
    r.quantity_matrix.assign(rows, std::vector<double>(r.sets.size(), 0.0));
    std::vector<std::vector<double>> quantity_samples(r.sets.size());
    std::vector<std::string> labels;
    std::vector<bool> complete;
    for (std::size_t s = 0; s < r.sets.size(); ++s) {
        labels.push_back(r.sets[s].label);
        complete.push_back(r.sets[s].complete);
        for (int i = 0; i < r.sets[s].instances; ++i) {
            const auto it = counts[s].find(i);
            const double c = it == counts[s].end() ? 0.0 : static_cast<double>(it->second);
            r.quantity_matrix[i][s] = c;
            if (it != counts[s].end()) quantity_samples[s].push_back(c);
        }
    }

    analyze_measure(labels, scores, std::vector<bool>(r.sets.size(), true), {}, r.scores);
    analyze_measure(labels, quantity_samples, complete, {}, r.quantities);
    for (std::size_t s = 0; s < r.sets.size(); ++s)
        if (!complete[s]) r.notes.push_back("set " + labels[s] + " excluded from quantity tests (incomplete)");
    r.notes.push_back("aesthetic scores are pooled flat across the instances of each set");
    r.notes.push_back("invalid candidates are counted in diagnostics and excluded from quantities");
    if (!r.computable()) r.notes.push_back("no statistics computable: no records");
    return r;
}

// --- tables ----------------------------------------------------------------

Table parse_table(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    std::size_t number = 0;
    Table table;
    std::vector<int> keep;  // source column -> output column, -1 for ignored
    while (std::getline(ss, line)) {
        ++number;
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        if (table.labels.empty()) {
            std::map<std::string, int> seen;
            for (const auto& c : cells) {
                if (c == "#" || c.empty()) {
                    keep.push_back(-1);
                    continue;
                }
                if (seen.count(c)) throw ContractError("table: duplicate column label '" + c + "'");
                seen[c] = 1;
                keep.push_back(static_cast<int>(table.labels.size()));
                table.labels.push_back(c);
            }
            if (table.labels.empty()) throw ContractError("table: header row has no labels");
            table.columns.resize(table.labels.size());
            continue;
        }
        if (cells.size() > keep.size())
            throw ContractError("table line " + std::to_string(number) + ": more cells than header labels");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (keep[i] < 0 || cells[i].empty()) continue;
            table.columns[keep[i]].push_back(parse_number(cells[i], number));
        }
    }
    if (table.labels.empty()) throw ContractError("table: no header row");
    return table;
}

Table read_table(const std::filesystem::path& path) { return parse_table(read_text(path)); }

QuartileOverrides parse_quartiles(const std::string& text) {
    // Rows of: label, Q1, Q3 [, ...ignored]. A header row is recognised by a
    // non-numeric Q1 cell.
    QuartileOverrides out;
    std::stringstream ss(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(ss, line)) {
        ++number;
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() < 3) throw ContractError("quartile line " + std::to_string(number) + ": need label, Q1, Q3");
        if (number == 1 || out.empty()) {
            try {
                (void)parse_number(cells[1], number);
            } catch (const ContractError&) {
                continue;
            }
        }
        out[cells[0]] = {parse_number(cells[1], number), parse_number(cells[2], number)};
    }
    return out;
}

QuartileOverrides read_quartiles(const std::filesystem::path& path) { return parse_quartiles(read_text(path)); }

Report analyze_table(const Table& table, TableMeasure measure, const QuartileOverrides& quartiles) {
    for (const auto& [label, q] : quartiles)
        if (std::find(table.labels.begin(), table.labels.end(), label) == table.labels.end())
            throw ContractError("quartiles given for unknown column '" + label + "'");
    Report r;
    r.source = "table";
    for (std::size_t i = 0; i < table.labels.size(); ++i) {
        SetInfo info;
        info.label = table.labels[i];
        info.instances = static_cast<int>(table.columns[i].size());
        r.sets.push_back(info);
    }
    const std::vector<bool> all(table.labels.size(), true);
    if (measure == TableMeasure::quantities) {
        std::size_t rows = table.columns.empty() ? 0 : table.columns.front().size();
        for (const auto& c : table.columns)
            if (c.size() != rows) throw ContractError("quantity table columns must all have the same length");
        r.quantity_matrix.assign(rows, std::vector<double>(table.columns.size()));
        for (std::size_t s = 0; s < table.columns.size(); ++s)
            for (std::size_t i = 0; i < rows; ++i) r.quantity_matrix[i][s] = table.columns[s][i];
        analyze_measure(table.labels, table.columns, all, quartiles, r.quantities);
        analyze_measure(table.labels, std::vector<std::vector<double>>(table.labels.size()), all, {}, r.scores);
        r.scores.anova.reset();
        r.scores.anova_note = "no score data in a quantity table";
        r.scores.welch.clear();
    } else {
        analyze_measure(table.labels, table.columns, all, quartiles, r.scores);
        analyze_measure(table.labels, std::vector<std::vector<double>>(table.labels.size()), all, {}, r.quantities);
        r.quantities.anova.reset();
        r.quantities.anova_note = "no quantity data in a score table";
        r.quantities.welch.clear();
    }
    if (!quartiles.empty()) r.notes.push_back("quartiles supplied externally for some columns");
    if (!r.computable()) r.notes.push_back("no statistics computable: empty table");
    return r;
}

// --- rendering -------------------------------------------------------------

namespace {

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' '); }

void render_tests(std::ostringstream& os, const std::string& what, const MeasureAnalysis& m) {
    if (m.anova)
        os << "ANOVA (" << what << "): F(" << m.anova->df_between << ", " << m.anova->df_within
           << ") = " << fixed(m.anova->f_stat) << ", p = " << fixed(m.anova->p_value) << '\n';
    else
        os << "ANOVA (" << what << "): not computable (" << m.anova_note << ")\n";
    for (const auto& w : m.welch) {
        os << "  Welch " << w.a << " vs " << w.b << ": ";
        if (w.result)
            os << "t(" << fixed(w.result->df, 1) << ") = " << fixed(w.result->t_stat) << ", p = " << fixed(w.result->p_value)
               << '\n';
        else
            os << "not computable (" << w.note << ")\n";
    }
}

}  // namespace

std::string render_text(const Report& r) {
    std::ostringstream os;
    const std::size_t w = 12;
    os << "source: " << r.source << '\n';
    if (!r.scorer_version.empty()) os << "scorer: " << r.scorer_version << '\n';
    if (!r.settings_hash.empty()) os << "settings: " << r.settings << " [" << r.settings_hash << "]\n";
    for (const auto& n : r.notes) os << "note: " << n << '\n';
    os << '\n';

    os << "Table I. Mean aesthetic scores\n";
    for (const auto& s : r.sets) os << pad(s.label, w);
    os << '\n';
    for (const auto& m : r.scores.per_set) os << pad(m.mean ? fixed(*m.mean) : "-", w);
    os << "\n\n";

    os << "Table II. Quantities\n" << pad("#", 4);
    for (const auto& s : r.sets) os << pad(s.label, w);
    os << '\n';
    for (std::size_t i = 0; i < r.quantity_matrix.size(); ++i) {
        os << pad(std::to_string(i + 1), 4);
        for (double v : r.quantity_matrix[i]) os << pad(v == std::floor(v) ? fixed(v, 0) : fixed(v), w);
        os << '\n';
    }
    os << pad("mean", 4);
    for (const auto& m : r.quantities.per_set) os << pad(m.mean ? fixed(*m.mean, 1) : "-", w);
    os << "\n\n";

    render_tests(os, "scores", r.scores);
    render_tests(os, "quantities", r.quantities);
    os << '\n';

    auto has_quartiles = [](const MeasureAnalysis& m) {
        return std::any_of(m.per_set.begin(), m.per_set.end(), [](const SetMeasure& x) { return x.quartiles.has_value(); });
    };
    const bool use_scores = has_quartiles(r.scores) || !has_quartiles(r.quantities);
    const MeasureAnalysis& outlier_source = use_scores ? r.scores : r.quantities;
    const std::string measure_name = use_scores ? "aesthetic scores" : "quantities";
    os << "Table III. Outlier determination (" << measure_name << ")\n" << pad("", w) << pad("Q1", w) << pad("Q3", w) << pad("IQR", w)
       << pad("UB", w) << pad("LB", w) << '\n';
    for (std::size_t s = 0; s < r.sets.size(); ++s) {
        os << pad(r.sets[s].label, w);
        const auto& q = outlier_source.per_set[s].quartiles;
        if (q) os << pad(fixed(q->q1), w) << pad(fixed(q->q3), w) << pad(fixed(q->iqr), w) << pad(fixed(q->ub), w)
                  << pad(fixed(q->lb), w);
        else os << "not computable";
        os << '\n';
    }
    os << '\n';

    os << "Table IV. Outliers in " << measure_name << " (upper descending; lower ascending)\n";
    for (std::size_t s = 0; s < r.sets.size(); ++s) {
        const auto& o = outlier_source.per_set[s].outliers;
        os << pad(r.sets[s].label, w);
        if (!o) {
            os << "not computable\n";
            continue;
        }
        os << o->upper.size() << " upper";
        for (double v : o->upper) os << ' ' << fixed(v);
        os << "; " << o->lower.size() << " lower";
        for (double v : o->lower) os << ' ' << fixed(v);
        os << '\n';
    }

    if (r.source == "records") {
        os << "\nEntropy and attempts per set\n";
        for (const auto& s : r.sets) {
            const auto& e = s.entropy;
            const auto& d = s.diagnostics;
            os << pad(s.label, w) << "p=" << s.mix_ratio << " pseudo=" << e.pseudo_draws << " quantum=" << e.quantum_draws
               << " fetch_failures=" << e.quantum_fetch_failures << " fallbacks=" << e.fallback_events
               << " attempts=" << d.attempts << " mate_in_3=" << s.mate_in_3 << " mate_in_2=" << s.mate_in_2
               << (s.complete ? "" : " INCOMPLETE") << '\n';
        }
    }
    return os.str();
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json measure_json(const Report& r, const MeasureAnalysis& m) {
    json per_set = json::array();
    for (std::size_t s = 0; s < m.per_set.size(); ++s) {
        const auto& x = m.per_set[s];
        json q = nullptr, o = nullptr;
        if (x.quartiles)
            q = {{"q1", x.quartiles->q1}, {"q3", x.quartiles->q3}, {"iqr", x.quartiles->iqr}, {"ub", x.quartiles->ub},
                 {"lb", x.quartiles->lb}};
        if (x.outliers) o = {{"upper", x.outliers->upper}, {"lower", x.outliers->lower}};
        per_set.push_back({{"label", r.sets[s].label}, {"n", x.n}, {"mean", optional_number(x.mean)}, {"quartiles", q},
                           {"outliers", o}});
    }
    json anova = nullptr;
    if (m.anova)
        anova = {{"f_stat", m.anova->f_stat}, {"df_between", m.anova->df_between}, {"df_within", m.anova->df_within},
                 {"p_value", m.anova->p_value}};
    json welch = json::array();
    for (const auto& w : m.welch) {
        json res = nullptr;
        if (w.result) res = {{"t_stat", w.result->t_stat}, {"df", w.result->df}, {"p_value", w.result->p_value}};
        welch.push_back({{"a", w.a}, {"b", w.b}, {"result", res}, {"note", w.note}});
    }
    return {{"per_set", per_set}, {"anova", anova}, {"anova_note", m.anova_note}, {"pairwise_welch", welch}};
}

}  // namespace

json to_json(const Report& r) {
    json sets = json::array();
    for (const auto& s : r.sets) {
        sets.push_back({{"label", s.label},
                        {"mix_ratio", s.mix_ratio},
                        {"instances", s.instances},
                        {"complete", s.complete},
                        {"records", s.records},
                        {"mate_in_3", s.mate_in_3},
                        {"mate_in_2", s.mate_in_2},
                        {"diagnostics",
                         {{"attempts", s.diagnostics.attempts},
                          {"placement_failures", s.diagnostics.placement_failures},
                          {"rejected_invalid", s.diagnostics.rejected_invalid},
                          {"rejected_no_mate", s.diagnostics.rejected_no_mate},
                          {"mate_in_1_discarded", s.diagnostics.mate_in_1_discarded}}},
                        {"entropy",
                         {{"pseudo_draws", s.entropy.pseudo_draws},
                          {"quantum_draws", s.entropy.quantum_draws},
                          {"quantum_fetch_failures", s.entropy.quantum_fetch_failures},
                          {"fallback_events", s.entropy.fallback_events},
                          {"selection_coins", s.entropy.selection_coins}}}});
    }
    return {{"source", r.source},
            {"scorer_version", r.scorer_version},
            {"settings", r.settings},
            {"settings_hash", r.settings_hash},
            {"computable", r.computable()},
            {"sets", sets},
            {"quantity_matrix", r.quantity_matrix},
            {"scores", measure_json(r, r.scores)},
            {"quantities", measure_json(r, r.quantities)},
            {"notes", r.notes}};
}

}  // namespace qrc::report
