#include "qrc/records.hpp"

#include <cstdio>

#include "json.hpp"

namespace qrc::records {

using nlohmann::json;
using composer::CompositionRecord;

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

json stats_json(const EntropyStats& s) {
    return {{"pseudo_draws", s.pseudo_draws},
            {"quantum_draws", s.quantum_draws},
            {"quantum_fetch_failures", s.quantum_fetch_failures},
            {"fallback_events", s.fallback_events},
            {"selection_coins", s.selection_coins}};
}

EntropyStats stats_from(const json& j) {
    EntropyStats s;
    s.pseudo_draws = j.at("pseudo_draws").get<std::uint64_t>();
    s.quantum_draws = j.at("quantum_draws").get<std::uint64_t>();
    s.quantum_fetch_failures = j.at("quantum_fetch_failures").get<std::uint64_t>();
    s.fallback_events = j.at("fallback_events").get<std::uint64_t>();
    s.selection_coins = j.value("selection_coins", std::uint64_t{0});
    return s;
}

json diagnostics_json(const composer::ComposeDiagnostics& d) {
    return {{"attempts", d.attempts},
            {"placement_failures", d.placement_failures},
            {"rejected_invalid", d.rejected_invalid},
            {"rejected_no_mate", d.rejected_no_mate},
            {"mate_in_1_discarded", d.mate_in_1_discarded},
            {"mate_in_3", d.mate_in_3},
            {"mate_in_2", d.mate_in_2}};
}

composer::ComposeDiagnostics diagnostics_from(const json& j) {
    composer::ComposeDiagnostics d;
    d.attempts = j.at("attempts").get<std::uint64_t>();
    d.placement_failures = j.at("placement_failures").get<std::uint64_t>();
    d.rejected_invalid = j.at("rejected_invalid").get<std::uint64_t>();
    d.rejected_no_mate = j.at("rejected_no_mate").get<std::uint64_t>();
    d.mate_in_1_discarded = j.at("mate_in_1_discarded").get<std::uint64_t>();
    d.mate_in_3 = j.at("mate_in_3").get<std::uint64_t>();
    d.mate_in_2 = j.at("mate_in_2").get<std::uint64_t>();
    return d;
}

json header_json(const Header& h) {
    return {{"kind", "header"},
            {"format", format_tag},
            {"set_label", h.set_label},
            {"set_index", h.set_index},
            {"instance_id", h.instance_id},
            {"seed", h.seed},
            {"mix_ratio", h.mix_ratio},
            {"settings", h.settings},
            {"settings_hash", h.settings_hash},
            {"scorer_version", h.scorer_version},
            {"entropy_mode", h.entropy_mode}};
}

Header header_from(const json& j) {
    if (j.at("format").get<std::string>() != format_tag) throw ContractError("unsupported record format");
    Header h;
    h.set_label = j.at("set_label").get<std::string>();
    h.set_index = j.at("set_index").get<int>();
    h.instance_id = j.at("instance_id").get<int>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.mix_ratio = j.at("mix_ratio").get<double>();
    h.settings = j.at("settings").get<std::string>();
    h.settings_hash = j.at("settings_hash").get<std::string>();
    h.scorer_version = j.at("scorer_version").get<std::string>();
    h.entropy_mode = j.at("entropy_mode").get<std::string>();
    return h;
}

}  // namespace

std::string record_to_line(const CompositionRecord& r) {
    json j{{"kind", "record"},
           {"fen", r.fen},
           {"classification", composer::to_string(r.classification)},
           {"configuration", r.configuration},
           {"key_moves", r.key_moves},
           {"key_move_count", r.key_moves.size()},
           {"principal_variation", r.principal_variation},
           {"entropy", stats_json(r.entropy)},
           {"set_label", r.set_label},
           {"instance_id", r.instance_id},
           {"seed", r.seed},
           {"timestamp", r.timestamp}};
    if (r.aesthetics) {
        const auto& a = *r.aesthetics;
        j["aesthetic_score"] = a.total;
        j["aesthetics"] = {{"economy", a.economy}, {"sparsity", a.sparsity}, {"theme_bonus", a.theme_bonus},
                           {"total", a.total},     {"pin", a.pin},           {"fork", a.fork},
                           {"sacrifice", a.sacrifice}};
    } else {
        j["aesthetic_score"] = nullptr;
    }
    return j.dump();
}

CompositionRecord record_from_line(const std::string& line) {
    const json j = json::parse(line);
    if (j.at("kind") != "record") throw ContractError("not a record line");
    CompositionRecord r;
    r.fen = j.at("fen").get<std::string>();
    r.classification = composer::classification_from_string(j.at("classification").get<std::string>());
    r.configuration = j.at("configuration").get<std::string>();
    r.key_moves = j.at("key_moves").get<std::vector<std::string>>();
    r.principal_variation = j.at("principal_variation").get<std::vector<std::string>>();
    r.entropy = stats_from(j.at("entropy"));
    r.set_label = j.at("set_label").get<std::string>();
    r.instance_id = j.at("instance_id").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.timestamp = j.at("timestamp").get<std::uint64_t>();
    if (j.contains("aesthetics") && !j["aesthetics"].is_null()) {
        const auto& a = j["aesthetics"];
        aesthetics::AestheticBreakdown b;
        b.economy = a.at("economy").get<double>();
        b.sparsity = a.at("sparsity").get<double>();
        b.theme_bonus = a.at("theme_bonus").get<double>();
        b.total = a.at("total").get<double>();
        b.pin = a.at("pin").get<bool>();
        b.fork = a.at("fork").get<bool>();
        b.sacrifice = a.at("sacrifice").get<bool>();
        r.aesthetics = b;
    }
    if (r.accepted() != r.aesthetics.has_value())
        throw ContractError("aesthetic score must be present exactly for mate classifications");
    return r;
}

RecordWriter::RecordWriter(const std::filesystem::path& path, const Header& header)
    : out_(path, std::ios::trunc) {
    if (!out_) throw IoError("cannot write record file " + path.string());
    out_ << header_json(header).dump() << '\n' << std::flush;
}

void RecordWriter::write(const CompositionRecord& record) {
    out_ << record_to_line(record) << '\n' << std::flush;
    if (!out_) throw IoError("record write failed");
}

void RecordWriter::finish(const Footer& footer) {
    json j{{"kind", "footer"},
           {"complete", footer.complete},
           {"error", footer.error},
           {"diagnostics", diagnostics_json(footer.diagnostics)},
           {"entropy", stats_json(footer.entropy)}};
    out_ << j.dump() << '\n' << std::flush;
    if (!out_) throw IoError("record write failed");
}

RecordFile read_record_file(const std::filesystem::path& path, bool permissive) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open record file " + path.string());
    RecordFile file;
    file.path = path;
    std::string line;
    std::size_t number = 0;
    bool have_header = false;
    auto fail = [&](const std::string& why) {
        const std::string msg = path.string() + ":" + std::to_string(number) + ": " + why;
        if (!permissive) throw ContractError(msg);
        file.problems.push_back(msg);
    };
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            const std::string kind = j.at("kind").get<std::string>();
            if (kind == "header") {
                if (number != 1) throw ContractError("header must be the first line");
                file.header = header_from(j);
                have_header = true;
            } else if (kind == "record") {
                if (file.footer) throw ContractError("record after footer");
                file.records.push_back(record_from_line(line));
            } else if (kind == "footer") {
                Footer f;
                f.complete = j.at("complete").get<bool>();
                f.error = j.value("error", std::string{});
                f.diagnostics = diagnostics_from(j.at("diagnostics"));
                f.entropy = stats_from(j.at("entropy"));
                file.footer = f;
            } else {
                throw ContractError("unknown line kind '" + kind + "'");
            }
        } catch (const json::exception& e) {
            fail(std::string("malformed record line: ") + e.what());
        } catch (const ContractError& e) {
            if (number == 1) {
                // Without a header nothing else in the file can be attributed.
                throw ContractError(path.string() + ":1: " + e.what());
            }
            fail(e.what());
        }
    }
    if (number == 0) {
        file.empty = true;
        return file;
    }
    if (!have_header) throw ContractError(path.string() + ": missing header line");
    return file;
}

}  // namespace qrc::records
