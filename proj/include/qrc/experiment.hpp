#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qrc/composer.hpp"
#include "qrc/quantum_client.hpp"
#include "qrc/records.hpp"
#include "qrc/report.hpp"

namespace qrc::experiment {

struct SetSpec {
    std::string label;
    MixRatio mix;
};

/// Pseudo, Q5, Q15, Q25.
std::vector<SetSpec> default_sets();

enum class EntropyMode {
    live,     // HTTP quantum service; fetched bytes are recorded for replay
    replay,   // recorded bytes from replay_file (sliced per instance) or replay_dir
    offline,  // no quantum source; quantum selections fall back per policy
};

struct EntropyConfig {
    EntropyMode mode = EntropyMode::live;
    QuantumClientConfig client;
    std::filesystem::path replay_file;
    std::filesystem::path replay_dir;
};

struct ExperimentPlan {
    std::vector<SetSpec> sets = default_sets();
    int instances_per_set = 10;
    composer::Budget budget = composer::Budget::of_attempts(2000);
    std::uint64_t base_seed = 20201;
    composer::ComposerSettings composer = composer::default_settings();
    EntropyConfig entropy;
    unsigned max_workers = 0;  // 0: one per hardware thread

    void check() const;

    /// Missing keys keep their defaults; relative paths resolve against `base_dir`.
    static ExperimentPlan from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
    static ExperimentPlan from_file(const std::filesystem::path& path);
};

/// Seed for one instance, derived from the plan seed and its coordinates.
std::uint64_t instance_seed(std::uint64_t base_seed, int set_index, int instance);

/// `<label>_<instance>` with anything but [A-Za-z0-9_-] replaced by '_'.
std::string instance_stem(const std::string& label, int instance);

struct RunResult {
    report::Report report;
    std::vector<records::RecordFile> files;  // in-memory copies of what was written
};

/// Runs every (set, instance) worker, writes `<stem>.records` files under
/// `out_dir` and computes the report from the collected records.
RunResult run_experiment(const ExperimentPlan& plan, const std::filesystem::path& out_dir);

/// Reads every `*.records` file in a directory (sorted by name).
std::vector<records::RecordFile> load_record_dir(const std::filesystem::path& dir, bool permissive = false);

/// Writes report.txt and report.json next to the records.
void write_report(const report::Report& report, const std::filesystem::path& out_dir);

}  // namespace qrc::experiment
