#include "qrc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace qrc::experiment {

using nlohmann::json;

std::vector<SetSpec> default_sets() {
    return {{"Pseudo", MixRatio{0.0}}, {"Q5", MixRatio{0.05}}, {"Q15", MixRatio{0.15}}, {"Q25", MixRatio{0.25}}};
}

void ExperimentPlan::check() const {
    if (sets.empty()) throw ContractError("plan needs at least one set");
    std::set<std::string> labels, stems;
    for (const auto& s : sets) {
        if (s.label.empty()) throw ContractError("set labels must be non-empty");
        if (!labels.insert(s.label).second) throw ContractError("duplicate set label '" + s.label + "'");
        if (!stems.insert(instance_stem(s.label, 0)).second)
            throw ContractError("set labels '" + s.label + "' collide after file-name sanitising");
    }
    if (instances_per_set < 1) throw ContractError("instances_per_set must be at least 1");
    composer.check();
    entropy.client.check();
    if (entropy.mode == EntropyMode::replay && entropy.replay_file.empty() && entropy.replay_dir.empty())
        throw ContractError("replay mode needs replay_file or replay_dir");
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const char* where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::none_of(known.begin(), known.end(), [&key](const char* k) { return key == k; }))
            throw ContractError(std::string("unknown key '") + key + "' in " + where);
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

ExperimentPlan ExperimentPlan::from_json(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ContractError("plan must be a JSON object");
    ExperimentPlan plan;
    try {
        reject_unknown(doc, {"sets", "instances_per_set", "budget", "base_seed", "composer", "entropy", "max_workers"},
                       "plan");
        if (doc.contains("sets")) {
            plan.sets.clear();
            for (const auto& s : doc.at("sets")) {
                reject_unknown(s, {"label", "mix"}, "set");
                plan.sets.push_back({s.at("label").get<std::string>(), MixRatio{s.at("mix").get<double>()}});
            }
        }
        plan.instances_per_set = doc.value("instances_per_set", plan.instances_per_set);
        if (doc.contains("budget")) {
            const auto& b = doc.at("budget");
            reject_unknown(b, {"attempts", "seconds"}, "budget");
            plan.budget = {};
            if (b.contains("attempts")) plan.budget.attempts = b.at("attempts").get<std::uint64_t>();
            if (b.contains("seconds"))
                plan.budget.wall_clock = std::chrono::milliseconds(
                    static_cast<std::int64_t>(b.at("seconds").get<double>() * 1000.0));
        }
        plan.base_seed = doc.value("base_seed", plan.base_seed);
        plan.max_workers = doc.value("max_workers", plan.max_workers);
        if (doc.contains("composer")) {
            const auto& c = doc.at("composer");
            reject_unknown(c, {"configurations", "attempts_min", "attempts_max", "max_placement_retries", "target_depth"},
                           "composer");
            if (c.contains("configurations")) {
                plan.composer.permissible.clear();
                for (const auto& s : c.at("configurations"))
                    plan.composer.permissible.push_back(composer::PieceConfiguration::parse(s.get<std::string>()));
            }
            plan.composer.attempts_min = c.value("attempts_min", plan.composer.attempts_min);
            plan.composer.attempts_max = c.value("attempts_max", plan.composer.attempts_max);
            plan.composer.max_placement_retries = c.value("max_placement_retries", plan.composer.max_placement_retries);
            plan.composer.target_depth = c.value("target_depth", plan.composer.target_depth);
        }
        if (doc.contains("entropy")) {
            const auto& e = doc.at("entropy");
            reject_unknown(e, {"mode", "endpoint", "block_size", "low_watermark", "timeout_ms", "fallback", "replay_file",
                               "replay_dir"},
                           "entropy");
            const std::string mode = e.value("mode", std::string("live"));
            if (mode == "live") plan.entropy.mode = EntropyMode::live;
            else if (mode == "replay") plan.entropy.mode = EntropyMode::replay;
            else if (mode == "offline") plan.entropy.mode = EntropyMode::offline;
            else throw ContractError("entropy mode must be live, replay or offline");
            auto& cl = plan.entropy.client;
            cl.endpoint_url = e.value("endpoint", cl.endpoint_url);
            cl.block_size = e.value("block_size", cl.block_size);
            cl.low_watermark = e.value("low_watermark", cl.low_watermark);
            cl.request_timeout = std::chrono::milliseconds(e.value("timeout_ms", cl.request_timeout.count()));
            const std::string fallback = e.value("fallback", std::string("use_pseudo"));
            if (fallback == "use_pseudo") cl.fallback_policy = FallbackPolicy::use_pseudo;
            else if (fallback == "fail") cl.fallback_policy = FallbackPolicy::fail;
            else throw ContractError("entropy fallback must be use_pseudo or fail");
            if (e.contains("replay_file")) plan.entropy.replay_file = resolve(base_dir, e.at("replay_file").get<std::string>());
            if (e.contains("replay_dir")) plan.entropy.replay_dir = resolve(base_dir, e.at("replay_dir").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ContractError(std::string("plan: ") + e.what());
    }
    plan.check();
    return plan;
}

ExperimentPlan ExperimentPlan::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open plan " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ContractError("plan " + path.string() + ": " + e.what());
    }
    return from_json(doc, path.parent_path());
}

std::uint64_t instance_seed(std::uint64_t base_seed, int set_index, int instance) {
    std::uint64_t s = mix_seed(base_seed);
    s = mix_seed(s ^ static_cast<std::uint64_t>(set_index));
    return mix_seed(s ^ (static_cast<std::uint64_t>(instance) << 32));
}

std::string instance_stem(const std::string& label, int instance) {
    std::string stem;
    for (char c : label) stem += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return stem + "_" + std::to_string(instance);
}

namespace {

/// Private entropy for one worker: pseudo stream, optional quantum stream, mixer.
struct EntropyStack {
    std::unique_ptr<PseudoSource> pseudo;
    std::unique_ptr<std::ofstream> audit;
    std::unique_ptr<QuantumClient> client;
    std::unique_ptr<QuantumSource> quantum;
    std::unique_ptr<MixedSource> mixed;
};

EntropyStack build_stack(const ExperimentPlan& plan, int set_index, int instance, std::uint64_t seed,
                         const std::filesystem::path& out_dir) {
    EntropyStack st;
    st.pseudo = std::make_unique<PseudoSource>(seed);
    const auto& spec = plan.sets[set_index];
    const std::string stem = instance_stem(spec.label, instance);
    std::unique_ptr<ByteFeed> feed;
    // A set that never selects quantum needs no quantum stack at all.
    if (spec.mix.value() > 0.0) {
        switch (plan.entropy.mode) {
            case EntropyMode::live:
                feed = std::make_unique<RecordingByteFeed>(
                    std::make_unique<HttpByteFeed>(plan.entropy.client.endpoint_url, plan.entropy.client.request_timeout),
                    out_dir / (stem + ".qbytes"));
                break;
            case EntropyMode::replay:
                if (!plan.entropy.replay_dir.empty()) {
                    feed = std::make_unique<ReplayByteFeed>(plan.entropy.replay_dir / (stem + ".qbytes"));
                } else {
                    const auto size = std::filesystem::file_size(plan.entropy.replay_file);
                    const auto total = static_cast<std::uintmax_t>(plan.sets.size()) * plan.instances_per_set;
                    const auto slice = size / total;
                    const auto index = static_cast<std::uintmax_t>(set_index) * plan.instances_per_set + instance;
                    feed = std::make_unique<ReplayByteFeed>(plan.entropy.replay_file, index * slice, slice);
                }
                break;
            case EntropyMode::offline:
                break;
        }
    }
    if (feed) {
        st.audit = std::make_unique<std::ofstream>(out_dir / (stem + ".audit.log"), std::ios::trunc);
        st.client = std::make_unique<QuantumClient>(std::move(feed), plan.entropy.client, st.audit.get());
        st.quantum = std::make_unique<QuantumSource>(*st.client);
    }
    st.mixed = std::make_unique<MixedSource>(*st.pseudo, st.quantum.get(), spec.mix, plan.entropy.client.fallback_policy);
    return st;
}

const char* mode_name(EntropyMode m) {
    switch (m) {
        case EntropyMode::live: return "live";
        case EntropyMode::replay: return "replay";
        case EntropyMode::offline: return "offline";
    }
    return "unknown";
}

records::RecordFile run_instance(const ExperimentPlan& plan, int set_index, int instance,
                                 const std::filesystem::path& out_dir) {
    const auto& spec = plan.sets[set_index];
    records::RecordFile file;
    file.path = out_dir / (instance_stem(spec.label, instance) + ".records");
    auto& h = file.header;
    h.set_label = spec.label;
    h.set_index = set_index;
    h.instance_id = instance;
    h.seed = instance_seed(plan.base_seed, set_index, instance);
    h.mix_ratio = spec.mix.value();
    h.settings = plan.composer.canonical();
    h.settings_hash = records::fnv1a_hex(h.settings);
    h.scorer_version = std::string(aesthetics::scorer_version);
    h.entropy_mode = mode_name(plan.entropy.mode);

    records::RecordWriter writer(file.path, h);
    records::Footer footer;
    EntropyStack stack;
    try {
        stack = build_stack(plan, set_index, instance, h.seed, out_dir);
        composer::ComposeContext ctx{spec.label, instance, h.seed, stack.mixed.get(), &footer.diagnostics};
        composer::compose(*stack.mixed, plan.composer, plan.budget, ctx,
                                               [&](const composer::CompositionRecord& rec) {
                                                   writer.write(rec);
                                                   file.records.push_back(rec);
                                               });
    } catch (const std::exception& e) {
        footer.complete = false;
        footer.error = e.what();
    }
    if (stack.mixed) footer.entropy = stack.mixed->stats();
    writer.finish(footer);
    file.footer = footer;
    return file;
}

}  // namespace

RunResult run_experiment(const ExperimentPlan& plan, const std::filesystem::path& out_dir) {
    plan.check();
    std::filesystem::create_directories(out_dir);
    const int total = static_cast<int>(plan.sets.size()) * plan.instances_per_set;
    std::vector<records::RecordFile> files(total);

    unsigned workers = plan.max_workers ? plan.max_workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(total));
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;  // only I/O failures outside an instance's own try block land here
    auto work = [&] {
        for (int job = next++; job < total; job = next++) {
            try {
                files[job] = run_instance(plan, job / plan.instances_per_set, job % plan.instances_per_set, out_dir);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);

    RunResult result;
    result.report = report::analyze_records(files);
    result.files = std::move(files);
    return result;
}

std::vector<records::RecordFile> load_record_dir(const std::filesystem::path& dir, bool permissive) {
    if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".records") paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    std::vector<records::RecordFile> files;
    for (const auto& p : paths) files.push_back(records::read_record_file(p, permissive));
    return files;
}

void write_report(const report::Report& report, const std::filesystem::path& out_dir) {
    std::ofstream txt(out_dir / "report.txt", std::ios::trunc);
    std::ofstream js(out_dir / "report.json", std::ios::trunc);
    if (!txt || !js) throw IoError("cannot write report files in " + out_dir.string());
    txt << report::render_text(report);
    js << report::to_json(report).dump(2) << '\n';
}

}  // namespace qrc::experiment
