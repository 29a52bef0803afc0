#include "qrc/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <optional>

#include "CLI11.hpp"
#include "qrc/aesthetics.hpp"
#include "qrc/experiment.hpp"
#include "qrc/prover.hpp"
#include "qrc/quantum_client.hpp"

namespace qrc::cli {
namespace {

struct ComposeArgs {
    std::string plan;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> mix;
    std::optional<std::uint64_t> attempts;
    std::optional<int> instances;
    std::optional<unsigned> workers;
    std::string endpoint;
    std::string replay_file;
    bool offline = false;
};

struct ProblemArgs {
    std::string fen;
    int depth = 3;
};

struct AnalyzeArgs {
    std::vector<std::string> records;
    std::string table;
    std::string quartiles;
    std::string json_out;
    bool scores = false;
    bool permissive = false;
};

struct EntropyArgs {
    std::string endpoint;
    std::size_t n = 1024;
    std::size_t block_size = 1024;
    int timeout_ms = 5000;
};

std::string mix_label(double p) {
    if (p == 0.0) return "Pseudo";
    const double pct = p * 100.0;
    char buf[32];
    if (pct == std::floor(pct)) std::snprintf(buf, sizeof buf, "Q%.0f", pct);
    else std::snprintf(buf, sizeof buf, "Q%g", pct);
    return buf;
}

int do_compose(const ComposeArgs& a, std::ostream& out) {
    experiment::ExperimentPlan plan;
    if (!a.plan.empty()) {
        plan = experiment::ExperimentPlan::from_file(a.plan);
    } else {
        plan.sets = {{mix_label(default_mix_ratio.value()), default_mix_ratio}};
    }
    if (const char* env = std::getenv(qrng_endpoint_env); env && *env) plan.entropy.client.endpoint_url = env;
    if (!a.endpoint.empty()) plan.entropy.client.endpoint_url = a.endpoint;
    if (a.mix) plan.sets = {{mix_label(*a.mix), MixRatio{*a.mix}}};
    if (a.seed) plan.base_seed = *a.seed;
    if (a.attempts) plan.budget = composer::Budget::of_attempts(*a.attempts);
    if (a.instances) plan.instances_per_set = *a.instances;
    if (a.workers) plan.max_workers = *a.workers;
    if (!a.replay_file.empty()) {
        plan.entropy.mode = experiment::EntropyMode::replay;
        plan.entropy.replay_file = a.replay_file;
        plan.entropy.replay_dir.clear();
    }
    if (a.offline && plan.entropy.mode == experiment::EntropyMode::live)
        plan.entropy.mode = experiment::EntropyMode::offline;
    plan.check();

    const auto result = experiment::run_experiment(plan, a.out);
    experiment::write_report(result.report, a.out);
    out << report::render_text(result.report);
    for (const auto& s : result.report.sets)
        if (!s.complete) return 2;
    return 0;
}

void print_moves(std::ostream& out, const std::vector<chess::Move>& moves) {
    for (std::size_t i = 0; i < moves.size(); ++i) out << (i ? " " : "") << moves[i].uci();
    out << '\n';
}

int do_verify(const ProblemArgs& a, std::ostream& out) {
    const auto pos = chess::Position::from_fen(a.fen);
    const auto verdict = chess::prove_mate_in_n(pos, a.depth);
    out << "fen: " << pos.fen() << '\n';
    if (!verdict.is_mate()) {
        out << "verdict: no_forced_mate within " << a.depth << '\n';
        return 0;
    }
    out << "verdict: mate_in_" << verdict.k << '\n';
    out << "key moves (" << verdict.key_moves.size() << "): ";
    print_moves(out, verdict.key_moves);
    out << "principal variation: ";
    print_moves(out, verdict.principal_variation);
    return 0;
}

int do_score(const ProblemArgs& a, std::ostream& out) {
    const auto pos = chess::Position::from_fen(a.fen);
    const auto verdict = chess::prove_mate_in_n(pos, a.depth);
    if (!verdict.is_mate()) throw ContractError("no forced mate within " + std::to_string(a.depth) + "; nothing to score");
    const auto b = aesthetics::score(pos, verdict);
    out << "verdict: mate_in_" << verdict.k << '\n'
        << "scorer: " << aesthetics::scorer_version << '\n'
        << "economy: " << b.economy << '\n'
        << "sparsity: " << b.sparsity << '\n'
        << "theme_bonus: " << b.theme_bonus << " (pin=" << b.pin << " fork=" << b.fork << " sacrifice=" << b.sacrifice
        << ")\n"
        << "total: " << b.total << '\n';
    return 0;
}

int do_analyze(const AnalyzeArgs& a, std::ostream& out) {
    report::Report rep;
    if (!a.table.empty()) {
        const auto table = report::read_table(a.table);
        const auto q = a.quartiles.empty() ? report::QuartileOverrides{} : report::read_quartiles(a.quartiles);
        rep = report::analyze_table(table, a.scores ? report::TableMeasure::scores : report::TableMeasure::quantities, q);
    } else {
        std::vector<records::RecordFile> files;
        for (const auto& p : a.records) {
            if (std::filesystem::is_directory(p)) {
                for (auto& f : experiment::load_record_dir(p, a.permissive)) files.push_back(std::move(f));
            } else {
                files.push_back(records::read_record_file(p, a.permissive));
            }
        }
        rep = report::analyze_records(files);
    }
    out << report::render_text(rep);
    if (!a.json_out.empty()) {
        std::ofstream js(a.json_out, std::ios::trunc);
        if (!js) throw IoError("cannot write " + a.json_out);
        js << report::to_json(rep).dump(2) << '\n';
    }
    return 0;
}

int do_entropy_test(const EntropyArgs& a, std::ostream& out, std::ostream& err) {
    std::string endpoint = a.endpoint;
    if (endpoint.empty()) {
        const char* env = std::getenv(qrng_endpoint_env);
        endpoint = env && *env ? env : default_qrng_endpoint;
    }
    QuantumClientConfig cfg;
    cfg.endpoint_url = endpoint;
    cfg.block_size = a.block_size;
    cfg.low_watermark = 0;
    cfg.request_timeout = std::chrono::milliseconds(a.timeout_ms);
    cfg.check();
    if (a.n < 1) throw ContractError("--n must be at least 1");

    HttpByteFeed feed(endpoint, cfg.request_timeout);
    std::vector<std::uint8_t> bytes;
    std::vector<double> latencies;
    while (bytes.size() < a.n) {
        const std::size_t want = std::min(cfg.block_size, a.n - bytes.size());
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto got = feed.request(want);
            bytes.insert(bytes.end(), got.begin(), got.end());
        } catch (const FetchError& e) {
            err << "entropy-test: " << e.what() << '\n';
            return 2;
        }
        latencies.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    double sum = 0.0;
    std::uint64_t ones = 0;
    std::vector<double> bins(256, 0.0);
    for (auto b : bytes) {
        sum += b;
        ones += static_cast<std::uint64_t>(__builtin_popcount(b));
        bins[b] += 1.0;
    }
    const double expected = static_cast<double>(bytes.size()) / 256.0;
    double chi2 = 0.0;
    for (double c : bins) chi2 += (c - expected) * (c - expected) / expected;
    double lat_sum = 0.0, lat_min = latencies.front(), lat_max = latencies.front();
    for (double l : latencies) {
        lat_sum += l;
        lat_min = std::min(lat_min, l);
        lat_max = std::max(lat_max, l);
    }
    out << "endpoint: " << endpoint << '\n'
        << "bytes: " << bytes.size() << " in " << latencies.size() << " requests\n"
        << "mean byte: " << sum / static_cast<double>(bytes.size()) << " (ideal 127.5)\n"
        << "one-bit ratio: " << static_cast<double>(ones) / (8.0 * static_cast<double>(bytes.size())) << " (ideal 0.5)\n"
        << "chi-square over 256 byte values (255 df): " << chi2 << '\n'
        << "latency ms: min " << lat_min << ", mean " << lat_sum / static_cast<double>(latencies.size()) << ", max "
        << lat_max << '\n';
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Compose chess problems with mixed quantum/pseudo entropy and compare the output sets"};
    app.require_subcommand(1);

    ComposeArgs compose_args;
    auto* compose = app.add_subcommand("compose", "Run a composing campaign and write records plus a report");
    compose->add_option("--plan", compose_args.plan, "Experiment plan (JSON)")->check(CLI::ExistingFile);
    compose->add_option("--out", compose_args.out, "Output directory")->required();
    compose->add_option("--seed", compose_args.seed, "Base seed");
    compose->add_option("--mix", compose_args.mix, "Single set at this quantum ratio")->check(CLI::Range(0.0, 1.0));
    compose->add_option("--attempts", compose_args.attempts, "Attempt budget per instance");
    compose->add_option("--instances", compose_args.instances, "Instances per set")->check(CLI::PositiveNumber);
    compose->add_option("--workers", compose_args.workers, "Concurrent workers (0: hardware threads)");
    compose->add_option("--endpoint", compose_args.endpoint, "Quantum service endpoint URL");
    compose->add_option("--replay-file", compose_args.replay_file, "Recorded quantum bytes to replay")
        ->check(CLI::ExistingFile);
    compose->add_flag("--offline", compose_args.offline, "Never contact the network");

    ProblemArgs verify_args;
    auto* verify = app.add_subcommand("verify", "Prove the shortest forced mate in a position");
    verify->add_option("--fen", verify_args.fen, "Position")->required();
    verify->add_option("--depth", verify_args.depth, "Maximum mate length")->check(CLI::Range(1, chess::max_mate_depth));

    ProblemArgs score_args;
    auto* score = app.add_subcommand("score", "Aesthetic breakdown of a forced mate");
    score->add_option("--fen", score_args.fen, "Position")->required();
    score->add_option("--depth", score_args.depth, "Maximum mate length")->check(CLI::Range(1, chess::max_mate_depth));

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "Recompute the report from record files or a typed-in table");
    auto* rec_opt = analyze->add_option("--records", analyze_args.records, "Record files or directories")->expected(1, -1);
    auto* table_opt = analyze->add_option("--table", analyze_args.table, "Delimited table, one column per set");
    rec_opt->excludes(table_opt);
    analyze->add_option("--quartiles", analyze_args.quartiles, "Label,Q1,Q3 rows overriding computed quartiles")
        ->needs(table_opt);
    analyze->add_flag("--scores", analyze_args.scores, "Treat table columns as aesthetic scores")->needs(table_opt);
    analyze->add_flag("--permissive", analyze_args.permissive, "Skip malformed record lines");
    analyze->add_option("--json", analyze_args.json_out, "Also write the structured report here");

    EntropyArgs entropy_args;
    auto* entropy = app.add_subcommand("entropy-test", "Fetch quantum bytes and print diagnostics");
    entropy->add_option("--endpoint", entropy_args.endpoint, "Endpoint URL (default from environment or built-in)");
    entropy->add_option("--n", entropy_args.n, "Bytes to fetch");
    entropy->add_option("--block-size", entropy_args.block_size, "Bytes per request")->check(CLI::Range(1, 1024));
    entropy->add_option("--timeout-ms", entropy_args.timeout_ms, "Per-request timeout")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        err << app.help();
        return 1;
    }

    try {
        if (*compose) return do_compose(compose_args, out);
        if (*verify) return do_verify(verify_args, out);
        if (*score) return do_score(score_args, out);
        if (*analyze) {
            if (analyze_args.records.empty() && analyze_args.table.empty()) {
                err << "analyze: one of --records or --table is required\n";
                return 1;
            }
            return do_analyze(analyze_args, out);
        }
        if (*entropy) return do_entropy_test(entropy_args, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace qrc::cli
