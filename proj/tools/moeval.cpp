#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "moeval/config.hpp"
#include "moeval/corpus.hpp"
#include "moeval/errors.hpp"
#include "moeval/harness.hpp"
#include "moeval/logio.hpp"
#include "moeval/report.hpp"
#include "moeval/synth.hpp"

namespace fs = std::filesystem;
using namespace moeval;

namespace {

int cmd_corpus_build(const std::string& input, const std::string& output_dir) {
    const auto raw = corpus::load_items_jsonl(input);
    const corpus::Corpus built = corpus::build_corpus(raw);

    fs::create_directories(output_dir);
    const fs::path out_corpus = fs::path(output_dir) / "corpus.labeled.jsonl";
    corpus::save_items_jsonl(out_corpus, built.items());

    long targets = 0, distractors = 0, bases = 0, discarded = 0;
    for (const auto& item : built.items()) {
        switch (item.role) {
            case corpus::Role::kTarget: ++targets; break;
            case corpus::Role::kDistractor: ++distractors; break;
            case corpus::Role::kBase: ++bases; break;
            case corpus::Role::kDiscarded: ++discarded; break;
        }
    }

    const auto easy = corpus::build_environment(built, corpus::EnvName::kEasy);
    const auto full = corpus::build_environment(built, corpus::EnvName::kFull);
    corpus::save_pool(fs::path(output_dir) / "pool_easy.json", easy);
    corpus::save_pool(fs::path(output_dir) / "pool_full.json", full);

    std::cout << "items: " << built.items().size() << " (targets " << targets << ", distractors "
              << distractors << ", bases " << bases << ", discarded " << discarded << ")\n"
              << "Easy pool: " << easy.size() << "\n"
              << "Full pool: " << full.size() << "\n"
              << "wrote " << out_corpus.string() << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& corpus_path,
            const std::string& output_dir, int workers, const std::string& adapter,
            bool dump_trials) {
    const RunConfig config = RunConfig::from_file(config_path);
    const corpus::Corpus built = corpus::build_corpus(corpus::load_items_jsonl(corpus_path));

    harness::RunOptions options;
    options.workers = workers;
    options.adapter = prompting::LengthAdapter::from_name(adapter);
    options.dump_trials = dump_trials;

    const auto result = harness::run_campaign(config, built, output_dir, options);
    std::cout << "records: " << result.total_records << " (new " << result.newly_run << ")\n"
              << "log: " << result.log_path.string() << "\n"
              << "manifest: " << result.manifest_path.string() << "\n";
    return result.completed ? 0 : 1;
}

int cmd_report(const std::string& log_path, const std::string& output_dir,
               const std::string& config_path) {
    metrics::MetricsConfig mconfig;
    if (!config_path.empty()) {
        const RunConfig config = RunConfig::from_file(config_path);
        mconfig = config.metrics;
        // A manifest next to the log must agree with the presented config.
        const fs::path manifest_path = fs::path(log_path).parent_path() / "manifest.json";
        if (fs::exists(manifest_path)) {
            const auto manifest = harness::CampaignManifest::load(manifest_path);
            if (manifest.config_hash != config.hash()) {
                throw ManifestMismatchError("log manifest was produced by a different config (" +
                                            manifest.config_hash + " vs " + config.hash() + ")");
            }
        }
    }

    const auto records = logio::load_records(log_path);
    const auto rep = report::build_report(records, mconfig);
    const auto files = report::write_report(rep, output_dir);
    std::cout << "cells: " << rep.cells.size() << ", summary rows: " << rep.summary.size() << "\n"
              << "wrote " << files.summary_csv.string() << "\n"
              << "wrote " << files.summary_md.string() << "\n"
              << "wrote " << files.cells_csv.string() << "\n"
              << "cdf dumps: " << files.cdf_files.size() << "\n";
    return 0;
}

int cmd_validate(const std::string& log_path) {
    const auto records = logio::load_records(log_path);
    const auto report = harness::validate_log(records);
    std::cout << "records: " << report.records << "\n";
    for (const auto& p : report.problems) std::cout << "PROBLEM: " << p << "\n";
    for (const auto& n : report.notes) std::cout << "note: " << n << "\n";
    std::cout << (report.ok ? "OK" : "FAILED") << "\n";
    return report.ok ? 0 : 1;
}

struct SimulateArgs {
    std::string policy = "oracle";
    double p_know = 0.2;
    int k_pre = 10;
    int cutoff = 50;
    std::uint64_t policy_seed = 7;
    std::uint64_t master_seed = 42;
    int targets = 30;
    int pool = 695;
    int trials = 1000;
    std::vector<int> option_sizes = {4, 10, 20, 50, 100};
    std::string environment = "Full";
    std::string output_dir = "simulate_out";
};

int cmd_simulate(const SimulateArgs& args) {
    synth::SynthSpec spec;
    spec.targets = args.targets;
    spec.distractors = args.pool;
    spec.bases = std::min(args.targets, 25);
    spec.seed = args.master_seed;
    const corpus::Corpus built = synth::make_corpus(spec);

    RunConfig config;
    config.master_seed = args.master_seed;
    config.trials_per_target = args.trials;
    config.option_sizes = args.option_sizes;
    config.environment = corpus::env_from_string(args.environment);
    for (const auto& item : built.items()) {
        if (item.role == corpus::Role::kTarget) config.target_ids.push_back(item.id);
        if (static_cast<int>(config.target_ids.size()) == args.targets) break;
    }
    config.responder.kind = responders::policy_kind_from_string(args.policy);
    config.responder.policy_seed = args.policy_seed;
    config.responder.p_know = args.p_know;
    config.responder.k_pre = args.k_pre;
    config.responder.cutoff = args.cutoff;
    config.padding_conditions.push_back(prompting::PaddingCondition::none());

    const auto tmpl = prompting::PromptTemplate::from_string(
        "builtin", "Exactly one of the following {N} sentences is misspelled.\n\n{options}\n\n"
                   "Answer with a single integer between 1 and {N}.");

    harness::RunOptions options;
    const auto result =
        harness::run_campaign_with_template(config, built, tmpl, args.output_dir, options);
    const auto records = logio::load_records(result.log_path);
    const auto rep = report::build_report(records, config.metrics);
    const auto files = report::write_report(rep, fs::path(args.output_dir) / "report");

    std::ifstream md(files.summary_md);
    std::cout << md.rdbuf();
    std::cout << "\nrecords: " << result.total_records << "\n"
              << "report: " << files.summary_md.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Massive-option multiple-choice evaluation harness"};
    app.require_subcommand(1);

    // corpus build
    auto* corpus_cmd = app.add_subcommand("corpus", "Corpus operations");
    corpus_cmd->require_subcommand(1);
    auto* build_cmd = corpus_cmd->add_subcommand(
        "build", "Ingest raw sentences, apply unanimity labels, score difficulty, export pools");
    std::string build_input, build_output = "corpus_out";
    build_cmd->add_option("--input", build_input, "Raw sentence JSONL")->required();
    build_cmd->add_option("--output-dir", build_output, "Output directory");

    // run
    auto* run_cmd = app.add_subcommand("run", "Execute an evaluation campaign");
    std::string run_config, run_corpus, run_output = "run_out", run_adapter = "whitespace";
    int run_workers = 1;
    run_cmd->add_option("--config", run_config, "Campaign config JSON")->required();
    run_cmd->add_option("--corpus", run_corpus, "Sentence corpus JSONL")->required();
    run_cmd->add_option("--output-dir", run_output, "Output directory");
    run_cmd->add_option("--workers", run_workers, "Worker thread cap");
    run_cmd->add_option("--adapter", run_adapter, "Length adapter (whitespace|bytes)");
    bool run_dump_trials = false;
    run_cmd->add_flag("--dump-trials", run_dump_trials, "Write a trials_audit.jsonl option-list dump");

    // report
    auto* report_cmd = app.add_subcommand("report", "Compute metrics and render tables from a log");
    std::string report_log, report_output = "report_out", report_config;
    report_cmd->add_option("--logs", report_log, "Trial log JSONL")->required();
    report_cmd->add_option("--output-dir", report_output, "Output directory");
    report_cmd->add_option("--config", report_config,
                           "Campaign config (for metric settings and manifest check)");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Synthetic-policy sweep on a generated corpus");
    SimulateArgs sim;
    sim_cmd->add_option("--policy", sim.policy,
                        "oracle|uniform_random|primacy_fallback|step_threshold");
    sim_cmd->add_option("--p-know", sim.p_know, "primacy_fallback knowledge probability");
    sim_cmd->add_option("--k-pre", sim.k_pre, "primacy_fallback prefix width");
    sim_cmd->add_option("--cutoff", sim.cutoff, "step_threshold cutoff position");
    sim_cmd->add_option("--policy-seed", sim.policy_seed, "Responder stream seed");
    sim_cmd->add_option("--seed", sim.master_seed, "Master seed");
    sim_cmd->add_option("--targets", sim.targets, "Number of synthetic targets");
    sim_cmd->add_option("--pool", sim.pool, "Synthetic distractor pool size");
    sim_cmd->add_option("--trials", sim.trials, "Trials per target (K)");
    sim_cmd->add_option("--option-sizes", sim.option_sizes, "N grid");
    sim_cmd->add_option("--env", sim.environment, "Easy|Full");
    sim_cmd->add_option("--output-dir", sim.output_dir, "Output directory");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "Invariant self-checks on a trial log");
    std::string validate_log;
    validate_cmd->add_option("--logs", validate_log, "Trial log JSONL")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (build_cmd->parsed()) return cmd_corpus_build(build_input, build_output);
        if (run_cmd->parsed()) {
            return cmd_run(run_config, run_corpus, run_output, run_workers, run_adapter,
                           run_dump_trials);
        }
        if (report_cmd->parsed()) return cmd_report(report_log, report_output, report_config);
        if (sim_cmd->parsed()) return cmd_simulate(sim);
        if (validate_cmd->parsed()) return cmd_validate(validate_log);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
