#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "moeval/config.hpp"
#include "moeval/corpus.hpp"
#include "moeval/record.hpp"

namespace moeval::harness {

inline constexpr const char* kToolVersion = "0.1.0";

// Binds a trial log to the exact inputs that produced it. Reports refuse
// logs whose manifest disagrees with the config they are asked to explain.
struct CampaignManifest {
    std::string config_hash;
    std::string corpus_hash;
    std::string template_hash;
    std::map<std::string, std::string> padding_hashes;  // payload_ref -> hash
    std::string tool_version = kToolVersion;
    std::string status;                      // "running" | "complete"
    std::map<std::string, long> cell_counts; // "<padding>|N" -> records

    std::string to_json_text() const;
    static CampaignManifest from_json_text(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static CampaignManifest load(const std::filesystem::path& path);
};

struct RunOptions {
    int workers = 1;
    prompting::LengthAdapter adapter;
    // Audit dump: regenerate every trial's option list at finalization and
    // write <output_dir>/trials_audit.jsonl alongside the record log.
    bool dump_trials = false;
    // Test hook: abort the campaign (without finalizing) once this many new
    // records have been appended. 0 disables.
    long stop_after_records = 0;
};

struct CampaignResult {
    long total_records = 0;
    long newly_run = 0;
    bool completed = false;
    std::filesystem::path log_path;
    std::filesystem::path manifest_path;
};

// Executes (or resumes) a campaign: one record per requested
// (padding, N, target, k) cell, appended to <output_dir>/trials.jsonl and
// canonicalized on completion. Already-logged keys are skipped, so an
// interrupted campaign picks up where it stopped.
CampaignResult run_campaign(const RunConfig& config, const corpus::Corpus& corpus,
                            const std::filesystem::path& output_dir, const RunOptions& options);

// Same, with the template supplied directly instead of loaded from
// config.template_path.
CampaignResult run_campaign_with_template(const RunConfig& config, const corpus::Corpus& corpus,
                                          const prompting::PromptTemplate& tmpl,
                                          const std::filesystem::path& output_dir,
                                          const RunOptions& options);

// Log invariant self-checks. Hard violations land in `problems`; statistical
// observations (count imbalance, gold nonuniformity) land in `notes`.
struct ValidationReport {
    bool ok = true;
    long records = 0;
    std::vector<std::string> problems;
    std::vector<std::string> notes;
};
ValidationReport validate_log(const std::vector<TrialRecord>& records);

std::string hash_file(const std::filesystem::path& path);

}  // namespace moeval::harness
