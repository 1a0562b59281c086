#include "moeval/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include "moeval/errors.hpp"
#include "moeval/logio.hpp"
#include "moeval/rng.hpp"
#include "moeval/trialgen.hpp"

namespace moeval::harness {

using nlohmann::json;
using nlohmann::ordered_json;

std::string hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FixtureError("cannot hash missing file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::uint64_t h = rng::fnv1a64(buf.str());
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

std::string CampaignManifest::to_json_text() const {
    ordered_json j;
    j["config_hash"] = config_hash;
    j["corpus_hash"] = corpus_hash;
    j["template_hash"] = template_hash;
    j["padding_hashes"] = padding_hashes;
    j["tool_version"] = tool_version;
    j["status"] = status;
    j["cell_counts"] = cell_counts;
    return j.dump(2);
}

CampaignManifest CampaignManifest::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    CampaignManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.corpus_hash = j.at("corpus_hash").get<std::string>();
    m.template_hash = j.at("template_hash").get<std::string>();
    if (j.contains("padding_hashes")) {
        for (const auto& [k, v] : j["padding_hashes"].items()) {
            m.padding_hashes[k] = v.get<std::string>();
        }
    }
    m.tool_version = j.at("tool_version").get<std::string>();
    m.status = j.at("status").get<std::string>();
    if (j.contains("cell_counts")) {
        for (const auto& [k, v] : j["cell_counts"].items()) m.cell_counts[k] = v.get<long>();
    }
    return m;
}

void CampaignManifest::save(const std::filesystem::path& path) const {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write manifest: " + tmp.string());
        out << to_json_text() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

CampaignManifest CampaignManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open manifest: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

namespace {

struct AbortRequested {};

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[24];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string record_key(const std::string& padding, int n, const std::string& target, int k) {
    return padding + "|" + std::to_string(n) + "|" + target + "|" + std::to_string(k);
}

std::string hash_corpus(const corpus::Corpus& c) {
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx",
                  static_cast<unsigned long long>(c.content_hash()));
    return out;
}

CampaignManifest build_manifest(const RunConfig& config, const corpus::Corpus& corpus,
                                const prompting::PromptTemplate& tmpl) {
    CampaignManifest m;
    m.config_hash = config.hash();
    m.corpus_hash = hash_corpus(corpus);
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx",
                  static_cast<unsigned long long>(rng::fnv1a64(tmpl.text)));
    m.template_hash = out;
    for (const auto& p : config.padding_conditions) {
        if (!p.is_none()) m.padding_hashes[p.payload_ref] = hash_file(p.payload_ref);
    }
    m.status = "running";
    return m;
}

void check_manifest_compatible(const CampaignManifest& existing, const CampaignManifest& fresh) {
    if (existing.config_hash != fresh.config_hash) {
        throw ManifestMismatchError("config hash changed since the campaign started (" +
                                    existing.config_hash + " vs " + fresh.config_hash + ")");
    }
    if (existing.corpus_hash != fresh.corpus_hash) {
        throw ManifestMismatchError("corpus hash changed since the campaign started");
    }
    if (existing.template_hash != fresh.template_hash) {
        throw ManifestMismatchError("prompt template changed since the campaign started");
    }
    for (const auto& [ref, h] : fresh.padding_hashes) {
        const auto it = existing.padding_hashes.find(ref);
        if (it != existing.padding_hashes.end() && it->second != h) {
            throw ManifestMismatchError("padding fixture changed since the campaign started: " +
                                        ref);
        }
    }
}

}  // namespace

CampaignResult run_campaign(const RunConfig& config, const corpus::Corpus& corpus,
                            const std::filesystem::path& output_dir, const RunOptions& options) {
    config.validate();
    if (config.template_path.empty()) {
        throw ConfigError("campaign config does not name a prompt template");
    }
    const auto tmpl = prompting::PromptTemplate::load_file(config.template_path);
    return run_campaign_with_template(config, corpus, tmpl, output_dir, options);
}

CampaignResult run_campaign_with_template(const RunConfig& config, const corpus::Corpus& corpus,
                                          const prompting::PromptTemplate& tmpl,
                                          const std::filesystem::path& output_dir,
                                          const RunOptions& options) {
    config.validate();
    std::filesystem::create_directories(output_dir);
    const std::filesystem::path log_path = output_dir / "trials.jsonl";
    const std::filesystem::path manifest_path = output_dir / "manifest.json";

    const corpus::EnvironmentPool pool = corpus::build_environment(corpus, config.environment);
    const std::string env_name = corpus::to_string(config.environment);

    prompting::PaddingLibrary padding_library;
    padding_library.preload(config.padding_conditions);

    // Per-target samplers; capacity is validated for the whole N grid before
    // any trial runs.
    std::vector<trialgen::TrialSampler> samplers;
    samplers.reserve(config.target_ids.size());
    const int max_n = *std::max_element(config.option_sizes.begin(), config.option_sizes.end());
    for (const auto& id : config.target_ids) {
        samplers.emplace_back(corpus.item(id), pool);
        if (samplers.back().pool_size() + 1 < static_cast<std::size_t>(max_n)) {
            std::ostringstream msg;
            msg << "pool for target '" << id << "' cannot supply N=" << max_n << ": required "
                << max_n - 1 << " distractors, available " << samplers.back().pool_size();
            throw CapacityError(msg.str());
        }
    }

    CampaignManifest manifest = build_manifest(config, corpus, tmpl);
    if (std::filesystem::exists(manifest_path)) {
        check_manifest_compatible(CampaignManifest::load(manifest_path), manifest);
    } else {
        manifest.save(manifest_path);
    }

    // Resume: keys already in the append log are not rerun.
    std::set<std::string> done;
    if (std::filesystem::exists(log_path)) {
        for (const auto& r : logio::load_records(log_path, logio::LoadMode::kTolerant)) {
            done.insert(record_key(r.padding_key, r.option_count, r.target_id, r.trial_index));
        }
    }

    auto responder = responders::make_responder(config.responder);

    struct WorkUnit {
        std::size_t padding_idx;
        int option_count;
        std::size_t target_idx;
    };
    std::vector<WorkUnit> units;
    for (std::size_t p = 0; p < config.padding_conditions.size(); ++p) {
        for (int n : config.option_sizes) {
            for (std::size_t t = 0; t < config.target_ids.size(); ++t) {
                units.push_back({p, n, t});
            }
        }
    }

    logio::LogWriter writer(log_path);
    std::atomic<std::size_t> next_unit{0};
    std::atomic<long> appended{0};
    std::atomic<bool> abort_flag{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    const auto worker = [&] {
        try {
            for (;;) {
                const std::size_t u = next_unit.fetch_add(1);
                if (u >= units.size() || abort_flag.load()) return;
                const WorkUnit& unit = units[u];
                const auto& padding = config.padding_conditions[unit.padding_idx];
                const std::string padding_key = padding.key();
                const auto& sampler = samplers[unit.target_idx];

                for (int k = 0; k < config.trials_per_target; ++k) {
                    if (abort_flag.load()) return;
                    const std::string key = record_key(padding_key, unit.option_count,
                                                       config.target_ids[unit.target_idx], k);
                    if (done.count(key)) continue;

                    const std::uint64_t seed = trialgen::derive_trial_seed(
                        config.master_seed, k, unit.option_count, config.environment);
                    const trialgen::TrialSpec spec = sampler.sample(unit.option_count, k, seed);
                    const prompting::PromptArtifact prompt = prompting::render_prompt(
                        spec, corpus, padding, tmpl, padding_library, options.adapter);
                    const responders::ResponseOutcome outcome = responder->respond(spec, prompt);

                    TrialRecord rec;
                    rec.responder_id = responder->id();
                    rec.environment = env_name;
                    rec.padding_key = padding_key;
                    rec.option_count = unit.option_count;
                    rec.target_id = spec.target_id;
                    rec.trial_index = k;
                    rec.trial_seed = seed;
                    rec.gold_position = spec.gold_position;
                    rec.valid = outcome.valid;
                    if (outcome.valid) rec.response_position = outcome.position;
                    rec.correct =
                        outcome.valid && outcome.position == spec.gold_position ? 1 : 0;
                    rec.raw_output = outcome.raw_output;
                    rec.invalid_reason = outcome.invalid_reason;
                    rec.length_units = prompt.length_units;
                    rec.timestamp = utc_timestamp();

                    writer.append(rec);
                    const long count = appended.fetch_add(1) + 1;
                    if (options.stop_after_records > 0 && count >= options.stop_after_records) {
                        abort_flag.store(true);
                        throw AbortRequested{};
                    }
                }
                writer.flush();
            }
        } catch (const AbortRequested&) {
            // deliberate early stop; leave the append log as-is
        } catch (...) {
            {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
            abort_flag.store(true);
        }
    };

    const int worker_count = std::max(1, options.workers);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(worker_count));
    for (int i = 0; i < worker_count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    writer.flush();

    if (first_error) std::rethrow_exception(first_error);

    CampaignResult result;
    result.newly_run = appended.load();
    result.log_path = log_path;
    result.manifest_path = manifest_path;

    if (abort_flag.load()) {
        result.completed = false;
        result.total_records = static_cast<long>(done.size()) + result.newly_run;
        return result;
    }

    // Finalize: canonical sort, uniqueness check, temp+rename rewrite.
    std::vector<TrialRecord> all = logio::load_records(log_path, logio::LoadMode::kTolerant);
    std::set<std::string> keys;
    for (const auto& r : all) {
        if (!keys.insert(record_key(r.padding_key, r.option_count, r.target_id, r.trial_index))
                 .second) {
            throw IntegrityError("duplicate record key in log for target " + r.target_id);
        }
    }
    logio::write_canonical(log_path, all);

    manifest.status = "complete";
    for (const auto& r : all) {
        manifest.cell_counts[r.padding_key + "|" + std::to_string(r.option_count)] += 1;
    }
    manifest.save(manifest_path);

    if (options.dump_trials) {
        std::map<std::string, std::size_t> sampler_by_target;
        for (std::size_t i = 0; i < config.target_ids.size(); ++i) {
            sampler_by_target[config.target_ids[i]] = i;
        }
        const std::filesystem::path audit_path = output_dir / "trials_audit.jsonl";
        const std::filesystem::path tmp = audit_path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            std::set<std::string> dumped;  // one line per trial, paddings share it
            for (const auto& r : logio::load_records(log_path)) {
                const std::string trial_key = std::to_string(r.option_count) + "|" + r.target_id +
                                              "|" + std::to_string(r.trial_index);
                if (!dumped.insert(trial_key).second) continue;
                const auto& sampler = samplers[sampler_by_target.at(r.target_id)];
                const auto spec =
                    sampler.sample(r.option_count, r.trial_index, r.trial_seed);
                if (spec.gold_position != r.gold_position) {
                    throw IntegrityError("audit regeneration disagrees with the log at target " +
                                         r.target_id);
                }
                nlohmann::ordered_json j;
                j["target"] = spec.target_id;
                j["env"] = env_name;
                j["N"] = spec.option_count;
                j["k"] = spec.trial_index;
                j["trial_seed"] = spec.trial_seed;
                j["option_ids"] = spec.option_ids;
                j["g"] = spec.gold_position;
                out << j.dump() << '\n';
            }
        }
        std::filesystem::rename(tmp, audit_path);
    }

    result.completed = true;
    result.total_records = static_cast<long>(all.size());
    return result;
}

ValidationReport validate_log(const std::vector<TrialRecord>& records) {
    ValidationReport report;
    report.records = static_cast<long>(records.size());
    if (records.empty()) {
        report.ok = false;
        report.problems.push_back("log is empty");
        return report;
    }

    std::set<std::string> keys;
    // (env, N, k) must map to one trial seed; (env, N, k, target) to one gold
    // position, independent of padding.
    std::map<std::string, std::uint64_t> seed_by_coord;
    std::map<std::string, int> gold_by_trial;
    std::map<std::string, std::map<std::string, long>> counts_by_cell;
    // Synchronized seeding repeats each trial's permutation across targets,
    // so uniformity is judged on one gold observation per trial index.
    std::map<std::string, std::map<int, int>> gold_by_cell_trial;
    std::map<std::string, int> n_by_cell;

    for (const auto& r : records) {
        const std::string key = r.responder_id + "|" + r.environment + "|" + r.padding_key + "|" +
                                std::to_string(r.option_count) + "|" + r.target_id + "|" +
                                std::to_string(r.trial_index);
        if (!keys.insert(key).second) report.problems.push_back("duplicate key: " + key);
        if (r.option_count < 2) report.problems.push_back("N < 2 at " + key);
        if (r.trial_index < 0) report.problems.push_back("negative trial index at " + key);
        if (r.gold_position < 1 || r.gold_position > r.option_count) {
            report.problems.push_back("gold position out of range at " + key);
        }
        if (r.valid) {
            if (!r.response_position || *r.response_position < 1 ||
                *r.response_position > r.option_count) {
                report.problems.push_back("valid record without in-range response at " + key);
            }
        }
        const int expect_correct =
            r.valid && r.response_position && *r.response_position == r.gold_position ? 1 : 0;
        if (r.correct != expect_correct) {
            report.problems.push_back("correctness flag inconsistent at " + key);
        }

        const std::string coord = r.environment + "|" + std::to_string(r.option_count) + "|" +
                                  std::to_string(r.trial_index);
        const auto [sit, snew] = seed_by_coord.emplace(coord, r.trial_seed);
        if (!snew && sit->second != r.trial_seed) {
            report.problems.push_back("trial seed differs across targets at " + coord);
        }
        const std::string trial = coord + "|" + r.target_id;
        const auto [git, gnew] = gold_by_trial.emplace(trial, r.gold_position);
        if (!gnew && git->second != r.gold_position) {
            report.problems.push_back("gold position differs across paddings at " + trial);
        }

        const std::string cell = r.responder_id + "|" + r.environment + "|" + r.padding_key + "|" +
                                 std::to_string(r.option_count);
        counts_by_cell[cell][r.target_id] += 1;
        if (r.gold_position >= 1 && r.gold_position <= r.option_count) {
            gold_by_cell_trial[cell].emplace(r.trial_index, r.gold_position);
            n_by_cell[cell] = r.option_count;
        }
    }

    for (const auto& [cell, by_target] : counts_by_cell) {
        long lo = -1, hi = -1;
        for (const auto& [target, n] : by_target) {
            lo = lo < 0 ? n : std::min(lo, n);
            hi = hi < 0 ? n : std::max(hi, n);
        }
        if (lo != hi) {
            report.notes.push_back("cell " + cell + " has uneven per-target counts (" +
                                   std::to_string(lo) + ".." + std::to_string(hi) + ")");
        }
    }
    for (const auto& [cell, by_trial] : gold_by_cell_trial) {
        const int n = n_by_cell.at(cell);
        std::vector<long> hist(static_cast<std::size_t>(n), 0);
        for (const auto& [k, g] : by_trial) hist[static_cast<std::size_t>(g - 1)] += 1;
        const long total = static_cast<long>(by_trial.size());
        if (total < 5 * static_cast<long>(hist.size())) continue;  // too small to judge
        const double expected = static_cast<double>(total) / static_cast<double>(hist.size());
        double stat = 0.0;
        for (long c : hist) {
            const double d = static_cast<double>(c) - expected;
            stat += d * d / expected;
        }
        const boost::math::chi_squared_distribution<double> chi2(
            static_cast<double>(hist.size() - 1));
        const double p = boost::math::cdf(boost::math::complement(chi2, stat));
        if (p < 0.001) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6g", p);
            report.notes.push_back("cell " + cell + " gold positions nonuniform (chi-square p=" +
                                   buf + ")");
        }
    }

    report.ok = report.problems.empty();
    return report;
}

}  // namespace moeval::harness
