#include "moeval/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "moeval/rng.hpp"

namespace moeval::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(Role r) {
    switch (r) {
        case Role::kBase: return "base";
        case Role::kTarget: return "target";
        case Role::kDistractor: return "distractor";
        case Role::kDiscarded: return "discarded";
    }
    return "?";
}

const char* to_string(Verdict v) {
    return v == Verdict::kClean ? "clean" : "error";
}

const char* to_string(EnvName e) {
    return e == EnvName::kEasy ? "Easy" : "Full";
}

const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::kSpacingParticles: return "particles";
        case ErrorCategory::kSpacingDependentNouns: return "dependent_nouns";
        case ErrorCategory::kSpacingPredicatesEndings: return "predicates_endings";
        case ErrorCategory::kSpacingLexicalizedCompounds: return "lexicalized_compounds";
        case ErrorCategory::kOrthoSaiSiotCompounds: return "sai_siot_compounds";
        case ErrorCategory::kOrthoPhonologicalConfusions: return "phonological_confusions";
        case ErrorCategory::kOrthoStandardWordForm: return "standard_word_form";
    }
    return "?";
}

Role role_from_string(const std::string& s) {
    if (s == "base") return Role::kBase;
    if (s == "target") return Role::kTarget;
    if (s == "distractor") return Role::kDistractor;
    if (s == "discarded") return Role::kDiscarded;
    throw CorpusError("unknown role: " + s);
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "clean") return Verdict::kClean;
    if (s == "error") return Verdict::kError;
    throw CorpusError("unknown verdict: " + s);
}

EnvName env_from_string(const std::string& s) {
    if (s == "Easy") return EnvName::kEasy;
    if (s == "Full") return EnvName::kFull;
    throw CorpusError("unknown environment: " + s);
}

ErrorCategory category_from_string(const std::string& s) {
    static const std::map<std::string, ErrorCategory> table = {
        {"particles", ErrorCategory::kSpacingParticles},
        {"dependent_nouns", ErrorCategory::kSpacingDependentNouns},
        {"predicates_endings", ErrorCategory::kSpacingPredicatesEndings},
        {"lexicalized_compounds", ErrorCategory::kSpacingLexicalizedCompounds},
        {"sai_siot_compounds", ErrorCategory::kOrthoSaiSiotCompounds},
        {"phonological_confusions", ErrorCategory::kOrthoPhonologicalConfusions},
        {"standard_word_form", ErrorCategory::kOrthoStandardWordForm},
    };
    auto it = table.find(s);
    if (it == table.end()) throw CorpusError("unknown error category: " + s);
    return it->second;
}

Role label_by_unanimity(const VerdictTriple& verdicts) {
    if (verdicts.convention_sensitive) return Role::kDiscarded;
    if (verdicts.all_clean()) return Role::kDistractor;
    if (verdicts.all_error()) return Role::kTarget;
    return Role::kDiscarded;
}

SentenceItem label_by_unanimity(SentenceItem item) {
    if (!item.verdicts) {
        throw LabelingInputError("item '" + item.id + "' has no verdicts to label from");
    }
    item.role = label_by_unanimity(*item.verdicts);
    return item;
}

FeatureBounds FeatureBounds::from_items(const std::vector<SentenceItem>& items) {
    if (items.empty()) throw PoolError("cannot compute feature bounds over an empty pool");
    FeatureBounds b;
    bool first = true;
    for (const auto& it : items) {
        const auto& f = it.features;
        if (first) {
            b.eojeol_min = b.eojeol_max = f.eojeol_count;
            b.morpheme_min = b.morpheme_max = f.morpheme_count;
            b.clause_min = b.clause_max = f.clause_ending_count;
            first = false;
            continue;
        }
        b.eojeol_min = std::min(b.eojeol_min, f.eojeol_count);
        b.eojeol_max = std::max(b.eojeol_max, f.eojeol_count);
        b.morpheme_min = std::min(b.morpheme_min, f.morpheme_count);
        b.morpheme_max = std::max(b.morpheme_max, f.morpheme_count);
        b.clause_min = std::min(b.clause_min, f.clause_ending_count);
        b.clause_max = std::max(b.clause_max, f.clause_ending_count);
    }
    return b;
}

namespace {

double normalize_count(int value, int lo, int hi, const char* name) {
    if (value < lo || value > hi) {
        std::ostringstream msg;
        msg << "feature " << name << "=" << value << " outside pool bounds [" << lo << ", "
            << hi << "]";
        throw NormalizationError(msg.str());
    }
    if (lo == hi) return 0.0;  // constant feature carries no signal
    return static_cast<double>(value - lo) / static_cast<double>(hi - lo);
}

}  // namespace

double score_difficulty(const FeatureVector& features, const FeatureBounds& bounds) {
    const double f_eojeol =
        normalize_count(features.eojeol_count, bounds.eojeol_min, bounds.eojeol_max, "eojeol");
    const double f_morph = normalize_count(features.morpheme_count, bounds.morpheme_min,
                                           bounds.morpheme_max, "morph");
    const double f_clause = normalize_count(features.clause_ending_count, bounds.clause_min,
                                            bounds.clause_max, "clause");
    if ((features.confusion_flag & ~1) || (features.symbol_flag & ~1)) {
        throw NormalizationError("flag features must be 0 or 1");
    }
    return 0.25 * f_eojeol + 0.25 * f_morph + 0.25 * f_clause +
           0.15 * features.confusion_flag + 0.10 * features.symbol_flag;
}

std::map<std::string, int> assign_levels(
    const std::vector<std::pair<std::string, double>>& scores) {
    if (scores.empty()) throw PoolError("cannot assign difficulty levels to an empty pool");
    const std::size_t n = scores.size();

    std::vector<double> sorted;
    sorted.reserve(n);
    for (const auto& [id, s] : scores) sorted.push_back(s);
    std::sort(sorted.begin(), sorted.end());

    // Level from the rank of the first element of the item's tie group, so a
    // tie straddling a quartile boundary resolves to the lower level.
    std::map<std::string, int> out;
    for (const auto& [id, s] : scores) {
        const std::size_t below =
            static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), s) -
                                     sorted.begin());
        out[id] = 1 + static_cast<int>(4 * below / n);
    }
    return out;
}

void EnvironmentPool::require_capacity(std::size_t needed, const std::string& context) const {
    if (member_ids.size() < needed) {
        std::ostringstream msg;
        msg << to_string(name) << " pool too small for " << context << ": required " << needed
            << ", available " << member_ids.size();
        throw CapacityError(msg.str());
    }
}

Corpus::Corpus(std::vector<SentenceItem> items) : items_(std::move(items)) {
    for (std::size_t i = 0; i < items_.size(); ++i) {
        auto [it, inserted] = index_.emplace(items_[i].id, i);
        if (!inserted) throw CorpusError("duplicate sentence id: " + items_[i].id);
    }
}

const SentenceItem& Corpus::item(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw CorpusError("unknown sentence id: " + id);
    return items_[it->second];
}

std::uint64_t Corpus::content_hash() const {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const auto& it : items_) {
        h = rng::mix64(h ^ rng::fnv1a64(it.id));
        h = rng::mix64(h ^ rng::fnv1a64(it.text));
        h = rng::mix64(h ^ static_cast<std::uint64_t>(it.role));
        if (it.difficulty_level) h = rng::mix64(h ^ static_cast<std::uint64_t>(*it.difficulty_level));
    }
    return h;
}

Corpus build_corpus(std::vector<SentenceItem> raw_items) {
    for (auto& item : raw_items) {
        item.role = item.verdicts ? label_by_unanimity(*item.verdicts) : Role::kBase;
        item.difficulty_score.reset();
        item.difficulty_level.reset();
    }

    // Difficulty statistics run over the retained candidate pool: everything
    // that survived labeling, regardless of role.
    std::vector<SentenceItem> retained;
    for (const auto& item : raw_items) {
        if (item.role != Role::kDiscarded) retained.push_back(item);
    }
    if (!retained.empty()) {
        const FeatureBounds bounds = FeatureBounds::from_items(retained);
        std::vector<std::pair<std::string, double>> scores;
        scores.reserve(retained.size());
        for (const auto& item : retained) {
            scores.emplace_back(item.id, score_difficulty(item.features, bounds));
        }
        const auto levels = assign_levels(scores);
        std::map<std::string, double> score_by_id(scores.begin(), scores.end());
        for (auto& item : raw_items) {
            if (item.role == Role::kDiscarded) continue;
            item.difficulty_score = score_by_id.at(item.id);
            item.difficulty_level = levels.at(item.id);
        }
    }
    return Corpus(std::move(raw_items));
}

EnvironmentPool build_environment(const Corpus& corpus, EnvName name) {
    EnvironmentPool pool;
    pool.name = name;
    pool.allowed_levels = name == EnvName::kEasy ? std::set<int>{1, 2} : std::set<int>{1, 2, 3, 4};
    for (const auto& item : corpus.items()) {
        if (item.role != Role::kDistractor) continue;
        if (!item.difficulty_level) {
            throw PoolError("distractor '" + item.id + "' has no difficulty level");
        }
        if (pool.allowed_levels.count(*item.difficulty_level)) {
            pool.member_ids.push_back(item.id);
        }
    }
    std::sort(pool.member_ids.begin(), pool.member_ids.end());
    return pool;
}

namespace {

ordered_json item_to_json(const SentenceItem& item) {
    ordered_json j;
    j["id"] = item.id;
    j["text"] = item.text;
    if (item.error_category) j["error_category"] = to_string(*item.error_category);
    j["features"] = {{"eojeol", item.features.eojeol_count},
                     {"morph", item.features.morpheme_count},
                     {"clause", item.features.clause_ending_count},
                     {"conf", item.features.confusion_flag},
                     {"sym", item.features.symbol_flag}};
    if (item.verdicts) {
        j["verdicts"] = {{"a", to_string(item.verdicts->checker_a)},
                         {"b", to_string(item.verdicts->checker_b)},
                         {"c", to_string(item.verdicts->checker_c)},
                         {"convention_sensitive", item.verdicts->convention_sensitive}};
    }
    if (item.base_id) j["base_id"] = *item.base_id;
    j["role"] = to_string(item.role);
    if (item.difficulty_score) j["difficulty_score"] = *item.difficulty_score;
    if (item.difficulty_level) j["difficulty_level"] = *item.difficulty_level;
    return j;
}

SentenceItem item_from_json(const json& j) {
    SentenceItem item;
    item.id = j.at("id").get<std::string>();
    item.text = j.at("text").get<std::string>();
    if (j.contains("error_category")) {
        item.error_category = category_from_string(j["error_category"].get<std::string>());
    }
    const auto& f = j.at("features");
    item.features.eojeol_count = f.at("eojeol").get<int>();
    item.features.morpheme_count = f.at("morph").get<int>();
    item.features.clause_ending_count = f.at("clause").get<int>();
    item.features.confusion_flag = f.at("conf").get<int>();
    item.features.symbol_flag = f.at("sym").get<int>();
    if (item.features.eojeol_count < 0 || item.features.morpheme_count < 0 ||
        item.features.clause_ending_count < 0) {
        throw CorpusError("negative feature count on item '" + item.id + "'");
    }
    if ((item.features.confusion_flag & ~1) || (item.features.symbol_flag & ~1)) {
        throw CorpusError("flag feature not in {0,1} on item '" + item.id + "'");
    }
    if (j.contains("verdicts")) {
        const auto& v = j["verdicts"];
        VerdictTriple t;
        t.checker_a = verdict_from_string(v.at("a").get<std::string>());
        t.checker_b = verdict_from_string(v.at("b").get<std::string>());
        t.checker_c = verdict_from_string(v.at("c").get<std::string>());
        t.convention_sensitive = v.at("convention_sensitive").get<bool>();
        item.verdicts = t;
    }
    if (j.contains("base_id")) item.base_id = j["base_id"].get<std::string>();
    if (j.contains("role")) item.role = role_from_string(j["role"].get<std::string>());
    if (j.contains("difficulty_score")) item.difficulty_score = j["difficulty_score"].get<double>();
    if (j.contains("difficulty_level")) item.difficulty_level = j["difficulty_level"].get<int>();
    return item;
}

}  // namespace

std::vector<SentenceItem> load_items_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file: " + path.string());
    std::vector<SentenceItem> items;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            items.push_back(item_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw CorpusError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return items;
}

void save_items_jsonl(const std::filesystem::path& path, const std::vector<SentenceItem>& items) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CorpusError("cannot write corpus file: " + path.string());
    for (const auto& item : items) out << item_to_json(item).dump() << '\n';
}

std::string pool_to_json(const EnvironmentPool& pool) {
    ordered_json j;
    j["name"] = to_string(pool.name);
    j["allowed_levels"] = pool.allowed_levels;
    j["member_ids"] = pool.member_ids;
    return j.dump(2);
}

EnvironmentPool pool_from_json(const std::string& text) {
    const json j = json::parse(text);
    EnvironmentPool pool;
    pool.name = env_from_string(j.at("name").get<std::string>());
    for (int lvl : j.at("allowed_levels")) pool.allowed_levels.insert(lvl);
    for (const auto& id : j.at("member_ids")) pool.member_ids.push_back(id.get<std::string>());
    return pool;
}

void save_pool(const std::filesystem::path& path, const EnvironmentPool& pool) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CorpusError("cannot write pool file: " + path.string());
    out << pool_to_json(pool) << '\n';
}

EnvironmentPool load_pool(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open pool file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return pool_from_json(buf.str());
}

}  // namespace moeval::corpus
