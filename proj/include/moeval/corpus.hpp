#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <unordered_map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "moeval/errors.hpp"

namespace moeval::corpus {

enum class Role { kBase, kTarget, kDistractor, kDiscarded };
enum class Verdict { kClean, kError };
enum class EnvName { kEasy, kFull };

// Error taxonomy used to tag target sentences (informational only; no logic
// branches on it).
enum class ErrorCategory {
    kSpacingParticles,
    kSpacingDependentNouns,
    kSpacingPredicatesEndings,
    kSpacingLexicalizedCompounds,
    kOrthoSaiSiotCompounds,
    kOrthoPhonologicalConfusions,
    kOrthoStandardWordForm,
};

const char* to_string(Role r);
const char* to_string(Verdict v);
const char* to_string(EnvName e);
const char* to_string(ErrorCategory c);
Role role_from_string(const std::string& s);
Verdict verdict_from_string(const std::string& s);
EnvName env_from_string(const std::string& s);
ErrorCategory category_from_string(const std::string& s);

// Pre-annotated surface features; extraction happens upstream of this tool.
struct FeatureVector {
    int eojeol_count = 0;
    int morpheme_count = 0;
    int clause_ending_count = 0;
    int confusion_flag = 0;  // {0,1}
    int symbol_flag = 0;     // {0,1}
};

struct VerdictTriple {
    Verdict checker_a = Verdict::kClean;
    Verdict checker_b = Verdict::kClean;
    Verdict checker_c = Verdict::kClean;
    bool convention_sensitive = false;

    bool all_clean() const {
        return checker_a == Verdict::kClean && checker_b == Verdict::kClean &&
               checker_c == Verdict::kClean;
    }
    bool all_error() const {
        return checker_a == Verdict::kError && checker_b == Verdict::kError &&
               checker_c == Verdict::kError;
    }
};

struct SentenceItem {
    std::string id;
    std::string text;
    Role role = Role::kBase;
    std::optional<ErrorCategory> error_category;
    FeatureVector features;
    std::optional<VerdictTriple> verdicts;
    // Unperturbed source sentence of a target, when the link is known. Used
    // only to exclude that sentence from the target's own distractor draws.
    std::optional<std::string> base_id;
    std::optional<double> difficulty_score;
    std::optional<int> difficulty_level;
};

// Unanimity rule: distractor iff all three checkers accept, target iff all
// three flag, discarded on any disagreement or when the item falls under a
// convention-sensitive exclusion.
Role label_by_unanimity(const VerdictTriple& verdicts);
SentenceItem label_by_unanimity(SentenceItem item);

// Per-feature min/max over the candidate pool, used to normalize the three
// count features. Flags are not normalized.
struct FeatureBounds {
    int eojeol_min = 0, eojeol_max = 0;
    int morpheme_min = 0, morpheme_max = 0;
    int clause_min = 0, clause_max = 0;

    static FeatureBounds from_items(const std::vector<SentenceItem>& items);
};

// Weighted sum of min-max normalized features, weights
// (0.25, 0.25, 0.25, 0.15, 0.10) for (eojeol, morph, clause, conf, sym).
// A feature whose pool min equals its max contributes 0.
double score_difficulty(const FeatureVector& features, const FeatureBounds& bounds);

// Quartile levels 1..4 over the empirical score distribution. All items tied
// on a score receive the level of the lowest rank in the tie group, so ties
// at a quartile boundary collapse to the lower level.
std::map<std::string, int> assign_levels(const std::vector<std::pair<std::string, double>>& scores);

struct EnvironmentPool {
    EnvName name = EnvName::kFull;
    std::set<int> allowed_levels;
    std::vector<std::string> member_ids;  // distractors only, sorted by id

    std::size_t size() const { return member_ids.size(); }
    // Raises CapacityError when the pool cannot supply `needed` distractors.
    void require_capacity(std::size_t needed, const std::string& context) const;
};

// In-memory labeled corpus with id lookup.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<SentenceItem> items);

    const std::vector<SentenceItem>& items() const { return items_; }
    bool has(const std::string& id) const { return index_.count(id) != 0; }
    const SentenceItem& item(const std::string& id) const;
    const std::string& text(const std::string& id) const { return item(id).text; }
    std::uint64_t content_hash() const;

private:
    std::vector<SentenceItem> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Full annotation pipeline: unanimity labeling (items without verdicts keep
// role=base), difficulty scoring over the non-discarded pool, quartile levels.
Corpus build_corpus(std::vector<SentenceItem> raw_items);

// Environment pool over an annotated corpus: Easy admits levels {1,2}, Full
// admits {1,2,3,4}.
EnvironmentPool build_environment(const Corpus& corpus, EnvName name);

// JSON Lines ingestion/export. One object per sentence:
//   {id, text, error_category?, features{eojeol,morph,clause,conf,sym},
//    verdicts?{a,b,c,convention_sensitive}, base_id?,
//    role?, difficulty_score?, difficulty_level?}
std::vector<SentenceItem> load_items_jsonl(const std::filesystem::path& path);
void save_items_jsonl(const std::filesystem::path& path, const std::vector<SentenceItem>& items);

std::string pool_to_json(const EnvironmentPool& pool);
EnvironmentPool pool_from_json(const std::string& text);
void save_pool(const std::filesystem::path& path, const EnvironmentPool& pool);
EnvironmentPool load_pool(const std::filesystem::path& path);

}  // namespace moeval::corpus
