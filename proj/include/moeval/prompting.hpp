#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "moeval/corpus.hpp"
#include "moeval/trialgen.hpp"

namespace moeval::prompting {

enum class PaddingContent { kNone, kKoreanProse, kEnglishProse, kSymbolicNoise, kEnumeratedList };
enum class PaddingPlacement { kFront, kBack, kNotApplicable };

const char* to_string(PaddingContent c);
const char* to_string(PaddingPlacement p);
PaddingContent padding_content_from_string(const std::string& s);
PaddingPlacement padding_placement_from_string(const std::string& s);

struct PaddingCondition {
    PaddingContent content = PaddingContent::kNone;
    PaddingPlacement placement = PaddingPlacement::kNotApplicable;
    std::string payload_ref;  // fixture file; empty for the no-padding baseline

    static PaddingCondition none() { return {}; }
    bool is_none() const { return content == PaddingContent::kNone; }
    // Stable key used in logs and report rows: "none" or "<content>/<placement>".
    std::string key() const;
    void validate() const;
};

// The full padding grid: four contents x two placements, payload files looked
// up as <fixture_dir>/<content>.txt. Baseline not included.
std::vector<PaddingCondition> standard_padding_grid(const std::filesystem::path& fixture_dir);

// Prompt template with {options} (required) and {N} placeholders. Templates
// are data; the default ships under fixtures/templates/.
struct PromptTemplate {
    std::string id;
    std::string text;

    static PromptTemplate load_file(const std::filesystem::path& path);
    static PromptTemplate from_string(std::string id, std::string text);
};

// Payload cache. Preload everything up front; lookups afterwards are
// read-only and safe to share across rendering threads.
class PaddingLibrary {
public:
    void preload(const std::vector<PaddingCondition>& conditions);
    const std::string& payload(const PaddingCondition& condition) const;

private:
    std::map<std::string, std::string> payloads_;  // payload_ref -> bytes
};

struct LengthAdapter {
    enum class Kind { kWhitespace, kBytes };
    Kind kind = Kind::kWhitespace;

    long measure(std::string_view text) const;
    const char* name() const;
    static LengthAdapter from_name(const std::string& name);
};

struct PromptArtifact {
    std::string text;
    long length_units = 0;
    std::string template_id;
    PaddingCondition padding;
};

// Serialized prompt: [front padding] + template body with the numbered
// option block ("i. <sentence>") substituted + [back padding]. Padding bytes
// are inserted verbatim, separated from the body by a blank line.
PromptArtifact render_prompt(const trialgen::TrialSpec& spec, const corpus::Corpus& corpus,
                             const PaddingCondition& padding, const PromptTemplate& tmpl,
                             const PaddingLibrary& library, const LengthAdapter& adapter);

}  // namespace moeval::prompting
