#include "moeval/prompting.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "moeval/errors.hpp"

namespace moeval::prompting {

const char* to_string(PaddingContent c) {
    switch (c) {
        case PaddingContent::kNone: return "none";
        case PaddingContent::kKoreanProse: return "korean_prose";
        case PaddingContent::kEnglishProse: return "english_prose";
        case PaddingContent::kSymbolicNoise: return "symbolic_noise";
        case PaddingContent::kEnumeratedList: return "enumerated_list";
    }
    return "?";
}

const char* to_string(PaddingPlacement p) {
    switch (p) {
        case PaddingPlacement::kFront: return "front";
        case PaddingPlacement::kBack: return "back";
        case PaddingPlacement::kNotApplicable: return "not_applicable";
    }
    return "?";
}

PaddingContent padding_content_from_string(const std::string& s) {
    if (s == "none") return PaddingContent::kNone;
    if (s == "korean_prose") return PaddingContent::kKoreanProse;
    if (s == "english_prose") return PaddingContent::kEnglishProse;
    if (s == "symbolic_noise") return PaddingContent::kSymbolicNoise;
    if (s == "enumerated_list") return PaddingContent::kEnumeratedList;
    throw ConfigError("unknown padding content: " + s);
}

PaddingPlacement padding_placement_from_string(const std::string& s) {
    if (s == "front") return PaddingPlacement::kFront;
    if (s == "back") return PaddingPlacement::kBack;
    if (s == "not_applicable") return PaddingPlacement::kNotApplicable;
    throw ConfigError("unknown padding placement: " + s);
}

std::string PaddingCondition::key() const {
    if (is_none()) return "none";
    return std::string(to_string(content)) + "/" + to_string(placement);
}

void PaddingCondition::validate() const {
    const bool none = content == PaddingContent::kNone;
    const bool na = placement == PaddingPlacement::kNotApplicable;
    if (none != na) {
        throw ConfigError("padding condition '" + key() +
                          "': content=none and placement=not_applicable must coincide");
    }
    if (!none && payload_ref.empty()) {
        throw ConfigError("padding condition '" + key() + "' is missing a payload_ref");
    }
}

std::vector<PaddingCondition> standard_padding_grid(const std::filesystem::path& fixture_dir) {
    std::vector<PaddingCondition> out;
    for (PaddingContent content :
         {PaddingContent::kKoreanProse, PaddingContent::kEnglishProse,
          PaddingContent::kSymbolicNoise, PaddingContent::kEnumeratedList}) {
        for (PaddingPlacement placement : {PaddingPlacement::kFront, PaddingPlacement::kBack}) {
            PaddingCondition c;
            c.content = content;
            c.placement = placement;
            c.payload_ref = (fixture_dir / (std::string(to_string(content)) + ".txt")).string();
            out.push_back(std::move(c));
        }
    }
    return out;
}

PromptTemplate PromptTemplate::load_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FixtureError("cannot open template file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(path.stem().string(), buf.str());
}

PromptTemplate PromptTemplate::from_string(std::string id, std::string text) {
    if (text.find("{options}") == std::string::npos) {
        throw FixtureError("template '" + id + "' has no {options} placeholder");
    }
    return PromptTemplate{std::move(id), std::move(text)};
}

void PaddingLibrary::preload(const std::vector<PaddingCondition>& conditions) {
    for (const auto& c : conditions) {
        if (c.is_none() || payloads_.count(c.payload_ref)) continue;
        std::ifstream in(c.payload_ref, std::ios::binary);
        if (!in) throw FixtureError("cannot open padding fixture: " + c.payload_ref);
        std::stringstream buf;
        buf << in.rdbuf();
        payloads_[c.payload_ref] = buf.str();
    }
}

const std::string& PaddingLibrary::payload(const PaddingCondition& condition) const {
    auto it = payloads_.find(condition.payload_ref);
    if (it == payloads_.end()) {
        throw FixtureError("padding fixture not preloaded: " + condition.payload_ref);
    }
    return it->second;
}

long LengthAdapter::measure(std::string_view text) const {
    if (kind == Kind::kBytes) return static_cast<long>(text.size());
    long tokens = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        const bool ws = std::isspace(c) != 0;
        if (!ws && !in_token) ++tokens;
        in_token = !ws;
    }
    return tokens;
}

const char* LengthAdapter::name() const {
    return kind == Kind::kWhitespace ? "whitespace" : "bytes";
}

LengthAdapter LengthAdapter::from_name(const std::string& name) {
    if (name == "whitespace") return {Kind::kWhitespace};
    if (name == "bytes") return {Kind::kBytes};
    throw ConfigError("unknown length adapter: " + name);
}

namespace {

void replace_all(std::string& text, std::string_view needle, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
}

}  // namespace

PromptArtifact render_prompt(const trialgen::TrialSpec& spec, const corpus::Corpus& corpus,
                             const PaddingCondition& padding, const PromptTemplate& tmpl,
                             const PaddingLibrary& library, const LengthAdapter& adapter) {
    std::string options_block;
    for (std::size_t i = 0; i < spec.option_ids.size(); ++i) {
        options_block += std::to_string(i + 1);
        options_block += ". ";
        options_block += corpus.text(spec.option_ids[i]);  // throws CorpusError on unknown id
        if (i + 1 < spec.option_ids.size()) options_block += '\n';
    }

    std::string body = tmpl.text;
    replace_all(body, "{N}", std::to_string(spec.option_count));
    replace_all(body, "{options}", options_block);

    PromptArtifact artifact;
    artifact.template_id = tmpl.id;
    artifact.padding = padding;
    if (padding.is_none()) {
        artifact.text = std::move(body);
    } else {
        const std::string& payload = library.payload(padding);
        if (padding.placement == PaddingPlacement::kFront) {
            artifact.text = payload + "\n\n" + body;
        } else {
            artifact.text = body + "\n\n" + payload;
        }
    }
    artifact.length_units = adapter.measure(artifact.text);
    return artifact;
}

}  // namespace moeval::prompting
