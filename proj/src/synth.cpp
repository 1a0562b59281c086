#include "moeval/synth.hpp"

#include <cstdio>

#include "moeval/rng.hpp"

namespace moeval::synth {

namespace {

corpus::FeatureVector draw_features(rng::SplitMix64& gen) {
    corpus::FeatureVector f;
    f.eojeol_count = 4 + static_cast<int>(rng::bounded(gen, 11));                 // 4..14
    f.morpheme_count = f.eojeol_count + 2 + static_cast<int>(rng::bounded(gen, 13));
    f.clause_ending_count = static_cast<int>(rng::bounded(gen, 5));               // 0..4
    f.confusion_flag = rng::bounded(gen, 5) == 0 ? 1 : 0;
    f.symbol_flag = rng::bounded(gen, 8) == 0 ? 1 : 0;
    return f;
}

std::string make_id(const char* prefix, int n) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%s%04d", prefix, n);
    return buf;
}

}  // namespace

std::vector<corpus::SentenceItem> make_items(const SynthSpec& spec) {
    rng::SplitMix64 gen(spec.seed);
    std::vector<corpus::SentenceItem> items;
    items.reserve(static_cast<std::size_t>(spec.targets + spec.distractors + spec.bases));

    for (int i = 0; i < spec.distractors; ++i) {
        corpus::SentenceItem item;
        item.id = make_id("d", i);
        item.text = "표본 문장 " + std::to_string(i) + "번은 검증을 통과했다.";
        item.features = draw_features(gen);
        item.verdicts = corpus::VerdictTriple{corpus::Verdict::kClean, corpus::Verdict::kClean,
                                              corpus::Verdict::kClean, false};
        items.push_back(std::move(item));
    }
    for (int i = 0; i < spec.bases; ++i) {
        corpus::SentenceItem item;
        item.id = make_id("b", i);
        item.text = "원본 문장 " + std::to_string(i) + "번은 기준 표기입니다.";
        item.features = draw_features(gen);
        items.push_back(std::move(item));  // no verdicts: stays role=base
    }
    for (int i = 0; i < spec.targets; ++i) {
        corpus::SentenceItem item;
        item.id = make_id("t", i);
        item.text = "오류 문장 " + std::to_string(i) + "번은 표기가 잘못됬다.";
        item.features = draw_features(gen);
        item.verdicts = corpus::VerdictTriple{corpus::Verdict::kError, corpus::Verdict::kError,
                                              corpus::Verdict::kError, false};
        if (i < spec.bases) item.base_id = make_id("b", i);
        items.push_back(std::move(item));
    }
    return items;
}

corpus::Corpus make_corpus(const SynthSpec& spec) { return corpus::build_corpus(make_items(spec)); }

}  // namespace moeval::synth
