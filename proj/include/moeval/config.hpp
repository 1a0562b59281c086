#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "moeval/corpus.hpp"
#include "moeval/metrics.hpp"
#include "moeval/prompting.hpp"
#include "moeval/responders.hpp"

namespace moeval {

// Declarative description of one evaluation campaign. Everything that
// influences trial content lives here; reruns with an identical config must
// reproduce identical canonical logs.
struct RunConfig {
    std::uint64_t master_seed = 0;
    std::vector<std::string> target_ids;
    std::vector<int> option_sizes;         // N grid
    int trials_per_target = 1;             // K
    corpus::EnvName environment = corpus::EnvName::kFull;
    std::string template_path;             // prompt template fixture
    std::vector<prompting::PaddingCondition> padding_conditions;  // default: baseline only
    responders::ResponderSpec responder;
    metrics::MetricsConfig metrics;

    void validate() const;

    static RunConfig from_json_text(const std::string& text);
    static RunConfig from_file(const std::filesystem::path& path);
    std::string to_json_text() const;

    // Stable content hash used by the campaign manifest.
    std::string hash() const;
};

}  // namespace moeval
