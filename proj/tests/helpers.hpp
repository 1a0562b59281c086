#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "moeval/corpus.hpp"
#include "moeval/prompting.hpp"

namespace testutil {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("moeval_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

// Repo-root fixture lookup; tests run with WORKING_DIRECTORY at the source
// root, MOEVAL_FIXTURES overrides.
inline std::filesystem::path fixture(const std::string& rel) {
    if (const char* root = std::getenv("MOEVAL_FIXTURES")) {
        return std::filesystem::path(root) / rel;
    }
    return std::filesystem::path("fixtures") / rel;
}

inline moeval::corpus::SentenceItem make_item(std::string id, std::string text,
                                              moeval::corpus::Verdict v, int eojeol = 6,
                                              int morph = 12, int clause = 1, int conf = 0,
                                              int sym = 0) {
    moeval::corpus::SentenceItem item;
    item.id = std::move(id);
    item.text = std::move(text);
    item.features = {eojeol, morph, clause, conf, sym};
    item.verdicts = moeval::corpus::VerdictTriple{v, v, v, false};
    return item;
}

inline moeval::prompting::PromptTemplate inline_template() {
    return moeval::prompting::PromptTemplate::from_string(
        "test", "Pick the single misspelled sentence out of {N}.\n\n{options}\n\n"
                "Answer with one integer between 1 and {N}.");
}

}  // namespace testutil
