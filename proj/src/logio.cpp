#include "moeval/logio.hpp"

#include <algorithm>

#include <json.hpp>

#include "moeval/errors.hpp"

namespace moeval::logio {

using nlohmann::json;
using nlohmann::ordered_json;

std::string record_to_line(const TrialRecord& r, bool include_timestamp) {
    ordered_json j;
    j["responder"] = r.responder_id;
    j["env"] = r.environment;
    j["padding"] = r.padding_key;
    j["N"] = r.option_count;
    j["target"] = r.target_id;
    j["k"] = r.trial_index;
    j["trial_seed"] = r.trial_seed;
    j["g"] = r.gold_position;
    if (r.response_position) {
        j["r"] = *r.response_position;
    } else {
        j["r"] = nullptr;
    }
    j["valid"] = r.valid;
    j["c"] = r.correct;
    if (r.invalid_reason) j["reason"] = *r.invalid_reason;
    if (r.raw_output) j["raw"] = *r.raw_output;
    j["length_units"] = r.length_units;
    if (include_timestamp && !r.timestamp.empty()) j["ts"] = r.timestamp;
    return j.dump();
}

TrialRecord record_from_line(const std::string& line) {
    const json j = json::parse(line);
    TrialRecord r;
    r.responder_id = j.at("responder").get<std::string>();
    r.environment = j.at("env").get<std::string>();
    r.padding_key = j.at("padding").get<std::string>();
    r.option_count = j.at("N").get<int>();
    r.target_id = j.at("target").get<std::string>();
    r.trial_index = j.at("k").get<int>();
    r.trial_seed = j.at("trial_seed").get<std::uint64_t>();
    r.gold_position = j.at("g").get<int>();
    if (!j.at("r").is_null()) r.response_position = j["r"].get<int>();
    r.valid = j.at("valid").get<bool>();
    r.correct = j.at("c").get<int>();
    if (j.contains("reason")) r.invalid_reason = j["reason"].get<std::string>();
    if (j.contains("raw")) r.raw_output = j["raw"].get<std::string>();
    r.length_units = j.at("length_units").get<long>();
    if (j.contains("ts")) r.timestamp = j["ts"].get<std::string>();
    return r;
}

std::vector<TrialRecord> load_records(const std::filesystem::path& path, LoadMode mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open trial log: " + path.string());

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }

    std::vector<TrialRecord> records;
    records.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            records.push_back(record_from_line(lines[i]));
        } catch (const json::exception& e) {
            if (mode == LoadMode::kTolerant) continue;
            if (i + 1 == lines.size()) break;  // torn tail from an interrupted append
            throw Error(path.string() + ":" + std::to_string(i + 1) +
                        ": malformed record: " + e.what());
        }
    }
    return records;
}

void write_canonical(const std::filesystem::path& path, std::vector<TrialRecord> records) {
    std::stable_sort(records.begin(), records.end(), canonical_less);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write trial log: " + tmp.string());
        for (const auto& r : records) out << record_to_line(r, /*include_timestamp=*/false) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

LogWriter::LogWriter(const std::filesystem::path& path) : path_(path) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());

    // Heal a torn tail: appending onto a line without a terminator would
    // otherwise merge the next record into the fragment.
    std::error_code ec;
    if (std::filesystem::exists(path, ec) && std::filesystem::file_size(path, ec) > 0) {
        std::ifstream peek(path, std::ios::binary);
        peek.seekg(-1, std::ios::end);
        char last = '\n';
        peek.get(last);
        if (last != '\n') {
            std::ofstream fix(path, std::ios::binary | std::ios::app);
            fix << '\n';
        }
    }

    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw Error("cannot open trial log for append: " + path.string());
}

void LogWriter::append(const TrialRecord& record) {
    std::lock_guard lock(mutex_);
    out_ << record_to_line(record, /*include_timestamp=*/true) << '\n';
}

void LogWriter::append(const std::vector<TrialRecord>& records) {
    std::lock_guard lock(mutex_);
    for (const auto& r : records) out_ << record_to_line(r, /*include_timestamp=*/true) << '\n';
    out_.flush();
}

void LogWriter::flush() {
    std::lock_guard lock(mutex_);
    out_.flush();
}

}  // namespace moeval::logio
