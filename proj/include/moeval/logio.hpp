#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "moeval/record.hpp"

namespace moeval::logio {

// One JSON object per record. Timestamps appear only in the live append log;
// canonicalization strips them so identical campaigns produce identical bytes.
std::string record_to_line(const TrialRecord& record, bool include_timestamp);
TrialRecord record_from_line(const std::string& line);

// kStrict drops only a torn final line (interrupted append); malformed lines
// elsewhere raise. kTolerant drops every unparseable line, which the resume
// path uses: dropped trials simply rerun, and finalization flushes the
// garbage out of the file.
enum class LoadMode { kStrict, kTolerant };

std::vector<TrialRecord> load_records(const std::filesystem::path& path,
                                      LoadMode mode = LoadMode::kStrict);

// Sorts into canonical key order, strips timestamps, writes via temp+rename.
void write_canonical(const std::filesystem::path& path, std::vector<TrialRecord> records);

// Serialized append-only writer shared by campaign workers.
class LogWriter {
public:
    explicit LogWriter(const std::filesystem::path& path);

    void append(const TrialRecord& record);
    void append(const std::vector<TrialRecord>& records);
    void flush();
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::mutex mutex_;
};

}  // namespace moeval::logio
