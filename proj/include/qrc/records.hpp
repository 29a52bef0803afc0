#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "qrc/composer.hpp"

namespace qrc::records {

inline constexpr std::string_view format_tag = "qrc-records/1";

/// First line of every record file.
struct Header {
    std::string set_label;
    int set_index = 0;
    int instance_id = 0;
    std::uint64_t seed = 0;
    double mix_ratio = 0.0;
    std::string settings;       // ComposerSettings::canonical()
    std::string settings_hash;  // fnv1a64 of `settings`, hex
    std::string scorer_version;
    std::string entropy_mode;
    bool operator==(const Header&) const = default;
};

/// Last line; absent when the instance died before finishing.
struct Footer {
    bool complete = true;
    std::string error;
    composer::ComposeDiagnostics diagnostics;
    EntropyStats entropy;
    bool operator==(const Footer&) const = default;
};

struct RecordFile {
    std::filesystem::path path;
    Header header;
    std::vector<composer::CompositionRecord> records;
    std::optional<Footer> footer;
    std::vector<std::string> problems;  // skipped lines in permissive mode
    bool empty = false;                 // zero-length file: no header, no records

    bool complete() const noexcept { return footer && footer->complete; }
};

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

/// Line-delimited JSON; every line is flushed as soon as it is written.
class RecordWriter {
public:
    RecordWriter(const std::filesystem::path& path, const Header& header);
    void write(const composer::CompositionRecord& record);
    void finish(const Footer& footer);

private:
    std::ofstream out_;
};

/// Throws ContractError naming the line number of the first malformed line,
/// unless `permissive`, in which case bad lines are listed in `problems`.
RecordFile read_record_file(const std::filesystem::path& path, bool permissive = false);

std::string record_to_line(const composer::CompositionRecord& record);
composer::CompositionRecord record_from_line(const std::string& line);

}  // namespace qrc::records
