#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace cuescreen::io {

/// Reads a whole file. Throws Error(UnreadableFile).
std::string read_text_file(const std::filesystem::path& path);

/// Splits on LF, dropping a trailing CR from each line.
std::vector<std::string> split_lines(std::string_view text);

struct JsonLine {
  std::size_t line_number;  // 1-based
  nlohmann::json value;
};

/// Parses a JSONL file, skipping blank lines. Malformed JSON raises
/// Error(UnreadableFile) carrying the offending line.
std::vector<JsonLine> read_jsonl(const std::filesystem::path& path);

/// Writes through a sibling temp file followed by rename, so readers never
/// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

template <typename Range, typename ToJson>
std::string to_jsonl(const Range& items, ToJson&& to_json) {
  std::string out;
  for (const auto& item : items) {
    out += to_json(item).dump();
    out += '\n';
  }
  return out;
}

}  // namespace cuescreen::io
