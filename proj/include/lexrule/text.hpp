#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lexrule::text {

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// Collapses runs of whitespace to one space and trims.
std::string collapse_whitespace(std::string_view s);

/// Unicode NFC normalisation followed by whitespace collapsing. The key
/// used to join sentences across CSV files.
std::string normalize_sentence(std::string_view s);

/// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

bool is_word_byte(unsigned char c);

/// Reads a "one entry per line, # comments" data file. Blank lines and
/// comment lines are skipped; entries are trimmed.
std::vector<std::string> read_phrase_file(const std::string& path);

/// Writes `content` to `path` through a temporary file and rename, so a
/// reader never observes a partially written file.
void write_file_atomic(const std::string& path, std::string_view content);

std::string read_file(const std::string& path);

}  // namespace lexrule::text
