#pragma once

#include <string>
#include <vector>

namespace surveysim {

/// Minimal delimited-text support: UTF-8, configurable separator, RFC-style
/// double-quote escaping for fields containing the separator or quotes.
std::vector<std::string> split_delimited_line(const std::string& line, char sep);
std::string join_delimited(const std::vector<std::string>& fields, char sep);

struct DelimitedFile {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

DelimitedFile read_delimited(const std::string& path, char sep);
void write_delimited(const std::string& path, const DelimitedFile& file, char sep);

}  // namespace surveysim
