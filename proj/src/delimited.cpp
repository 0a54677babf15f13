#include "surveysim/delimited.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace surveysim {

std::vector<std::string> split_delimited_line(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"' && current.empty()) {
            quoted = true;
        } else if (c == sep) {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

static std::string escape_field(const std::string& field, char sep) {
    bool needs_quotes = field.find(sep) != std::string::npos ||
                        field.find('"') != std::string::npos ||
                        field.find('\n') != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string join_delimited(const std::vector<std::string>& fields, char sep) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += sep;
        out += escape_field(fields[i], sep);
    }
    return out;
}

DelimitedFile read_delimited(const std::string& path, char sep) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    DelimitedFile file;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == EOF) break;
        auto fields = split_delimited_line(line, sep);
        if (first) {
            file.header = std::move(fields);
            first = false;
        } else {
            file.rows.push_back(std::move(fields));
        }
    }
    return file;
}

void write_delimited(const std::string& path, const DelimitedFile& file, char sep) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << join_delimited(file.header, sep) << '\n';
    for (const auto& row : file.rows) out << join_delimited(row, sep) << '\n';
}

}  // namespace surveysim
