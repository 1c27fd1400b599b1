#pragma once

// Minimal comma-separated reader: no quoting, whitespace trimmed, blank lines
// skipped. Good enough for the numeric tables this project reads.

#include "esa/errors.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace esa::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line; ///< source line of every row
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    out.push_back(trim(cell));
    return out;
}

inline Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    Table t;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw ParseError(path.string() + ":" + std::to_string(number) + ": expected " +
                             std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()));
        }
        t.rows.push_back(std::move(cells));
        t.line.push_back(number);
    }
    if (t.header.empty()) throw ParseError(path.string() + ": missing header row");
    return t;
}

inline int column(const Table& t, const std::string& name, const std::filesystem::path& path) {
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (t.header[i] == name) return static_cast<int>(i);
    }
    throw ParseError(path.string() + ": header has no column \"" + name + "\"");
}

inline double number(const Table& t, std::size_t row, int col, const std::filesystem::path& path) {
    const std::string& s = t.rows[row][static_cast<std::size_t>(col)];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ParseError(path.string() + ":" + std::to_string(t.line[row]) + ": field \"" +
                         t.header[static_cast<std::size_t>(col)] + "\" is not a number: '" + s + "'");
    }
    return v;
}

} // namespace esa::csv
