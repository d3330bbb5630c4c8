// Comma-separated dataset files: a header row, numeric feature columns in
// header order and one column named `label` holding {-1, +1} or {0, 1}
// (0 -> +1, 1 -> -1).

#pragma once

#include <qens/encoding.hpp>
#include <qens/errors.hpp>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace qens {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

}  // namespace detail

inline Dataset parse_dataset(std::istream& in, const std::string& source = "<input>") {
    std::string line;
    if (!std::getline(in, line)) throw IngestionError(source + ": empty file");
    const auto header = detail::split_csv_line(line);
    int label_col = -1;
    Dataset data;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "label") {
            if (label_col >= 0) throw IngestionError(source + ": duplicate 'label' column");
            label_col = static_cast<int>(c);
        } else {
            data.feature_names.push_back(header[c]);
        }
    }
    if (label_col < 0) throw IngestionError(source + ": no column named 'label'");
    if (data.feature_names.empty()) throw IngestionError(source + ": no feature columns");

    std::vector<double> raw_labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) {
            throw IngestionError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                 " cells, found " + std::to_string(cells.size()));
        }
        Vector row;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            if (!detail::parse_double(cells[c], v)) {
                throw IngestionError(source + ":" + std::to_string(line_no) + ": column '" + header[c] +
                                     "' is not numeric: '" + cells[c] + "'");
            }
            if (static_cast<int>(c) == label_col) raw_labels.push_back(v);
            else row.push_back(v);
        }
        data.features.push_back(std::move(row));
    }
    if (data.features.size() < 2) throw IngestionError(source + ": fewer than two data rows");

    bool has_zero = false;
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
        const double v = raw_labels[i];
        if (v != 0.0 && v != 1.0 && v != -1.0)
            throw IngestionError(source + ": data row " + std::to_string(i + 1) + ": label must be -1, 0, 1 or +1");
        has_zero = has_zero || v == 0.0;
    }
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
        const double v = raw_labels[i];
        if (has_zero && v == -1.0)
            throw IngestionError(source + ": labels mix the {0,1} and {-1,+1} conventions");
        data.labels.push_back(has_zero ? 1 - 2 * static_cast<int>(v) : static_cast<int>(v));
    }
    return data;
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError(path + ": cannot open file");
    return parse_dataset(in, path);
}

}  // namespace qens
