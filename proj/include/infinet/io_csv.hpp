#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "infinet/dataset.hpp"

namespace infinet {

/// Loads a rectangular numeric CSV. `label_column` selects the label column
/// (negative counts from the end, -1 being the last). Label values are
/// re-indexed to {0..K-1} in sorted order of their distinct raw values; the
/// mapping is recorded in the provenance string.
inline Dataset load_csv(const std::string& path, long label_column = -1, bool has_header = false) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::vector<double> raw_labels;
    std::string line;
    long expected_cols = -1;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && has_header) continue;
        if (line.empty()) continue;
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t consumed = 0;
                const double v = std::stod(cell, &consumed);
                while (consumed < cell.size() &&
                       (cell[consumed] == ' ' || cell[consumed] == '\r' || cell[consumed] == '\t'))
                    ++consumed;
                if (consumed != cell.size()) throw std::invalid_argument(cell);
                cells.push_back(v);
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                                cell + "'");
            }
        }
        if (expected_cols < 0) {
            expected_cols = static_cast<long>(cells.size());
            if (expected_cols < 2)
                throw DataError(path + ": need at least one feature column and a label column");
        } else if (static_cast<long>(cells.size()) != expected_cols) {
            throw DataError(path + ":" + std::to_string(line_no) + ": ragged row (" +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(expected_cols) + ")");
        }
        long lc = label_column < 0 ? expected_cols + label_column : label_column;
        if (lc < 0 || lc >= expected_cols)
            throw DataError(path + ": label column out of range");
        raw_labels.push_back(cells[static_cast<std::size_t>(lc)]);
        cells.erase(cells.begin() + lc);
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");

    std::map<double, int> label_map;
    for (double v : raw_labels) label_map.emplace(v, 0);
    int next = 0;
    for (auto& [value, index] : label_map) index = next++;

    Dataset out;
    out.instances.resize(static_cast<long>(rows.size()), expected_cols - 1);
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (long k = 0; k + 1 < expected_cols; ++k)
            out.instances(static_cast<long>(i), k) = rows[i][static_cast<std::size_t>(k)];
        out.labels.push_back(label_map.at(raw_labels[i]));
    }
    out.num_classes = next;

    std::ostringstream mapping;
    mapping << path << "#fnv=" << dataset_content_hash(out) << "#labels=";
    for (const auto& [value, index] : label_map) mapping << value << "->" << index << ",";
    out.provenance = mapping.str();
    out.validate();
    return out;
}

/// Writes instances and integer labels back out, one row per instance,
/// label last. Uses max-precision doubles so a round-trip is bit-exact.
inline void save_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    for (long i = 0; i < data.size(); ++i) {
        for (long k = 0; k < data.dim(); ++k) out << data.instances(i, k) << ',';
        out << data.labels[static_cast<std::size_t>(i)] << '\n';
    }
    if (!out) throw DataError("write failed for " + path);
}

}  // namespace infinet
