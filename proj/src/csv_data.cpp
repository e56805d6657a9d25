#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "treesmooth/datagen.hpp"
#include "treesmooth/rng.hpp"

namespace treesmooth {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_cell(const std::string& cell, int line_no, const std::string& column) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin < end && (*begin == ' ' || *begin == '\t' || *begin == '\r')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw std::runtime_error("load_csv_dataset: non-numeric cell '" + cell + "' in column '" +
                                 column + "' at line " + std::to_string(line_no));
    return value;
}

}  // namespace

Dataset load_csv_dataset(const std::string& path, const std::string& target_column, Task task,
                         std::optional<int> subsample, uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv_dataset: cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_csv_dataset: empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line);
    int target_index = -1;
    for (size_t j = 0; j < header.size(); ++j)
        if (header[j] == target_column) target_index = static_cast<int>(j);
    if (target_index < 0)
        throw std::runtime_error("load_csv_dataset: target column '" + target_column +
                                 "' not found in " + path);

    const int total_cols = static_cast<int>(header.size());
    std::vector<std::vector<double>> feature_rows;
    std::vector<double> targets;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != total_cols)
            throw std::runtime_error("load_csv_dataset: row with " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(total_cols) + " at line " +
                                     std::to_string(line_no));
        std::vector<double> row;
        row.reserve(total_cols - 1);
        for (int j = 0; j < total_cols; ++j) {
            double v = parse_cell(fields[j], line_no, header[j]);
            if (j == target_index)
                targets.push_back(v);
            else
                row.push_back(v);
        }
        feature_rows.push_back(std::move(row));
    }

    const int available = static_cast<int>(feature_rows.size());
    if (available == 0) throw std::runtime_error("load_csv_dataset: no data rows in " + path);

    std::vector<int> keep(available);
    std::iota(keep.begin(), keep.end(), 0);
    if (subsample) {
        if (*subsample < 1)
            throw std::invalid_argument("load_csv_dataset: subsample must be >= 1");
        if (*subsample > available)
            throw std::runtime_error("load_csv_dataset: subsample " + std::to_string(*subsample) +
                                     " exceeds available rows " + std::to_string(available));
        auto rng = make_rng(mix_seed(seed, 4));
        std::shuffle(keep.begin(), keep.end(), rng);
        keep.resize(*subsample);
        std::sort(keep.begin(), keep.end());
    }

    Dataset data;
    data.task = task;
    const int n = static_cast<int>(keep.size());
    const int d = total_cols - 1;
    data.inputs = Matrix(n, d);
    data.outcomes.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) data.inputs(i, j) = feature_rows[keep[i]][j];
        data.outcomes[i] = targets[keep[i]];
    }
    data.validate();
    return data;
}

}  // namespace treesmooth
