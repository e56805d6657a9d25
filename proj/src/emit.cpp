#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "treesmooth/experiments.hpp"

namespace treesmooth {

std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

namespace {

const char* kColumns[] = {"experiment", "replication", "B",     "m",   "max_leaves", "bootstrap",
                          "sigma",      "delta",       "eta",   "rounds", "metric",  "value"};

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }
std::string opt_real(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::vector<std::string> record_fields(const ExperimentRecord& r) {
    return {r.experiment,
            std::to_string(r.replication),
            opt_int(r.point.tree_count),
            opt_real(r.point.feature_fraction),
            opt_int(r.point.max_leaves),
            opt_int(r.point.bootstrap),
            opt_real(r.point.sigma),
            opt_real(r.point.delta),
            opt_real(r.point.eta),
            opt_int(r.point.rounds),
            r.metric,
            format_double(r.value)};
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << fields[i];
    }
    out << '\n';
}

nlohmann::json point_json(const HyperPoint& p) {
    nlohmann::json obj = nlohmann::json::object();
    if (p.tree_count) obj["B"] = *p.tree_count;
    if (p.feature_fraction) obj["m"] = *p.feature_fraction;
    if (p.max_leaves) obj["max_leaves"] = *p.max_leaves;
    if (p.bootstrap) obj["bootstrap"] = *p.bootstrap;
    if (p.sigma) obj["sigma"] = *p.sigma;
    if (p.delta) obj["delta"] = *p.delta;
    if (p.eta) obj["eta"] = *p.eta;
    if (p.rounds) obj["rounds"] = *p.rounds;
    return obj;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit: cannot write to " + path);
    return out;
}

void check_format(const std::string& format) {
    if (format != "csv" && format != "json")
        throw std::invalid_argument("emit: format must be 'csv' or 'json'");
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double_field(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error("parse_records: bad numeric field '" + s + "'");
    return v;
}

}  // namespace

void emit_records(const std::vector<ExperimentRecord>& records, const std::string& format,
                  const std::string& path) {
    check_format(format);
    auto out = open_out(path);
    if (format == "csv") {
        write_csv_row(out, {std::begin(kColumns), std::end(kColumns)});
        for (const auto& r : records) write_csv_row(out, record_fields(r));
    } else {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : records) {
            nlohmann::json obj = point_json(r.point);
            obj["experiment"] = r.experiment;
            obj["replication"] = r.replication;
            obj["metric"] = r.metric;
            obj["value"] = r.value;
            rows.push_back(std::move(obj));
        }
        out << rows.dump(2) << '\n';
    }
    if (!out) throw std::runtime_error("emit: write failure on " + path);
}

void emit_summary(const std::vector<SummaryRow>& rows, const std::string& format,
                  const std::string& path) {
    check_format(format);
    auto out = open_out(path);
    if (format == "csv") {
        write_csv_row(out, {"experiment", "B", "m", "max_leaves", "bootstrap", "sigma", "delta",
                            "eta", "rounds", "metric", "mean", "half_width", "replications"});
        for (const auto& s : rows)
            write_csv_row(out, {s.experiment, opt_int(s.point.tree_count),
                                opt_real(s.point.feature_fraction), opt_int(s.point.max_leaves),
                                opt_int(s.point.bootstrap), opt_real(s.point.sigma),
                                opt_real(s.point.delta), opt_real(s.point.eta),
                                opt_int(s.point.rounds), s.metric, format_double(s.mean),
                                format_double(s.half_width), std::to_string(s.replications)});
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& s : rows) {
            nlohmann::json obj = point_json(s.point);
            obj["experiment"] = s.experiment;
            obj["metric"] = s.metric;
            obj["mean"] = s.mean;
            obj["half_width"] = s.half_width;
            obj["replications"] = s.replications;
            arr.push_back(std::move(obj));
        }
        out << arr.dump(2) << '\n';
    }
    if (!out) throw std::runtime_error("emit: write failure on " + path);
}

std::vector<ExperimentRecord> parse_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("parse_records: cannot open " + path);
    std::string first;
    std::getline(in, first);
    in.seekg(0);

    std::vector<ExperimentRecord> records;
    auto assign = [](ExperimentRecord& r, const std::string& key, const std::string& value) {
        if (value.empty()) return;
        if (key == "experiment")
            r.experiment = value;
        else if (key == "replication")
            r.replication = static_cast<int>(parse_double_field(value));
        else if (key == "B")
            r.point.tree_count = static_cast<int>(parse_double_field(value));
        else if (key == "m")
            r.point.feature_fraction = parse_double_field(value);
        else if (key == "max_leaves")
            r.point.max_leaves = static_cast<int>(parse_double_field(value));
        else if (key == "bootstrap")
            r.point.bootstrap = static_cast<int>(parse_double_field(value));
        else if (key == "sigma")
            r.point.sigma = parse_double_field(value);
        else if (key == "delta")
            r.point.delta = parse_double_field(value);
        else if (key == "eta")
            r.point.eta = parse_double_field(value);
        else if (key == "rounds")
            r.point.rounds = static_cast<int>(parse_double_field(value));
        else if (key == "metric")
            r.metric = value;
        else if (key == "value")
            r.value = parse_double_field(value);
        else
            throw std::runtime_error("parse_records: unknown column " + key);
    };

    if (!first.empty() && first[0] == '[') {
        nlohmann::json rows;
        in >> rows;
        for (const auto& obj : rows) {
            ExperimentRecord r;
            for (auto it = obj.begin(); it != obj.end(); ++it) {
                const auto& v = it.value();
                assign(r, it.key(), v.is_string() ? v.get<std::string>() : format_double(v.get<double>()));
            }
            records.push_back(std::move(r));
        }
        return records;
    }

    std::string line;
    std::getline(in, line);
    auto header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != header.size())
            throw std::runtime_error("parse_records: malformed row in " + path);
        ExperimentRecord r;
        for (size_t j = 0; j < header.size(); ++j) assign(r, header[j], fields[j]);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
    std::vector<SummaryRow> rows;
    std::map<std::string, size_t> index;
    std::vector<std::vector<double>> samples;
    for (const auto& r : records) {
        auto fields = record_fields(r);
        std::string key;
        for (size_t j = 0; j < fields.size(); ++j)
            if (kColumns[j] != std::string("replication") && kColumns[j] != std::string("value"))
                key += fields[j] + "\x1f";
        auto it = index.find(key);
        if (it == index.end()) {
            index.emplace(key, rows.size());
            SummaryRow row;
            row.experiment = r.experiment;
            row.point = r.point;
            row.metric = r.metric;
            rows.push_back(std::move(row));
            samples.emplace_back();
            it = index.find(key);
        }
        samples[it->second].push_back(r.value);
    }
    for (size_t g = 0; g < rows.size(); ++g) {
        const auto& values = samples[g];
        const int count = static_cast<int>(values.size());
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= count;
        double half = 0.0;
        if (count > 1) {
            double var = 0.0;
            for (double v : values) var += (v - mean) * (v - mean);
            var /= (count - 1);
            half = 2.0 * std::sqrt(var / count);
        }
        rows[g].mean = mean;
        rows[g].half_width = half;
        rows[g].replications = count;
    }
    return rows;
}

}  // namespace treesmooth
