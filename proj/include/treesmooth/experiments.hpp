#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace treesmooth {

/// One hyperparameter point; unset fields do not apply to the experiment and
/// are emitted blank.
struct HyperPoint {
    std::optional<int> tree_count;           // column B
    std::optional<double> feature_fraction;  // column m
    std::optional<int> max_leaves;
    std::optional<int> bootstrap;
    std::optional<double> sigma;
    std::optional<double> delta;
    std::optional<double> eta;
    std::optional<int> rounds;
};

struct ExperimentRecord {
    std::string experiment;
    int replication = 0;
    HyperPoint point;
    std::string metric;
    double value = 0.0;
    long grid_index = 0;  // position in the experiment's grid order; not emitted
};

struct ExperimentSpec {
    std::string name;
    std::map<std::string, std::vector<double>> grids;  // overrides of default grids
    std::map<std::string, std::string> options;        // scalar/string overrides
    int replications = 10;
    int n_train = 500;
    int n_test = 500;
    uint64_t base_seed = 20240501;
    int threads = 1;
};

struct ExperimentInfo {
    std::string id;
    std::string description;
};

/// All runnable experiment ids with one-line descriptions.
std::vector<ExperimentInfo> experiment_catalog();

/// Runs the named experiment over its grid x replications. Records are
/// ordered by (grid point, replication, metric name) and are a pure function
/// of the spec; the thread count never changes values or order.
std::vector<ExperimentRecord> run_experiment(const ExperimentSpec& spec);

struct SummaryRow {
    std::string experiment;
    HyperPoint point;
    std::string metric;
    double mean = 0.0;
    double half_width = 0.0;  // 2 * standard error of the mean; 0 for a single replication
    int replications = 0;
};

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records);

/// Writes records with columns
/// experiment,replication,B,m,max_leaves,bootstrap,sigma,delta,eta,rounds,metric,value
/// (format "csv") or the same rows as a JSON array of objects (format "json").
/// Doubles use shortest round-trip formatting, so emitted files are
/// byte-identical across runs and parse back exactly.
void emit_records(const std::vector<ExperimentRecord>& records, const std::string& format,
                  const std::string& path);

void emit_summary(const std::vector<SummaryRow>& rows, const std::string& format,
                  const std::string& path);

/// Parses a file previously written by emit_records (CSV or JSON by content).
std::vector<ExperimentRecord> parse_records(const std::string& path);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

}  // namespace treesmooth
