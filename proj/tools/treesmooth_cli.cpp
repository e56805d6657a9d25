#include <CLI11.hpp>

#include <charconv>
#include <iostream>
#include <thread>

#include "treesmooth/datagen.hpp"
#include "treesmooth/experiments.hpp"

namespace {

bool parse_grid_values(const std::string& text, std::vector<double>& out) {
    out.clear();
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        const char* b = text.data() + start;
        const char* e = text.data() + end;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || ptr != e || b == e) return false;
        out.push_back(v);
        start = end + 1;
        if (end == text.size()) break;
    }
    return !out.empty();
}

void apply_overrides(treesmooth::ExperimentSpec& spec, const std::vector<std::string>& sets) {
    for (const auto& kv : sets) {
        auto pos = kv.find('=');
        if (pos == std::string::npos || pos == 0)
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, pos);
        const std::string value = kv.substr(pos + 1);
        std::vector<double> grid;
        if (parse_grid_values(value, grid)) spec.grids[key] = grid;
        spec.options[key] = value;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tree ensembles as adaptive smoothers: experiment runner"};
    app.require_subcommand(1);

    auto* list_cmd = app.add_subcommand("list", "List the experiment catalog");

    auto* run_cmd = app.add_subcommand("run", "Run an experiment and write its records");
    std::string experiment, out_path, format = "csv";
    std::vector<std::string> sets;
    treesmooth::ExperimentSpec spec;
    spec.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    run_cmd->add_option("--experiment", experiment, "Experiment id (see `list`)")->required();
    run_cmd->add_option("--out", out_path, "Output file path")->required();
    run_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    run_cmd->add_option("--seed", spec.base_seed, "Base seed");
    run_cmd->add_option("--reps", spec.replications, "Replications");
    run_cmd->add_option("--threads", spec.threads, "Worker threads");
    run_cmd->add_option("--n-train", spec.n_train, "Training set size");
    run_cmd->add_option("--n-test", spec.n_test, "Test set size");
    run_cmd->add_option("--set", sets, "key=value grid/option overrides (repeatable)");

    auto* sum_cmd = app.add_subcommand("summarize",
                                       "Aggregate records into means and 2*SEM half-widths");
    std::string sum_in, sum_out, sum_format = "csv";
    sum_cmd->add_option("--in", sum_in, "Records file (csv or json)")->required();
    sum_cmd->add_option("--out", sum_out, "Output file path")->required();
    sum_cmd->add_option("--format", sum_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* fetch_cmd = app.add_subcommand("fetch", "Download a dataset file");
    std::string url, fetch_out;
    fetch_cmd->add_option("--url", url, "Source URL (http/https)")->required();
    fetch_cmd->add_option("--out", fetch_out, "Destination path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list_cmd) {
            for (const auto& info : treesmooth::experiment_catalog())
                std::cout << info.id << "\n    " << info.description << "\n";
        } else if (*run_cmd) {
            spec.name = experiment;
            apply_overrides(spec, sets);
            auto records = treesmooth::run_experiment(spec);
            treesmooth::emit_records(records, format, out_path);
            std::cout << "wrote " << records.size() << " records to " << out_path << "\n";
        } else if (*sum_cmd) {
            auto records = treesmooth::parse_records(sum_in);
            auto rows = treesmooth::summarize(records);
            treesmooth::emit_summary(rows, sum_format, sum_out);
            std::cout << "wrote " << rows.size() << " summary rows to " << sum_out << "\n";
        } else if (*fetch_cmd) {
            std::cout << treesmooth::fetch_dataset(url, fetch_out) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
