// SPDX-License-Identifier: Apache-2.0
//
// pcenet: position-domain channel extrapolation laboratory
// Copyright (C) 2026 pcenet developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef PCENET_EXPERIMENT_HPP
#define PCENET_EXPERIMENT_HPP

// Experiment harness behind the command-line tool: declarative specs,
// dataset generation, per-cell training with checkpoints, SNR sweeps and
// CSV reports.

#include "pcenet/pipeline.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pce
{
    class MissingDatasetError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class MissingCheckpointError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Malformed results CSV; carries the 1-based line number.
    class CsvError : public std::runtime_error
    {
    public:
        CsvError(const std::string &what, std::size_t line)
            : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
        std::size_t line() const { return line_; }

    private:
        std::size_t line_;
    };

    // Variant names accepted in specs. "pcenet_perfect" is full PCEnet with
    // the position estimated from the true main channel.
    inline const std::vector<std::string> &known_variants()
    {
        static const std::vector<std::string> v{"e2e",          "pcenet_full", "pcenet_one_sided", "pcenet_label_free",
                                                "pcenet_perfect", "vanilla_ae", "direct_map",       "ls",
                                                "mmse"};
        return v;
    }

    struct ExperimentSpec
    {
        std::string scenario_path; // resolved against the spec file's directory
        std::string dataset_path;  // default: <out_dir>/dataset.pce
        std::string out_dir = "pce_out";
        std::vector<std::string> variants;
        std::vector<double> test_snr_db{-4, -2, 0, 2, 4, 6, 8, 10};
        std::vector<int> pilot_lens{2, 4, 8};
        std::vector<int> feedback_bits; // empty: N_bit = 2 B L per pilot length
        // Per-variant replacement of the (L, N_bit) axes; explicit `pairs`
        // take precedence over the product of the two lists.
        struct Axes
        {
            std::vector<int> pilot_lens;
            std::vector<int> feedback_bits;
            std::vector<std::pair<int, int>> pairs;
        };
        std::map<std::string, Axes> variant_axes;
        double train_snr_db = 10.0;
        std::vector<std::uint64_t> seeds{1};
        int quant_bits = 4;
        double power = 1.0;
        int residual_blocks = 10;
        int main_pilot_len = 16;
        int main_feedback_bits = 128;
        int position_folds = 2;
        std::size_t batch_size = 512;
        double lr = 1e-3;
        int e2e_epochs = 500;
        int localizer_epochs = 300;
        int charting_epochs = 100;
        double epochs_scale = 1.0;

        // Nonempty variant/seed lists, known variants, N_bit % B == 0 per cell.
        void validate() const;
        std::vector<std::pair<int, int>> overhead_pairs() const; // (L, N_bit)
        std::vector<std::pair<int, int>> overhead_pairs_for(const std::string &variant) const;
        int scaled(int epochs) const;
    };

    ExperimentSpec load_spec(const std::string &path);
    ExperimentSpec parse_spec(const std::string &json_text, const std::string &base_dir = ".");

    struct ResultRecord
    {
        std::string variant;
        int pilot_len = 0;    // 0 where not applicable
        int feedback_bits = 0; // 0 = unconstrained (classical baselines)
        double test_snr_db = 0;
        std::uint64_t seed = 0;
        double nmse_db = 0; // finite or -inf
        std::optional<double> loc_mean_err_m;
        std::optional<double> chart_score;
        double wall_time_s = 0;

        void validate() const;
    };

    std::string results_header();
    std::string format_record(const ResultRecord &r);
    std::vector<ResultRecord> parse_results(const std::string &csv_text);
    std::vector<ResultRecord> read_results(const std::string &path);
    void write_results(const std::vector<ResultRecord> &rows, const std::string &path);

    struct RunOptions
    {
        std::optional<std::string> out_dir;
        std::optional<std::uint64_t> seed;
        int jobs = 0; // 0: PCE_THREADS or 1
        std::optional<double> epochs_scale;
        bool train_on_demand = false;
        bool timing = false; // record wall_time_s (otherwise 0 for byte-stable CSVs)
        std::function<void(const std::string &)> print;
    };

    // Applies command-line overrides to a loaded spec.
    void apply_overrides(ExperimentSpec &spec, const RunOptions &opts);
    int resolve_jobs(int requested);

    struct TrainingCell
    {
        std::string variant;
        int pilot_len = 0;
        int feedback_bits = 0;
        std::uint64_t seed = 0;
        std::string id() const;
    };

    std::vector<TrainingCell> training_cells(const ExperimentSpec &spec);

    void cmd_generate(const std::string &scenario_path, const std::string &out_path, const RunOptions &opts);
    void cmd_train(const ExperimentSpec &spec, const RunOptions &opts);
    std::vector<ResultRecord> cmd_sweep(const ExperimentSpec &spec, const RunOptions &opts);

    struct CellSummary
    {
        std::string variant;
        int pilot_len = 0, feedback_bits = 0;
        double test_snr_db = 0;
        std::size_t n = 0;
        double nmse_mean = 0, nmse_std = 0;
        std::optional<double> loc_mean, loc_std, chart_mean, chart_std;
    };

    // Mean and population standard deviation over seeds per cell.
    std::vector<CellSummary> aggregate(const std::vector<ResultRecord> &rows);

    struct AcceptanceLine
    {
        int criterion = 0;
        std::string status; // PASS, FAIL or SKIP
        std::string detail;
        std::string format() const;
    };

    std::vector<AcceptanceLine> acceptance_from_results(const std::vector<ResultRecord> &rows,
                                                        std::optional<double> grid_diagonal_m,
                                                        std::optional<double> bs_separation_m);

    // Writes fig7/fig9/fig10/fig13-like CSVs and summary.txt into `out_dir`;
    // returns the summary text.
    std::string cmd_report(const std::string &results_csv, const std::string &out_dir, const RunOptions &opts);
}

#endif
