#pragma once

// Evaluation reports: overall vs measurable-range RMSE summaries and binned
// prediction curves, plus the comparison of prediction spread against the
// turbulence variability floor.

#include <optional>
#include <string>
#include <vector>

#include "wanem/core.hpp"
#include "wanem/physics.hpp"
#include "wanem/train.hpp"

namespace wanem::eval {

struct RmseSummary {
    double overall_rmse_mps = 0.0;
    double measurable_rmse_mps = 0.0;
    double bound_low_mps = 0.0;
    double bound_high_mps = 0.0;
    bool bounded = false;
    size_t n_overall = 0;
    size_t n_measurable = 0;
};

// Overall RMSE plus, when bounds are given, the RMSE restricted to records
// whose true label falls inside [low, high].
RmseSummary rmse(const std::vector<train::EvalRecord>& records,
                 std::optional<std::pair<double, double>> bounds = std::nullopt);

struct BinnedReport {
    std::vector<double> bin_center_mps;
    std::vector<double> mean_prediction_mps;
    std::vector<double> std_prediction_mps;   // population convention
    std::vector<size_t> count;
    double bin_width_mps = 1.0;
};

// Bins true labels into half-open bin_mps intervals; per occupied bin emits
// the mean and standard deviation of the predictions.
BinnedReport binned_report(const std::vector<train::EvalRecord>& records,
                           double bin_mps = 1.0);

struct TurbulenceComparison {
    std::vector<double> bin_center_mps;
    std::vector<double> ratio;              // std_prediction / sigma_u
    size_t skipped_zero_sigma = 0;
};

// For each report bin whose center falls in an occupied sigma_u bin:
// ratio = std_prediction / sigma_u. Zero-sigma bins are skipped and counted.
TurbulenceComparison compare_to_turbulence(const BinnedReport& report,
                                           const physics::TurbulenceStats& stats);

// CSV: bin_center_mps,mean_pred_mps,std_pred_mps,count
void write_binned_csv(const BinnedReport& report, const std::string& path);

struct SummaryRow {
    std::string dataset;    // source tag or "all"
    std::string variant;    // nm | raw
    RmseSummary summary;
};

// CSV: dataset,variant,overall_rmse,measurable_rmse,n,n_measurable
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

// Per-source-tag rows (plus an "all" row when several tags are present).
std::vector<SummaryRow> summarize_by_tag(
    const std::vector<train::EvalRecord>& records, const std::string& variant,
    std::optional<std::pair<double, double>> bounds);

void write_predictions_csv(const std::vector<train::EvalRecord>& records,
                           const std::string& path);

} // namespace wanem::eval
