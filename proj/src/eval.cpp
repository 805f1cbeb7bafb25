#include "wanem/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace wanem::eval {

RmseSummary rmse(const std::vector<train::EvalRecord>& records,
                 std::optional<std::pair<double, double>> bounds) {
    if (records.empty()) throw ValidationError("rmse of empty record list");
    for (const auto& r : records)
        if (!std::isfinite(r.y) || !std::isfinite(r.y_hat))
            throw ValidationError("non-finite evaluation record");

    RmseSummary summary;
    summary.n_overall = records.size();
    double sq_sum = 0.0;
    for (const auto& r : records) {
        const double e = r.y - r.y_hat;
        sq_sum += e * e;
    }
    summary.overall_rmse_mps = std::sqrt(sq_sum / static_cast<double>(records.size()));

    if (!bounds) {
        summary.measurable_rmse_mps = summary.overall_rmse_mps;
        summary.n_measurable = summary.n_overall;
        return summary;
    }

    summary.bounded = true;
    summary.bound_low_mps = bounds->first;
    summary.bound_high_mps = bounds->second;
    double in_sum = 0.0;
    size_t in_count = 0;
    for (const auto& r : records) {
        if (r.y < bounds->first || r.y > bounds->second) continue;
        const double e = r.y - r.y_hat;
        in_sum += e * e;
        ++in_count;
    }
    if (in_count == 0)
        throw ValidationError("no records inside measurable bounds");
    summary.measurable_rmse_mps = std::sqrt(in_sum / static_cast<double>(in_count));
    summary.n_measurable = in_count;
    return summary;
}

BinnedReport binned_report(const std::vector<train::EvalRecord>& records,
                           double bin_mps) {
    if (records.empty()) throw ValidationError("binned report of empty record list");
    if (bin_mps <= 0.0) throw ValidationError("bin width must be positive");

    std::map<long, std::vector<double>> bins;
    for (const auto& r : records)
        bins[static_cast<long>(std::floor(r.y / bin_mps))].push_back(r.y_hat);

    BinnedReport report;
    report.bin_width_mps = bin_mps;
    for (const auto& [bin, preds] : bins) {
        double sum = 0.0;
        for (double p : preds) sum += p;
        const double mean = sum / static_cast<double>(preds.size());
        double var_sum = 0.0;
        for (double p : preds) var_sum += (p - mean) * (p - mean);
        report.bin_center_mps.push_back((static_cast<double>(bin) + 0.5) * bin_mps);
        report.mean_prediction_mps.push_back(mean);
        report.std_prediction_mps.push_back(
            std::sqrt(var_sum / static_cast<double>(preds.size())));
        report.count.push_back(preds.size());
    }
    return report;
}

TurbulenceComparison compare_to_turbulence(const BinnedReport& report,
                                           const physics::TurbulenceStats& stats) {
    std::map<long, double> sigma_by_bin;
    for (size_t k = 0; k < stats.bin_centers_mps.size(); ++k) {
        const long bin = static_cast<long>(
            std::floor(stats.bin_centers_mps[k] / stats.bin_width_mps));
        sigma_by_bin[bin] = stats.sigma_u_per_bin[k];
    }

    TurbulenceComparison cmp;
    for (size_t k = 0; k < report.bin_center_mps.size(); ++k) {
        const long bin = static_cast<long>(
            std::floor(report.bin_center_mps[k] / stats.bin_width_mps));
        auto it = sigma_by_bin.find(bin);
        if (it == sigma_by_bin.end()) continue;
        if (it->second == 0.0) {
            ++cmp.skipped_zero_sigma;
            continue;
        }
        cmp.bin_center_mps.push_back(report.bin_center_mps[k]);
        cmp.ratio.push_back(report.std_prediction_mps[k] / it->second);
    }
    if (cmp.bin_center_mps.empty() && cmp.skipped_zero_sigma == 0)
        throw ValidationError("no overlapping bins between report and sigma band");
    return cmp;
}

void write_binned_csv(const BinnedReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "bin_center_mps,mean_pred_mps,std_pred_mps,count\n";
    for (size_t k = 0; k < report.bin_center_mps.size(); ++k)
        out << format_double(report.bin_center_mps[k]) << ','
            << format_double(report.mean_prediction_mps[k]) << ','
            << format_double(report.std_prediction_mps[k]) << ',' << report.count[k]
            << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "dataset,variant,overall_rmse,measurable_rmse,n,n_measurable\n";
    for (const auto& row : rows)
        out << row.dataset << ',' << row.variant << ','
            << format_double(row.summary.overall_rmse_mps) << ','
            << format_double(row.summary.measurable_rmse_mps) << ','
            << row.summary.n_overall << ',' << row.summary.n_measurable << '\n';
    if (!out) throw IoError("write failed: " + path);
}

std::vector<SummaryRow> summarize_by_tag(
    const std::vector<train::EvalRecord>& records, const std::string& variant,
    std::optional<std::pair<double, double>> bounds) {
    std::map<SourceTag, std::vector<train::EvalRecord>> by_tag;
    for (const auto& r : records) by_tag[r.source_tag].push_back(r);

    std::vector<SummaryRow> rows;
    for (const auto& [tag, recs] : by_tag)
        rows.push_back(SummaryRow{to_string(tag), variant, rmse(recs, bounds)});
    if (by_tag.size() > 1)
        rows.push_back(SummaryRow{"all", variant, rmse(records, bounds)});
    return rows;
}

void write_predictions_csv(const std::vector<train::EvalRecord>& records,
                           const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "clip_id,label_mps,prediction_mps,source_tag\n";
    for (const auto& r : records)
        out << r.clip_id << ',' << format_double(r.y) << ','
            << format_double(r.y_hat) << ',' << to_string(r.source_tag) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

} // namespace wanem::eval
