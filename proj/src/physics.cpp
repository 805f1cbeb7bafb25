#include "wanem/physics.hpp"

#include <cmath>
#include <fstream>
#include <map>

namespace wanem::physics {

MeasurableRange measurable_range(const flagsim::PhysicalSetup& setup) {
    setup.validate();
    MeasurableRange range;
    range.f_nyquist_hz = 0.5 * setup.frame_rate_hz;
    range.u_low_mps = setup.flag_length_m / setup.clip_duration_s;
    range.u_high_mps = setup.flag_length_m * range.f_nyquist_hz;
    return range;
}

std::vector<FluctuationPair> fluctuation_pairs(const flagsim::WindSeries& series,
                                               double window_s,
                                               double averaging_window_s) {
    if (window_s <= 0.0 || averaging_window_s <= 0.0)
        throw ValidationError("window lengths must be positive");
    const size_t n = series.instantaneous_mps.size();
    const size_t short_n =
        static_cast<size_t>(std::llround(window_s / series.dt_s));
    const size_t long_n =
        static_cast<size_t>(std::llround(averaging_window_s / series.dt_s));
    if (short_n < 1) throw ValidationError("window shorter than one sample");
    if (long_n < short_n)
        throw ValidationError("averaging window shorter than instantaneous window");
    if (n < short_n) throw ValidationError("series too short for window");

    std::vector<FluctuationPair> pairs;
    for (size_t block = 0; block < n; block += long_n) {
        const size_t block_len = std::min(long_n, n - block);
        const size_t windows = block_len / short_n;
        if (windows == 0) continue;
        const size_t covered = windows * short_n;

        double block_sum = 0.0;
        for (size_t k = 0; k < covered; ++k)
            block_sum += series.instantaneous_mps[block + k];
        const double block_mean = block_sum / static_cast<double>(covered);

        for (size_t w = 0; w < windows; ++w) {
            double sum = 0.0;
            for (size_t k = 0; k < short_n; ++k)
                sum += series.instantaneous_mps[block + w * short_n + k];
            const double short_mean = sum / static_cast<double>(short_n);
            pairs.push_back(FluctuationPair{block_mean, short_mean - block_mean});
        }
    }
    if (pairs.empty()) throw ValidationError("series too short for window");
    return pairs;
}

std::vector<double> fluctuation_series(const flagsim::WindSeries& series,
                                       double window_s) {
    auto pairs = fluctuation_pairs(series, window_s, series.averaging_window_s);
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.uprime_mps);
    return out;
}

namespace {

TurbulenceStats band_from_pairs(const std::vector<FluctuationPair>& pairs,
                                double bin_width, double window_s) {
    if (bin_width <= 0.0) throw ValidationError("bin width must be positive");
    if (pairs.empty()) throw ValidationError("no fluctuation windows");

    // accumulate in encounter order so results are reproducible bit for bit
    std::map<long, std::pair<double, size_t>> bins;   // bin -> (sum u'^2, count)
    for (const auto& p : pairs) {
        const long bin = static_cast<long>(std::floor(p.window_mean_mps / bin_width));
        auto& acc = bins[bin];
        acc.first += p.uprime_mps * p.uprime_mps;
        acc.second += 1;
    }

    TurbulenceStats stats;
    stats.bin_width_mps = bin_width;
    stats.instantaneous_window_s = window_s;
    for (const auto& [bin, acc] : bins) {
        stats.bin_centers_mps.push_back((static_cast<double>(bin) + 0.5) * bin_width);
        stats.sigma_u_per_bin.push_back(
            std::sqrt(acc.first / static_cast<double>(acc.second)));
        stats.count.push_back(acc.second);
    }
    return stats;
}

} // namespace

TurbulenceStats sigma_u_band(const flagsim::WindSeries& series, double bin_width,
                             double window_s) {
    return band_from_pairs(
        fluctuation_pairs(series, window_s, series.averaging_window_s), bin_width,
        window_s);
}

TurbulenceStats sigma_u_band(std::span<const flagsim::WindSeries> series,
                             double bin_width, double window_s) {
    std::vector<FluctuationPair> pooled;
    for (const auto& s : series) {
        auto pairs = fluctuation_pairs(s, window_s, s.averaging_window_s);
        pooled.insert(pooled.end(), pairs.begin(), pairs.end());
    }
    return band_from_pairs(pooled, bin_width, window_s);
}

void write_sigma_csv(const TurbulenceStats& stats, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "bin_center_mps,sigma_u_mps,count\n";
    for (size_t k = 0; k < stats.bin_centers_mps.size(); ++k)
        out << format_double(stats.bin_centers_mps[k]) << ','
            << format_double(stats.sigma_u_per_bin[k]) << ',' << stats.count[k]
            << '\n';
    if (!out) throw IoError("write failed: " + path);
}

} // namespace wanem::physics
