#include "multiscale/stats.hpp"

#include <cmath>

#include "multiscale/errors.hpp"

namespace multiscale {

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

MeanEstimate mean_estimate(std::span<const double> samples) {
    MeanEstimate est;
    est.n = samples.size();
    if (samples.empty()) return est;
    CompensatedSum sum;
    for (double x : samples) sum.add(x);
    est.mean = sum.value() / static_cast<double>(est.n);
    if (est.n < 2) return est;
    CompensatedSum sq;
    for (double x : samples) {
        const double d = x - est.mean;
        sq.add(d * d);
    }
    est.variance = sq.value() / static_cast<double>(est.n - 1);
    est.std_error = std::sqrt(est.variance / static_cast<double>(est.n));
    return est;
}

MeanEstimate batch_means(std::span<const double> series, std::size_t n_batches) {
    if (n_batches < 2) throw invalid_parameter("batch_means: need at least two batches");
    if (series.size() < n_batches) throw invalid_parameter("batch_means: fewer samples than batches");
    const std::size_t len = series.size() / n_batches;
    std::vector<double> means(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b) {
        CompensatedSum s;
        for (std::size_t i = 0; i < len; ++i) s.add(series[b * len + i]);
        means[b] = s.value() / static_cast<double>(len);
    }
    MeanEstimate est = mean_estimate(means);
    // report the sample count of the series, not of the batches
    est.n = len * n_batches;
    return est;
}

SlopeTest slope_test(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) throw invalid_parameter("slope_test: need >= 3 matched points");
    const double n = static_cast<double>(x.size());
    CompensatedSum sx, sy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx.add(x[i]);
        sy.add(y[i]);
    }
    const double mx = sx.value() / n;
    const double my = sy.value() / n;
    CompensatedSum sxx, sxy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx.add((x[i] - mx) * (x[i] - mx));
        sxy.add((x[i] - mx) * (y[i] - my));
    }
    if (!(sxx.value() > 0.0)) throw undefined_fit("slope_test: x values are all equal");
    SlopeTest out;
    out.slope = sxy.value() / sxx.value();
    CompensatedSum rss;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - my - out.slope * (x[i] - mx);
        rss.add(r * r);
    }
    out.std_error = std::sqrt(rss.value() / (n - 2.0) / sxx.value());
    out.t_statistic = out.std_error > 0.0 ? out.slope / out.std_error : 0.0;
    return out;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw invalid_parameter("least_squares_slope: need >= 2 points");
    if (x.size() == 2) {
        if (x[1] == x[0]) throw undefined_fit("least_squares_slope: x values are all equal");
        return (y[1] - y[0]) / (x[1] - x[0]);
    }
    return slope_test(x, y).slope;
}

double combined_error(double a, double b) noexcept { return std::sqrt(a * a + b * b); }

bool exceeds_beyond(double a, double sa, double b, double sb, double k) noexcept {
    return a - b > k * combined_error(sa, sb);
}

}  // namespace multiscale
