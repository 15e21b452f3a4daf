#pragma once

// Reductions used by every ensemble experiment. All of them consume their
// inputs in index order so that results do not depend on how the samples
// were scheduled.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace multiscale {

/// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double variance = 0.0;  // unbiased sample variance
    std::size_t n = 0;
};

/// Mean, sample variance and standard error sd/√n of independent samples.
MeanEstimate mean_estimate(std::span<const double> samples);

/// Standard error of the mean of a correlated series from `n_batches` batch means.
MeanEstimate batch_means(std::span<const double> series, std::size_t n_batches);

/// Least-squares slope of y against x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

struct SlopeTest {
    double slope = 0.0;
    double std_error = 0.0;
    double t_statistic = 0.0;
};

/// Ordinary least squares with the classical slope standard error.
SlopeTest slope_test(std::span<const double> x, std::span<const double> y);

/// Combined standard error sqrt(a² + b²).
double combined_error(double a, double b) noexcept;

/// "a exceeds b beyond k combined standard errors": a - b > k sqrt(sa² + sb²).
bool exceeds_beyond(double a, double sa, double b, double sb, double k = 1.0) noexcept;

/// Runs fn(i) for i in [0, n) on `workers` threads. Each index is processed
/// exactly once; the first exception thrown by fn is rethrown after all
/// threads have joined.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    {
        std::vector<std::jthread> pool;
        pool.reserve(count);
        for (unsigned w = 0; w < count; ++w) pool.emplace_back(body);
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace multiscale
