#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "stopcast/time.hpp"

namespace stopcast {

/// Daily observations with their dates.
struct UnivariateSeries {
    std::vector<Timestamp> dates;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

// ---------------------------------------------------------------------------
// Benchmarks

enum class BenchmarkKind { Naive, StaticMean, MovingMean, MovingMedian };

inline constexpr BenchmarkKind kAllBenchmarks[] = {BenchmarkKind::MovingMean, BenchmarkKind::StaticMean,
                                                   BenchmarkKind::MovingMedian, BenchmarkKind::Naive};

std::string_view benchmark_name(BenchmarkKind k);
BenchmarkKind benchmark_from_name(std::string_view name);

/// Flat multi-step forecast from the end of `train`: last value, mean of all values, or
/// mean / median of the last `window` values.
std::vector<double> benchmark_forecast(BenchmarkKind kind, std::span<const double> train,
                                       std::size_t horizon, std::size_t window);

/// |y_t - yhat_t| for every t where the benchmark can predict y_t from y_0..y_{t-1}.
std::vector<double> in_sample_one_step_errors(BenchmarkKind kind, std::span<const double> train,
                                              std::size_t window);

// ---------------------------------------------------------------------------
// Holt-Winters, additive trend and multiplicative seasonality

struct HoltWintersState {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    std::size_t period = 7;
    double level = 0.0;
    double trend = 0.0;
    /// seasonal[i] is the latest index for time steps t with t mod period == i.
    std::vector<double> seasonal;
    /// Index of the last observation the state has absorbed.
    std::size_t last_index = 0;
    double sse = 0.0;
};

/// Initial level, trend and seasonal indices from the first two seasons.
HoltWintersState holt_winters_initial_state(std::span<const double> train, std::size_t period);

/// Runs the smoothing recursion over train[period..] for fixed weights. The returned
/// state carries the one-step in-sample sum of squared errors.
HoltWintersState holt_winters_filter(std::span<const double> train, std::size_t period, double alpha,
                                     double beta, double gamma);

/// Grid-searches (alpha, beta, gamma) over {0.05, 0.10, ..., 0.95}^3 by in-sample SSE.
HoltWintersState fit_holt_winters(std::span<const double> train, std::size_t period = 7);

std::vector<double> holt_winters_forecast(const HoltWintersState& state, std::size_t horizon);

// ---------------------------------------------------------------------------
// ARIMA(p, d, q) by conditional sum of squares

/// Result of d-fold differencing. `heads[k]` is the first value of the series after k
/// differences, which is what integration needs to rebuild it.
struct Differenced {
    std::vector<double> values;
    std::vector<double> heads;
};

Differenced difference_series(std::span<const double> values, int d);
std::vector<double> integrate_series(const Differenced& diff);

struct ArimaParams {
    int p = 0;
    int d = 0;
    int q = 0;
    std::vector<double> phi;
    std::vector<double> theta;
    double intercept = 0.0;  // mean of the differenced series
    double sigma2 = 0.0;
    bool converged = true;
    int iterations = 0;
};

struct NelderMeadOptions {
    double tolerance = 1e-6;  // simplex diameter
    int max_iterations = 2000;
    double initial_step = 0.1;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Derivative-free minimisation with the standard reflection / expansion / contraction /
/// shrink moves. Non-finite objective values are treated as +infinity.
template <typename F>
NelderMeadResult nelder_mead(F&& objective, std::vector<double> start, const NelderMeadOptions& opts = {});

/// Conditional sum of squares of one-step innovations for a demeaned series, with
/// pre-sample innovations fixed at 0 and the first p values used as conditioning.
double arima_css(std::span<const double> demeaned, std::span<const double> phi,
                 std::span<const double> theta);

ArimaParams fit_arima(std::span<const double> train, int p, int d, int q,
                      const NelderMeadOptions& opts = {});

std::vector<double> arima_forecast(const ArimaParams& params, std::span<const double> train,
                                   std::size_t horizon);

}  // namespace stopcast

#include "stopcast/detail/nelder_mead.hpp"
