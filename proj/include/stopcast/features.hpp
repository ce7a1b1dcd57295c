#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stopcast/event_log.hpp"
#include "stopcast/resampler.hpp"

namespace stopcast {

enum class TargetKind { Regression, Binary };

struct Target {
    std::string name;
    TargetKind kind = TargetKind::Regression;
    std::vector<double> values;
};

/// Column-major table of named numeric features, one row per interval.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(std::vector<Timestamp> index) : index_(std::move(index)) {}

    std::size_t rows() const { return index_.size(); }
    std::size_t cols() const { return names_.size(); }

    const std::vector<Timestamp>& index() const { return index_; }
    const std::vector<std::string>& names() const { return names_; }

    bool has_column(std::string_view name) const;
    std::size_t column_index(std::string_view name) const;
    std::span<const double> column(std::string_view name) const;
    std::span<const double> column(std::size_t i) const { return columns_[i]; }

    /// Throws Error on a duplicate name or a length mismatch.
    void add_column(std::string name, std::vector<double> values);

    const std::optional<Target>& target() const { return target_; }
    void set_target(Target t);
    void clear_target() { target_.reset(); }

    /// Rows [begin, end) of every column and of the target.
    FeatureMatrix slice(std::size_t begin, std::size_t end) const;
    FeatureMatrix drop_front(std::size_t n) const { return slice(n, rows()); }
    FeatureMatrix drop_back(std::size_t n) const { return slice(0, rows() - n); }

    std::vector<double> row(std::size_t r) const;
    /// Row-major copy of all feature values.
    std::vector<double> row_major() const;

    /// Replaces one target value; used by leakage checks.
    void set_target_value(std::size_t r, double v) { target_->values.at(r) = v; }

    bool operator==(const FeatureMatrix&) const;

private:
    std::vector<Timestamp> index_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
    std::optional<Target> target_;
};

/// Ten per-interval core columns, in emission order.
inline constexpr std::string_view kSumMinor = "sum_minor_stop";
inline constexpr std::string_view kCountBreakdown = "count_breakdown_stop";
const std::vector<std::string>& core_feature_names();

enum class CalendarField { DayOfWeek, DayOfMonth, Week, Hour };
std::string_view calendar_field_name(CalendarField f);

struct FeatureSpec {
    int lag_depth = 5;
    int rolling_window = 6;
    /// Stop category whose counts and sums feed MTBS/MTBR.
    StoppageCategory mtb_category = StoppageCategory::Minor;
    std::vector<CalendarField> calendar = {CalendarField::DayOfWeek, CalendarField::DayOfMonth,
                                           CalendarField::Week, CalendarField::Hour};
    bool time_since_major = true;
    bool time_since_breakdown = true;

    /// Throws Error when lag_depth < 1 or rolling_window < 2.
    void validate() const;
    /// Number of feature columns the full pipeline emits under this spec.
    std::size_t expected_columns() const;
    /// Rows lost to warm-up trimming.
    std::size_t warmup_rows() const { return static_cast<std::size_t>(lag_depth + rolling_window - 1); }
};

/// Core aggregates plus MTBS = run_sum / count and MTBR = stop_sum / run_count, with
/// zero denominators clamped to 1.
FeatureMatrix core_features(const IntervalSeries& series,
                            StoppageCategory mtb_category = StoppageCategory::Minor);

/// Adds `<c>_t_<j>` for j = 1..lag_depth for every column in `columns` (core columns
/// when empty) and drops the first lag_depth rows.
FeatureMatrix add_lag_features(const FeatureMatrix& m, int lag_depth,
                               const std::vector<std::string>& columns = {});

/// Adds trailing rolling mean and sample standard deviation of each core column and
/// drops the first window-1 rows.
FeatureMatrix add_rolling_features(const FeatureMatrix& m, int window,
                                   const std::vector<std::string>& columns = {});

/// Minutes from the end of the latest major/breakdown stop that ended at or before each
/// row's start. Before the first occurrence the value is minutes since the log start.
FeatureMatrix add_time_since_features(const FeatureMatrix& m, const EventLog& cleaned_log,
                                      bool major = true, bool breakdown = true);

FeatureMatrix add_calendar_features(const FeatureMatrix& m,
                                    const std::vector<CalendarField>& fields = {
                                        CalendarField::DayOfWeek, CalendarField::DayOfMonth,
                                        CalendarField::Week, CalendarField::Hour});

/// core -> lags -> rolling -> time since -> calendar.
FeatureMatrix build_feature_matrix(const IntervalSeries& series, const EventLog& cleaned_log,
                                   const FeatureSpec& spec);

/// Target = next row's sum_minor_stop; the last row is dropped.
FeatureMatrix attach_regression_target(const FeatureMatrix& m);

struct ClassificationRule {
    enum class Kind { DurationExceeds, BreakdownOccurs } kind = Kind::DurationExceeds;
    double threshold_s = 600.0;

    static ClassificationRule duration_exceeds(double threshold_s = 600.0) {
        return {Kind::DurationExceeds, threshold_s};
    }
    static ClassificationRule breakdown_occurs() { return {Kind::BreakdownOccurs, 0.0}; }
    std::string name() const;
};

/// Binary target from the next row: duration_exceeds -> next sum_minor_stop > threshold,
/// breakdown_occurs -> next count_breakdown_stop >= 1. The last row is dropped.
FeatureMatrix attach_classification_target(const FeatureMatrix& m, const ClassificationRule& rule);

/// First floor(n * train_fraction) rows train, the rest test.
std::pair<FeatureMatrix, FeatureMatrix> temporal_split(const FeatureMatrix& m, double train_fraction);

/// Header `timestamp,<features...>[,<target>]`.
void write_feature_matrix(const FeatureMatrix& m, std::ostream& out);
/// JSON manifest listing the columns and the spec used to build them.
std::string feature_manifest_json(const FeatureMatrix& m, const FeatureSpec& spec);

}  // namespace stopcast
