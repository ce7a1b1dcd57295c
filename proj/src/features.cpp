#include "stopcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

namespace stopcast {

// ---------------------------------------------------------------------------
// FeatureMatrix

bool FeatureMatrix::has_column(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t FeatureMatrix::column_index(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw Error("unknown feature column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - names_.begin());
}

std::span<const double> FeatureMatrix::column(std::string_view name) const {
    return columns_[column_index(name)];
}

void FeatureMatrix::add_column(std::string name, std::vector<double> values) {
    if (has_column(name)) throw Error("duplicate feature column '" + name + "'");
    if (values.size() != rows()) throw Error("column '" + name + "' has wrong length");
    names_.push_back(std::move(name));
    columns_.push_back(std::move(values));
}

void FeatureMatrix::set_target(Target t) {
    if (t.values.size() != rows()) throw Error("target length does not match row count");
    target_ = std::move(t);
}

FeatureMatrix FeatureMatrix::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows()) throw Error("row slice out of range");
    FeatureMatrix out(std::vector<Timestamp>(index_.begin() + static_cast<std::ptrdiff_t>(begin),
                                             index_.begin() + static_cast<std::ptrdiff_t>(end)));
    out.names_ = names_;
    out.columns_.reserve(columns_.size());
    for (const auto& c : columns_)
        out.columns_.emplace_back(c.begin() + static_cast<std::ptrdiff_t>(begin),
                                  c.begin() + static_cast<std::ptrdiff_t>(end));
    if (target_) {
        Target t{target_->name, target_->kind,
                 {target_->values.begin() + static_cast<std::ptrdiff_t>(begin),
                  target_->values.begin() + static_cast<std::ptrdiff_t>(end)}};
        out.target_ = std::move(t);
    }
    return out;
}

std::vector<double> FeatureMatrix::row(std::size_t r) const {
    std::vector<double> out(cols());
    for (std::size_t c = 0; c < cols(); ++c) out[c] = columns_[c][r];
    return out;
}

std::vector<double> FeatureMatrix::row_major() const {
    std::vector<double> out(rows() * cols());
    for (std::size_t c = 0; c < cols(); ++c)
        for (std::size_t r = 0; r < rows(); ++r) out[r * cols() + c] = columns_[c][r];
    return out;
}

bool FeatureMatrix::operator==(const FeatureMatrix& o) const {
    if (index_ != o.index_ || names_ != o.names_ || columns_ != o.columns_) return false;
    if (target_.has_value() != o.target_.has_value()) return false;
    if (!target_) return true;
    return target_->name == o.target_->name && target_->kind == o.target_->kind &&
           target_->values == o.target_->values;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& core_feature_names() {
    static const std::vector<std::string> names = {
        "sum_minor_stop",     "count_minor_stop", "sum_breakdown_stop", "count_breakdown_stop",
        "sum_major_stop",     "count_major_stop", "sum_run",            "count_run",
        "mtbs",               "mtbr"};
    return names;
}

std::string_view calendar_field_name(CalendarField f) {
    switch (f) {
        case CalendarField::DayOfWeek: return "day_of_week";
        case CalendarField::DayOfMonth: return "day_of_month";
        case CalendarField::Week: return "week";
        case CalendarField::Hour: return "hour";
    }
    return "?";
}

void FeatureSpec::validate() const {
    if (lag_depth < 1) throw Error("lag_depth must be >= 1");
    if (rolling_window < 2) throw Error("rolling_window must be >= 2");
}

std::size_t FeatureSpec::expected_columns() const {
    const std::size_t core = core_feature_names().size();
    return core + core * static_cast<std::size_t>(lag_depth) + 2 * core +
           (time_since_major ? 1 : 0) + (time_since_breakdown ? 1 : 0) + calendar.size();
}

FeatureMatrix core_features(const IntervalSeries& series, StoppageCategory mtb_category) {
    std::vector<Timestamp> index;
    index.reserve(series.size());
    for (const auto& r : series.records) index.push_back(r.start);
    FeatureMatrix m(std::move(index));

    const std::size_t n = series.size();
    auto per_record = [&](auto fn) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = fn(series.records[i]);
        return v;
    };
    for (auto c : {StoppageCategory::Minor, StoppageCategory::Breakdown, StoppageCategory::Major}) {
        const std::string name(category_name(c));
        m.add_column("sum_" + name + "_stop", per_record([c](const auto& r) { return r.stop_sum(c); }));
        m.add_column("count_" + name + "_stop",
                     per_record([c](const auto& r) { return static_cast<double>(r.count(c)); }));
    }
    m.add_column("sum_run", per_record([](const auto& r) { return r.run_sum_s; }));
    m.add_column("count_run", per_record([](const auto& r) { return static_cast<double>(r.run_count); }));
    m.add_column("mtbs", per_record([mtb_category](const auto& r) {
        return r.run_sum_s / static_cast<double>(std::max<std::int64_t>(r.count(mtb_category), 1));
    }));
    m.add_column("mtbr", per_record([mtb_category](const auto& r) {
        return r.stop_sum(mtb_category) / static_cast<double>(std::max<std::int64_t>(r.run_count, 1));
    }));
    return m;
}

namespace {

const std::vector<std::string>& or_core(const std::vector<std::string>& columns) {
    return columns.empty() ? core_feature_names() : columns;
}

}  // namespace

FeatureMatrix add_lag_features(const FeatureMatrix& m, int lag_depth,
                               const std::vector<std::string>& columns) {
    if (lag_depth < 1) throw Error("lag_depth must be >= 1");
    const auto depth = static_cast<std::size_t>(lag_depth);
    if (m.rows() < depth + 1)
        throw Error("lag features need at least " + std::to_string(depth + 1) + " rows, got " +
                    std::to_string(m.rows()));
    FeatureMatrix out = m.drop_front(depth);
    for (const auto& name : or_core(columns)) {
        auto src = m.column(name);
        for (std::size_t j = 1; j <= depth; ++j) {
            // Output row r corresponds to input row r + depth; its lag j is input row r + depth - j.
            std::vector<double> v(out.rows());
            for (std::size_t r = 0; r < out.rows(); ++r) v[r] = src[r + depth - j];
            out.add_column(name + "_t_" + std::to_string(j), std::move(v));
        }
    }
    return out;
}

FeatureMatrix add_rolling_features(const FeatureMatrix& m, int window,
                                   const std::vector<std::string>& columns) {
    if (window < 2) throw Error("rolling window must be >= 2");
    const auto w = static_cast<std::size_t>(window);
    if (w > m.rows())
        throw Error("rolling window " + std::to_string(w) + " exceeds row count " +
                    std::to_string(m.rows()));
    FeatureMatrix out = m.drop_front(w - 1);
    for (const auto& name : or_core(columns)) {
        auto src = m.column(name);
        std::vector<double> mean(out.rows()), sd(out.rows());
        for (std::size_t r = 0; r < out.rows(); ++r) {
            const auto win = src.subspan(r, w);
            double s = 0.0;
            for (double x : win) s += x;
            const double mu = s / static_cast<double>(w);
            double ss = 0.0;
            for (double x : win) ss += (x - mu) * (x - mu);
            mean[r] = mu;
            sd[r] = std::sqrt(ss / static_cast<double>(w - 1));
        }
        out.add_column(name + "_rolling_mean", std::move(mean));
        out.add_column(name + "_rolling_std", std::move(sd));
    }
    return out;
}

FeatureMatrix add_time_since_features(const FeatureMatrix& m, const EventLog& cleaned_log,
                                      bool major, bool breakdown) {
    FeatureMatrix out = m;
    const Timestamp origin =
        cleaned_log.empty() ? (m.rows() ? m.index().front() : Timestamp{}) : cleaned_log.events.front().timestamp;

    auto ends_of = [&](StoppageCategory cat) {
        std::vector<std::int64_t> ends;
        for (const auto& e : cleaned_log.events) {
            if (e.state != MachineState::Stop || e.duration_unknown || e.continuation) continue;
            if (categorize_stop(e.source_duration_s) != cat) continue;
            ends.push_back(e.timestamp.ms + std::llround(e.source_duration_s * 1000.0));
        }
        std::sort(ends.begin(), ends.end());
        return ends;
    };
    auto column_for = [&](const std::vector<std::int64_t>& ends) {
        std::vector<double> v(m.rows());
        for (std::size_t r = 0; r < m.rows(); ++r) {
            const auto at = m.index()[r].ms;
            auto it = std::upper_bound(ends.begin(), ends.end(), at);
            const std::int64_t ref = (it == ends.begin()) ? origin.ms : *std::prev(it);
            v[r] = std::max<double>(0.0, static_cast<double>(at - ref) / static_cast<double>(kMsPerMinute));
        }
        return v;
    };
    if (major) out.add_column("time_since_major_stop", column_for(ends_of(StoppageCategory::Major)));
    if (breakdown)
        out.add_column("time_since_breakdown_stop", column_for(ends_of(StoppageCategory::Breakdown)));
    return out;
}

FeatureMatrix add_calendar_features(const FeatureMatrix& m, const std::vector<CalendarField>& fields) {
    FeatureMatrix out = m;
    for (auto f : fields) {
        std::vector<double> v(m.rows());
        for (std::size_t r = 0; r < m.rows(); ++r) {
            const Timestamp t = m.index()[r];
            switch (f) {
                case CalendarField::DayOfWeek: v[r] = weekday(t); break;
                case CalendarField::DayOfMonth: v[r] = to_civil(t).day; break;
                case CalendarField::Week: v[r] = iso_week(t); break;
                case CalendarField::Hour: v[r] = to_civil(t).hour; break;
            }
        }
        out.add_column(std::string(calendar_field_name(f)), std::move(v));
    }
    return out;
}

FeatureMatrix build_feature_matrix(const IntervalSeries& series, const EventLog& cleaned_log,
                                   const FeatureSpec& spec) {
    spec.validate();
    if (series.empty()) throw Error("cannot build features from an empty interval series");
    auto m = core_features(series, spec.mtb_category);
    m = add_lag_features(m, spec.lag_depth);
    m = add_rolling_features(m, spec.rolling_window);
    m = add_time_since_features(m, cleaned_log, spec.time_since_major, spec.time_since_breakdown);
    m = add_calendar_features(m, spec.calendar);
    for (std::size_t c = 0; c < m.cols(); ++c)
        for (double x : m.column(c))
            if (!std::isfinite(x)) throw Error("non-finite value in feature '" + m.names()[c] + "'");
    return m;
}

FeatureMatrix attach_regression_target(const FeatureMatrix& m) {
    if (m.rows() < 2) throw Error("regression target needs at least 2 rows");
    auto src = m.column(kSumMinor);
    std::vector<double> y(src.begin() + 1, src.end());
    FeatureMatrix out = m.drop_back(1);
    out.set_target({"next_sum_minor_stop", TargetKind::Regression, std::move(y)});
    return out;
}

std::string ClassificationRule::name() const {
    return kind == Kind::DurationExceeds ? "duration_exceeds" : "breakdown_occurs";
}

FeatureMatrix attach_classification_target(const FeatureMatrix& m, const ClassificationRule& rule) {
    if (m.rows() < 2) throw Error("classification target needs at least 2 rows");
    std::vector<double> y(m.rows() - 1);
    if (rule.kind == ClassificationRule::Kind::DurationExceeds) {
        auto src = m.column(kSumMinor);
        for (std::size_t r = 0; r + 1 < m.rows(); ++r) y[r] = src[r + 1] > rule.threshold_s ? 1.0 : 0.0;
    } else {
        auto src = m.column(kCountBreakdown);
        for (std::size_t r = 0; r + 1 < m.rows(); ++r) y[r] = src[r + 1] >= 1.0 ? 1.0 : 0.0;
    }
    FeatureMatrix out = m.drop_back(1);
    out.set_target({"next_" + rule.name(), TargetKind::Binary, std::move(y)});
    return out;
}

std::pair<FeatureMatrix, FeatureMatrix> temporal_split(const FeatureMatrix& m, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error("train_fraction must lie in (0, 1)");
    for (std::size_t r = 1; r < m.rows(); ++r)
        if (m.index()[r] <= m.index()[r - 1])
            throw Error("temporal_split requires strictly increasing row timestamps");
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(m.rows()) * train_fraction));
    if (n_train == 0 || n_train == m.rows()) throw Error("temporal split leaves an empty side");
    return {m.slice(0, n_train), m.slice(n_train, m.rows())};
}

void write_feature_matrix(const FeatureMatrix& m, std::ostream& out) {
    out << "timestamp";
    for (const auto& n : m.names()) out << ',' << n;
    if (m.target()) out << ',' << m.target()->name;
    out << '\n';
    char buf[64];
    auto put = [&](double v) {
        int len = std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << std::string_view(buf, static_cast<std::size_t>(len));
    };
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out << format_timestamp_seconds(m.index()[r]);
        for (std::size_t c = 0; c < m.cols(); ++c) put(m.column(c)[r]);
        if (m.target()) put(m.target()->values[r]);
        out << '\n';
    }
}

std::string feature_manifest_json(const FeatureMatrix& m, const FeatureSpec& spec) {
    nlohmann::ordered_json j;
    j["rows"] = m.rows();
    j["columns"] = m.names();
    if (m.target()) {
        j["target"] = {{"name", m.target()->name},
                       {"kind", m.target()->kind == TargetKind::Binary ? "binary" : "regression"}};
    }
    nlohmann::ordered_json s;
    s["lag_depth"] = spec.lag_depth;
    s["rolling_window"] = spec.rolling_window;
    s["mtb_category"] = std::string(category_name(spec.mtb_category));
    std::vector<std::string> cal;
    for (auto f : spec.calendar) cal.emplace_back(calendar_field_name(f));
    s["calendar"] = cal;
    s["time_since_major"] = spec.time_since_major;
    s["time_since_breakdown"] = spec.time_since_breakdown;
    j["spec"] = s;
    return j.dump(2);
}

}  // namespace stopcast
