"""Stoppage forecasting and classification for packing-line event logs."""

from ._stopcast import (
    BoostedModel,
    EventLog,
    Forest,
    StopcastError,
    arima,
    average_ensemble_forecast,
    benchmark_forecast,
    build_features,
    categorize_stop,
    classification_report,
    clean_event_log,
    config_hash,
    default_config,
    enumerate_combinations,
    fit_forest,
    fit_gradient_boosting,
    generate_event_log,
    holt_winters,
    in_sample_errors,
    mase,
    parse_event_log,
    point_metrics,
    resample,
    round_percent,
    run_classification,
    run_forecast,
    summarize_log,
)

__all__ = [name for name in dir() if not name.startswith("_")]
