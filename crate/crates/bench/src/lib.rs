//! Fixed benchmark inputs shared by the criterion benches.

use evsched_core::{generate_instance, EventPointConfig, Instance, Series, TriangleMode};

/// Seeded instance of a series preset; `full` selects the full-size parameters.
pub fn instance(series: Series, full: bool, seed: u64) -> Instance {
    let preset = if full { series.full() } else { series.desk() };
    generate_instance(&preset.config(seed, TriangleMode::MetricClosure))
        .expect("preset configs are valid")
}

/// Event points used by the preset.
pub fn points(series: Series, full: bool) -> EventPointConfig {
    let preset = if full { series.full() } else { series.desk() };
    EventPointConfig::new(preset.event_points).expect("presets have event points")
}
