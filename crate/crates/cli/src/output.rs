//! CSV emission for outage estimates.

use std::io::Write;
use std::path::Path;

use wpcr_core::montecarlo::OutageEstimate;

pub const CSV_HEADER: &str =
    "scheme,sweep_variable,sweep_value,trials,outages,outage_prob,ci_low,ci_high,seed";

/// Renders the estimates as CSV, rows sorted by `(scheme, sweep_value)`.
pub fn render_csv(estimates: &[OutageEstimate]) -> String {
    let mut rows: Vec<&OutageEstimate> = estimates.iter().collect();
    rows.sort_by(|a, b| {
        a.scheme.name().cmp(&b.scheme.name()).then(
            a.sweep_value
                .partial_cmp(&b.sweep_value)
                .expect("finite sweep values"),
        )
    });
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for e in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            e.scheme.name(),
            e.sweep_variable,
            e.sweep_value,
            e.trials,
            e.outages,
            e.probability,
            e.ci_low,
            e.ci_high,
            e.master_seed,
        ));
    }
    out
}

/// Writes the CSV to `path`.
pub fn emit_csv(estimates: &[OutageEstimate], path: &Path) -> std::io::Result<()> {
    assert!(!estimates.is_empty(), "nothing to emit");
    let mut f = std::fs::File::create(path)?;
    f.write_all(render_csv(estimates).as_bytes())?;
    Ok(())
}
