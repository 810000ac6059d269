//! Experiment result rows, deterministic CSV rendering, and the
//! least-squares line fit the sweep studies report.
//!
//! The CSV schema is fixed — one header, eleven columns:
//!
//! ```text
//! experiment,method,sweep_label,sweep_value,metric,value,stderr,
//! repetitions,seed,paper_reference_value,paper_ref_id
//! ```
//!
//! `sweep_label` names categorical axis points (contamination laws in the
//! location study); `sweep_value` is the numeric axis (ε, d, lag, n) and
//! doubles as the categorical column index. Optional fields render as empty
//! strings. Rows are sorted by `(experiment, method, metric, sweep_value,
//! sweep_label)` before writing and floats are formatted with Rust's
//! shortest-roundtrip `Display` (always a `.` decimal point), so rerunning
//! an experiment with the same seed reproduces the file byte for byte.

use std::io::Write;
use std::path::Path;

use crate::{Error, Result};

/// One aggregated experiment result (typically a mean over repetitions).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    /// Experiment name, e.g. `"location_table"`.
    pub experiment: String,
    /// Estimator or summary the row belongs to, e.g. `"mmd"`, `"fit"`.
    pub method: String,
    /// Categorical axis label (empty for purely numeric sweeps).
    pub sweep_label: String,
    /// Numeric axis value: ε, dimension, lag, sample size, column index.
    pub sweep_value: f64,
    /// Metric name, e.g. `"sqrt_mse_normalized"`, `"mae"`, `"rho"`.
    pub metric: String,
    /// Metric value (nonnegative for error metrics by construction).
    pub value: f64,
    /// Standard error of `value` across repetitions (0 when not applicable).
    pub stderr: f64,
    /// Number of repetitions aggregated into `value`.
    pub repetitions: u32,
    /// Base seed of the run that produced the row.
    pub seed: u64,
    /// Published reference value for this cell, when one exists.
    pub paper_reference_value: Option<f64>,
    /// Identifier of the published table/figure the reference comes from.
    /// Present exactly when `paper_reference_value` is.
    pub paper_ref_id: Option<String>,
}

impl ResultRow {
    /// Row with no published reference attached.
    pub fn new(
        experiment: &str,
        method: &str,
        sweep_label: &str,
        sweep_value: f64,
        metric: &str,
        value: f64,
        stderr: f64,
        repetitions: u32,
        seed: u64,
    ) -> Self {
        ResultRow {
            experiment: experiment.into(),
            method: method.into(),
            sweep_label: sweep_label.into(),
            sweep_value,
            metric: metric.into(),
            value,
            stderr,
            repetitions,
            seed,
            paper_reference_value: None,
            paper_ref_id: None,
        }
    }

    /// Attach a published reference value and its table/figure id.
    pub fn with_reference(mut self, value: f64, ref_id: &str) -> Self {
        self.paper_reference_value = Some(value);
        self.paper_ref_id = Some(ref_id.into());
        self
    }

    /// Schema invariant: a reference value and its id travel together.
    fn validate(&self) -> Result<()> {
        if self.paper_reference_value.is_some() != self.paper_ref_id.is_some() {
            return Err(Error::Config(format!(
                "row {}/{}/{}: paper_reference_value and paper_ref_id must both be set or both empty",
                self.experiment, self.method, self.metric
            )));
        }
        Ok(())
    }
}

/// The fixed CSV header.
pub const CSV_HEADER: &str = "experiment,method,sweep_label,sweep_value,metric,value,stderr,repetitions,seed,paper_reference_value,paper_ref_id";

/// Render rows to CSV text (RFC-4180 quoting, `\n` line ends, sorted).
///
/// Sorting plus shortest-roundtrip float formatting makes the output a pure
/// function of the row values, which is what the byte-reproducibility
/// guarantee rests on.
pub fn render_csv(rows: &[ResultRow]) -> Result<String> {
    for row in rows {
        row.validate()?;
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&rows[a], &rows[b]);
        ra.experiment
            .cmp(&rb.experiment)
            .then_with(|| ra.method.cmp(&rb.method))
            .then_with(|| ra.metric.cmp(&rb.metric))
            .then_with(|| ra.sweep_value.total_cmp(&rb.sweep_value))
            .then_with(|| ra.sweep_label.cmp(&rb.sweep_label))
    });

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))
        .map_err(|e| Error::Config(format!("csv write failed: {e}")))?;
    for &i in &order {
        let r = &rows[i];
        w.write_record([
            r.experiment.as_str(),
            r.method.as_str(),
            r.sweep_label.as_str(),
            &format_f64(r.sweep_value),
            r.metric.as_str(),
            &format_f64(r.value),
            &format_f64(r.stderr),
            &r.repetitions.to_string(),
            &r.seed.to_string(),
            &r.paper_reference_value.map(format_f64).unwrap_or_default(),
            r.paper_ref_id.as_deref().unwrap_or(""),
        ])
        .map_err(|e| Error::Config(format!("csv write failed: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("csv flush failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(format!("csv is not utf-8: {e}")))
}

/// Render and write rows to `path`.
pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let text = render_csv(rows)?;
    let mut f = std::fs::File::create(path)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(text.as_bytes())
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

/// Locale-independent float field: shortest representation that round-trips,
/// `.` decimal separator, empty never.
fn format_f64(v: f64) -> String {
    format!("{v}")
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination `1 − SS_res/SS_tot`.
    pub r_squared: f64,
}

/// Least-squares line through `(xs[i], ys[i])`.
///
/// Needs at least two points and nonzero x-variance. When the ys are exactly
/// constant the fit is that constant with `r_squared = 1`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::NotEnoughPoints { needed: 2, got: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "xs",
            reason: "x values are all equal; the slope is undefined".into(),
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LinearFit { slope, intercept, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn row(method: &str, sweep: f64, metric: &str, value: f64) -> ResultRow {
        ResultRow::new("exp", method, "", sweep, metric, value, 0.01, 10, 42)
    }

    #[test]
    fn csv_has_fixed_header_and_sorted_rows() {
        let rows = vec![
            row("b", 2.0, "err", 0.2),
            row("a", 1.0, "err", 0.1),
            row("a", 0.5, "err", 0.05),
        ];
        let text = render_csv(&rows).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("exp,a,,0.5,"));
        assert!(lines[2].starts_with("exp,a,,1,"));
        assert!(lines[3].starts_with("exp,b,,2,"));
    }

    #[test]
    fn csv_rendering_is_byte_stable_under_input_order() {
        let a = vec![row("m", 1.0, "x", 0.5), row("m", 2.0, "x", 0.25)];
        let b = vec![row("m", 2.0, "x", 0.25), row("m", 1.0, "x", 0.5)];
        assert_eq!(render_csv(&a).unwrap(), render_csv(&b).unwrap());
    }

    #[test]
    fn reference_fields_travel_together() {
        let good = row("m", 1.0, "x", 0.5).with_reference(0.51, "Table 1");
        let text = render_csv(&[good]).unwrap();
        assert!(text.contains("0.51,Table 1"));

        let mut bad = row("m", 1.0, "x", 0.5);
        bad.paper_reference_value = Some(0.5);
        assert!(render_csv(&[bad]).is_err());
    }

    #[test]
    fn labels_with_commas_are_quoted() {
        let mut r = row("mean", 0.0, "err", 1.0);
        r.sweep_label = "N(5,I)".into();
        let text = render_csv(&[r]).unwrap();
        assert!(text.contains("\"N(5,I)\""), "{text}");
    }

    #[test]
    fn floats_render_with_dot_decimal_and_roundtrip() {
        assert_eq!(format_f64(0.1), "0.1");
        assert_eq!(format_f64(2.0), "2");
        assert_eq!(format_f64(1.25e-7), "0.000000125");
        let v = 0.1 + 0.2;
        assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn linear_fit_recovers_an_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        assert_abs_diff_eq!(fit.slope, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_fit_r_squared_drops_with_noise() {
        // Anscombe-style check against values computed by hand:
        // xs = 0..4, ys = x + alternating ±1 noise.
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [1.0, 0.0, 3.0, 2.0, 5.0];
        let fit = linear_fit(&xs, &ys).unwrap();
        // mx=2, my=2.2, sxy=10, sxx=10 → slope=1, intercept=0.2.
        assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 0.2, epsilon = 1e-12);
        // residuals (0.8, −1.2, 0.8, −1.2, 0.8): ss_res=4.8, ss_tot=14.8.
        assert_abs_diff_eq!(fit.r_squared, 1.0 - 4.8 / 14.8, epsilon = 1e-12);
    }

    #[test]
    fn linear_fit_rejects_degenerate_inputs() {
        assert!(linear_fit(&[1.0], &[2.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(linear_fit(&[1.0, 2.0], &[2.0]).is_err());
        let flat = linear_fit(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(flat.slope, 0.0);
        assert_eq!(flat.r_squared, 1.0);
    }
}
