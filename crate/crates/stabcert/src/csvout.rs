//! CSV artifacts: one header row, numbers in `{:.16e}` (17 significant digits).

use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use stabcert_core::stabilizer::SweepCell;
use stabcert_core::ObservabilityReport;

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Writes `header` then `rows` to any sink.
pub fn write_table<W: Write>(sink: W, header: &[String], rows: &[Vec<String>]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table_file(path: &Path, header: &[String], rows: &[Vec<String>]) -> csv::Result<()> {
    write_table(File::create(path)?, header, rows)
}

fn names(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}_{i}"))
}

/// Row-major matrix dump with columns `c_1..c_n`.
pub fn matrix_table(m: &DMatrix<f64>) -> (Vec<String>, Vec<Vec<String>>) {
    let header = names("c", m.ncols()).collect();
    let rows = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| num(m[(i, j)])).collect())
        .collect();
    (header, rows)
}

/// Control samples `t, u_1..u_m`.
pub fn control_table(times: &[f64], control: &DMatrix<f64>) -> (Vec<String>, Vec<Vec<String>>) {
    let header = std::iter::once("t".to_string())
        .chain(names("u", control.ncols()))
        .collect();
    let rows = times
        .iter()
        .enumerate()
        .map(|(i, t)| {
            std::iter::once(num(*t))
                .chain(control.row(i).iter().map(|u| num(*u)))
                .collect()
        })
        .collect();
    (header, rows)
}

/// Trajectory `t, norm` and, when `with_states`, `y_1..y_n`.
pub fn trajectory_table(
    times: &[f64],
    states: &[DVector<f64>],
    with_states: bool,
) -> (Vec<String>, Vec<Vec<String>>) {
    let n = states.first().map_or(0, |s| s.len());
    let mut header = vec!["t".to_string(), "norm".to_string()];
    if with_states {
        header.extend(names("y", n));
    }
    let rows = times
        .iter()
        .zip(states)
        .map(|(t, y)| {
            let mut row = vec![num(*t), num(y.norm())];
            if with_states {
                row.extend(y.iter().map(|v| num(*v)));
            }
            row
        })
        .collect();
    (header, rows)
}

pub fn sweep_table(cells: &[SweepCell]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["alpha", "T", "mu", "ln_alpha_over_T", "finite"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = cells
        .iter()
        .map(|c| {
            vec![
                num(c.alpha),
                num(c.horizon),
                num(c.mu),
                num(c.rate),
                c.is_finite().to_string(),
            ]
        })
        .collect();
    (header, rows)
}

/// `α`-curve of the weak constant.
pub fn curve_table(reports: &[ObservabilityReport]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["alpha", "mu", "finite", "method"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                num(r.alpha),
                num(r.value),
                r.is_finite().to_string(),
                r.method.as_str().to_string(),
            ]
        })
        .collect();
    (header, rows)
}
