//! CSV exports and the generated plotting script.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use scout_core::samplers::{CholeskySnapshot, RunResult};

use crate::HarnessError;

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), HarnessError> {
    w.flush().map_err(|e| HarnessError::io(path, e))
}

fn push_row(line: &mut String, values: &[f64]) {
    for v in values {
        let _ = write!(line, ",{v}");
    }
}

/// Writes `samples.csv` with header `iter,dim_0,...,accepted,chain`.
///
/// Every `stride`-th row of the whole run is written, burn-in included;
/// `chain` is 0 for the recorded main chain.
pub fn write_samples_csv(path: &Path, result: &RunResult, stride: usize) -> Result<usize, HarnessError> {
    let mut w = create(path)?;
    let mut line = String::from("iter");
    for i in 0..result.dim {
        let _ = write!(line, ",dim_{i}");
    }
    line.push_str(",accepted,chain\n");
    let mut rows = 0;
    for t in (0..result.len()).step_by(stride.max(1)) {
        let _ = write!(line, "{t}");
        push_row(&mut line, result.row(t));
        let _ = writeln!(line, ",{},0", u8::from(result.accepted[t]));
        rows += 1;
        if line.len() > 1 << 16 {
            w.write_all(line.as_bytes()).map_err(|e| HarnessError::io(path, e))?;
            line.clear();
        }
    }
    w.write_all(line.as_bytes()).map_err(|e| HarnessError::io(path, e))?;
    finish(w, path)?;
    Ok(rows)
}

/// Retained iterations `burn_in, burn_in + stride, ...`.
fn retained_rows(result: &RunResult, burn_in: usize, stride: usize) -> impl Iterator<Item = usize> {
    (burn_in.min(result.len())..result.len()).step_by(stride.max(1))
}

/// Scatter export of axes `(a, b)` over retained rows, columns
/// `iter,a,b,accepted`.
pub fn emit_projection_csv(
    path: &Path,
    result: &RunResult,
    axes: (usize, usize),
    burn_in: usize,
    stride: usize,
) -> Result<usize, HarnessError> {
    let (a, b) = axes;
    if a >= result.dim || b >= result.dim {
        return Err(HarnessError::Config(format!(
            "projection ({a}, {b}) is invalid for dimension {}",
            result.dim
        )));
    }
    let mut w = create(path)?;
    let mut out = String::from("iter,a,b,accepted\n");
    let mut rows = 0;
    for t in retained_rows(result, burn_in, stride) {
        let row = result.row(t);
        let _ = writeln!(out, "{t},{},{},{}", row[a], row[b], u8::from(result.accepted[t]));
        rows += 1;
    }
    w.write_all(out.as_bytes()).map_err(|e| HarnessError::io(path, e))?;
    finish(w, path)?;
    Ok(rows)
}

/// Per-coordinate trace of retained rows, columns `iter,dim_0,...`.
pub fn emit_trace_csv(path: &Path, result: &RunResult, burn_in: usize, stride: usize) -> Result<usize, HarnessError> {
    if burn_in >= result.len() {
        return Err(HarnessError::Config("no rows remain after burn-in".into()));
    }
    let mut w = create(path)?;
    let mut out = String::from("iter");
    for i in 0..result.dim {
        let _ = write!(out, ",dim_{i}");
    }
    out.push('\n');
    let mut rows = 0;
    for t in retained_rows(result, burn_in, stride) {
        let _ = write!(out, "{t}");
        push_row(&mut out, result.row(t));
        out.push('\n');
        rows += 1;
    }
    w.write_all(out.as_bytes()).map_err(|e| HarnessError::io(path, e))?;
    finish(w, path)?;
    Ok(rows)
}

/// Lower-triangular factor snapshots, columns `iter,l_i_j` row by row.
pub fn write_cholesky_csv(path: &Path, dim: usize, snapshots: &[CholeskySnapshot]) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    let mut out = String::from("iter");
    for i in 0..dim {
        for j in 0..=i {
            let _ = write!(out, ",l_{i}_{j}");
        }
    }
    out.push('\n');
    for s in snapshots {
        let _ = write!(out, "{}", s.iteration);
        for i in 0..dim {
            for j in 0..=i {
                let _ = write!(out, ",{}", s.factor.get(i, j));
            }
        }
        out.push('\n');
    }
    w.write_all(out.as_bytes()).map_err(|e| HarnessError::io(path, e))?;
    finish(w, path)
}

/// One sampler row as seen by the plotting script.
pub struct PlotRow<'a> {
    pub label: &'a str,
    /// Directory of the first replicate, relative to the script.
    pub dir: String,
    pub dim: usize,
}

/// gnuplot script drawing scatter plots, projections and traces.
pub fn plot_script(
    name: &str,
    rows: &[PlotRow<'_>],
    projections: &[(usize, usize)],
    trace: bool,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {name}: run with `gnuplot plot.gp` from this directory");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size 900,700");
    let _ = writeln!(s, "set key off");
    for row in rows {
        if row.dim >= 2 {
            let _ = writeln!(s, "set output '{}/scatter.png'", row.dir);
            let _ = writeln!(s, "set title '{}'", row.label);
            let _ = writeln!(s, "plot '{}/samples.csv' every ::1 using 2:3 with dots lc rgb 'blue'", row.dir);
        }
        for (a, b) in projections {
            let _ = writeln!(s, "set output '{}/projection_{a}_{b}.png'", row.dir);
            let _ = writeln!(s, "set title '{} (dim {a} vs dim {b})'", row.label);
            let _ = writeln!(
                s,
                "plot '{}/projection_{a}_{b}.csv' every ::1 using 2:3 with dots lc rgb 'blue'",
                row.dir
            );
        }
        if trace {
            let _ = writeln!(s, "set output '{}/trace.png'", row.dir);
            let _ = writeln!(s, "set multiplot layout {},1 title '{}'", row.dim, row.label);
            for i in 0..row.dim {
                let _ = writeln!(
                    s,
                    "plot '{}/trace.csv' every ::1 using 1:{} with lines lc rgb 'black'",
                    row.dir,
                    i + 2
                );
            }
            let _ = writeln!(s, "unset multiplot");
        }
    }
    s
}
