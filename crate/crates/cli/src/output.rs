//! CSV writers. Floats use 17 significant digits so values round-trip exactly.

use std::io::Write;

use varfrac::bounds::SuiteRow;
use varfrac::sir::SirReport;
use varfrac::Trajectory;

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Time nodes `0, stride, 2·stride, …` and always the last one.
pub fn sampled_nodes(steps: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..=steps).filter(move |k| k % stride == 0 || *k == steps)
}

/// Columns `t, x, u`.
pub fn write_trajectory(out: impl Write, u: &Trajectory, stride: usize) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "u"])?;
    let time = u.time();
    for k in sampled_nodes(time.steps(), stride) {
        let t = float(time.t(k));
        for (x, v) in u.grid().points().iter().zip(u.slice(k)) {
            w.write_record([t.as_str(), &float(*x), &float(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `t, x, S, I, R`.
pub fn write_sir(out: impl Write, report: &SirReport, stride: usize) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "S", "I", "R"])?;
    let time = report.s.time();
    for k in sampled_nodes(time.steps(), stride) {
        let t = float(time.t(k));
        let (s, i, r) = (report.s.slice(k), report.i.slice(k), report.r.slice(k));
        for (j, x) in report.s.grid().points().iter().enumerate() {
            w.write_record([t.as_str(), &float(*x), &float(s[j]), &float(i[j]), &float(r[j])])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `t, defect_norm, total_norm`.
pub fn write_sir_diagnostics(out: impl Write, report: &SirReport, stride: usize) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "defect_norm", "total_norm"])?;
    let steps = report.diagnostics.len() - 1;
    for k in sampled_nodes(steps, stride) {
        let d = &report.diagnostics[k];
        w.write_record([float(d.t), float(d.defect_norm), float(d.total_norm)])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `predicate, samples, violations, worst_margin`.
pub fn write_suites(out: impl Write, rows: &[SuiteRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["predicate", "samples", "violations", "worst_margin"])?;
    for r in rows {
        w.write_record([
            r.predicate.to_string(),
            r.samples.to_string(),
            r.violations.to_string(),
            float(r.worst_margin),
        ])?;
    }
    w.flush()?;
    Ok(())
}
