//! Text formats: field snapshots and run-report time series.
//!
//! Numbers are written with 17 significant digits so that they round-trip exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::observables::RunReport;
use crate::solver::{Field, Grid};

/// 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `# grid: n,cells...,spacing...,origin...,t=<time>` then one value per line.
pub fn field_to_csv(field: &Field, t: f64) -> String {
    let g = field.grid();
    let mut header = vec![g.dim().to_string()];
    header.extend(g.cells().iter().map(|c| c.to_string()));
    header.extend(g.spacing().iter().map(|&h| fmt_num(h)));
    header.extend(g.origin().iter().map(|&o| fmt_num(o)));
    header.push(format!("t={}", fmt_num(t)));
    let mut out = format!("# grid: {}\n", header.join(","));
    for &v in field.values() {
        writeln!(out, "{}", fmt_num(v)).expect("write to string");
    }
    out
}

pub fn field_from_csv(text: &str) -> Result<(Field, f64)> {
    let bad = |msg: &str| Error::Config(format!("malformed snapshot: {msg}"));
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix("# grid:"))
        .ok_or_else(|| bad("missing header"))?;
    let parts: Vec<&str> = header.split(',').map(str::trim).collect();
    let n: usize = parts.first().and_then(|s| s.parse().ok()).ok_or_else(|| bad("dimension"))?;
    if parts.len() != 2 + 3 * n {
        return Err(bad("header length"));
    }
    let parse_f = |s: &str| s.parse::<f64>().map_err(|_| bad(s));
    let cells = parts[1..=n]
        .iter()
        .map(|s| s.parse::<usize>().map_err(|_| bad(s)))
        .collect::<Result<Vec<_>>>()?;
    let spacing = parts[1 + n..1 + 2 * n].iter().map(|s| parse_f(s)).collect::<Result<Vec<_>>>()?;
    let origin = parts[1 + 2 * n..1 + 3 * n].iter().map(|s| parse_f(s)).collect::<Result<Vec<_>>>()?;
    let t = parts[1 + 3 * n].strip_prefix("t=").ok_or_else(|| bad("time")).and_then(parse_f)?;
    let values = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_f(l.trim()))
        .collect::<Result<Vec<_>>>()?;
    Ok((Field::new(Grid::new(cells, spacing, origin)?, values)?, t))
}

fn exponent_label(p: crate::exponents::Exponent) -> String {
    match p {
        crate::exponents::Exponent::Infinite => "inf".into(),
        crate::exponents::Exponent::Finite(v) => format!("{v}"),
    }
}

/// Columns `t, norm_<p>…, tv, entropy_mass_<r>…, width_axis_<j>…`; `tv` is `nan` for n > 1.
pub fn report_to_csv(report: &RunReport) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend(report.norms.iter().map(|s| format!("norm_{}", exponent_label(s.p))));
    cols.push("tv".into());
    cols.extend(report.entropy_mass.iter().map(|s| format!("entropy_mass_{}", s.r)));
    cols.extend((0..report.support_widths.len()).map(|j| format!("width_axis_{j}")));
    let mut out = cols.join(",");
    out.push('\n');
    for (i, &t) in report.times.iter().enumerate() {
        let mut row = vec![fmt_num(t)];
        row.extend(report.norms.iter().map(|s| fmt_num(s.values[i])));
        row.push(report.tv.as_ref().map_or_else(|| "nan".to_string(), |tv| fmt_num(tv[i])));
        row.extend(report.entropy_mass.iter().map(|s| fmt_num(s.values[i])));
        row.extend(report.support_widths.iter().map(|w| fmt_num(w[i])));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::Exponent;
    use crate::observables::Observers;

    #[test]
    fn snapshot_header_layout() {
        let grid = Grid::new(vec![3, 4], vec![0.5, 0.25], vec![-1.0, 0.0]).unwrap();
        let f = Field::from_fn(grid, |y| y[0] + y[1]);
        let text = field_to_csv(&f, 1.5);
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("# grid: 2,3,4,5.0000000000000000e-1,"));
        assert!(header.ends_with(",t=1.5000000000000000e0"));
        assert_eq!(text.lines().count(), 13);
        let (back, t) = field_from_csv(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(t, 1.5);
        assert!(field_from_csv("nonsense").is_err());
    }

    #[test]
    fn report_columns() {
        let grid = Grid::covering(&[0.0], &[1.0], &[10]).unwrap();
        let f = Field::from_fn(grid, |y| y[0]);
        let obs = Observers {
            norms: vec![Exponent::Finite(1.0), Exponent::Infinite],
            entropy_indices: vec![2.0],
            ..Observers::default()
        };
        let report = RunReport::from_snapshots(&f, &[0.0, 1.0], &[f.clone(), f.clone()], &obs).unwrap();
        let csv = report_to_csv(&report);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,norm_1,norm_inf,tv,entropy_mass_2,width_axis_0");
        assert_eq!(lines.count(), 2);
    }
}
