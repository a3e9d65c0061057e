//! Table serialization: CSV with a fixed column order or pretty JSON.

use serde::Serialize;
use std::fmt::Write as _;

use crate::error::Result;

use super::experiment::TableRow;

/// Output format for tables and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(crate::error::Error::invalid(format!(
                "unknown format {other:?} (expected csv or json)"
            ))),
        }
    }
}

/// Fixed CSV column order.
pub const CSV_HEADER: &str = "n,gamma,p,cov_fs,cov_fs_var,width_fs,width_fs_var,\
cov_wald,cov_wald_var,width_wald,width_wald_var,ipr,ipr_var,\
v_hat,v_bench,r_hat,r_bench,b_hat,b_emp";

fn fmt_num(out: &mut String, v: f64) {
    // Six significant digits; scientific notation keeps tiny diagnostics
    // readable without losing precision.
    let _ = write!(out, "{v:.6e}");
}

fn fmt_opt(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        fmt_num(out, v);
    }
}

/// Render rows as CSV with the fixed header.
pub fn rows_to_csv(rows: &[TableRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},", r.n);
        fmt_num(&mut out, r.gamma);
        let _ = write!(out, ",{},", r.p);
        for v in [
            r.cov_fs,
            r.cov_fs_var,
            r.width_fs,
            r.width_fs_var,
            r.cov_wald,
            r.cov_wald_var,
            r.width_wald,
            r.width_wald_var,
            r.ipr,
            r.ipr_var,
            r.v_hat,
            r.v_bench,
            r.r_hat,
            r.r_bench,
        ] {
            fmt_num(&mut out, v);
            out.push(',');
        }
        fmt_opt(&mut out, r.b_hat);
        out.push(',');
        fmt_opt(&mut out, r.b_emp);
        out.push('\n');
    }
    out
}

/// Render any serializable report as pretty JSON.
pub fn rows_to_json<T: Serialize>(rows: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row(b: Option<f64>) -> TableRow {
        TableRow {
            n: 10,
            gamma: 0.5,
            p: 4,
            cov_fs: 1.0,
            cov_fs_var: 0.0,
            width_fs: 2.5,
            width_fs_var: 0.01,
            cov_wald: 0.9,
            cov_wald_var: 0.001,
            width_wald: 1.2,
            width_wald_var: 0.02,
            ipr: 1.5,
            ipr_var: 0.1,
            v_hat: 0.25,
            v_bench: 0.3,
            r_hat: 0.5,
            r_bench: 0.6,
            b_hat: b,
            b_emp: b,
        }
    }

    #[test]
    fn csv_shape_and_significant_digits() {
        let csv = rows_to_csv(&[sample_row(Some(0.123456789))]);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(header.split(',').count(), 19);
        assert!(header.starts_with("n,gamma,p,cov_fs"));
        let row = lines.next().unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 19);
        assert_eq!(fields[0], "10");
        assert_eq!(fields[2], "4");
        assert_eq!(fields[17], "1.234568e-1");
        assert!(lines.next().is_none());
    }

    #[test]
    fn csv_empty_bias_cells() {
        let csv = rows_to_csv(&[sample_row(None)]);
        let row = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[17], "");
        assert_eq!(fields[18], "");
    }

    #[test]
    fn json_round_trips() {
        let text = rows_to_json(&vec![sample_row(Some(1.0))]).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed[0]["n"], 10);
        assert!(parsed[0]["b_hat"].as_f64().is_some());
    }
}
