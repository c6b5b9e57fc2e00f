//! Per-iteration trace records and their CSV form.
//!
//! Layout: optional `# key=value` comment lines, a header row, then one row
//! per record. Reals are written as `{:.16e}` (17 significant digits, exact
//! round trip); absent values are empty fields; lines end with LF.

use std::fmt::Write as _;

use rofdd_core::TraceEntry;

pub const HEADER: &str = "iteration,dual_energy,primal_energy,relative_gap,jump_norm,max_inner_iters,wall_clock_seconds,virtual_wall_clock_seconds";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub dual_energy: f64,
    pub primal_energy: f64,
    /// `(E - E*) / E*` when a reference energy is known.
    pub relative_gap: Option<f64>,
    pub jump_norm: Option<f64>,
    pub max_inner_iters: usize,
    /// Cumulative wall-clock seconds since the solver started.
    pub wall_clock_seconds: Option<f64>,
    /// Cumulative wall-clock seconds with subdomain work counted as the
    /// slowest subdomain only.
    pub virtual_wall_clock_seconds: Option<f64>,
}

impl TraceRecord {
    pub fn from_entry(e: &TraceEntry, reference_energy: Option<f64>) -> Self {
        Self {
            iteration: e.iteration,
            dual_energy: e.dual_energy,
            primal_energy: e.primal_energy,
            relative_gap: reference_energy.map(|r| (e.primal_energy - r) / r),
            jump_norm: e.jump_norm,
            max_inner_iters: e.max_inner_iterations,
            wall_clock_seconds: None,
            virtual_wall_clock_seconds: None,
        }
    }
}

fn real(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").expect("write to String");
}

fn opt(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        real(out, v);
    }
}

pub fn write_trace_csv(records: &[TraceRecord], comments: &[(String, String)]) -> Vec<u8> {
    let mut out = String::new();
    for (k, v) in comments {
        writeln!(out, "# {k}={v}").expect("write to String");
    }
    out.push_str(HEADER);
    out.push('\n');
    for r in records {
        write!(out, "{},", r.iteration).expect("write to String");
        real(&mut out, r.dual_energy);
        out.push(',');
        real(&mut out, r.primal_energy);
        out.push(',');
        opt(&mut out, r.relative_gap);
        out.push(',');
        opt(&mut out, r.jump_norm);
        write!(out, ",{},", r.max_inner_iters).expect("write to String");
        opt(&mut out, r.wall_clock_seconds);
        out.push(',');
        opt(&mut out, r.virtual_wall_clock_seconds);
        out.push('\n');
    }
    out.into_bytes()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("trace line {line}: {reason}")]
pub struct TraceParseError {
    pub line: usize,
    pub reason: String,
}

/// `key=value` pairs from the comment header.
pub type Comments = Vec<(String, String)>;

/// Parse a trace written by [`write_trace_csv`]; returns the comments and
/// the records.
pub fn parse_trace_csv(text: &str) -> Result<(Comments, Vec<TraceRecord>), TraceParseError> {
    let mut comments = Vec::new();
    let mut records = Vec::new();
    let mut seen_header = false;
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let err = |reason: String| TraceParseError { line: line_no, reason };
        if let Some(c) = line.strip_prefix("# ") {
            let (key, value) = c.split_once('=').ok_or_else(|| err("comment without `=`".into()))?;
            comments.push((key.to_string(), value.to_string()));
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(err(format!("expected header, found {line:?}")));
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(err(format!("expected 8 fields, found {}", f.len())));
        }
        let real = |s: &str| s.parse::<f64>().map_err(|e| err(format!("{s:?}: {e}")));
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { real(s).map(Some) };
        let int = |s: &str| s.parse::<usize>().map_err(|e| err(format!("{s:?}: {e}")));
        records.push(TraceRecord {
            iteration: int(f[0])?,
            dual_energy: real(f[1])?,
            primal_energy: real(f[2])?,
            relative_gap: opt(f[3])?,
            jump_norm: opt(f[4])?,
            max_inner_iters: int(f[5])?,
            wall_clock_seconds: opt(f[6])?,
            virtual_wall_clock_seconds: opt(f[7])?,
        });
    }
    if !seen_header {
        return Err(TraceParseError {
            line: text.lines().count(),
            reason: "missing header".into(),
        });
    }
    Ok((comments, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(k: usize) -> TraceRecord {
        TraceRecord {
            iteration: k,
            dual_energy: 1.0 / 3.0 + k as f64,
            primal_energy: 80.66635593597829,
            relative_gap: Some(1.25e-7),
            jump_norm: None,
            max_inner_iters: 271,
            wall_clock_seconds: Some(0.5),
            virtual_wall_clock_seconds: None,
        }
    }

    #[test]
    fn empty_and_single() {
        assert_eq!(write_trace_csv(&[], &[]), format!("{HEADER}\n").into_bytes());
        let bytes = write_trace_csv(&[record(3)], &[]);
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "3,3.3333333333333335e0,8.0666355935978288e1,1.2499999999999999e-7,,271,5.0000000000000000e-1,"
        );
    }

    #[test]
    fn comments_round_trip() {
        let comments = vec![("solver".to_string(), "pdual-ddm".to_string()), ("alpha".to_string(), "10".to_string())];
        let recs: Vec<TraceRecord> = (0..4).map(record).collect();
        let bytes = write_trace_csv(&recs, &comments);
        assert_eq!(bytes, write_trace_csv(&recs, &comments));
        let (c, r) = parse_trace_csv(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!(c, comments);
        assert_eq!(r, recs);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let bad = format!("{HEADER}\n1,2,3\n");
        assert_eq!(parse_trace_csv(&bad).unwrap_err().line, 2);
        assert!(parse_trace_csv("nonsense\n").is_err());
    }

    proptest! {
        #[test]
        fn twelve_digit_round_trip(j in -1e6f64..1e6, e in 0.0f64..1e9, gap in proptest::option::of(-1.0f64..1.0)) {
            let r = TraceRecord { dual_energy: j, primal_energy: e, relative_gap: gap, ..record(1) };
            let bytes = write_trace_csv(&[r], &[]);
            let (_, back) = parse_trace_csv(std::str::from_utf8(&bytes).unwrap()).unwrap();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
            prop_assert!(close(back[0].dual_energy, j));
            prop_assert!(close(back[0].primal_energy, e));
            prop_assert_eq!(back[0], r);
        }
    }
}
