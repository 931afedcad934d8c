//! Per-step episode records and their CSV form.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use thiserror::Error;

pub const HEADER: [&str; 12] =
    ["t_min", "g_mmol", "g_mgdl", "ghat_mgdl", "chi", "D1", "D2", "u_command", "i_applied", "K1", "K2", "alpha_certified"];

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub t_min: f64,
    pub g_mmol: f64,
    pub g_mgdl: f64,
    pub ghat_mgdl: f64,
    pub chi: f64,
    pub d1: f64,
    pub d2: f64,
    pub u_command: f64,
    pub i_applied: f64,
    pub k1: f64,
    pub k2: f64,
    pub alpha_certified: Option<f64>,
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Nine significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.8e}")
}

/// The value a number takes after a round trip through [`fmt_num`].
pub fn quantize(v: f64) -> f64 {
    fmt_num(v).parse().expect("formatted float parses")
}

impl Row {
    fn values(&self) -> [f64; 11] {
        [self.t_min, self.g_mmol, self.g_mgdl, self.ghat_mgdl, self.chi, self.d1, self.d2, self.u_command, self.i_applied, self.k1, self.k2]
    }

    pub fn quantized(&self) -> Row {
        let q = self.values().map(quantize);
        Row {
            t_min: q[0],
            g_mmol: q[1],
            g_mgdl: q[2],
            ghat_mgdl: q[3],
            chi: q[4],
            d1: q[5],
            d2: q[6],
            u_command: q[7],
            i_applied: q[8],
            k1: q[9],
            k2: q[10],
            alpha_certified: self.alpha_certified.map(quantize),
        }
    }

    pub fn to_csv_line(&self) -> String {
        let mut s = String::new();
        for v in self.values() {
            let _ = write!(s, "{},", fmt_num(v));
        }
        if let Some(a) = self.alpha_certified {
            s.push_str(&fmt_num(a));
        }
        s
    }

    fn parse(line: &str, lineno: usize) -> Result<Row, SeriesError> {
        let err = |msg: String| SeriesError::Parse { line: lineno, msg };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != HEADER.len() {
            return Err(err(format!("expected {} fields, found {}", HEADER.len(), fields.len())));
        }
        let mut v = [0.0; 11];
        for (slot, (f, name)) in v.iter_mut().zip(fields.iter().zip(HEADER)) {
            *slot = f.trim().parse().map_err(|_| err(format!("bad {name}: {f:?}")))?;
        }
        let last = fields[11].trim();
        let alpha = if last.is_empty() { None } else { Some(last.parse().map_err(|_| err(format!("bad alpha_certified: {last:?}")))?) };
        Ok(Row {
            t_min: v[0],
            g_mmol: v[1],
            g_mgdl: v[2],
            ghat_mgdl: v[3],
            chi: v[4],
            d1: v[5],
            d2: v[6],
            u_command: v[7],
            i_applied: v[8],
            k1: v[9],
            k2: v[10],
            alpha_certified: alpha,
        })
    }
}

pub fn write_csv<W: Write>(mut out: W, rows: &[Row]) -> io::Result<()> {
    writeln!(out, "{}", HEADER.join(","))?;
    for r in rows {
        writeln!(out, "{}", r.to_csv_line())?;
    }
    out.flush()
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<Row>, SeriesError> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != HEADER.join(",") {
                return Err(SeriesError::Parse { line: 1, msg: "unexpected header".into() });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        rows.push(Row::parse(&line, i + 1)?);
    }
    Ok(rows)
}
