//! Time-series CSV persistence.

use std::io::{self, BufRead, Write};

use num_complex::Complex64;

use super::integrate::SimulationResult;
use crate::metrics::FieldSeries;

pub const SERIES_HEADER: &str = "t_s,re_Ein,im_Ein,re_Eout,im_Eout,abs2_Ein,abs2_Eout,abs_sigma23";

/// Writes one row per recorded sample. |σ₂₃| is divided by √N so that it
/// reads as the stored single-excitation amplitude.
pub fn write_series_csv<W: Write>(result: &SimulationResult, mut w: W) -> io::Result<()> {
    writeln!(w, "{SERIES_HEADER}")?;
    let scale = if result.ensemble_size > 0.0 {
        result.ensemble_size.sqrt().recip()
    } else {
        1.0
    };
    for i in 0..result.len() {
        let (ein, eout) = (result.e_in[i], result.e_out[i]);
        writeln!(
            w,
            "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
            result.t[i],
            ein.re,
            ein.im,
            eout.re,
            eout.im,
            ein.norm_sqr(),
            eout.norm_sqr(),
            result.sigma23[i].norm() * scale,
        )?;
    }
    Ok(())
}

/// Series read back from CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub e_in: Vec<Complex64>,
    pub e_out: Vec<Complex64>,
    pub abs2_e_in: Vec<f64>,
    pub abs2_e_out: Vec<f64>,
    pub abs_sigma23: Vec<f64>,
}

impl TimeSeries {
    pub fn fields(&self) -> FieldSeries {
        FieldSeries {
            t: self.t.clone(),
            input: self.abs2_e_in.clone(),
            output: self.abs2_e_out.clone(),
        }
    }
}

pub fn read_series_csv<R: BufRead>(r: R) -> io::Result<TimeSeries> {
    let bad = |line: usize, msg: &str| io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"));
    let mut out = TimeSeries::default();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != SERIES_HEADER {
                return Err(bad(1, "unexpected header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(i + 1, "malformed number"))?;
        if v.len() != 8 {
            return Err(bad(i + 1, "expected 8 columns"));
        }
        out.t.push(v[0]);
        out.e_in.push(Complex64::new(v[1], v[2]));
        out.e_out.push(Complex64::new(v[3], v[4]));
        out.abs2_e_in.push(v[5]);
        out.abs2_e_out.push(v[6]);
        out.abs_sigma23.push(v[7]);
    }
    Ok(out)
}
