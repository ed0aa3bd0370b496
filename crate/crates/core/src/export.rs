//! Plain-text writers shared by the simulation modules and the CLI.
//!
//! Numbers use the shortest decimal string that parses back to the same
//! `f64`, with `.` as separator regardless of locale.

use std::io::Write;

use crate::ensemble::Ensemble;
use crate::error::Result;
use crate::tof::{DensityImage, ExpansionCurve};

/// Shortest round-trip representation; exponent form outside [1e-4, 1e15).
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Write a header line and one comma-separated line per row.
pub fn write_csv<W: Write, R: AsRef<[f64]>>(out: &mut W, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.as_ref().iter().map(|v| fmt_f64(*v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub const ENSEMBLE_HEADER: [&str; 7] = ["x", "y", "z", "vx", "vy", "vz", "mF"];
pub const CURVE_HEADER: [&str; 3] = ["t", "sigma", "sigma_err"];

pub fn write_ensemble<W: Write>(out: &mut W, e: &Ensemble) -> Result<()> {
    write_csv(
        out,
        &ENSEMBLE_HEADER,
        e.atoms.iter().map(|a| {
            [a.position.x, a.position.y, a.position.z, a.velocity.x, a.velocity.y, a.velocity.z, a.m_f as f64]
        }),
    )
}

pub fn write_curve<W: Write>(out: &mut W, curve: &ExpansionCurve) -> Result<()> {
    write_csv(
        out,
        &CURVE_HEADER,
        (0..curve.len()).map(|i| [curve.times[i], curve.rms_sizes[i], curve.standard_errors[i]]),
    )
}

/// Three header lines (`nx ny`, `extent_x extent_y`, `blur`) then `ny` rows of counts.
pub fn write_image<W: Write>(out: &mut W, image: &DensityImage) -> Result<()> {
    let w = &image.window;
    writeln!(out, "{} {}", image.nx, image.ny)?;
    writeln!(out, "{} {}", fmt_f64(w.horizontal.1 - w.horizontal.0), fmt_f64(w.vertical.1 - w.vertical.0))?;
    writeln!(out, "{}", fmt_f64(image.blur_rms))?;
    for row in image.counts.chunks(image.nx) {
        let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -3.0, 7.5e-6, 0.1 + 0.2, 1.2345678901234567e-9, 6.02e23, 1e-4, 0.5] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(3.0), "3");
        assert_eq!(fmt_f64(7.5e-6), "7.5e-6");
        assert_eq!(fmt_f64(0.25), "0.25");
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], [[1.0, 2.5], [-1.0, 1e-9]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,2.5\n-1,1e-9\n");
    }
}
