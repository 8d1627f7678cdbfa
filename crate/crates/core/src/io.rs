//! Flat-file formats: root CSV, seed JSON and SVG root plots.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so the
//! same report always yields the same bytes and re-parses exactly.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexScalar};
use crate::model::SpectrumReport;

pub const CSV_HEADER: &str = "re,im,residual";

pub fn write_roots_csv<W: Write>(report: &SpectrumReport, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for (s, r) in report.iter() {
        writeln!(out, "{},{},{}", fmt_f64(s.re), fmt_f64(s.im), fmt_f64(r))?;
    }
    Ok(())
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn read_roots_csv<R: BufRead>(input: R) -> Result<Vec<(ComplexScalar, f64)>> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim) != Some(CSV_HEADER) {
        return Err(Error::Parse { key: "header".into(), message: format!("expected `{CSV_HEADER}`") });
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |idx: usize, key: &str| -> Result<f64> {
            fields
                .get(idx)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| Error::Parse { key: key.into(), message: format!("row {}", i + 1) })
        };
        rows.push((Complex64::new(parse(0, "re")?, parse(1, "im")?), parse(2, "residual")?));
    }
    Ok(rows)
}

/// Parses `{"Q": [[..], ..]}`. Entries are numbers or `[re, im]` pairs.
pub fn parse_q0_json(text: &str) -> Result<ComplexMatrix> {
    let err = |message: String| Error::Parse { key: "Q".into(), message };
    let v: Value =
        serde_json::from_str(text).map_err(|e| Error::Parse { key: "<document>".into(), message: e.to_string() })?;
    let rows = v
        .get("Q")
        .ok_or_else(|| err("missing key".into()))?
        .as_array()
        .ok_or_else(|| err("expected an array of rows".into()))?;
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let row =
            row.as_array().filter(|r| r.len() == n).ok_or_else(|| err(format!("row {i} must have {n} entries")))?;
        for x in row {
            let z = match x {
                Value::Number(num) => num.as_f64().map(|re| Complex64::new(re, 0.0)),
                Value::Array(pair) if pair.len() == 2 => {
                    pair[0].as_f64().zip(pair[1].as_f64()).map(|(re, im)| Complex64::new(re, im))
                }
                _ => None,
            };
            data.push(z.ok_or_else(|| err(format!("row {i}: entries must be numbers or [re, im]")))?);
        }
    }
    ComplexMatrix::new(n, data).map_err(|e| err(e.to_string()))
}

pub fn read_q0_file(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    parse_q0_json(&std::fs::read_to_string(path)?)
}

/// JSON rendering of a matrix: real rows when every entry is real, else
/// rows of `[re, im]` pairs.
pub fn matrix_json(m: &ComplexMatrix) -> Value {
    if m.is_real(0.0) {
        serde_json::json!(m.to_real_rows())
    } else {
        serde_json::json!(m.to_rows())
    }
}

pub fn complex_json(z: ComplexScalar) -> Value {
    serde_json::json!({ "re": z.re, "im": z.im })
}

const SVG_W: f64 = 480.0;
const SVG_H: f64 = 480.0;
const MARGIN: f64 = 50.0;

/// Scatter plot of the roots and their conjugates in the complex plane.
pub fn roots_svg(report: &SpectrumReport) -> String {
    let mut pts: Vec<Complex64> = Vec::new();
    for &s in &report.roots {
        pts.push(s);
        if s.im != 0.0 {
            pts.push(s.conj());
        }
    }
    let r = report.region;
    let x_lo = r.re_min;
    let x_hi = r.re_max;
    let y_abs = r.im_max.abs().max(r.im_min.abs()).max(1e-9);
    let (y_lo, y_hi) = (-y_abs, y_abs);
    let px = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (SVG_W - 2.0 * MARGIN);
    let py = |y: f64| SVG_H - MARGIN - (y - y_lo) / (y_hi - y_lo) * (SVG_H - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        SVG_W - 2.0 * MARGIN,
        SVG_H - 2.0 * MARGIN
    );
    if x_lo < 0.0 && x_hi > 0.0 {
        let x0 = px(0.0);
        let _ = writeln!(
            svg,
            r##"<line x1="{x0:.2}" y1="{MARGIN}" x2="{x0:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            SVG_H - MARGIN
        );
    }
    let y0 = py(0.0);
    let _ = writeln!(
        svg,
        r##"<line x1="{MARGIN}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
        SVG_W - MARGIN
    );
    for (val, pos) in [(x_lo, px(x_lo)), (x_hi, px(x_hi))] {
        let _ = writeln!(
            svg,
            r#"<text x="{pos:.2}" y="{:.2}" font-size="11" text-anchor="middle">{val}</text>"#,
            SVG_H - MARGIN + 16.0
        );
    }
    for (val, pos) in [(y_lo, py(y_lo)), (y_hi, py(y_hi))] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{val}</text>"#,
            MARGIN - 6.0,
            pos + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">ℜ</text>"#,
        SVG_W / 2.0,
        SVG_H - 12.0
    );
    let _ = writeln!(svg, r#"<text x="16" y="{:.2}" font-size="14" text-anchor="middle">ℑ</text>"#, SVG_H / 2.0);
    for p in pts {
        let _ =
            writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="none" stroke="blue"/>"#, px(p.re), py(p.im));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Method, Region};

    fn report() -> SpectrumReport {
        let r = Region::new(-4.0, 2.0, -1.0, 8.0).unwrap();
        SpectrumReport::new(
            vec![(Complex64::new(0.807, 0.0), 1e-15), (Complex64::new(-1.4928, 6.6027), 2.5e-16)],
            r,
            Method::Oracle,
        )
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_roots_csv(&report(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("re,im,residual\n"));
        let rows = read_roots_csv(&buf[..]).unwrap();
        assert_eq!(rows, report().iter().collect::<Vec<_>>());
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_f64(0.807), "0.807");
        assert_eq!(fmt_f64(8.881784197001252e-16), "8.881784197001252e-16");
        assert_eq!(fmt_f64(-0.0), "-0");
        for x in [1e-300, 3.5e-5, 123.25, 1e20, -7.7375164e-5] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(read_roots_csv("x,y\n1,2\n".as_bytes()).is_err());
        assert!(read_roots_csv("re,im,residual\n1,oops,0\n".as_bytes()).is_err());
    }

    #[test]
    fn q0_parsing() {
        let q = parse_q0_json(r#"{"Q": [[2, 1], [-2, -1]]}"#).unwrap();
        assert_eq!(q, ComplexMatrix::from_real_rows(&[[2.0, 1.0], [-2.0, -1.0]]));
        let q = parse_q0_json(r#"{"Q": [[[1, 2]]]}"#).unwrap();
        assert_eq!(q[(0, 0)], Complex64::new(1.0, 2.0));
        assert!(parse_q0_json(r#"{"Q": [[1, 2]]}"#).unwrap_err().to_string().contains("`Q`"));
        assert!(parse_q0_json(r#"{"R": 1}"#).is_err());
    }

    #[test]
    fn svg_is_deterministic_and_mirrored() {
        let a = roots_svg(&report());
        assert_eq!(a, roots_svg(&report()));
        assert_eq!(a.matches("<circle").count(), 3);
        assert!(a.contains("ℜ") && a.contains("ℑ"));
    }
}
