//! CSV tables. Floating-point fields are written with 9 significant digits.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::psychophys::{CurvePoint, MatchRow};
use crate::talbot::MatchPrediction;

pub const PREDICTION_HEADER: [&str; 5] =
    ["frequency_hz", "duration_us", "steady_cd_m2", "predicted_intensity_cd_m2", "duty"];
pub const MATCH_HEADER: [&str; 7] =
    ["frequency_hz", "duration_us", "steady_cd_m2", "tp_predicted", "matched", "relative_error", "fused"];
pub const CURVE_HEADER: [&str; 5] = ["intensity_cd_m2", "p_identified", "p_bright", "p_dark", "mean_scaled_contrast"];

/// `%.9g`-style rendering: 9 significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-4, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..9).contains(&exp) {
        return format!("{}e{exp}", trim_fraction(mantissa));
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_fraction(&format!("{x:.decimals$}")).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_f64(s: &str, line: usize, column: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse { line, message: format!("invalid {column} {s:?}") })
}

fn parse_opt(s: &str, line: usize, column: &str) -> Result<Option<f64>> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        parse_f64(s, line, column).map(Some)
    }
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    Ok(())
}

fn records<R: Read>(reader: &mut csv::Reader<R>, width: usize) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != width {
            return Err(Error::Parse { line: i + 2, message: format!("expected {width} columns, got {}", rec.len()) });
        }
        out.push((i + 2, rec));
    }
    Ok(out)
}

pub fn write_predictions<W: Write>(w: W, rows: &[MatchPrediction]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PREDICTION_HEADER)?;
    for r in rows {
        out.write_record(
            [r.frequency_hz, r.flash_duration_us, r.steady_luminance, r.predicted_intensity, r.duty].map(format_sig9),
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_predictions<R: Read>(r: R) -> Result<Vec<MatchPrediction>> {
    let mut reader = csv::Reader::from_reader(r);
    check_header(&mut reader, &PREDICTION_HEADER)?;
    records(&mut reader, PREDICTION_HEADER.len())?
        .into_iter()
        .map(|(line, rec)| {
            let f = |k: usize| parse_f64(&rec[k], line, PREDICTION_HEADER[k]);
            Ok(MatchPrediction {
                frequency_hz: f(0)?,
                flash_duration_us: f(1)?,
                steady_luminance: f(2)?,
                predicted_intensity: f(3)?,
                duty: f(4)?,
            })
        })
        .collect()
}

pub fn write_match_table<W: Write>(w: W, rows: &[MatchRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(MATCH_HEADER)?;
    let opt = |v: Option<f64>| v.map(format_sig9).unwrap_or_default();
    for r in rows {
        out.write_record([
            format_sig9(r.frequency_hz),
            format_sig9(r.duration_us),
            format_sig9(r.steady_cd_m2),
            format_sig9(r.tp_predicted),
            opt(r.matched),
            opt(r.relative_error),
            r.fused.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_match_table<R: Read>(r: R) -> Result<Vec<MatchRow>> {
    let mut reader = csv::Reader::from_reader(r);
    check_header(&mut reader, &MATCH_HEADER)?;
    records(&mut reader, MATCH_HEADER.len())?
        .into_iter()
        .map(|(line, rec)| {
            let f = |k: usize| parse_f64(&rec[k], line, MATCH_HEADER[k]);
            let fused = match &rec[6] {
                "true" => true,
                "false" => false,
                other => return Err(Error::Parse { line, message: format!("invalid fused flag {other:?}") }),
            };
            Ok(MatchRow {
                frequency_hz: f(0)?,
                duration_us: f(1)?,
                steady_cd_m2: f(2)?,
                tp_predicted: f(3)?,
                matched: parse_opt(&rec[4], line, MATCH_HEADER[4])?,
                relative_error: parse_opt(&rec[5], line, MATCH_HEADER[5])?,
                fused,
            })
        })
        .collect()
}

pub fn write_curve<W: Write>(w: W, points: &[CurvePoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CURVE_HEADER)?;
    for p in points {
        out.write_record([p.intensity, p.p_identified, p.p_bright, p.p_dark, p.mean_scaled_contrast].map(format_sig9))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_curve<R: Read>(r: R) -> Result<Vec<CurvePoint>> {
    let mut reader = csv::Reader::from_reader(r);
    check_header(&mut reader, &CURVE_HEADER)?;
    records(&mut reader, CURVE_HEADER.len())?
        .into_iter()
        .map(|(line, rec)| {
            let f = |k: usize| parse_f64(&rec[k], line, CURVE_HEADER[k]);
            Ok(CurvePoint {
                intensity: f(0)?,
                p_identified: f(1)?,
                p_bright: f(2)?,
                p_dark: f(3)?,
                mean_scaled_contrast: f(4)?,
            })
        })
        .collect()
}
