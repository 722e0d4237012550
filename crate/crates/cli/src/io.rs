use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use vmdfbd::SampledSignal;

/// Version of the JSON report layout.
pub const SCHEMA: u32 = 1;

#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub schema: u32,
    pub command: &'a str,
    pub config: C,
    pub result: R,
}

/// A file, or stdout when `path` is `None`.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = sink(path)?;
    out.write_all(to_json(value)?.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn bad_input(msg: String) -> anyhow::Error {
    vmdfbd::Error::InvalidSignal(msg).into()
}

/// Reads a `t,value` CSV. The sample rate is `1 / median Δt` unless given,
/// snapped to the nearest integer when within one part per million of it.
pub fn read_signal_csv(path: &Path, fs_override: Option<f64>) -> Result<SampledSignal> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad_input(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad_input(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(ti), Some(vi)) = (col("t"), col("value")) else {
        return Err(bad_input(format!("expected a `t,value` header, got {:?}", headers.iter().collect::<Vec<_>>())));
    };
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad_input(e.to_string()))?;
        let field = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse::<f64>()
                .map_err(|_| bad_input(format!("row {}: cannot parse {s:?} as a number", line + 2)))
        };
        times.push(field(ti)?);
        values.push(field(vi)?);
    }
    if values.len() < 2 {
        return Err(bad_input(format!("need at least 2 rows, got {}", values.len())));
    }
    let fs = match fs_override {
        Some(fs) => fs,
        None => infer_rate(&times)?,
    };
    Ok(SampledSignal::with_t0(values, fs, times[0])?)
}

fn infer_rate(times: &[f64]) -> Result<f64> {
    let mut dt: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    if dt.iter().any(|d| !(*d > 0.0)) {
        bail!(bad_input("time column must be strictly increasing".into()));
    }
    dt.sort_by(f64::total_cmp);
    let mid = dt.len() / 2;
    let median = if dt.len() % 2 == 0 { 0.5 * (dt[mid - 1] + dt[mid]) } else { dt[mid] };
    let fs = 1.0 / median;
    let rounded = fs.round();
    Ok(if (fs - rounded).abs() <= 1e-6 * fs { rounded } else { fs })
}

pub fn write_signal_csv(signal: &SampledSignal, out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value"])?;
    for (i, v) in signal.samples().iter().enumerate() {
        w.write_record([signal.time_of(i).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `t, <name>...` of equal-length series.
pub fn write_columns(signal: &SampledSignal, names: &[String], columns: &[&[f64]], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for i in 0..signal.len() {
        let mut row = vec![signal.time_of(i).to_string()];
        row.extend(columns.iter().map(|c| c[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
