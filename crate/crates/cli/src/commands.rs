use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::Serialize;
use vmdfbd::baselines::{compare_methods, eemd, emd, EmdConfig, MethodComparison};
use vmdfbd::fbd::fractal_box_dimension;
use vmdfbd::hht::{analyze_decomposition, detect_harmonics, DetectConfig};
use vmdfbd::kselect::{select_k, KSelectConfig};
use vmdfbd::vmd::{vmd_decompose, VmdParams};

use crate::args::{DetectArgs, OutputArgs, SignalArgs, SignalSource, SweepArgs, VmdArgs};
use crate::io::{self, Envelope, SCHEMA};

/// How a command finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    /// Output was written but carries no usable result.
    Degenerate,
}

#[derive(Debug, Args)]
pub struct GenerateCmd {
    #[command(flatten)]
    pub signal: SignalArgs,
    /// Output CSV (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

pub fn generate(cmd: &GenerateCmd) -> Result<Outcome> {
    let loaded = cmd.signal.load()?;
    let mut out = io::sink(cmd.output.as_deref())?;
    io::write_signal_csv(&loaded.signal, &mut out)?;
    out.flush()?;
    Ok(Outcome::Done)
}

#[derive(Debug, Args)]
pub struct DecomposeCmd {
    #[command(flatten)]
    pub signal: SignalArgs,
    #[command(flatten)]
    pub vmd: VmdArgs,
    /// Number of modes.
    #[arg(long, short)]
    pub k: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct DecomposeConfig<'a> {
    signal: &'a SignalSource,
    vmd: VmdParams,
}

#[derive(Serialize)]
struct DecomposeMeta<'a> {
    center_freqs_hz: &'a [f64],
    iterations: usize,
    converged: bool,
}

pub fn decompose(cmd: &DecomposeCmd) -> Result<Outcome> {
    let loaded = cmd.signal.load()?;
    let params = cmd.vmd.params(cmd.k);
    let d = vmd_decompose(&loaded.signal, &params)?;
    let names: Vec<String> = (1..=d.k()).map(|i| format!("imf{i}")).collect();
    let cols: Vec<&[f64]> = d.modes.iter().map(|m| m.as_slice()).collect();
    let mut out = io::sink(cmd.out.output.as_deref())?;
    io::write_columns(&loaded.signal, &names, &cols, &mut out)?;
    out.flush()?;
    let meta = DecomposeMeta {
        center_freqs_hz: &d.center_freqs_hz,
        iterations: d.iterations,
        converged: d.converged,
    };
    let env = Envelope {
        schema: SCHEMA,
        command: "decompose",
        config: DecomposeConfig { signal: &loaded.source, vmd: params },
        result: meta,
    };
    match &cmd.out.json {
        Some(p) => io::write_json(&env, Some(p))?,
        None => eprint!("{}", io::to_json(&env.result)?),
    }
    Ok(Outcome::Done)
}

#[derive(Debug, Args)]
pub struct SelectKCmd {
    #[command(flatten)]
    pub signal: SignalArgs,
    #[command(flatten)]
    pub vmd: VmdArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct SweepConfig<'a> {
    signal: &'a SignalSource,
    vmd: VmdParams,
    select: KSelectConfig,
}

pub fn select(cmd: &SelectKCmd, threads: usize) -> Result<Outcome> {
    let loaded = cmd.signal.load()?;
    let cfg = cmd.sweep.config(threads);
    let params = cmd.vmd.params(cfg.k_min);
    let trace = select_k(&loaded.signal, &params, &cfg)?;
    let mut out = io::sink(cmd.out.output.as_deref())?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["k", "score", "pruned", "converged"])?;
        for i in 0..trace.k_values.len() {
            w.write_record([
                trace.k_values[i].to_string(),
                trace.scores[i].to_string(),
                trace.pruned_counts[i].to_string(),
                trace.converged[i].to_string(),
            ])?;
        }
        w.flush()?;
    }
    out.flush()?;
    eprintln!("chosen_k = {} (minimum score at K = {})", trace.chosen_k, trace.min_score_k);
    if let Some(p) = &cmd.out.json {
        let env = Envelope {
            schema: SCHEMA,
            command: "select-k",
            config: SweepConfig { signal: &loaded.source, vmd: params, select: cfg },
            result: &trace,
        };
        io::write_json(&env, Some(p))?;
    }
    Ok(Outcome::Done)
}

#[derive(Debug, Args)]
pub struct DetectCmd {
    #[command(flatten)]
    pub signal: SignalArgs,
    #[command(flatten)]
    pub vmd: VmdArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub detect: DetectArgs,
    /// Use this K instead of selecting one.
    #[arg(long, short)]
    pub k: Option<usize>,
    /// Per-component instantaneous amplitude and frequency as CSV.
    #[arg(long)]
    pub series: Option<PathBuf>,
    /// Report file (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct DetectRunConfig<'a> {
    signal: &'a SignalSource,
    vmd: VmdParams,
    fixed_k: Option<usize>,
    detect: DetectConfig,
}

pub fn detect(cmd: &DetectCmd, threads: usize) -> Result<Outcome> {
    let loaded = cmd.signal.load()?;
    let cfg = cmd.detect.config(&cmd.sweep, threads);
    let params = cmd.vmd.params(cmd.k.unwrap_or(cfg.k_min));
    let mut report = match cmd.k {
        Some(k) => {
            cfg.validate()?;
            let d = vmd_decompose(&loaded.signal, &params.with_k(k))?;
            analyze_decomposition(&d, &loaded.signal, &cfg)?
        }
        None => detect_harmonics(&loaded.signal, &params, &cfg)?,
    };
    if !loaded.truth.is_empty() {
        report.attach_ground_truth(&loaded.truth);
    }
    let env = Envelope {
        schema: SCHEMA,
        command: "detect",
        config: DetectRunConfig {
            signal: &loaded.source,
            vmd: params,
            fixed_k: cmd.k,
            detect: cfg,
        },
        result: &report,
    };
    io::write_json(&env, cmd.output.as_deref())?;
    if let Some(path) = &cmd.series {
        let mut names = Vec::new();
        let mut cols: Vec<&[f64]> = Vec::new();
        for (i, s) in report.series.iter().enumerate() {
            names.push(format!("amp{}", i + 1));
            names.push(format!("freq{}", i + 1));
            cols.push(&s.amplitude);
            cols.push(&s.frequency_hz);
        }
        let mut out = io::sink(Some(path))?;
        io::write_columns(&loaded.signal, &names, &cols, &mut out)?;
        out.flush()?;
    }
    Ok(if report.degenerate { Outcome::Degenerate } else { Outcome::Done })
}

#[derive(Debug, Args)]
pub struct FbdCmd {
    #[command(flatten)]
    pub signal: SignalArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn fbd(cmd: &FbdCmd) -> Result<Outcome> {
    let loaded = cmd.signal.load()?;
    let est = fractal_box_dimension(loaded.signal.samples())?;
    let mut out = io::sink(cmd.out.output.as_deref())?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["eps", "count"])?;
        for (e, c) in est.curve.scales.iter().zip(&est.curve.counts) {
            w.write_record([e.to_string(), c.to_string()])?;
        }
        w.flush()?;
    }
    out.flush()?;
    eprintln!("dimension = {}, r2 = {}", est.dimension, est.fit_r2);
    if !est.in_sanity_band() {
        log::warn!("dimension {} outside the usual band for sampled curves", est.dimension);
    }
    if let Some(p) = &cmd.out.json {
        let env = Envelope {
            schema: SCHEMA,
            command: "fbd",
            config: &loaded.source,
            result: &est,
        };
        io::write_json(&env, Some(p))?;
    }
    Ok(if est.degenerate { Outcome::Degenerate } else { Outcome::Done })
}

#[derive(Debug, Args)]
pub struct CompareCmd {
    #[command(flatten)]
    pub signal: SignalArgs,
    #[command(flatten)]
    pub vmd: VmdArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// VMD mode count; selected from the sweep when omitted.
    #[arg(long, short)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub max_imfs: usize,
    /// EEMD trials.
    #[arg(long, default_value_t = 100)]
    pub ensemble: usize,
    /// EEMD noise as a fraction of the signal's standard deviation.
    #[arg(long, default_value_t = 0.2)]
    pub noise_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub emd_seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct CompareConfig<'a> {
    signal: &'a SignalSource,
    truth: &'a [vmdfbd::signal::ToneSpec],
    vmd: VmdParams,
    emd: EmdConfig,
}

pub fn compare(cmd: &CompareCmd, threads: usize) -> Result<Outcome> {
    let loaded = cmd.signal.load()?;
    let sig = &loaded.signal;
    let base = cmd.vmd.params(1);
    let k = match cmd.k {
        Some(k) => k,
        None => select_k(sig, &base, &cmd.sweep.config(threads))?.chosen_k,
    };
    let params = base.with_k(k);
    let emd_cfg = EmdConfig {
        max_imfs: cmd.max_imfs,
        ensemble_size: cmd.ensemble,
        noise_std_fraction: cmd.noise_fraction,
        seed: cmd.emd_seed,
        threads,
        ..EmdConfig::default()
    };
    let v = vmd_decompose(sig, &params)?;
    let e = emd(sig, &emd_cfg)?;
    let ee = eemd(sig, &emd_cfg)?;
    let table = compare_methods(
        sig,
        &loaded.truth,
        &[("vmd".into(), v.modes), ("emd".into(), e.imfs), ("eemd".into(), ee.imfs)],
    )?;
    let mut out = io::sink(cmd.out.output.as_deref())?;
    write_comparison(&table, &mut out)?;
    out.flush()?;
    if let Some(p) = &cmd.out.json {
        let env = Envelope {
            schema: SCHEMA,
            command: "compare",
            config: CompareConfig {
                signal: &loaded.source,
                truth: &loaded.truth,
                vmd: params,
                emd: emd_cfg,
            },
            result: &table,
        };
        io::write_json(&env, Some(p))?;
    }
    Ok(Outcome::Done)
}

fn write_comparison(table: &[MethodComparison], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method",
        "true_frequency_hz",
        "true_amplitude_v",
        "component",
        "correlation",
        "amplitude_rel_error",
        "frequency_rel_error",
        "matched",
    ])?;
    for m in table {
        for t in &m.tones {
            w.write_record([
                m.method.clone(),
                t.true_frequency_hz.to_string(),
                t.true_amplitude_v.to_string(),
                t.best_component.map(|c| (c + 1).to_string()).unwrap_or_default(),
                t.correlation.to_string(),
                t.amplitude_rel_error.to_string(),
                t.frequency_rel_error.to_string(),
                t.matched.to_string(),
            ])?;
        }
        w.write_record([
            m.method.clone(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            format!("matched={} spurious={} components={}", m.matched_tones, m.spurious, m.n_components),
        ])?;
    }
    w.flush()?;
    Ok(())
}
