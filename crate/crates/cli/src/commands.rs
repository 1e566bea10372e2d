use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use blowuplab_core::auxcalc::{check_hypothesis, DEFAULT_MARGIN};
use blowuplab_core::exponents::{classic_exponents, p_crit_damped};
use blowuplab_core::functional::scan_condition;
use blowuplab_core::report::{scan_table, write_csv, CsvRecord, ExponentRow, SweepCsvRow};
use blowuplab_core::simulator::{run, sweep_p};
use blowuplab_core::{AuxOptions, AuxTable, ScanOptions, SimVerdict, SpaceMeasure};

use crate::args::{AuxArgs, CheckArgs, ExponentArgs, MeasureKind, ScanArgs, SimArgs, SweepArgs};
use crate::config::{self, ExponentPoint, RunConfig};

const DEFAULT_CHECK_HORIZON: f64 = 1e4;
const DEFAULT_AUX_HORIZON: f64 = 100.0;
const DEFAULT_P_LIST: [f64; 3] = [1.2, 1.5, 2.0];

/// Where tables and summaries go. Tables use `--out` when given and stdout
/// otherwise; summaries then move to stderr so stdout stays parseable.
pub struct Sink {
    file: Option<File>,
    quiet: bool,
}

impl Sink {
    pub fn open(out: Option<&Path>, quiet: bool) -> Result<Self> {
        let file = out
            .map(|p| File::create(p).with_context(|| format!("cannot write output {}", p.display())))
            .transpose()?;
        Ok(Sink { file, quiet })
    }

    fn table<T: CsvRecord>(&mut self, rows: &[T]) -> Result<()> {
        match &mut self.file {
            Some(f) => write_csv(f, rows)?,
            None => write_csv(io::stdout().lock(), rows)?,
        }
        Ok(())
    }

    fn json<T: serde::Serialize>(&mut self, value: &T) -> Result<()> {
        if let Some(f) = &mut self.file {
            serde_json::to_writer_pretty(&mut *f, value)?;
            f.write_all(b"\n")?;
        }
        Ok(())
    }

    fn note(&self, line: &str) {
        if self.quiet {
            return;
        }
        if self.file.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }

    /// Plain-text report for commands without a table on stdout.
    fn say(&self, line: &str) {
        if !self.quiet {
            println!("{line}");
        }
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn check(args: &CheckArgs, cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let model = config::damping(&args.damping, cfg.damping.or(cfg.problem.map(|p| p.damping)))?;
    let horizon = args.horizon.or(cfg.horizon).unwrap_or(DEFAULT_CHECK_HORIZON);
    let margin = args.margin.or(cfg.margin).unwrap_or(DEFAULT_MARGIN);
    let rep = check_hypothesis(&model, horizon, margin)?;
    let v = rep.passes;
    sink.say(&format!("damping {model:?}, window up to t = {horizon:e}, margin {margin}"));
    sink.say(&format!("{}  liminf b'/b^2 > -1            estimate {:.6}", mark(v.liminf_ratio), rep.liminf_est));
    sink.say(&format!(
        "{}  limsup t b'/b < 1             estimate {:.6}",
        mark(v.limsup_log_derivative),
        rep.limsup_est
    ));
    sink.say(&format!("{}  liminf t b(t) > 1             estimate {:.6e}", mark(v.tb_lower), rep.tb_liminf));
    sink.say(&format!(
        "{}  -M/t <= b'/b <= m/t, m < 1    m {:.6}, M {:.6}",
        mark(v.growth),
        rep.growth_m,
        rep.growth_big_m
    ));
    sink.say(&format!(
        "{}  eps <= (b^2 + b')/b^2 <= C    eps {:.6}, C {:.6}",
        mark(v.effective),
        rep.eps_lower,
        rep.c_upper
    ));
    if rep.inconclusive {
        sink.say("note: tail estimates still drift across the window; extend --horizon");
    }
    if rep.analytic != v.all() {
        sink.say(&format!(
            "note: closed-form limits of this family say {}",
            if rep.analytic { "admissible" } else { "not admissible" }
        ));
    }
    sink.say(&format!("overall: {}", mark(v.all())));
    sink.json(&rep)
}

pub fn aux_dump(args: &AuxArgs, cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let model = config::damping(&args.damping, cfg.damping.or(cfg.problem.map(|p| p.damping)))?;
    let horizon = args.horizon.or(cfg.horizon).unwrap_or(DEFAULT_AUX_HORIZON);
    let mut opts = AuxOptions::default();
    if let Some(k) = args.points_per_decade.or(cfg.points_per_decade) {
        opts.points_per_decade = k;
    }
    let table = AuxTable::build(model, horizon, opts)?;
    let rows = table.rows();
    sink.table(&rows)?;
    sink.note(&format!("{} rows, b_hat_1 = {}", rows.len(), table.bhat1()));
    Ok(())
}

pub fn exponents(args: &ExponentArgs, cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let grid = match &cfg.grid {
        Some(g) if args.n.is_none() => g.clone(),
        _ => vec![ExponentPoint {
            n: args.n.unwrap_or(1),
            alpha: args.alpha.unwrap_or(0.0),
            gamma: args.gamma.unwrap_or(0.0),
            delta: args.delta.unwrap_or(0.0),
        }],
    };
    if grid.is_empty() {
        bail!("exponent grid is empty");
    }
    let rows = grid
        .iter()
        .map(|q| Ok(ExponentRow::new(q.n, q.alpha, q.gamma, q.delta, &p_crit_damped(q.n, q.alpha, q.gamma, q.delta)?)))
        .collect::<Result<Vec<_>>>()?;
    if sink.file.is_some() {
        sink.table(&rows)?;
    }
    for r in &rows {
        let line = format!(
            "n={} alpha={} gamma={} delta={}  p_C={}  p_min={}  {}",
            r.n,
            r.alpha,
            r.gamma,
            r.delta,
            r.p_crit,
            r.p_min,
            if r.meaningful { "meaningful" } else { "empty range" }
        );
        if sink.file.is_some() {
            sink.say(&line);
        } else {
            println!("{line}");
        }
    }
    let mut dims: Vec<usize> = rows.iter().map(|r| r.n).collect();
    dims.sort_unstable();
    dims.dedup();
    for n in dims {
        let c = classic_exponents(n)?;
        let show = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| v.to_string());
        sink.note(&format!(
            "n={n}: Fujita {}  Kato {}  Strauss(n-1) {}  Sobolev {}",
            c.fujita,
            show(c.kato),
            show(c.strauss),
            show(c.sobolev)
        ));
    }
    Ok(())
}

pub fn scan(args: &ScanArgs, cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let spec = config::problem(&args.problem, cfg.problem, None)?;
    let radii = match args.radii.clone().or(cfg.r_list.clone()) {
        Some(r) => r,
        None => (3..=8).map(|k| 2f64.powi(k)).collect(),
    };
    let mut opts = cfg.scan_options.unwrap_or_else(ScanOptions::default);
    match args.measure {
        Some(MeasureKind::Radial) => opts.measure = SpaceMeasure::Radial,
        Some(MeasureKind::Box) => opts.measure = SpaceMeasure::ExactBox,
        None => {}
    }
    let res = scan_condition(&spec, &radii, &opts)?;
    sink.table(&scan_table(&res))?;
    for f in &res.fits {
        sink.note(&format!("{}: fitted slope {:.4}, predicted {:.4}", f.term.tag(), f.fitted, f.predicted));
    }
    sink.note(&format!("verdict: {} (numerical, R up to {})", res.verdict, radii.iter().fold(0.0f64, |a, &b| a.max(b))));
    Ok(())
}

fn describe(v: &SimVerdict) -> String {
    match v {
        SimVerdict::Blowup { t_star } => format!("blowup at t* = {t_star:.6}"),
        SimVerdict::Survived { t_max } => format!("survived to t = {t_max}"),
        SimVerdict::BoundaryContaminated { t } => format!("boundary contaminated at t = {t:.6}"),
    }
}

pub fn simulate(args: &SimArgs, cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let spec = config::simulation(&args.sim, cfg, None)?;
    let out = run(&spec)?;
    sink.table(&out.trace)?;
    let overflow = if out.hard_overflow { ", hard overflow" } else { "" };
    sink.note(&format!(
        "verdict: {}{overflow} (peak sup {:.6e}, {} cells, dt {:.3e}; {})",
        describe(&out.verdict),
        out.peak_sup,
        out.mesh.cells,
        out.mesh.dt,
        out.label
    ));
    Ok(())
}

pub fn sweep(args: &SweepArgs, cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let p_list = args.p_list.clone().or(cfg.p_list.clone()).unwrap_or(DEFAULT_P_LIST.to_vec());
    if p_list.is_empty() {
        bail!("p list is empty");
    }
    let spec = config::simulation(&args.sim, cfg, Some(p_list[0]))?;
    let rep = sweep_p(&spec, &p_list)?;
    let rows: Vec<SweepCsvRow> = rep.rows.iter().map(SweepCsvRow::from).collect();
    sink.table(&rows)?;
    for r in &rep.rows {
        sink.note(&format!("p = {}: {}", r.p, describe(&r.verdict)));
    }
    if let Some(w) = &rep.warning {
        sink.note(&format!("warning: {w}"));
    }
    sink.note(&format!("data mass {:.6e}; {}", rep.data_mass, blowuplab_core::simulator::EVIDENCE_LABEL));
    Ok(())
}
