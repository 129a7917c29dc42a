//! The four subcommands. Each computes everything first and only then
//! writes its files, each through a temporary file and a rename.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use penrose_core::conformal_flow::{run_conformal, ConformalOptions};
use penrose_core::error::Error as CoreError;
use penrose_core::imcf_hawking::flow_trace;
use penrose_core::initial_data::hairy::{build_areal, ArealSpec};
use penrose_core::initial_data::{build_family_with, io, BlackHoleFamily, FamilyOptions, InitialDataSet};
use penrose_core::jang_solver::{jang_metric, solve_jang_with, JangBC, JangOptions};
use penrose_core::orbit_geometry::OrbitKind;
use penrose_core::penrose_verifier::{self, PenroseReport, VerifyOptions};
use rayon::prelude::*;

use crate::config::{ensure_dir, usage, FamilySpec, Format, PipelineChoice, RunConfig, Source};

/// Exit status of a run that completed without errors.
pub const EXIT_OK: i32 = 0;
/// Completed, but the inequality margin or a consistency check failed.
pub const EXIT_VIOLATION: i32 = 1;

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn family_options(cfg: &RunConfig, quad_rel: Option<f64>) -> FamilyOptions {
    let mut o = FamilyOptions::default();
    if let Some(q) = quad_rel {
        o.quad_rel = q;
    }
    o.s_max = cfg.s_max;
    if let Some(k) = cfg.nodes {
        o.nodes = k;
    }
    o
}

/// Closed-form family from a spec; `first` is the mass or horizon radius.
pub fn closed_family(
    spec: &FamilySpec,
    m: Option<f64>,
    r_plus: Option<f64>,
    a: f64,
) -> Result<BlackHoleFamily, CoreError> {
    let n = spec.n;
    Ok(match (spec.name.as_str(), m, r_plus) {
        ("schwarzschild", Some(m), _) => BlackHoleFamily::Schwarzschild { n, m },
        ("schwarzschild", None, Some(r)) => BlackHoleFamily::Schwarzschild {
            n,
            m: 0.5 * r.powi(2 * n as i32),
        },
        ("schwarzschild-ads", Some(m), _) => BlackHoleFamily::SchwarzschildAdS { n, m },
        ("schwarzschild-ads", None, Some(r)) => BlackHoleFamily::schwarzschild_ads_from_horizon(n, r)?,
        ("myers-perry", Some(m), _) => BlackHoleFamily::MyersPerry { n, m, a },
        ("myers-perry", None, Some(r)) => BlackHoleFamily::myers_perry_from_horizon(n, r, a)?,
        ("myers-perry-ads", Some(m), _) => BlackHoleFamily::MyersPerryAdS { n, m, a },
        ("myers-perry-ads", None, Some(r)) => BlackHoleFamily::myers_perry_ads_from_horizon(n, r, a)?,
        (name, _, _) => return Err(CoreError::Domain(format!("{name} is not a closed-form family"))),
    })
}

/// Builds the data set named by the configuration.
pub fn build_source(cfg: &RunConfig) -> anyhow::Result<InitialDataSet> {
    let data = match &cfg.source {
        Source::Data(path) => io::load(path)?,
        Source::Family(spec) => match spec.name.as_str() {
            "berger-example" => build_areal(ArealSpec::berger_example(), &family_options(cfg, None))?,
            "sp-example" => build_areal(ArealSpec::sp_example(), &family_options(cfg, None))?,
            "spin9-collapse" => build_areal(ArealSpec::spin9_collapse(), &family_options(cfg, Some(1e-11)))?,
            _ => {
                let f = closed_family(spec, spec.m, spec.r_plus, spec.a.unwrap_or(0.0))?;
                build_family_with(f, &family_options(cfg, None))?
            }
        },
    };
    Ok(data)
}

fn verify_options(cfg: &RunConfig) -> VerifyOptions {
    let mut o = VerifyOptions::with_tolerances(cfg.tol.clone());
    o.bc = cfg.bc;
    o
}

pub fn run_pipeline(cfg: &RunConfig, data: &InitialDataSet) -> Result<PenroseReport, CoreError> {
    let opts = verify_options(cfg);
    match cfg.pipeline {
        PipelineChoice::Auto => penrose_verifier::verify(data, &opts),
        PipelineChoice::Spacetime => penrose_verifier::verify_spacetime(data, &opts),
        PipelineChoice::Riemannian => penrose_verifier::verify_riemannian(data, &opts),
    }
}

fn render(report: &PenroseReport, format: Format) -> (String, &'static str) {
    match format {
        Format::Table => (report.to_key_value(), "report.txt"),
        Format::Structured => (report.to_json() + "\n", "report.json"),
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> anyhow::Result<i32> {
    let data = build_source(cfg)?;
    let report = run_pipeline(cfg, &data)?;
    let (text, name) = render(&report, cfg.format);
    print!("{text}");
    if let Some(dir) = &cfg.out {
        ensure_dir(dir)?;
        write_atomic(&dir.join(name), text.as_bytes())?;
    }
    Ok(if report.passes(&cfg.tol) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

/// Outcome of one sweep point.
#[derive(Debug)]
enum Row {
    Done(PenroseReport),
    Extremal,
    Inadmissible,
    Failed(String),
}

fn fmt_param(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn cmd_sweep(cfg: &RunConfig) -> anyhow::Result<i32> {
    let sweep = cfg.sweep.as_ref().expect("sweep settings resolved");
    let Source::Family(spec) = &cfg.source else {
        return Err(usage("sweeps need a closed-form family"));
    };
    let points: Vec<(f64, f64)> = sweep
        .first
        .values()
        .into_iter()
        .flat_map(|x| sweep.a.values().into_iter().map(move |a| (x, a)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(sweep.jobs).build()?;
    let rows: Vec<Row> = pool.install(|| {
        points
            .par_iter()
            .map(|&(x, a)| {
                let (m, r) = if sweep.by_radius {
                    (None, Some(x))
                } else {
                    (Some(x), None)
                };
                let family = match closed_family(spec, m, r, a).and_then(|f| f.horizon_radius().map(|_| f)) {
                    Ok(f) => f,
                    Err(CoreError::Construction(_)) => return Row::Extremal,
                    Err(_) => return Row::Inadmissible,
                };
                let result = build_family_with(family, &family_options(cfg, None)).and_then(|d| run_pipeline(cfg, &d));
                match result {
                    Ok(r) => Row::Done(r),
                    Err(e) => Row::Failed(e.to_string()),
                }
            })
            .collect()
    });
    if rows.iter().all(|r| matches!(r, Row::Extremal | Row::Inadmissible)) {
        return Err(CoreError::Precondition("no admissible point in the sweep grid".into()).into());
    }

    let first = if sweep.by_radius { "r_plus" } else { "m" };
    let mut table = format!(
        "# penrose-sweep v1\n# family = {}; n = {}\n# {first} a energy area bound margin\n",
        spec.name, spec.n
    );
    let mut reports = Vec::new();
    for (i, (&(x, a), row)) in points.iter().zip(&rows).enumerate() {
        let lead = format!("{} {}", fmt_param(x), fmt_param(a));
        let line = match row {
            Row::Done(r) => {
                reports.push((i, r));
                format!(
                    "{lead} {} {} {} {}",
                    fmt_param(r.energy),
                    fmt_param(r.area),
                    fmt_param(r.bound),
                    fmt_param(r.margin)
                )
            }
            Row::Extremal => format!("{lead} EXTREMAL"),
            Row::Inadmissible => format!("{lead} INADMISSIBLE"),
            Row::Failed(why) => format!("{lead} FAILED {}", why.replace('\n', " ")),
        };
        table.push_str(&line);
        table.push('\n');
    }
    print!("{table}");
    if let Some(dir) = &cfg.out {
        let point_dir = dir.join("points");
        ensure_dir(&point_dir)?;
        for (i, r) in &reports {
            let (text, name) = render(r, cfg.format);
            let ext = Path::new(name).extension().and_then(|e| e.to_str()).unwrap_or("txt");
            write_atomic(&point_dir.join(format!("point_{i:04}.{ext}")), text.as_bytes())?;
        }
        write_atomic(&dir.join("sweep.tbl"), table.as_bytes())?;
    }
    Ok(if rows.iter().any(|r| matches!(r, Row::Failed(_))) {
        crate::EXIT_SOLVER
    } else if reports.iter().all(|(_, r)| r.passes(&cfg.tol)) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn has_jang_stage(data: &InitialDataSet) -> bool {
    matches!(
        data.orbit,
        OrbitKind::Berger { .. } | OrbitKind::SU2 | OrbitKind::Round { .. }
    )
}

pub fn cmd_trace(cfg: &RunConfig) -> anyhow::Result<i32> {
    let dir = cfg
        .out
        .clone()
        .ok_or_else(|| usage("trace needs an output directory (--out)"))?;
    let data = build_source(cfg)?;
    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();

    let flow_base = if has_jang_stage(&data) {
        let bc = match cfg.bc {
            Some(bc) => bc,
            None => JangBC::from_data(&data, cfg.tol.zero).map_err(|e| e.in_stage("jang"))?,
        };
        let sol =
            solve_jang_with(&data, bc, &JangOptions::from_tolerances(&cfg.tol)).map_err(|e| e.in_stage("jang"))?;
        let mut buf = Vec::new();
        sol.write_dump(&mut buf)?;
        files.push((dir.join("jang.tbl"), buf));
        jang_metric(&data, &sol).map_err(|e| e.in_stage("jang-metric"))?
    } else if data.is_time_symmetric() {
        data.clone()
    } else {
        return Err(CoreError::Precondition(format!("no Jang stage for {:?} orbits with k ≠ 0", data.orbit)).into());
    };

    let trace = flow_trace(&flow_base).map_err(|e| e.in_stage("imcf"))?;
    let mut buf = Vec::new();
    trace.write_table(&mut buf)?;
    files.push((dir.join("flow.tbl"), buf));

    if flow_base.asymptotic.is_hyperbolic() {
        eprintln!("conformal.tbl skipped: the conformal flow is only defined for asymptotically flat data");
    } else {
        let opts = ConformalOptions {
            t_stop: cfg.t_stop,
            ..ConformalOptions::default()
        };
        let run = run_conformal(&flow_base, &opts, &cfg.tol).map_err(|e| e.in_stage("conformal"))?;
        let mut buf = Vec::new();
        run.write_table(&mut buf)?;
        files.push((dir.join("conformal.tbl"), buf));
    }

    ensure_dir(&dir)?;
    for (path, bytes) in &files {
        write_atomic(path, bytes)?;
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}

pub fn cmd_families() -> anyhow::Result<i32> {
    let rows = [
        (
            "schwarzschild",
            "n, m | r_plus",
            "flat",
            "Berger S^{2n+1}",
            "static, equality case",
        ),
        (
            "schwarzschild-ads",
            "n, m | r_plus",
            "hyperbolic",
            "Berger S^{2n+1}",
            "static, equality case",
        ),
        (
            "myers-perry",
            "n, m | r_plus, a",
            "flat",
            "Berger S^{2n+1}",
            "equal rotations, strict inequality",
        ),
        (
            "myers-perry-ads",
            "n, m | r_plus, a<1",
            "hyperbolic",
            "Berger S^{2n+1}",
            "equal rotations, strict inequality",
        ),
        (
            "berger-example",
            "-",
            "flat",
            "Berger S^5",
            "time-symmetric, squashed, R >= 0",
        ),
        (
            "sp-example",
            "-",
            "flat",
            "Sp(2) S^7",
            "time-symmetric, squashed, R >= 0",
        ),
        (
            "spin9-collapse",
            "-",
            "flat",
            "Spin(9) S^15",
            "time-symmetric, collapsed fibre near the horizon",
        ),
    ];
    println!("# name parameters asymptotics orbit description");
    for (name, params, asym, orbit, what) in rows {
        println!("{name:<18} {params:<20} {asym:<11} {orbit:<16} {what}");
    }
    Ok(EXIT_OK)
}
