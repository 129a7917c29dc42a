//! Plain-text table format for data sets.
//!
//! ```text
//! # penrose-data v1
//! # label = schwarzschild(n=1, m=1, a=0)
//! # orbit = berger
//! # n = 1
//! # asymptotic = flat
//! # tau = 2
//! s rho rho' rho'' B B' B'' k_a k_b k_c k_s
//! 0.0000000000000000e0 ...
//! ```
//!
//! Numbers are written with 17 significant digits so a write/read cycle is
//! exact at the nodes. Geometry columns carry two derivatives and are read
//! back into quintic Hermite profiles; extrinsic columns carry values only
//! and are read back with a monotone cubic. The mass deficit is not stored;
//! it is recomputed from the radius profile.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use super::{AsymptoticClass, Extrinsic, InitialDataSet, RadialProfile};
use crate::error::{Error, Result};
use crate::orbit_geometry::OrbitKind;

const MAGIC: &str = "# penrose-data v1";
const MIN_NODES: usize = 256;

fn orbit_tag(o: OrbitKind) -> (&'static str, Option<(&'static str, usize)>) {
    match o {
        OrbitKind::Round { dim } => ("round", Some(("dim", dim))),
        OrbitKind::Berger { n } => ("berger", Some(("n", n))),
        OrbitKind::SU2 => ("su2", None),
        OrbitKind::Sp { n } => ("sp", Some(("n", n))),
        OrbitKind::Spin9 => ("spin9", None),
    }
}

/// Column names of the extrinsic components, in the order
/// `k_a, diag..., cross...`, skipping mixed components that symmetry forces
/// to vanish.
fn extrinsic_columns(o: OrbitKind, groups: usize) -> (Vec<String>, Vec<Option<String>>) {
    match o {
        OrbitKind::Berger { .. } => (vec!["k_b".into(), "k_c".into()], vec![Some("k_s".into()), None]),
        _ => (
            (1..=groups).map(|i| format!("k_{i}")).collect(),
            (1..=groups).map(|i| Some(format!("k_s{i}"))).collect(),
        ),
    }
}

fn group_count(o: OrbitKind) -> usize {
    o.direction_groups(&vec![crate::numerics::Jet::constant(1.0); o.param_count()])
        .len()
}

/// Writes `data` sampled at its grid nodes.
pub fn write_table<W: Write>(data: &InitialDataSet, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Numeric(format!("write failed: {e}"));
    let mut head = String::new();
    let (tag, extra) = orbit_tag(data.orbit);
    writeln!(head, "{MAGIC}").ok();
    writeln!(head, "# label = {}", data.label).ok();
    writeln!(head, "# orbit = {tag}").ok();
    if let Some((k, v)) = extra {
        writeln!(head, "# {k} = {v}").ok();
    }
    match data.asymptotic {
        AsymptoticClass::Flat { tau } => writeln!(head, "# asymptotic = flat\n# tau = {tau:e}").ok(),
        AsymptoticClass::Hyperbolic { q } => writeln!(head, "# asymptotic = hyperbolic\n# q = {q:e}").ok(),
    };
    let mut cols = vec!["s".to_string(), "rho".into(), "rho'".into(), "rho''".into()];
    for p in data.orbit.param_names() {
        cols.extend([p.to_string(), format!("{p}'"), format!("{p}''")]);
    }
    let (diag, cross) = extrinsic_columns(data.orbit, data.extrinsic.diag.len());
    cols.push("k_a".into());
    cols.extend(diag.iter().cloned());
    cols.extend(cross.iter().flatten().cloned());
    writeln!(head, "{}", cols.join(" ")).ok();
    out.write_all(head.as_bytes()).map_err(io)?;

    let e = &data.extrinsic;
    let mut row = String::new();
    for &s in &data.grid {
        row.clear();
        let mut push = |x: f64| {
            if !row.is_empty() {
                row.push(' ');
            }
            write!(row, "{x:.16e}").ok();
        };
        push(s);
        let r = data.radius.eval(s);
        [r.v, r.d1, r.d2].into_iter().for_each(&mut push);
        for p in &data.shape {
            let j = p.eval(s);
            [j.v, j.d1, j.d2].into_iter().for_each(&mut push);
        }
        push(e.k_a.value(s));
        e.diag.iter().for_each(|p| push(p.value(s)));
        for (p, name) in e.cross.iter().zip(&cross) {
            match name {
                Some(_) => push(p.value(s)),
                None if !p.is_zero() => {
                    return Err(Error::Domain("mixed component forbidden by symmetry is nonzero".into()))
                }
                None => {}
            }
        }
        row.push('\n');
        out.write_all(row.as_bytes()).map_err(io)?;
    }
    Ok(())
}

/// Writes to `path` through a temporary sibling file and a rename.
pub fn save(data: &InitialDataSet, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp~");
    let file = std::fs::File::create(&tmp).map_err(|e| Error::Numeric(format!("{}: {e}", tmp.display())))?;
    let mut w = std::io::BufWriter::new(file);
    write_table(data, &mut w)?;
    w.flush().map_err(|e| Error::Numeric(e.to_string()))?;
    drop(w);
    std::fs::rename(&tmp, path).map_err(|e| Error::Numeric(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<InitialDataSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    read_table(std::io::BufReader::new(file))
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad number {s:?} for {what}")))
}

fn parse_usize(meta: &HashMap<String, String>, key: &str) -> Result<usize> {
    let v = meta
        .get(key)
        .ok_or_else(|| Error::Parse(format!("missing header key {key}")))?;
    v.parse()
        .map_err(|_| Error::Parse(format!("bad integer {v:?} for {key}")))
}

pub fn read_table<R: BufRead>(input: R) -> Result<InitialDataSet> {
    let mut lines = input.lines();
    let mut next = || -> Result<Option<String>> { lines.next().transpose().map_err(|e| Error::Parse(e.to_string())) };
    match next()? {
        Some(l) if l.trim() == MAGIC => {}
        other => return Err(Error::Parse(format!("expected {MAGIC:?}, found {other:?}"))),
    }
    let mut meta = HashMap::new();
    let columns = loop {
        let line = next()?.ok_or_else(|| Error::Parse("missing column header".into()))?;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        break line.split_whitespace().map(str::to_string).collect::<Vec<_>>();
    };
    let orbit = match meta.get("orbit").map(String::as_str) {
        Some("berger") => OrbitKind::Berger {
            n: parse_usize(&meta, "n")?,
        },
        Some("sp") => OrbitKind::Sp {
            n: parse_usize(&meta, "n")?,
        },
        Some("round") => OrbitKind::Round {
            dim: parse_usize(&meta, "dim")?,
        },
        Some("su2") => OrbitKind::SU2,
        Some("spin9") => OrbitKind::Spin9,
        other => return Err(Error::Parse(format!("unknown orbit {other:?}"))),
    };
    let get = |k: &str| {
        meta.get(k)
            .ok_or_else(|| Error::Parse(format!("missing header key {k}")))
    };
    let asymptotic = match get("asymptotic")?.as_str() {
        "flat" => AsymptoticClass::Flat {
            tau: parse_f64(get("tau")?, "tau")?,
        },
        "hyperbolic" => AsymptoticClass::Hyperbolic {
            q: parse_f64(get("q")?, "q")?,
        },
        other => return Err(Error::Parse(format!("unknown asymptotic class {other:?}"))),
    };

    let mut table: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    let mut row_no = 0;
    while let Some(line) = next()? {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        row_no += 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse(format!(
                "row {row_no} has {} fields, expected {}",
                fields.len(),
                columns.len()
            )));
        }
        for (col, f) in table.iter_mut().zip(fields) {
            col.push(parse_f64(f, "table entry")?);
        }
    }
    if row_no < MIN_NODES {
        return Err(Error::Parse(format!(
            "{row_no} rows; sampled data need at least {MIN_NODES}"
        )));
    }
    let index: HashMap<&str, usize> = columns.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let col = |name: &str| -> Result<Vec<f64>> {
        index
            .get(name)
            .map(|&i| table[i].clone())
            .ok_or_else(|| Error::Parse(format!("missing column {name}")))
    };
    let grid = col("s")?;
    let triple = |name: &str| -> Result<RadialProfile> {
        RadialProfile::sampled(&grid, col(name)?, col(&format!("{name}'"))?, col(&format!("{name}''"))?)
    };
    let values = |name: &str| -> Result<RadialProfile> {
        let v = col(name)?;
        if v.iter().all(|x| *x == 0.0) {
            Ok(RadialProfile::Zero)
        } else {
            RadialProfile::monotone(&grid, v)
        }
    };
    let radius = triple("rho")?;
    let shape = orbit
        .param_names()
        .into_iter()
        .map(triple)
        .collect::<Result<Vec<_>>>()?;
    let groups = group_count(orbit);
    let (diag_names, cross_names) = extrinsic_columns(orbit, groups);
    let extrinsic = Extrinsic {
        k_a: values("k_a")?,
        diag: diag_names.iter().map(|c| values(c)).collect::<Result<_>>()?,
        cross: cross_names
            .iter()
            .map(|c| match c {
                Some(c) => values(c),
                None => Ok(RadialProfile::Zero),
            })
            .collect::<Result<_>>()?,
    };
    let label = meta.get("label").cloned().unwrap_or_else(|| "table".into());
    InitialDataSet::new(label, orbit, asymptotic, grid, radius, shape, extrinsic, None)
}
