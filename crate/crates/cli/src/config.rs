//! Run configuration: command-line flags layered over an optional
//! `key = value` file, layered over built-in defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use penrose_core::jang_solver::JangBC;
use penrose_core::tolerances::Tolerances;

/// A malformed invocation or configuration (exit status 64).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "usage error: {}", self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(
    name = "penrose",
    version,
    about = "Penrose-inequality verification on cohomogeneity-one initial data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the verification pipeline on one data set and write its report.
    Verify(CommonArgs),
    /// Verify a grid of family parameters.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        ranges: SweepArgs,
    },
    /// Write the Jang, IMCF and conformal-flow tables of one data set.
    Trace {
        #[command(flatten)]
        common: CommonArgs,
        /// Length of the conformal run.
        #[arg(long)]
        t_stop: Option<f64>,
    },
    /// List the built-in data families.
    Families,
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Built-in family (see `penrose families`).
    #[arg(long)]
    pub family: Option<String>,
    /// Data table written by the library's table writer.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    /// Horizon radius, as an alternative to `--m`.
    #[arg(long)]
    pub r_plus: Option<f64>,
    #[arg(long, value_enum)]
    pub pipeline: Option<PipelineChoice>,
    /// Jang boundary value: `auto`, `zero`, `past`, `future` or a number in (−1, 1).
    #[arg(long)]
    pub bc: Option<String>,
    /// Tolerance profile; overrides `PENROSE_TOL_PROFILE`.
    #[arg(long)]
    pub profile: Option<String>,
    /// Single tolerance override `name=value`, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    #[arg(long)]
    pub s_max: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct SweepArgs {
    /// Range `lo:hi:count` of the mass parameter.
    #[arg(long)]
    pub m_range: Option<String>,
    /// Range `lo:hi:count` of the horizon radius.
    #[arg(long)]
    pub r_plus_range: Option<String>,
    /// Range `lo:hi:count` of the rotation parameter.
    #[arg(long)]
    pub a_range: Option<String>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PipelineChoice {
    Auto,
    Spacetime,
    Riemannian,
}

impl FromStr for PipelineChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Structured,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// Parameters of a built-in family; unused ones stay `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub name: String,
    pub n: usize,
    pub m: Option<f64>,
    pub a: Option<f64>,
    pub r_plus: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Family(FamilySpec),
    Data(PathBuf),
}

/// `lo:hi:count`, inclusive of both ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Range {
    pub fn single(x: f64) -> Self {
        Self { lo: x, hi: x, count: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for Range {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("range {s:?} is not lo:hi:count");
        match parts.as_slice() {
            [x] => x.trim().parse().map(Range::single).map_err(|_| bad()),
            [lo, hi, count] => {
                let r = Range {
                    lo: lo.trim().parse().map_err(|_| bad())?,
                    hi: hi.trim().parse().map_err(|_| bad())?,
                    count: count.trim().parse().map_err(|_| bad())?,
                };
                if r.count == 0 || !(r.lo.is_finite() && r.hi.is_finite()) || r.hi < r.lo {
                    return Err(bad());
                }
                Ok(r)
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    /// First swept parameter: the mass (`false`) or the horizon radius.
    pub by_radius: bool,
    pub first: Range,
    pub a: Range,
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: Source,
    pub pipeline: PipelineChoice,
    pub bc: Option<JangBC>,
    pub tol: Tolerances,
    pub s_max: Option<f64>,
    pub nodes: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub t_stop: f64,
    pub sweep: Option<SweepConfig>,
}

/// Keys accepted in a configuration file, besides `tol.<name>`.
const FILE_KEYS: [&str; 18] = [
    "family",
    "data",
    "n",
    "m",
    "a",
    "r_plus",
    "pipeline",
    "bc",
    "profile",
    "s_max",
    "nodes",
    "out",
    "format",
    "t_stop",
    "m_range",
    "r_plus_range",
    "a_range",
    "jobs",
];

/// Parses `key = value` lines; `#` starts a comment. Keys may use `-` or `_`.
pub fn parse_config_file(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if !(FILE_KEYS.contains(&key.as_str()) || key.starts_with("tol.")) {
            return Err(usage(format!("config line {}: unknown key {key:?}", i + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(usage(format!("config line {}: duplicate key {key:?}", i + 1)));
        }
    }
    Ok(map)
}

/// Flag value if given, else the file value parsed, else `None`.
fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> anyhow::Result<Option<T>>
where
    T::Err: fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|e| usage(format!("config key {key}: {e}"))),
    }
}

pub fn parse_bc(s: &str) -> anyhow::Result<Option<JangBC>> {
    Ok(match s {
        "auto" => None,
        "zero" => Some(JangBC::DegenerateZero),
        "past" => Some(JangBC::PastHorizonUnit),
        "future" => Some(JangBC::FutureHorizonUnit),
        other => {
            let alpha: f64 = other.parse().map_err(|_| usage(format!("bad --bc value {other:?}")))?;
            if !(alpha.abs() < 1.0) {
                return Err(usage(format!(
                    "interior boundary value must lie in (−1, 1), got {alpha}"
                )));
            }
            Some(JangBC::Interior { alpha })
        }
    })
}

fn apply_tolerance(tol: &mut Tolerances, name: &str, value: &str) -> anyhow::Result<()> {
    let mut json = serde_json::to_value(&*tol)?;
    let slot = json
        .get_mut(name)
        .filter(|_| name != "profile")
        .ok_or_else(|| usage(format!("unknown tolerance {name:?}")))?;
    *slot = if slot.is_u64() {
        serde_json::Value::from(
            value
                .parse::<u64>()
                .map_err(|_| usage(format!("tolerance {name} needs an integer")))?,
        )
    } else {
        serde_json::Value::from(
            value
                .parse::<f64>()
                .map_err(|_| usage(format!("tolerance {name} needs a number")))?,
        )
    };
    *tol = serde_json::from_value(json).map_err(|e| usage(format!("tolerance {name}: {e}")))?;
    Ok(())
}

const FAMILIES_WITH_SPIN: [&str; 2] = ["myers-perry", "myers-perry-ads"];
pub const FAMILY_NAMES: [&str; 7] = [
    "schwarzschild",
    "schwarzschild-ads",
    "myers-perry",
    "myers-perry-ads",
    "berger-example",
    "sp-example",
    "spin9-collapse",
];

impl RunConfig {
    /// Resolves flags over the config file (if any) over defaults.
    pub fn resolve(args: &CommonArgs, sweep: Option<&SweepArgs>, t_stop: Option<f64>) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let family: Option<String> = pick(args.family.clone(), &file, "family")?;
        let data: Option<PathBuf> = pick(args.data.clone(), &file, "data")?;
        let n: Option<usize> = pick(args.n, &file, "n")?;
        let m: Option<f64> = pick(args.m, &file, "m")?;
        let a: Option<f64> = pick(args.a, &file, "a")?;
        let r_plus: Option<f64> = pick(args.r_plus, &file, "r_plus")?;

        let profile: Option<String> = pick(args.profile.clone(), &file, "profile")?;
        let mut tol = match profile {
            Some(p) => Tolerances::by_name(&p).map_err(|e| usage(e.to_string()))?,
            None => Tolerances::from_env().map_err(|e| usage(e.to_string()))?,
        };
        // File overrides first, so that flags win.
        for (k, v) in file.iter().filter(|(k, _)| k.starts_with("tol.")) {
            apply_tolerance(&mut tol, &k["tol.".len()..], v)?;
        }
        for item in &args.tol {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| usage(format!("--tol expects NAME=VALUE, got {item:?}")))?;
            apply_tolerance(&mut tol, k.trim(), v.trim())?;
        }
        tol.validate().map_err(|e| usage(e.to_string()))?;

        let sweep_cfg = match sweep {
            Some(s) => Some(Self::resolve_sweep(s, &file, m, a, r_plus)?),
            None => None,
        };

        let source = match (family, data) {
            (Some(_), Some(_)) => return Err(usage("give either a family or a data file, not both")),
            (None, None) => return Err(usage("a family (--family) or a data file (--data) is required")),
            (None, Some(path)) => {
                if n.is_some() || m.is_some() || a.is_some() || r_plus.is_some() {
                    return Err(usage("family parameters cannot be combined with a data file"));
                }
                if !path.is_file() {
                    return Err(usage(format!("data file {} does not exist", path.display())));
                }
                Source::Data(path)
            }
            (Some(name), None) => {
                if !FAMILY_NAMES.contains(&name.as_str()) {
                    return Err(usage(format!("unknown family {name:?}; see `penrose families`")));
                }
                let spin = FAMILIES_WITH_SPIN.contains(&name.as_str());
                if a.is_some() && !spin {
                    return Err(usage(format!(
                        "--a only applies to the Myers-Perry families, not {name}"
                    )));
                }
                let closed = spin || name.starts_with("schwarzschild");
                if !closed && (m.is_some() || r_plus.is_some() || n.is_some()) {
                    return Err(usage(format!("{name} takes no parameters")));
                }
                if m.is_some() && r_plus.is_some() {
                    return Err(usage("give either --m or --r-plus, not both"));
                }
                if closed && sweep_cfg.is_none() && m.is_none() && r_plus.is_none() {
                    return Err(usage(format!("{name} needs --m or --r-plus")));
                }
                if n == Some(0) {
                    return Err(usage("--n must be at least 1"));
                }
                Source::Family(FamilySpec {
                    name,
                    n: n.unwrap_or(1),
                    m,
                    a,
                    r_plus,
                })
            }
        };
        if sweep_cfg.is_some()
            && !matches!(&source, Source::Family(f) if FAMILIES_WITH_SPIN.contains(&f.name.as_str()) || f.name.starts_with("schwarzschild"))
        {
            return Err(usage("sweeps need one of the closed-form families"));
        }

        let bc = match pick::<String>(args.bc.clone(), &file, "bc")? {
            Some(s) => parse_bc(&s)?,
            None => None,
        };
        let s_max: Option<f64> = pick(args.s_max, &file, "s_max")?;
        if matches!(s_max, Some(s) if !(s > 0.0)) {
            return Err(usage("--s-max must be positive"));
        }
        let nodes: Option<usize> = pick(args.nodes, &file, "nodes")?;
        if matches!(nodes, Some(k) if k < 16) {
            return Err(usage("--nodes must be at least 16"));
        }
        let t_stop = pick(t_stop, &file, "t_stop")?.unwrap_or(1.0);
        if !(t_stop >= 0.0 && t_stop.is_finite()) {
            return Err(usage("--t-stop must be nonnegative"));
        }
        Ok(Self {
            source,
            pipeline: pick(args.pipeline, &file, "pipeline")?.unwrap_or(PipelineChoice::Auto),
            bc,
            tol,
            s_max,
            nodes,
            out: pick(args.out.clone(), &file, "out")?,
            format: pick(args.format, &file, "format")?.unwrap_or(Format::Table),
            t_stop,
            sweep: sweep_cfg,
        })
    }

    fn resolve_sweep(
        s: &SweepArgs,
        file: &BTreeMap<String, String>,
        m: Option<f64>,
        a: Option<f64>,
        r_plus: Option<f64>,
    ) -> anyhow::Result<SweepConfig> {
        let m_range: Option<Range> = pick(
            s.m_range.as_deref().map(str::parse).transpose().map_err(usage)?,
            file,
            "m_range",
        )?;
        let r_range: Option<Range> = pick(
            s.r_plus_range.as_deref().map(str::parse).transpose().map_err(usage)?,
            file,
            "r_plus_range",
        )?;
        let a_range: Option<Range> = pick(
            s.a_range.as_deref().map(str::parse).transpose().map_err(usage)?,
            file,
            "a_range",
        )?;
        let (by_radius, first) = match (m_range.or(m.map(Range::single)), r_range.or(r_plus.map(Range::single))) {
            (Some(x), None) => (false, x),
            (None, Some(x)) => (true, x),
            (Some(_), Some(_)) => return Err(usage("sweep over either the mass or the horizon radius, not both")),
            (None, None) => return Err(usage("a sweep needs --m-range, --r-plus-range, --m or --r-plus")),
        };
        let jobs = pick(s.jobs, file, "jobs")?.unwrap_or(1);
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        Ok(SweepConfig {
            by_radius,
            first,
            a: a_range.unwrap_or(Range::single(a.unwrap_or(0.0))),
            jobs,
        })
    }
}

/// Directory for outputs, created on demand.
pub fn ensure_dir(path: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(path).map_err(|e| anyhow::anyhow!("cannot create {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common() -> CommonArgs {
        CommonArgs {
            family: Some("schwarzschild".into()),
            m: Some(1.0),
            ..CommonArgs::default()
        }
    }

    #[test]
    fn ranges_parse_and_include_both_ends() {
        let r: Range = "0:0.5:6".parse().unwrap();
        let v = r.values();
        assert_eq!(v.len(), 6);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[5], 0.5);
        assert_eq!("2".parse::<Range>().unwrap().values(), vec![2.0]);
        assert!("1:0:3".parse::<Range>().is_err());
        assert!("0:1".parse::<Range>().is_err());
        assert!("0:1:0".parse::<Range>().is_err());
    }

    #[test]
    fn config_file_syntax() {
        let m =
            parse_config_file("# comment\nfamily = myers-perry\n\nr-plus = 1.5 # trailing\ntol.zero = 1e-8\n").unwrap();
        assert_eq!(m["family"], "myers-perry");
        assert_eq!(m["r_plus"], "1.5");
        assert_eq!(m["tol.zero"], "1e-8");
        assert!(parse_config_file("nonsense").is_err());
        assert!(parse_config_file("colour = red").is_err());
        assert!(parse_config_file("m = 1\nm = 2").is_err());
    }

    #[test]
    fn flags_override_the_file_and_the_file_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(
            &path,
            "family = myers-perry\nm = 2\na = 0.3\nnodes = 300\ntol.margin_floor = -1e-3\n",
        )
        .unwrap();
        let args = CommonArgs {
            config: Some(path),
            m: Some(1.0),
            tol: vec!["zero=1e-8".into()],
            ..CommonArgs::default()
        };
        let cfg = RunConfig::resolve(&args, None, None).unwrap();
        let Source::Family(f) = &cfg.source else { panic!() };
        assert_eq!(f.m, Some(1.0));
        assert_eq!(f.a, Some(0.3));
        assert_eq!(cfg.nodes, Some(300));
        assert_eq!(cfg.tol.margin_floor, -1e-3);
        assert_eq!(cfg.tol.zero, 1e-8);
        assert_eq!(cfg.format, Format::Table);
        assert_eq!(cfg.pipeline, PipelineChoice::Auto);
    }

    #[test]
    fn inconsistent_settings_are_usage_errors() {
        let is_usage = |args: CommonArgs| {
            RunConfig::resolve(&args, None, None)
                .unwrap_err()
                .downcast_ref::<UsageError>()
                .is_some()
        };
        assert!(is_usage(CommonArgs {
            a: Some(0.3),
            ..common()
        }));
        assert!(is_usage(CommonArgs {
            r_plus: Some(1.0),
            ..common()
        }));
        assert!(is_usage(CommonArgs {
            family: Some("kerr".into()),
            ..common()
        }));
        assert!(is_usage(CommonArgs {
            family: None,
            ..common()
        }));
        assert!(is_usage(CommonArgs { m: None, ..common() }));
        assert!(is_usage(CommonArgs {
            tol: vec!["zero=-1".into()],
            ..common()
        }));
        assert!(is_usage(CommonArgs {
            tol: vec!["profile=1".into()],
            ..common()
        }));
        assert!(is_usage(CommonArgs {
            tol: vec!["nope=1".into()],
            ..common()
        }));
        assert!(is_usage(CommonArgs {
            bc: Some("1.5".into()),
            ..common()
        }));
        assert!(is_usage(CommonArgs {
            profile: Some("sloppy".into()),
            ..common()
        }));
        assert!(is_usage(CommonArgs {
            data: Some("/nonexistent.tbl".into()),
            family: None,
            m: None,
            ..common()
        }));
    }

    #[test]
    fn boundary_values() {
        assert_eq!(parse_bc("auto").unwrap(), None);
        assert_eq!(parse_bc("past").unwrap(), Some(JangBC::PastHorizonUnit));
        assert_eq!(parse_bc("-0.5").unwrap(), Some(JangBC::Interior { alpha: -0.5 }));
    }

    #[test]
    fn sweep_settings() {
        let args = CommonArgs {
            family: Some("myers-perry".into()),
            ..CommonArgs::default()
        };
        let s = SweepArgs {
            m_range: Some("1".into()),
            a_range: Some("0:0.6:4".into()),
            jobs: Some(2),
            ..SweepArgs::default()
        };
        let cfg = RunConfig::resolve(&args, Some(&s), None).unwrap();
        let sw = cfg.sweep.unwrap();
        assert!(!sw.by_radius);
        assert_eq!(sw.a.values().len(), 4);
        assert_eq!(sw.jobs, 2);
        let bad = SweepArgs { jobs: Some(0), ..s };
        assert!(RunConfig::resolve(&args, Some(&bad), None).is_err());
    }
}
