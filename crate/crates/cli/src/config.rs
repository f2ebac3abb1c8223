//! Run-config grammar: `[section]` headers, `key = value` lines, `#` comments,
//! comma-separated lists.
//!
//! Bare keys before any header resolve to the unique section that owns them;
//! ambiguous names (`a`, `gamma`) must be written inside their section.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_rational::Rational64;
use quasilab::discrete::Boundary;
use quasilab::exact::critical_exponent;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Exponents,
    Pme,
    Cns,
    Sweep,
    Verify,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exponents" => Ok(Self::Exponents),
            "pme" => Ok(Self::Pme),
            "cns" => Ok(Self::Cns),
            "sweep" => Ok(Self::Sweep),
            "verify" => Ok(Self::Verify),
            _ => Err(format!("unknown command `{s}`")),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exponents => "exponents",
            Self::Pme => "pme",
            Self::Cns => "cns",
            Self::Sweep => "sweep",
            Self::Verify => "verify",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Barenblatt,
    Gaussian,
    Box,
    Extinction,
    File,
}

impl FromStr for InitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "barenblatt" => Ok(Self::Barenblatt),
            "gaussian" => Ok(Self::Gaussian),
            "box" => Ok(Self::Box),
            "extinction" => Ok(Self::Extinction),
            "file" => Ok(Self::File),
            _ => Err(format!("unknown initial data `{s}`")),
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Barenblatt => "barenblatt",
            Self::Gaussian => "gaussian",
            Self::Box => "box",
            Self::Extinction => "extinction",
            Self::File => "file",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitVelocity {
    Quasi,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawSpec {
    pub mu_c: f64,
    pub alpha: f64,
    /// `alpha` as written, kept exact for the exponent calculators.
    pub alpha_exact: Rational64,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub ny: usize,
    pub a: f64,
    pub b: f64,
    pub ya: f64,
    pub yb: f64,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitSpec {
    pub kind: InitKind,
    pub mass: f64,
    /// Start time for barenblatt and extinction data; 0 otherwise.
    pub t0: f64,
    pub center: [f64; 2],
    pub width: f64,
    pub sigma: f64,
    pub background: f64,
    pub t_ext: f64,
    pub path: Option<PathBuf>,
    pub velocity: InitVelocity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSpec {
    pub t_end: f64,
    /// Defaults to 0.5 for pme and 0.4 for cns and sweep.
    pub cfl: f64,
    pub snapshot_times: Vec<f64>,
    pub series_stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureCfg {
    pub eps: f64,
    pub eps_list: Vec<f64>,
    pub a: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentsSpec {
    pub theta: Option<Rational64>,
    pub gamma: Option<Rational64>,
    /// `pressure.gamma` as written.
    pub pressure_gamma: Rational64,
}

impl ExponentsSpec {
    /// `(theta, gamma)` when either was given; the missing one defaults to
    /// `law.alpha` or `pressure.gamma`.
    pub fn pair(&self, alpha: Rational64) -> Option<(Rational64, Rational64)> {
        if self.theta.is_none() && self.gamma.is_none() {
            return None;
        }
        Some((self.theta.unwrap_or(alpha), self.gamma.unwrap_or(self.pressure_gamma)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub vacuum_floor: f64,
    pub rho_min_rel: f64,
    pub support_threshold: f64,
    pub entropy_slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub law: LawSpec,
    pub grid: GridSpec,
    pub init: InitSpec,
    pub time: TimeSpec,
    pub pressure: PressureCfg,
    pub exponents: ExponentsSpec,
    pub output: Option<PathBuf>,
    pub tolerances: Tolerances,
}

/// Every accepted key with its default, in documentation order.
pub const KEYS: &[(&str, &str)] = &[
    ("command", "pme"),
    ("init", "barenblatt"),
    ("law.mu_c", "0.5"),
    ("law.alpha", "2"),
    ("law.dim", "1"),
    ("grid.n", "512"),
    ("grid.ny", "grid.n"),
    ("grid.a", "-4"),
    ("grid.b", "4"),
    ("grid.ya", "grid.a"),
    ("grid.yb", "grid.b"),
    ("grid.boundary", "zeroflux"),
    ("init.mass", "1"),
    ("init.t0", "0.5"),
    ("init.center", "0, 0"),
    ("init.width", "0.2"),
    ("init.sigma", "0.5"),
    ("init.background", "0"),
    ("init.t_ext", "1"),
    ("init.path", "none"),
    ("init.velocity", "quasi"),
    ("time.t_end", "required"),
    ("time.cfl", "0.5 (pme), 0.4 (cns, sweep)"),
    ("time.snapshot_times", "none"),
    ("time.series_stride", "1"),
    ("pressure.eps", "1"),
    ("pressure.eps_list", "none"),
    ("pressure.a", "1"),
    ("pressure.gamma", "2"),
    ("exponents.theta", "law.alpha"),
    ("exponents.gamma", "pressure.gamma"),
    ("output.dir", "none"),
    ("tolerances.vacuum_floor", "0"),
    ("tolerances.rho_min_rel", "1e-10"),
    ("tolerances.support_threshold", "1e-12"),
    ("tolerances.entropy_slack", "1e-6"),
];

const TOP_LEVEL: &[&str] = &["command", "init"];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Splits `text` into fully qualified `section.key` entries.
fn tokenize(text: &str) -> Result<BTreeMap<String, Entry>, CliError> {
    let mut section: Option<String> = None;
    let mut out: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| CliError::syntax(line, "unterminated section header"))?
                .trim();
            if !KEYS.iter().any(|(k, _)| k.split_once('.').map(|(s, _)| s) == Some(name)) {
                return Err(CliError::syntax(line, format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| CliError::syntax(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(CliError::syntax(line, format!("invalid key `{key}`")));
        }
        if value.is_empty() {
            return Err(CliError::syntax(line, format!("missing value for `{key}`")));
        }
        let full = match &section {
            Some(s) => format!("{s}.{key}"),
            None => resolve_bare(key, line)?,
        };
        if !KEYS.iter().any(|(k, _)| *k == full) {
            return Err(CliError::UnknownKey { key: full, line });
        }
        if let Some(prev) = out.get(&full) {
            return Err(CliError::DuplicateKey { key: full, first: prev.line, second: line });
        }
        out.insert(full, Entry { value: value.to_string(), line });
    }
    Ok(out)
}

fn resolve_bare(key: &str, line: usize) -> Result<String, CliError> {
    if TOP_LEVEL.contains(&key) {
        return Ok(key.to_string());
    }
    let owners: Vec<&str> = KEYS
        .iter()
        .filter(|(k, _)| k.split_once('.').map(|(_, name)| name) == Some(key))
        .map(|(k, _)| *k)
        .collect();
    match owners.as_slice() {
        [one] => Ok(one.to_string()),
        [] => Err(CliError::UnknownKey { key: key.to_string(), line }),
        many => Err(CliError::syntax(
            line,
            format!("`{key}` is ambiguous ({}); write it inside its section", many.join(", ")),
        )),
    }
}

/// Parses a decimal (`0.2`, `1e-3`) or fraction (`3/5`) exactly.
pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        return if d == Rational64::from_integer(0) { None } else { Some(n / d) };
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: i64 = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let pow = 10i64.checked_pow(scale.unsigned_abs())?;
    let mut r = if scale >= 0 {
        Rational64::from_integer(digits.checked_mul(pow)?)
    } else {
        Rational64::new(digits, pow)
    };
    if neg {
        r = -r;
    }
    Some(r)
}

struct Reader {
    entries: BTreeMap<String, Entry>,
}

impl Reader {
    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn parse<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::semantic(key, format!("expected {what}, got `{}`", e.value))),
        }
    }

    fn num(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.parse::<f64>(key, "a number")?.unwrap_or(default);
        if !v.is_finite() {
            return Err(CliError::semantic(key, "must be finite"));
        }
        Ok(v)
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.num(key, default)?;
        if !(v > 0.0) {
            return Err(CliError::semantic(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.parse::<usize>(key, "a nonnegative integer")?.unwrap_or(default))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let Some(e) = self.raw(key) else {
            return Ok(Vec::new());
        };
        e.value
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::semantic(key, format!("bad list element `{}`", s.trim())))
            })
            .collect()
    }

    fn rational(&self, key: &str) -> Result<Option<Rational64>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => parse_rational(&e.value)
                .map(Some)
                .ok_or_else(|| CliError::semantic(key, format!("expected an exact number, got `{}`", e.value))),
        }
    }
}

/// Parses and validates a config; `command` overrides the file's `command` key
/// when it is absent, and must agree with it otherwise.
pub fn parse_config_for(text: &str, command: Option<Command>) -> Result<RunConfig, CliError> {
    let r = Reader { entries: tokenize(text)? };
    let file_command = r
        .parse::<String>("command", "a command")?
        .map(|s| s.parse::<Command>().map_err(|m| CliError::semantic("command", m)))
        .transpose()?;
    let command = match (command, file_command) {
        (Some(c), Some(f)) if c != f => {
            return Err(CliError::semantic("command", format!("config says `{f}` but `{c}` was requested")))
        }
        (Some(c), _) => c,
        (None, Some(f)) => f,
        (None, None) => Command::Pme,
    };

    let alpha_exact = r.rational("law.alpha")?.unwrap_or(Rational64::from_integer(2));
    let law = LawSpec {
        mu_c: r.positive("law.mu_c", 0.5)?,
        alpha: r.num("law.alpha", 2.0)?,
        alpha_exact,
        dim: r.count("law.dim", 1)?,
    };
    let n = r.count("grid.n", 512)?;
    let a = r.num("grid.a", -4.0)?;
    let b = r.num("grid.b", 4.0)?;
    let grid = GridSpec {
        n,
        ny: r.count("grid.ny", n)?,
        a,
        b,
        ya: r.num("grid.ya", a)?,
        yb: r.num("grid.yb", b)?,
        boundary: r
            .parse::<String>("grid.boundary", "a boundary")?
            .map(|s| s.parse::<Boundary>().map_err(|e| CliError::semantic("grid.boundary", e.to_string())))
            .transpose()?
            .unwrap_or(Boundary::ZeroFlux),
    };
    let kind = r
        .parse::<String>("init", "an initial-data kind")?
        .map(|s| s.parse::<InitKind>().map_err(|m| CliError::semantic("init", m)))
        .transpose()?
        .unwrap_or(InitKind::Barenblatt);
    let center = r.list("init.center")?;
    if center.len() > 2 {
        return Err(CliError::semantic("init.center", "at most two coordinates"));
    }
    let velocity = match r.parse::<String>("init.velocity", "quasi or zero")?.as_deref() {
        None | Some("quasi") => InitVelocity::Quasi,
        Some("zero") => InitVelocity::Zero,
        Some(other) => return Err(CliError::semantic("init.velocity", format!("expected quasi or zero, got `{other}`"))),
    };
    let timed = matches!(kind, InitKind::Barenblatt | InitKind::Extinction);
    let init = InitSpec {
        kind,
        mass: r.positive("init.mass", 1.0)?,
        t0: if timed { r.positive("init.t0", 0.5)? } else { 0.0 },
        center: [center.first().copied().unwrap_or(0.0), center.get(1).copied().unwrap_or(0.0)],
        width: r.positive("init.width", 0.2)?,
        sigma: r.positive("init.sigma", 0.5)?,
        background: r.num("init.background", 0.0)?,
        t_ext: r.positive("init.t_ext", 1.0)?,
        path: r.raw("init.path").map(|e| PathBuf::from(&e.value)),
        velocity,
    };
    if !timed && r.raw("init.t0").is_some() {
        return Err(CliError::semantic("init.t0", format!("only barenblatt and extinction data carry a start time, not {kind}")));
    }
    let default_cfl = if command == Command::Pme { 0.5 } else { 0.4 };
    let time = TimeSpec {
        t_end: r.parse::<f64>("time.t_end", "a number")?.unwrap_or(f64::NAN),
        cfl: r.positive("time.cfl", default_cfl)?,
        snapshot_times: r.list("time.snapshot_times")?,
        series_stride: r.count("time.series_stride", 1)?,
    };
    let pressure = PressureCfg {
        eps: r.num("pressure.eps", 1.0)?,
        eps_list: r.list("pressure.eps_list")?,
        a: r.positive("pressure.a", 1.0)?,
        gamma: r.num("pressure.gamma", 2.0)?,
    };
    let exponents = ExponentsSpec {
        theta: r.rational("exponents.theta")?,
        gamma: r.rational("exponents.gamma")?,
        pressure_gamma: r.rational("pressure.gamma")?.unwrap_or(Rational64::from_integer(2)),
    };
    let tolerances = Tolerances {
        vacuum_floor: r.num("tolerances.vacuum_floor", 0.0)?,
        rho_min_rel: r.positive("tolerances.rho_min_rel", 1e-10)?,
        support_threshold: r.positive("tolerances.support_threshold", 1e-12)?,
        entropy_slack: r.num("tolerances.entropy_slack", 1e-6)?,
    };
    let cfg = RunConfig {
        command,
        law,
        grid,
        init,
        time,
        pressure,
        exponents,
        output: r.raw("output.dir").map(|e| PathBuf::from(&e.value)),
        tolerances,
    };
    cfg.validate(|k| r.raw(k).is_some())?;
    Ok(cfg)
}

/// [`parse_config_for`] with the command taken from the file (default `pme`).
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    parse_config_for(text, None)
}

impl RunConfig {
    /// Start time of the run implied by the initial data.
    pub fn t_start(&self) -> f64 {
        self.init.t0
    }

    fn validate(&self, given: impl Fn(&str) -> bool) -> Result<(), CliError> {
        let law = &self.law;
        if !(law.alpha > 0.0) {
            return Err(CliError::semantic("law.alpha", "must be positive"));
        }
        if law.dim == 0 {
            return Err(CliError::semantic("law.dim", "must be at least 1"));
        }
        if matches!(self.command, Command::Exponents | Command::Verify) {
            return Ok(());
        }

        let m_c = critical_exponent::<f64>(law.dim);
        let extinction = self.init.kind == InitKind::Extinction;
        if extinction {
            if self.command != Command::Pme {
                return Err(CliError::semantic("init", "extinction data is only available to the pme command"));
            }
            if law.dim < 3 {
                return Err(CliError::semantic("law.dim", "extinction data needs dim >= 3"));
            }
            if law.alpha >= m_c {
                return Err(CliError::semantic(
                    "law.alpha",
                    format!("extinction data needs alpha < m_c = {m_c}, got {}", law.alpha),
                ));
            }
            if !(self.init.t0 < self.init.t_ext) {
                return Err(CliError::semantic("init.t0", "must precede init.t_ext"));
            }
            if !(self.grid.a > 0.0) {
                return Err(CliError::semantic("grid.a", "extinction samples a radial annulus, need a > 0"));
            }
        } else if law.alpha <= m_c {
            return Err(CliError::Core {
                key: "law.alpha".into(),
                source: quasilab::Error::ExtinctionRegime { alpha: law.alpha, m_c },
            });
        } else if law.dim > 2 {
            return Err(CliError::semantic("law.dim", "the solvers support dim 1 and 2"));
        }
        if matches!(self.command, Command::Cns | Command::Sweep) && law.dim != 1 {
            return Err(CliError::semantic("law.dim", "the compressible solver is one-dimensional"));
        }

        let g = &self.grid;
        if g.n < quasilab::discrete::MIN_CELLS || (law.dim == 2 && g.ny < quasilab::discrete::MIN_CELLS) {
            return Err(CliError::semantic("grid.n", format!("need at least {} cells", quasilab::discrete::MIN_CELLS)));
        }
        if !(g.a < g.b) {
            return Err(CliError::semantic("grid.b", "must exceed grid.a"));
        }
        if law.dim == 2 && !(g.ya < g.yb) {
            return Err(CliError::semantic("grid.yb", "must exceed grid.ya"));
        }

        if !given("time.t_end") {
            return Err(CliError::semantic("time.t_end", "required"));
        }
        let t = &self.time;
        if !t.t_end.is_finite() {
            return Err(CliError::semantic("time.t_end", "must be finite"));
        }
        if !(t.t_end > self.t_start()) {
            return Err(CliError::semantic("time.t_end", format!("must exceed the start time {}", self.t_start())));
        }
        if extinction && !(t.t_end < self.init.t_ext) {
            return Err(CliError::semantic("time.t_end", "must precede init.t_ext"));
        }
        if t.cfl > 1.0 {
            return Err(CliError::semantic("time.cfl", "must lie in (0, 1]"));
        }
        if t.snapshot_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CliError::semantic("time.snapshot_times", "must be strictly increasing"));
        }
        if t.snapshot_times.iter().any(|s| *s < self.t_start() || *s > t.t_end) {
            return Err(CliError::semantic("time.snapshot_times", "must lie between the start time and t_end"));
        }

        let i = &self.init;
        if i.kind == InitKind::File && i.path.is_none() {
            return Err(CliError::semantic("init.path", "required for file data"));
        }
        if i.background < 0.0 {
            return Err(CliError::semantic("init.background", "must be nonnegative"));
        }
        if self.tolerances.vacuum_floor < 0.0 {
            return Err(CliError::semantic("tolerances.vacuum_floor", "must be nonnegative"));
        }

        if matches!(self.command, Command::Cns | Command::Sweep) {
            let p = &self.pressure;
            if !(p.gamma > 1.0) {
                return Err(CliError::semantic("pressure.gamma", "must exceed 1"));
            }
            if self.command == Command::Cns && !(p.eps >= 0.0) {
                return Err(CliError::semantic("pressure.eps", "must be nonnegative"));
            }
            if self.command == Command::Sweep {
                if p.eps_list.is_empty() {
                    return Err(CliError::semantic("pressure.eps_list", "required for sweep"));
                }
                if p.eps_list.iter().any(|e| !(*e > 0.0)) {
                    return Err(CliError::semantic("pressure.eps_list", "entries must be positive"));
                }
                if p.eps_list.windows(2).any(|w| !(w[0] > w[1])) {
                    return Err(CliError::semantic("pressure.eps_list", "must be strictly descending"));
                }
            }
        }
        Ok(())
    }
}
