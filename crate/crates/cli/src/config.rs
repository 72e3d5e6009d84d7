//! Flat dotted-key configuration.
//!
//! A config file is TOML restricted to scalar keys (and one list), written
//! either as `phys.nu = 1e-3` or under `[phys]` tables; both flatten to the
//! same dotted key. Environment variables `CHNS_<KEY>` override the file,
//! with `.` spelled `__` (`CHNS_PHYS__NU=1e-3`). Unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt;

use chns_core::mms;
use chns_core::scenarios::{Buoyancy, PhiBar, ScenarioKind, ScenarioSpec};
use chns_core::scheme::{GammaStar, SchemeKind, SchemeOptions};
use chns_core::solvers::CorrectionBackend;
use chns_core::{GridSpec, PhysParams};

pub const ENV_PREFIX: &str = "CHNS_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Float,
    Int,
    Bool,
    Choice(&'static [&'static str]),
    FloatList,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Float => "float",
            Kind::Int => "integer",
            Kind::Bool => "bool",
            Kind::Choice(_) => "string",
            Kind::FloatList => "list of floats",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Str(String),
    List(Vec<f64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Str(s) => write!(f, "\"{s}\""),
            Value::List(v) => {
                let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "[{}]", items.join(", "))
            }
        }
    }
}

struct Key {
    name: &'static str,
    kind: Kind,
    doc: &'static str,
}

const SCENARIOS: &[&str] = &["bubble-merging", "phase-separation", "rising-bubble", "dripping-droplet", "mms"];

const KEYS: &[Key] = &[
    Key { name: "scenario", kind: Kind::Choice(SCENARIOS), doc: "experiment; mms is the manufactured solution on the unit square" },
    Key { name: "scheme", kind: Kind::Choice(&["ivs1", "ivs2"]), doc: "first-order or BDF2 time stepping" },
    Key { name: "grid.nx", kind: Kind::Int, doc: "cells in x" },
    Key { name: "grid.ny", kind: Kind::Int, doc: "cells in y" },
    Key { name: "grid.x0", kind: Kind::Float, doc: "left edge of the domain" },
    Key { name: "grid.y0", kind: Kind::Float, doc: "bottom edge of the domain" },
    Key { name: "grid.lx", kind: Kind::Float, doc: "domain width" },
    Key { name: "grid.ly", kind: Kind::Float, doc: "domain height" },
    Key { name: "time.tau", kind: Kind::Float, doc: "time step" },
    Key { name: "time.t_end", kind: Kind::Float, doc: "final time, at least one step" },
    Key { name: "phys.m", kind: Kind::Float, doc: "mobility M" },
    Key { name: "phys.lambda", kind: Kind::Float, doc: "mixing energy density lambda" },
    Key { name: "phys.nu", kind: Kind::Float, doc: "viscosity nu" },
    Key { name: "phys.eps", kind: Kind::Float, doc: "interface width eps" },
    Key { name: "phys.beta", kind: Kind::Float, doc: "stabilization beta" },
    Key { name: "phys.delta0", kind: Kind::Float, doc: "shift of the auxiliary variable" },
    Key { name: "phys.theta", kind: Kind::Float, doc: "scale of the explicit pressure weight gamma" },
    Key { name: "phys.eta", kind: Kind::Float, doc: "relaxation budget, in (0, 1]" },
    Key { name: "ic.r", kind: Kind::Float, doc: "bubble or droplet radius" },
    Key { name: "ic.s", kind: Kind::Float, doc: "interface parameter of the merging profile" },
    Key { name: "ic.xa", kind: Kind::Float, doc: "first center x (droplet center x)" },
    Key { name: "ic.ya", kind: Kind::Float, doc: "first center y" },
    Key { name: "ic.xb", kind: Kind::Float, doc: "second center x" },
    Key { name: "ic.yb", kind: Kind::Float, doc: "second center y (droplet center y)" },
    Key { name: "ic.amplitude", kind: Kind::Float, doc: "amplitude of the uniform perturbation" },
    Key { name: "ic.seed", kind: Kind::Int, doc: "perturbation seed; must be set explicitly for phase-separation" },
    Key { name: "buoyancy.chi", kind: Kind::Float, doc: "density contrast chi; 0 disables buoyancy" },
    Key { name: "buoyancy.gx", kind: Kind::Float, doc: "gravity x component" },
    Key { name: "buoyancy.gy", kind: Kind::Float, doc: "gravity y component" },
    Key { name: "buoyancy.phibar_mode", kind: Kind::Choice(&["spatial-average", "fixed"]), doc: "reference phase value" },
    Key { name: "buoyancy.phibar", kind: Kind::Float, doc: "reference value when phibar_mode = fixed" },
    Key { name: "solver.gamma_star", kind: Kind::Choice(&["extrapolated-pressure", "extrapolated-gamma"]), doc: "BDF2 explicit pressure weight" },
    Key { name: "solver.correction", kind: Kind::Choice(&["monolithic", "pressure-poisson"]), doc: "velocity-pressure correction solve" },
    Key { name: "solver.relax", kind: Kind::Bool, doc: "relax the auxiliary variable after each step" },
    Key { name: "output.every", kind: Kind::Int, doc: "snapshot cadence in steps" },
    Key { name: "output.format", kind: Kind::Choice(&["csv", "vtk"]), doc: "snapshot format" },
    Key { name: "output.cell_velocity", kind: Kind::Bool, doc: "also write cell-averaged velocity (csv format)" },
    Key { name: "check.mode", kind: Kind::Choice(&["strict", "record-only"]), doc: "stop on the first violated invariant, or only record it" },
    Key { name: "converge.taus", kind: Kind::FloatList, doc: "time steps of the study; empty selects the standard levels of the scheme" },
    Key { name: "converge.t_end", kind: Kind::Float, doc: "final time of the study" },
];

fn key(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Default value of every key for the given scenario.
pub fn defaults(scenario: &str) -> Result<BTreeMap<&'static str, Value>, ConfigError> {
    let spec = match ScenarioKind::from_name(scenario) {
        Some(k) => ScenarioSpec::preset(k),
        None if scenario == "mms" => mms_spec(),
        None => return err(format!("unknown scenario \"{scenario}\"")),
    };
    let (chi, (gx, gy), mode, bar) = match spec.buoyancy {
        Some(b) => match b.phibar {
            PhiBar::SpatialAverage => (b.chi, b.gravity, "spatial-average", 0.0),
            PhiBar::Fixed(v) => (b.chi, b.gravity, "fixed", v),
        },
        None => (0.0, (0.0, 0.0), "spatial-average", 0.0),
    };
    let p = spec.params;
    let f = Value::Float;
    let s = |v: &str| Value::Str(v.to_string());
    let scheme = match spec.scheme {
        SchemeKind::FirstOrder => "ivs1",
        SchemeKind::SecondOrder => "ivs2",
    };
    let every = if scenario == "mms" { 1 } else { ((0.1 / spec.tau).round() as u64).max(1) };
    Ok(BTreeMap::from([
        ("scenario", s(scenario)),
        ("scheme", s(scheme)),
        ("grid.nx", Value::Int(spec.nx as u64)),
        ("grid.ny", Value::Int(spec.ny as u64)),
        ("grid.x0", f(spec.x0)),
        ("grid.y0", f(spec.y0)),
        ("grid.lx", f(spec.lx)),
        ("grid.ly", f(spec.ly)),
        ("time.tau", f(spec.tau)),
        ("time.t_end", f(spec.t_end)),
        ("phys.m", f(p.m)),
        ("phys.lambda", f(p.lambda)),
        ("phys.nu", f(p.nu)),
        ("phys.eps", f(p.eps)),
        ("phys.beta", f(p.beta)),
        ("phys.delta0", f(p.delta0)),
        ("phys.theta", f(p.theta)),
        ("phys.eta", f(p.eta)),
        ("ic.r", f(spec.r)),
        ("ic.s", f(spec.s)),
        ("ic.xa", f(spec.xa)),
        ("ic.ya", f(spec.ya)),
        ("ic.xb", f(spec.xb)),
        ("ic.yb", f(spec.yb)),
        ("ic.amplitude", f(spec.amplitude)),
        ("ic.seed", Value::Int(spec.seed)),
        ("buoyancy.chi", f(chi)),
        ("buoyancy.gx", f(gx)),
        ("buoyancy.gy", f(gy)),
        ("buoyancy.phibar_mode", s(mode)),
        ("buoyancy.phibar", f(bar)),
        ("solver.gamma_star", s("extrapolated-pressure")),
        ("solver.correction", s("monolithic")),
        ("solver.relax", Value::Bool(true)),
        ("output.every", Value::Int(every)),
        ("output.format", s("csv")),
        ("output.cell_velocity", Value::Bool(false)),
        ("check.mode", s("strict")),
        ("converge.taus", Value::List(vec![])),
        ("converge.t_end", f(mms::STANDARD_T_END)),
    ]))
}

/// Placeholder setup carrying the manufactured-solution defaults.
fn mms_spec() -> ScenarioSpec {
    let tau = 1.0 / 64.0;
    ScenarioSpec {
        nx: mms::coupled_cells(SchemeKind::FirstOrder, tau),
        ny: mms::coupled_cells(SchemeKind::FirstOrder, tau),
        x0: 0.0,
        y0: 0.0,
        lx: 1.0,
        ly: 1.0,
        tau,
        t_end: mms::STANDARD_T_END,
        params: mms::standard_params(),
        scheme: SchemeKind::FirstOrder,
        r: 0.0,
        s: 0.0,
        xa: 0.0,
        ya: 0.0,
        xb: 0.0,
        yb: 0.0,
        amplitude: 0.0,
        seed: 0,
        buoyancy: None,
        ..ScenarioSpec::preset(ScenarioKind::BubbleMerging)
    }
}

/// Every key with its default, type and description, as a loadable config.
pub fn describe(scenario: &str) -> Result<String, ConfigError> {
    let d = defaults(scenario)?;
    let mut out = format!(
        "# configuration keys; defaults shown for scenario \"{scenario}\"\n\
         # environment override: {ENV_PREFIX}<KEY> with '.' written as \"__\", e.g. {ENV_PREFIX}PHYS__NU\n"
    );
    for k in KEYS {
        let allowed = match k.kind {
            Kind::Choice(c) => format!(" (one of: {})", c.join(", ")),
            _ => String::new(),
        };
        out += &format!("{} = {}  # {}{allowed}; {}\n", k.name, d[k.name], k.kind.name(), k.doc);
    }
    Ok(out)
}

fn from_toml(k: &Key, v: &toml::Value) -> Result<Value, ConfigError> {
    let bad = || ConfigError(format!("{}: expected {}, got {v}", k.name, k.kind.name()));
    match (k.kind, v) {
        (Kind::Float, toml::Value::Float(x)) => Ok(Value::Float(*x)),
        (Kind::Float, toml::Value::Integer(x)) => Ok(Value::Float(*x as f64)),
        (Kind::Int, toml::Value::Integer(x)) if *x >= 0 => Ok(Value::Int(*x as u64)),
        (Kind::Bool, toml::Value::Boolean(b)) => Ok(Value::Bool(*b)),
        (Kind::Choice(c), toml::Value::String(s)) => choice(k, c, s),
        (Kind::FloatList, toml::Value::Array(a)) => a
            .iter()
            .map(|x| match x {
                toml::Value::Float(f) => Ok(*f),
                toml::Value::Integer(i) => Ok(*i as f64),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Value::List),
        _ => Err(bad()),
    }
}

fn from_text(k: &Key, s: &str) -> Result<Value, ConfigError> {
    let s = s.trim();
    let bad = || ConfigError(format!("{}: expected {}, got \"{s}\"", k.name, k.kind.name()));
    match k.kind {
        Kind::Float => s.parse().map(Value::Float).map_err(|_| bad()),
        Kind::Int => s.parse().map(Value::Int).map_err(|_| bad()),
        Kind::Bool => s.parse().map(Value::Bool).map_err(|_| bad()),
        Kind::Choice(c) => choice(k, c, s.trim_matches('"')),
        Kind::FloatList => {
            let body = s.trim_start_matches('[').trim_end_matches(']');
            body.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<f64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::List)
        }
    }
}

fn choice(k: &Key, allowed: &[&str], s: &str) -> Result<Value, ConfigError> {
    if allowed.contains(&s) {
        Ok(Value::Str(s.to_string()))
    } else {
        err(format!("{}: \"{s}\" is not one of {}", k.name, allowed.join(", ")))
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (k, v) in table {
        let name = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&name, t, out),
            _ => out.push((name, v.clone())),
        }
    }
}

/// User-supplied values, before defaults are filled in.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    values: BTreeMap<&'static str, Value>,
}

impl Overrides {
    pub fn parse_toml(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e| ConfigError(format!("config syntax: {e}")))?;
        let mut flat = vec![];
        flatten("", &table, &mut flat);
        let mut values = BTreeMap::new();
        for (name, v) in flat {
            let k = key(&name).ok_or_else(|| ConfigError(format!("unknown config key \"{name}\"")))?;
            values.insert(k.name, from_toml(k, &v)?);
        }
        Ok(Self { values })
    }

    /// Applies `CHNS_*` variables from `vars` on top of the file values.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<(), ConfigError> {
        for (var, text) in vars {
            let Some(rest) = var.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let name = rest.to_ascii_lowercase().replace("__", ".");
            let k = key(&name)
                .ok_or_else(|| ConfigError(format!("environment variable {var} names unknown config key \"{name}\"")))?;
            self.values.insert(k.name, from_text(k, &text)?);
        }
        Ok(())
    }

    pub fn is_set(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }
}

/// What a run simulates.
#[derive(Debug, Clone, PartialEq)]
pub enum Setup {
    Scenario(ScenarioSpec),
    /// Manufactured solution on the unit square.
    Mms {
        n: usize,
        scheme: SchemeKind,
        tau: f64,
        t_end: f64,
        params: PhysParams,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    Csv,
    Vtk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Strict,
    RecordOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub setup: Setup,
    pub opts: SchemeOptions,
    pub every: usize,
    pub format: SnapshotFormat,
    pub cell_velocity: bool,
    pub mode: CheckMode,
    pub converge_taus: Vec<f64>,
    pub converge_t_end: f64,
}

impl RunConfig {
    /// Merges defaults of the selected scenario with the overrides.
    pub fn resolve(ov: &Overrides) -> Result<Self, ConfigError> {
        let scenario = match ov.values.get("scenario") {
            Some(Value::Str(s)) => s.clone(),
            _ => "bubble-merging".to_string(),
        };
        let mut m = defaults(&scenario)?;
        for (k, v) in &ov.values {
            m.insert(k, v.clone());
        }
        let fl = |k: &str| match &m[k] {
            Value::Float(v) => *v,
            other => unreachable!("{k} holds {other:?}"),
        };
        let int = |k: &str| match &m[k] {
            Value::Int(v) => *v,
            other => unreachable!("{k} holds {other:?}"),
        };
        let st = |k: &str| match &m[k] {
            Value::Str(v) => v.clone(),
            other => unreachable!("{k} holds {other:?}"),
        };
        let bl = |k: &str| match &m[k] {
            Value::Bool(v) => *v,
            other => unreachable!("{k} holds {other:?}"),
        };

        let scheme = if st("scheme") == "ivs2" { SchemeKind::SecondOrder } else { SchemeKind::FirstOrder };
        let params = PhysParams {
            m: fl("phys.m"),
            lambda: fl("phys.lambda"),
            nu: fl("phys.nu"),
            eps: fl("phys.eps"),
            beta: fl("phys.beta"),
            delta0: fl("phys.delta0"),
            theta: fl("phys.theta"),
            eta: fl("phys.eta"),
        };
        params.validate().map_err(|e| ConfigError(e.to_string()))?;
        let (tau, t_end) = (fl("time.tau"), fl("time.t_end"));
        if !(tau > 0.0 && tau.is_finite()) {
            return err(format!("time.tau must be positive, got {tau:?}"));
        }
        if !(t_end >= tau) {
            return err(format!("time.t_end = {t_end:?} is shorter than one step of {tau:?}"));
        }
        let (nx, ny) = (int("grid.nx") as usize, int("grid.ny") as usize);
        let setup = match ScenarioKind::from_name(&scenario) {
            Some(kind) => {
                if kind == ScenarioKind::PhaseSeparation && !ov.is_set("ic.seed") {
                    return err("ic.seed is required for the phase-separation scenario");
                }
                let chi = fl("buoyancy.chi");
                let gravity = (fl("buoyancy.gx"), fl("buoyancy.gy"));
                let buoyancy = (chi != 0.0 && gravity != (0.0, 0.0)).then(|| Buoyancy {
                    chi,
                    gravity,
                    phibar: if st("buoyancy.phibar_mode") == "fixed" {
                        PhiBar::Fixed(fl("buoyancy.phibar"))
                    } else {
                        PhiBar::SpatialAverage
                    },
                });
                let spec = ScenarioSpec {
                    kind,
                    scheme,
                    nx,
                    ny,
                    x0: fl("grid.x0"),
                    y0: fl("grid.y0"),
                    lx: fl("grid.lx"),
                    ly: fl("grid.ly"),
                    tau,
                    t_end,
                    params,
                    r: fl("ic.r"),
                    s: fl("ic.s"),
                    xa: fl("ic.xa"),
                    ya: fl("ic.ya"),
                    xb: fl("ic.xb"),
                    yb: fl("ic.yb"),
                    amplitude: fl("ic.amplitude"),
                    seed: int("ic.seed"),
                    buoyancy,
                };
                spec.validate().map_err(|e| ConfigError(e.to_string()))?;
                Setup::Scenario(spec)
            }
            None => {
                let unit = (fl("grid.x0"), fl("grid.y0"), fl("grid.lx"), fl("grid.ly")) == (0.0, 0.0, 1.0, 1.0);
                if nx != ny || !unit {
                    return err("the mms scenario runs on the unit square with grid.nx = grid.ny");
                }
                GridSpec::unit_square(nx).map_err(|e| ConfigError(e.to_string()))?;
                Setup::Mms {
                    n: nx,
                    scheme,
                    tau,
                    t_end,
                    params,
                }
            }
        };

        let every = int("output.every") as usize;
        if every == 0 {
            return err("output.every must be at least 1");
        }
        let taus = match &m["converge.taus"] {
            Value::List(v) if v.is_empty() => standard_taus(scheme),
            Value::List(v) => v.clone(),
            other => unreachable!("converge.taus holds {other:?}"),
        };
        if taus.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return err("converge.taus must be positive");
        }
        let opts = SchemeOptions {
            gamma_star: if st("solver.gamma_star") == "extrapolated-gamma" {
                GammaStar::ExtrapolatedGamma
            } else {
                GammaStar::ExtrapolatedPressure
            },
            correction: if st("solver.correction") == "pressure-poisson" {
                CorrectionBackend::PressurePoisson
            } else {
                CorrectionBackend::Monolithic
            },
            relax: bl("solver.relax"),
        };
        Ok(Self {
            setup,
            opts,
            every,
            format: if st("output.format") == "vtk" { SnapshotFormat::Vtk } else { SnapshotFormat::Csv },
            cell_velocity: bl("output.cell_velocity"),
            mode: if st("check.mode") == "record-only" { CheckMode::RecordOnly } else { CheckMode::Strict },
            converge_taus: taus,
            converge_t_end: fl("converge.t_end"),
        })
    }

    pub fn scheme(&self) -> SchemeKind {
        match &self.setup {
            Setup::Scenario(s) => s.scheme,
            Setup::Mms { scheme, .. } => *scheme,
        }
    }

    pub fn params(&self) -> &PhysParams {
        match &self.setup {
            Setup::Scenario(s) => &s.params,
            Setup::Mms { params, .. } => params,
        }
    }
}

/// The standard refinement levels for each scheme.
pub fn standard_taus(scheme: SchemeKind) -> Vec<f64> {
    match scheme {
        SchemeKind::FirstOrder => vec![1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0],
        SchemeKind::SecondOrder => vec![1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0],
    }
}
