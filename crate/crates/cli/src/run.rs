//! Run orchestration: time stepping with invariant checks, snapshot cadence
//! and convergence studies.

use std::fmt;
use std::path::{Path, PathBuf};

use chns_core::mms::{self, ErrorTable, ExactSolution, MmsForcing, NORM_NAMES};
use chns_core::physics::mass;
use chns_core::scheme::{Forcing, SchemeKind, Simulation, StepReport};
use chns_core::GridSpec;

use crate::config::{CheckMode, ConfigError, RunConfig, Setup};
use crate::output::{write_snapshot, EnergyWriter};

pub const DIV_LIMIT: f64 = 1e-8;
pub const MASS_LIMIT: f64 = 1e-10;

/// A failed invariant check.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: &'static str,
    pub step: usize,
    pub t: f64,
    pub value: f64,
    pub limit: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "  invariant: {}\n  step: {}\n  t: {:?}\n  value: {:e}\n  limit: {:e}",
            self.invariant, self.step, self.t, self.value, self.limit
        )
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Invariant(Violation),
    Rates(Vec<String>),
    Numerical { step: usize, source: chns_core::Error },
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Invariant(_) | RunError::Rates(_) => 1,
            RunError::Config(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Io { .. } => 4,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error\n  reason: {e}"),
            RunError::Invariant(v) => write!(f, "invariant violated\n{v}"),
            RunError::Rates(bad) => write!(f, "convergence rates outside the expected band\n  {}", bad.join("\n  ")),
            RunError::Numerical { step, source } => {
                write!(f, "numerical failure\n  step: {step}\n  reason: {source}")
            }
            RunError::Io { path, source } => write!(f, "i/o failure\n  path: {}\n  reason: {source}", path.display()),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Per-step invariant checks.
struct Checker {
    strict: bool,
    energy: bool,
    mass: bool,
    extended: bool,
    m0: f64,
    mass_scale: f64,
    e_prev: f64,
    max_div: f64,
    max_drift: f64,
    violations: Vec<Violation>,
}

impl Checker {
    fn test(&mut self, r: &StepReport, invariant: &'static str, value: f64, limit: f64) -> Result<(), RunError> {
        if value <= limit {
            return Ok(());
        }
        let v = Violation {
            invariant,
            step: r.step,
            t: r.t,
            value,
            limit,
        };
        if self.strict {
            return Err(RunError::Invariant(v));
        }
        self.violations.push(v);
        Ok(())
    }

    fn observe(&mut self, r: &StepReport, energy_modified: f64) -> Result<(), RunError> {
        self.max_div = self.max_div.max(r.max_div);
        self.test(r, "divergence-free", r.max_div, DIV_LIMIT)?;
        // A <= 0 already aborts the step; kept for the record
        self.test(r, "solvability", -r.a, 0.0)?;
        if self.mass {
            let drift = (r.mass_after - self.m0).abs() / self.mass_scale;
            self.max_drift = self.max_drift.max(drift);
            self.test(r, "mass-conservation", drift, MASS_LIMIT)?;
        }
        if self.energy {
            self.test(r, "energy-law", r.energy_excess(), r.energy_slack())?;
            self.test(r, "relaxed-energy", r.energy_after - r.energy_before, r.energy_slack())?;
            let slack = 1e-9 * self.e_prev.abs().max(energy_modified.abs());
            self.test(r, "energy-monotone", energy_modified - self.e_prev, slack)?;
        }
        self.e_prev = energy_modified;
        if self.extended {
            self.test(r, "a-identity", (r.a - r.a_identity).abs() / r.a, 1e-8)?;
            self.test(r, "phase-residual", r.phi_residual, 1e-8)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub max_div: f64,
    /// Largest mass drift relative to the L1 size of the initial phase
    /// field; `None` when mass is not conserved by the setup.
    pub max_mass_drift: Option<f64>,
    pub energy_checked: bool,
    pub violations: Vec<Violation>,
    pub files: usize,
}

/// Runs the configured setup. With `out`, writes `energy.csv` and snapshots;
/// `extended` adds the consistency checks of `validate`.
pub fn simulate(cfg: &RunConfig, out: Option<&Path>, extended: bool) -> Result<RunSummary, RunError> {
    let mms_forcing;
    let (mut sim, forcing, steps, conserves_mass): (Simulation, &dyn Forcing, usize, bool) = match &cfg.setup {
        Setup::Scenario(spec) => {
            let sim = spec
                .simulation(cfg.opts)
                .map_err(|source| RunError::Numerical { step: 0, source })?;
            (sim, spec.forcing(), spec.steps(), true)
        }
        Setup::Mms {
            n,
            scheme,
            tau,
            t_end,
            params,
        } => {
            let g = GridSpec::unit_square(*n).map_err(|e| ConfigError(e.to_string()))?;
            let exact = ExactSolution::new(*params);
            mms_forcing = MmsForcing { exact };
            let init = exact
                .initial_state(&g)
                .map_err(|source| RunError::Numerical { step: 0, source })?;
            let sim = Simulation::new(&g, params, *tau, *scheme, cfg.opts, init)
                .map_err(|source| RunError::Numerical { step: 0, source })?;
            (sim, &mms_forcing, mms::step_count(*t_end, *tau), false)
        }
    };
    let g = *sim.grid();
    let phi0 = &sim.state().phi;
    let l1 = phi0.data().iter().map(|v| v.abs()).sum::<f64>() * g.cell_area();
    let mut check = Checker {
        strict: cfg.mode == CheckMode::Strict,
        energy: !forcing.is_active(),
        mass: conserves_mass,
        extended,
        m0: mass(&g, phi0),
        mass_scale: l1.max(f64::MIN_POSITIVE),
        e_prev: sim.energy_modified(),
        max_div: sim.diagnostics().max_div,
        max_drift: 0.0,
        violations: vec![],
    };

    let mut energy = None;
    let mut files = 0;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join("energy.csv");
        let mut w = EnergyWriter::create(&path).map_err(io_err(&path))?;
        w.row(&sim.diagnostics()).map_err(io_err(&path))?;
        energy = Some((w, path));
        files += 1 + write_snapshot(dir, &g, sim.state(), 0, cfg.format, cfg.cell_velocity)
            .map_err(io_err(dir))?
            .len();
    }

    for k in 1..=steps {
        let r = sim
            .step(forcing)
            .map_err(|source| RunError::Numerical { step: k, source })?;
        let outcome = check.observe(&r, sim.energy_modified());
        if let Some((w, path)) = &mut energy {
            w.row(&sim.diagnostics()).map_err(io_err(path))?;
        }
        if let Some(dir) = out {
            if k % cfg.every == 0 || k == steps || outcome.is_err() {
                files += write_snapshot(dir, &g, sim.state(), k, cfg.format, cfg.cell_velocity)
                    .map_err(io_err(dir))?
                    .len();
            }
        }
        if let Err(e) = outcome {
            if let Some((w, path)) = energy.take() {
                w.finish().map_err(io_err(&path))?;
            }
            return Err(e);
        }
    }
    if let Some((w, path)) = energy.take() {
        w.finish().map_err(io_err(&path))?;
    }
    Ok(RunSummary {
        steps,
        max_div: check.max_div,
        max_mass_drift: conserves_mass.then_some(check.max_drift),
        energy_checked: check.energy,
        violations: check.violations,
        files,
    })
}

/// Expected band of the observed order at the finest pair.
fn rate_band(kind: SchemeKind, norm: &str) -> (f64, f64) {
    match kind {
        SchemeKind::FirstOrder => (0.85, 1.15),
        SchemeKind::SecondOrder if norm == "p_l2_h1" => (1.7, 2.4),
        SchemeKind::SecondOrder => (1.7, 2.3),
    }
}

/// Runs the manufactured-solution study. Returns the table and the norms
/// whose finest-pair rate falls outside the expected band.
pub fn converge(cfg: &RunConfig, threads: usize) -> Result<(ErrorTable, Vec<String>), RunError> {
    if !matches!(cfg.setup, Setup::Mms { .. }) {
        return Err(ConfigError("converge needs scenario = \"mms\"".into()).into());
    }
    let kind = cfg.scheme();
    let table = mms::run_convergence(kind, &cfg.converge_taus, cfg.params(), cfg.converge_t_end, cfg.opts, threads)
        .map_err(|source| RunError::Numerical { step: 0, source })?;
    let mut bad = vec![];
    if let Some(rates) = table.finest_rates() {
        for (name, r) in NORM_NAMES.iter().zip(rates) {
            let (lo, hi) = rate_band(kind, name);
            if !(lo..=hi).contains(&r) {
                bad.push(format!("{name}: rate {r:.3} not in [{lo}, {hi}]"));
            }
        }
    }
    Ok((table, bad))
}
