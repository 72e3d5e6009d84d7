//! Initial conditions, Boussinesq buoyancy and preset experiment setups.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{CellField, GridSpec, VelocityField};
use crate::ops::cell_to_face_average;
use crate::physics::{PhysParams, SchemeState};
use crate::scheme::{Forcing, SchemeKind, SchemeOptions, Simulation, Unforced};

/// Two touching bubbles:
/// `1 - tanh((d_a - r) / 2s) - tanh((d_b - r) / 2s)`.
pub fn ic_bubble_merging(g: &GridSpec, r: f64, s: f64, a: (f64, f64), b: (f64, f64)) -> CellField {
    CellField::from_fn(g, |x, y| {
        let da = ((x - a.0).powi(2) + (y - a.1).powi(2)).sqrt();
        let db = ((x - b.0).powi(2) + (y - b.1).powi(2)).sqrt();
        1.0 - ((da - r) / (2.0 * s)).tanh() - ((db - r) / (2.0 * s)).tanh()
    })
}

/// Bubble centers `(0.5 - r/sqrt2, 0.5 + r/sqrt2)` and `(0.5 + r/sqrt2, 0.5 - r/sqrt2)`.
pub fn merging_centers(r: f64) -> ((f64, f64), (f64, f64)) {
    let o = r / std::f64::consts::SQRT_2;
    ((0.5 - o, 0.5 + o), (0.5 + o, 0.5 - o))
}

/// Uniform perturbation in `[-amplitude, amplitude)` for cell `(i, j)`.
///
/// Each cell draws from its own position of a counter-based stream (row `j`
/// selects the stream, column `i` the offset), so the value of a cell does
/// not depend on the grid width or on any other cell.
pub fn cell_noise(seed: u64, i: usize, j: usize, amplitude: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j as u64);
    rng.set_word_pos(2 * i as u128);
    amplitude * (2.0 * rng.gen::<f64>() - 1.0)
}

/// Linear profile `2y - 1` plus seeded uniform noise.
pub fn ic_phase_separation(g: &GridSpec, amplitude: f64, seed: u64) -> CellField {
    CellField::from_index_fn(g, |i, j| {
        let (_, y) = g.cell_center(i, j);
        2.0 * y - 1.0 + cell_noise(seed, i, j, amplitude)
    })
}

/// `tanh((r - |x - c|) / eps)`: +1 inside the disc, -1 outside.
pub fn ic_radial_droplet(g: &GridSpec, r: f64, center: (f64, f64), eps: f64) -> CellField {
    CellField::from_fn(g, |x, y| {
        let d = ((x - center.0).powi(2) + (y - center.1).powi(2)).sqrt();
        ((r - d) / eps).tanh()
    })
}

/// Reference value subtracted from the phase field in the buoyancy force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiBar {
    SpatialAverage,
    Fixed(f64),
}

/// Boussinesq force `chi * (phi - phibar) * g`, interpolated to the faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Buoyancy {
    pub chi: f64,
    pub gravity: (f64, f64),
    pub phibar: PhiBar,
}

impl Buoyancy {
    pub fn force(&self, g: &GridSpec, phi: &CellField) -> VelocityField {
        let bar = match self.phibar {
            PhiBar::SpatialAverage => phi.mean(),
            PhiBar::Fixed(v) => v,
        };
        let rho = phi.map(|v| self.chi * (v - bar));
        let mut f = cell_to_face_average(g, &rho);
        f.u.scale(self.gravity.0);
        f.v.scale(self.gravity.1);
        f
    }
}

impl Forcing for Buoyancy {
    fn momentum(&self, g: &GridSpec, _t_next: f64, phi: &CellField) -> Option<VelocityField> {
        Some(self.force(g, phi))
    }
    fn is_active(&self) -> bool {
        self.chi != 0.0 && (self.gravity.0 != 0.0 || self.gravity.1 != 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    BubbleMerging,
    PhaseSeparation,
    RisingBubble,
    DrippingDroplet,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::BubbleMerging,
        ScenarioKind::PhaseSeparation,
        ScenarioKind::RisingBubble,
        ScenarioKind::DrippingDroplet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::BubbleMerging => "bubble-merging",
            ScenarioKind::PhaseSeparation => "phase-separation",
            ScenarioKind::RisingBubble => "rising-bubble",
            ScenarioKind::DrippingDroplet => "dripping-droplet",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub scheme: SchemeKind,
    /// Cells in x and y.
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub lx: f64,
    pub ly: f64,
    pub tau: f64,
    pub t_end: f64,
    pub params: PhysParams,
    /// Radius of the bubble/droplet.
    pub r: f64,
    /// Interface parameter of the merging profile.
    pub s: f64,
    pub xa: f64,
    pub ya: f64,
    pub xb: f64,
    pub yb: f64,
    pub amplitude: f64,
    pub seed: u64,
    pub buoyancy: Option<Buoyancy>,
}

impl ScenarioSpec {
    /// The reference setup of each experiment.
    pub fn preset(kind: ScenarioKind) -> Self {
        let unit = |n: usize| (n, n, 0.0, 0.0, 1.0, 1.0);
        let base = |p: PhysParams, scheme, grid: (usize, usize, f64, f64, f64, f64), tau, t_end| ScenarioSpec {
            kind,
            scheme,
            nx: grid.0,
            ny: grid.1,
            x0: grid.2,
            y0: grid.3,
            lx: grid.4,
            ly: grid.5,
            tau,
            t_end,
            params: p,
            r: 0.0,
            s: 0.0,
            xa: 0.0,
            ya: 0.0,
            xb: 0.0,
            yb: 0.0,
            amplitude: 0.0,
            seed: 0,
            buoyancy: None,
        };
        match kind {
            ScenarioKind::BubbleMerging => {
                let r = 0.15;
                let (a, b) = merging_centers(r);
                ScenarioSpec {
                    r,
                    s: 1e-2,
                    xa: a.0,
                    ya: a.1,
                    xb: b.0,
                    yb: b.1,
                    ..base(PhysParams::new(1e-2, 1e-4, 1e-3, 1e-2), SchemeKind::FirstOrder, unit(128), 1e-3, 2.0)
                }
            }
            ScenarioKind::PhaseSeparation => ScenarioSpec {
                amplitude: 1e-2,
                seed: 1,
                ..base(PhysParams::new(1e-1, 1e-5, 1.0, 1e-2), SchemeKind::SecondOrder, unit(100), 1e-3, 20.0)
            },
            ScenarioKind::RisingBubble => ScenarioSpec {
                r: 0.15,
                xa: 0.5,
                yb: 0.25,
                buoyancy: Some(Buoyancy {
                    chi: 5.0,
                    gravity: (0.0, 10.0),
                    phibar: PhiBar::SpatialAverage,
                }),
                ..base(PhysParams::new(1e-2, 1e-3, 1.0, 1e-2), SchemeKind::SecondOrder, unit(200), 5e-4, 12.0)
            },
            ScenarioKind::DrippingDroplet => ScenarioSpec {
                r: 0.32,
                xa: 0.5,
                yb: 2.1,
                buoyancy: Some(Buoyancy {
                    chi: 1.0,
                    gravity: (0.0, -10.0),
                    phibar: PhiBar::Fixed(0.0),
                }),
                ..base(
                    PhysParams::new(1e-2, 1e-3, 1e-1, 1e-2),
                    SchemeKind::SecondOrder,
                    (250, 500, 0.0, 0.0, 1.0, 2.0),
                    4e-4,
                    1.5,
                )
            },
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.nx, self.ny, self.x0, self.y0, self.lx, self.ly)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.tau > 0.0 && self.t_end >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau = {}, t_end = {}",
                self.tau, self.t_end
            )));
        }
        let inside = |x: f64, y: f64| {
            x >= self.x0 && x <= self.x0 + self.lx && y >= self.y0 - self.ly && y <= self.y0 + 2.0 * self.ly
        };
        match self.kind {
            ScenarioKind::BubbleMerging => {
                if !(self.r > 0.0 && self.s > 0.0 && inside(self.xa, self.ya) && inside(self.xb, self.yb)) {
                    return Err(Error::InvalidParameter("bubble geometry outside the domain".into()));
                }
            }
            ScenarioKind::PhaseSeparation => {
                if !(self.amplitude >= 0.0) {
                    return Err(Error::InvalidParameter("negative noise amplitude".into()));
                }
            }
            ScenarioKind::RisingBubble | ScenarioKind::DrippingDroplet => {
                // the droplet center may sit just outside the wall
                if !(self.r > 0.0 && inside(self.xa, self.yb)) {
                    return Err(Error::InvalidParameter("droplet geometry outside the domain".into()));
                }
            }
        }
        self.grid()?;
        Ok(())
    }

    /// Initial phase field.
    pub fn initial_phi(&self, g: &GridSpec) -> CellField {
        match self.kind {
            ScenarioKind::BubbleMerging => {
                ic_bubble_merging(g, self.r, self.s, (self.xa, self.ya), (self.xb, self.yb))
            }
            ScenarioKind::PhaseSeparation => ic_phase_separation(g, self.amplitude, self.seed),
            ScenarioKind::RisingBubble | ScenarioKind::DrippingDroplet => {
                ic_radial_droplet(g, self.r, (self.xa, self.yb), self.params.eps)
            }
        }
    }

    /// Initial level: the phase field of the setup, fluid at rest, zero
    /// pressure.
    pub fn initial_state(&self, g: &GridSpec) -> Result<SchemeState> {
        SchemeState::initial(g, self.initial_phi(g), VelocityField::zeros(g), &self.params)
    }

    /// External forcing of the setup (buoyancy, if any).
    pub fn forcing(&self) -> &dyn Forcing {
        match &self.buoyancy {
            Some(b) => b,
            None => &Unforced,
        }
    }

    /// Validates the setup and builds a ready-to-step simulation.
    pub fn simulation(&self, opts: SchemeOptions) -> Result<Simulation> {
        self.validate()?;
        let g = self.grid()?;
        Simulation::new(&g, &self.params, self.tau, self.scheme, opts, self.initial_state(&g)?)
    }

    /// Steps needed to reach `t_end`.
    pub fn steps(&self) -> usize {
        crate::mms::step_count(self.t_end, self.tau)
    }
}
