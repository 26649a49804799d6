//! Exact solution bases of the system and the matrices built from them.
//!
//! Two independent constructions are provided: the Neumann series of the
//! coupled Volterra operators `K_j` ([`neumann_solution`]) and direct
//! integration of the interaction-picture ODE ([`ode_solution`]). Both sample
//! the solution on a composite Gauss–Legendre grid whose panels resolve the
//! relative phase `Phi / h`, `Phi = int_0^x (V1 - V2)`.

mod direct;
mod neumann;
pub mod ode;
mod phases;
mod transfer;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::model::SystemSpec;
use crate::oscquad::sampled_max_abs;
use crate::poly::Poly;

pub use direct::ode_solution;
pub use neumann::{apply_k, neumann_solution};
pub use phases::PhaseFactors;
pub use transfer::{
    coupling_symmetry, predicted_t, rep_t_matrix, rescale_bases, scattering_for, scattering_matrix, transfer_matrix,
    transfer_matrix_from_bases, wronskian, wronskian_propagation, Fidelity, Prediction,
    ScatteringConvention, TransferResult,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Path {
    #[serde(rename = "series")]
    NeumannSeries,
    #[serde(rename = "ode")]
    DirectOde,
}

impl Path {
    pub fn as_str(&self) -> &'static str {
        match self {
            Path::NeumannSeries => "series",
            Path::DirectOde => "ode",
        }
    }
}

impl std::str::FromStr for Path {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "series" => Ok(Path::NeumannSeries),
            "ode" => Ok(Path::DirectOde),
            _ => Err(format!("unknown path `{s}` (expected series or ode)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Construction {
    NeumannSeries {
        /// Highest order included.
        order: usize,
        /// Largest measured ratio of consecutive increments.
        contraction: f64,
        /// Operator-norm bound the ratio is compared with.
        bound: f64,
    },
    DirectOde {
        steps: usize,
        rejected: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub nodes_per_panel: usize,
    /// Largest change of `Phi / h` across one panel (radians).
    pub phase_budget: f64,
    /// Largest panel width inside the coupling support; `None` uses
    /// `(r2 - r1) / 8`.
    pub max_panel_width: Option<f64>,
    /// Grid refinement stops with `GridTooCoarse` past this many nodes.
    pub max_nodes: usize,
    /// Residual target relative to the coupling size `max_j eps_j sup|U_j|`.
    pub residual_tol: f64,
    pub max_refinements: usize,
    pub series_tol: f64,
    pub max_order: usize,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    /// ODE step cap as a fraction of `h / max_I |V1 - V2|`.
    pub ode_step_fraction: f64,
    /// Basis matrices with a larger condition number are skipped.
    pub cond_max: f64,
    /// Evaluation points for `T`, as multiples of `r1`.
    pub eval_fractions: Vec<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            nodes_per_panel: 16,
            phase_budget: 1.5,
            max_panel_width: None,
            max_nodes: 10_000_000,
            residual_tol: 1e-8,
            max_refinements: 4,
            series_tol: 1e-12,
            max_order: 30,
            ode_rtol: 1e-12,
            ode_atol: 1e-14,
            ode_step_fraction: 0.1,
            cond_max: 1e8,
            eval_fractions: vec![-0.5, -0.25, 0.0, 0.25, 0.5],
        }
    }
}

/// A sampled solution of the system together with how it was built.
#[derive(Clone, Debug)]
pub struct Solution {
    grid: Arc<Grid>,
    phases: PhaseFactors,
    /// Interaction-picture components `z_k = w_k / u_k` at the grid nodes.
    z: [Vec<Complex64>; 2],
    pub basis: usize,
    pub side: Side,
    pub construction: Construction,
    /// `h max |z' - M z|` over the grid (spectral derivative).
    pub residual: f64,
}

impl Solution {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn phases(&self) -> &PhaseFactors {
        &self.phases
    }

    pub fn z_values(&self) -> &[Vec<Complex64>; 2] {
        &self.z
    }

    /// `w` at the grid nodes.
    pub fn values(&self) -> [Vec<Complex64>; 2] {
        let nodes = self.grid.nodes();
        [
            nodes.iter().zip(&self.z[0]).map(|(&x, z)| z * self.phases.u1(x)).collect(),
            nodes.iter().zip(&self.z[1]).map(|(&x, z)| z * self.phases.u2(x)).collect(),
        ]
    }

    pub fn z_at(&self, x: f64) -> [Complex64; 2] {
        [self.grid.interpolate(&self.z[0], x), self.grid.interpolate(&self.z[1], x)]
    }

    pub fn w_at(&self, x: f64) -> [Complex64; 2] {
        let z = self.z_at(x);
        [z[0] * self.phases.u1(x), z[1] * self.phases.u2(x)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.z[0].iter().chain(&self.z[1]).map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Coupling coefficients `eps_j chi U_j` of the system.
#[derive(Clone, Debug)]
pub(crate) struct Couplings {
    spec: SystemSpec,
}

impl Couplings {
    pub(crate) fn new(spec: &SystemSpec) -> Self {
        Couplings { spec: spec.clone() }
    }

    pub(crate) fn c1(&self, x: f64) -> f64 {
        self.spec.eps1 * self.spec.cutoff.eval(x) * self.spec.u1.eval(x)
    }

    pub(crate) fn c2(&self, x: f64) -> f64 {
        self.spec.eps2 * self.spec.cutoff.eval(x) * self.spec.u2.eval(x)
    }

    /// `max_j eps_j sup |U_j|` over the coupling support.
    pub(crate) fn scale(&self) -> f64 {
        let r2 = self.spec.cutoff.r2;
        let a = self.spec.eps1 * sampled_max_abs(&self.spec.u1, -r2, r2, 256);
        let b = self.spec.eps2 * sampled_max_abs(&self.spec.u2, -r2, r2, 256);
        a.max(b)
    }
}

/// Interaction-picture right-hand side `M(x) z`.
pub(crate) fn rhs(couplings: &Couplings, phases: &PhaseFactors, x: f64, z: &[Complex64; 2]) -> [Complex64; 2] {
    let e = phases.e_phi(x);
    let f = Complex64::new(0.0, -1.0 / phases.h());
    [f * couplings.c1(x) * e * z[1], f * couplings.c2(x) * e.conj() * z[0]]
}

pub(crate) fn residual_of(grid: &Grid, couplings: &Couplings, phases: &PhaseFactors, z: &[Vec<Complex64>; 2]) -> f64 {
    let d0 = grid.derivative(&z[0]);
    let d1 = grid.derivative(&z[1]);
    let mut worst: f64 = 0.0;
    for (i, &x) in grid.nodes().iter().enumerate() {
        let m = rhs(couplings, phases, x, &[z[0][i], z[1][i]]);
        worst = worst.max((d0[i] - m[0]).norm()).max((d1[i] - m[1]).norm());
    }
    phases.h() * worst
}

fn split_until<F: Fn(f64, f64) -> bool>(a: f64, b: f64, ok: &F, out: &mut Vec<f64>) {
    let mut stack = vec![(a, b)];
    while let Some((l, r)) = stack.pop() {
        if ok(l, r) {
            out.push(r);
        } else {
            let mid = 0.5 * (l + r);
            stack.push((mid, r));
            stack.push((l, mid));
        }
    }
}

/// Panel break points for refinement level `level` (each level halves the
/// phase budget and the width cap).
pub fn build_grid(spec: &SystemSpec, opts: &SolverOptions, level: usize) -> Grid {
    let iv = spec.interval;
    let c = spec.cutoff;
    let scale = 0.5f64.powi(level as i32);
    let budget = opts.phase_budget * scale;
    let width = opts.max_panel_width.unwrap_or((c.r2 - c.r1) / 8.0) * scale;
    let v0 = spec.geometry.v0;
    let rates: Vec<Poly> = vec![
        spec.gap(),
        spec.v1.sub(&Poly::constant(v0)),
        spec.v2.sub(&Poly::constant(v0)),
    ];
    let h = spec.h;
    let ok = |l: f64, r: f64| {
        let rate = rates.iter().map(|p| sampled_max_abs(p, l, r, 8)).fold(0.0, f64::max);
        (r - l) <= width && (r - l) * rate / h <= budget || r - l < 1e-9
    };
    let mut stops: Vec<f64> = vec![-c.r2, -c.r1, c.r1, c.r2];
    stops.extend(opts.eval_fractions.iter().map(|f| f * c.r1));
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut breaks = vec![iv.left];
    for w in stops.windows(2) {
        split_until(w[0], w[1], &ok, &mut breaks);
    }
    // couplings vanish outside [-r2, r2]; one panel on each side suffices
    breaks.insert(1, -c.r2);
    breaks.push(iv.right);
    Grid::new(breaks, opts.nodes_per_panel)
}
