use std::sync::Arc;

use num_complex::Complex64;

use super::{build_grid, residual_of, Construction, Couplings, PhaseFactors, Side, Solution, SolverOptions};
use crate::error::SolverError;
use crate::grid::Grid;
use crate::model::{classify_regime, Regime, SystemSpec};

/// `K_j f(x) = (i/h) u_j(x) int_{anchor}^x f(y) / u_j(y) dy` on the grid.
///
/// The grid has to resolve `f / u_j`; for the functions the Neumann series
/// feeds in (`U_k u_k` times smooth factors) it does by construction.
pub fn apply_k(grid: &Grid, phases: &PhaseFactors, j: usize, anchor: f64, f: &[Complex64]) -> Vec<Complex64> {
    let nodes = grid.nodes();
    let g: Vec<Complex64> = nodes.iter().zip(f).map(|(&x, v)| v / phases.u(j, x)).collect();
    let (cum, total) = grid.cumulative(&g);
    let base = if anchor <= grid.left() {
        Complex64::new(0.0, 0.0)
    } else if anchor >= grid.right() {
        total
    } else {
        grid.integral_to(&g, anchor)
    };
    let factor = Complex64::new(0.0, 1.0 / phases.h());
    nodes
        .iter()
        .zip(&cum)
        .map(|(&x, c)| factor * phases.u(j, x) * (c - base))
        .collect()
}

fn sup(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

struct SeriesOutcome {
    w: [Vec<Complex64>; 2],
    order: usize,
    contraction: f64,
}

/// Partial sums of `sum_k (eps1 eps2 K1 U1 K2 U2)^k u1` (basis 1) or the
/// mirrored series (basis 2), both anchors at `anchor`.
fn sum_series(
    grid: &Grid,
    phases: &PhaseFactors,
    couplings: &Couplings,
    basis: usize,
    anchor: f64,
    opts: &SolverOptions,
) -> Result<SeriesOutcome, SolverError> {
    let nodes = grid.nodes();
    let (own, other) = if basis == 1 { (1, 2) } else { (2, 1) };
    let coupling = |k: usize, x: f64| if k == 1 { couplings.c1(x) } else { couplings.c2(x) };
    // -eps_k K_k (chi U_k f)
    let step = |k: usize, f: &[Complex64]| -> Vec<Complex64> {
        let g: Vec<Complex64> = nodes.iter().zip(f).map(|(&x, v)| v * coupling(k, x)).collect();
        apply_k(grid, phases, k, anchor, &g).into_iter().map(|v| -v).collect()
    };

    let mut term: Vec<Complex64> = nodes.iter().map(|&x| phases.u(own, x)).collect();
    let mut sum_own = term.clone();
    let mut sum_other = vec![Complex64::new(0.0, 0.0); nodes.len()];
    let mut last_inc = sup(&term);
    let mut contraction: f64 = 0.0;
    let mut growing = 0;
    let mut prev_ratio = 0.0;
    let mut order = 0;
    loop {
        let cross = step(other, &term);
        for (s, v) in sum_other.iter_mut().zip(&cross) {
            *s += v;
        }
        if order + 1 > opts.max_order {
            break;
        }
        let next = step(own, &cross);
        let inc = sup(&next).max(sup(&cross));
        for (s, v) in sum_own.iter_mut().zip(&next) {
            *s += v;
        }
        order += 1;
        let size = sup(&sum_own).max(sup(&sum_other));
        let ratio = if last_inc > 0.0 { sup(&next) / last_inc } else { 0.0 };
        if last_inc > 1e-300 {
            contraction = contraction.max(ratio);
        }
        growing = if ratio >= 1.0 { growing + 1 } else { 0 };
        if growing >= 2 {
            return Err(SolverError::SeriesDiverging(prev_ratio, ratio));
        }
        prev_ratio = ratio;
        last_inc = sup(&next);
        term = next;
        if inc < opts.series_tol * size {
            // the cross term of the last increment is already negligible
            break;
        }
    }
    let w = if basis == 1 { [sum_own, sum_other] } else { [sum_other, sum_own] };
    Ok(SeriesOutcome { w, order, contraction })
}

/// The exact solution `w_{j, side}` as a Neumann series, on a grid refined
/// until the residual target is met.
pub fn neumann_solution(spec: &SystemSpec, j: usize, side: Side, opts: &SolverOptions) -> Result<Solution, SolverError> {
    assert!(j == 1 || j == 2, "basis index must be 1 or 2");
    if classify_regime(spec) == Regime::Coupled {
        return Err(SolverError::RegimeViolation(spec.scale_params().mu_m));
    }
    let phases = PhaseFactors::new(spec);
    let couplings = Couplings::new(spec);
    let target = opts.residual_tol * couplings.scale().max(f64::MIN_POSITIVE);
    let bound = spec.scale_params().contraction_bound(spec.n1(), spec.n2());
    let mut level = 0;
    loop {
        let grid = build_grid(spec, opts, level);
        if grid.len() > opts.max_nodes {
            return Err(SolverError::GridTooCoarse { cap: opts.max_nodes });
        }
        let anchor = match side {
            Side::Left => grid.left(),
            Side::Right => grid.right(),
        };
        let out = sum_series(&grid, &phases, &couplings, j, anchor, opts)?;
        let nodes = grid.nodes();
        let z = [
            nodes.iter().zip(&out.w[0]).map(|(&x, v)| v / phases.u1(x)).collect::<Vec<_>>(),
            nodes.iter().zip(&out.w[1]).map(|(&x, v)| v / phases.u2(x)).collect::<Vec<_>>(),
        ];
        let residual = residual_of(&grid, &couplings, &phases, &z);
        if residual <= target || level >= opts.max_refinements {
            return Ok(Solution {
                grid: Arc::new(grid),
                phases,
                z,
                basis: j,
                side,
                construction: Construction::NeumannSeries {
                    order: out.order,
                    contraction: out.contraction,
                    bound,
                },
                residual,
            });
        }
        level += 1;
    }
}
