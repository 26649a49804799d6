//! Adaptive Dormand–Prince 5(4) integrator for `y' = f(x, y)`, `y` in C^2.

use num_complex::Complex64;

use crate::error::SolverError;

pub type State = [Complex64; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on `|step|`.
    pub max_step: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
    pub evals: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

fn axpy(y: &State, k: &[State], coefs: &[f64], step: f64) -> State {
    let mut out = *y;
    for (kj, &a) in k.iter().zip(coefs) {
        if a != 0.0 {
            out[0] += kj[0] * (a * step);
            out[1] += kj[1] * (a * step);
        }
    }
    out
}

/// Integrates from `(x0, y0)` through every point of `targets` (monotone in
/// either direction), landing exactly on each, and returns the states there.
pub fn integrate_through<F: Fn(f64, &State) -> State>(
    f: F,
    x0: f64,
    y0: State,
    targets: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<State>, OdeStats), SolverError> {
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(targets.len());
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    stats.evals += 1;
    let mut step = opts.max_step;
    for &target in targets {
        let dir = if target >= x { 1.0 } else { -1.0 };
        while (target - x) * dir > 0.0 {
            let remaining = (target - x).abs();
            let last = step >= remaining;
            let s = dir * if last { remaining } else { step };
            let mut k = [k1; 7];
            for i in 1..7 {
                let yi = axpy(&y, &k[..i], &A[i][..i], s);
                k[i] = f(x + C[i] * s, &yi);
            }
            stats.evals += 6;
            let y_new = axpy(&y, &k[..6], &A[6][..6], s);
            let err_vec = axpy(&[Complex64::new(0.0, 0.0); 2], &k, &E, s);
            let mut err: f64 = 0.0;
            for c in 0..2 {
                let scale = opts.atol + opts.rtol * y[c].norm().max(y_new[c].norm());
                err = err.max(err_vec[c].norm() / scale);
            }
            if err <= 1.0 {
                x = if last { target } else { x + s };
                y = y_new;
                k1 = k[6];
                stats.steps += 1;
            } else {
                stats.rejected += 1;
            }
            let factor = if err == 0.0 {
                5.0
            } else if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                0.2
            };
            if !(err <= 1.0 && last) {
                step = (s.abs() * factor).min(opts.max_step);
            } else {
                // a shortened final step says nothing about the next one
                step = step.max(s.abs() * factor).min(opts.max_step);
            }
            if step < 1e-14 * x.abs().max(1.0) {
                return Err(SolverError::StepUnderflow(x));
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_rotation() {
        // y1' = i y2, y2' = i y1: y = (cos x, i sin x)
        let f = |_x: f64, y: &State| [Complex64::new(0.0, 1.0) * y[1], Complex64::new(0.0, 1.0) * y[0]];
        let y0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let targets: Vec<f64> = (1..=20).map(|i| i as f64 * 0.5).collect();
        let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, max_step: 0.1 };
        let (ys, stats) = integrate_through(f, 0.0, y0, &targets, &opts).unwrap();
        for (x, y) in targets.iter().zip(&ys) {
            assert!((y[0] - x.cos()).norm() < 1e-10);
            assert!((y[1] - Complex64::new(0.0, x.sin())).norm() < 1e-10);
        }
        assert!(stats.steps >= 100);
        // and backwards to the start
        let (back, _) = integrate_through(f, 10.0, *ys.last().unwrap(), &[0.0], &opts).unwrap();
        assert!((back[0][0] - 1.0).norm() < 1e-9);
    }

    #[test]
    fn underflow_is_reported() {
        // blow-up at x = 1
        let f = |_x: f64, y: &State| [y[0] * y[0], Complex64::new(0.0, 0.0)];
        let y0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, max_step: 0.1 };
        assert!(matches!(
            integrate_through(f, 0.0, y0, &[2.0], &opts),
            Err(SolverError::StepUnderflow(_))
        ));
    }
}
