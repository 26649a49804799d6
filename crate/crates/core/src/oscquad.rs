//! Oscillatory integrals `int_a^b a(x) e^{i phi(x)/h} dx`.
//!
//! [`integrate_adaptive`] starts from a partition in which every panel sees a
//! bounded amount of phase, then bisects the panel with the largest
//! Gauss–Kronrod error estimate until the global tolerance is met.
//! [`brute_force`] is a fixed-step composite Simpson rule kept deliberately
//! simple so it can serve as an independent oracle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cutoff::CutoffSpec;
use crate::error::QuadError;
use crate::poly::{Order, Poly};
use crate::quad::{gk21, pairwise_sum};

/// Amplitude, real phase polynomial and semiclassical parameter on `[a, b]`.
pub struct OscIntegrand<A> {
    pub amplitude: A,
    pub phase: Poly,
    pub h: f64,
    pub a: f64,
    pub b: f64,
}

impl<A: Fn(f64) -> Complex64 + Sync> OscIntegrand<A> {
    pub fn new(amplitude: A, phase: Poly, h: f64, a: f64, b: f64) -> Self {
        OscIntegrand { amplitude, phase, h, a, b }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let a = (self.amplitude)(x);
        if a == Complex64::new(0.0, 0.0) {
            return a;
        }
        a * Complex64::from_polar(1.0, self.phase.eval(x) / self.h)
    }

    fn check(&self) -> Result<(), QuadError> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(QuadError::BadInput(format!("h must be positive (got {})", self.h)));
        }
        if !(self.a.is_finite() && self.b.is_finite() && self.a <= self.b) {
            return Err(QuadError::BadInput(format!("bad interval [{}, {}]", self.a, self.b)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    /// Panels (adaptive) or Simpson intervals (brute force) used.
    pub panels: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    /// Relative tolerance.
    pub tol: f64,
    /// Absolute floor of the tolerance.
    pub tol_abs: f64,
    pub max_panels: usize,
    /// Maximal phase change (radians) across one initial panel.
    pub phase_budget: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-8,
            tol_abs: 1e-15,
            max_panels: 400_000,
            // pi/4 per abscissa spacing, 20 spacings per 21-point panel
            phase_budget: 5.0 * std::f64::consts::PI,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions { tol, ..Default::default() }
    }
}

/// Upper estimate of `max |p|` on `[a, b]` from a dense sample.
pub fn sampled_max_abs(p: &Poly, a: f64, b: f64, samples: usize) -> f64 {
    let n = samples.max(2);
    let mut best = p.eval(a).abs().max(p.eval(b).abs());
    for i in 1..n {
        let x = a + (b - a) * i as f64 / n as f64;
        best = best.max(p.eval(x).abs());
    }
    best
}

fn phase_resolving_partition(phase_rate: &Poly, h: f64, a: f64, b: f64, budget: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut stack = vec![(a, b)];
    while let Some((l, r)) = stack.pop() {
        let turn = (r - l) * sampled_max_abs(phase_rate, l, r, 8) / h;
        if turn <= budget || r - l <= 1e-12 * (b - a) {
            out.push((l, r));
        } else {
            let mid = 0.5 * (l + r);
            stack.push((mid, r));
            stack.push((l, mid));
        }
    }
    out
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    splittable: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // unsplittable panels sink to the bottom
        (self.splittable, self.error)
            .partial_cmp(&(other.splittable, other.error))
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

fn make_panel<A: Fn(f64) -> Complex64 + Sync>(g: &OscIntegrand<A>, a: f64, b: f64, min_width: f64) -> Panel {
    let r = gk21(|x| g.eval(x), a, b);
    // once the estimate sits on the rounding floor, bisection cannot help
    let splittable = b - a > min_width && r.error > 2.0 * r.roundoff;
    Panel { a, b, value: r.value, error: r.error, splittable }
}

fn collect(panels: Vec<Panel>) -> (QuadResult, f64) {
    let mut panels = panels;
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(Ordering::Equal));
    let values: Vec<Complex64> = panels.iter().map(|p| p.value).collect();
    let error = panels.iter().map(|p| p.error).sum();
    let reducible: f64 = panels.iter().filter(|p| p.splittable).map(|p| p.error).sum();
    (QuadResult { value: pairwise_sum(&values), error, panels: panels.len() }, reducible)
}

/// Adaptive phase-resolving Gauss–Kronrod quadrature.
///
/// Meets `|Q - exact| <= max(tol |Q|, tol_abs)` according to the (conservative)
/// Kronrod error estimate, or returns [`QuadError::ToleranceNotMet`] carrying
/// the best estimate.
pub fn integrate_adaptive<A: Fn(f64) -> Complex64 + Sync>(
    g: &OscIntegrand<A>,
    opts: &QuadOptions,
) -> Result<QuadResult, QuadError> {
    g.check()?;
    if !(opts.tol > 0.0) {
        return Err(QuadError::BadInput(format!("tol must be positive (got {})", opts.tol)));
    }
    if g.a == g.b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, panels: 0 });
    }
    let rate = g.phase.derivative();
    let cells = phase_resolving_partition(&rate, g.h, g.a, g.b, opts.phase_budget);
    let min_width = 64.0 * f64::EPSILON * g.a.abs().max(g.b.abs()).max(g.b - g.a);
    let initial: Vec<Panel> = cells.par_iter().map(|&(l, r)| make_panel(g, l, r, min_width)).collect();

    let mut total_err: f64 = initial.iter().map(|p| p.error).sum();
    let mut total_val: Complex64 = initial.iter().map(|p| p.value).sum();
    let mut heap: BinaryHeap<Panel> = initial.into_iter().collect();

    let target = |v: Complex64| (opts.tol * v.norm()).max(opts.tol_abs);
    let mut converged = total_err <= target(total_val);
    let mut floor: f64 = heap.iter().filter(|p| !p.splittable).map(|p| p.error).sum();
    while !converged {
        if heap.len() >= opts.max_panels {
            break;
        }
        let worst = match heap.peek() {
            Some(p) if p.splittable => heap.pop().unwrap(),
            _ => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        let left = make_panel(g, worst.a, mid, min_width);
        let right = make_panel(g, mid, worst.b, min_width);
        floor += [&left, &right].iter().filter(|p| !p.splittable).map(|p| p.error).sum::<f64>();
        total_err += left.error + right.error - worst.error;
        total_val += left.value + right.value - worst.value;
        heap.push(left);
        heap.push(right);
        // resynchronize the running sums now and then against drift
        if heap.len().is_multiple_of(4096) {
            total_err = heap.iter().map(|p| p.error).sum();
            total_val = heap.iter().map(|p| p.value).sum();
            floor = heap.iter().filter(|p| !p.splittable).map(|p| p.error).sum();
        }
        converged = total_err - floor <= target(total_val);
    }
    let (result, reducible) = collect(heap.into_vec());
    // the part of the estimate at the rounding floor is accepted as is
    if reducible <= target(result.value) {
        Ok(result)
    } else {
        let panels = result.panels;
        Err(QuadError::ToleranceNotMet { best: result, panels })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BruteForceOptions {
    pub oversample: f64,
    pub max_points: u64,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions { oversample: 8.0, max_points: 100_000_000 }
    }
}

/// Composite Simpson rule with step `<= h / (oversample * max(1, max|phi'|))`.
///
/// The returned error is the Richardson estimate `|S(s) - S(2s)| / 15`.
pub fn brute_force<A: Fn(f64) -> Complex64 + Sync>(
    g: &OscIntegrand<A>,
    opts: &BruteForceOptions,
) -> Result<QuadResult, QuadError> {
    g.check()?;
    if !(opts.oversample >= 4.0) {
        return Err(QuadError::BadInput(format!(
            "oversample must be at least 4 (got {})",
            opts.oversample
        )));
    }
    let len = g.b - g.a;
    if len == 0.0 {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, panels: 0 });
    }
    let rate = sampled_max_abs(&g.phase.derivative(), g.a, g.b, 4096).max(1.0);
    let step = g.h / (opts.oversample * rate);
    // n is a multiple of 4 so that the half-resolution rule reuses the nodes
    let n = (((len / step).ceil() as u64).max(4)).div_ceil(4) * 4;
    if n + 1 > opts.max_points {
        return Err(QuadError::GridTooLarge { points: n + 1, cap: opts.max_points });
    }
    let s = len / n as f64;
    const CHUNK: u64 = 1 << 14;
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<(Complex64, Complex64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n);
            let mut fine = Complex64::new(0.0, 0.0);
            let mut coarse = Complex64::new(0.0, 0.0);
            // node i carries its own weight; the last chunk includes node n
            let end = if hi == n { n + 1 } else { hi };
            for i in lo..end {
                let x = if i == n { g.b } else { g.a + i as f64 * s };
                let f = g.eval(x);
                let wf = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                fine += f * wf;
                if i % 2 == 0 {
                    let j = i / 2;
                    let wc = if i == 0 || i == n { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
                    coarse += f * wc;
                }
            }
            (fine, coarse)
        })
        .collect();
    let fine: Vec<Complex64> = partial.iter().map(|p| p.0).collect();
    let coarse: Vec<Complex64> = partial.iter().map(|p| p.1).collect();
    let fine = pairwise_sum(&fine) * (s / 3.0);
    let coarse = pairwise_sum(&coarse) * (2.0 * s / 3.0);
    Ok(QuadResult { value: fine, error: (fine - coarse).norm() / 15.0, panels: n as usize })
}

/// `h^{-(n+1)/(m+1)} int chi(x) W(x) exp((i/h) int_0^x Q) dx` over the support of `chi`.
///
/// `Q` must vanish to order exactly `m` at 0 and `W` to order `n`.
pub fn omega_tilde(
    m: usize,
    n: usize,
    w: &Poly,
    q: &Poly,
    h: f64,
    chi: &CutoffSpec,
    opts: &QuadOptions,
) -> Result<QuadResult, QuadError> {
    if q.vanishing_order(0.0) != Order::Finite(m) {
        return Err(QuadError::BadInput(format!(
            "Q vanishes to order {:?} at 0, expected {m}",
            q.vanishing_order(0.0)
        )));
    }
    if w.is_zero() {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, panels: 0 });
    }
    if w.vanishing_order(0.0) != Order::Finite(n) {
        return Err(QuadError::BadInput(format!(
            "W vanishes to order {:?} at 0, expected {n}",
            w.vanishing_order(0.0)
        )));
    }
    let phase = q.antiderivative();
    let amp = |x: f64| Complex64::new(chi.eval(x) * w.eval(x), 0.0);
    let g = OscIntegrand::new(amp, phase, h, -chi.r2, chi.r2);
    let scale = h.powf(-((n + 1) as f64) / ((m + 1) as f64));
    let r = integrate_adaptive(&g, opts)?;
    Ok(QuadResult { value: r.value * scale, error: r.error * scale, panels: r.panels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(_: f64) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn constant_amplitude_zero_phase() {
        let g = OscIntegrand::new(one, Poly::zero(), 0.3, 0.0, 1.0);
        let r = integrate_adaptive(&g, &QuadOptions::default()).unwrap();
        assert!((r.value - 1.0).norm() < 1e-14);
        let b = brute_force(&g, &BruteForceOptions::default()).unwrap();
        assert!((b.value - 1.0).norm() < 1e-13);
    }

    #[test]
    fn linear_phase_closed_form() {
        let h = 0.1;
        let g = OscIntegrand::new(one, Poly::monomial(1.0, 1), h, -1.0, 1.0);
        let exact = 2.0 * h * (1.0 / h).sin();
        assert!((exact + 0.108_804).abs() < 1e-6);
        let r = integrate_adaptive(&g, &QuadOptions::default()).unwrap();
        assert!((r.value.re - exact).abs() < 1e-12 && r.value.im.abs() < 1e-12);
        let b = brute_force(&g, &BruteForceOptions::default()).unwrap();
        assert!((b.value.re - exact).abs() < 1e-6);
        assert!((b.value - exact).norm() <= 10.0 * b.error.max(1e-12));
    }

    #[test]
    fn tiny_h_linear_phase() {
        let h = 1e-5;
        let g = OscIntegrand::new(one, Poly::monomial(1.0, 1), h, -1.0, 1.0);
        let exact = 2.0 * h * (1.0 / h).sin();
        let r = integrate_adaptive(&g, &QuadOptions::default()).unwrap();
        assert!((r.value.re - exact).abs() < 1e-8 * exact.abs().max(1e-5), "{} vs {exact}", r.value);
    }

    #[test]
    fn refuses_small_oversample_and_huge_grids() {
        let g = OscIntegrand::new(one, Poly::monomial(1.0, 1), 1e-3, -1.0, 1.0);
        let o = BruteForceOptions { oversample: 2.0, ..Default::default() };
        assert!(matches!(brute_force(&g, &o), Err(QuadError::BadInput(_))));
        let o = BruteForceOptions { oversample: 8.0, max_points: 1000 };
        assert!(matches!(brute_force(&g, &o), Err(QuadError::GridTooLarge { .. })));
    }

    #[test]
    fn exhausted_budget_reports_best_estimate() {
        let g = OscIntegrand::new(one, Poly::monomial(1.0, 1), 1e-4, -1.0, 1.0);
        let o = QuadOptions { max_panels: 4, phase_budget: 1e9, ..Default::default() };
        match integrate_adaptive(&g, &o) {
            Err(QuadError::ToleranceNotMet { best, panels }) => {
                assert_eq!(panels, 4);
                assert!(best.error > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_weight_gives_zero() {
        let r = omega_tilde(
            2,
            0,
            &Poly::zero(),
            &Poly::monomial(1.0, 2),
            1e-3,
            &CutoffSpec::default(),
            &QuadOptions::default(),
        )
        .unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
    }
}
