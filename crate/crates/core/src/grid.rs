//! Composite Gauss–Legendre grid with spectral cumulative integration,
//! differentiation and interpolation on each panel.

use num_complex::Complex64;

use crate::quad::{gauss_legendre, legendre_all};

/// Reference-panel operators for `p` Gauss–Legendre nodes on `[-1, 1]`.
#[derive(Clone, Debug)]
struct Reference {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
    /// `cumulative[i][j]`: weight of `f_j` in `int_{-1}^{x_i} f`.
    cumulative: Vec<Vec<f64>>,
    /// `diff[i][j]`: weight of `f_j` in `f'(x_i)`.
    diff: Vec<Vec<f64>>,
}

/// `int_{-1}^{x} P_k` for `k = 0..=n`.
fn legendre_integrals(n: usize, x: f64) -> Vec<f64> {
    let p = legendre_all(n + 1, x);
    (0..=n)
        .map(|k| if k == 0 { x + 1.0 } else { (p[k + 1] - p[k - 1]) / (2 * k + 1) as f64 })
        .collect()
}

impl Reference {
    fn new(p: usize) -> Self {
        let (nodes, weights) = gauss_legendre(p);
        let mut bary = vec![1.0; p];
        for j in 0..p {
            for k in 0..p {
                if k != j {
                    bary[j] /= nodes[j] - nodes[k];
                }
            }
        }
        // Legendre coefficients c_k = (2k+1)/2 sum_j w_j P_k(x_j) f_j
        let pk: Vec<Vec<f64>> = nodes.iter().map(|&x| legendre_all(p - 1, x)).collect();
        let cumulative = nodes
            .iter()
            .map(|&xi| {
                let ik = legendre_integrals(p - 1, xi);
                (0..p)
                    .map(|j| {
                        (0..p).map(|k| (2 * k + 1) as f64 / 2.0 * weights[j] * pk[j][k] * ik[k]).sum()
                    })
                    .collect()
            })
            .collect();
        let mut diff = vec![vec![0.0; p]; p];
        for i in 0..p {
            let mut diag = 0.0;
            for j in 0..p {
                if i != j {
                    let d = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                    diff[i][j] = d;
                    diag -= d;
                }
            }
            diff[i][i] = diag;
        }
        Reference { nodes, weights, bary, cumulative, diff }
    }

    /// Weights of `f_j` in `int_{-1}^{t} f` for arbitrary `t` in `[-1, 1]`.
    fn cumulative_row(&self, t: f64) -> Vec<f64> {
        let p = self.nodes.len();
        let ik = legendre_integrals(p - 1, t);
        (0..p)
            .map(|j| {
                let pk = legendre_all(p - 1, self.nodes[j]);
                (0..p).map(|k| (2 * k + 1) as f64 / 2.0 * self.weights[j] * pk[k] * ik[k]).sum()
            })
            .collect()
    }
}

/// Panels `[a_i, b_i]` tiling an interval, each carrying `p` Gauss nodes.
#[derive(Clone, Debug)]
pub struct Grid {
    breaks: Vec<f64>,
    reference: Reference,
    nodes: Vec<f64>,
}

impl Grid {
    /// `breaks` must be strictly increasing with at least two entries.
    pub fn new(breaks: Vec<f64>, p: usize) -> Self {
        assert!(breaks.len() >= 2 && breaks.windows(2).all(|w| w[0] < w[1]));
        assert!(p >= 2);
        let reference = Reference::new(p);
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * p);
        for w in breaks.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            nodes.extend(reference.nodes.iter().map(|t| mid + half * t));
        }
        Grid { breaks, reference, nodes }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn panels(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.reference.nodes.len()
    }

    pub fn left(&self) -> f64 {
        self.breaks[0]
    }

    pub fn right(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn sample<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    fn half_width(&self, panel: usize) -> f64 {
        0.5 * (self.breaks[panel + 1] - self.breaks[panel])
    }

    /// Panel containing `x` (the last one for the right end point).
    pub fn panel_of(&self, x: f64) -> usize {
        let n = self.panels();
        match self.breaks.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 1),
        }
    }

    fn local(&self, panel: usize, x: f64) -> f64 {
        let (a, b) = (self.breaks[panel], self.breaks[panel + 1]);
        (2.0 * x - a - b) / (b - a)
    }

    /// `int_{left}^{x_i} f` at every node, with the integral over the whole
    /// grid as second value. Panel totals are accumulated left to right.
    pub fn cumulative(&self, f: &[Complex64]) -> (Vec<Complex64>, Complex64) {
        let p = self.nodes_per_panel();
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        let mut offset = Complex64::new(0.0, 0.0);
        for panel in 0..self.panels() {
            let h = self.half_width(panel);
            let fs = &f[panel * p..(panel + 1) * p];
            for i in 0..p {
                let row = &self.reference.cumulative[i];
                let s: Complex64 = row.iter().zip(fs).map(|(w, v)| v * *w).sum();
                out[panel * p + i] = offset + s * h;
            }
            let total: Complex64 = self.reference.weights.iter().zip(fs).map(|(w, v)| v * *w).sum();
            offset += total * h;
        }
        (out, offset)
    }

    /// `int_{left}^{x} f` of the piecewise interpolant at an arbitrary `x`.
    pub fn integral_to(&self, f: &[Complex64], x: f64) -> Complex64 {
        let p = self.nodes_per_panel();
        let target = self.panel_of(x);
        let mut acc = Complex64::new(0.0, 0.0);
        for panel in 0..target {
            let fs = &f[panel * p..(panel + 1) * p];
            let total: Complex64 = self.reference.weights.iter().zip(fs).map(|(w, v)| v * *w).sum();
            acc += total * self.half_width(panel);
        }
        let row = self.reference.cumulative_row(self.local(target, x).clamp(-1.0, 1.0));
        let fs = &f[target * p..(target + 1) * p];
        let s: Complex64 = row.iter().zip(fs).map(|(w, v)| v * *w).sum();
        acc + s * self.half_width(target)
    }

    /// `int f` over the whole grid.
    pub fn integral(&self, f: &[Complex64]) -> Complex64 {
        let p = self.nodes_per_panel();
        let mut acc = Complex64::new(0.0, 0.0);
        for panel in 0..self.panels() {
            let fs = &f[panel * p..(panel + 1) * p];
            let total: Complex64 = self.reference.weights.iter().zip(fs).map(|(w, v)| v * *w).sum();
            acc += total * self.half_width(panel);
        }
        acc
    }

    /// Spectral derivative, panel by panel.
    pub fn derivative(&self, f: &[Complex64]) -> Vec<Complex64> {
        let p = self.nodes_per_panel();
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        for panel in 0..self.panels() {
            let h = self.half_width(panel);
            let fs = &f[panel * p..(panel + 1) * p];
            for i in 0..p {
                let s: Complex64 = self.reference.diff[i].iter().zip(fs).map(|(w, v)| v * *w).sum();
                out[panel * p + i] = s / h;
            }
        }
        out
    }

    /// Barycentric interpolation of the panel polynomial at `x`.
    pub fn interpolate(&self, f: &[Complex64], x: f64) -> Complex64 {
        let p = self.nodes_per_panel();
        let panel = self.panel_of(x);
        let t = self.local(panel, x);
        let fs = &f[panel * p..(panel + 1) * p];
        let r = &self.reference;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..p {
            let d = t - r.nodes[j];
            if d == 0.0 {
                return fs[j];
            }
            let c = r.bary[j] / d;
            num += fs[j] * c;
            den += c;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn operators_are_exact_on_polynomials() {
        let g = Grid::new(vec![-1.0, -0.3, 0.2, 1.0], 8);
        let f = g.sample(|x| c(3.0 * x * x - x + 0.5));
        let (cum, total) = g.cumulative(&f);
        let anti = |x: f64| x * x * x - 0.5 * x * x + 0.5 * x;
        for (i, &x) in g.nodes().iter().enumerate() {
            assert!((cum[i].re - (anti(x) - anti(-1.0))).abs() < 1e-14);
        }
        assert!((total.re - (anti(1.0) - anti(-1.0))).abs() < 1e-14);
        assert!((g.integral(&f) - total).norm() < 1e-15);
        for x in [-1.0, -0.5, 0.0, 0.37, 1.0] {
            assert!((g.integral_to(&f, x).re - (anti(x) - anti(-1.0))).abs() < 1e-14);
            assert!((g.interpolate(&f, x).re - (3.0 * x * x - x + 0.5)).abs() < 1e-14);
        }
        let d = g.derivative(&f);
        for (i, &x) in g.nodes().iter().enumerate() {
            assert!((d[i].re - (6.0 * x - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_accuracy_on_oscillation() {
        let breaks: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 * 0.05).collect();
        let g = Grid::new(breaks, 16);
        let w = 30.0;
        let f = g.sample(|x| Complex64::new(0.0, w * x).exp());
        let (cum, _) = g.cumulative(&f);
        let i = Complex64::new(0.0, 1.0);
        for (k, &x) in g.nodes().iter().enumerate() {
            let exact = ((i * w * x).exp() - (-i * w).exp()) / (i * w);
            assert!((cum[k] - exact).norm() < 1e-14);
        }
        assert!((g.interpolate(&f, 0.123) - (i * w * 0.123).exp()).norm() < 1e-13);
    }

    #[test]
    fn panel_lookup() {
        let g = Grid::new(vec![0.0, 1.0, 2.0], 4);
        assert_eq!(g.panel_of(0.0), 0);
        assert_eq!(g.panel_of(1.0), 1);
        assert_eq!(g.panel_of(2.0), 1);
        assert_eq!(g.panel_of(1.5), 1);
        assert_eq!(g.len(), 8);
    }
}
