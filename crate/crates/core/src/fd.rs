//! Finite-difference schemes.

use serde::{Deserialize, Serialize};

/// Central first differences with optional one-level Richardson refinement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdScheme {
    pub step: f64,
    pub richardson: bool,
}

impl Default for FdScheme {
    fn default() -> Self {
        Self {
            step: 1e-4,
            richardson: true,
        }
    }
}

impl FdScheme {
    /// Plain second-order central differences.
    pub const fn plain(step: f64) -> Self {
        Self {
            step,
            richardson: false,
        }
    }

    /// `d/dx f(x)` componentwise.
    pub fn derivative<const N: usize>(&self, f: impl Fn(f64) -> [f64; N], x: f64) -> [f64; N] {
        let central = |h: f64| {
            let (a, b) = (f(x + h), f(x - h));
            std::array::from_fn(|i| (a[i] - b[i]) / (2.0 * h))
        };
        let d1: [f64; N] = central(self.step);
        if !self.richardson {
            return d1;
        }
        let d2: [f64; N] = central(0.5 * self.step);
        std::array::from_fn(|i| (4.0 * d2[i] - d1[i]) / 3.0)
    }

    /// `∂/∂u^k f(u)` componentwise.
    pub fn partial<const N: usize>(
        &self,
        f: impl Fn([f64; 3]) -> [f64; N],
        u: [f64; 3],
        k: usize,
    ) -> [f64; N] {
        self.derivative(
            |s| {
                let mut v = u;
                v[k] += s;
                f(v)
            },
            0.0,
        )
    }
}

/// Fornberg weights for the `order`-th derivative at 0 on the given nodes.
pub fn fornberg_weights(nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Step used with [`CentralStencil::apply_richardson`] for derivative order
/// `k` (index `k - 1`): balances truncation against roundoff, which grows
/// like `ε / h^k`.
pub const HIGH_ORDER_STEPS: [f64; 8] = [0.05, 0.05, 0.1, 0.2, 0.2, 0.3, 0.4, 0.4];

/// Central stencil of accuracy `accuracy` (even) for the `order`-th derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralStencil {
    pub order: usize,
    pub accuracy: usize,
    pub half_width: usize,
    pub weights: Vec<f64>,
}

impl CentralStencil {
    pub fn new(order: usize, accuracy: usize) -> Self {
        let points = 2 * order.div_ceil(2) - 1 + accuracy;
        let half_width = points / 2;
        let nodes: Vec<f64> = (0..points).map(|i| i as f64 - half_width as f64).collect();
        Self {
            order,
            accuracy,
            half_width,
            weights: fornberg_weights(&nodes, order),
        }
    }

    pub fn apply(&self, f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        let s: f64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * f(x + (i as f64 - self.half_width as f64) * h))
            .sum();
        s / h.powi(self.order as i32)
    }

    /// Stencil at `h` and `h/2` combined to cancel the leading error term.
    pub fn apply_richardson(&self, f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        let w = 2f64.powi(self.accuracy as i32);
        let coarse = self.apply(f, x, h);
        let fine = self.apply(f, x, 0.5 * h);
        (w * fine - coarse) / (w - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_weights() {
        let w = fornberg_weights(&[-1.0, 0.0, 1.0], 2);
        assert_eq!(w, vec![1.0, -2.0, 1.0]);
        let w = fornberg_weights(&[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn stencils_differentiate_exponentials() {
        for k in 1..=8 {
            let s = CentralStencil::new(k, 8);
            let h = HIGH_ORDER_STEPS[k - 1];
            let d = s.apply_richardson(&|x: f64| (0.7 * x).exp(), 0.2, h);
            let exact = 0.7f64.powi(k as i32) * 0.14f64.exp();
            let tol = if k <= 4 { 1e-8 } else { 2e-6 };
            assert!((d - exact).abs() < tol, "k={k}: {d} vs {exact}");
        }
    }

    #[test]
    fn richardson_improves_first_derivatives() {
        let f = |x: f64| [x.sin(), x.exp()];
        let plain = FdScheme::plain(1e-2).derivative(f, 0.3);
        let rich = FdScheme {
            step: 1e-2,
            richardson: true,
        }
        .derivative(f, 0.3);
        let exact = [0.3f64.cos(), 0.3f64.exp()];
        for i in 0..2 {
            assert!((rich[i] - exact[i]).abs() < 1e-9);
            assert!((rich[i] - exact[i]).abs() < (plain[i] - exact[i]).abs());
        }
    }

    #[test]
    fn partial_derivative_picks_the_coordinate() {
        let f = |u: [f64; 3]| [u[0] * u[1] * u[1] + u[2]];
        let d = FdScheme::default().partial(f, [1.0, 2.0, 3.0], 1);
        assert!((d[0] - 4.0).abs() < 1e-9);
    }
}
