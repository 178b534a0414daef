//! Second-order forward-mode automatic differentiation in three variables.
//!
//! A [`HyperDual`] carries a value together with its gradient and Hessian with
//! respect to the three chart coordinates. Arithmetic follows the exact
//! product and chain rules truncated after second order, so a chart written
//! once over `HyperDual` yields the immersion, its first derivatives and its
//! second derivatives in one evaluation.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Number of independent variables tracked.
pub const NVARS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperDual {
    pub value: f64,
    pub first: [f64; NVARS],
    pub second: [[f64; NVARS]; NVARS],
}

impl Default for HyperDual {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl From<f64> for HyperDual {
    fn from(v: f64) -> Self {
        Self::constant(v)
    }
}

impl HyperDual {
    pub const fn constant(value: f64) -> Self {
        Self {
            value,
            first: [0.0; NVARS],
            second: [[0.0; NVARS]; NVARS],
        }
    }

    /// The coordinate function `u[index]` evaluated at `value`.
    pub fn variable(value: f64, index: usize) -> Self {
        let mut h = Self::constant(value);
        h.first[index] = 1.0;
        h
    }

    /// Seeds all three coordinates at `u`.
    pub fn seed(u: [f64; NVARS]) -> [Self; NVARS] {
        [
            Self::variable(u[0], 0),
            Self::variable(u[1], 1),
            Self::variable(u[2], 2),
        ]
    }

    pub fn constants(u: [f64; NVARS]) -> [Self; NVARS] {
        u.map(Self::constant)
    }

    /// Composes a scalar function `f` with known value `f0`, derivative `f1`
    /// and second derivative `f2` at `self.value`.
    pub fn lift(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..NVARS {
            out.first[i] = f1 * self.first[i];
            for j in 0..NVARS {
                out.second[i][j] = f2 * self.first[i] * self.first[j] + f1 * self.second[i][j];
            }
        }
        out
    }

    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.lift(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.lift(e, e, e)
    }

    pub fn ln(self) -> Self {
        let x = self.value;
        self.lift(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.lift(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.lift(c, -s, -c)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.lift(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.lift(c, s, c)
    }

    pub fn tanh(self) -> Self {
        let t = self.value.tanh();
        let d = 1.0 - t * t;
        self.lift(t, d, -2.0 * t * d)
    }

    pub fn atanh(self) -> Self {
        let x = self.value;
        let d = 1.0 / (1.0 - x * x);
        self.lift(x.atanh(), d, 2.0 * x * d * d)
    }

    pub fn powi(self, n: i32) -> Self {
        let x = self.value;
        let nf = f64::from(n);
        let f2 = if n == 0 || n == 1 {
            0.0
        } else {
            nf * (nf - 1.0) * x.powi(n - 2)
        };
        self.lift(x.powi(n), nf * x.powi(n - 1), f2)
    }

    /// `cosh(sqrt(z))`, entire in `z` and well defined for `z <= 0`.
    pub fn cosh_sqrt(self) -> Self {
        let (f0, f1, f2) = cosh_sqrt_series(self.value);
        self.lift(f0, f1, f2)
    }

    /// `sinh(sqrt(z)) / sqrt(z)`, entire in `z`.
    pub fn sinhc_sqrt(self) -> Self {
        let (f0, f1, f2) = sinhc_sqrt_series(self.value);
        self.lift(f0, f1, f2)
    }

    pub fn recip(self) -> Self {
        let x = self.value;
        self.lift(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }
}

/// Value, first and second derivative of `cosh(sqrt(z))`.
pub fn cosh_sqrt_series(z: f64) -> (f64, f64, f64) {
    // cosh(sqrt z) = sum z^k / (2k)!
    if z.abs() > 0.25 {
        if z > 0.0 {
            let s = z.sqrt();
            let (sh, ch) = (s.sinh(), s.cosh());
            let f1 = sh / (2.0 * s);
            let f2 = (ch - sh / s) / (4.0 * z);
            (ch, f1, f2)
        } else {
            let s = (-z).sqrt();
            let (sn, cs) = s.sin_cos();
            let f1 = sn / (2.0 * s);
            let f2 = (cs - sn / s) / (4.0 * z);
            (cs, f1, f2)
        }
    } else {
        series3(z, |k| 1.0 / factorial(2 * k))
    }
}

/// Value, first and second derivative of `sinh(sqrt(z))/sqrt(z)`.
pub fn sinhc_sqrt_series(z: f64) -> (f64, f64, f64) {
    // sinh(sqrt z)/sqrt z = sum z^k / (2k+1)!
    if z.abs() > 0.25 {
        let (f, df, d2f);
        if z > 0.0 {
            let s = z.sqrt();
            let ch = s.cosh();
            f = s.sinh() / s;
            df = (ch - f) / (2.0 * z);
            d2f = second_sinhc(z, f, df);
        } else {
            let s = (-z).sqrt();
            let (sn, cs) = s.sin_cos();
            f = sn / s;
            df = (cs - f) / (2.0 * z);
            d2f = second_sinhc(z, f, df);
        }
        (f, df, d2f)
    } else {
        series3(z, |k| 1.0 / factorial(2 * k + 1))
    }
}

// g(z) = sinh(sqrt z)/sqrt z satisfies 4 z g'' + 6 g' - g = 0.
fn second_sinhc(z: f64, f: f64, df: f64) -> f64 {
    (f - 6.0 * df) / (4.0 * z)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn series3(z: f64, coeff: impl Fn(usize) -> f64) -> (f64, f64, f64) {
    let (mut f0, mut f1, mut f2) = (0.0, 0.0, 0.0);
    for k in 0..14 {
        let a = coeff(k);
        let kf = k as f64;
        f0 += a * z.powi(k as i32);
        if k >= 1 {
            f1 += a * kf * z.powi(k as i32 - 1);
        }
        if k >= 2 {
            f2 += a * kf * (kf - 1.0) * z.powi(k as i32 - 2);
        }
    }
    (f0, f1, f2)
}

impl Add for HyperDual {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for HyperDual {
    fn add_assign(&mut self, rhs: Self) {
        self.value += rhs.value;
        for i in 0..NVARS {
            self.first[i] += rhs.first[i];
            for j in 0..NVARS {
                self.second[i][j] += rhs.second[i][j];
            }
        }
    }
}

impl Sub for HyperDual {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl SubAssign for HyperDual {
    fn sub_assign(&mut self, rhs: Self) {
        *self += -rhs;
    }
}

impl Neg for HyperDual {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul for HyperDual {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.value * rhs.value);
        for i in 0..NVARS {
            out.first[i] = self.first[i] * rhs.value + self.value * rhs.first[i];
            for j in 0..NVARS {
                out.second[i][j] = self.second[i][j] * rhs.value
                    + self.first[i] * rhs.first[j]
                    + rhs.first[i] * self.first[j]
                    + self.value * rhs.second[i][j];
            }
        }
        out
    }
}

impl MulAssign for HyperDual {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Div for HyperDual {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl Add<f64> for HyperDual {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for HyperDual {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.value -= rhs;
        self
    }
}

impl Mul<f64> for HyperDual {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        self.value *= rhs;
        for i in 0..NVARS {
            self.first[i] *= rhs;
            for j in 0..NVARS {
                self.second[i][j] *= rhs;
            }
        }
        self
    }
}

impl Div<f64> for HyperDual {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self * (1.0 / rhs)
    }
}

impl Add<HyperDual> for f64 {
    type Output = HyperDual;
    fn add(self, rhs: HyperDual) -> HyperDual {
        rhs + self
    }
}

impl Sub<HyperDual> for f64 {
    type Output = HyperDual;
    fn sub(self, rhs: HyperDual) -> HyperDual {
        -rhs + self
    }
}

impl Mul<HyperDual> for f64 {
    type Output = HyperDual;
    fn mul(self, rhs: HyperDual) -> HyperDual {
        rhs * self
    }
}

impl Div<HyperDual> for f64 {
    type Output = HyperDual;
    fn div(self, rhs: HyperDual) -> HyperDual {
        rhs.recip() * self
    }
}

/// A vector of `R^3_1` with hyper-dual entries.
pub type HdVec3 = [HyperDual; 3];

pub fn hd_vec3(v: [f64; 3]) -> HdVec3 {
    v.map(HyperDual::constant)
}

pub fn hd_scale(s: HyperDual, v: HdVec3) -> HdVec3 {
    v.map(|x| s * x)
}

pub fn hd_add(a: HdVec3, b: HdVec3) -> HdVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn hd_sub(a: HdVec3, b: HdVec3) -> HdVec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Lorentzian inner product of signature (-,+,+).
pub fn hd_lorentz_inner(a: HdVec3, b: HdVec3) -> HyperDual {
    -(a[0] * b[0]) + a[1] * b[1] + a[2] * b[2]
}

pub fn hd_values(v: HdVec3) -> [f64; 3] {
    v.map(|x| x.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn([HyperDual; 3]) -> HyperDual, u: [f64; 3]) {
        let h = 1e-4;
        let eval = |x: [f64; 3]| f(HyperDual::constants(x)).value;
        let jet = f(HyperDual::seed(u));
        for i in 0..3 {
            let mut up = u;
            let mut dn = u;
            up[i] += h;
            dn[i] -= h;
            let d = (eval(up) - eval(dn)) / (2.0 * h);
            assert!((d - jet.first[i]).abs() < 1e-6, "first {i}: {d} vs {}", jet.first[i]);
            for j in 0..3 {
                let shift = |x: [f64; 3], si: f64, sj: f64| {
                    let mut y = x;
                    y[i] += si;
                    y[j] += sj;
                    y
                };
                let d2 = (eval(shift(u, h, h)) - eval(shift(u, h, -h)) - eval(shift(u, -h, h))
                    + eval(shift(u, -h, -h)))
                    / (4.0 * h * h);
                assert!(
                    (d2 - jet.second[i][j]).abs() < 1e-5,
                    "second {i}{j}: {d2} vs {}",
                    jet.second[i][j]
                );
            }
        }
    }

    #[test]
    fn product_and_chain_rules_match_finite_differences() {
        let u = [0.3, -0.7, 1.1];
        fd_check(|x| x[0] * x[1] * x[2], u);
        fd_check(|x| (x[0] * x[1]).sinh() + x[2].cosh() * x[0], u);
        fd_check(|x| (x[0] * x[0] + x[1] * x[1] + 1.0).sqrt() / (x[2] + 3.0), u);
        fd_check(|x| (x[0] - x[1]).tanh().atanh() * x[2].exp(), u);
        fd_check(|x| x[0].sin() * x[1].cos() + x[2].powi(3), u);
        fd_check(|x| (x[0] * x[0] * x[2]).cosh_sqrt() + (x[1] * x[2]).sinhc_sqrt(), u);
        fd_check(|x| (-(x[0] * x[0]) - 2.0 * x[1]).sinhc_sqrt(), [0.9, 0.4, 0.0]);
    }

    #[test]
    fn entire_helpers_agree_across_branches() {
        for &z in &[-0.3, -0.2499, 0.2499, 0.3, 2.0, -2.0] {
            let (c0, c1, c2) = cosh_sqrt_series(z);
            let (s0, s1, s2) = sinhc_sqrt_series(z);
            let h = 1e-5;
            let fc = |x: f64| cosh_sqrt_series(x).0;
            let fs = |x: f64| sinhc_sqrt_series(x).0;
            assert!((c1 - (fc(z + h) - fc(z - h)) / (2.0 * h)).abs() < 1e-8);
            assert!((s1 - (fs(z + h) - fs(z - h)) / (2.0 * h)).abs() < 1e-8);
            let fc1 = |x: f64| cosh_sqrt_series(x).1;
            let fs1 = |x: f64| sinhc_sqrt_series(x).1;
            assert!((c2 - (fc1(z + h) - fc1(z - h)) / (2.0 * h)).abs() < 1e-7);
            assert!((s2 - (fs1(z + h) - fs1(z - h)) / (2.0 * h)).abs() < 1e-7);
            if z > 0.0 {
                assert!((c0 - z.sqrt().cosh()).abs() < 1e-14);
                assert!((s0 - z.sqrt().sinh() / z.sqrt()).abs() < 1e-14);
            }
        }
    }
}
