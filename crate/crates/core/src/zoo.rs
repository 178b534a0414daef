//! The canonical hypersurface families, each with closed-form reference data.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::hyperdual::{HdVec3, HyperDual};
use crate::lorentz::{ConstantCurvature, CurvatureFn, CurveSource, NormalSign, TanhCurvature};
use crate::product::{j1_6, j2_6, norm6, scale6, sub6, Vec6};
use crate::surface::{Chart, ChartBox, Hd6, Hypersurface, PointGeometry};

/// Smallest admissible `|cosh a - κ sinh a|` in a product-of-curves chart.
pub const DENOMINATOR_TOL: f64 = 1e-6;

pub const POLAR_DOMAIN: ChartBox = ChartBox {
    lo: [-1.0, 0.3, -2.5],
    hi: [1.0, 1.5, 2.5],
};

pub const CURVES_DOMAIN: ChartBox = ChartBox {
    lo: [-0.8, -1.0, -1.0],
    hi: [0.8, 1.0, 1.0],
};

pub const TUBE_DOMAIN: ChartBox = ChartBox {
    lo: [0.3, -2.5, -2.5],
    hi: [1.5, 2.5, 2.5],
};

/// A curvature function given by name, for configuration files and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureSpec {
    Constant(f64),
    /// `tanh(scale * r + shift)`
    Tanh { scale: f64, shift: f64 },
}

impl CurvatureSpec {
    pub fn function(&self) -> Arc<dyn CurvatureFn> {
        match *self {
            CurvatureSpec::Constant(k) => Arc::new(ConstantCurvature(k)),
            CurvatureSpec::Tanh { scale, shift } => Arc::new(TanhCurvature { scale, shift }),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match *self {
            CurvatureSpec::Constant(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for CurvatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvatureSpec::Constant(k) => write!(f, "{k}"),
            CurvatureSpec::Tanh { scale, shift } => write!(f, "tanh:{scale}:{shift}"),
        }
    }
}

/// Accepts a number, `tanh`, or `tanh:<scale>:<shift>`.
impl FromStr for CurvatureSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if let Ok(k) = s.parse::<f64>() {
            return Ok(CurvatureSpec::Constant(k));
        }
        let mut parts = s.split(':');
        if parts.next() != Some("tanh") {
            return Err(format!("unknown curvature function '{s}'"));
        }
        let mut num = |default: f64| -> std::result::Result<f64, String> {
            match parts.next() {
                None => Ok(default),
                Some(p) => p.parse().map_err(|_| format!("bad number '{p}' in '{s}'")),
            }
        };
        let scale = num(1.0)?;
        let shift = num(0.0)?;
        Ok(CurvatureSpec::Tanh { scale, shift })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Family {
    #[serde(rename = "M_Gamma")]
    Gamma { kappa_gamma: f64 },
    #[serde(rename = "M_kk")]
    Kk {
        c: f64,
        kappa: CurvatureSpec,
        kappa_tilde: CurvatureSpec,
    },
    #[serde(rename = "M_11")]
    OneOne { c: f64 },
    #[serde(rename = "M_1m1")]
    OneMinusOne { c: f64 },
    #[serde(rename = "M_tau")]
    Tau { tau: f64 },
}

/// A model family together with an optional chart box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<ChartBox>,
}

impl From<Family> for ModelSpec {
    fn from(family: Family) -> Self {
        Self {
            family,
            domain: None,
        }
    }
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self.family {
            Family::Gamma { .. } => "M_Gamma",
            Family::Kk { .. } => "M_kk",
            Family::OneOne { .. } => "M_11",
            Family::OneMinusOne { .. } => "M_1m1",
            Family::Tau { .. } => "M_tau",
        }
    }

    pub fn label(&self) -> String {
        match &self.family {
            Family::Gamma { kappa_gamma } => format!("M_Gamma(kappa_gamma={kappa_gamma})"),
            Family::Kk {
                c,
                kappa,
                kappa_tilde,
            } => format!("M_kk(c={c}, kappa={kappa}, kappa_tilde={kappa_tilde})"),
            Family::OneOne { c } => format!("M_11(c={c})"),
            Family::OneMinusOne { c } => format!("M_1m1(c={c})"),
            Family::Tau { tau } => format!("M_tau(tau={tau})"),
        }
    }

    /// `⟨PN,N⟩` on the model, from its defining parameters.
    pub fn expected_c(&self) -> f64 {
        match self.family {
            Family::Gamma { .. } => 1.0,
            Family::Kk { c, .. } | Family::OneOne { c } | Family::OneMinusOne { c } => 1.0 - 2.0 * c,
            Family::Tau { .. } => 0.0,
        }
    }

    /// Whether the principal curvatures are constant on the whole model.
    pub fn is_isoparametric_family(&self) -> bool {
        match &self.family {
            Family::Kk {
                kappa, kappa_tilde, ..
            } => {
                let unit = |k: &CurvatureSpec| matches!(k.constant_value(), Some(v) if v.abs() == 1.0);
                unit(kappa) && unit(kappa_tilde)
            }
            _ => true,
        }
    }

    pub fn build(&self) -> Result<Model> {
        let (mut surface, oracle) = match &self.family {
            Family::Gamma { kappa_gamma } => make_m_gamma(*kappa_gamma),
            Family::Kk {
                c,
                kappa,
                kappa_tilde,
            } => make_m_kk_with_domain(
                *c,
                CurveSource::from_curvature(kappa.function()),
                CurveSource::from_curvature(kappa_tilde.function()),
                self.domain.unwrap_or(CURVES_DOMAIN),
            ),
            Family::OneOne { c } => make_m_11(*c),
            Family::OneMinusOne { c } => make_m_1m1(*c),
            Family::Tau { tau } => make_m_tau(*tau),
        }?;
        if let Some(d) = self.domain {
            surface.domain = d;
        }
        Ok(Model {
            spec: self.clone(),
            surface,
            oracle,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Model {
    pub spec: ModelSpec,
    pub surface: Hypersurface,
    pub oracle: Oracle,
}

type LambdaFn = dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync;
type FrameFn = dyn Fn(&PointGeometry) -> [(Vec6, f64); 3] + Send + Sync;

/// Closed-form reference data of a model.
#[derive(Clone)]
pub struct Oracle {
    pub expected_c: f64,
    pub constant_lambdas: bool,
    pub description: String,
    lambdas: Arc<LambdaFn>,
    frame: Arc<FrameFn>,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("expected_c", &self.expected_c)
            .field("description", &self.description)
            .finish()
    }
}

impl Oracle {
    /// Principal curvatures at `u`, ascending.
    pub fn lambdas(&self, u: [f64; 3]) -> [f64; 3] {
        let mut l = (self.lambdas)(u);
        l.sort_by(f64::total_cmp);
        l
    }

    /// Closed-form eigenpairs `(direction, eigenvalue)` at a computed point.
    pub fn frame(&self, pg: &PointGeometry) -> [(Vec6, f64); 3] {
        (self.frame)(pg)
    }

    /// `max |A e - λ e| / |e|` over the closed-form eigenpairs.
    pub fn frame_residual(&self, pg: &PointGeometry) -> f64 {
        self.frame(pg)
            .iter()
            .map(|(e, l)| norm6(sub6(pg.apply_a(*e), scale6(*l, *e))) / norm6(*e))
            .fold(0.0, f64::max)
    }

    /// `|Σ frame eigenvalues - Σ λ|`, the trace consistency of the oracle.
    pub fn trace_defect(&self, pg: &PointGeometry) -> f64 {
        let frame: f64 = self.frame(pg).iter().map(|(_, l)| l).sum();
        let listed: f64 = self.lambdas(pg.u).iter().sum();
        (frame - listed).abs()
    }
}

fn hd_polar(rho: HyperDual, phi: HyperDual) -> HdVec3 {
    let s = rho.sinh();
    [rho.cosh(), s * phi.cos(), s * phi.sin()]
}

fn zero3() -> HdVec3 {
    [HyperDual::constant(0.0); 3]
}

fn join_hd(a: HdVec3, b: HdVec3) -> Hd6 {
    [a[0], a[1], a[2], b[0], b[1], b[2]]
}

struct CurveTimesPlane {
    curve: CurveSource,
}

impl Chart for CurveTimesPlane {
    fn eval(&self, u: [HyperDual; 3]) -> Hd6 {
        let (g, _) = self.curve.jet(u[0]);
        join_hd(g, hd_polar(u[1], u[2]))
    }

    fn normal_hint(&self, u: [HyperDual; 3]) -> Option<Hd6> {
        let (_, n) = self.curve.jet(u[0]);
        Some(join_hd(n, zero3()))
    }
}

/// `Γ x H^2` for a curve of constant curvature `κ_Γ`; chart `(r, ρ, φ)`.
pub fn make_m_gamma(kappa_gamma: f64) -> Result<(Hypersurface, Oracle)> {
    if !kappa_gamma.is_finite() {
        return Err(GeomError::InvalidParameter {
            name: "kappa_gamma",
            value: kappa_gamma,
            range: "finite",
        });
    }
    let curve = CurveSource::Constant(kappa_gamma);
    let surface = Hypersurface::new(
        format!("M_Gamma(kappa_gamma={kappa_gamma})"),
        Arc::new(CurveTimesPlane { curve }),
        POLAR_DOMAIN,
    );
    let k = kappa_gamma;
    let oracle = Oracle {
        expected_c: 1.0,
        constant_lambdas: true,
        description: format!("lambda = {{{k}, 0, 0}}, C = 1"),
        lambdas: Arc::new(move |_| [k, 0.0, 0.0]),
        frame: Arc::new(move |pg| [(pg.basis[0], k), (pg.basis[1], 0.0), (pg.basis[2], 0.0)]),
    };
    Ok((surface, oracle))
}

struct CurveProduct {
    sc: f64,
    s1c: f64,
    gamma: CurveSource,
    gamma_tilde: CurveSource,
}

impl CurveProduct {
    fn parts(&self, u: [HyperDual; 3]) -> (HdVec3, HdVec3, HdVec3, HdVec3, HyperDual, HyperDual) {
        let (g, n) = self.gamma.jet(u[1]);
        let (gt, nt) = self.gamma_tilde.jet(u[2]);
        (g, n, gt, nt, u[0] * self.sc, u[0] * self.s1c)
    }
}

fn comb(a: HyperDual, x: HdVec3, b: HyperDual, y: HdVec3) -> HdVec3 {
    std::array::from_fn(|i| a * x[i] + b * y[i])
}

impl Chart for CurveProduct {
    fn eval(&self, u: [HyperDual; 3]) -> Hd6 {
        let (g, n, gt, nt, a, b) = self.parts(u);
        join_hd(comb(a.cosh(), g, a.sinh(), n), comb(b.cosh(), gt, b.sinh(), nt))
    }

    fn normal_hint(&self, u: [HyperDual; 3]) -> Option<Hd6> {
        let (g, n, gt, nt, a, b) = self.parts(u);
        let first = comb(a.sinh() * self.s1c, g, a.cosh() * self.s1c, n);
        let second = comb(b.sinh() * -self.sc, gt, b.cosh() * -self.sc, nt);
        Some(join_hd(first, second))
    }
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(GeomError::InvalidParameter {
            name: "c",
            value: c,
            range: "(0,1)",
        })
    }
}

/// The two nonzero principal curvatures of a product-of-curves model at
/// `a = √c t`, `b = √(1-c) t`.
pub fn curve_product_lambdas(c: f64, a: f64, kappa: f64, b: f64, kappa_tilde: f64) -> (f64, f64) {
    let l2 = -(1.0 - c).sqrt() * (a.sinh() - a.cosh() * kappa) / (a.cosh() - a.sinh() * kappa);
    let l3 = c.sqrt() * (b.sinh() - b.cosh() * kappa_tilde) / (b.cosh() - b.sinh() * kappa_tilde);
    (l2, l3)
}

fn check_denominators(
    sc: f64,
    s1c: f64,
    gamma: &CurveSource,
    gamma_tilde: &CurveSource,
    domain: &ChartBox,
) -> Result<()> {
    const N: usize = 17;
    let lin = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (N - 1) as f64;
    let factors: [(&'static str, f64, &CurveSource, usize); 2] =
        [("first", sc, gamma, 1), ("second", s1c, gamma_tilde, 2)];
    for (name, w, curve, axis) in factors {
        let mut sign = 0.0;
        let mut worst = f64::INFINITY;
        for i in 0..N {
            let t = lin(domain.lo[0], domain.hi[0], i);
            for j in 0..N {
                let r = lin(domain.lo[axis], domain.hi[axis], j);
                let (k, _) = curve.curvature(r);
                let a = w * t;
                let d = a.cosh() - a.sinh() * k;
                worst = worst.min(d.abs());
                if sign == 0.0 {
                    sign = d.signum();
                } else if d.signum() != sign {
                    worst = 0.0;
                }
            }
        }
        if worst <= DENOMINATOR_TOL {
            return Err(GeomError::DomainDenominator {
                factor: name,
                value: worst,
            });
        }
    }
    Ok(())
}

/// The product-of-curves family with arbitrary curvature functions.
pub fn make_m_kk(
    c: f64,
    kappa: Arc<dyn CurvatureFn>,
    kappa_tilde: Arc<dyn CurvatureFn>,
) -> Result<(Hypersurface, Oracle)> {
    make_m_kk_with_domain(
        c,
        CurveSource::from_curvature(kappa),
        CurveSource::from_curvature(kappa_tilde),
        CURVES_DOMAIN,
    )
}

pub fn make_m_kk_with_domain(
    c: f64,
    gamma: CurveSource,
    gamma_tilde: CurveSource,
    domain: ChartBox,
) -> Result<(Hypersurface, Oracle)> {
    check_c(c)?;
    let (sc, s1c) = (c.sqrt(), (1.0 - c).sqrt());
    check_denominators(sc, s1c, &gamma, &gamma_tilde, &domain)?;
    let name = format!("M_kk(c={c}, {gamma:?}, {gamma_tilde:?})");
    let lam = {
        let (g, gt) = (gamma.clone(), gamma_tilde.clone());
        move |u: [f64; 3]| {
            let (k, _) = g.curvature(u[1]);
            let (kt, _) = gt.curvature(u[2]);
            let (l2, l3) = curve_product_lambdas(c, sc * u[0], k, s1c * u[0], kt);
            [0.0, l2, l3]
        }
    };
    let constant = matches!(
        (&gamma, &gamma_tilde),
        (
            CurveSource::Horocycle(_) | CurveSource::Constant(_),
            CurveSource::Horocycle(_) | CurveSource::Constant(_)
        )
    ) && [gamma.curvature(0.0).0, gamma_tilde.curvature(0.0).0]
        .iter()
        .all(|k| k.abs() == 1.0);
    let lam_frame = lam.clone();
    let oracle = Oracle {
        expected_c: 1.0 - 2.0 * c,
        constant_lambdas: constant,
        description: "lambda = {0, -sqrt(1-c)(sinh a - k cosh a)/(cosh a - k sinh a), sqrt(c)(sinh b - k~ cosh b)/(cosh b - k~ sinh b)}".into(),
        lambdas: Arc::new(lam),
        frame: Arc::new(move |pg| {
            let l = lam_frame(pg.u);
            [(pg.basis[0], l[0]), (pg.basis[1], l[1]), (pg.basis[2], l[2])]
        }),
    };
    let surface = Hypersurface::new(
        name,
        Arc::new(CurveProduct {
            sc,
            s1c,
            gamma,
            gamma_tilde,
        }),
        domain,
    );
    Ok((surface, oracle))
}

/// Horocycles with normals of opposite sign: principal curvatures `{0, √(1-c), √c}`.
pub fn make_m_1m1(c: f64) -> Result<(Hypersurface, Oracle)> {
    let (mut s, mut o) = make_m_kk_with_domain(
        c,
        CurveSource::Horocycle(NormalSign::Plus),
        CurveSource::Horocycle(NormalSign::Minus),
        CURVES_DOMAIN,
    )?;
    s.name = format!("M_1m1(c={c})");
    o.description = format!("lambda = {{0, sqrt(1-c), sqrt(c)}}, C = {}", 1.0 - 2.0 * c);
    Ok((s, o))
}

/// Horocycles with normals of equal sign: principal curvatures `{0, √(1-c), -√c}`.
pub fn make_m_11(c: f64) -> Result<(Hypersurface, Oracle)> {
    let (mut s, mut o) = make_m_kk_with_domain(
        c,
        CurveSource::Horocycle(NormalSign::Plus),
        CurveSource::Horocycle(NormalSign::Plus),
        CURVES_DOMAIN,
    )?;
    s.name = format!("M_11(c={c})");
    o.description = format!("lambda = {{0, sqrt(1-c), -sqrt(c)}}, C = {}", 1.0 - 2.0 * c);
    Ok((s, o))
}

struct Tube {
    tau: f64,
    /// `cosh(l/√2)` and `√2 sinh(l/√2)`
    ch: f64,
    sh: f64,
}

impl Tube {
    fn factors(&self, u: [HyperDual; 3]) -> (HdVec3, HdVec3) {
        let (rho, phi, theta) = (u[0], u[1], u[2]);
        let p = hd_polar(rho, phi);
        let (sr, cr) = (rho.sinh(), rho.cosh());
        let (sp, cp) = (phi.sin(), phi.cos());
        let zero = HyperDual::constant(0.0);
        let e_rho = [sr, cr * cp, cr * sp];
        let e_phi = [zero, -sp, cp];
        let k = std::f64::consts::FRAC_1_SQRT_2;
        let (st, ct) = (theta.sin(), theta.cos());
        let v: HdVec3 = std::array::from_fn(|i| (ct * e_rho[i] + st * e_phi[i]) * k);
        let x = std::array::from_fn(|i| p[i] * self.ch + v[i] * self.sh);
        let y = std::array::from_fn(|i| p[i] * self.ch - v[i] * self.sh);
        (x, y)
    }
}

impl Chart for Tube {
    fn eval(&self, u: [HyperDual; 3]) -> Hd6 {
        let (x, y) = self.factors(u);
        join_hd(x, y)
    }

    fn normal_hint(&self, u: [HyperDual; 3]) -> Option<Hd6> {
        let (x, y) = self.factors(u);
        let s = 1.0 / (2.0 * (self.tau * self.tau - 1.0)).sqrt();
        let a = std::array::from_fn(|i| (y[i] + x[i] * self.tau) * s);
        let b = std::array::from_fn(|i| (x[i] + y[i] * self.tau) * s);
        Some(join_hd(a, b))
    }
}

/// Radius of `M_τ` as a tube over the diagonal: `arccosh(-τ)/√2`.
pub fn tube_radius(tau: f64) -> f64 {
    (-tau).acosh() / std::f64::consts::SQRT_2
}

/// Eigenvalues of `A` on `J1N` and `J2N` for `M_τ`.
pub fn tau_lambdas(tau: f64) -> (f64, f64) {
    (
        ((tau - 1.0) / (2.0 * (tau + 1.0))).sqrt(),
        ((tau + 1.0) / (2.0 * (tau - 1.0))).sqrt(),
    )
}

/// `{(p,q) : <p,q> = τ}` as a tube over the diagonal; chart `(ρ, φ, θ)` with
/// `(ρ, φ)` geodesic polar on the centre point and `θ` the direction of the offset.
pub fn make_m_tau(tau: f64) -> Result<(Hypersurface, Oracle)> {
    if !(tau < -1.0) || !tau.is_finite() {
        return Err(GeomError::InvalidParameter {
            name: "tau",
            value: tau,
            range: "(-inf,-1)",
        });
    }
    let l = tube_radius(tau);
    let h = l / std::f64::consts::SQRT_2;
    let chart = Tube {
        tau,
        ch: h.cosh(),
        sh: std::f64::consts::SQRT_2 * h.sinh(),
    };
    let (la, lb) = tau_lambdas(tau);
    let oracle = Oracle {
        expected_c: 0.0,
        constant_lambdas: true,
        description: format!("lambda = {{0, {lb}, {la}}}, C = 0"),
        lambdas: Arc::new(move |_| [0.0, lb, la]),
        frame: Arc::new(move |pg| {
            [
                (j1_6(pg.x, pg.normal), la),
                (j2_6(pg.x, pg.normal), lb),
                (pg.v, 0.0),
            ]
        }),
    };
    let surface = Hypersurface::new(format!("M_tau(tau={tau})"), Arc::new(chart), TUBE_DOMAIN);
    Ok((surface, oracle))
}

/// Largest deviation of the first two principal curvatures of a
/// product-of-curves model with constant `κ = kappa0` from the tanh profile
/// `-√((1+C)/2) tanh(√((1-C)/2)(t + h₁))`, `h₁ = -artanh(κ₀)/√c`, `C = 1-2c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TanhProfile {
    /// `max ||λ| - |profile||`, the asserted quantity.
    pub abs_deviation: f64,
    /// `max |λ - profile|`, reported for the sign convention.
    pub signed_deviation: f64,
}

pub fn tanh_profile_check(c: f64, kappa0: f64, t_grid: &[f64]) -> Result<TanhProfile> {
    check_c(c)?;
    if !(kappa0.abs() < 1.0) {
        return Err(GeomError::InvalidParameter {
            name: "kappa0",
            value: kappa0,
            range: "(-1,1)",
        });
    }
    let cc = 1.0 - 2.0 * c;
    let h1 = -kappa0.atanh() / c.sqrt();
    let mut out = TanhProfile {
        abs_deviation: 0.0,
        signed_deviation: 0.0,
    };
    for &t in t_grid {
        let a = c.sqrt() * t;
        let (l2, _) = curve_product_lambdas(c, a, kappa0, 0.0, 0.0);
        let profile = -((1.0 + cc) / 2.0).sqrt() * (((1.0 - cc) / 2.0).sqrt() * (t + h1)).tanh();
        out.abs_deviation = out.abs_deviation.max((l2.abs() - profile.abs()).abs());
        out.signed_deviation = out.signed_deviation.max((l2 - profile).abs());
    }
    Ok(out)
}

/// `J1N` and `J2N` at a computed point, for frame checks.
pub fn complex_normals(pg: &PointGeometry) -> (Vec6, Vec6) {
    (j1_6(pg.x, pg.normal), j2_6(pg.x, pg.normal))
}

/// `⟨p, q⟩` at a chart point, the defining function of `M_τ`.
pub fn factor_inner(x: Vec6) -> f64 {
    -x[0] * x[3] + x[1] * x[4] + x[2] * x[5]
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::{group_element_b, group_element_g, apply_isometry, ProductPoint};
    use crate::surface::point_geometry;

    fn close3(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn sample(m: &Hypersurface) -> Vec<[f64; 3]> {
        m.domain.grid(3)
    }

    #[test]
    fn m_1m1_half_has_two_curvatures() {
        let (m, o) = make_m_1m1(0.5).unwrap();
        let s = 0.5f64.sqrt();
        for u in sample(&m) {
            let pg = point_geometry(&m, u).unwrap();
            assert!(close3(pg.lambdas, [0.0, s, s], 1e-8), "{:?}", pg.lambdas);
            assert!(close3(pg.lambdas, o.lambdas(u), 1e-8));
            assert!(pg.c.abs() < 1e-10);
        }
    }

    #[test]
    fn m_gamma_curvatures() {
        for k in [0.0, 0.5, 1.0, 2.0] {
            let (m, o) = make_m_gamma(k).unwrap();
            for u in sample(&m) {
                let pg = point_geometry(&m, u).unwrap();
                assert!(close3(pg.lambdas, o.lambdas(u), 1e-8), "k={k}: {:?}", pg.lambdas);
                assert!((pg.c - 1.0).abs() < 1e-9);
                assert!(o.frame_residual(&pg) < 1e-8);
            }
        }
    }

    #[test]
    fn m_kk_constant_curvature_families() {
        let (m, _) = make_m_kk(0.5, Arc::new(ConstantCurvature(1.0)), Arc::new(ConstantCurvature(-1.0))).unwrap();
        let s = 0.5f64.sqrt();
        let pg = point_geometry(&m, [0.1, 0.2, -0.3]).unwrap();
        assert!(close3(pg.lambdas, [0.0, s, s], 1e-8), "{:?}", pg.lambdas);
        let (m, _) = make_m_11(0.3).unwrap();
        let pg = point_geometry(&m, [0.4, -0.6, 0.9]).unwrap();
        assert!(close3(pg.lambdas, [-0.3f64.sqrt(), 0.0, 0.7f64.sqrt()], 1e-8));
        let (m, _) = make_m_1m1(0.25).unwrap();
        let pg = point_geometry(&m, [-0.7, 0.5, 0.1]).unwrap();
        assert!(close3(pg.lambdas, [0.0, 0.5, 0.75f64.sqrt()], 1e-8));
    }

    #[test]
    fn generic_curves_match_the_pointwise_formula() {
        let (m, o) = make_m_kk(
            0.4,
            Arc::new(TanhCurvature { scale: 1.0, shift: 0.0 }),
            Arc::new(ConstantCurvature(0.0)),
        )
        .unwrap();
        let u = [0.2, 0.5, -0.3];
        let pg = point_geometry(&m, u).unwrap();
        let expect = o.lambdas(u);
        assert!(close3(pg.lambdas, expect, 1e-7), "{:?} vs {:?}", pg.lambdas, expect);
        assert!(o.frame_residual(&pg) < 1e-7);
        assert!((pg.c - 0.2).abs() < 1e-10);
        assert!(!o.constant_lambdas);
    }

    #[test]
    fn hint_matches_computed_normal() {
        for (m, _) in [
            make_m_1m1(0.3).unwrap(),
            make_m_tau(-2.0).unwrap(),
            make_m_gamma(2.0).unwrap(),
        ] {
            for u in sample(&m) {
                let pg = point_geometry(&m, u).unwrap();
                assert!(pg.hint_deviation.unwrap() < 1e-9, "{}", m.name);
            }
        }
    }

    #[test]
    fn m_tau_data() {
        let (m, o) = make_m_tau(-2.0).unwrap();
        let (la, lb) = tau_lambdas(-2.0);
        assert!((la - 1.5f64.sqrt()).abs() < 1e-15);
        assert!((lb - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);
        for u in sample(&m) {
            let pg = point_geometry(&m, u).unwrap();
            assert!(close3(pg.lambdas, [0.0, lb, la], 1e-8), "{:?}", pg.lambdas);
            assert!(pg.c.abs() < 1e-10);
            assert!((factor_inner(pg.x) + 2.0).abs() < 1e-10);
            assert!(o.frame_residual(&pg) < 1e-8);
            assert!(o.trace_defect(&pg) < 1e-12);
            // V = (q + τp, -p - τq)/√(2(τ²-1))
            let s = 1.0 / 6.0f64.sqrt();
            let x = pg.x;
            let expect: Vec6 = [
                s * (x[3] - 2.0 * x[0]),
                s * (x[4] - 2.0 * x[1]),
                s * (x[5] - 2.0 * x[2]),
                -s * (x[0] - 2.0 * x[3]),
                -s * (x[1] - 2.0 * x[4]),
                -s * (x[2] - 2.0 * x[5]),
            ];
            assert!(norm6(sub6(pg.v, expect)) < 1e-10);
        }
        let l = tube_radius(-2.0);
        assert!(((2f64.sqrt() * l).cosh() - 2.0).abs() < 1e-12);
        assert!(make_m_tau(-1.0).is_err());
        assert!(make_m_tau(0.5).is_err());
    }

    #[test]
    fn invalid_c_is_rejected() {
        let e = make_m_11(1.5).unwrap_err();
        assert!(e.to_string().starts_with("c out of range (0,1)"));
        assert!(make_m_1m1(0.0).is_err());
    }

    #[test]
    fn vanishing_denominator_is_reported() {
        // cosh a - 2 sinh a vanishes at tanh a = 1/2
        let err = make_m_kk(0.5, Arc::new(ConstantCurvature(2.0)), Arc::new(ConstantCurvature(0.0)))
            .unwrap_err();
        assert!(matches!(err, GeomError::DomainDenominator { factor: "first", .. }), "{err}");
        let err = make_m_kk(0.5, Arc::new(ConstantCurvature(0.0)), Arc::new(ConstantCurvature(-2.0)))
            .unwrap_err();
        assert!(matches!(err, GeomError::DomainDenominator { factor: "second", .. }), "{err}");
    }

    #[test]
    fn orbits_of_the_groups() {
        for c in [0.25, 0.6] {
            let (m1, _) = make_m_1m1(c).unwrap();
            let (m2, _) = make_m_11(c).unwrap();
            for u in m1.domain.grid(3) {
                let g = group_element_g(c, u[0], u[1], u[2]).unwrap();
                let x = apply_isometry(&g, &ProductPoint::ORIGIN).unwrap().to_vec6();
                let y = m1.point(u);
                assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-10));
                let b = group_element_b(c, u[0], u[1], u[2]).unwrap();
                let x = apply_isometry(&b, &ProductPoint::ORIGIN).unwrap().to_vec6();
                let y = m2.point(u);
                assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-10));
            }
        }
    }

    #[test]
    fn tanh_profiles() {
        let grid: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 * 0.05).collect();
        let r = tanh_profile_check(0.5, 0.0, &grid).unwrap();
        assert!(r.abs_deviation < 1e-12);
        assert!(tanh_profile_check(0.3, 0.6, &grid).unwrap().abs_deviation < 1e-10);
        assert!(tanh_profile_check(0.7, -0.4, &grid).unwrap().abs_deviation < 1e-10);
        assert!(tanh_profile_check(0.5, 1.0, &grid).is_err());
    }

    #[test]
    fn curvature_spec_parsing() {
        assert_eq!("1".parse::<CurvatureSpec>().unwrap(), CurvatureSpec::Constant(1.0));
        assert_eq!(
            "tanh".parse::<CurvatureSpec>().unwrap(),
            CurvatureSpec::Tanh { scale: 1.0, shift: 0.0 }
        );
        assert_eq!(
            "tanh:2:-0.5".parse::<CurvatureSpec>().unwrap(),
            CurvatureSpec::Tanh { scale: 2.0, shift: -0.5 }
        );
        assert!("sin".parse::<CurvatureSpec>().is_err());
    }

    #[test]
    fn model_spec_round_trips_through_json() {
        let spec = ModelSpec::from(Family::Kk {
            c: 0.5,
            kappa: CurvatureSpec::Tanh { scale: 1.0, shift: 0.0 },
            kappa_tilde: CurvatureSpec::Constant(0.0),
        });
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"kind\":\"M_kk\""), "{s}");
        let back: ModelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
        let tau: ModelSpec = serde_json::from_str(r#"{"kind":"M_tau","tau":-2.0}"#).unwrap();
        assert_eq!(tau.family, Family::Tau { tau: -2.0 });
        assert_eq!(tau.expected_c(), 0.0);
        assert!(tau.build().is_ok());
    }
}
