//! Calculus on an immersed hypersurface `Φ: Ω ⊂ R^3 → H^2 x H^2`.
//!
//! Charts are evaluated once on hyper-dual arguments, which yields `Φ`,
//! `∂_iΦ` and `∂_i∂_jΦ` exactly. Quantities that need one more derivative
//! (intrinsic curvature, `∇A`, `∇C`, `∇V`) are obtained by central
//! differences of AD-computed fields.
//!
//! # Second fundamental form
//!
//! `b_ij = <∂_i∂_jΦ, N>` with the flat ambient form of `R^6_2`. The ambient
//! second derivative differs from the covariant derivative of `H^2 x H^2` by
//! a combination of the position vectors `(p,0)` and `(0,q)`, and `N` is
//! orthogonal to both, so no correction term is needed.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::fd::FdScheme;
use crate::hyperdual::HyperDual;
use crate::linalg::{generalized_eigen, null_vector};
use crate::lorentz::H2Point;
use crate::product::{
    add6, combo6, inner6, j1_6, j2_6, norm6, p6, scale6, split, sub6, ProductPoint,
    ProductTangent, Vec6,
};

/// Smallest admissible singular value of the chart differential.
pub const RANK_TOL: f64 = 1e-6;
/// Relative tolerance on the second-smallest singular value of the normal system.
pub const NULLSPACE_TOL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-9;

pub type Hd6 = [HyperDual; 6];

/// A parametrisation of (part of) a hypersurface.
pub trait Chart: Send + Sync {
    fn eval(&self, u: [HyperDual; 3]) -> Hd6;

    /// A closed-form unit normal, used to fix the orientation.
    fn normal_hint(&self, _u: [HyperDual; 3]) -> Option<Hd6> {
        None
    }
}

/// Axis-aligned box of chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartBox {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl ChartBox {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Self {
        Self { lo, hi }
    }

    /// Maps `[0,1]^3` onto the box.
    pub fn at_unit(&self, s: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.lo[i] + s[i] * (self.hi[i] - self.lo[i]))
    }

    pub fn centre(&self) -> [f64; 3] {
        self.at_unit([0.5; 3])
    }

    pub fn contains(&self, u: [f64; 3]) -> bool {
        (0..3).all(|i| u[i] >= self.lo[i] && u[i] <= self.hi[i])
    }

    pub fn grid(&self, n: usize) -> Vec<[f64; 3]> {
        let t = |k: usize| if n == 1 { 0.5 } else { k as f64 / (n - 1) as f64 };
        let mut out = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.push(self.at_unit([t(i), t(j), t(k)]));
                }
            }
        }
        out
    }
}

/// Values and derivatives of `Φ` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartJet {
    pub x: Vec6,
    pub d: [Vec6; 3],
    pub dd: [[Vec6; 3]; 3],
}

impl ChartJet {
    fn from_hd(v: &Hd6) -> Self {
        Self {
            x: v.map(|h| h.value),
            d: std::array::from_fn(|i| v.map(|h| h.first[i])),
            dd: std::array::from_fn(|i| std::array::from_fn(|j| v.map(|h| h.second[i][j]))),
        }
    }
}

#[derive(Clone)]
pub struct Hypersurface {
    pub name: String,
    pub chart: Arc<dyn Chart>,
    pub domain: ChartBox,
}

impl fmt::Debug for Hypersurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypersurface")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

impl Hypersurface {
    pub fn new(name: impl Into<String>, chart: Arc<dyn Chart>, domain: ChartBox) -> Self {
        Self {
            name: name.into(),
            chart,
            domain,
        }
    }

    pub fn point(&self, u: [f64; 3]) -> Vec6 {
        self.chart.eval(HyperDual::constants(u)).map(|h| h.value)
    }

    pub fn product_point(&self, u: [f64; 3]) -> Result<ProductPoint> {
        ProductPoint::from_vec6(self.point(u))
    }

    pub fn jet(&self, u: [f64; 3]) -> ChartJet {
        ChartJet::from_hd(&self.chart.eval(HyperDual::seed(u)))
    }

    pub fn has_hint(&self) -> bool {
        self.chart
            .normal_hint(HyperDual::constants(self.domain.centre()))
            .is_some()
    }

    pub fn hint(&self, u: [f64; 3]) -> Option<Vec6> {
        self.chart
            .normal_hint(HyperDual::constants(u))
            .map(|n| n.map(|h| h.value))
    }

    /// `max(|<p,p> + 1|, |<q,q> + 1|)` at `u`.
    pub fn constraint_defect(&self, u: [f64; 3]) -> f64 {
        let (p, q) = split(self.point(u));
        (p.inner(p) + 1.0).abs().max((q.inner(q) + 1.0).abs())
    }

    /// The same surface in the coordinates `u = m w + b`.
    pub fn reparametrised(&self, m: Matrix3<f64>, b: [f64; 3], domain: ChartBox) -> Self {
        Self {
            name: format!("{} (affine)", self.name),
            chart: Arc::new(AffineChart {
                inner: self.chart.clone(),
                m,
                b,
            }),
            domain,
        }
    }
}

struct AffineChart {
    inner: Arc<dyn Chart>,
    m: Matrix3<f64>,
    b: [f64; 3],
}

impl AffineChart {
    fn map(&self, w: [HyperDual; 3]) -> [HyperDual; 3] {
        std::array::from_fn(|i| {
            let mut s = HyperDual::constant(self.b[i]);
            for (j, wj) in w.iter().enumerate() {
                s += *wj * self.m[(i, j)];
            }
            s
        })
    }
}

impl Chart for AffineChart {
    fn eval(&self, w: [HyperDual; 3]) -> Hd6 {
        self.inner.eval(self.map(w))
    }
    fn normal_hint(&self, w: [HyperDual; 3]) -> Option<Hd6> {
        self.inner.normal_hint(self.map(w))
    }
}

/// Everything first- and second-order at one chart point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointGeometry {
    pub u: [f64; 3],
    pub x: Vec6,
    pub basis: [Vec6; 3],
    pub second: [[Vec6; 3]; 3],
    pub g: Matrix3<f64>,
    pub g_inv: Matrix3<f64>,
    pub normal: Vec6,
    /// `b_ij = <∂_i∂_jΦ, N>`.
    pub b: Matrix3<f64>,
    /// Shape operator `g⁻¹ b` acting on coordinate vectors.
    pub a: Matrix3<f64>,
    /// Principal curvatures, ascending.
    pub lambdas: [f64; 3],
    /// Principal directions as coordinate columns, `g`-orthonormal.
    pub principal: Matrix3<f64>,
    pub c: f64,
    pub v: Vec6,
    pub h: f64,
    pub k: f64,
    pub rho: f64,
    /// Smallest singular value of the differential in the induced metric.
    pub min_sigma: f64,
    /// Max coordinate difference between `N` and the oriented normal hint.
    pub hint_deviation: Option<f64>,
    pub eigen_asymmetry: f64,
}

impl PointGeometry {
    pub fn point(&self) -> ProductPoint {
        let (p, q) = split(self.x);
        ProductPoint::new(H2Point::new_unchecked(p), H2Point::new_unchecked(q))
    }

    pub fn tangent(&self, v: Vec6) -> ProductTangent {
        let (a, b) = split(v);
        ProductTangent::new_unchecked(self.point(), a, b)
    }

    pub fn coordinate_tangent(&self, i: usize) -> ProductTangent {
        self.tangent(self.basis[i])
    }

    pub fn normal_tangent(&self) -> ProductTangent {
        self.tangent(self.normal)
    }

    /// `Σ c^i ∂_iΦ`.
    pub fn ambient(&self, coords: &Vector3<f64>) -> Vec6 {
        combo6(coords.as_slice(), &self.basis)
    }

    /// `<X, ∂_jΦ>`.
    pub fn lowered(&self, x: Vec6) -> Vector3<f64> {
        Vector3::from_fn(|j, _| inner6(x, self.basis[j]))
    }

    /// Coordinates of the tangential part of `x`.
    pub fn coords(&self, x: Vec6) -> Vector3<f64> {
        self.g_inv * self.lowered(x)
    }

    pub fn apply_a(&self, x: Vec6) -> Vec6 {
        self.ambient(&(self.a * self.coords(x)))
    }

    /// Tangential part of `x` along `M`.
    pub fn project(&self, x: Vec6) -> Vec6 {
        self.ambient(&self.coords(x))
    }

    /// Length of a covector given by its values on `∂_iΦ`.
    pub fn covector_norm(&self, w: &Vector3<f64>) -> f64 {
        (w.transpose() * self.g_inv * w)[(0, 0)].max(0.0).sqrt()
    }

    /// Principal directions in ambient form (orthonormal, ascending λ).
    pub fn principal_frame(&self) -> [Vec6; 3] {
        std::array::from_fn(|k| self.ambient(&self.principal.column(k).into()))
    }

    /// `Σ λ_i²`, i.e. the trace of `A²`.
    pub fn norm_a_sq(&self) -> f64 {
        (self.a * self.a).trace()
    }

    /// `<P∂_iΦ, ∂_jΦ>`, which equals `<T∂_iΦ, ∂_jΦ>`.
    pub fn p_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| inner6(p6(self.basis[i]), self.basis[j]))
    }

    /// The same data for the opposite normal.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        out.normal = scale6(-1.0, self.normal);
        out.b = -self.b;
        out.a = -self.a;
        out.lambdas = [-self.lambdas[2], -self.lambdas[1], -self.lambdas[0]];
        out.principal = Matrix3::from_columns(&[
            self.principal.column(2).into_owned(),
            self.principal.column(1).into_owned(),
            self.principal.column(0).into_owned(),
        ]);
        out.v = scale6(-1.0, self.v);
        out.h = -self.h;
        out.k = -self.k;
        out
    }

    /// Flips the data if needed so that `<N, reference> >= 0`.
    pub fn aligned_to(self, reference: Vec6) -> Self {
        if inner6(self.normal, reference) < 0.0 {
            self.flipped()
        } else {
            self
        }
    }

    /// Rejects vectors that are not tangent to `M` here.
    pub fn check_tangent(&self, x: Vec6) -> Result<()> {
        let (p, q) = split(self.x);
        let (a, b) = split(x);
        let scale = norm6(x).max(1.0) * self.x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for inner in [p.inner(a), q.inner(b), inner6(x, self.normal)] {
            if inner.abs() > 1e-9 * scale {
                return Err(GeomError::NotTangent { inner });
            }
        }
        Ok(())
    }
}

fn first_nonzero_positive(n: Vec6) -> Vec6 {
    let scale = n.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match n.iter().find(|v| v.abs() > 1e-12 * scale) {
        Some(v) if *v < 0.0 => scale6(-1.0, n),
        _ => n,
    }
}

/// Computes the full first/second-order geometry at `u`.
///
/// The normal is the null line of `<N1,p> = <N2,q> = <N,∂_iΦ> = 0`. It is
/// oriented along the chart's normal hint when there is one, and otherwise so
/// that its first nonzero ambient coordinate is positive.
pub fn point_geometry(m: &Hypersurface, u: [f64; 3]) -> Result<PointGeometry> {
    let jet = m.jet(u);
    let g = Matrix3::from_fn(|i, j| inner6(jet.d[i], jet.d[j]));
    let g = 0.5 * (g + g.transpose());
    let min_eig = g.symmetric_eigenvalues().min();
    let min_sigma = min_eig.max(0.0).sqrt();
    if !(min_sigma > RANK_TOL) {
        return Err(GeomError::RankDeficient { sigma: min_sigma });
    }
    let g_inv = g.try_inverse().ok_or(GeomError::RankDeficient { sigma: min_sigma })?;

    let eta6 = |v: Vec6| [-v[0], v[1], v[2], -v[3], v[4], v[5]];
    let x = jet.x;
    let rows = [
        [-x[0], x[1], x[2], 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -x[3], x[4], x[5]],
        eta6(jet.d[0]),
        eta6(jet.d[1]),
        eta6(jet.d[2]),
    ];
    let (n, _) = null_vector(&rows, NULLSPACE_TOL)?;
    let nn = inner6(n, n);
    if !(nn > 0.0) {
        return Err(GeomError::NonUnitNormal(nn));
    }
    let mut normal = scale6(1.0 / nn.sqrt(), n);
    let mut hint_deviation = None;
    match m.hint(u) {
        Some(hint) => {
            let hn = inner6(hint, hint);
            if (hn - 1.0).abs() > UNIT_TOL {
                return Err(GeomError::NonUnitNormal(hn));
            }
            if inner6(normal, hint) < 0.0 {
                normal = scale6(-1.0, normal);
            }
            let dev = normal
                .iter()
                .zip(&hint)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            hint_deviation = Some(dev);
        }
        None => normal = first_nonzero_positive(normal),
    }

    let b = Matrix3::from_fn(|i, j| inner6(jet.dd[i][j], normal));
    let b = 0.5 * (b + b.transpose());
    let a = g_inv * b;
    let eig = generalized_eigen(&g, &b)?;
    let c = inner6(p6(normal), normal);
    let v = sub6(p6(normal), scale6(c, normal));
    let h = a.trace();
    let k = a.determinant();
    let rho = -2.0 + h * h - (a * a).trace();
    Ok(PointGeometry {
        u,
        x,
        basis: jet.d,
        second: jet.dd,
        g,
        g_inv,
        normal,
        b,
        a,
        lambdas: eig.values,
        principal: eig.vectors,
        c,
        v,
        h,
        k,
        rho,
        min_sigma,
        hint_deviation,
        eigen_asymmetry: eig.asymmetry,
    })
}

/// [`point_geometry`] with the normal flipped to agree with `reference`.
pub fn aligned_geometry(m: &Hypersurface, u: [f64; 3], reference: Vec6) -> Result<PointGeometry> {
    Ok(point_geometry(m, u)?.aligned_to(reference))
}

fn check_unit(n: &ProductTangent) -> Result<()> {
    let nn = inner6(n.to_vec6(), n.to_vec6());
    if (nn - 1.0).abs() > UNIT_TOL {
        return Err(GeomError::NonUnitNormal(nn));
    }
    Ok(())
}

/// `C = <PN, N>`.
pub fn product_angle_c(n: &ProductTangent) -> Result<f64> {
    check_unit(n)?;
    Ok(inner6(p6(n.to_vec6()), n.to_vec6()))
}

/// `C = <J1N, J2N>`, the second expression of the product angle.
pub fn product_angle_c_complex(n: &ProductTangent) -> Result<f64> {
    check_unit(n)?;
    let x = n.base.to_vec6();
    let v = n.to_vec6();
    Ok(inner6(j1_6(x, v), j2_6(x, v)))
}

/// `V = PN - CN`; vanishes when `C = ±1`.
pub fn vector_v(n: &ProductTangent) -> ProductTangent {
    let v = n.to_vec6();
    let c = inner6(p6(v), v);
    let (a, b) = split(sub6(p6(v), scale6(c, v)));
    ProductTangent::new_unchecked(n.base, a, b)
}

/// `V / |V|`, or a degenerate-angle error when `C² = 1`.
pub fn unit_v(pg: &PointGeometry) -> Result<Vec6> {
    let n2 = 1.0 - pg.c * pg.c;
    if n2 <= 1e-18 {
        return Err(GeomError::DegenerateProductAngle { c: pg.c });
    }
    Ok(scale6(1.0 / norm6(pg.v), pg.v))
}

fn t6(pg: &PointGeometry, x: Vec6) -> Vec6 {
    sub6(p6(x), scale6(inner6(x, pg.v), pg.normal))
}

/// `TX = PX - <X,V> N`, the tangential part of `PX`.
pub fn tangential_t(pg: &PointGeometry, x: &ProductTangent) -> Result<ProductTangent> {
    let xv = x.to_vec6();
    pg.check_tangent(xv)?;
    Ok(pg.tangent(t6(pg, xv)))
}

/// `TX = PX - <PX,N> N`, the defining expression of [`tangential_t`].
pub fn tangential_t_projected(pg: &PointGeometry, x: &ProductTangent) -> Result<ProductTangent> {
    let xv = x.to_vec6();
    pg.check_tangent(xv)?;
    let px = p6(xv);
    Ok(pg.tangent(sub6(px, scale6(inner6(px, pg.normal), pg.normal))))
}

/// Ricci curvature from the Gauss equation contracted once.
pub fn ricci(pg: &PointGeometry, x: &ProductTangent, y: &ProductTangent) -> Result<f64> {
    let (xv, yv) = (x.to_vec6(), y.to_vec6());
    pg.check_tangent(xv)?;
    pg.check_tangent(yv)?;
    let ax = pg.apply_a(xv);
    let a2x = pg.apply_a(ax);
    Ok(-0.5
        * (inner6(xv, yv) - pg.c * inner6(t6(pg, xv), yv) + inner6(xv, pg.v) * inner6(yv, pg.v))
        + pg.h * inner6(ax, yv)
        - inner6(a2x, yv))
}

/// `<R(X,Y)Z, W>` of `M` from the Gauss equation.
pub fn gauss_curvature_form(pg: &PointGeometry, x: Vec6, y: Vec6, z: Vec6, w: Vec6) -> f64 {
    let (tx, ty) = (t6(pg, x), t6(pg, y));
    let (ax, ay) = (pg.apply_a(x), pg.apply_a(y));
    -0.5 * (inner6(y, z) * inner6(x, w) - inner6(x, z) * inner6(y, w) + inner6(ty, z) * inner6(tx, w)
        - inner6(tx, z) * inner6(ty, w))
        + inner6(ay, z) * inner6(ax, w)
        - inner6(ax, z) * inner6(ay, w)
}

/// Sectional curvature of the plane spanned by `X` and `Y`.
pub fn sectional(pg: &PointGeometry, x: &ProductTangent, y: &ProductTangent) -> Result<f64> {
    let (xv, yv) = (x.to_vec6(), y.to_vec6());
    pg.check_tangent(xv)?;
    pg.check_tangent(yv)?;
    let area = inner6(xv, xv) * inner6(yv, yv) - inner6(xv, yv).powi(2);
    let scale = inner6(xv, xv) * inner6(yv, yv);
    if area <= 1e-12 * scale.max(1e-300) {
        return Err(GeomError::DegeneratePlane);
    }
    Ok(gauss_curvature_form(pg, xv, yv, yv, xv) / area)
}

/// Christoffel symbols `Γ^l_ij`, flattened as `l*9 + i*3 + j`, from the
/// metric and its first derivatives.
pub fn christoffel_from_jet(jet: &ChartJet) -> [f64; 27] {
    let g = Matrix3::from_fn(|i, j| inner6(jet.d[i], jet.d[j]));
    let g_inv = g.try_inverse().unwrap_or_else(Matrix3::zeros);
    // dg[k][i][j] = ∂_k g_ij
    let dg: [[[f64; 3]; 3]; 3] = std::array::from_fn(|k| {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                inner6(jet.dd[k][i], jet.d[j]) + inner6(jet.d[i], jet.dd[k][j])
            })
        })
    });
    let mut out = [0.0; 27];
    for l in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for m in 0..3 {
                    s += g_inv[(l, m)] * 0.5 * (dg[i][j][m] + dg[j][i][m] - dg[m][i][j]);
                }
                out[l * 9 + i * 3 + j] = s;
            }
        }
    }
    out
}

pub fn christoffel(m: &Hypersurface, u: [f64; 3]) -> [f64; 27] {
    christoffel_from_jet(&m.jet(u))
}

fn gi(gam: &[f64; 27], l: usize, i: usize, j: usize) -> f64 {
    gam[l * 9 + i * 3 + j]
}

/// `max |g_lw R^l_ijk - <R(∂i,∂j)∂k, ∂w>|` where the left side is intrinsic
/// (Christoffel symbols and their differences) and the right side is the
/// Gauss equation.
pub fn gauss_residual(m: &Hypersurface, u: [f64; 3]) -> Result<f64> {
    gauss_residual_with(m, u, FdScheme::default())
}

pub fn gauss_residual_with(m: &Hypersurface, u: [f64; 3], scheme: FdScheme) -> Result<f64> {
    let pg = point_geometry(m, u)?;
    let gam = christoffel(m, u);
    let dgam: [[f64; 27]; 3] = std::array::from_fn(|k| scheme.partial(|v| christoffel(m, v), u, k));
    let pm = pg.p_matrix();
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut r = [0.0; 3];
                for (l, rl) in r.iter_mut().enumerate() {
                    let mut s = gi(&dgam[i], l, j, k) - gi(&dgam[j], l, i, k);
                    for mm in 0..3 {
                        s += gi(&gam, l, i, mm) * gi(&gam, mm, j, k)
                            - gi(&gam, l, j, mm) * gi(&gam, mm, i, k);
                    }
                    *rl = s;
                }
                for w in 0..3 {
                    let lhs: f64 = (0..3).map(|l| pg.g[(l, w)] * r[l]).sum();
                    let g = &pg.g;
                    let b = &pg.b;
                    let rhs = -0.5
                        * (g[(j, k)] * g[(i, w)] - g[(i, k)] * g[(j, w)] + pm[(j, k)] * pm[(i, w)]
                            - pm[(i, k)] * pm[(j, w)])
                        + b[(j, k)] * b[(i, w)]
                        - b[(i, k)] * b[(j, w)];
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn flat9(a: &Matrix3<f64>) -> [f64; 9] {
    std::array::from_fn(|k| a[(k / 3, k % 3)])
}

/// `max |<(∇_iA)∂_j - (∇_jA)∂_i, ∂_w> + ½[<∂_i,V><T∂_j,∂_w> - <∂_j,V><T∂_i,∂_w>]|`.
pub fn codazzi_residual(m: &Hypersurface, u: [f64; 3]) -> Result<f64> {
    codazzi_residual_with(m, u, FdScheme::default())
}

/// `(∇_i A)^l_j` for each coordinate direction `i`, together with the
/// geometry at `u`; `A` is differentiated with the normal kept aligned.
pub fn shape_operator_derivative(
    m: &Hypersurface,
    u: [f64; 3],
    scheme: FdScheme,
) -> Result<(PointGeometry, [Matrix3<f64>; 3])> {
    let pg = point_geometry(m, u)?;
    let gam = christoffel(m, u);
    let reference = pg.normal;
    let a_at = |v: [f64; 3]| match aligned_geometry(m, v, reference) {
        Ok(q) => flat9(&q.a),
        Err(_) => [f64::NAN; 9],
    };
    let da: [[f64; 9]; 3] = std::array::from_fn(|k| scheme.partial(a_at, u, k));
    let a = &pg.a;
    let nabla: [Matrix3<f64>; 3] = std::array::from_fn(|i| {
        Matrix3::from_fn(|l, j| {
            let mut s = da[i][l * 3 + j];
            for mm in 0..3 {
                s += gi(&gam, l, i, mm) * a[(mm, j)] - a[(l, mm)] * gi(&gam, mm, i, j);
            }
            s
        })
    });
    if nabla.iter().any(|n| n.iter().any(|v| v.is_nan())) {
        return Err(GeomError::Model("shape operator undefined near sample".into()));
    }
    Ok((pg, nabla))
}

pub fn codazzi_residual_with(m: &Hypersurface, u: [f64; 3], scheme: FdScheme) -> Result<f64> {
    let (pg, nabla) = shape_operator_derivative(m, u, scheme)?;
    let pm = pg.p_matrix();
    let xv: Vector3<f64> = pg.lowered(pg.v);
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let d: Vector3<f64> = nabla[i].column(j) - nabla[j].column(i);
            let lowered = pg.g * d;
            for w in 0..3 {
                let rhs = -0.5 * (xv[i] * pm[(j, w)] - xv[j] * pm[(i, w)]);
                worst = worst.max((lowered[w] - rhs).abs());
            }
        }
    }
    Ok(worst)
}

/// `(|∇C + 2AV|, max_i |∇_{∂_i}V - CA∂_i + TA∂_i|)`.
pub fn angle_residuals(m: &Hypersurface, u: [f64; 3]) -> Result<(f64, f64)> {
    angle_residuals_with(m, u, FdScheme::default())
}

pub fn angle_residuals_with(
    m: &Hypersurface,
    u: [f64; 3],
    scheme: FdScheme,
) -> Result<(f64, f64)> {
    let pg = point_geometry(m, u)?;
    let reference = pg.normal;
    let c_at = |v: [f64; 3]| match point_geometry(m, v) {
        Ok(q) => [q.c],
        Err(_) => [f64::NAN],
    };
    let v_at = |v: [f64; 3]| match aligned_geometry(m, v, reference) {
        Ok(q) => q.v,
        Err(_) => [f64::NAN; 6],
    };
    let dc = Vector3::from_fn(|k, _| scheme.partial(c_at, u, k)[0]);
    let grad_c = pg.ambient(&(pg.g_inv * dc));
    let av = pg.apply_a(pg.v);
    let r1 = norm6(add6(grad_c, scale6(2.0, av)));

    let mut r2 = 0.0f64;
    for i in 0..3 {
        let dv = scheme.partial(v_at, u, i);
        let ax = pg.ambient(&pg.a.column(i).into());
        let rhs = sub6(scale6(pg.c, ax), t6(&pg, ax));
        let w = pg.lowered(sub6(dv, rhs));
        r2 = r2.max(pg.covector_norm(&w));
    }
    if r1.is_nan() || r2.is_nan() {
        return Err(GeomError::Model("geometry undefined near sample".into()));
    }
    Ok((r1, r2))
}

/// Gradient of `C` along `M`, lifted with `g⁻¹`, as coordinate components.
pub fn grad_c_coords(m: &Hypersurface, u: [f64; 3], scheme: FdScheme) -> Result<Vector3<f64>> {
    let pg = point_geometry(m, u)?;
    let c_at = |v: [f64; 3]| point_geometry(m, v).map(|q| [q.c]).unwrap_or([f64::NAN]);
    let dc = Vector3::from_fn(|k, _| scheme.partial(c_at, u, k)[0]);
    Ok(pg.g_inv * dc)
}

/// `max |∂_k λ_i|` measured in the induced metric; zero for constant principal curvatures.
pub fn lambda_gradient(m: &Hypersurface, u: [f64; 3], scheme: FdScheme) -> Result<f64> {
    let pg = point_geometry(m, u)?;
    let reference = pg.normal;
    let l_at = |v: [f64; 3]| {
        aligned_geometry(m, v, reference)
            .map(|q| q.lambdas)
            .unwrap_or([f64::NAN; 3])
    };
    let d: [[f64; 3]; 3] = std::array::from_fn(|k| scheme.partial(l_at, u, k));
    let mut worst = 0.0f64;
    for i in 0..3 {
        let w = Vector3::from_fn(|k, _| d[k][i]);
        worst = worst.max(pg.covector_norm(&w));
    }
    Ok(worst)
}
