//! The product `H^2 x H^2 ⊂ R^6_2` with its product structure `P`, the two
//! complex structures `J1 = (J, J)`, `J2 = (J, -J)` and the curvature tensor.
//!
//! Most kernels come in two flavours: typed ([`ProductTangent`]) for the
//! public API and raw `[f64; 6]` for the inner loops of the surface calculus.

use nalgebra::Matrix3;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::lorentz::{lorentz_cross, lorentz_inner, H2Point, MinkVec3};

pub type Vec6 = [f64; 6];

const BASE_TOL: f64 = 1e-12;
const TANGENT_TOL: f64 = 1e-10;
const LORENTZ_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProductPoint {
    pub p: H2Point,
    pub q: H2Point,
}

impl ProductPoint {
    pub const ORIGIN: Self = Self {
        p: H2Point::ORIGIN,
        q: H2Point::ORIGIN,
    };

    pub fn new(p: H2Point, q: H2Point) -> Self {
        Self { p, q }
    }

    pub fn from_vec6(x: Vec6) -> Result<Self> {
        Ok(Self {
            p: H2Point::new(MinkVec3::new(x[0], x[1], x[2]))?,
            q: H2Point::new(MinkVec3::new(x[3], x[4], x[5]))?,
        })
    }

    pub fn to_vec6(&self) -> Vec6 {
        join(self.p.vec(), self.q.vec())
    }

    fn same_as(&self, other: &Self) -> bool {
        let (a, b) = (self.to_vec6(), other.to_vec6());
        let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= BASE_TOL * scale)
    }
}

/// A tangent vector `(v1, v2)` of `H^2 x H^2` at `base`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProductTangent {
    pub base: ProductPoint,
    pub v1: MinkVec3,
    pub v2: MinkVec3,
}

impl ProductTangent {
    pub fn new(base: ProductPoint, v1: MinkVec3, v2: MinkVec3) -> Result<Self> {
        for (x, v) in [(base.p.vec(), v1), (base.q.vec(), v2)] {
            let inner = lorentz_inner(x, v);
            if inner.abs() > TANGENT_TOL * x.euclid_norm() * v.euclid_norm().max(1.0) {
                return Err(GeomError::NotTangent { inner });
            }
        }
        Ok(Self { base, v1, v2 })
    }

    pub fn new_unchecked(base: ProductPoint, v1: MinkVec3, v2: MinkVec3) -> Self {
        Self { base, v1, v2 }
    }

    pub fn from_vec6(base: ProductPoint, v: Vec6) -> Result<Self> {
        let (a, b) = split(v);
        Self::new(base, a, b)
    }

    pub fn zero(base: ProductPoint) -> Self {
        Self::new_unchecked(base, MinkVec3::ZERO, MinkVec3::ZERO)
    }

    pub fn to_vec6(&self) -> Vec6 {
        join(self.v1, self.v2)
    }

    fn map(&self, f: impl Fn(Vec6) -> Vec6) -> Self {
        let (v1, v2) = split(f(self.to_vec6()));
        Self::new_unchecked(self.base, v1, v2)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| scale6(s, v))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_base(self, other)?;
        Ok(self.map(|v| add6(v, other.to_vec6())))
    }

    pub fn norm(&self) -> f64 {
        inner6(self.to_vec6(), self.to_vec6()).max(0.0).sqrt()
    }
}

fn same_base(x: &ProductTangent, y: &ProductTangent) -> Result<()> {
    if x.base.same_as(&y.base) {
        Ok(())
    } else {
        Err(GeomError::BaseMismatch)
    }
}

pub fn join(a: MinkVec3, b: MinkVec3) -> Vec6 {
    [a.x1, a.x2, a.x3, b.x1, b.x2, b.x3]
}

pub fn split(v: Vec6) -> (MinkVec3, MinkVec3) {
    (MinkVec3::new(v[0], v[1], v[2]), MinkVec3::new(v[3], v[4], v[5]))
}

/// Ambient form of signature `(-,+,+,-,+,+)`.
pub fn inner6(a: Vec6, b: Vec6) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3] + a[4] * b[4] + a[5] * b[5]
}

pub fn add6(a: Vec6, b: Vec6) -> Vec6 {
    std::array::from_fn(|i| a[i] + b[i])
}

pub fn sub6(a: Vec6, b: Vec6) -> Vec6 {
    std::array::from_fn(|i| a[i] - b[i])
}

pub fn scale6(s: f64, a: Vec6) -> Vec6 {
    a.map(|x| s * x)
}

/// `Σ c_i v_i`.
pub fn combo6(coeffs: &[f64], vs: &[Vec6]) -> Vec6 {
    let mut out = [0.0; 6];
    for (c, v) in coeffs.iter().zip(vs) {
        for i in 0..6 {
            out[i] += c * v[i];
        }
    }
    out
}

pub fn norm6(a: Vec6) -> f64 {
    inner6(a, a).max(0.0).sqrt()
}

pub fn p6(v: Vec6) -> Vec6 {
    [v[0], v[1], v[2], -v[3], -v[4], -v[5]]
}

/// `J1 v = (p ⊠ v1, q ⊠ v2)` at the base point `x = (p, q)`.
pub fn j1_6(x: Vec6, v: Vec6) -> Vec6 {
    let (p, q) = split(x);
    let (a, b) = split(v);
    join(lorentz_cross(p, a), lorentz_cross(q, b))
}

/// `J2 v = (p ⊠ v1, -q ⊠ v2)`.
pub fn j2_6(x: Vec6, v: Vec6) -> Vec6 {
    let (p, q) = split(x);
    let (a, b) = split(v);
    join(lorentz_cross(p, a), -lorentz_cross(q, b))
}

/// Curvature tensor `R̄(X,Y,Z,W)` on raw tangent vectors.
pub fn curvature6(x: Vec6, y: Vec6, z: Vec6, w: Vec6) -> f64 {
    let (px, py) = (p6(x), p6(y));
    -0.5 * (inner6(y, z) * inner6(x, w) - inner6(x, z) * inner6(y, w)
        + inner6(py, z) * inner6(px, w)
        - inner6(px, z) * inner6(py, w))
}

pub fn product_metric(x: &ProductTangent, y: &ProductTangent) -> Result<f64> {
    same_base(x, y)?;
    Ok(lorentz_inner(x.v1, y.v1) + lorentz_inner(x.v2, y.v2))
}

pub fn apply_p(x: &ProductTangent) -> ProductTangent {
    x.map(p6)
}

pub fn apply_j1(x: &ProductTangent) -> ProductTangent {
    let b = x.base.to_vec6();
    x.map(|v| j1_6(b, v))
}

pub fn apply_j2(x: &ProductTangent) -> ProductTangent {
    let b = x.base.to_vec6();
    x.map(|v| j2_6(b, v))
}

pub fn curvature_tensor(
    x: &ProductTangent,
    y: &ProductTangent,
    z: &ProductTangent,
    w: &ProductTangent,
) -> Result<f64> {
    same_base(x, y)?;
    same_base(x, z)?;
    same_base(x, w)?;
    Ok(curvature6(x.to_vec6(), y.to_vec6(), z.to_vec6(), w.to_vec6()))
}

/// Orthonormal basis of `T_(p,q)(H^2 x H^2)`: two vectors tangent to each factor.
pub fn tangent_basis(x: &ProductPoint) -> [ProductTangent; 4] {
    let f = |h: &H2Point| {
        let v = h.vec();
        // boost of the standard frame at the origin to v
        let s = 1.0 / (1.0 + v.x1);
        let e2 = MinkVec3::new(v.x2, 1.0 + v.x2 * v.x2 * s, v.x2 * v.x3 * s);
        let e3 = MinkVec3::new(v.x3, v.x2 * v.x3 * s, 1.0 + v.x3 * v.x3 * s);
        [e2, e3]
    };
    let [a, b] = f(&x.p);
    let [c, d] = f(&x.q);
    let z = MinkVec3::ZERO;
    [
        ProductTangent::new_unchecked(*x, a, z),
        ProductTangent::new_unchecked(*x, b, z),
        ProductTangent::new_unchecked(*x, z, c),
        ProductTangent::new_unchecked(*x, z, d),
    ]
}

/// `Σ_{i,j} R̄(e_i, e_j, e_j, e_i)` over an orthonormal frame.
pub fn scalar_curvature(x: &ProductPoint) -> f64 {
    let e = tangent_basis(x).map(|t| t.to_vec6());
    let mut s = 0.0;
    for a in &e {
        for b in &e {
            s += curvature6(*a, *b, *b, *a);
        }
    }
    s
}

/// `η = diag(-1, 1, 1)`.
pub fn eta() -> Matrix3<f64> {
    Matrix3::from_diagonal(&nalgebra::Vector3::new(-1.0, 1.0, 1.0))
}

/// `max |Gᵀ η G - η|` entrywise.
pub fn lorentz_defect(g: &Matrix3<f64>) -> f64 {
    (g.transpose() * eta() * g - eta()).amax()
}

/// A diagonal-block isometry `(p, q) -> (A1 p, A2 q)` with `A1, A2 ∈ O⁺(1,2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockIsometry {
    pub a1: Matrix3<f64>,
    pub a2: Matrix3<f64>,
}

impl BlockIsometry {
    pub fn identity() -> Self {
        Self {
            a1: Matrix3::identity(),
            a2: Matrix3::identity(),
        }
    }

    pub fn new(a1: Matrix3<f64>, a2: Matrix3<f64>) -> Result<Self> {
        let out = Self { a1, a2 };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        for a in [&self.a1, &self.a2] {
            let defect = lorentz_defect(a);
            let scale = a.amax().powi(2).max(1.0);
            if defect > LORENTZ_TOL * scale || a[(0, 0)] <= 0.0 {
                return Err(GeomError::NotLorentz { defect });
            }
        }
        Ok(())
    }

    pub fn defect(&self) -> f64 {
        lorentz_defect(&self.a1).max(lorentz_defect(&self.a2))
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a1: self.a1 * other.a1,
            a2: self.a2 * other.a2,
        }
    }

    pub fn apply_vec6(&self, v: Vec6) -> Vec6 {
        let (a, b) = split(v);
        join(mat_vec(&self.a1, a), mat_vec(&self.a2, b))
    }
}

fn mat_vec(m: &Matrix3<f64>, v: MinkVec3) -> MinkVec3 {
    let r = m * nalgebra::Vector3::new(v.x1, v.x2, v.x3);
    MinkVec3::new(r[0], r[1], r[2])
}

pub fn apply_isometry(g: &BlockIsometry, x: &ProductPoint) -> Result<ProductPoint> {
    g.validate()?;
    Ok(ProductPoint {
        p: H2Point::new(mat_vec(&g.a1, x.p.vec()))?,
        q: H2Point::new(mat_vec(&g.a2, x.q.vec()))?,
    })
}

/// Differential of a block isometry; exact since the map is linear.
pub fn pushforward(g: &BlockIsometry, x: &ProductTangent) -> Result<ProductTangent> {
    let base = apply_isometry(g, &x.base)?;
    Ok(ProductTangent::new_unchecked(
        base,
        mat_vec(&g.a1, x.v1),
        mat_vec(&g.a2, x.v2),
    ))
}

/// The parabolic-hyperbolic block shared by both orbit groups, with `e` the
/// exponential weight and `r` the horocyclic translation.
fn horocyclic_block(e: f64, r: f64) -> Matrix3<f64> {
    let e2 = e * e;
    let r2e2 = r * r * e2;
    let d = 2.0 * e;
    Matrix3::new(
        (1.0 + e2 + r2e2) / d,
        r,
        (1.0 - e2 - r2e2) / d,
        r * e,
        1.0,
        -r * e,
        (1.0 + r2e2 - e2) / d,
        r,
        (1.0 - r2e2 + e2) / d,
    )
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

/// The group acting transitively on `M_{1,-1}^c`.
pub fn group_element_g(c: f64, t: f64, r: f64, s: f64) -> Result<BlockIsometry> {
    check_c(c)?;
    Ok(BlockIsometry {
        a1: horocyclic_block((-c.sqrt() * t).exp(), r),
        a2: horocyclic_block(((1.0 - c).sqrt() * t).exp(), s),
    })
}

/// The group acting transitively on `M_{1,1}^c`.
pub fn group_element_b(c: f64, t: f64, r: f64, s: f64) -> Result<BlockIsometry> {
    check_c(c)?;
    Ok(BlockIsometry {
        a1: horocyclic_block((-c.sqrt() * t).exp(), r),
        a2: horocyclic_block((-(1.0 - c).sqrt() * t).exp(), s),
    })
}
