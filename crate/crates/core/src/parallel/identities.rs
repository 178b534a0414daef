//! Connection identities of constant-angle hypersurfaces, checked in three
//! frames:
//!
//! * the principal frame `{E1, E2, E3 = V/|V|}` (Codazzi along `V` and the
//!   connection forms it forces when `λ1 ≠ λ2`),
//! * the curve frame `{(J1N+J2N)/.., (J1N-J2N)/.., V/|V|}` of the
//!   product-of-curves family,
//! * a principal frame with three distinct principal curvatures, for the
//!   identities that Codazzi imposes on `Γ_ij^k = <∇_{X_i}X_j, X_k>`.
//!
//! `Γ` is obtained by differencing the frame fields in chart coordinates
//! with the normal (and each frame vector) kept sign-aligned.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::fd::FdScheme;
use crate::product::{add6, inner6, j1_6, j2_6, norm6, p6, scale6, sub6, Vec6};
use crate::surface::{
    aligned_geometry, grad_c_coords, lambda_gradient, point_geometry, shape_operator_derivative,
    unit_v, Hypersurface, PointGeometry,
};

use super::{adapted_frame, DEGENERATE_C_TOL};

/// Bound on `|∇C|` and `|∇λ_i|` for a model to count as having constant
/// product angle / principal curvatures.
pub const CONSTANCY_TOL: f64 = 1e-6;
/// Relative gap below which two principal curvatures are treated as equal.
pub const DISTINCT_TOL: f64 = 1e-6;

pub const SHAPE_CODAZZI_ALONG_V: &str = "shape_codazzi_along_v";
pub const EIGENFRAME_CONNECTION: &str = "eigenframe_connection";
pub const CURVE_FRAME_CONNECTION: &str = "curve_frame_connection";
pub const CONNECTION_SKEW: &str = "connection_skew";
pub const CONNECTION_SHAPE_DERIVATIVE: &str = "connection_shape_derivative";
pub const CONNECTION_CODAZZI: &str = "connection_codazzi";
pub const CONNECTION_DIAGONAL: &str = "connection_diagonal";
pub const CONNECTION_DIAGONAL_BALANCE: &str = "connection_diagonal_balance";

pub const IDENTITY_NAMES: [&str; 8] = [
    SHAPE_CODAZZI_ALONG_V,
    EIGENFRAME_CONNECTION,
    CURVE_FRAME_CONNECTION,
    CONNECTION_SKEW,
    CONNECTION_SHAPE_DERIVATIVE,
    CONNECTION_CODAZZI,
    CONNECTION_DIAGONAL,
    CONNECTION_DIAGONAL_BALANCE,
];

pub const LAMBDA_COINCIDE: &str = "hypothesis λ₁≠λ₂ violated";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: Option<f64>,
    pub skipped: Option<String>,
}

impl IdentityCheck {
    fn done(name: &'static str, residual: f64) -> Self {
        Self {
            name,
            residual: Some(residual),
            skipped: None,
        }
    }

    fn skip(name: &'static str, reason: impl Into<String>) -> Self {
        Self {
            name,
            residual: None,
            skipped: Some(reason.into()),
        }
    }

    /// `None` when skipped.
    pub fn passes(&self, tol: f64) -> Option<bool> {
        self.residual.map(|r| r <= tol)
    }
}

type Frame = [Vec6; 3];
/// `g[i][j][k] = <∇_{E_i}E_j, E_k>`.
pub type Connection = [[[f64; 3]; 3]; 3];

/// Connection coefficients of the frame field `frame` at `u`.
pub fn frame_connection(
    m: &Hypersurface,
    u: [f64; 3],
    scheme: FdScheme,
    frame: impl Fn(&PointGeometry) -> Result<Frame>,
) -> Result<(Frame, Connection)> {
    let pg = point_geometry(m, u)?;
    let e0 = frame(&pg)?;
    let reference = pg.normal;
    let at = |v: [f64; 3]| -> [f64; 18] {
        match aligned_geometry(m, v, reference).and_then(|q| frame(&q)) {
            Ok(e) => {
                let mut out = [0.0; 18];
                for j in 0..3 {
                    let s = if inner6(e[j], e0[j]) < 0.0 { -1.0 } else { 1.0 };
                    out[6 * j..6 * j + 6].copy_from_slice(&scale6(s, e[j]));
                }
                out
            }
            Err(_) => [f64::NAN; 18],
        }
    };
    let d: [[f64; 18]; 3] = std::array::from_fn(|k| scheme.partial(at, u, k));
    let mut gam = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        let ci = pg.coords(e0[i]);
        for j in 0..3 {
            let mut de = [0.0; 6];
            for k in 0..3 {
                let dk: Vec6 = std::array::from_fn(|a| d[k][6 * j + a]);
                de = add6(de, scale6(ci[k], dk));
            }
            for k in 0..3 {
                gam[i][j][k] = inner6(de, e0[k]);
            }
        }
    }
    if gam.iter().flatten().flatten().any(|v| v.is_nan()) {
        return Err(GeomError::Model("frame undefined near sample".into()));
    }
    Ok((e0, gam))
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn distinct(a: f64, b: f64) -> bool {
    (a - b).abs() > DISTINCT_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Principal directions `E1, E2` (ascending) and `E3 = V/|V|`, with their
/// principal curvatures.
fn eigenframe_with_v(pg: &PointGeometry) -> Result<(Frame, [f64; 3])> {
    let e3 = unit_v(pg)?;
    let pf = pg.principal_frame();
    let kv = (0..3)
        .max_by(|&a, &b| inner6(pf[a], e3).abs().total_cmp(&inner6(pf[b], e3).abs()))
        .unwrap_or(0);
    let rest: Vec<usize> = (0..3).filter(|&k| k != kv).collect();
    Ok((
        [pf[rest[0]], pf[rest[1]], e3],
        [pg.lambdas[rest[0]], pg.lambdas[rest[1]], pg.lambdas[kv]],
    ))
}

fn curve_frame(pg: &PointGeometry) -> Result<Frame> {
    let c = pg.c;
    if !(1.0 - c.abs() > DEGENERATE_C_TOL) {
        return Err(GeomError::DegenerateProductAngle { c });
    }
    let j1 = j1_6(pg.x, pg.normal);
    let j2 = j2_6(pg.x, pg.normal);
    Ok([
        scale6(1.0 / (2.0 * (1.0 + c)).sqrt(), add6(j1, j2)),
        scale6(1.0 / (2.0 * (1.0 - c)).sqrt(), sub6(j1, j2)),
        unit_v(pg)?,
    ])
}

/// `TX = PX - <X,V> N`.
fn t_of(pg: &PointGeometry, x: Vec6) -> Vec6 {
    sub6(p6(x), scale6(inner6(x, pg.v), pg.normal))
}

/// `(∇_X A)` in coordinates.
fn nabla_along(pg: &PointGeometry, nabla: &[Matrix3<f64>; 3], x: Vec6) -> Matrix3<f64> {
    let c = pg.coords(x);
    nabla[0] * c[0] + nabla[1] * c[1] + nabla[2] * c[2]
}

fn apply_coords(pg: &PointGeometry, op: &Matrix3<f64>, x: Vec6) -> Vec6 {
    let c: Vector3<f64> = op * pg.coords(x);
    pg.ambient(&c)
}

pub fn frame_identity_checks(m: &Hypersurface, u: [f64; 3]) -> Result<Vec<IdentityCheck>> {
    frame_identity_checks_with(m, u, FdScheme::default())
}

pub fn frame_identity_checks_with(
    m: &Hypersurface,
    u: [f64; 3],
    scheme: FdScheme,
) -> Result<Vec<IdentityCheck>> {
    let pg = point_geometry(m, u)?;
    if !(1.0 - pg.c.abs() > DEGENERATE_C_TOL) {
        return Ok(IDENTITY_NAMES
            .iter()
            .map(|n| IdentityCheck::skip(n, "requires |C| < 1"))
            .collect());
    }
    let grad_c = pg.covector_norm(&(pg.g * grad_c_coords(m, u, scheme)?));
    let const_c = grad_c < CONSTANCY_TOL;
    let const_lambda = const_c && lambda_gradient(m, u, scheme)? < CONSTANCY_TOL;
    let (_, nabla) = shape_operator_derivative(m, u, scheme)?;
    let mut out = Vec::with_capacity(IDENTITY_NAMES.len());

    // Codazzi along V
    if const_lambda {
        let af = adapted_frame(&pg)?;
        let c = pg.c;
        let nv = nabla_along(&pg, &nabla, pg.v);
        let mut worst = 0.0f64;
        for x in [af.e[1], af.e[2]] {
            let ax = pg.apply_a(x);
            let a2x = pg.apply_a(ax);
            let atax = pg.apply_a(t_of(&pg, ax));
            let nvx = apply_coords(&pg, &nv, x);
            for y in [af.e[1], af.e[2]] {
                let lhs = -c * inner6(a2x, y) + inner6(atax, y) - inner6(nvx, y);
                let rhs = 0.5 * (1.0 - c * c) * inner6(t_of(&pg, x), y);
                worst = worst.max((lhs - rhs).abs());
            }
        }
        out.push(IdentityCheck::done(SHAPE_CODAZZI_ALONG_V, worst));
    } else {
        out.push(IdentityCheck::skip(SHAPE_CODAZZI_ALONG_V, "principal curvatures or C not constant"));
    }

    // principal frame with E3 = V/|V|
    let (_, lam) = eigenframe_with_v(&pg)?;
    if !const_lambda {
        out.push(IdentityCheck::skip(EIGENFRAME_CONNECTION, "principal curvatures or C not constant"));
    } else if !distinct(lam[0], lam[1]) {
        out.push(IdentityCheck::skip(EIGENFRAME_CONNECTION, LAMBDA_COINCIDE));
    } else {
        let (e, gam) = frame_connection(m, u, scheme, |q| eigenframe_with_v(q).map(|f| f.0))?;
        let c = pg.c;
        let s = (1.0 - c * c).sqrt();
        let p = |i: usize, j: usize| inner6(p6(e[i]), e[j]);
        let (l1, l2) = (lam[0], lam[1]);
        let rot = p(0, 1) / (l1 - l2) * (l1 * l2 / s - s / 2.0);
        let mut want = [[[0.0; 3]; 3]; 3];
        want[0][0][2] = (p(0, 0) * l1 - c * l1) / s;
        want[0][1][2] = p(0, 1) * l1 / s;
        want[0][2] = [(c - p(0, 0)) * l1 / s, -l1 * p(0, 1) / s, 0.0];
        want[1][0][2] = p(0, 1) * l2 / s;
        want[1][1][2] = (p(1, 1) * l2 - c * l2) / s;
        want[1][2] = [-l2 * p(0, 1) / s, (c - p(1, 1)) * l2 / s, 0.0];
        want[2][0][1] = rot;
        want[2][1][0] = -rot;
        let r = max_abs((0..27).map(|n| gam[n / 9][(n / 3) % 3][n % 3] - want[n / 9][(n / 3) % 3][n % 3]));
        out.push(IdentityCheck::done(EIGENFRAME_CONNECTION, r));
    }

    // curve frame
    if !const_c {
        out.push(IdentityCheck::skip(CURVE_FRAME_CONNECTION, "C not constant"));
    } else {
        let f = curve_frame(&pg)?;
        let l1 = inner6(pg.apply_a(f[0]), f[0]);
        let off = norm6(sub6(pg.apply_a(f[0]), scale6(l1, f[0])));
        if off > CONSTANCY_TOL {
            out.push(IdentityCheck::skip(CURVE_FRAME_CONNECTION, "J₁N+J₂N is not a principal direction"));
        } else {
            let (_, gam) = frame_connection(m, u, scheme, curve_frame)?;
            let c = pg.c;
            let l2 = inner6(pg.apply_a(f[1]), f[1]);
            let wp = ((1.0 - c) / (1.0 + c)).sqrt();
            let wm = ((1.0 + c) / (1.0 - c)).sqrt();
            let mut want = [[[0.0; 3]; 3]; 3];
            want[0][0][2] = l1 * wp;
            want[0][2][0] = -l1 * wp;
            want[1][1][2] = -l2 * wm;
            want[1][2][1] = l2 * wm;
            let r = max_abs((0..27).map(|n| gam[n / 9][(n / 3) % 3][n % 3] - want[n / 9][(n / 3) % 3][n % 3]));
            out.push(IdentityCheck::done(CURVE_FRAME_CONNECTION, r));
        }
    }

    // three distinct principal curvatures
    let lam = pg.lambdas;
    let reason = if !const_lambda {
        Some("principal curvatures not constant")
    } else if !(distinct(lam[0], lam[1]) && distinct(lam[1], lam[2])) {
        Some("hypothesis of three distinct principal curvatures violated")
    } else {
        None
    };
    let names = [
        CONNECTION_SKEW,
        CONNECTION_SHAPE_DERIVATIVE,
        CONNECTION_CODAZZI,
        CONNECTION_DIAGONAL,
        CONNECTION_DIAGONAL_BALANCE,
    ];
    if let Some(r) = reason {
        out.extend(names.iter().map(|n| IdentityCheck::skip(n, r)));
        return Ok(out);
    }
    let (x, gam) = frame_connection(m, u, scheme, |q| Ok(q.principal_frame()))?;
    let p = |i: usize, j: usize| inner6(p6(x[i]), x[j]);
    let b = |i: usize| inner6(p6(x[i]), pg.normal);
    let idx = || (0..3).flat_map(|i| (0..3).flat_map(move |j| (0..3).map(move |k| (i, j, k))));
    out.push(IdentityCheck::done(
        CONNECTION_SKEW,
        max_abs(idx().map(|(i, j, k)| gam[i][j][k] + gam[i][k][j])),
    ));
    out.push(IdentityCheck::done(
        CONNECTION_SHAPE_DERIVATIVE,
        max_abs(idx().map(|(i, j, k)| {
            let ni = nabla_along(&pg, &nabla, x[i]);
            inner6(apply_coords(&pg, &ni, x[j]), x[k]) - (lam[j] - lam[k]) * gam[i][j][k]
        })),
    ));
    out.push(IdentityCheck::done(
        CONNECTION_CODAZZI,
        max_abs(idx().map(|(i, j, k)| {
            (lam[k] - lam[j]) * gam[i][j][k] - (lam[k] - lam[i]) * gam[j][i][k]
                + 0.5 * (b(j) * p(i, k) - b(i) * p(j, k))
        })),
    ));
    out.push(IdentityCheck::done(
        CONNECTION_DIAGONAL,
        max_abs(idx().filter(|&(i, j, k)| i != j && k == 0).map(|(i, j, _)| {
            gam[i][i][j] - (b(i) * p(i, j) - b(j) * p(i, i)) / (-2.0 * (lam[i] - lam[j]))
        })),
    ));
    out.push(IdentityCheck::done(
        CONNECTION_DIAGONAL_BALANCE,
        max_abs(idx().filter(|&(i, j, k)| i != j && j != k && i != k).map(|(i, j, k)| {
            (lam[i] - lam[j]) * gam[i][i][j] + (lam[k] - lam[j]) * gam[k][k][j]
        })),
    ));
    Ok(out)
}
