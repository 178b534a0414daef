//! Parallel hypersurfaces `Φ_l = exp(l N)`.
//!
//! Everything is expressed in the adapted frame
//! `E1 = V/√(1-C²)`, `E2 = (J1N+J2N)/√(2(1+C))`, `E3 = (J1N-J2N)/√(2(1-C))`,
//! in which `(Φ_l)_* E_i = Σ_j Q_ij(l) E_j^l` and the shape operator of the
//! parallel is `-Q⁻¹Q'`.

pub mod identities;

use std::sync::Arc;

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::fd::{CentralStencil, HIGH_ORDER_STEPS};
use crate::hyperdual::{hd_lorentz_inner, HdVec3, HyperDual};
use crate::product::{
    add6, inner6, j1_6, j2_6, join, norm6, scale6, split, sub6, ProductPoint, ProductTangent,
    Vec6,
};
use crate::surface::{point_geometry, Chart, Hd6, Hypersurface, PointGeometry};
use crate::zoo::Model;

/// `1 - |C|` below which the adapted frame is refused.
pub const DEGENERATE_C_TOL: f64 = 1e-9;
/// `|det Q|` below which `Q` is treated as singular.
pub const FOCAL_DET_TOL: f64 = 1e-10;
/// `|det Q|` below which a scan row is reported as focal and left out of the spreads.
pub const SCAN_FOCAL_TOL: f64 = 1e-2;
/// Bracket width at which focal bisection stops.
pub const BISECTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdaptedFrame {
    /// Zero vectors for frames built from a bare matrix.
    pub e: [Vec6; 3],
    /// `A_ij = <A E_i, E_j>`, symmetrised.
    pub a: Matrix3<f64>,
    pub c: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    /// `max |<E_i,E_j> - δ_ij|`.
    pub orthonormality_defect: f64,
    /// `max |A_ij - A_ji|` before symmetrisation.
    pub asymmetry: f64,
}

impl AdaptedFrame {
    /// Frame data without vectors, for working with `Q` directly.
    pub fn from_matrix(a: Matrix3<f64>, c: f64) -> Result<Self> {
        check_angle(c)?;
        Ok(Self {
            e: [[0.0; 6]; 3],
            a: 0.5 * (a + a.transpose()),
            c,
            c_plus: ((1.0 + c) / 2.0).sqrt(),
            c_minus: ((1.0 - c) / 2.0).sqrt(),
            orthonormality_defect: 0.0,
            asymmetry: (a - a.transpose()).amax(),
        })
    }

    pub fn h(&self) -> f64 {
        self.a.trace()
    }

    /// `H_ij = A_ii A_jj - A_ij²` (indices from 1).
    pub fn minor(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i - 1, j - 1);
        self.a[(i, i)] * self.a[(j, j)] - self.a[(i, j)].powi(2)
    }

    pub fn h12(&self) -> f64 {
        self.minor(1, 2)
    }

    pub fn h13(&self) -> f64 {
        self.minor(1, 3)
    }

    pub fn h23(&self) -> f64 {
        self.minor(2, 3)
    }

    /// Gauss-Kronecker curvature.
    pub fn k(&self) -> f64 {
        self.a.determinant()
    }

    /// `-2 + H² - |A|²`.
    pub fn rho(&self) -> f64 {
        -2.0 + self.h().powi(2) - (self.a * self.a).trace()
    }
}

fn check_angle(c: f64) -> Result<()> {
    if !(1.0 - c.abs() > DEGENERATE_C_TOL) {
        return Err(GeomError::DegenerateProductAngle { c });
    }
    Ok(())
}

pub fn adapted_frame(pg: &PointGeometry) -> Result<AdaptedFrame> {
    let c = pg.c;
    check_angle(c)?;
    let j1 = j1_6(pg.x, pg.normal);
    let j2 = j2_6(pg.x, pg.normal);
    let e = [
        scale6(1.0 / (1.0 - c * c).sqrt(), pg.v),
        scale6(1.0 / (2.0 * (1.0 + c)).sqrt(), add6(j1, j2)),
        scale6(1.0 / (2.0 * (1.0 - c)).sqrt(), sub6(j1, j2)),
    ];
    let mut defect = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((inner6(e[i], e[j]) - d).abs());
        }
    }
    let ae: [Vec6; 3] = std::array::from_fn(|i| pg.apply_a(e[i]));
    let a = Matrix3::from_fn(|i, j| inner6(ae[i], e[j]));
    let mut af = AdaptedFrame::from_matrix(a, c)?;
    af.e = e;
    af.orthonormality_defect = defect;
    Ok(af)
}

struct Hyperbolic {
    /// `sinh(C±l)/C±`
    sp: f64,
    sm: f64,
    /// `cosh(C±l)`
    cp: f64,
    cm: f64,
    /// `C± sinh(C±l)`
    dp: f64,
    dm: f64,
}

impl Hyperbolic {
    fn new(af: &AdaptedFrame, l: f64) -> Self {
        let (xp, xm) = (af.c_plus * l, af.c_minus * l);
        Self {
            sp: l * sinhc(xp),
            sm: l * sinhc(xm),
            cp: xp.cosh(),
            cm: xm.cosh(),
            dp: af.c_plus * xp.sinh(),
            dm: af.c_minus * xm.sinh(),
        }
    }
}

/// `sinh(x)/x`.
fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

pub fn q_matrix(af: &AdaptedFrame, l: f64) -> Matrix3<f64> {
    let a = &af.a;
    let t = Hyperbolic::new(af, l);
    Matrix3::new(
        1.0 - l * a[(0, 0)],
        -a[(0, 1)] * t.sp,
        -a[(0, 2)] * t.sm,
        -l * a[(0, 1)],
        t.cp - a[(1, 1)] * t.sp,
        -a[(1, 2)] * t.sm,
        -l * a[(0, 2)],
        -a[(1, 2)] * t.sp,
        t.cm - a[(2, 2)] * t.sm,
    )
}

/// `d/dl` of [`q_matrix`].
pub fn q_prime(af: &AdaptedFrame, l: f64) -> Matrix3<f64> {
    let a = &af.a;
    let t = Hyperbolic::new(af, l);
    Matrix3::new(
        -a[(0, 0)],
        -a[(0, 1)] * t.cp,
        -a[(0, 2)] * t.cm,
        -a[(0, 1)],
        t.dp - a[(1, 1)] * t.cp,
        -a[(1, 2)] * t.cm,
        -a[(0, 2)],
        -a[(1, 2)] * t.cp,
        t.dm - a[(2, 2)] * t.cm,
    )
}

pub fn det_q(af: &AdaptedFrame, l: f64) -> f64 {
    q_matrix(af, l).determinant()
}

/// `det Q` expanded in the minors `H_ij`.
pub fn detq_expansion(af: &AdaptedFrame, l: f64) -> f64 {
    let a = &af.a;
    let t = Hyperbolic::new(af, l);
    (1.0 - l * a[(0, 0)]) * t.cp * t.cm
        + (-a[(1, 1)] + l * af.h12()) * t.sp * t.cm
        + (-a[(2, 2)] + l * af.h13()) * t.sm * t.cp
        + (af.h23() - l * af.k()) * t.sp * t.sm
}

/// `d/dl` of [`detq_expansion`].
pub fn detq_expansion_derivative(af: &AdaptedFrame, l: f64) -> f64 {
    let a = &af.a;
    let t = Hyperbolic::new(af, l);
    // d sp/dl = cp, d cp/dl = dp
    let f1 = 1.0 - l * a[(0, 0)];
    let f2 = -a[(1, 1)] + l * af.h12();
    let f3 = -a[(2, 2)] + l * af.h13();
    let f4 = af.h23() - l * af.k();
    -a[(0, 0)] * t.cp * t.cm
        + f1 * (t.dp * t.cm + t.cp * t.dm)
        + af.h12() * t.sp * t.cm
        + f2 * (t.cp * t.cm + t.sp * t.dm)
        + af.h13() * t.sm * t.cp
        + f3 * (t.cm * t.cp + t.sm * t.dp)
        - af.k() * t.sp * t.sm
        + f4 * (t.cp * t.sm + t.sp * t.cm)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParallelState {
    pub l: f64,
    pub q: Matrix3<f64>,
    pub q_prime: Matrix3<f64>,
    pub det_q: f64,
    /// `-tr(Q⁻¹Q')`.
    pub h_of_l: f64,
    /// `-(det Q)'/det Q` from the expansion.
    pub h_of_l_det: f64,
    /// `<A_l E_i^l, E_j^l> = -(Q⁻¹Q')_ij`.
    pub shape: Matrix3<f64>,
    /// Eigenvalues of `shape`, ascending.
    pub parallel_lambdas: [f64; 3],
    pub shape_asymmetry: f64,
}

pub fn parallel_state(af: &AdaptedFrame, l: f64) -> Result<ParallelState> {
    let q = q_matrix(af, l);
    let qp = q_prime(af, l);
    let det = q.determinant();
    if !(det.abs() > FOCAL_DET_TOL) {
        return Err(GeomError::FocalPoint { l, det });
    }
    let q_inv = q.try_inverse().ok_or(GeomError::FocalPoint { l, det })?;
    let shape = -(q_inv * qp);
    let asym = (shape - shape.transpose()).amax();
    let sym = 0.5 * (shape + shape.transpose());
    let mut lambdas: [f64; 3] = sym.symmetric_eigenvalues().into();
    lambdas.sort_by(f64::total_cmp);
    Ok(ParallelState {
        l,
        q,
        q_prime: qp,
        det_q: det,
        h_of_l: shape.trace(),
        h_of_l_det: -detq_expansion_derivative(af, l) / detq_expansion(af, l),
        shape,
        parallel_lambdas: lambdas,
        shape_asymmetry: asym,
    })
}

/// Mean curvature of the parallel at distance `l`.
pub fn mean_curvature_of_parallel(af: &AdaptedFrame, l: f64) -> Result<f64> {
    parallel_state(af, l).map(|s| s.h_of_l)
}

/// Orders of the closed-form derivatives of `det Q` at `l = 0`.
pub const DETQ_ORDERS: [usize; 5] = [1, 2, 4, 6, 8];

/// Closed-form `d^k det Q / dl^k` at `l = 0` for `k = 1, 2, 4, 6, 8`.
pub fn detq_derivatives_at_0(af: &AdaptedFrame, rho: f64) -> [f64; 5] {
    let c = af.c;
    let c2 = c * c;
    let (h12, h13) = (af.h12(), af.h13());
    [
        -af.h(),
        rho + 3.0,
        6.0 - c2 + (4.0 - 4.0 * c) * h12 + (4.0 + 4.0 * c) * h13 + 2.0 * rho,
        12.0 - 5.0 * c2
            + (16.0 - 12.0 * c - 4.0 * c2) * h12
            + (16.0 + 12.0 * c - 4.0 * c2) * h13
            + (4.0 - c2) * rho,
        24.0 - 16.0 * c2 + c2 * c2 + (8.0 - 4.0 * c2) * rho
            + (48.0 - 32.0 * c - 24.0 * c2 + 8.0 * c2 * c) * h12
            + (48.0 + 32.0 * c - 24.0 * c2 - 8.0 * c2 * c) * h13,
    ]
}

/// `d^k det Q / dl^k` at `l = 0` by an accuracy-8 central stencil with one
/// Richardson step.
pub fn detq_numeric_derivative(af: &AdaptedFrame, k: usize) -> f64 {
    assert!((1..=8).contains(&k), "derivative order {k} not in 1..=8");
    let stencil = CentralStencil::new(k, 8);
    let f = |l: f64| detq_expansion(af, l);
    stencil.apply_richardson(&f, 0.0, HIGH_ORDER_STEPS[k - 1])
}

/// Numerical derivatives of orders `1..=8`.
pub fn detq_numeric_derivatives(af: &AdaptedFrame) -> [f64; 8] {
    std::array::from_fn(|i| detq_numeric_derivative(af, i + 1))
}

/// `(cosh(C± l) x + sinh(C± l)/C± n, cosh(C± l) n + C± sinh(C± l) x)` with
/// `C±² = <n,n>`, which stays regular as `C± → 0`.
fn flow_factor(x: [f64; 3], n: [f64; 3], l: f64) -> ([f64; 3], [f64; 3]) {
    let nn = -n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
    let w = nn.max(0.0).sqrt() * l;
    let (ch, s) = (w.cosh(), l * sinhc(w));
    (
        std::array::from_fn(|i| ch * x[i] + s * n[i]),
        std::array::from_fn(|i| ch * n[i] + nn * s * x[i]),
    )
}

fn parallel_vec6(x: Vec6, n: Vec6, l: f64) -> (Vec6, Vec6) {
    let (p, q) = split(x);
    let (n1, n2) = split(n);
    let (pl, n1l) = flow_factor(p.to_array(), n1.to_array(), l);
    let (ql, n2l) = flow_factor(q.to_array(), n2.to_array(), l);
    (
        [pl[0], pl[1], pl[2], ql[0], ql[1], ql[2]],
        [n1l[0], n1l[1], n1l[2], n2l[0], n2l[1], n2l[2]],
    )
}

/// `(p_l, q_l)` over the chart point `u`.
pub fn parallel_point(m: &Hypersurface, u: [f64; 3], l: f64) -> Result<ProductPoint> {
    let pg = point_geometry(m, u)?;
    check_angle(pg.c)?;
    ProductPoint::from_vec6(parallel_vec6(pg.x, pg.normal, l).0)
}

/// `(N1^l, N2^l)` over the chart point `u`.
pub fn parallel_normal(m: &Hypersurface, u: [f64; 3], l: f64) -> Result<ProductTangent> {
    let pg = point_geometry(m, u)?;
    check_angle(pg.c)?;
    let (x, n) = parallel_vec6(pg.x, pg.normal, l);
    ProductTangent::from_vec6(ProductPoint::from_vec6(x)?, n)
}

fn hd_flow_factor(x: HdVec3, n: HdVec3, l: f64) -> (HdVec3, HdVec3) {
    let nn = hd_lorentz_inner(n, n);
    let z = nn * (l * l);
    let ch = z.cosh_sqrt();
    let s = z.sinhc_sqrt() * l;
    let ns = nn * s;
    (
        std::array::from_fn(|i| ch * x[i] + s * n[i]),
        std::array::from_fn(|i| ch * n[i] + ns * x[i]),
    )
}

/// The chart `u ↦ Φ_l(u)` of a parallel, with normal `N^l`.
struct ParallelChart {
    base: Arc<dyn Chart>,
    l: f64,
}

impl ParallelChart {
    fn parts(&self, u: [HyperDual; 3]) -> (Hd6, Hd6) {
        let x = self.base.eval(u);
        let n = self
            .base
            .normal_hint(u)
            .expect("parallel charts are built from charts with a normal hint");
        let (p, q) = ([x[0], x[1], x[2]], [x[3], x[4], x[5]]);
        let (n1, n2) = ([n[0], n[1], n[2]], [n[3], n[4], n[5]]);
        let (pl, n1l) = hd_flow_factor(p, n1, self.l);
        let (ql, n2l) = hd_flow_factor(q, n2, self.l);
        (
            [pl[0], pl[1], pl[2], ql[0], ql[1], ql[2]],
            [n1l[0], n1l[1], n1l[2], n2l[0], n2l[1], n2l[2]],
        )
    }
}

impl Chart for ParallelChart {
    fn eval(&self, u: [HyperDual; 3]) -> Hd6 {
        self.parts(u).0
    }

    fn normal_hint(&self, u: [HyperDual; 3]) -> Option<Hd6> {
        Some(self.parts(u).1)
    }
}

/// The parallel at distance `l` as a hypersurface over the same chart box.
/// Needs a chart with a closed-form normal.
pub fn parallel_surface(m: &Hypersurface, l: f64) -> Result<Hypersurface> {
    if !m.has_hint() {
        return Err(GeomError::NoNormalHint(m.name.clone()));
    }
    Ok(Hypersurface::new(
        format!("{} at l={l}", m.name),
        Arc::new(ParallelChart {
            base: m.chart.clone(),
            l,
        }),
        m.domain,
    ))
}

/// `(Φ_l)_* X` for a tangent vector `X` of `M` at `u`, in ambient form.
pub fn pushforward(m: &Hypersurface, u: [f64; 3], l: f64, x: Vec6) -> Result<Vec6> {
    let pg = point_geometry(m, u)?;
    pg.check_tangent(x)?;
    let coords = pg.coords(x);
    let jet = parallel_surface(m, l)?.jet(u);
    let mut out = [0.0; 6];
    for i in 0..3 {
        out = add6(out, scale6(coords[i], jet.d[i]));
    }
    Ok(out)
}

fn require_tube(model: &Model) -> Result<()> {
    if model.spec.kind() != "M_tau" {
        return Err(GeomError::Model(format!(
            "{} is not an M_tau model",
            model.spec.label()
        )));
    }
    Ok(())
}

/// `|(Φ_l)_* J1N|` on `M_τ`.
pub fn focal_pushforward_norm(model: &Model, u: [f64; 3], l: f64) -> Result<f64> {
    require_tube(model)?;
    let pg = point_geometry(&model.surface, u)?;
    let j1 = j1_6(pg.x, pg.normal);
    Ok(norm6(pushforward(&model.surface, u, l, j1)?))
}

/// `<(Φ_l)_* J1N, J1N^l>`, the signed factor by which the flow scales `J1N`.
pub fn focal_pushforward_factor(model: &Model, u: [f64; 3], l: f64) -> Result<f64> {
    require_tube(model)?;
    let pg = point_geometry(&model.surface, u)?;
    let j1 = j1_6(pg.x, pg.normal);
    let pushed = pushforward(&model.surface, u, l, j1)?;
    let (xl, nl) = parallel_vec6(pg.x, pg.normal, l);
    Ok(inner6(pushed, j1_6(xl, nl)))
}

/// Root of `f` in `[lo, hi]` by bisection, if `f` changes sign there.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Zeros of `det Q` between consecutive grid values.
pub fn focal_values(af: &AdaptedFrame, l_grid: &[f64]) -> Vec<f64> {
    let f = |l: f64| detq_expansion(af, l);
    l_grid
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (f(w[0]), f(w[1]));
            if a != 0.0 && a.signum() != b.signum() {
                bisect(f, w[0], w[1], BISECTION_TOL)
            } else {
                None
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub l: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub h_spread: f64,
    /// Spread of each parallel principal curvature, ascending order.
    pub lambda_spread: [f64; 3],
    /// `min |det Q|` over the sample points.
    pub det_min: f64,
    /// `det Q` at the first sample point.
    pub det_first: f64,
    pub focal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    /// Largest spread of `H(l)` or of a parallel principal curvature over
    /// non-focal rows.
    pub max_spread: f64,
    /// Focal distances found at the first sample point.
    pub focal_values: Vec<f64>,
    pub excluded_rows: usize,
    /// Set when `C² = 1` and the scan ran on the curve factor.
    pub curve_analogue: bool,
}

impl ScanReport {
    pub fn is_isoparametric(&self, tol: f64) -> bool {
        self.max_spread < tol
    }
}

struct PointScan {
    det: Vec<f64>,
    h: Vec<f64>,
    lambdas: Vec<[f64; 3]>,
    focal: Vec<f64>,
}

fn curve_scan(kappa: f64, l_grid: &[f64]) -> PointScan {
    let det = |l: f64| l.cosh() - kappa * l.sinh();
    let mut out = PointScan {
        det: Vec::new(),
        h: Vec::new(),
        lambdas: Vec::new(),
        focal: Vec::new(),
    };
    for &l in l_grid {
        let d = det(l);
        let k = (kappa * l.cosh() - l.sinh()) / d;
        let mut lam = [k, 0.0, 0.0];
        lam.sort_by(f64::total_cmp);
        out.det.push(d);
        out.h.push(k);
        out.lambdas.push(lam);
    }
    out.focal = l_grid
        .windows(2)
        .filter_map(|w| bisect(det, w[0], w[1], BISECTION_TOL))
        .collect();
    out
}

fn frame_scan(af: &AdaptedFrame, l_grid: &[f64]) -> PointScan {
    let mut out = PointScan {
        det: Vec::new(),
        h: Vec::new(),
        lambdas: Vec::new(),
        focal: focal_values(af, l_grid),
    };
    for &l in l_grid {
        match parallel_state(af, l) {
            Ok(s) => {
                out.det.push(s.det_q);
                out.h.push(s.h_of_l);
                out.lambdas.push(s.parallel_lambdas);
            }
            Err(_) => {
                out.det.push(det_q(af, l));
                out.h.push(f64::NAN);
                out.lambdas.push([f64::NAN; 3]);
            }
        }
    }
    out
}

/// Spreads of `H(l)` and of the parallel principal curvatures across sample
/// points, for each `l` in the grid. Rows where some `|det Q| < 1e-2` are
/// flagged focal and excluded. Models with `C² = 1` are scanned through
/// the parallels of their generating curve.
pub fn isoparametric_scan(
    m: &Hypersurface,
    sample_points: &[[f64; 3]],
    l_grid: &[f64],
) -> Result<ScanReport> {
    if sample_points.is_empty() {
        return Err(GeomError::Model("isoparametric scan needs sample points".into()));
    }
    let geoms: Vec<PointGeometry> = sample_points
        .par_iter()
        .map(|&u| point_geometry(m, u))
        .collect::<Result<_>>()?;
    let degenerate = geoms.iter().filter(|g| 1.0 - g.c.abs() <= DEGENERATE_C_TOL).count();
    let curve_analogue = degenerate == geoms.len();
    if degenerate > 0 && !curve_analogue {
        let c = geoms.iter().map(|g| g.c).fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
        return Err(GeomError::DegenerateProductAngle { c });
    }
    let scans: Vec<PointScan> = geoms
        .par_iter()
        .map(|g| {
            if curve_analogue {
                Ok(curve_scan(g.h, l_grid))
            } else {
                adapted_frame(g).map(|af| frame_scan(&af, l_grid))
            }
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(l_grid.len());
    let mut max_spread = 0.0f64;
    let mut excluded = 0;
    for (i, &l) in l_grid.iter().enumerate() {
        let det_min = scans.iter().map(|s| s.det[i].abs()).fold(f64::INFINITY, f64::min);
        let focal = !(det_min >= SCAN_FOCAL_TOL);
        let spread = |f: &dyn Fn(&PointScan) -> f64| {
            let (lo, hi) = scans.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            (lo, hi)
        };
        let (h_min, h_max) = spread(&|s| s.h[i]);
        let lambda_spread: [f64; 3] = std::array::from_fn(|k| {
            let (lo, hi) = spread(&|s| s.lambdas[i][k]);
            hi - lo
        });
        let h_spread = h_max - h_min;
        if focal {
            excluded += 1;
        } else {
            max_spread = max_spread
                .max(h_spread)
                .max(lambda_spread.iter().cloned().fold(0.0, f64::max));
        }
        rows.push(ScanRow {
            l,
            h_min,
            h_max,
            h_spread,
            lambda_spread,
            det_min,
            det_first: scans[0].det[i],
            focal,
        });
    }
    Ok(ScanReport {
        rows,
        max_spread,
        focal_values: scans[0].focal.clone(),
        excluded_rows: excluded,
        curve_analogue,
    })
}

/// Parallel of the product-of-curves chart written directly in the shifted
/// curve arguments, at `(t, r, s)`.
pub fn curve_product_parallel_point(
    c: f64,
    gamma: &crate::lorentz::CurveSource,
    gamma_tilde: &crate::lorentz::CurveSource,
    u: [f64; 3],
    l: f64,
) -> Vec6 {
    let (sc, s1c) = (c.sqrt(), (1.0 - c).sqrt());
    let a = sc * u[0] + s1c * l;
    let b = s1c * u[0] - sc * l;
    let g = gamma.state(u[1]);
    let gt = gamma_tilde.state(u[2]);
    let p = g.gamma.vec() * a.cosh() + g.normal * a.sinh();
    let q = gt.gamma.vec() * b.cosh() + gt.normal * b.sinh();
    join(p, q)
}
