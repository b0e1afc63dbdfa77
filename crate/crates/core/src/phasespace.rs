//! Coordinate charts, vector fields, Jacobians and critical points.
//!
//! The finite chart uses `X = (alpha/m) xi^2 f^(1-m)`, `Y = xi f'/f`,
//! `Z = xi^(sigma+2) f^(p-m)/m` with independent variable `eta = ln xi`.
//! The projection on `X` uses `x = 1/X, y = Y/X, z = Z/X` and the projections
//! on `Y` use `x = X/Y, z = Z/Y, w = 1/Y`.

use crate::error::{Error, Result};
use crate::params::{critical_exponent, Params};
use crate::scalar::Real;
use nalgebra::{DMatrix, Matrix2, Matrix3};
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Fixed-size state; planar charts leave the third slot at zero.
pub type State<T> = [T; 3];
/// Row-major Jacobian; planar charts use the upper-left 2x2 block.
pub type Mat3<T> = [[T; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Chart {
    /// `(X, Y, Z)` in `eta`.
    Xyz,
    /// `(x, y, z)` in `eta_1` with `d eta_1 = X d eta`.
    XProj,
    /// `(x, z, w)` near the source at `Y = +infinity`, flow forward in `xi`.
    YProjPlus,
    /// `(x, z, w)` near the sink at `Y = -infinity`, flow forward in `xi`.
    YProjMinus,
    /// `(y, w)` with `w = x z` inside the invariant plane `x = 0`.
    WChart,
    /// `(Y, Z)` inside the invariant plane `X = 0`.
    PlaneX0,
    /// `(X, Y)` inside the invariant plane `Z = 0`.
    PlaneZ0,
}

impl Chart {
    pub fn dim(self) -> usize {
        match self {
            Chart::Xyz | Chart::XProj | Chart::YProjPlus | Chart::YProjMinus => 3,
            Chart::WChart | Chart::PlaneX0 | Chart::PlaneZ0 => 2,
        }
    }

    pub fn coord_names(self) -> &'static [&'static str] {
        match self {
            Chart::Xyz => &["X", "Y", "Z"],
            Chart::XProj => &["x", "y", "z"],
            Chart::YProjPlus | Chart::YProjMinus => &["x", "z", "w"],
            Chart::WChart => &["y", "w"],
            Chart::PlaneX0 => &["Y", "Z"],
            Chart::PlaneZ0 => &["X", "Y"],
        }
    }

    /// Index of the coordinate whose sign tracks the sign of `Y`.
    pub fn y_index(self) -> Option<usize> {
        match self {
            Chart::Xyz | Chart::XProj | Chart::PlaneZ0 => Some(1),
            Chart::WChart | Chart::PlaneX0 => Some(0),
            Chart::YProjPlus | Chart::YProjMinus => None,
        }
    }

    /// Coordinates constrained to be non-negative.
    pub fn nonnegative(self) -> &'static [usize] {
        match self {
            Chart::Xyz | Chart::XProj => &[0, 2],
            Chart::YProjPlus => &[0, 1, 2],
            Chart::YProjMinus => &[],
            Chart::WChart => &[1],
            Chart::PlaneX0 => &[1],
            Chart::PlaneZ0 => &[0],
        }
    }
}

/// A state tagged with its chart and the chart's own independent variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint<T: Real> {
    pub chart: Chart,
    pub coords: State<T>,
    pub s: T,
}

impl<T: Real> ChartPoint<T> {
    pub fn new(chart: Chart, coords: State<T>) -> Self {
        ChartPoint { chart, coords, s: T::zero() }
    }

    pub fn xyz(x: T, y: T, z: T) -> Self {
        Self::new(Chart::Xyz, [x, y, z])
    }

    /// Sign constraints of the chart hold up to `tol`.
    pub fn is_admissible(&self, tol: T) -> bool {
        self.chart.nonnegative().iter().all(|&i| self.coords[i] >= -tol)
            && self.coords[..self.chart.dim()].iter().all(|c| c.is_finite())
    }
}

impl<T: Real> Serialize for ChartPoint<T> {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = ser.serialize_struct("ChartPoint", 3)?;
        st.serialize_field("chart", &self.chart)?;
        let c: Vec<f64> = self.coords[..self.chart.dim()].iter().map(|v| v.to_f64_lossy()).collect();
        st.serialize_field("coords", &c)?;
        st.serialize_field("s", &self.s.to_f64_lossy())?;
        st.end()
    }
}

fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

/// Right-hand side of the selected system.
pub fn vf<T: Real>(chart: Chart, u: &State<T>, params: &Params<T>) -> State<T> {
    let m = params.m;
    let n = params.dim();
    let p = params.p;
    let s = params.sigma;
    let k = params.drift();
    let one = T::one();
    let two = lit::<T>(2.0);
    let zero = T::zero();
    match chart {
        Chart::Xyz => {
            let [x, y, z] = *u;
            [
                x * (two - (m - one) * y),
                x - (n - two) * y - z - m * y * y + k * x * y,
                z * (s + two + (p - m) * y),
            ]
        }
        Chart::XProj => {
            let [x, y, z] = *u;
            [
                x * ((m - one) * y - two * x),
                -y * y + k * y + x - n * x * y - x * z,
                z * ((p - one) * y + s * x),
            ]
        }
        Chart::YProjPlus | Chart::YProjMinus => {
            let f = yproj_field(u, params);
            if chart == Chart::YProjPlus {
                [-f[0], -f[1], -f[2]]
            } else {
                f
            }
        }
        Chart::WChart => {
            let [y, w, _] = *u;
            [-y * y + k * y - w, (m + p - two) * y * w, zero]
        }
        Chart::PlaneX0 => {
            let [y, z, _] = *u;
            [-(n - two) * y - z - m * y * y, z * (s + two + (p - m) * y), zero]
        }
        Chart::PlaneZ0 => {
            let [x, y, _] = *u;
            [x * (two - (m - one) * y), x - (n - two) * y - m * y * y + k * x * y, zero]
        }
    }
}

fn yproj_field<T: Real>(u: &State<T>, params: &Params<T>) -> State<T> {
    let [x, z, w] = *u;
    let (m, n, p, s, k) = (params.m, params.dim(), params.p, params.sigma, params.drift());
    let two = lit::<T>(2.0);
    [
        -x - n * x * w + k * x * x + x * x * w - x * z * w,
        -p * z - (n + s) * z * w + k * x * z + x * z * w - z * z * w,
        -m * w - (n - two) * w * w + k * x * w + x * w * w - z * w * w,
    ]
}

/// Analytic Jacobian of [`vf`].
pub fn jacobian<T: Real>(chart: Chart, u: &State<T>, params: &Params<T>) -> Mat3<T> {
    let m = params.m;
    let n = params.dim();
    let p = params.p;
    let s = params.sigma;
    let k = params.drift();
    let one = T::one();
    let two = lit::<T>(2.0);
    let zero = T::zero();
    match chart {
        Chart::Xyz => {
            let [x, y, z] = *u;
            [
                [two - (m - one) * y, -(m - one) * x, zero],
                [one + k * y, -(n - two) - two * m * y + k * x, -one],
                [zero, (p - m) * z, s + two + (p - m) * y],
            ]
        }
        Chart::XProj => {
            let [x, y, z] = *u;
            [
                [(m - one) * y - lit::<T>(4.0) * x, (m - one) * x, zero],
                [one - n * y - z, -two * y + k - n * x, -x],
                [s * z, (p - one) * z, (p - one) * y + s * x],
            ]
        }
        Chart::YProjPlus | Chart::YProjMinus => {
            let [x, z, w] = *u;
            let j = [
                [
                    -one - n * w + two * k * x + two * x * w - z * w,
                    -x * w,
                    -n * x + x * x - x * z,
                ],
                [
                    k * z + z * w,
                    -p - (n + s) * w + k * x + x * w - two * z * w,
                    -(n + s) * z + x * z - z * z,
                ],
                [k * w + w * w, -w * w, -m - two * (n - two) * w + k * x + two * x * w - two * z * w],
            ];
            if chart == Chart::YProjPlus {
                j.map(|row| row.map(|v| -v))
            } else {
                j
            }
        }
        Chart::WChart => {
            let [y, w, _] = *u;
            [[-two * y + k, -one, zero], [(m + p - two) * w, (m + p - two) * y, zero], [zero; 3]]
        }
        Chart::PlaneX0 => {
            let [y, z, _] = *u;
            [[-(n - two) - two * m * y, -one, zero], [(p - m) * z, s + two + (p - m) * y, zero], [zero; 3]]
        }
        Chart::PlaneZ0 => {
            let [x, y, _] = *u;
            [
                [two - (m - one) * y, -(m - one) * x, zero],
                [one + k * y, -(n - two) - two * m * y + k * x, zero],
                [zero; 3],
            ]
        }
    }
}

fn chart_err(msg: &str) -> Error {
    Error::Chart(msg.to_string())
}

/// Algebraic change of chart. The independent variable is carried over as is;
/// the charts use different time scales.
pub fn to_chart<T: Real>(point: &ChartPoint<T>, target: Chart) -> Result<ChartPoint<T>> {
    if point.chart == target {
        return Ok(*point);
    }
    let xyz = to_xyz(point)?;
    let [x, y, z] = xyz;
    let zero = T::zero();
    let coords = match target {
        Chart::Xyz => xyz,
        Chart::XProj => {
            if x <= zero {
                return Err(chart_err("X must be positive for the X projection"));
            }
            [x.recip(), y / x, z / x]
        }
        Chart::YProjPlus | Chart::YProjMinus => {
            if y == zero {
                return Err(chart_err("Y must be nonzero for the Y projection"));
            }
            if (target == Chart::YProjPlus) != (y > zero) {
                return Err(chart_err("sign of Y does not match the Y projection"));
            }
            [x / y, z / y, y.recip()]
        }
        Chart::WChart => {
            if x <= zero {
                return Err(chart_err("X must be positive to form w = x z"));
            }
            [y / x, z / (x * x), zero]
        }
        Chart::PlaneX0 => {
            if x != zero {
                return Err(chart_err("point is not in the plane X = 0"));
            }
            [y, z, zero]
        }
        Chart::PlaneZ0 => {
            if z != zero {
                return Err(chart_err("point is not in the plane Z = 0"));
            }
            [x, y, zero]
        }
    };
    Ok(ChartPoint { chart: target, coords, s: point.s })
}

/// XProj coordinates to the `(y, w)` plane; valid also at `x = 0`.
pub fn xproj_to_w<T: Real>(u: &State<T>) -> State<T> {
    [u[1], u[0] * u[2], T::zero()]
}

fn to_xyz<T: Real>(point: &ChartPoint<T>) -> Result<State<T>> {
    let c = point.coords;
    let zero = T::zero();
    match point.chart {
        Chart::Xyz => Ok(c),
        Chart::XProj => {
            if c[0] <= zero {
                return Err(chart_err("x must be positive to leave the X projection"));
            }
            Ok([c[0].recip(), c[1] / c[0], c[2] / c[0]])
        }
        Chart::YProjPlus | Chart::YProjMinus => {
            if c[2] == zero {
                return Err(chart_err("w must be nonzero to leave the Y projection"));
            }
            let y = c[2].recip();
            Ok([c[0] * y, y, c[1] * y])
        }
        Chart::WChart => Err(chart_err("the (y, w) plane lies at infinity")),
        Chart::PlaneX0 => Ok([zero, c[0], c[1]]),
        Chart::PlaneZ0 => Ok([c[0], c[1], zero]),
    }
}

/// Identifiers of the catalogued critical points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CriticalId {
    P0,
    P1,
    P2,
    P3,
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
    Qgamma0,
    /// Restriction of `Q1` to the `(y, w)` plane.
    Q1Prime,
    /// Restriction of `Q5` to the `(y, w)` plane.
    Q5Prime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointKind {
    UnstableNode,
    StableNode,
    UnstableFocus,
    StableFocus,
    Saddle,
    SaddleNode,
    CenterDegenerate,
}

/// Eigenvalue with a unit eigenvector normalized so that its largest-magnitude
/// component is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

impl Serialize for EigenPair {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = ser.serialize_struct("EigenPair", 2)?;
        st.serialize_field("value", &[self.value.re, self.value.im])?;
        let v: Vec<[f64; 2]> = self.vector.iter().map(|c| [c.re, c.im]).collect();
        st.serialize_field("vector", &v)?;
        st.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPointInfo {
    pub id: CriticalId,
    /// `None` for the point reached only along the `Z` direction at infinity.
    pub coords: Option<ChartPoint<f64>>,
    pub exists: bool,
    pub jacobian: Option<Vec<Vec<f64>>>,
    pub eigenpairs: Vec<EigenPair>,
    pub kind: Option<PointKind>,
    pub unstable_dim: usize,
    pub stable_dim: usize,
    pub center_dim: usize,
    pub kappa: Option<f64>,
    /// Set when the parameters sit on a bifurcation value for this point.
    pub bifurcation: bool,
}

/// Eigenpairs of the leading `dim x dim` block.
pub fn eigenpairs(mat: &Mat3<f64>, dim: usize) -> Vec<EigenPair> {
    let values: Vec<Complex64> = match dim {
        2 => Matrix2::new(mat[0][0], mat[0][1], mat[1][0], mat[1][1])
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect(),
        _ => Matrix3::new(
            mat[0][0], mat[0][1], mat[0][2], mat[1][0], mat[1][1], mat[1][2], mat[2][0], mat[2][1],
            mat[2][2],
        )
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect(),
    };
    let mut values = values;
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let scale = mat.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut out = Vec::with_capacity(dim);
    let mut i = 0;
    while i < values.len() {
        let mut j = i + 1;
        while j < values.len() && (values[j] - values[i]).norm() < 1e-7 * scale {
            j += 1;
        }
        let group = j - i;
        let mean = values[i..j].iter().sum::<Complex64>() / group as f64;
        let vecs = null_vectors(mat, dim, mean, group, scale);
        for (g, v) in values[i..j].iter().zip(vecs) {
            out.push(EigenPair { value: *g, vector: v });
        }
        i = j;
    }
    out
}

fn null_vectors(mat: &Mat3<f64>, dim: usize, lambda: Complex64, count: usize, scale: f64) -> Vec<Vec<Complex64>> {
    let b = DMatrix::<Complex64>::from_fn(dim, dim, |r, c| {
        let v = Complex64::new(mat[r][c], 0.0);
        if r == c {
            v - lambda
        } else {
            v
        }
    });
    let svd = b.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let mut vecs = Vec::with_capacity(count);
    for (rank, &idx) in order.iter().enumerate().take(count) {
        // a defective eigenvalue contributes fewer null vectors; repeat the first
        let idx = if rank > 0 && svd.singular_values[idx] > 1e-6 * scale { order[0] } else { idx };
        let v: Vec<Complex64> = (0..dim).map(|c| vt[(idx, c)].conj()).collect();
        vecs.push(normalize_phase(v));
    }
    vecs
}

fn normalize_phase(v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let lead = v.iter().copied().fold(Complex64::new(0.0, 0.0), |a, c| if c.norm() > a.norm() + 1e-14 { c } else { a });
    if norm == 0.0 || lead.norm() == 0.0 {
        return v;
    }
    let phase = lead / lead.norm();
    v.into_iter().map(|c| c / phase / norm).collect()
}

/// Classification from eigenvalues; returns `(kind, unstable, stable, center)`.
pub fn classify_eigenvalues(values: &[Complex64], tol: f64) -> (PointKind, usize, usize, usize) {
    let unstable = values.iter().filter(|v| v.re > tol).count();
    let stable = values.iter().filter(|v| v.re < -tol).count();
    let center = values.len() - unstable - stable;
    let complex = values.iter().any(|v| v.im.abs() > tol);
    let kind = if center >= 2 {
        PointKind::CenterDegenerate
    } else if center == 1 {
        PointKind::SaddleNode
    } else if stable == 0 {
        if complex { PointKind::UnstableFocus } else { PointKind::UnstableNode }
    } else if unstable == 0 {
        if complex { PointKind::StableFocus } else { PointKind::StableNode }
    } else {
        PointKind::Saddle
    };
    (kind, unstable, stable, center)
}

/// Classify a catalogued point from its stored eigenpairs.
pub fn classify_point(info: &CriticalPointInfo) -> Option<PointKind> {
    if info.eigenpairs.is_empty() {
        return None;
    }
    let vals: Vec<Complex64> = info.eigenpairs.iter().map(|e| e.value).collect();
    Some(classify_eigenvalues(&vals, 1e-9).0)
}

/// Location of a point in its natural chart, if it exists for these parameters.
pub fn point_location(id: CriticalId, params: &Params<f64>) -> Option<ChartPoint<f64>> {
    let m = params.m;
    let n = params.dim();
    let p = params.p;
    let s = params.sigma;
    let k = params.drift();
    match id {
        CriticalId::P0 => Some(ChartPoint::xyz(0.0, 0.0, 0.0)),
        CriticalId::P1 => Some(ChartPoint::xyz(0.0, -(n - 2.0) / m, 0.0)),
        CriticalId::P2 => {
            let pc = critical_exponent(m, params.n, s).finite()?;
            if p < pc {
                return None;
            }
            let z2 = (n - 2.0) * (s + 2.0) * (p - pc) / ((p - m) * (p - m));
            Some(ChartPoint::xyz(0.0, -(s + 2.0) / (p - m), z2))
        }
        CriticalId::P3 => {
            let x3 = 2.0 * (s + 2.0) * (m * n - n + 2.0) / (params.l() * (m - 1.0));
            Some(ChartPoint::xyz(x3, 2.0 / (m - 1.0), 0.0))
        }
        CriticalId::Q1 => Some(ChartPoint::new(Chart::XProj, [0.0, 0.0, 0.0])),
        CriticalId::Q5 => Some(ChartPoint::new(Chart::XProj, [0.0, k, 0.0])),
        CriticalId::Qgamma0 => Some(ChartPoint::new(Chart::XProj, [0.0, 0.0, params.kappa()])),
        CriticalId::Q2 => Some(ChartPoint::new(Chart::YProjPlus, [0.0; 3])),
        CriticalId::Q3 => Some(ChartPoint::new(Chart::YProjMinus, [0.0; 3])),
        CriticalId::Q4 => None,
        CriticalId::Q1Prime => Some(ChartPoint::new(Chart::WChart, [0.0; 3])),
        CriticalId::Q5Prime => Some(ChartPoint::new(Chart::WChart, [k, 0.0, 0.0])),
    }
}

/// Closed-form eigenvalues of the linearizations, used as certificates.
pub fn closed_form_eigenvalues(id: CriticalId, params: &Params<f64>) -> Option<Vec<f64>> {
    let m = params.m;
    let n = params.dim();
    let p = params.p;
    let s = params.sigma;
    let k = params.drift();
    let l = params.l();
    let mut v = match id {
        CriticalId::P0 => vec![2.0, -(n - 2.0), s + 2.0],
        CriticalId::P1 => vec![(m * n - n + 2.0) / m, n - 2.0, (m * (n + s) - p * (n - 2.0)) / m],
        CriticalId::P3 => {
            let a = -((1.0 - m).powi(2) * n * (s + 2.0) + 2.0 * (m * m - 1.0) * s + 4.0 * (m * p - 1.0))
                / (l * (m - 1.0));
            let prod = 2.0 * (m * n - n + 2.0) / (m - 1.0);
            let disc = a * a - 4.0 * prod;
            if disc < 0.0 {
                return None;
            }
            let r = disc.sqrt();
            vec![(a - r) / 2.0, (a + r) / 2.0, l / (m - 1.0)]
        }
        CriticalId::Q1 => vec![0.0, 0.0, k],
        CriticalId::Q5 => vec![(m - 1.0) * k, -k, (p - 1.0) * k],
        CriticalId::Q1Prime => vec![k, 0.0],
        CriticalId::Q5Prime => vec![-k, (m + p - 2.0) * k],
        _ => return None,
    };
    v.sort_by(f64::total_cmp);
    Some(v)
}

/// Closed-form linearization matrices at the points where one is printed.
pub fn closed_form_matrix(id: CriticalId, params: &Params<f64>) -> Option<Mat3<f64>> {
    let m = params.m;
    let n = params.dim();
    let p = params.p;
    let s = params.sigma;
    let k = params.drift();
    let l = params.l();
    Some(match id {
        CriticalId::P0 => [[2.0, 0.0, 0.0], [1.0, -(n - 2.0), -1.0], [0.0, 0.0, s + 2.0]],
        CriticalId::P1 => {
            let d = (m * (n + s) - p * (n - 2.0)) / m;
            [[(m * n - n + 2.0) / m, 0.0, 0.0], [d / (s + 2.0), n - 2.0, -1.0], [0.0, 0.0, d]]
        }
        CriticalId::P3 => {
            let a = -((1.0 - m).powi(2) * n * (s + 2.0) + 2.0 * (m * m - 1.0) * s + 4.0 * (m * p - 1.0))
                / (l * (m - 1.0));
            [
                [0.0, -2.0 * (s + 2.0) * (m * n - n + 2.0) / l, 0.0],
                [l / ((m - 1.0) * (s + 2.0)), a, -1.0],
                [0.0, 0.0, l / (m - 1.0)],
            ]
        }
        CriticalId::Q1 => [[0.0, 0.0, 0.0], [1.0, k, 0.0], [0.0, 0.0, 0.0]],
        CriticalId::Q5 => [
            [(m - 1.0) * k, 0.0, 0.0],
            [1.0 - n * k, -k, 0.0],
            [0.0, 0.0, (p - 1.0) * k],
        ],
        CriticalId::Q1Prime => [[k, -1.0, 0.0], [0.0, 0.0, 0.0], [0.0; 3]],
        CriticalId::Q5Prime => [[-k, -1.0, 0.0], [0.0, (m + p - 2.0) * k, 0.0], [0.0; 3]],
        _ => return None,
    })
}

/// Catalogue of every critical point with linearization and classification.
pub fn critical_points(params: &Params<f64>) -> Vec<CriticalPointInfo> {
    use CriticalId::*;
    let ids = [P0, P1, P2, P3, Q1, Q2, Q3, Q4, Q5, Qgamma0, Q1Prime, Q5Prime];
    let pc = critical_exponent(params.m, params.n, params.sigma);
    ids.iter()
        .map(|&id| {
            let loc = point_location(id, params);
            let mut info = CriticalPointInfo {
                id,
                coords: loc,
                exists: match id {
                    Q4 => true,
                    P2 => pc.finite().is_some_and(|v| params.p > v),
                    _ => loc.is_some(),
                },
                jacobian: None,
                eigenpairs: Vec::new(),
                kind: None,
                unstable_dim: 0,
                stable_dim: 0,
                center_dim: 0,
                kappa: (id == Qgamma0).then(|| params.kappa()),
                bifurcation: false,
            };
            if let Some(pt) = loc {
                let dim = pt.chart.dim();
                let j = jacobian(pt.chart, &pt.coords, params);
                info.jacobian = Some(j[..dim].iter().map(|r| r[..dim].to_vec()).collect());
                info.eigenpairs = eigenpairs(&j, dim);
                let vals: Vec<Complex64> = info.eigenpairs.iter().map(|e| e.value).collect();
                let (kind, u, st, c) = classify_eigenvalues(&vals, 1e-9);
                info.kind = Some(kind);
                info.unstable_dim = u;
                info.stable_dim = st;
                info.center_dim = c;
            }
            if matches!(id, P1 | P2) {
                if let Some(pc) = pc.finite() {
                    info.bifurcation = (params.p - pc).abs() <= 1e-12 * pc;
                }
            }
            info
        })
        .collect()
}
