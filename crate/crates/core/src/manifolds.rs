//! Seeds on the invariant manifolds the shooting families start from.

use crate::error::{Error, Result};
use crate::integrate::{integrate, Controls, Direction, EventSet, Sample, StopReason, Trajectory};
use crate::params::{derive, Params};
use crate::phasespace::{eigenpairs, jacobian, point_location, Chart, ChartPoint, CriticalId};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeedOrder {
    First,
    Second,
}

/// A starting point on an unstable manifold together with its family parameter.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Seed {
    pub origin: CriticalId,
    /// `C` for the origin family, signed offset for the `P3` orbit, angle for `Q5`.
    pub parameter: f64,
    pub epsilon: f64,
    pub chart: Chart,
    pub point: ChartPoint<f64>,
    pub order: SeedOrder,
}

/// Quadratic coefficients of the unstable manifold of the origin written as
/// `Z = (N+sigma)(X/N - Y) + a X^2 + b X Y + c Y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManifoldExpansion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub const DEFAULT_EPS_P0: f64 = 1e-5;
pub const DEFAULT_EPS_P3: f64 = 1e-5;
pub const DEFAULT_EPS_Q5: f64 = 1e-4;

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1e-2 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("epsilon must lie in (0, 1e-2], got {eps}")))
    }
}

/// Coefficients solving the invariance equation of the unstable manifold of
/// the origin up to second order.
pub fn expansion_coefficients(params: &Params<f64>) -> ManifoldExpansion {
    let n = params.dim();
    let (p, s) = (params.p, params.sigma);
    let shape = expansion_shape(params);
    let den = (s + 2.0) * (n + s + 2.0) * (n + 2.0 * s + 2.0);
    ManifoldExpansion {
        a: -s * (n + s) * shape / (n * n * (n + 2.0) * den),
        b: -(n + s) * shape / (n * den),
        c: -(n + s) * p / (n + 2.0 * s + 2.0),
    }
}

/// The factor `A` shared by `a` and `b`:
/// `-(N^2+3N sigma+4N+2 sigma+4)(p - p_F) - (N+2)(sigma+2)(mN+sigma+2)/N`.
pub fn expansion_shape(params: &Params<f64>) -> f64 {
    let n = params.dim();
    let (m, p, s) = (params.m, params.p, params.sigma);
    let pf = m + (s + 2.0) / n;
    -(n * n + 3.0 * n * s + 4.0 * n + 2.0 * s + 4.0) * (p - pf)
        - (n + 2.0) * (s + 2.0) * (n * m + s + 2.0) / n
}

/// Point of the origin family `l_C` at `X = epsilon`.
pub fn seed_p0(c: f64, eps: f64, params: &Params<f64>, order: SeedOrder) -> Result<Seed> {
    check_eps(eps)?;
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParams(format!("C must be finite and non-negative, got {c}")));
    }
    let n = params.dim();
    let s = params.sigma;
    let x = eps;
    let z = c * eps.powf(0.5 * (s + 2.0));
    let mut y = x / n - z / (n + s);
    if order == SeedOrder::Second {
        let e = expansion_coefficients(params);
        // Newton on Z = (N+s)(X/N - Y) + aX^2 + bXY + cY^2
        for _ in 0..4 {
            let g = (n + s) * (x / n - y) + e.a * x * x + e.b * x * y + e.c * y * y - z;
            let dg = -(n + s) + e.b * x + 2.0 * e.c * y;
            y -= g / dg;
        }
    }
    Ok(Seed {
        origin: CriticalId::P0,
        parameter: c,
        epsilon: eps,
        chart: Chart::Xyz,
        point: ChartPoint::xyz(x, y, z),
        order,
    })
}

/// The limit orbit `l_infinity` inside the plane `X = 0`, seeded at `Z = epsilon`.
pub fn seed_p0_infinite(eps: f64, params: &Params<f64>) -> Result<Seed> {
    check_eps(eps)?;
    let ns = params.dim() + params.sigma;
    Ok(Seed {
        origin: CriticalId::P0,
        parameter: f64::INFINITY,
        epsilon: eps,
        chart: Chart::Xyz,
        point: ChartPoint::xyz(0.0, -eps / ns, eps),
        order: SeedOrder::First,
    })
}

/// Profile amplitude `f(0)` reached by `l_C` as the seed distance shrinks.
pub fn amplitude_of_c(c: f64, params: &Params<f64>) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidParams(format!("C must be positive, got {c}")));
    }
    if params.sigma < 0.0 {
        return Err(Error::InvalidParams("amplitude map needs sigma >= 0".into()));
    }
    let d = derive(params)?;
    let m = params.m;
    let base = c * m * (d.alpha / m).powf(0.5 * (params.sigma + 2.0));
    Ok(base.powf(2.0 / params.l()))
}

/// Inverse of [`amplitude_of_c`].
pub fn c_of_amplitude(amplitude: f64, params: &Params<f64>) -> Result<f64> {
    if !(amplitude > 0.0) {
        return Err(Error::InvalidParams(format!("amplitude must be positive, got {amplitude}")));
    }
    let d = derive(params)?;
    let m = params.m;
    Ok(amplitude.powf(0.5 * params.l()) / (m * (d.alpha / m).powf(0.5 * (params.sigma + 2.0))))
}

/// Start of the unique unstable orbit of `P3`, displaced toward `Z > 0`.
pub fn seed_p3(eps: f64, params: &Params<f64>) -> Result<Seed> {
    check_eps(eps)?;
    let p3 = point_location(CriticalId::P3, params).expect("P3 always exists");
    let jac = jacobian(Chart::Xyz, &p3.coords, params);
    let target = params.l() / (params.m - 1.0);
    let pair = eigenpairs(&jac, 3)
        .into_iter()
        .min_by(|a, b| (a.value.re - target).abs().total_cmp(&(b.value.re - target).abs()))
        .ok_or_else(|| Error::Numerical("no eigenpairs at P3".into()))?;
    if (pair.value.re - target).abs() > 1e-8 * target.max(1.0) || pair.value.im.abs() > 1e-8 {
        return Err(Error::Numerical("unstable eigenvalue at P3 not found".into()));
    }
    let mut v: [f64; 3] = std::array::from_fn(|i| pair.vector.get(i).map_or(0.0, |c| c.re));
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(norm > 0.0) || v[2].abs() < 1e-12 * norm {
        return Err(Error::Numerical("degenerate unstable eigenvector at P3".into()));
    }
    let sgn = v[2].signum() / norm;
    v.iter_mut().for_each(|c| *c *= sgn);
    let coords = std::array::from_fn(|i| p3.coords[i] + eps * v[i]);
    Ok(Seed {
        origin: CriticalId::P3,
        parameter: eps,
        epsilon: eps,
        chart: Chart::Xyz,
        point: ChartPoint::new(Chart::Xyz, coords),
        order: SeedOrder::First,
    })
}

/// Unit eigenvectors spanning the unstable plane at `Q5` in the `X` projection,
/// each with its largest component positive.
pub fn q5_unstable_basis(params: &Params<f64>) -> ([f64; 3], [f64; 3]) {
    let n = params.dim();
    let (m, p, s) = (params.m, params.p, params.sigma);
    let slope = (s + 2.0 - n * (p - m)) / (m * (p - m));
    let norm = (1.0 + slope * slope).sqrt();
    let mut e1 = [1.0 / norm, slope / norm, 0.0];
    if slope.abs() > 1.0 && slope < 0.0 {
        e1 = [-e1[0], -e1[1], 0.0];
    }
    (e1, [0.0, 0.0, 1.0])
}

/// Seed on the unstable manifold of `Q5` mixing the two unstable directions by `theta`.
pub fn seed_q5(theta: f64, eps: f64, params: &Params<f64>) -> Result<Seed> {
    check_eps(eps)?;
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParams(format!("theta must lie in (0, pi/2), got {theta}")));
    }
    let (mut e1, e3) = q5_unstable_basis(params);
    // orient along increasing x so the seed stays admissible
    if e1[0] < 0.0 {
        e1 = [-e1[0], -e1[1], 0.0];
    }
    let k = params.drift();
    let (c, s) = (theta.cos(), theta.sin());
    let coords = [eps * c * e1[0], k + eps * c * e1[1], eps * s * e3[2]];
    Ok(Seed {
        origin: CriticalId::Q5,
        parameter: theta,
        epsilon: eps,
        chart: Chart::XProj,
        point: ChartPoint::new(Chart::XProj, coords),
        order: SeedOrder::First,
    })
}

/// Second-order coefficient of `x^2` in the centre manifold of `Q1`.
pub fn q1_center_coef(params: &Params<f64>) -> f64 {
    let n = params.dim();
    let (m, p, s) = (params.m, params.p, params.sigma);
    (s + 2.0) * (m * (n + s) - p * (n - 2.0)) / ((p - m) * (p - m))
}

/// `y` on the centre manifold of `Q1` in the `X` projection, to second order.
pub fn q1_center_y(x: f64, z: f64, params: &Params<f64>) -> f64 {
    (-x + q1_center_coef(params) * x * x + x * z) / params.drift()
}

/// Where the backward continuation of `r_0` ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum R0Origin {
    P0,
    P1,
    Undetermined,
}

/// Numeric image of the orbit `r_0` entering `Q_gamma0`.
#[derive(Debug, Clone, Serialize)]
pub struct R0Curve {
    /// `(X, Y, Z)` samples sorted by increasing `eta`.
    pub trajectory: Trajectory,
    pub origin: R0Origin,
    /// `Z / X^((sigma+2)/2)` at the small end when the orbit leaves the origin.
    pub c_estimate: Option<f64>,
    /// `|Z/X - kappa|` at the large end.
    pub tail_defect: f64,
    pub exact: bool,
}

/// Largest `X` used when seeding `r_0` backward from infinity.
pub const R0_X_SEED: f64 = 1e8;

/// Trace `r_0`. At `sigma = 0` this is the exact line `{Y = 0, X = Z}`; for
/// `sigma > 0` the orbit is integrated backward from a seed next to
/// `Q_gamma0`, a direction in which the orbit attracts its neighbours.
pub fn trace_r0(params: &Params<f64>, tolerance: f64) -> Result<R0Curve> {
    if params.sigma < 0.0 {
        return Err(Error::InvalidParams("r_0 is traced for sigma >= 0 only".into()));
    }
    let kappa = params.kappa();
    if params.sigma == 0.0 {
        let eps = 1e-8f64;
        let top = R0_X_SEED;
        let s_top = 0.5 * (top / eps).ln();
        let n = 400;
        let samples = (0..=n)
            .map(|i| {
                let s = s_top * i as f64 / n as f64;
                let x = eps * (2.0 * s).exp();
                Sample { s, coords: [x, 0.0, x] }
            })
            .collect();
        let trajectory = Trajectory {
            chart: Chart::Xyz,
            samples,
            events: vec![],
            stop: StopReason::Radius,
            steps: 0,
        };
        return Ok(R0Curve {
            trajectory,
            origin: R0Origin::P0,
            c_estimate: Some(1.0),
            tail_defect: 0.0,
            exact: true,
        });
    }
    let xs = 1.0 / R0_X_SEED;
    let start = ChartPoint::new(Chart::XProj, [xs, q1_center_y(xs, kappa, params), kappa]);
    let controls = Controls {
        direction: Direction::Backward,
        radius_max: 1e12,
        s_max: 400.0,
        chart_switch: Some(100.0),
        stop_on_no_return: false,
        y_floor_factor: 1e6,
        ..Default::default()
    };
    let events = EventSet { x_level: Some(1e-9), ..Default::default() };
    let trajectory = integrate(&start, params, &controls, &events)?;
    let first = trajectory.samples[0].coords;
    let last = trajectory.last().coords;
    let tail_defect = (last[2] / last[0] - kappa).abs();
    let p1y = -(params.dim() - 2.0) / params.m;
    let (origin, c_estimate) = if first[0] > 1e-6 {
        (R0Origin::Undetermined, None)
    } else if first[1].abs() < 1e-3 && first[2] < 1e-3 {
        (R0Origin::P0, Some(first[2] / first[0].powf(0.5 * (params.sigma + 2.0))))
    } else if (first[1] - p1y).abs() < 1e-3 && first[2] < 1e-3 {
        (R0Origin::P1, None)
    } else {
        (R0Origin::Undetermined, None)
    };
    if tail_defect > tolerance {
        return Err(Error::R0NotFound(format!(
            "tail |Z/X - kappa| = {tail_defect:e} exceeds {tolerance:e}"
        )));
    }
    Ok(R0Curve { trajectory, origin, c_estimate, tail_defect, exact: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::vf;

    fn prm(m: f64, n: u32, p: f64, s: f64) -> Params<f64> {
        Params::new(m, n, p, s).unwrap()
    }

    #[test]
    fn origin_seeds_by_hand() {
        let q = prm(2.0, 5, 2.1, 0.0);
        let s = seed_p0(1.0, 1e-4, &q, SeedOrder::First).unwrap();
        assert_eq!(s.point.coords, [1e-4, 0.0, 1e-4]);
        let s = seed_p0(2.0, 1e-4, &q, SeedOrder::First).unwrap();
        assert!((s.point.coords[1] + 2e-5).abs() < 1e-18);
        let s = seed_p0(0.0, 1e-4, &q, SeedOrder::First).unwrap();
        assert_eq!(s.point.coords[2], 0.0);
        assert!((s.point.coords[1] - 2e-5).abs() < 1e-18);
        assert!(seed_p0(1.0, 0.1, &q, SeedOrder::First).is_err());
        assert!(seed_p0(-1.0, 1e-4, &q, SeedOrder::First).is_err());
    }

    #[test]
    fn expansion_solves_invariance() {
        // defect of Z' - grad h . (X', Y') is cubic in the distance
        let q = prm(2.0, 5, 2.1, 0.3);
        let e = expansion_coefficients(&q);
        let n = q.dim() + q.sigma;
        let h = |x: f64, y: f64| n * (x / q.dim() - y) + e.a * x * x + e.b * x * y + e.c * y * y;
        let defect = |r: f64| {
            let (x, y) = (r, -0.3 * r);
            let f = vf(Chart::Xyz, &[x, y, h(x, y)], &q);
            let hx = n / q.dim() + 2.0 * e.a * x + e.b * y;
            let hy = -n + e.b * x + 2.0 * e.c * y;
            (f[2] - hx * f[0] - hy * f[1]).abs()
        };
        let ratio = defect(1e-2) / defect(5e-3);
        assert!((ratio - 8.0).abs() < 0.5, "ratio {ratio}");
        assert!((e.c + 5.3 * 2.1 / 7.6).abs() < 1e-14);
        assert!((e.a / e.b - 0.3 / 35.0).abs() < 1e-14);
    }

    #[test]
    fn amplitude_map() {
        let q = prm(2.0, 5, 2.1, 0.0);
        assert!((amplitude_of_c(1.1, &q).unwrap() - 1.0).abs() < 1e-14);
        let q = prm(2.0, 5, 2.1, 0.1);
        let d = amplitude_of_c(0.7, &q).unwrap();
        assert!((c_of_amplitude(d, &q).unwrap() - 0.7).abs() < 1e-13);
        assert!(amplitude_of_c(1e-12, &q).unwrap() < 1e-9);
    }

    #[test]
    fn p3_seed_orientation() {
        let q = prm(2.0, 5, 2.1, 0.1);
        let s = seed_p3(1e-5, &q).unwrap();
        assert!(s.point.coords[2] > 0.0);
        assert!(vf(Chart::Xyz, &s.point.coords, &q)[2] > 0.0);
    }

    #[test]
    fn q5_seed_limits() {
        let q = prm(2.0, 5, 2.1, 0.1);
        let k = q.drift();
        let s = seed_q5(std::f64::consts::FRAC_PI_2 - 1e-12, 1e-4, &q).unwrap();
        assert!(s.point.coords[0].abs() < 1e-15 && (s.point.coords[1] - k).abs() < 1e-15);
        let s = seed_q5(1e-12, 1e-4, &q).unwrap();
        assert!(s.point.coords[2] < 1e-15);
        assert!(s.point.coords[0] > 0.0);
        assert!(seed_q5(0.0, 1e-4, &q).is_err());
    }

    #[test]
    fn q1_center_manifold() {
        let q = prm(2.0, 5, 2.1, 0.0);
        assert_eq!(q1_center_y(0.0, 0.3, &q), 0.0);
        let r = q1_center_y(1e-9, 0.0, &q) / 1e-9;
        assert!((r + q.tail_decay()).abs() < 1e-3, "{r}");
    }

    #[test]
    fn r0_exact_at_zero_sigma() {
        let q = prm(2.0, 5, 2.1, 0.0);
        let r = trace_r0(&q, 1e-6).unwrap();
        for s in &r.trajectory.samples {
            assert!(s.coords[1].abs() < 1e-12);
            assert!((s.coords[0] - s.coords[2]).abs() <= 1e-10 * s.coords[0]);
        }
    }

    #[test]
    fn r0_positive_sigma_stems_from_p1() {
        let q = prm(2.0, 5, 2.1, 0.1);
        let r = trace_r0(&q, 1e-3).unwrap();
        assert_eq!(r.origin, R0Origin::P1);
        assert!(r.tail_defect < 1e-3);
    }
}
