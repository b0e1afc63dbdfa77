//! Profiles `f(xi)` rebuilt from phase-space orbits, their ODE residuals,
//! asymptotic fits and the Pohozaev balance.

use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::manifolds::amplitude_of_c;
use crate::params::{derive, exponent_table, fujita_exponent, pohozaev_thresholds, sobolev_exponent, Params};
use crate::phasespace::{vf, Chart};
use serde::Serialize;

/// Where a profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Source {
    P0 { c: f64 },
    Q5 { theta: f64 },
    P3,
    R0,
    Other,
}

#[derive(Debug, Clone, Serialize)]
pub struct Profile {
    pub xi: Vec<f64>,
    pub f: Vec<f64>,
    pub fprime: Vec<f64>,
    pub deadcore_edge: Option<f64>,
    /// `f(0)` for profiles leaving the origin with a positive value.
    pub amplitude: Option<f64>,
    pub params: Params<f64>,
    pub source: Source,
}

impl Profile {
    /// The constant solution `f = (1/(p-1))^(1/(p-1))` on the given grid; needs `sigma = 0`.
    pub fn constant(params: &Params<f64>, xi: Vec<f64>) -> Result<Self> {
        if params.sigma != 0.0 {
            return Err(Error::InvalidParams("the constant profile needs sigma = 0".into()));
        }
        let v = (1.0 / (params.p - 1.0)).powf(1.0 / (params.p - 1.0));
        let n = xi.len();
        Ok(Profile {
            xi,
            f: vec![v; n],
            fprime: vec![0.0; n],
            deadcore_edge: None,
            amplitude: Some(v),
            params: *params,
            source: Source::R0,
        })
    }

    /// Phase-space coordinates at grid point `i`, or `None` where `f = 0`.
    pub fn phase_point(&self, i: usize) -> Option<[f64; 3]> {
        let (xi, f, fp) = (self.xi[i], self.f[i], self.fprime[i]);
        if !(f > 0.0 && xi > 0.0) {
            return None;
        }
        let q = &self.params;
        let alpha = derive(q).ok()?.alpha;
        let m = q.m;
        Some([
            alpha / m * xi * xi * f.powf(1.0 - m),
            xi * fp / f,
            xi.powf(q.sigma + 2.0) * f.powf(q.p - m) / m,
        ])
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Invert the phase-space change of variables sample by sample: every
/// `(X, Y, Z)` with `X, Z > 0` fixes `xi`, `f` and `f'` uniquely.
pub fn reconstruct(traj: &Trajectory, params: &Params<f64>, source: Source) -> Result<Profile> {
    if traj.chart != Chart::Xyz {
        return Err(Error::Profile("reconstruction needs a trajectory stored in (X, Y, Z)".into()));
    }
    let mut xi = Vec::with_capacity(traj.samples.len());
    let mut f = Vec::with_capacity(traj.samples.len());
    let mut fp = Vec::with_capacity(traj.samples.len());
    for smp in &traj.samples {
        let (x_i, f_i, fp_i) = invert(&smp.coords, params)
            .ok_or_else(|| Error::Profile(format!("X or Z not positive at s = {}", smp.s)))?;
        if xi.last().is_some_and(|&prev| x_i <= prev) {
            continue;
        }
        xi.push(x_i);
        f.push(f_i);
        fp.push(fp_i);
    }
    if xi.len() < 2 {
        return Err(Error::Profile("trajectory too short to reconstruct".into()));
    }
    let s = params.sigma;
    let amplitude = match source {
        Source::P0 { c } if s >= 0.0 => amplitude_of_c(c, params).ok(),
        Source::R0 if s == 0.0 => Some(f[0]),
        _ => None,
    };
    let mut prof = Profile {
        xi,
        f,
        fprime: fp,
        deadcore_edge: None,
        amplitude,
        params: *params,
        source,
    };
    let err = round_trip_error(&prof, traj);
    if err > 1e-4 {
        return Err(Error::Profile(format!("round trip failed by {err:e}")));
    }
    if let Source::Q5 { .. } = source {
        let fit = fit_asymptotics(&prof, Law::DeadcoreQ5)?;
        let edge = fit.edge.ok_or_else(|| Error::Profile("dead-core edge not found".into()))?;
        if edge > 0.0 && edge < prof.xi[0] {
            prof.xi.splice(0..0, [0.0, edge]);
            prof.f.splice(0..0, [0.0, 0.0]);
            prof.fprime.splice(0..0, [0.0, 0.0]);
            prof.deadcore_edge = Some(edge);
        }
    }
    Ok(prof)
}

/// `(xi, f, f')` for a point with `X, Z > 0`.
pub fn invert(coords: &[f64; 3], params: &Params<f64>) -> Option<(f64, f64, f64)> {
    let [x, y, z] = *coords;
    if !(x > 0.0 && z > 0.0) {
        return None;
    }
    let d = derive(params).ok()?;
    let (m, p) = (params.m, params.p);
    let a = x.ln() - (d.alpha / m).ln();
    let b = z.ln() + m.ln();
    let xi = ((a * (p - m) + (m - 1.0) * b) / d.l).exp();
    // Z/X = xi^sigma f^(p-1) / alpha
    let f = (d.alpha * (z / x) * xi.powf(-params.sigma)).powf(1.0 / (p - 1.0));
    Some((xi, f, y * f / xi))
}

/// Largest relative mismatch between the trajectory and the phase-space
/// point recomputed from the profile, over samples kept in the profile.
pub fn round_trip_error(profile: &Profile, traj: &Trajectory) -> f64 {
    let mut worst = 0.0f64;
    for smp in &traj.samples {
        let Some((xi, _, _)) = invert(&smp.coords, &profile.params) else { continue };
        let Ok(i) = profile.xi.binary_search_by(|v| v.total_cmp(&xi)) else { continue };
        let Some(q) = profile.phase_point(i) else { continue };
        let [x, y, z] = smp.coords;
        worst = worst.max(rel(q[0], x)).max(rel(q[2], z)).max((q[1] - y).abs() / (1.0 + y.abs()));
    }
    worst
}

/// Finite-difference weights for derivatives `0..=order` at `x0` on the nodes `xs`.
pub fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Relative accuracy assumed for reconstructed values of `f`.
pub const VALUE_NOISE: f64 = 1e-14;
/// Points whose rounding floor exceeds this are reported as unresolved.
pub const NOISE_CUTOFF: f64 = 1e-7;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualPoint {
    pub xi: f64,
    pub residual: f64,
    /// Estimated residual caused by rounding in `f` alone.
    pub noise_floor: f64,
    pub stride: usize,
}

impl ResidualPoint {
    pub fn resolved(&self) -> bool {
        self.noise_floor <= NOISE_CUTOFF
    }
}

/// Pointwise residuals of the profile ODE, written in `t = ln xi` and divided
/// by the largest term at each point. Each 5-point stencil is widened while
/// `f` changes little across it, and must stay where `f > 0`.
pub fn ode_residuals(profile: &Profile, params: &Params<f64>) -> Result<Vec<ResidualPoint>> {
    let d = derive(params)?;
    let (m, p, s) = (params.m, params.p, params.sigma);
    let nd = params.dim();
    let n = profile.len();
    if n < 5 {
        return Err(Error::Profile("need at least 5 grid points".into()));
    }
    let usable = |lo: usize, hi: usize| profile.f[lo..=hi].iter().all(|&v| v > 0.0) && profile.xi[lo] > 0.0;
    let mut out = Vec::new();
    for i in 2..n - 2 {
        if !usable(i - 2, i + 2) {
            continue;
        }
        let eval = |k: usize| {
            let idx: Vec<usize> = (0..5).map(|j| i + j * k - 2 * k).collect();
            let t: Vec<f64> = idx.iter().map(|&j| profile.xi[j].ln()).collect();
            let w = fornberg_weights(t[2], &t, 2);
            let fc = profile.f[i];
            let vc = fc.powf(m);
            // differences about the centre keep constants exactly constant
            let df: Vec<f64> = idx.iter().map(|&j| profile.f[j] - fc).collect();
            let dv: Vec<f64> = idx.iter().map(|&j| profile.f[j].powf(m) - vc).collect();
            let dot = |wk: &[f64], u: &[f64]| wk.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
            let (v_t, v_tt) = (dot(&w[1], &dv), dot(&w[2], &dv));
            let f_t = dot(&w[1], &df);
            let xi = profile.xi[i];
            let terms = [
                v_tt,
                (nd - 2.0) * v_t,
                -d.alpha * xi * xi * fc,
                -d.beta * xi * xi * f_t,
                xi.powf(s + 2.0) * fc.powf(p),
            ];
            let scale = terms.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let r: f64 = terms.iter().sum();
            let abs_sum = |wk: &[f64]| wk.iter().map(|v| v.abs()).sum::<f64>();
            let noise = VALUE_NOISE
                * ((abs_sum(&w[2]) + (nd - 2.0) * abs_sum(&w[1])) * m * vc
                    + d.beta * xi * xi * abs_sum(&w[1]) * fc);
            let (residual, noise_floor) = if scale > 0.0 { (r.abs() / scale, noise / scale) } else { (0.0, 0.0) };
            ResidualPoint { xi, residual, noise_floor, stride: k }
        };
        // widen while rounding dominates and f is nearly flat across the wider stencil
        let mut k = 1;
        let mut pt = eval(k);
        while pt.noise_floor > 1e-2 * NOISE_CUTOFF && k < 64 && i >= 4 * k && i + 4 * k < n && usable(i - 4 * k, i + 4 * k) {
            let (a, b) = (i - 4 * k, i + 4 * k);
            if (profile.f[b] / profile.f[a]).ln().abs() > 0.05 || (profile.xi[b] / profile.xi[a]).ln() > 0.2 {
                break;
            }
            k *= 2;
            pt = eval(k);
        }
        out.push(pt);
    }
    if out.is_empty() {
        return Err(Error::Profile("grid too coarse: no interior stencil with f > 0".into()));
    }
    Ok(out)
}

/// Largest scaled residual of the profile ODE over the resolved interior points.
pub fn ode_residual(profile: &Profile, params: &Params<f64>) -> Result<f64> {
    let pts = ode_residuals(profile, params)?;
    if !pts.iter().any(|r| r.resolved()) {
        return Err(Error::Profile("no grid point is resolved above the rounding floor".into()));
    }
    Ok(pts.iter().filter(|r| r.resolved()).fold(0.0, |a, r| a.max(r.residual)))
}

/// Residual of the stationary equation for the explicit family `U_C` at the
/// Sobolev exponent, on `xi in [0.1, 10]`, relative to the largest term.
pub fn stationary_residual(c: f64, params: &Params<f64>) -> Result<f64> {
    let ps = sobolev_exponent(params.m, params.n, params.sigma)
        .finite()
        .ok_or_else(|| Error::InvalidParams("needs N >= 3".into()))?;
    if (params.p - ps).abs() > 1e-12 * ps {
        return Err(Error::InvalidParams(format!("p must equal the Sobolev exponent {ps}")));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParams("C must be positive".into()));
    }
    let (m, s) = (params.m, params.sigma);
    let nd = params.dim();
    let k = s + 2.0;
    let q = (nd - 2.0) / (2.0 * k);
    let amp = (nd - 2.0) * (nd + s) * c;
    let mut worst = 0.0f64;
    for i in 0..=400 {
        let xi = 0.1 * 100f64.powf(i as f64 / 400.0);
        // W = U^m = amp^q (xi^k + C)^(-2q)
        let g = xi.powf(k) + c;
        let g1 = k * xi.powf(k - 1.0);
        let g2 = k * (k - 1.0) * xi.powf(k - 2.0);
        let w = amp.powf(q) * g.powf(-2.0 * q);
        let w1 = -2.0 * q * w * g1 / g;
        let w2 = -2.0 * q * w * (g2 / g - (2.0 * q + 1.0) * g1 * g1 / (g * g));
        let u = w.powf(1.0 / m);
        let terms = [w2, (nd - 1.0) / xi * w1, xi.powf(s) * u.powf(params.p)];
        let scale = terms.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        worst = worst.max(terms.iter().sum::<f64>().abs() / scale);
    }
    Ok(worst)
}

/// Flux of the invariant-plane system `X = 0` across the curve
/// `Z = -(N+sigma)/(N-2) (mY+N-2) Y`, sampled on `Y in (-(N-2)/m, 0)`.
pub fn curve_flux(params: &Params<f64>, samples: usize) -> Result<Vec<(f64, f64)>> {
    if params.n < 3 {
        return Err(Error::InvalidParams("needs N >= 3".into()));
    }
    let nd = params.dim();
    let (m, s) = (params.m, params.sigma);
    let lo = -(nd - 2.0) / m;
    Ok((1..=samples)
        .map(|i| {
            let y = lo * i as f64 / (samples + 1) as f64;
            let z = -(nd + s) / (nd - 2.0) * (m * y + nd - 2.0) * y;
            let field = vf(Chart::PlaneX0, &[y, z, 0.0], params);
            let normal = [(nd + s) / (nd - 2.0) * (2.0 * m * y + nd - 2.0), 1.0];
            (y, normal[0] * field[0] + normal[1] * field[1])
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Law {
    TailQ1,
    OriginP0,
    OriginP0neg,
    OriginP3,
    DeadcoreQ5,
    TailQgamma,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticFit {
    pub law: Law,
    pub exponent_fit: f64,
    pub prefactor_fit: f64,
    /// Largest relative deviation of the data from the fitted law over the window.
    pub rel_err: f64,
    pub expected_exponent: Option<f64>,
    pub expected_prefactor: Option<f64>,
    /// Dead-core edge from the fit.
    pub edge: Option<f64>,
    pub window: (f64, f64),
    pub points: usize,
}

impl AsymptoticFit {
    pub fn exponent_error(&self) -> Option<f64> {
        self.expected_exponent.map(|e| (self.exponent_fit / e - 1.0).abs())
    }

    pub fn prefactor_error(&self) -> Option<f64> {
        self.expected_prefactor.map(|e| (self.prefactor_fit / e - 1.0).abs())
    }
}

fn quadfit(xs: &[f64], ys: &[f64]) -> Result<[f64; 3]> {
    // centre and scale for conditioning
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let sx = xs.iter().map(|x| (x - mx).abs()).fold(0.0, f64::max).max(1e-300);
    let a = nalgebra::DMatrix::from_fn(xs.len(), 3, |i, j| ((xs[i] - mx) / sx).powi(j as i32));
    let b = nalgebra::DVector::from_column_slice(ys);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numerical(format!("quadratic fit failed: {e}")))?;
    let (q0, q1, q2) = (sol[0], sol[1] / sx, sol[2] / (sx * sx));
    // expand back around zero
    Ok([q0 - q1 * mx + q2 * mx * mx, q1 - 2.0 * q2 * mx, q2])
}

fn linfit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fit one of the local laws. Windows: tails use the points within two
/// decades of the largest `X`, dead cores the points within two decades of
/// the largest `X` at the start, origin laws the first decade in `xi`.
pub fn fit_asymptotics(profile: &Profile, law: Law) -> Result<AsymptoticFit> {
    let q = &profile.params;
    let d = derive(q)?;
    let (m, p, s) = (q.m, q.p, q.sigma);
    let nd = q.dim();
    let pos: Vec<usize> = (0..profile.len()).filter(|&i| profile.f[i] > 0.0 && profile.xi[i] > 0.0).collect();
    if pos.len() < 5 {
        return Err(Error::Profile("window too short".into()));
    }
    let xval = |i: usize| profile.phase_point(i).map(|v| v[0]).unwrap_or(0.0);
    let window: Vec<usize> = match law {
        Law::TailQ1 | Law::TailQgamma => {
            let last = *pos.last().unwrap();
            let xe = xval(last);
            let start = pos.iter().rposition(|&i| xval(i) < xe * 1e-2).map(|k| k + 1).unwrap_or(0);
            pos[start..].to_vec()
        }
        Law::DeadcoreQ5 => {
            let x0 = xval(pos[0]);
            pos.iter().copied().take_while(|&i| xval(i) > x0 * 1e-2).collect()
        }
        _ => {
            let x0 = profile.xi[pos[0]];
            pos.iter().copied().take_while(|&i| profile.xi[i] <= 10.0 * x0).collect()
        }
    };
    if window.len() < 5 {
        return Err(Error::Profile(format!("window too short ({} points)", window.len())));
    }
    let xi: Vec<f64> = window.iter().map(|&i| profile.xi[i]).collect();
    let f: Vec<f64> = window.iter().map(|&i| profile.f[i]).collect();
    let lx: Vec<f64> = xi.iter().map(|v| v.ln()).collect();
    let lf: Vec<f64> = f.iter().map(|v| v.ln()).collect();
    let loglog = || {
        let (e, c) = linfit(&lx, &lf);
        let err = lx.iter().zip(&lf).map(|(x, y)| ((c + e * x - y).exp() - 1.0).abs()).fold(0.0, f64::max);
        (e, c.exp(), err)
    };
    let mut fit = AsymptoticFit {
        law,
        exponent_fit: 0.0,
        prefactor_fit: 0.0,
        rel_err: 0.0,
        expected_exponent: None,
        expected_prefactor: None,
        edge: None,
        window: (xi[0], *xi.last().unwrap()),
        points: xi.len(),
    };
    match law {
        Law::TailQ1 => {
            let (e, c, err) = loglog();
            fit.exponent_fit = e;
            fit.prefactor_fit = c;
            fit.rel_err = err;
            fit.expected_exponent = Some(-(s + 2.0) / (p - m));
        }
        Law::TailQgamma => {
            let (e, c, err) = loglog();
            fit.exponent_fit = e;
            fit.prefactor_fit = c;
            fit.rel_err = err;
            fit.expected_exponent = Some(-s / (p - 1.0));
            fit.expected_prefactor = Some((1.0 / (p - 1.0)).powf(1.0 / (p - 1.0)));
        }
        Law::OriginP3 => {
            let (e, c, err) = loglog();
            fit.exponent_fit = e;
            fit.prefactor_fit = c;
            fit.rel_err = err;
            fit.expected_exponent = Some(2.0 / (m - 1.0));
            fit.expected_prefactor =
                Some(((m - 1.0) / (2.0 * m * (m * nd - nd + 2.0))).powf(1.0 / (m - 1.0)));
        }
        Law::OriginP0 => {
            // f^(m-1) = I + slope xi^2 + c xi^(sigma+2); the last term is fixed by I
            let u: Vec<f64> = f.iter().map(|v| v.powf(m - 1.0)).collect();
            let x2: Vec<f64> = xi.iter().map(|v| v * v).collect();
            let reaction = |icpt: f64| {
                -(m - 1.0) / m * icpt.powf((p - 1.0) / (m - 1.0)) / ((s + 2.0) * (nd + s))
            };
            let (mut slope, mut icpt) = linfit(&x2, &u);
            if s > 0.0 {
                for _ in 0..4 {
                    let c = reaction(icpt);
                    let adj: Vec<f64> = xi.iter().zip(&u).map(|(x, v)| v - c * x.powf(s + 2.0)).collect();
                    (slope, icpt) = linfit(&x2, &adj);
                }
            }
            let c = if s > 0.0 { reaction(icpt) } else { 0.0 };
            fit.exponent_fit = 2.0;
            fit.prefactor_fit = slope;
            fit.rel_err = xi
                .iter()
                .zip(&u)
                .map(|(x, y)| rel(icpt + slope * x * x + c * x.powf(s + 2.0), *y))
                .fold(0.0, f64::max);
            fit.expected_prefactor = Some(if s > 0.0 {
                d.alpha * (m - 1.0) / (2.0 * m * nd)
            } else {
                let f0 = icpt.powf(1.0 / (m - 1.0));
                (m - 1.0) * (d.alpha - f0.powf(p - 1.0)) / (2.0 * m * nd)
            });
            fit.expected_exponent = Some(2.0);
        }
        Law::OriginP0neg => {
            // f^-(p-m) = K + slope xi^(sigma+2)
            let u: Vec<f64> = f.iter().map(|v| v.powf(-(p - m))).collect();
            let xs: Vec<f64> = xi.iter().map(|v| v.powf(s + 2.0)).collect();
            let (slope, icpt) = linfit(&xs, &u);
            fit.exponent_fit = s + 2.0;
            fit.prefactor_fit = slope;
            fit.rel_err = xs.iter().zip(&u).map(|(x, y)| rel(icpt + slope * x, *y)).fold(0.0, f64::max);
            fit.expected_exponent = Some(s + 2.0);
            fit.expected_prefactor = Some((p - m) / (m * (nd + s) * (s + 2.0)));
        }
        Law::DeadcoreQ5 => {
            // f^(m-1) = A (xi^2 - xi0^2) + O((xi^2 - xi0^2)^2), fitted as a quadratic in xi^2
            let u: Vec<f64> = f.iter().map(|v| v.powf(m - 1.0)).collect();
            let w: Vec<f64> = xi.iter().map(|v| v * v).collect();
            let [c0, c1, c2] = quadfit(&w, &u)?;
            let disc = c1 * c1 - 4.0 * c2 * c0;
            let roots = if c2.abs() < 1e-300 || disc < 0.0 {
                vec![-c0 / c1]
            } else {
                let sq = disc.sqrt();
                vec![(-c1 + sq) / (2.0 * c2), (-c1 - sq) / (2.0 * c2)]
            };
            let e2 = roots
                .into_iter()
                .filter(|r| r.is_finite() && *r <= w[0])
                .min_by(|a, b| (w[0] - a).total_cmp(&(w[0] - b)))
                .ok_or_else(|| Error::Profile("no dead-core edge below the first point".into()))?;
            let a = c1 + 2.0 * c2 * e2;
            fit.edge = (e2 > 0.0).then(|| e2.sqrt());
            fit.exponent_fit = 1.0 / (m - 1.0);
            fit.prefactor_fit = a;
            fit.rel_err = w.iter().zip(&u).map(|(x, y)| rel(c0 + c1 * x + c2 * x * x, *y)).fold(0.0, f64::max);
            fit.expected_exponent = Some(1.0 / (m - 1.0));
            fit.expected_prefactor = Some(d.beta * (m - 1.0) / (2.0 * m));
        }
    }
    Ok(fit)
}

/// Flux `(f^m)'` at the dead-core edge relative to its largest value, by
/// extrapolating the flux on the first points linearly in `f^(m-1)`.
pub fn edge_flux(profile: &Profile) -> Result<f64> {
    let edge = profile.deadcore_edge.ok_or_else(|| Error::Profile("profile has no dead core".into()))?;
    let m = profile.params.m;
    let pos: Vec<usize> = (0..profile.len()).filter(|&i| profile.f[i] > 0.0 && profile.xi[i] > edge).collect();
    let flux = |i: usize| m * profile.f[i].powf(m - 1.0) * profile.fprime[i];
    let fmax = pos.iter().map(|&i| flux(i).abs()).fold(0.0, f64::max);
    let head: Vec<usize> = pos.iter().copied().take(6).collect();
    if head.len() < 3 || fmax == 0.0 {
        return Err(Error::Profile("too few points past the dead-core edge".into()));
    }
    let u: Vec<f64> = head.iter().map(|&i| profile.f[i].powf(m - 1.0)).collect();
    let g: Vec<f64> = head.iter().map(|&i| flux(i)).collect();
    let (_, at_edge) = linfit(&u, &g);
    Ok(at_edge.abs() / fmax)
}

#[derive(Debug, Clone, Serialize)]
pub struct PohozaevReport {
    /// Gradient term.
    pub t1: f64,
    /// Weighted radial term.
    pub t2: f64,
    /// Term carrying `Q`.
    pub t3: f64,
    pub q_value: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub converged: bool,
    pub per_unit_solid_angle: bool,
    /// Share of each integral supplied by the closed-form tail completion.
    pub tail_completion: [f64; 3],
}

/// `Q(m, N, p, sigma)` of the Pohozaev identity.
pub fn pohozaev_q(params: &Params<f64>) -> f64 {
    let (m, p, s) = (params.m, params.p, params.sigma);
    let n = params.dim();
    (m + 1.0) * s * s + (m + 1.0) * (n + 2.0) * s + n * (m * n + 2.0) - n * (n + 2.0 * s + 2.0) * p
}

/// Composite Simpson rule on a non-uniform grid.
pub fn simpson(t: &[f64], g: &[f64]) -> f64 {
    let n = t.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (t[1] - t[0]) * (g[0] + g[1]);
    }
    let pair = |i: usize| {
        let (h0, h1) = (t[i + 1] - t[i], t[i + 2] - t[i + 1]);
        let hs = h0 + h1;
        hs / 6.0
            * (g[i] * (2.0 - h1 / h0) + g[i + 1] * hs * hs / (h0 * h1) + g[i + 2] * (2.0 - h0 / h1))
    };
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < n {
        total += pair(i);
        i += 2;
    }
    if i + 1 < n {
        // last interval: Gauss-Legendre on the quadratic through the final three points
        let (a, b, c) = (t[n - 3], t[n - 2], t[n - 1]);
        let quad = |x: f64| {
            g[n - 3] * (x - b) * (x - c) / ((a - b) * (a - c))
                + g[n - 2] * (x - a) * (x - c) / ((b - a) * (b - c))
                + g[n - 1] * (x - a) * (x - b) / ((c - a) * (c - b))
        };
        let (mid, half) = (0.5 * (b + c), 0.5 * (c - b));
        let r = (0.6f64).sqrt();
        total += half * (5.0 * quad(mid - r * half) + 8.0 * quad(mid) + 5.0 * quad(mid + r * half)) / 9.0;
    }
    total
}

/// Evaluate the three terms of the Pohozaev identity per unit solid angle.
pub fn pohozaev(profile: &Profile, params: &Params<f64>) -> Result<PohozaevReport> {
    let d = derive(params)?;
    let (m, p, s) = (params.m, params.p, params.sigma);
    let n = params.dim();
    let qv = pohozaev_q(params);
    let c1 = (m * (n + 2.0 * s + 2.0) - p * (n - 2.0)) / (2.0 * (m + p));
    let c2 = d.beta / m;
    let c3 = m * qv / ((m + 1.0) * (m + p) * d.l);
    let converged = (m + 1.0) * (s + 2.0) / (p - m) > n;
    let pos: Vec<usize> = (0..profile.len()).filter(|&i| profile.f[i] > 0.0 && profile.xi[i] > 0.0).collect();
    if pos.len() < 5 {
        return Err(Error::Profile("profile too short for quadrature".into()));
    }
    let t: Vec<f64> = pos.iter().map(|&i| profile.xi[i].ln()).collect();
    // integrands times xi^N, integrated in t = ln xi
    let integrands: [Vec<f64>; 3] = [
        pos.iter()
            .map(|&i| {
                let (x, f, fp) = (profile.xi[i], profile.f[i], profile.fprime[i]);
                (m * f.powf(m - 1.0) * fp).powi(2) * x.powf(n)
            })
            .collect(),
        pos.iter()
            .map(|&i| {
                let (x, f, fp) = (profile.xi[i], profile.f[i], profile.fprime[i]);
                m * m * f.powf(m - 1.0) * (x * fp).powi(2) * x.powf(n)
            })
            .collect(),
        pos.iter().map(|&i| profile.f[i].powf(m + 1.0) * profile.xi[i].powf(n)).collect(),
    ];
    let mut ints = [0.0; 3];
    let mut completion = [0.0; 3];
    let tail_slope = fit_asymptotics(profile, Law::TailQ1).map(|f| f.exponent_fit).ok();
    for k in 0..3 {
        let g = &integrands[k];
        let body = simpson(&t, g);
        // power-law completion past the last point: g ~ xi^e with e < 0 in t
        let mut tail = 0.0;
        if let Some(sl) = tail_slope {
            let e = match k {
                0 => 2.0 * (m * sl - 1.0) + n,
                1 => (m + 1.0) * sl + n,
                _ => (m + 1.0) * sl + n,
            };
            if e < 0.0 {
                tail = -g[g.len() - 1] / e;
            }
        }
        // the piece between the origin (or the dead-core edge) and the first point
        let mut head = 0.0;
        if profile.deadcore_edge.is_none() && g[0] > 0.0 && g[1] > 0.0 {
            let e = (g[1] / g[0]).ln() / (t[1] - t[0]);
            if e > 0.0 {
                head = g[0] / e;
            }
        }
        ints[k] = body + tail + head;
        completion[k] = tail / ints[k];
    }
    let (t1, t2, t3) = (c1 * ints[0], c2 * ints[1], c3 * ints[2]);
    let residual = t1 + t2 + t3;
    let big = t1.abs().max(t2.abs()).max(t3.abs());
    Ok(PohozaevReport {
        t1,
        t2,
        t3,
        q_value: qv,
        residual,
        relative_residual: residual.abs() / big,
        converged,
        per_unit_solid_angle: true,
        tail_completion: completion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    PohozaevRange,
    BarrierRange,
    Combined,
    None,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NonexistenceVerdict {
    pub verdict: bool,
    pub criterion: Criterion,
    pub pohozaev_range: bool,
    pub barrier_range: bool,
}

/// Whether the parameters fall in the proven non-existence range for `sigma > 0`.
pub fn nonexistence_predicate(params: &Params<f64>) -> Result<NonexistenceVerdict> {
    if !(params.sigma > 0.0) {
        return Err(Error::InvalidParams("non-existence predicate needs sigma > 0".into()));
    }
    let tab = exponent_table(params);
    let th = pohozaev_thresholds(params);
    let (m, p, s) = (params.m, params.p, params.sigma);
    let combined = s >= tab.sigma_star && p > m && tab.p_s.exceeds(p);
    let pohozaev_range = s > tab.sigma_lower && p <= th.p1_poh;
    let barrier_floor = fujita_exponent(m, params.n, s).max(th.p2_barrier.unwrap_or(f64::INFINITY));
    let barrier_range = p > barrier_floor;
    let criterion = if combined {
        Criterion::Combined
    } else if pohozaev_range {
        Criterion::PohozaevRange
    } else if barrier_range {
        Criterion::BarrierRange
    } else {
        Criterion::None
    };
    Ok(NonexistenceVerdict { verdict: combined, criterion, pohozaev_range, barrier_range })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_matches_central_weights() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w[2].iter().zip(d2) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((w[1][0] - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_exact_on_quadratics() {
        let t = [0.0, 0.3, 0.5, 1.1, 1.2, 2.0];
        let g: Vec<f64> = t.iter().map(|x| 3.0 * x * x - 2.0 * x + 1.0).collect();
        let exact = 8.0 - 4.0 + 2.0;
        assert!((simpson(&t, &g) - exact).abs() < 1e-12, "{}", simpson(&t, &g));
        let t = [0.0, 0.3, 0.5, 1.1, 1.2];
        let g: Vec<f64> = t.iter().map(|x| x * x).collect();
        assert!((simpson(&t, &g) - 1.2f64.powi(3) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn q_by_hand() {
        let q = Params::new(2.0, 5, 2.1, 0.1).unwrap();
        assert!((pohozaev_q(&q) + 13.47).abs() < 1e-10);
        let q = Params::new(2.0, 5, 3.0, 12.0).unwrap();
        let th = pohozaev_thresholds(&q);
        assert!(pohozaev_q(&q.with_p(th.p1_poh).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn constant_profile_is_exact() {
        let q = Params::new(2.0, 5, 2.1, 0.0).unwrap();
        let xi: Vec<f64> = (0..200).map(|i| 1e-3 * 1.05f64.powi(i)).collect();
        let prof = Profile::constant(&q, xi).unwrap();
        assert!((prof.f[0] - 0.917_01).abs() < 1e-5);
        assert!(ode_residual(&prof, &q).unwrap() < 1e-12);
    }

    #[test]
    fn perturbed_constant_fails() {
        let q = Params::new(2.0, 5, 2.1, 0.0).unwrap();
        let xi: Vec<f64> = (0..200).map(|i| 1e-3 * 1.05f64.powi(i)).collect();
        let mut prof = Profile::constant(&q, xi).unwrap();
        prof.f.iter_mut().for_each(|v| *v *= 1.01);
        assert!(ode_residual(&prof, &q).unwrap() > 1e-3);
    }

    #[test]
    fn sobolev_family() {
        let q = Params::new(2.0, 5, 14.0 / 3.0, 0.0).unwrap();
        assert!(stationary_residual(1.0, &q).unwrap() < 1e-8);
        assert!(stationary_residual(1.0, &q.with_p(4.0).unwrap()).is_err());
        for (_, h) in curve_flux(&q, 50).unwrap() {
            assert!(h.abs() < 1e-12, "{h}");
        }
        let below = q.with_p(14.0 / 3.0 - 0.1).unwrap();
        assert!(curve_flux(&below, 50).unwrap().iter().all(|&(_, h)| h > 0.0));
    }

    #[test]
    fn nonexistence_examples() {
        let v = nonexistence_predicate(&Params::new(2.0, 5, 3.0, 12.0).unwrap()).unwrap();
        assert!(v.verdict && v.criterion == Criterion::Combined);
        let v = nonexistence_predicate(&Params::new(2.0, 5, 2.1, 0.1).unwrap()).unwrap();
        assert!(!v.verdict && v.criterion == Criterion::None);
        let v = nonexistence_predicate(&Params::new(2.0, 3, 2.5, 8.0).unwrap()).unwrap();
        assert!(v.verdict);
    }
}
