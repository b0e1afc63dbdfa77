//! Terminal classification, oscillation counting, the surface `S` and the
//! barrier flow expressions.

use crate::error::{Error, Result};
use crate::integrate::{EventKind, StopReason, SurfaceFn, Trajectory};
use crate::manifolds::R0Curve;
use crate::params::{critical_exponent, fujita_exponent, sobolev_exponent, Params};
use crate::phasespace::Chart;
use serde::Serialize;
use std::sync::Arc;

/// Thresholds used when deciding fates and sides.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AnalyzeConfig {
    pub fate_tol: f64,
    pub x_big: f64,
    /// Relative band `band_tol (1 + |Y|)` reported as lying on `S`.
    pub band_tol: f64,
    /// `|dY/d eta|` below which a crossing counts as tangential.
    pub tangency_tol: f64,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig { fate_tol: 1e-3, x_big: 1e3, band_tol: 1e-6, tangency_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Fate {
    Q1Connection,
    Q3CompactSupport,
    Qgamma0,
    Unresolved,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evidence {
    pub final_coords: [f64; 3],
    pub final_y: f64,
    pub z_over_x: f64,
    pub x_max: f64,
    pub crossings: usize,
    pub no_return: bool,
    pub stop: StopReason,
    /// `Z` and `|Y|` growing without bound relative to `X` (would-be `Q4`).
    pub anomaly: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TerminalInfo {
    pub fate: Fate,
    pub evidence: Evidence,
}

/// Decide where a finite-chart trajectory ends.
pub fn classify_terminal(traj: &Trajectory, params: &Params<f64>, cfg: &AnalyzeConfig) -> TerminalInfo {
    let last = traj.last().coords;
    let plane = params.no_return_level();
    let kappa = params.kappa();
    let finite = traj.chart == Chart::Xyz;
    let (x, y, z) = if finite { (last[0], last[1], last[2]) } else { (f64::NAN, f64::NAN, f64::NAN) };
    let zx = z / x;
    let x_max = if finite {
        traj.samples.iter().map(|s| s.coords[0]).fold(0.0, f64::max)
    } else {
        f64::NAN
    };
    let no_return = traj.has_event(EventKind::NoReturnCross);
    let crossings = traj
        .events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::YZeroUp | EventKind::YZeroDown))
        .count();
    let anomaly = finite && x > 0.0 && zx > 1e6 * kappa.max(1.0) && y.abs() > 1e6 * x;
    let evidence = Evidence {
        final_coords: last,
        final_y: y,
        z_over_x: zx,
        x_max,
        crossings,
        no_return,
        stop: traj.stop,
        anomaly,
    };
    let fate = if !finite {
        Fate::Unresolved
    } else if no_return || traj.stop == StopReason::NoReturn || traj.stop == StopReason::YFloor {
        Fate::Q3CompactSupport
    } else if x > cfg.x_big
        && (zx - kappa).abs() < cfg.fate_tol
        && (y + params.sigma / (params.p - 1.0)).abs() < cfg.fate_tol
    {
        Fate::Qgamma0
    } else if x > cfg.x_big && zx < 0.5 * kappa && y > plane && y <= 0.0 {
        Fate::Q1Connection
    } else {
        Fate::Unresolved
    };
    TerminalInfo { fate, evidence }
}

/// Some sample shows the approach to `Q1`: large `X`, `Z/X` small and `Y`
/// between the no-return plane and zero.
pub fn has_q1_signature(traj: &Trajectory, params: &Params<f64>, cfg: &AnalyzeConfig) -> bool {
    if traj.chart != Chart::Xyz {
        return false;
    }
    let plane = params.no_return_level();
    let kappa = params.kappa();
    traj.samples.iter().any(|s| {
        let [x, y, z] = s.coords;
        x > cfg.x_big && y > plane && y <= 0.0 && z / x < 0.5 * kappa
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CountMode {
    YZero,
    SurfaceS,
}

#[derive(Debug, Clone, Serialize)]
pub struct OscillationCount {
    /// Descending crossings (profile maxima in `Y`-zero mode).
    pub n_max: usize,
    /// Ascending crossings (profile minima in `Y`-zero mode).
    pub n_min: usize,
    pub s_list: Vec<(f64, EventKind)>,
    pub mode: CountMode,
    /// Crossings dropped as tangential.
    pub tangencies: usize,
    /// The trajectory stays on the counting surface.
    pub degenerate: bool,
}

impl OscillationCount {
    pub fn flagged(&self) -> bool {
        self.tangencies > 0 || self.degenerate
    }
}

/// Count transversal crossings of `Y = 0` or of the surface `S`.
pub fn count_oscillations(traj: &Trajectory, mode: CountMode, cfg: &AnalyzeConfig) -> OscillationCount {
    let (up, down) = match mode {
        CountMode::YZero => (EventKind::YZeroUp, EventKind::YZeroDown),
        CountMode::SurfaceS => (EventKind::SurfaceSCross, EventKind::SurfaceSCross),
    };
    let mut out = OscillationCount {
        n_max: 0,
        n_min: 0,
        s_list: vec![],
        mode,
        tangencies: 0,
        degenerate: false,
    };
    for e in traj.events.iter().filter(|e| e.kind == up || e.kind == down) {
        if e.rate.abs() < cfg.tangency_tol {
            out.tangencies += 1;
            continue;
        }
        let rising = match mode {
            CountMode::YZero => e.kind == EventKind::YZeroUp,
            CountMode::SurfaceS => e.rate > 0.0,
        };
        if rising {
            out.n_min += 1;
        } else {
            out.n_max += 1;
        }
        out.s_list.push((e.s, e.kind));
    }
    if mode == CountMode::YZero {
        if let Some(i) = traj.chart.y_index() {
            out.degenerate = traj.samples.len() > 1
                && traj.samples.iter().all(|s| s.coords[i].abs() <= 1e-12 * (1.0 + s.coords[0].abs()));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SurfaceMode {
    ExactPlane,
    NumericCylinder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Minus,
    On,
    Plus,
}

/// The cylinder over the projection of `r_0` on the `(X, Y)` plane.
#[derive(Debug, Clone, Serialize)]
pub struct SurfaceS {
    pub mode: SurfaceMode,
    /// `(ln X, Y)` pairs with strictly increasing `ln X`.
    pub table: Vec<(f64, f64)>,
    /// `2/(m-1)`; the surface is capped by this level.
    pub plateau: f64,
    pub band_tol: f64,
}

impl SurfaceS {
    pub fn plane(params: &Params<f64>) -> Self {
        SurfaceS {
            mode: SurfaceMode::ExactPlane,
            table: vec![],
            plateau: 2.0 / (params.m - 1.0),
            band_tol: AnalyzeConfig::default().band_tol,
        }
    }

    pub fn from_r0(curve: &R0Curve, params: &Params<f64>) -> Result<Self> {
        if curve.exact {
            return Ok(Self::plane(params));
        }
        let mut table: Vec<(f64, f64)> = Vec::with_capacity(curve.trajectory.samples.len());
        for s in &curve.trajectory.samples {
            let [x, y, _] = s.coords;
            if !(x > 0.0) {
                continue;
            }
            let lx = x.ln();
            match table.last() {
                Some(&(prev, _)) if lx <= prev => {
                    return Err(Error::Numerical("X is not monotone along r_0".into()))
                }
                _ => table.push((lx, y)),
            }
        }
        if table.len() < 2 {
            return Err(Error::R0NotFound("r_0 has fewer than two samples".into()));
        }
        Ok(SurfaceS {
            mode: SurfaceMode::NumericCylinder,
            table,
            plateau: 2.0 / (params.m - 1.0),
            band_tol: AnalyzeConfig::default().band_tol,
        })
    }

    /// `psi(X)` and whether it was extrapolated.
    pub fn psi(&self, x: f64) -> (f64, bool) {
        if self.mode == SurfaceMode::ExactPlane {
            return (0.0, false);
        }
        let t = &self.table;
        if !(x > 0.0) {
            return (t[0].1, true);
        }
        let lx = x.ln();
        if lx <= t[0].0 {
            return (t[0].1, lx < t[0].0);
        }
        if lx >= t[t.len() - 1].0 {
            return (t[t.len() - 1].1, lx > t[t.len() - 1].0);
        }
        let i = t.partition_point(|q| q.0 < lx);
        let (a, b) = (t[i - 1], t[i]);
        (a.1 + (b.1 - a.1) * (lx - a.0) / (b.0 - a.0), false)
    }

    /// The level the sides are measured against: `min{psi(X), 2/(m-1)}`.
    pub fn level(&self, x: f64) -> f64 {
        self.psi(x).0.min(self.plateau)
    }

    pub fn as_fn(&self) -> SurfaceFn {
        let me = self.clone();
        Arc::new(move |x| me.level(x))
    }
}

pub fn side_of_s(point: &[f64; 3], surface: &SurfaceS) -> Side {
    let [x, y, _] = *point;
    let level = surface.level(x);
    if (y - level).abs() < surface.band_tol * (1.0 + y.abs()) {
        Side::On
    } else if y < level {
        Side::Minus
    } else {
        Side::Plus
    }
}

/// The five barrier flow expressions at `(X, Y, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierFlows {
    /// Flow across the plane `Z = (N+sigma)(X/N - Y)`.
    pub f1: f64,
    /// Flow across the quadratic surface over `Y <= 0`.
    pub f2: f64,
    /// Flow across the cylinder through `P0` and `P1`.
    pub e: f64,
    /// The cylinder flow restricted to `X = 0`.
    pub h: f64,
    /// `dY/d eta` on the no-return plane.
    pub fplane2: f64,
}

pub fn barrier_flows(point: &[f64; 3], params: &Params<f64>) -> BarrierFlows {
    let [x, y, z] = *point;
    let n = params.dim();
    let (m, p, s) = (params.m, params.p, params.sigma);
    let l = params.l();
    let k = params.drift();
    let ns = n + s;
    let f1 = -p * ns * y * (y - ((p - m) * ns + l) / (n * p * (s + 2.0)) * x);
    let cc = ns * (m - 1.0) - 2.0 * p * s;
    let f2 = (y + (s + 2.0) / (p - m))
        * (s * (p - m).powi(2) * ns / (n * n * (s + 2.0).powi(2)) * x * x
            + (p - m) * cc / (n * (s + 2.0)) * x * y
            + (p - m) * p * y * y);
    // p_s(sigma) - p written without p_s so it stays finite for N <= 2
    let ps_gap_scaled = m * (n + 2.0 * s + 2.0) - p * (n - 2.0);
    let e = ns / (n - 2.0)
        * (ps_gap_scaled / (n - 2.0) * y * y * (m * y + n - 2.0)
            + x * (1.0 + k * y) * (2.0 * m * y + n - 2.0));
    let h = ns * ps_gap_scaled / ((n - 2.0) * (n - 2.0)) * y * y * (m * y + n - 2.0);
    let fplane2 = -(s + 2.0) * (m * ns - p * (n - 2.0)) / ((p - m) * (p - m)) - z;
    BarrierFlows { f1, f2, e, h, fplane2 }
}

/// `Z` on the plane used by `F1`.
pub fn pln(x: f64, y: f64, params: &Params<f64>) -> f64 {
    let n = params.dim();
    (n + params.sigma) * (x / n - y)
}

/// `Z` on the cylinder through `P0` and `P1`.
pub fn iso1(y: f64, params: &Params<f64>) -> f64 {
    let n = params.dim();
    -(n + params.sigma) / (n - 2.0) * (params.m * y + n - 2.0) * y
}

/// Which sign certificates apply at these parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CertificateDomains {
    pub f1_positive: bool,
    pub f2_positive: bool,
    pub fplane2_negative: bool,
    pub e_positive: bool,
}

pub fn certificate_domains(params: &Params<f64>) -> CertificateDomains {
    let (m, p, s, n) = (params.m, params.p, params.sigma, params.n);
    // p_c and p_s are infinite for N <= 2
    let nn = params.dim();
    let pc = critical_exponent(m, n, s);
    let ps = sobolev_exponent(m, n, s);
    CertificateDomains {
        f1_positive: p > fujita_exponent(m, n, s),
        f2_positive: (nn + s) * (m - 1.0) - 2.0 * p * s < 0.0,
        fplane2_negative: !pc.finite().is_some_and(|v| p > v),
        e_positive: pc.finite().is_some_and(|v| p > v) && ps.exceeds(p),
    }
}

/// True iff the trajectory crossed the no-return plane; afterwards it must
/// stay below it.
pub fn no_return_predicate(traj: &Trajectory, params: &Params<f64>) -> Result<bool> {
    let Some(ev) = traj.events.iter().find(|e| e.kind == EventKind::NoReturnCross) else {
        return Ok(false);
    };
    if traj.chart != Chart::Xyz {
        return Ok(true);
    }
    let plane = params.no_return_level();
    let tol = 1e-8 * plane.abs().max(1.0);
    if let Some(bad) = traj.samples.iter().find(|s| s.s > ev.s && s.coords[1] > plane + tol) {
        return Err(Error::Numerical(format!(
            "trajectory returned above the no-return plane at s={} (Y={})",
            bad.s, bad.coords[1]
        )));
    }
    Ok(true)
}
