//! Sweeps over the shooting families and bisection searches for connections
//! to `Q1` with a prescribed number of minima.

use crate::analyze::{
    classify_terminal, count_oscillations, has_q1_signature, AnalyzeConfig, CountMode, Fate,
    OscillationCount, SurfaceS, TerminalInfo,
};
use crate::error::{Error, Result};
use crate::integrate::{
    integrate, Controls, Direction, EventKind, EventSet, Sample, StopReason, Trajectory,
};
use crate::manifolds::{
    q1_center_coef, q1_center_y, seed_p0, seed_p3, seed_q5, Seed, SeedOrder, DEFAULT_EPS_P0, DEFAULT_EPS_P3,
    DEFAULT_EPS_Q5,
};
use crate::params::{sobolev_exponent, Params};
use crate::profiles::{reconstruct, Profile, Source};
use crate::phasespace::{Chart, ChartPoint};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    /// The origin family `l_C`, parameter `C`.
    P0C,
    /// The unstable plane of `Q5`, parameter `theta`.
    Q5Theta,
    /// The unstable orbit of `P3`, parameter `p`.
    P3P,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::P0C => "P0_C",
            Family::Q5Theta => "Q5_theta",
            Family::P3P => "P3_p",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P0_C" | "p0" | "P0C" => Ok(Family::P0C),
            "Q5_theta" | "q5" | "Q5Theta" => Ok(Family::Q5Theta),
            "P3_p" | "p3" | "P3P" => Ok(Family::P3P),
            _ => Err(Error::InvalidParams(format!("unknown family {s}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShooterConfig {
    pub controls: Controls,
    pub analyze: AnalyzeConfig,
    pub eps_p0: f64,
    pub eps_p3: f64,
    pub eps_q5: f64,
    pub order: SeedOrder,
    /// Relative bracket width at which bisection stops.
    pub bisect_tol: f64,
    pub max_bisect: usize,
    /// Also count crossings of this surface.
    #[serde(skip)]
    pub surface: Option<SurfaceS>,
    /// Continue connections to `Q1` backward from its centre manifold.
    pub complete_tail: bool,
    /// Step cap in `eta` for the orbits kept for profile reconstruction.
    pub profile_max_step: f64,
}

impl Default for ShooterConfig {
    fn default() -> Self {
        ShooterConfig {
            controls: Controls::default(),
            analyze: AnalyzeConfig::default(),
            eps_p0: DEFAULT_EPS_P0,
            eps_p3: DEFAULT_EPS_P3,
            eps_q5: DEFAULT_EPS_Q5,
            order: SeedOrder::First,
            bisect_tol: 1e-12,
            max_bisect: 200,
            surface: None,
            complete_tail: true,
            profile_max_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShotOutcome {
    pub family: Family,
    pub parameter: f64,
    pub seed: Seed,
    pub count: OscillationCount,
    /// Minima of the profile; at `sigma = 0` an increasing start makes the
    /// origin itself a minimum.
    pub minima: usize,
    pub surface_count: Option<OscillationCount>,
    pub terminal: TerminalInfo,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

fn family_params(family: Family, parameter: f64, params: &Params<f64>) -> Result<Params<f64>> {
    match family {
        Family::P3P => params.with_p(parameter),
        _ => Ok(*params),
    }
}

fn make_seed(family: Family, parameter: f64, params: &Params<f64>, cfg: &ShooterConfig) -> Result<Seed> {
    match family {
        Family::P0C => seed_p0(parameter, cfg.eps_p0, params, cfg.order),
        Family::Q5Theta => seed_q5(parameter, cfg.eps_q5, params),
        Family::P3P => seed_p3(cfg.eps_p3, params),
    }
}

/// Integrate one member of a family and analyse it.
pub fn shoot(
    params: &Params<f64>,
    family: Family,
    parameter: f64,
    cfg: &ShooterConfig,
    keep_trajectory: bool,
) -> Result<ShotOutcome> {
    let params = family_params(family, parameter, params)?;
    let seed = make_seed(family, parameter, &params, cfg)?;
    let mut events = EventSet::standard();
    events.surface = cfg.surface.as_ref().map(|s| s.as_fn());
    let traj = integrate(&seed.point, &params, &cfg.controls, &events)?;
    let count = count_oscillations(&traj, CountMode::YZero, &cfg.analyze);
    let surface_count = cfg
        .surface
        .as_ref()
        .map(|_| count_oscillations(&traj, CountMode::SurfaceS, &cfg.analyze));
    let origin_min = family == Family::P0C && params.sigma == 0.0 && seed.point.coords[1] > 0.0;
    let minima = count.n_min + usize::from(origin_min);
    let terminal = classify_terminal(&traj, &params, &cfg.analyze);
    Ok(ShotOutcome {
        family,
        parameter,
        seed,
        count,
        minima,
        surface_count,
        terminal,
        trajectory: keep_trajectory.then_some(traj),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub parameter: f64,
    pub outcome: std::result::Result<ShotOutcome, String>,
}

/// One shot per grid value, run in parallel; results keep the grid order.
pub fn sweep(params: &Params<f64>, family: Family, grid: &[f64], cfg: &ShooterConfig) -> Result<Vec<SweepEntry>> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParams("sweep grid must be strictly increasing".into()));
    }
    Ok(grid
        .par_iter()
        .map(|&c| SweepEntry {
            parameter: c,
            outcome: shoot(params, family, c, cfg, false).map_err(|e| e.to_string()),
        })
        .collect())
}

/// `n` points spaced logarithmically over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| if n == 1 { lo } else { (a + (b - a) * i as f64 / (n - 1) as f64).exp() })
        .collect()
}

pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

/// A connection to `Q1` completed backward from the centre manifold of `Q1`.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectionOrbit {
    pub trajectory: Trajectory,
    pub x_match: f64,
    /// Relative `Y` mismatch where the forward and backward pieces meet.
    pub junction_defect: f64,
    /// Centre-manifold parameter of the backward piece.
    pub k_tail: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectionResult {
    pub family: Family,
    pub params: Params<f64>,
    pub parameter_star: f64,
    pub bracket: (f64, f64),
    /// Minima of the connecting profile.
    pub oscillations: usize,
    pub minima_at_ends: (usize, usize),
    pub fate_at_bracket_ends: (TerminalInfo, TerminalInfo),
    pub q1_signature: bool,
    /// `X` above which the signature was looked for.
    pub signature_x: f64,
    pub midpoint: ShotOutcome,
    pub orbit: Option<ConnectionOrbit>,
    pub orbit_error: Option<String>,
    pub iterations: usize,
}

impl ConnectionResult {
    pub fn relative_width(&self) -> f64 {
        (self.bracket.1 - self.bracket.0).abs() / self.parameter_star.abs()
    }

    /// The profile along the completed connecting orbit.
    pub fn profile(&self) -> Result<Profile> {
        let Some(orbit) = &self.orbit else {
            return Err(Error::Profile(self.orbit_error.clone().unwrap_or_else(|| "connection has no orbit".into())));
        };
        let source = match self.family {
            Family::P0C => Source::P0 { c: self.parameter_star },
            Family::Q5Theta => Source::Q5 { theta: self.parameter_star },
            Family::P3P => Source::P3,
        };
        reconstruct(&orbit.trajectory, &self.params, source)
    }
}

struct Bisection {
    lo: ShotOutcome,
    hi: ShotOutcome,
    iterations: usize,
}

/// Bisect `[lo, hi]` on `indicator`, which must differ at the two ends.
fn bisect<F>(lo: f64, hi: f64, cfg: &ShooterConfig, run: F, indicator: impl Fn(&ShotOutcome) -> bool) -> Result<Bisection>
where
    F: Fn(f64) -> Result<ShotOutcome>,
{
    let checked = |c: f64| -> Result<ShotOutcome> {
        let out = run(c)?;
        if out.count.flagged() {
            return Err(Error::Tangency(c));
        }
        Ok(out)
    };
    let mut a = checked(lo)?;
    let mut b = checked(hi)?;
    let ia = indicator(&a);
    if ia == indicator(&b) {
        return Err(Error::NoBracket(format!("indicator equal at {lo} and {hi}")));
    }
    let mut it = 0;
    while (b.parameter - a.parameter).abs() > cfg.bisect_tol * (0.5 * (a.parameter + b.parameter)).abs() {
        if it >= cfg.max_bisect {
            return Err(Error::Numerical("bisection did not converge".into()));
        }
        let mid = 0.5 * (a.parameter + b.parameter);
        if mid <= a.parameter.min(b.parameter) || mid >= a.parameter.max(b.parameter) {
            break;
        }
        let out = checked(mid)?;
        if indicator(&out) == ia {
            a = out;
        } else {
            b = out;
        }
        it += 1;
    }
    Ok(Bisection { lo: a, hi: b, iterations: it })
}

fn finish(
    params: &Params<f64>,
    family: Family,
    k: usize,
    bis: Bisection,
    cfg: &ShooterConfig,
) -> Result<ConnectionResult> {
    let (lo, hi) = (bis.lo, bis.hi);
    let star = 0.5 * (lo.parameter + hi.parameter);
    let mid = shoot(params, family, star, cfg, true)?;
    let fam_params = family_params(family, star, params)?;
    let traj = mid.trajectory.as_ref().expect("kept");
    let q1_signature = has_q1_signature(traj, &fam_params, &cfg.analyze);
    let mut result = ConnectionResult {
        family,
        params: fam_params,
        parameter_star: star,
        bracket: (lo.parameter.min(hi.parameter), lo.parameter.max(hi.parameter)),
        oscillations: k,
        minima_at_ends: (lo.minima, hi.minima),
        fate_at_bracket_ends: (lo.terminal.clone(), hi.terminal.clone()),
        q1_signature,
        signature_x: cfg.analyze.x_big,
        midpoint: mid,
        orbit: None,
        orbit_error: None,
        iterations: bis.iterations,
    };
    if cfg.complete_tail {
        let fine = ShooterConfig {
            controls: Controls { max_step: cfg.profile_max_step, ..cfg.controls.clone() },
            ..cfg.clone()
        };
        let ends = (
            shoot(params, family, lo.parameter, &fine, true)?,
            shoot(params, family, hi.parameter, &fine, true)?,
        );
        match complete_tail(
            &fam_params,
            ends.0.trajectory.as_ref().unwrap(),
            ends.1.trajectory.as_ref().unwrap(),
            &fine.controls,
        ) {
            Ok(o) => result.orbit = Some(o),
            Err(e) => result.orbit_error = Some(e.to_string()),
        }
    }
    // when the bracket ends part before reaching x_big, a midpoint that hovers
    // past the junction with a centre-manifold tail matching it is accepted
    if !result.q1_signature {
        if let Some(o) = result.orbit.as_ref().filter(|o| o.junction_defect < 1e-6) {
            let lowered = AnalyzeConfig { x_big: o.x_match, ..cfg.analyze };
            let traj = result.midpoint.trajectory.as_ref().expect("kept");
            result.q1_signature = has_q1_signature(traj, &fam_params, &lowered);
            result.signature_x = o.x_match;
        }
    }
    Ok(result)
}

fn valid_end(o: &ShotOutcome) -> bool {
    !o.count.flagged()
}

fn default_points(family: Family) -> usize {
    match family {
        Family::P0C => 200,
        Family::Q5Theta => 120,
        Family::P3P => 100,
    }
}

/// Logarithmic grid for `C`, linear otherwise.
pub fn family_grid(family: Family, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match family {
        Family::P0C => log_grid(lo, hi, n),
        _ => linear_grid(lo, hi, n),
    }
}

/// Parameter range scanned when no interval is given.
pub fn default_range(params: &Params<f64>, family: Family) -> (f64, f64) {
    match family {
        Family::P0C => (1e-3, 1e3),
        Family::Q5Theta => (0.005, std::f64::consts::FRAC_PI_2 - 0.005),
        Family::P3P => {
            let top = sobolev_exponent(params.m, params.n, params.sigma).min_with(params.m + 4.0);
            (params.m + 0.02 * (top - params.m), top - 0.01 * (top - params.m))
        }
    }
}

/// The grid scanned by [`find_connection`] when no interval is given.
pub fn default_grid(params: &Params<f64>, family: Family) -> Vec<f64> {
    let (lo, hi) = default_range(params, family);
    family_grid(family, lo, hi, default_points(family))
}

/// Locate the boundary between runs ending at `Q3` with exactly `k` minima
/// and runs with at least `k + 1` minima.
pub fn find_connection(
    params: &Params<f64>,
    family: Family,
    k: usize,
    hint: Option<(f64, f64)>,
    cfg: &ShooterConfig,
) -> Result<ConnectionResult> {
    if family == Family::P0C && params.sigma < 0.0 {
        return Err(Error::InvalidParams("use find_negative_sigma for sigma < 0".into()));
    }
    let grid = match hint {
        None => default_grid(params, family),
        Some((a, b)) => family_grid(family, a, b, default_points(family)),
    };
    let shots = sweep(params, family, &grid, cfg)?;
    let ok = |e: &SweepEntry| e.outcome.as_ref().ok().filter(|o| valid_end(o)).cloned();
    // the largest-parameter transition from "k minima, Q3" to "at least k+1 minima"
    let mut bracket = None;
    for w in shots.windows(2).rev() {
        let (Some(a), Some(b)) = (ok(&w[0]), ok(&w[1])) else { continue };
        if family == Family::P0C && params.sigma == 0.0 && (a.parameter - 1.0) * (b.parameter - 1.0) <= 0.0 {
            continue;
        }
        let false_side = |o: &ShotOutcome| o.minima == k && o.terminal.fate == Fate::Q3CompactSupport;
        let true_side = |o: &ShotOutcome| o.minima > k;
        if (false_side(&a) && true_side(&b)) || (true_side(&a) && false_side(&b)) {
            bracket = Some((a.parameter, b.parameter));
            break;
        }
    }
    let (lo, hi) = bracket.ok_or_else(|| {
        Error::NoBracket(format!("no transition to {} minima found in the {family:?} sweep", k))
    })?;
    let bis = bisect(lo, hi, cfg, |c| shoot(params, family, c, cfg, false), |o| o.minima > k)?;
    finish(params, family, k, bis, cfg)
}

/// Dead-core connection with `k` minima in the `Q5` family.
pub fn find_deadcore(params: &Params<f64>, k: usize, cfg: &ShooterConfig) -> Result<ConnectionResult> {
    find_connection(params, Family::Q5Theta, k, None, cfg)
}

/// Value of `p` in `p_interval` at which the `P3` orbit connects to `Q1`.
pub fn find_p3_connection(
    params: &Params<f64>,
    p_interval: Option<(f64, f64)>,
    cfg: &ShooterConfig,
) -> Result<ConnectionResult> {
    find_connection(params, Family::P3P, 0, p_interval, cfg)
}

/// Decreasing profile for `sigma < 0`: boundary between runs where `Y`
/// becomes positive and runs crossing the no-return plane.
pub fn find_negative_sigma(params: &Params<f64>, cfg: &ShooterConfig) -> Result<ConnectionResult> {
    if params.sigma >= 0.0 {
        return Err(Error::InvalidParams("find_negative_sigma needs sigma < 0".into()));
    }
    if !sobolev_exponent(params.m, params.n, params.sigma).exceeds(params.p) {
        return Err(Error::InvalidParams("needs p below the Sobolev exponent".into()));
    }
    let n = params.dim();
    let s = params.sigma;
    // below this C the finite seed starts with Y > 0
    let c_min = 10.0 * (n + s) / n * cfg.eps_p0.powf(-0.5 * s);
    let grid = log_grid(c_min, c_min * 1e6, 120);
    let rises = |o: &ShotOutcome| o.count.n_min > 0;
    let shots = sweep(params, Family::P0C, &grid, cfg)?;
    let mut bracket = None;
    for w in shots.windows(2) {
        let (Ok(a), Ok(b)) = (&w[0].outcome, &w[1].outcome) else { continue };
        let q3 = |o: &ShotOutcome| !rises(o) && o.terminal.fate == Fate::Q3CompactSupport;
        if (rises(a) && q3(b)) || (q3(a) && rises(b)) {
            bracket = Some((a.parameter, b.parameter));
            break;
        }
    }
    let (lo, hi) = bracket.ok_or_else(|| Error::NoBracket("no rise/no-return transition found".into()))?;
    let bis = bisect(lo, hi, cfg, |c| shoot(params, Family::P0C, c, cfg, false), rises)?;
    finish(params, Family::P0C, 0, bis, cfg)
}

fn first_separation(a: &Trajectory, b: &Trajectory) -> Option<usize> {
    a.samples.iter().position(|s| match b.at(s.s) {
        Some(q) => (q[1] - s.coords[1]).abs() > 1e-6 * (1.0 + s.coords[1].abs()),
        None => true,
    })
}

/// Exact state where `traj` last crosses `X = level` upward before sample `before`.
fn crossing_state(
    traj: &Trajectory,
    before: usize,
    level: f64,
    params: &Params<f64>,
    controls: &Controls,
) -> Result<(usize, Sample)> {
    let i = (0..before.min(traj.samples.len()))
        .rev()
        .find(|&i| traj.samples[i].coords[0] < level && traj.samples.get(i + 1).is_some_and(|n| n.coords[0] >= level))
        .ok_or_else(|| Error::Numerical(format!("trajectory never reaches X = {level}")))?;
    let s0 = traj.samples[i];
    let start = ChartPoint { chart: Chart::Xyz, coords: s0.coords, s: s0.s };
    let c = Controls { stop_on_no_return: false, ..controls.clone() };
    let ev = EventSet { x_level: Some(level), ..Default::default() };
    let t = integrate(&start, params, &c, &ev)?;
    if t.stop != StopReason::Level {
        return Err(Error::Numerical("level event not reached when refining the junction".into()));
    }
    Ok((i, *t.last()))
}

/// Exponent `g` with `z ~ K x^g` along the centre manifold of `Q1`.
pub fn q1_tail_exponent(params: &Params<f64>) -> f64 {
    let k = params.drift();
    ((params.p - 1.0) - params.sigma * k) / ((params.m - 1.0) + 2.0 * k)
}

/// Smallest `x = 1/X` the backward tail starts from.
pub const TAIL_X_SEED: f64 = 1e-7;

/// Start of the backward tail: far enough out that the centre-manifold
/// expansion is accurate, near enough that the fast direction of `Q1` does
/// not make the integration stiff.
pub fn tail_x_seed(params: &Params<f64>) -> f64 {
    let reach = 1e5 * q1_center_coef(params).abs().max(1.0) / params.drift();
    (1.0 / reach).max(TAIL_X_SEED)
}

fn backward_tail(kt: f64, x_match: f64, params: &Params<f64>, controls: &Controls) -> Result<Trajectory> {
    let xs = tail_x_seed(params);
    let z = kt * xs.powf(q1_tail_exponent(params));
    let start = ChartPoint::new(Chart::XProj, [xs, q1_center_y(xs, z, params), z]);
    let c = Controls {
        direction: Direction::Backward,
        radius_max: 1e15,
        s_max: 1e4,
        stop_on_no_return: false,
        y_floor_factor: 1e6,
        ..controls.clone()
    };
    let ev = EventSet { x_level: Some(x_match), ..Default::default() };
    let t = integrate(&start, params, &c, &ev)?;
    if t.stop != StopReason::Level {
        return Err(Error::Numerical(format!("backward tail stopped by {:?}", t.stop)));
    }
    Ok(t)
}

/// Continue the connection past the point where the bracket ends separate by
/// integrating backward from the centre manifold of `Q1` and matching `Z`.
pub fn complete_tail(
    params: &Params<f64>,
    lo: &Trajectory,
    hi: &Trajectory,
    controls: &Controls,
) -> Result<ConnectionOrbit> {
    let sep = first_separation(lo, hi).unwrap_or(lo.samples.len() - 1);
    let x_sep = lo.samples[sep].coords[0];
    // the junction sits well before the separation; keep the best of a few
    let mut best: Option<ConnectionOrbit> = None;
    let mut last_err = None;
    for frac in [0.05, 0.1, 0.2, 0.4] {
        match tail_at(params, lo, sep, frac * x_sep, controls) {
            Ok(o) if best.as_ref().is_none_or(|b| o.junction_defect < b.junction_defect) => best = Some(o),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap())
}

fn tail_at(
    params: &Params<f64>,
    lo: &Trajectory,
    sep: usize,
    x_match: f64,
    controls: &Controls,
) -> Result<ConnectionOrbit> {
    let x_sep = lo.samples[sep].coords[0];
    if !(x_match > 1.0) {
        return Err(Error::Numerical(format!("bracket ends separate too early (X = {x_sep:e})")));
    }
    let (cut, junction) = crossing_state(lo, sep, x_match, params, controls)?;
    let target = (junction.coords[2] / junction.coords[0]).ln();
    let resid = |kt: f64| -> Result<(f64, Trajectory)> {
        let t = backward_tail(kt, x_match, params, controls)?;
        let j = t.samples[0].coords;
        Ok(((j[2] / j[0]).ln() - target, t))
    };
    // secant in ln K from the leading-order guess
    let g = q1_tail_exponent(params);
    let mut k0 = (junction.coords[2] / junction.coords[0]) / (1.0 / x_match).powf(g);
    let (mut r0, _) = resid(k0)?;
    let mut k1 = k0 * (-r0).exp();
    let (mut r1, mut t1) = resid(k1)?;
    for _ in 0..60 {
        if r1.abs() < 1e-13 {
            break;
        }
        let (l0, l1) = (k0.ln(), k1.ln());
        let mut l2 = l1 - r1 * (l1 - l0) / (r1 - r0);
        if !l2.is_finite() {
            l2 = l1 - r1;
        }
        l2 = l2.clamp(l1 - 2.0, l1 + 2.0);
        k0 = k1;
        r0 = r1;
        k1 = l2.exp();
        let (r, t) = resid(k1)?;
        r1 = r;
        t1 = t;
    }
    if r1.abs() > 1e-9 {
        return Err(Error::Numerical(format!("tail matching did not converge (residual {r1:e})")));
    }
    let j = t1.samples[0].coords;
    let junction_defect = (j[1] - junction.coords[1]).abs() / (1.0 + junction.coords[1].abs());
    let shift = junction.s - t1.samples[0].s;
    // drop samples crowding the junction so finite differences see a regular grid
    let fwd = &lo.samples[..=cut];
    let keep_fwd = if cut > 0 && junction.s - fwd[cut].s < 0.5 * (fwd[cut].s - fwd[cut - 1].s) { cut } else { cut + 1 };
    let back: Vec<Sample> = t1.samples[1..].iter().map(|q| Sample { s: q.s + shift, coords: q.coords }).collect();
    let skip_back = usize::from(back.len() > 1 && back[0].s - junction.s < 0.5 * (back[1].s - back[0].s));
    let mut samples: Vec<Sample> = fwd[..keep_fwd].to_vec();
    samples.push(junction);
    samples.extend_from_slice(&back[skip_back..]);
    let mut events: Vec<_> = lo.events.iter().filter(|e| e.s <= junction.s).copied().collect();
    events.extend(
        t1.events
            .iter()
            .filter(|e| e.kind != EventKind::LevelReached)
            .map(|e| crate::integrate::Event { s: e.s + shift, ..*e }),
    );
    let trajectory = Trajectory {
        chart: Chart::Xyz,
        samples,
        events,
        stop: StopReason::Radius,
        steps: lo.steps + t1.steps,
    };
    Ok(ConnectionOrbit { trajectory, x_match, junction_defect, k_tail: k1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = log_grid(1e-3, 1e3, 7);
        assert!((g[3] - 1.0).abs() < 1e-12 && (g[6] - 1e3).abs() < 1e-9);
        assert_eq!(linear_grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn large_c_is_decreasing_and_compact() {
        let q = Params::new(2.0, 5, 2.1, 0.1).unwrap();
        let o = shoot(&q, Family::P0C, 1e3, &ShooterConfig::default(), false).unwrap();
        assert_eq!(o.minima, 0);
        assert_eq!(o.terminal.fate, Fate::Q3CompactSupport);
    }

    #[test]
    fn rejects_wrong_sigma() {
        let q = Params::new(2.0, 5, 2.1, 0.1).unwrap();
        assert!(find_negative_sigma(&q, &ShooterConfig::default()).is_err());
        let q = Params::new(2.0, 3, 3.0, -1.0).unwrap();
        assert!(find_connection(&q, Family::P0C, 0, None, &ShooterConfig::default()).is_err());
    }
}
