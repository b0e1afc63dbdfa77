//! Adaptive Dormand–Prince 5(4) integration with dense output, event location
//! and automatic switching between the finite chart and the projection on `X`.

use crate::error::{Error, Result};
use crate::params::Params;
use crate::phasespace::{to_chart, vf, Chart, ChartPoint};
use serde::Serialize;
use std::sync::Arc;

/// Integration direction in the chart's independent variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

/// Integrator tolerances and limits.
#[derive(Debug, Clone, Serialize)]
pub struct Controls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Limit on `eta` (or the chart variable for planar charts).
    pub s_max: f64,
    /// Max-norm bound on `(X, Y, Z)`.
    pub radius_max: f64,
    /// Largest allowed increment of `eta` per step.
    pub max_step: f64,
    pub event_tol: f64,
    /// Switch to the `X` projection above this `X`; back below half of it.
    pub chart_switch: Option<f64>,
    pub stop_on_no_return: bool,
    /// Stop once `Y < -y_floor_factor (sigma+2)/(p-m)`.
    pub y_floor_factor: f64,
    pub max_steps: usize,
    /// Undershoots of non-negative coordinates down to `-clamp_tol` are clamped.
    pub clamp_tol: f64,
    pub h_init: f64,
    pub direction: Direction,
}

impl Default for Controls {
    fn default() -> Self {
        Controls {
            rel_tol: 1e-13,
            abs_tol: 1e-16,
            s_max: 200.0,
            radius_max: 1e6,
            max_step: 0.05,
            event_tol: 1e-10,
            chart_switch: Some(100.0),
            stop_on_no_return: true,
            y_floor_factor: 10.0,
            max_steps: 2_000_000,
            clamp_tol: 1e-12,
            h_init: 1e-4,
            direction: Direction::Forward,
        }
    }
}

impl Controls {
    /// Same controls with tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Controls {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EventKind {
    YZeroUp,
    YZeroDown,
    NoReturnCross,
    SurfaceSCross,
    RadiusExceeded,
    NearCriticalPoint,
    LevelReached,
}

/// A located event. `coords` are in the trajectory's storage chart; `rate` is
/// the derivative of the event's reference quantity along the flow (for
/// `Y`-type events, `dY/d eta`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub s: f64,
    pub coords: [f64; 3],
    pub rate: f64,
}

/// Graph `Y = psi(X)` of the surface used for oscillation counting.
pub type SurfaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Optional events beyond the always-on stopping conditions.
#[derive(Clone, Default)]
pub struct EventSet {
    pub y_zero: bool,
    pub no_return: bool,
    pub surface: Option<SurfaceFn>,
    /// `(point in XYZ, radius)` pairs; records the first approach within radius.
    pub near: Vec<([f64; 3], f64)>,
    /// Terminal event when `X` reaches this level (either direction).
    pub x_level: Option<f64>,
}

impl EventSet {
    pub fn standard() -> Self {
        EventSet { y_zero: true, no_return: true, ..Default::default() }
    }
}

impl std::fmt::Debug for EventSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventSet")
            .field("y_zero", &self.y_zero)
            .field("no_return", &self.no_return)
            .field("surface", &self.surface.is_some())
            .field("near", &self.near)
            .field("x_level", &self.x_level)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    SMax,
    Radius,
    NoReturn,
    YFloor,
    Level,
    MaxSteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub s: f64,
    pub coords: [f64; 3],
}

/// A numeric orbit. Orbits started in the finite chart or the `X` projection
/// are stored in `(X, Y, Z)` with `s = eta`; other charts are stored natively.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub chart: Chart,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub stop: StopReason,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has samples")
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn has_event(&self, kind: EventKind) -> bool {
        self.events.iter().any(|e| e.kind == kind)
    }

    /// Linear interpolation of the stored coordinates at `s`.
    pub fn at(&self, s: f64) -> Option<[f64; 3]> {
        let i = self.samples.partition_point(|q| q.s < s);
        if i == 0 || i >= self.samples.len() {
            return (i < self.samples.len() && self.samples[i].s == s).then(|| self.samples[i].coords);
        }
        let (a, b) = (&self.samples[i - 1], &self.samples[i]);
        let t = (s - a.s) / (b.s - a.s);
        Some(std::array::from_fn(|j| a.coords[j] + t * (b.coords[j] - a.coords[j])))
    }
}

/// The first event of the given kind.
pub fn refine_event(traj: &Trajectory, kind: EventKind) -> Result<Event> {
    traj.events_of(kind)
        .next()
        .copied()
        .ok_or_else(|| Error::EventAbsent(format!("{kind:?}")))
}

type Aug = [f64; 4];

// Dormand–Prince 5(4) tableau; the field is autonomous so the nodes are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy(y: &Aug, h: f64, terms: &[(f64, &Aug)]) -> Aug {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Dense output over one accepted step.
struct Dense {
    r: [Aug; 5],
}

impl Dense {
    fn eval(&self, theta: f64) -> Aug {
        let t1 = 1.0 - theta;
        std::array::from_fn(|i| {
            let r = &self.r;
            r[0][i] + theta * (r[1][i] + t1 * (r[2][i] + theta * (r[3][i] + t1 * r[4][i])))
        })
    }
}

struct Step {
    y1: Aug,
    k7: Aug,
    err: f64,
    dense: Dense,
}

fn dp_step<F: Fn(&Aug) -> Aug>(f: &F, y: &Aug, k1: &Aug, h: f64, c: &Controls) -> Step {
    let k2 = f(&axpy(y, h, &[(A21, k1)]));
    let k3 = f(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(&axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y1 = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(&y1);
    let mut acc = 0.0;
    for i in 0..4 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = c.abs_tol + c.rel_tol * y[i].abs().max(y1[i].abs());
        acc += (e / sc).powi(2);
    }
    let err = (acc / 4.0).sqrt();
    let r0 = *y;
    let r1: Aug = std::array::from_fn(|i| y1[i] - y[i]);
    let r2: Aug = std::array::from_fn(|i| h * k1[i] - r1[i]);
    let r3: Aug = std::array::from_fn(|i| r1[i] - h * k7[i] - r2[i]);
    let r4: Aug = std::array::from_fn(|i| {
        h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
    });
    Step { y1, k7, err, dense: Dense { r: [r0, r1, r2, r3, r4] } }
}

/// Everything an event function needs about the current leg.
#[derive(Clone, Copy)]
struct Leg {
    chart: Chart,
}

#[derive(Clone, Copy, PartialEq)]
enum Ev {
    YZero,
    NoReturn,
    Surface,
    Near(usize),
    Radius,
    Floor,
    Level,
}

struct EventCtx<'a> {
    set: &'a EventSet,
    no_return: f64,
    floor: f64,
    radius: f64,
}

impl EventCtx<'_> {
    fn list(&self, chart: Chart) -> Vec<Ev> {
        let mut v = Vec::new();
        let finite = matches!(chart, Chart::Xyz | Chart::XProj);
        let has_y = chart.y_index().is_some();
        if self.set.y_zero && has_y {
            v.push(Ev::YZero);
        }
        if self.set.no_return && has_y && chart != Chart::WChart {
            v.push(Ev::NoReturn);
        }
        if self.set.surface.is_some() && finite {
            v.push(Ev::Surface);
        }
        if finite {
            for i in 0..self.set.near.len() {
                v.push(Ev::Near(i));
            }
            if self.set.x_level.is_some() {
                v.push(Ev::Level);
            }
        }
        v.push(Ev::Radius);
        if has_y && chart != Chart::WChart {
            v.push(Ev::Floor);
        }
        v
    }

    /// Event function value; sign-equivalent to the `(X, Y, Z)` expression.
    fn g(&self, ev: Ev, leg: Leg, u: &Aug) -> f64 {
        let (a, b, c) = (u[0], u[1], u[2]);
        match leg.chart {
            Chart::Xyz => match ev {
                Ev::YZero => b,
                Ev::NoReturn => b - self.no_return,
                Ev::Floor => b - self.floor,
                Ev::Surface => b - (self.set.surface.as_ref().unwrap())(a),
                Ev::Near(i) => {
                    let (p, r) = self.set.near[i];
                    (a - p[0]).abs().max((b - p[1]).abs()).max((c - p[2]).abs()) - r
                }
                Ev::Radius => a.abs().max(b.abs()).max(c.abs()) - self.radius,
                Ev::Level => a - self.set.x_level.unwrap(),
            },
            Chart::XProj => match ev {
                Ev::YZero => b,
                Ev::NoReturn => b - self.no_return * a,
                Ev::Floor => b - self.floor * a,
                Ev::Surface => b - (self.set.surface.as_ref().unwrap())(1.0 / a) * a,
                Ev::Near(i) => {
                    let (p, r) = self.set.near[i];
                    let (x, y, z) = (1.0 / a, b / a, c / a);
                    (x - p[0]).abs().max((y - p[1]).abs()).max((z - p[2]).abs()) - r
                }
                Ev::Radius => 1f64.max(b.abs()).max(c.abs()) - self.radius * a,
                Ev::Level => 1.0 - self.set.x_level.unwrap() * a,
            },
            chart => {
                let yi = chart.y_index();
                match ev {
                    Ev::YZero => u[yi.unwrap()],
                    Ev::NoReturn => u[yi.unwrap()] - self.no_return,
                    Ev::Floor => u[yi.unwrap()] - self.floor,
                    Ev::Radius => a.abs().max(b.abs()).max(c.abs()) - self.radius,
                    _ => 1.0,
                }
            }
        }
    }

    /// Which crossing directions count: `Some(true)` rising only, `Some(false)` falling only.
    fn direction(&self, ev: Ev) -> Option<bool> {
        match ev {
            Ev::YZero | Ev::Surface | Ev::Level => None,
            Ev::NoReturn | Ev::Floor | Ev::Near(_) => Some(false),
            Ev::Radius => Some(true),
        }
    }
}

fn rate_eta(chart: Chart, u: &Aug) -> f64 {
    match chart {
        Chart::XProj => u[0],
        _ => 1.0,
    }
}

fn augmented_field(chart: Chart, params: &Params<f64>, sign: f64) -> impl Fn(&Aug) -> Aug + '_ {
    move |u: &Aug| {
        let f = vf(chart, &[u[0], u[1], u[2]], params);
        [sign * f[0], sign * f[1], sign * f[2], sign * rate_eta(chart, u)]
    }
}

fn to_storage(chart: Chart, u: &Aug) -> [f64; 3] {
    match chart {
        Chart::XProj => [1.0 / u[0], u[1] / u[0], u[2] / u[0]],
        _ => [u[0], u[1], u[2]],
    }
}

fn storage_chart(chart: Chart) -> Chart {
    match chart {
        Chart::XProj => Chart::Xyz,
        c => c,
    }
}

fn event_rate(storage: Chart, coords: &[f64; 3], params: &Params<f64>) -> f64 {
    match storage.y_index() {
        Some(i) => vf(storage, coords, params)[i],
        None => 0.0,
    }
}

/// Illinois root finding of `g` on the dense interpolant over `theta in [0, 1]`.
fn locate<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, mut ga: f64, mut gb: f64, tol: f64) -> f64 {
    let mut side = 0i8;
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let c = (a * gb - b * ga) / (gb - ga);
        let c = if c.is_finite() && c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let gc = g(c);
        if gc == 0.0 {
            return c;
        }
        if gc.signum() == gb.signum() {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    if ga.abs() < gb.abs() { a } else { b }
}

/// Integrate from `start` with the given events. Orbits starting in the finite
/// chart or the `X` projection switch between the two according to
/// `controls.chart_switch` and are stored in `(X, Y, Z)` with `s = eta`.
pub fn integrate(
    start: &ChartPoint<f64>,
    params: &Params<f64>,
    controls: &Controls,
    events: &EventSet,
) -> Result<Trajectory> {
    let c = controls;
    if !(c.rel_tol > 0.0 && c.abs_tol >= 0.0 && c.max_step > 0.0 && c.h_init > 0.0) {
        return Err(Error::InvalidParams("integrator controls must be positive".into()));
    }
    let sign = match c.direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let ctx = EventCtx {
        set: events,
        no_return: params.no_return_level(),
        floor: -c.y_floor_factor * params.tail_decay(),
        radius: c.radius_max,
    };
    let mut leg = Leg { chart: start.chart };
    if matches!(leg.chart, Chart::YProjPlus | Chart::YProjMinus) && events.y_zero {
        return Err(Error::Chart("Y-zero events are not defined in the Y projections".into()));
    }
    let storage = storage_chart(leg.chart);
    let mut u: Aug = [start.coords[0], start.coords[1], start.coords[2], start.s];
    if leg.chart == Chart::XProj && u[0] <= 0.0 {
        return Err(Error::Chart("x must be positive to integrate in the X projection".into()));
    }
    // s is the chart time; eta is tracked in u[3]
    let mut t = 0.0f64;
    let mut samples = vec![Sample { s: u[3], coords: to_storage(leg.chart, &u) }];
    let mut recorded = Vec::<Event>::new();
    let mut near_done = vec![false; events.near.len()];
    let mut evs = ctx.list(leg.chart);
    let mut gvals: Vec<f64> = evs.iter().map(|&e| ctx.g(e, leg, &u)).collect();
    let mut h = c.h_init / rate_eta(leg.chart, &u).max(1e-300);
    let mut steps = 0usize;
    let mut field = augmented_field(leg.chart, params, sign);
    let mut k1 = field(&u);
    let stop;
    'outer: loop {
        if steps >= c.max_steps {
            stop = StopReason::MaxSteps;
            break;
        }
        let h_cap = c.max_step / rate_eta(leg.chart, &u).abs().max(1e-300);
        h = h.min(h_cap);
        let remaining = c.s_max - sign * u[3];
        if remaining <= 1e-12 * c.s_max.abs().max(1.0) {
            stop = StopReason::SMax;
            break;
        }
        h = h.min(remaining / rate_eta(leg.chart, &u).abs().max(1e-300));
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { s: u[3], state: to_storage(leg.chart, &u) });
        }
        let st = dp_step(&field, &u, &k1, h, c);
        let finite = st.y1.iter().chain(st.k7.iter()).all(|v| v.is_finite());
        if !finite || st.err > 1.0 {
            let fac = if finite { (0.9 * st.err.powf(-0.2)).max(0.2) } else { 0.25 };
            h *= fac;
            if !finite && h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::NonFinite { s: u[3] });
            }
            continue;
        }
        steps += 1;
        let mut y1 = st.y1;
        let t1 = t + h;

        // events inside the step, in order
        let new_g: Vec<f64> = evs.iter().map(|&e| ctx.g(e, leg, &y1)).collect();
        let mut hits: Vec<(f64, usize)> = Vec::new();
        for (i, &e) in evs.iter().enumerate() {
            let (g0, g1) = (gvals[i], new_g[i]);
            let crossed = (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0);
            if !crossed {
                continue;
            }
            let rising = g1 > g0;
            if let Some(d) = ctx.direction(e) {
                if d != rising {
                    continue;
                }
            }
            if let Ev::Near(j) = e {
                if near_done[j] {
                    continue;
                }
            }
            let tol = c.event_tol / h.abs().max(1e-300);
            let theta = locate(|th| ctx.g(e, leg, &st.dense.eval(th)), 0.0, 1.0, g0, g1, tol);
            hits.push((theta, i));
        }
        hits.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut terminal: Option<(f64, StopReason)> = None;
        for &(theta, i) in &hits {
            let e = evs[i];
            let ua = st.dense.eval(theta);
            let coords = to_storage(leg.chart, &ua);
            let s_ev = ua[3];
            let rising = new_g[i] > gvals[i];
            let kind = match e {
                Ev::YZero => {
                    if rising == (sign > 0.0) { EventKind::YZeroUp } else { EventKind::YZeroDown }
                }
                Ev::NoReturn => EventKind::NoReturnCross,
                Ev::Surface => EventKind::SurfaceSCross,
                Ev::Near(j) => {
                    near_done[j] = true;
                    EventKind::NearCriticalPoint
                }
                Ev::Radius => EventKind::RadiusExceeded,
                Ev::Level => EventKind::LevelReached,
                Ev::Floor => EventKind::NoReturnCross,
            };
            let reason = match e {
                Ev::NoReturn if c.stop_on_no_return => Some(StopReason::NoReturn),
                Ev::Radius => Some(StopReason::Radius),
                Ev::Floor => Some(StopReason::YFloor),
                Ev::Level => Some(StopReason::Level),
                _ => None,
            };
            if e != Ev::Floor {
                let rate = match e {
                    Ev::Surface => {
                        let r = event_rate(storage, &coords, params);
                        if rising { r.abs() } else { -r.abs() }
                    }
                    _ => event_rate(storage, &coords, params),
                };
                recorded.push(Event { kind, s: s_ev, coords, rate });
            }
            if let Some(r) = reason {
                terminal = Some((theta, r));
                break;
            }
        }
        if let Some((theta, reason)) = terminal {
            let ua = st.dense.eval(theta);
            samples.push(Sample { s: ua[3], coords: to_storage(leg.chart, &ua) });
            stop = reason;
            break 'outer;
        }

        // keep non-negative coordinates non-negative
        for &i in leg.chart.nonnegative() {
            if y1[i] < 0.0 {
                if y1[i] >= -c.clamp_tol {
                    y1[i] = 0.0;
                } else {
                    return Err(Error::InvariantViolation(format!(
                        "coordinate {} = {:e} at s={}",
                        leg.chart.coord_names()[i],
                        y1[i],
                        y1[3]
                    )));
                }
            }
        }
        u = y1;
        t = t1;
        k1 = st.k7;
        gvals = new_g;
        samples.push(Sample { s: u[3], coords: to_storage(leg.chart, &u) });
        let fac = (0.9 * st.err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        h *= fac;

        // chart switching with hysteresis
        if let Some(sw) = c.chart_switch {
            let next = match leg.chart {
                Chart::Xyz if u[0] > sw => Some(Chart::XProj),
                Chart::XProj if u[0] > 2.0 / sw => Some(Chart::Xyz),
                _ => None,
            };
            if let Some(nc) = next {
                let rate_old = rate_eta(leg.chart, &u);
                let pt = ChartPoint { chart: leg.chart, coords: [u[0], u[1], u[2]], s: u[3] };
                let q = to_chart(&pt, nc)?;
                u = [q.coords[0], q.coords[1], q.coords[2], u[3]];
                leg = Leg { chart: nc };
                h *= rate_old / rate_eta(nc, &u);
                field = augmented_field(nc, params, sign);
                k1 = field(&u);
                evs = ctx.list(nc);
                gvals = evs.iter().map(|&e| ctx.g(e, leg, &u)).collect();
            }
        }
    }
    let mut traj = Trajectory { chart: storage, samples, events: recorded, stop, steps };
    if c.direction == Direction::Backward {
        traj.samples.reverse();
        traj.events.reverse();
    }
    Ok(traj)
}
