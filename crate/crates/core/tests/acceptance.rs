//! The twelve acceptance criteria, one PASS/FAIL line each.

use blowup::analyze::{barrier_flows, iso1, pln, Fate};
use blowup::integrate::EventKind;
use blowup::params::{critical_exponent, fujita_exponent, sobolev_exponent};
use blowup::phasespace::{
    closed_form_eigenvalues, closed_form_matrix, eigenpairs, jacobian, point_location, CriticalId,
};
use blowup::profiles::{
    curve_flux, edge_flux, fit_asymptotics, nonexistence_predicate, ode_residual, pohozaev, pohozaev_q,
    stationary_residual, Law, Profile,
};
use blowup::shooter::{
    default_grid, find_connection, find_deadcore, find_negative_sigma, sweep, ConnectionResult, Family,
    ShooterConfig,
};
use blowup::Params;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond { Ok(detail) } else { Err(detail) }
}

fn within(limit_s: u64, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    if t > Duration::from_secs(limit_s) {
        Err(format!("took {t:?}, limit {limit_s} s"))
    } else {
        Ok(t)
    }
}

fn prm(m: f64, n: u32, p: f64, sigma: f64) -> Params {
    Params::new(m, n, p, sigma).unwrap()
}

fn fig1() -> Params {
    prm(2.0, 5, 2.1, 0.5)
}

fn fig2() -> Params {
    prm(2.0, 5, 2.1, 0.1)
}

fn zero_sigma() -> Params {
    prm(2.0, 5, 2.8, 0.0)
}

/// A located connection together with the time its search took.
struct Found {
    result: Result<ConnectionResult, String>,
    elapsed: Duration,
}

impl Found {
    fn run(search: impl FnOnce() -> blowup::Result<ConnectionResult>) -> Self {
        let start = Instant::now();
        let result = search().map_err(|e| e.to_string());
        Found { result, elapsed: start.elapsed() }
    }

    fn get(&self) -> Result<&ConnectionResult, String> {
        self.result.as_ref().map_err(Clone::clone)
    }

    fn profile(&self) -> Result<Profile, String> {
        self.get()?.profile().map_err(|e| e.to_string())
    }
}

macro_rules! cached {
    ($name:ident, $body:expr) => {
        fn $name() -> &'static Found {
            static CELL: OnceLock<Found> = OnceLock::new();
            CELL.get_or_init(|| Found::run(|| $body))
        }
    };
}

cached!(fig1_k0, find_connection(&fig1(), Family::P0C, 0, None, &ShooterConfig::default()));
cached!(fig2_k0, find_connection(&fig2(), Family::P0C, 0, None, &ShooterConfig::default()));
cached!(fig2_k1, find_connection(&fig2(), Family::P0C, 1, None, &ShooterConfig::default()));
cached!(zero_k0, find_connection(&zero_sigma(), Family::P0C, 0, None, &ShooterConfig::default()));
cached!(zero_k1, find_connection(&zero_sigma(), Family::P0C, 1, None, &ShooterConfig::default()));
cached!(deadcore, find_deadcore(&fig2(), 0, &ShooterConfig::default()));
cached!(negative, find_negative_sigma(&prm(2.0, 3, 3.0, -1.0), &ShooterConfig::default()));

/// Random parameters with `m < p < p_s`.
fn random_params(rng: &mut ChaCha8Rng, dims: std::ops::RangeInclusive<u32>) -> Params {
    let m = rng.random_range(1.1..4.0);
    let n = rng.random_range(dims);
    let sigma = rng.random_range(-1.0..3.0);
    let top = sobolev_exponent(m, n, sigma).min_with(m + 5.0);
    let p = m + rng.random_range(0.05..0.95) * (top - m);
    prm(m, n, p, sigma)
}

/// Largest distance from each value to its nearest unused partner.
fn spectrum_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm() / x.norm().max(1.0)))
            .min_by(|u, v| u.1.total_cmp(&v.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ids = [CriticalId::P0, CriticalId::P1, CriticalId::P3, CriticalId::Q5, CriticalId::Q5Prime, CriticalId::Q1Prime];
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let q = random_params(&mut rng, 1..=8);
        for id in ids {
            let loc = point_location(id, &q).unwrap();
            let dim = loc.chart.dim();
            let numeric: Vec<Complex64> =
                eigenpairs(&jacobian(loc.chart, &loc.coords, &q), dim).iter().map(|e| e.value).collect();
            let printed: Vec<Complex64> =
                eigenpairs(&closed_form_matrix(id, &q).unwrap(), dim).iter().map(|e| e.value).collect();
            worst = worst.max(spectrum_gap(&numeric, &printed));
            if let Some(formula) = closed_form_eigenvalues(id, &q) {
                let formula: Vec<Complex64> = formula.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                worst = worst.max(spectrum_gap(&numeric, &formula));
            }
        }
    }
    let t = within(1, start)?;
    check(worst < 1e-10, format!("max eigenvalue gap {worst:.2e} over 100 parameter sets in {t:?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let q = prm(2.0, 5, 2.1, 0.0);
    let xi: Vec<f64> = (0..400).map(|i| 1e-3 * 1.03f64.powi(i)).collect();
    let constant = ode_residual(&Profile::constant(&q, xi).map_err(|e| e.to_string())?, &q).map_err(|e| e.to_string())?;
    let sob = prm(2.0, 5, 14.0 / 3.0, 0.0);
    let stationary = stationary_residual(1.0, &sob).map_err(|e| e.to_string())?;
    let mut flux: f64 = 0.0;
    for sigma in [0.0, 0.1, 0.5, 2.0] {
        let ps = sobolev_exponent(2.0, 5, sigma).finite().unwrap();
        for (_, h) in curve_flux(&prm(2.0, 5, ps, sigma), 200).map_err(|e| e.to_string())? {
            flux = flux.max(h.abs());
        }
    }
    let t = within(5, start)?;
    check(
        constant < 1e-12 && stationary < 1e-8 && flux < 1e-12,
        format!("constant {constant:.1e}, stationary {stationary:.1e}, curve flux {flux:.1e} in {t:?}"),
    )
}

fn minima_classes(q: &Params) -> Result<BTreeSet<usize>, String> {
    let grid = default_grid(q, Family::P0C);
    let shots = sweep(q, Family::P0C, &grid, &ShooterConfig::default()).map_err(|e| e.to_string())?;
    Ok(shots.iter().filter_map(|s| s.outcome.as_ref().ok()).map(|o| o.minima).collect())
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let classes = minima_classes(&fig1())?;
    let r = fig1_k0().get()?;
    let t = within(120, start)? + fig1_k0().elapsed;
    check(
        classes.contains(&0) && classes.contains(&1) && r.relative_width() < 1e-10 && r.q1_signature,
        format!(
            "classes {classes:?}, C* = {}, relative width {:.1e}, Q1 signature {} in {t:?}",
            r.parameter_star,
            r.relative_width(),
            r.q1_signature
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let classes = minima_classes(&fig2())?;
    let (a, b) = (fig2_k0().get()?, fig2_k1().get()?);
    let t = within(300, start)? + fig2_k0().elapsed + fig2_k1().elapsed;
    let distinct = (a.parameter_star - b.parameter_star).abs() > 1e-6;
    check(
        classes.len() >= 3 && a.oscillations == 0 && b.oscillations == 1 && distinct && a.q1_signature && b.q1_signature,
        format!("classes {classes:?}, C*(k=0) = {}, C*(k=1) = {} in {t:?}", a.parameter_star, b.parameter_star),
    )
}

fn criterion_5() -> Outcome {
    let (a, b) = (zero_k0().get()?, zero_k1().get()?);
    let t = zero_k0().elapsed + zero_k1().elapsed;
    check(
        a.oscillations == 0 && b.oscillations == 1 && a.q1_signature && b.q1_signature && t < Duration::from_secs(300),
        format!("C*(k=0) = {}, C*(k=1) = {} in {t:?}", a.parameter_star, b.parameter_star),
    )
}

fn criterion_6() -> Outcome {
    let all = [
        ("fig1 k=0", fig1_k0()),
        ("fig2 k=0", fig2_k0()),
        ("fig2 k=1", fig2_k1()),
        ("sigma=0 k=0", zero_k0()),
        ("sigma=0 k=1", zero_k1()),
        ("dead core", deadcore()),
        ("sigma<0", negative()),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, found) in all {
        let fit = fit_asymptotics(&found.profile()?, Law::TailQ1).map_err(|e| format!("{name}: {e}"))?;
        let err = fit.exponent_error().unwrap();
        worst = worst.max(err);
        parts.push(format!("{name} {:.3}", fit.exponent_fit));
    }
    check(worst < 0.02, format!("worst relative slope error {worst:.2e}: {}", parts.join(", ")))
}

fn criterion_7() -> Outcome {
    let found = deadcore();
    let profile = found.profile()?;
    let edge = profile.deadcore_edge.unwrap_or(0.0);
    let flux = edge_flux(&profile).map_err(|e| e.to_string())?;
    let fit = fit_asymptotics(&profile, Law::DeadcoreQ5).map_err(|e| e.to_string())?;
    let pre = fit.prefactor_error().unwrap();
    check(
        edge > 0.0 && flux.abs() < 1e-6 && pre < 0.05 && found.elapsed < Duration::from_secs(300),
        format!(
            "edge {edge:.5}, flux {flux:.1e}, prefactor {:.6} vs {:.6} in {:?}",
            fit.prefactor_fit,
            fit.expected_prefactor.unwrap(),
            found.elapsed
        ),
    )
}

fn criterion_8() -> Outcome {
    let profile = fig2_k0().profile()?;
    let report = pohozaev(&profile, &fig2()).map_err(|e| e.to_string())?;
    let q = pohozaev_q(&fig2());
    check(
        report.converged && report.relative_residual < 1e-3 && (q + 13.47).abs() < 1e-10,
        format!(
            "T1 {:.3}, T2 {:.3}, T3 {:.3}, relative residual {:.1e}, Q = {q}",
            report.t1, report.t2, report.t3, report.relative_residual
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let q = prm(2.0, 5, 2.1, 1.0);
    let cfg = ShooterConfig::default();
    let grid = blowup::shooter::log_grid(1e-3, 1e3, 100);
    let mut compact = 0;
    let mut worst_y: f64 = 0.0;
    for &c in &grid {
        let out = blowup::shooter::shoot(&q, Family::P0C, c, &cfg, true).map_err(|e| e.to_string())?;
        let traj = out.trajectory.unwrap();
        let ev = traj.events_of(EventKind::NoReturnCross).next();
        if out.terminal.fate == Fate::Q3CompactSupport && ev.is_some() {
            compact += 1;
            worst_y = worst_y.max((ev.unwrap().coords[1] + 30.0).abs());
        }
    }
    let ps: Vec<f64> = (1..50).map(|i| 2.0 + 2.8 * i as f64 / 50.0).collect();
    let all_true = ps.iter().all(|&p| nonexistence_predicate(&prm(2.0, 5, p, 12.0)).unwrap().verdict);
    let all_false = ps.iter().all(|&p| !nonexistence_predicate(&prm(2.0, 5, p, 0.1)).unwrap().verdict);
    let t = within(120, start)?;
    check(
        compact == 100 && worst_y < 1e-6 && all_true && all_false,
        format!(
            "{compact}/100 compact with no-return crossing (|Y+30| <= {worst_y:.1e}), predicate true at sigma=12: {all_true}, false at sigma=0.1: {all_false} in {t:?}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let found = negative();
    let r = found.get()?;
    let orbit = r.orbit.as_ref().ok_or("no orbit")?;
    let ascending = orbit.trajectory.events_of(EventKind::YZeroUp).count();
    let positive_y = orbit.trajectory.samples.iter().filter(|s| s.coords[1] > 0.0).count();
    let profile = found.profile()?;
    let decreasing = profile.f.windows(2).all(|w| w[1] <= w[0]);
    let fit = fit_asymptotics(&profile, Law::TailQ1).map_err(|e| e.to_string())?;
    check(
        ascending == 0 && positive_y == 0 && decreasing && (fit.exponent_fit + 1.0).abs() < 0.02
            && found.elapsed < Duration::from_secs(120),
        format!(
            "C* = {}, ascending crossings {ascending}, profile decreasing {decreasing}, tail slope {:.4} in {:?}",
            r.parameter_star, fit.exponent_fit, found.elapsed
        ),
    )
}

fn criterion_11() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples = 10_000;
    let mut violations = [0usize; 5];

    // F1 on the plane Z = pln(X, Y) with 0 < Y <= X/N, p > p_F
    for _ in 0..samples {
        let q = loop {
            let q = random_params(&mut rng, 1..=8);
            if q.p > fujita_exponent(q.m, q.n, q.sigma) {
                break q;
            }
        };
        let x = rng.random_range(1e-3..50.0);
        let y = x / q.dim() * rng.random_range(1e-6..=1.0);
        let z = pln(x, y, &q);
        if z >= 0.0 && barrier_flows(&[x, y, z], &q).f1 <= 0.0 {
            violations[0] += 1;
        }
    }
    // F2 in the strip below Y = 0 when (N+sigma)(m-1) - 2 p sigma < 0
    for _ in 0..samples {
        let q = loop {
            let mut q = random_params(&mut rng, 1..=8);
            q.sigma = rng.random_range(0.5..6.0);
            let top = sobolev_exponent(q.m, q.n, q.sigma).min_with(q.m + 5.0);
            q.p = q.m + rng.random_range(0.05..0.95) * (top - q.m);
            if (q.dim() + q.sigma) * (q.m - 1.0) - 2.0 * q.p * q.sigma < 0.0 {
                break q;
            }
        };
        let x = rng.random_range(1e-3..50.0);
        let y = -q.tail_decay() * rng.random_range(1e-6..1.0 - 1e-6);
        if barrier_flows(&[x, y, rng.random_range(0.0..50.0)], &q).f2 <= 0.0 {
            violations[1] += 1;
        }
    }
    // Fplane2 when p <= p_c or N <= 2
    for _ in 0..samples {
        let q = loop {
            let q = random_params(&mut rng, 1..=8);
            if critical_exponent(q.m, q.n, q.sigma).finite().is_none_or(|pc| q.p <= pc) {
                break q;
            }
        };
        let x = rng.random_range(0.0..50.0);
        let z = rng.random_range(1e-9..50.0);
        if barrier_flows(&[x, -q.tail_decay(), z], &q).fplane2 >= 0.0 {
            violations[2] += 1;
        }
    }
    // E on the cylinder for p_c < p < p_s, outside the strip where its second term changes sign
    for _ in 0..samples {
        let (q, y) = loop {
            let m = rng.random_range(1.1..4.0);
            let n = rng.random_range(3..=8);
            let sigma = rng.random_range(-1.0..3.0);
            let pc = critical_exponent(m, n, sigma).finite().unwrap();
            let ps = sobolev_exponent(m, n, sigma).finite().unwrap();
            let q = prm(m, n, pc + rng.random_range(0.01..0.99) * (ps - pc), sigma);
            let nd = q.dim();
            let y = -(nd - 2.0) / m * rng.random_range(1e-6..1.0 - 1e-6);
            let (a, b) = (-q.tail_decay(), -(nd - 2.0) / (2.0 * m));
            if !(y > a.min(b) && y < a.max(b)) {
                break (q, y);
            }
        };
        let x = rng.random_range(0.0..50.0);
        if barrier_flows(&[x, y, iso1(y, &q)], &q).e <= 0.0 {
            violations[3] += 1;
        }
    }
    // H has the sign of p_s - p for -(N-2)/m < Y < 0 and vanishes at p_s
    for _ in 0..samples {
        let q = random_params(&mut rng, 3..=8);
        let nd = q.dim();
        let y = -(nd - 2.0) / q.m * rng.random_range(1e-6..1.0 - 1e-6);
        let h = barrier_flows(&[0.0, y, iso1(y, &q)], &q).h;
        let ps = sobolev_exponent(q.m, q.n, q.sigma).finite().unwrap();
        let at_ps = barrier_flows(&[0.0, y, 0.0], &q.with_p(ps).unwrap()).h;
        if h <= 0.0 || at_ps.abs() > 1e-12 {
            violations[4] += 1;
        }
    }
    let t = within(10, start)?;
    check(
        violations.iter().all(|&v| v == 0),
        format!("violations F1/F2/Fplane2/E/H = {violations:?} over {samples} points each in {t:?}"),
    )
}

fn criterion_12() -> Outcome {
    let base = ShooterConfig::default();
    let tight = ShooterConfig { controls: base.controls.tightened(10.0), ..base.clone() };
    let limit = 10.0 * base.bisect_tol;
    let runs = [
        ("fig1 k=0", fig1(), 0, fig1_k0()),
        ("fig2 k=0", fig2(), 0, fig2_k0()),
        ("fig2 k=1", fig2(), 1, fig2_k1()),
        ("sigma=0 k=0", zero_sigma(), 0, zero_k0()),
        ("sigma=0 k=1", zero_sigma(), 1, zero_k1()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, q, k, found) in runs {
        let a = found.get()?;
        let b = find_connection(&q, Family::P0C, k, None, &tight).map_err(|e| format!("{name}: {e}"))?;
        let shift = (a.parameter_star - b.parameter_star).abs() / a.parameter_star;
        ok &= shift < limit && a.minima_at_ends == b.minima_at_ends && a.oscillations == b.oscillations;
        parts.push(format!("{name} {shift:.1e}"));
    }
    check(ok, format!("relative C* shifts (limit {limit:.0e}): {}", parts.join(", ")))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("linearization certificates", criterion_1),
        ("exact-solution residuals", criterion_2),
        ("figure 1 reproduction", criterion_3),
        ("figure 2 multiplicity", criterion_4),
        ("sigma = 0 multiplicity", criterion_5),
        ("tail law", criterion_6),
        ("dead-core profile", criterion_7),
        ("pohozaev identity", criterion_8),
        ("figure 3 non-existence", criterion_9),
        ("negative sigma", criterion_10),
        ("barrier sign certificates", criterion_11),
        ("numerical robustness", criterion_12),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                println!("criterion {:>2} {name}: FAIL ({detail})", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
