use blowup::analyze::{Fate, SurfaceS};
use blowup::integrate::EventKind;
use blowup::manifolds::trace_r0;
use blowup::phasespace::Chart;
use blowup::shooter::{find_connection, log_grid, shoot, sweep, Family, ShooterConfig};
use blowup::{Error, Params};
use std::sync::OnceLock;

fn fig1() -> Params {
    Params::new(2.0, 5, 2.1, 0.5).unwrap()
}

fn fig2() -> Params {
    Params::new(2.0, 5, 2.1, 0.1).unwrap()
}

/// Boundaries of the zero- and one-minimum classes at the fig2 parameters.
fn fig2_boundaries() -> (f64, f64) {
    static CELL: OnceLock<(f64, f64)> = OnceLock::new();
    *CELL.get_or_init(|| {
        let cfg = ShooterConfig::default();
        let c0 = find_connection(&fig2(), Family::P0C, 0, None, &cfg).unwrap().parameter_star;
        let c1 = find_connection(&fig2(), Family::P0C, 1, None, &cfg).unwrap().parameter_star;
        (c0, c1)
    })
}

#[test]
fn minima_staircase_between_boundaries() {
    let (c0, c1) = fig2_boundaries();
    assert!(c1 < c0);
    let entries = sweep(&fig2(), Family::P0C, &log_grid(1e-2, 1e2, 80), &ShooterConfig::default()).unwrap();
    for e in &entries {
        let o = e.outcome.as_ref().unwrap();
        let c = e.parameter;
        if (c / c0 - 1.0).abs() < 1e-6 || (c / c1 - 1.0).abs() < 1e-6 {
            continue;
        }
        if c > c0 {
            assert_eq!(o.minima, 0, "C={c}");
        } else if c > c1 {
            assert_eq!(o.minima, 1, "C={c}");
        } else {
            assert!(o.minima >= 2, "C={c}: {}", o.minima);
        }
        if o.terminal.fate == Fate::Q3CompactSupport {
            assert!(o.count.n_max >= o.count.n_min);
        }
    }
}

#[test]
fn bisection_is_reproducible() {
    let cfg = ShooterConfig::default();
    let a = find_connection(&fig1(), Family::P0C, 0, None, &cfg).unwrap();
    let b = find_connection(&fig1(), Family::P0C, 0, None, &cfg).unwrap();
    assert_eq!(a.parameter_star.to_bits(), b.parameter_star.to_bits());
    assert_eq!(a.bracket, b.bracket);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn bracket_ends_disagree() {
    let cfg = ShooterConfig::default();
    for k in [0, 1] {
        let r = find_connection(&fig2(), Family::P0C, k, None, &cfg).unwrap();
        let (lo, hi) = r.minima_at_ends;
        assert!((lo == k) != (hi == k), "k={k}: {lo} {hi}");
        assert!(lo.max(hi) > k);
        let ends = [&r.fate_at_bracket_ends.0, &r.fate_at_bracket_ends.1];
        let compact = [lo, hi].iter().zip(ends).find(|(m, _)| **m == k).unwrap().1;
        assert_eq!(compact.fate, Fate::Q3CompactSupport);
        assert!(r.bracket.0 <= r.parameter_star && r.parameter_star <= r.bracket.1);
    }
}

#[test]
fn too_many_minima_has_no_bracket() {
    let err = find_connection(&fig2(), Family::P0C, 9, None, &ShooterConfig::default()).unwrap_err();
    assert!(matches!(err, Error::NoBracket(_)), "{err}");
}

#[test]
fn surface_crossings_alternate() {
    let q = fig2();
    let surface = SurfaceS::from_r0(&trace_r0(&q, 1e-6).unwrap(), &q).unwrap();
    let cfg = ShooterConfig { surface: Some(surface), ..Default::default() };
    let mut crossing_runs = 0;
    for c in log_grid(1e-2, 1e2, 30) {
        let out = shoot(&q, Family::P0C, c, &cfg, true).unwrap();
        let traj = out.trajectory.unwrap();
        let rates: Vec<f64> = traj.events_of(EventKind::SurfaceSCross).map(|e| e.rate).collect();
        if rates.len() > 1 {
            crossing_runs += 1;
        }
        assert!(rates.windows(2).all(|w| w[0] * w[1] < 0.0), "C={c}: {rates:?}");
    }
    assert!(crossing_runs > 0);
}

#[test]
fn connection_orbit_z_grows_inside_the_band() {
    let cfg = ShooterConfig::default();
    for (q, k) in [(fig1(), 0), (fig2(), 1)] {
        let r = find_connection(&q, Family::P0C, k, None, &cfg).unwrap();
        let orbit = r.orbit.expect("connection orbit");
        assert_eq!(orbit.trajectory.chart, Chart::Xyz);
        let lower = -(q.sigma + 2.0) / (q.p - q.m);
        let upper = 2.0 / (q.m - 1.0);
        let inside = |y: f64| lower < y && y < upper;
        for w in orbit.trajectory.samples.windows(2) {
            let (a, b) = (w[0].coords, w[1].coords);
            if inside(a[1]) && inside(b[1]) {
                assert!(b[2] >= a[2], "Z fell from {} to {} at Y={}", a[2], b[2], a[1]);
            }
        }
    }
}
