use blowup::integrate::{integrate, Controls, EventSet, Trajectory};
use blowup::manifolds::{seed_p0, SeedOrder};
use blowup::phasespace::{vf, Chart};
use blowup::Params;

fn fig2() -> Params {
    Params::new(2.0, 5, 2.1, 0.1).unwrap()
}

fn run(c: f64, controls: &Controls) -> Trajectory {
    let q = fig2();
    let seed = seed_p0(c, 1e-5, &q, SeedOrder::First).unwrap();
    integrate(&seed.point, &q, controls, &EventSet::standard()).unwrap()
}

#[test]
fn event_times_converge_with_tolerance() {
    for base in [1e-8, 1e-10] {
        let coarse = Controls { rel_tol: base, abs_tol: base * 1e-3, ..Default::default() };
        let fine = coarse.tightened(2.0);
        for c in [0.01, 0.3, 2.0, 50.0] {
            let (a, b) = (run(c, &coarse), run(c, &fine));
            assert_eq!(a.events.len(), b.events.len(), "C={c}");
            for (ea, eb) in a.events.iter().zip(&b.events) {
                assert_eq!(ea.kind, eb.kind);
                let shift = (ea.s - eb.s).abs() / ea.s.abs().max(1.0);
                assert!(shift < 10.0 * fine.rel_tol, "C={c} {:?}: shift {shift:e}", ea.kind);
            }
        }
    }
}

/// `Y` at the given `X` by cubic Hermite interpolation over an increasing
/// stretch of `X`, with slopes `dY/dX` from the field.
fn y_at_x(traj: &Trajectory, x: f64, q: &Params) -> Option<f64> {
    let slope = |u: &[f64; 3]| {
        let f = vf(Chart::Xyz, u, q);
        f[1] / f[0]
    };
    traj.samples.windows(2).find_map(|w| {
        let (a, b) = (w[0].coords, w[1].coords);
        if !(a[0] <= x && x <= b[0] && b[0] > a[0]) {
            return None;
        }
        let h = b[0] - a[0];
        let t = (x - a[0]) / h;
        let (t2, t3) = (t * t, t * t * t);
        Some(
            (2.0 * t3 - 3.0 * t2 + 1.0) * a[1]
                + (t3 - 2.0 * t2 + t) * h * slope(&a)
                + (-2.0 * t3 + 3.0 * t2) * b[1]
                + (t3 - t2) * h * slope(&b),
        )
    })
}

#[test]
fn projected_chart_agrees_with_finite_chart() {
    let finite = Controls { chart_switch: None, max_step: 1e-3, ..Default::default() };
    let switched = Controls { chart_switch: Some(0.5), max_step: 1e-3, ..Default::default() };
    let q = fig2();
    for c in [0.05, 2.9] {
        let (a, b) = (run(c, &finite), run(c, &switched));
        let x_top = a.samples.iter().map(|s| s.coords[0]).fold(0.0, f64::max).min(50.0);
        let mut worst: f64 = 0.0;
        for i in 1..200 {
            let x = 0.6 + (x_top - 0.6) * i as f64 / 200.0;
            if let (Some(ya), Some(yb)) = (y_at_x(&a, x, &q), y_at_x(&b, x, &q)) {
                worst = worst.max((ya - yb).abs() / (1.0 + ya.abs()));
            }
        }
        assert!(worst < 1e-6, "C={c}: {worst:e}");
    }
}
