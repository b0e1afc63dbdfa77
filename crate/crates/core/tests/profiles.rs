use blowup::integrate::{integrate, EventSet, Trajectory};
use blowup::params::sobolev_exponent;
use blowup::phasespace::ChartPoint;
use blowup::profiles::{pohozaev, reconstruct, round_trip_error, Profile, Source};
use blowup::shooter::{find_connection, find_deadcore, shoot, Family, ShooterConfig};
use blowup::Params;
use proptest::prelude::*;

fn fig2() -> Params {
    Params::new(2.0, 5, 2.1, 0.1).unwrap()
}

/// Every other grid point, keeping both ends.
fn thinned(profile: &Profile) -> Profile {
    let n = profile.len();
    let keep: Vec<usize> = (0..n).filter(|i| i % 2 == 0 || *i == n - 1).collect();
    let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect();
    Profile { xi: pick(&profile.xi), f: pick(&profile.f), fprime: pick(&profile.fprime), ..profile.clone() }
}

#[test]
fn connection_profiles_round_trip() {
    let cfg = ShooterConfig::default();
    for k in [0, 1] {
        let r = find_connection(&fig2(), Family::P0C, k, None, &cfg).unwrap();
        let traj = &r.orbit.as_ref().unwrap().trajectory;
        let profile = r.profile().unwrap();
        assert!(profile.f.iter().all(|&f| f >= 0.0));
        assert!(profile.xi.windows(2).all(|w| w[1] > w[0]));
        assert!(round_trip_error(&profile, traj) < 1e-6);
    }
    let dead = find_deadcore(&fig2(), 0, &cfg).unwrap();
    let traj = &dead.orbit.as_ref().unwrap().trajectory;
    assert!(round_trip_error(&dead.profile().unwrap(), traj) < 1e-6);
}

#[test]
fn restarting_the_orbit_leaves_the_profile_unchanged() {
    let q = fig2();
    let c = 0.7;
    let cfg = ShooterConfig::default();
    let first = shoot(&q, Family::P0C, c, &cfg, true).unwrap().trajectory.unwrap();
    // restart from an interior sample, so eta is measured from a different origin
    let mid = first.samples[first.samples.len() / 3];
    let restarted: Trajectory = integrate(&ChartPoint::xyz(mid.coords[0], mid.coords[1], mid.coords[2]), &q, &cfg.controls, &EventSet::standard()).unwrap();
    assert!(restarted.samples[0].s == 0.0 && mid.s != 0.0);
    let a = reconstruct(&first, &q, Source::P0 { c }).unwrap();
    let b = reconstruct(&restarted, &q, Source::P0 { c }).unwrap();
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for (i, &xi) in b.xi.iter().enumerate().step_by(5) {
        let j = a.xi.partition_point(|&v| v < xi);
        if j == 0 || j >= a.len() {
            continue;
        }
        let h = a.xi[j] - a.xi[j - 1];
        let t = (xi - a.xi[j - 1]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let fa = (2.0 * t3 - 3.0 * t2 + 1.0) * a.f[j - 1]
            + (t3 - 2.0 * t2 + t) * h * a.fprime[j - 1]
            + (-2.0 * t3 + 3.0 * t2) * a.f[j]
            + (t3 - t2) * h * a.fprime[j];
        worst = worst.max((fa - b.f[i]).abs() / b.f[i]);
        compared += 1;
    }
    assert!(compared > 20);
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn pohozaev_terms_have_the_expected_signs() {
    let cfg = ShooterConfig::default();
    for (q, k) in [(fig2(), 0), (fig2(), 1), (Params::new(2.0, 5, 2.1, 0.5).unwrap(), 0)] {
        let profile = find_connection(&q, Family::P0C, k, None, &cfg).unwrap().profile().unwrap();
        let rep = pohozaev(&profile, &q).unwrap();
        assert!(rep.converged);
        assert!(rep.t1 > 0.0 && rep.t2 >= 0.0, "{rep:?}");
        assert!(rep.relative_residual < 1e-3, "{rep:?}");
    }
}

#[test]
fn quadrature_is_resolved() {
    let cfg = ShooterConfig::default();
    let q = fig2();
    for k in [0, 1] {
        let profile = find_connection(&q, Family::P0C, k, None, &cfg).unwrap().profile().unwrap();
        let fine = pohozaev(&profile, &q).unwrap();
        let coarse = pohozaev(&thinned(&profile), &q).unwrap();
        for (a, b) in [(fine.t1, coarse.t1), (fine.t2, coarse.t2), (fine.t3, coarse.t3)] {
            assert!((a - b).abs() < 1e-6 * a.abs(), "{a} vs {b}");
        }
    }
}

proptest! {
    #[test]
    fn gradient_coefficient_positive_below_sobolev(m in 1.05f64..5.0, n in 3u32..10, sigma in -1.5f64..10.0, u in 0.01f64..0.99) {
        let ps = sobolev_exponent(m, n, sigma).finite().unwrap();
        let p = m + u * (ps - m);
        let nf = n as f64;
        let coefficient = (m * (nf + 2.0 * sigma + 2.0) - p * (nf - 2.0)) / (2.0 * (m + p));
        prop_assert!(coefficient > 0.0);
    }
}

#[test]
fn reconstructed_amplitude_matches_the_seed_map() {
    let cfg = ShooterConfig { eps_p0: 1e-6, ..Default::default() };
    for q in [fig2(), Params::new(2.0, 5, 2.8, 0.0).unwrap()] {
        for c in [0.05, 0.7, 5.0] {
            let traj = shoot(&q, Family::P0C, c, &cfg, true).unwrap().trajectory.unwrap();
            let profile = reconstruct(&traj, &q, Source::P0 { c }).unwrap();
            let amplitude = profile.amplitude.unwrap();
            assert!((profile.f[0] / amplitude - 1.0).abs() < 1e-2);
        }
    }
}
