use crate::config::RunConfig;
use crate::emit::{Cell, Document, RecordBuilder};
use crate::InvalidInput;
use anyhow::Result;
use blowup::integrate::{EventKind, Trajectory};
use blowup::params::{derive, exponent_table, pohozaev_thresholds, Extended};
use blowup::phasespace::critical_points;
use blowup::profiles::{
    edge_flux, fit_asymptotics, nonexistence_predicate, ode_residuals, pohozaev, pohozaev_q, reconstruct,
    Law, Profile, Source,
};
use blowup::shooter::{
    default_range, family_grid, find_connection, find_negative_sigma, shoot, sweep, ConnectionResult, Family,
    ShooterConfig,
};
use blowup::Params;

fn extended(x: Extended<f64>) -> Cell {
    Cell::Num(x.to_f64())
}

pub fn family(config: &RunConfig) -> Result<Family> {
    Ok(config.options.family.as_deref().unwrap_or("P0_C").parse()?)
}

pub fn exponents(config: &RunConfig) -> Result<Vec<Document>> {
    let q = config.inspection_params()?;
    let tab = exponent_table(&q);
    let mut rec = RecordBuilder::default();
    rec.put("p_s", extended(tab.p_s))
        .put("p_c", extended(tab.p_c))
        .put("p_F", tab.p_f)
        .put("sigma_star", tab.sigma_star)
        .put("sigma_lower", tab.sigma_lower)
        .put("sigma_c", tab.sigma_c)
        .put("K_mN", tab.k_mn);
    let th = pohozaev_thresholds(&q);
    rec.put("p1_poh", th.p1_poh).put("p2_barrier", th.p2_barrier);
    if config.params.p.is_some() {
        let d = derive(&q)?;
        rec.put("alpha", d.alpha).put("beta", d.beta).put("L", d.l).put("Q", pohozaev_q(&q));
    }
    Ok(vec![rec.finish("exponents")])
}

pub fn points(config: &RunConfig) -> Result<Vec<Document>> {
    let q = config.inspection_params()?;
    let mut rows = Vec::new();
    for info in critical_points(&q) {
        let (chart, coords) = match &info.coords {
            Some(pt) => (format!("{:?}", pt.chart), pt.coords.map(Cell::Num)),
            None => ("infinity".to_string(), [Cell::Empty, Cell::Empty, Cell::Empty]),
        };
        let [c0, c1, c2] = coords;
        let mut row = vec![
            Cell::from(format!("{:?}", info.id)),
            info.exists.into(),
            chart.into(),
            c0,
            c1,
            c2,
            info.kind.map(|k| format!("{k:?}")).into(),
            info.unstable_dim.into(),
            info.stable_dim.into(),
            info.center_dim.into(),
        ];
        for i in 0..3 {
            match info.eigenpairs.get(i) {
                Some(e) => row.extend([Cell::Num(e.value.re), Cell::Num(e.value.im)]),
                None => row.extend([Cell::Empty, Cell::Empty]),
            }
        }
        rows.push(row);
    }
    let cols = [
        "id", "exists", "chart", "c1", "c2", "c3", "kind", "unstable", "stable", "center", "ev1_re", "ev1_im",
        "ev2_re", "ev2_im", "ev3_re", "ev3_im",
    ];
    Ok(vec![Document::table("points", &cols, rows)])
}

pub fn trajectory_doc(name: &str, traj: &Trajectory) -> Document {
    let dim = traj.chart.dim();
    let mut cols = vec!["s"];
    cols.extend(traj.chart.coord_names());
    let rows = traj
        .samples
        .iter()
        .map(|smp| {
            let mut row = vec![Cell::Num(smp.s)];
            row.extend(smp.coords[..dim].iter().map(|&c| Cell::Num(c)));
            row
        })
        .collect();
    Document::table(name, &cols, rows)
}

pub fn profile_doc(name: &str, profile: &Profile) -> Document {
    let rows = (0..profile.len())
        .map(|i| vec![Cell::Num(profile.xi[i]), Cell::Num(profile.f[i]), Cell::Num(profile.fprime[i])])
        .collect();
    Document::table(name, &["xi", "f", "fprime"], rows)
}

fn source_of(family: Family, parameter: f64) -> Source {
    match family {
        Family::P0C => Source::P0 { c: parameter },
        Family::Q5Theta => Source::Q5 { theta: parameter },
        Family::P3P => Source::P3,
    }
}

fn family_params(family: Family, parameter: f64, params: &Params) -> Result<Params> {
    Ok(if family == Family::P3P { params.with_p(parameter)? } else { *params })
}

pub fn shoot_cmd(config: &RunConfig) -> Result<Vec<Document>> {
    let params = config.params()?;
    let fam = family(config)?;
    let parameter = config
        .options
        .param
        .ok_or_else(|| InvalidInput("shoot needs --param".into()))?;
    let out = shoot(&params, fam, parameter, &config.shooter(), true)?;
    let traj = out.trajectory.as_ref().expect("trajectory kept");
    let mut rec = RecordBuilder::default();
    rec.put("family", fam.to_string())
        .put("parameter", parameter)
        .put("minima", out.minima)
        .put("n_max", out.count.n_max)
        .put("n_min", out.count.n_min)
        .put("tangencies", out.count.tangencies)
        .put("fate", format!("{:?}", out.terminal.fate))
        .put("no_return", out.terminal.evidence.no_return)
        .put("stop", format!("{:?}", out.terminal.evidence.stop))
        .put("x_max", out.terminal.evidence.x_max)
        .put("samples", traj.samples.len());
    for (name, v) in ["X_end", "Y_end", "Z_end"].iter().zip(traj.last().coords) {
        rec.put(name, v);
    }
    if let Some(ev) = traj.events_of(EventKind::NoReturnCross).next() {
        rec.put("no_return_Y", ev.coords[1]);
    }
    let mut docs = vec![trajectory_doc("trajectory", traj)];
    match reconstruct(traj, &family_params(fam, parameter, &params)?, source_of(fam, parameter)) {
        Ok(profile) => docs.push(profile_doc("profile", &profile)),
        Err(e) => {
            rec.put("profile_error", e.to_string());
        }
    }
    docs.insert(0, rec.finish("shot"));
    Ok(docs)
}

pub fn sweep_grid(config: &RunConfig, params: &Params, fam: Family) -> Vec<f64> {
    let (dlo, dhi) = default_range(params, fam);
    let lo = config.options.lo.unwrap_or(dlo);
    let hi = config.options.hi.unwrap_or(dhi);
    family_grid(fam, lo, hi, config.options.points.unwrap_or(100))
}

pub fn sweep_cmd(config: &RunConfig) -> Result<Vec<Document>> {
    let params = config.params()?;
    let fam = family(config)?;
    let grid = sweep_grid(config, &params, fam);
    let rows = sweep(&params, fam, &grid, &config.shooter())?
        .into_iter()
        .map(|entry| match entry.outcome {
            Ok(o) => vec![
                Cell::Num(entry.parameter),
                o.count.n_max.into(),
                o.count.n_min.into(),
                format!("{:?}", o.terminal.fate).into(),
            ],
            Err(_) => vec![Cell::Num(entry.parameter), Cell::Empty, Cell::Empty, "Error".into()],
        })
        .collect();
    Ok(vec![Document::table("sweep", &["param", "n_max", "n_min", "fate"], rows)])
}

fn hint(config: &RunConfig) -> Result<Option<(f64, f64)>> {
    match (config.options.hint_lo, config.options.hint_hi) {
        (Some(a), Some(b)) if a < b => Ok(Some((a, b))),
        (None, None) => Ok(None),
        _ => Err(InvalidInput("--hint-lo and --hint-hi must be given together with hint-lo < hint-hi".into()).into()),
    }
}

/// Run the connection search the configuration asks for.
pub fn search(config: &RunConfig, fam: Family, cfg: &ShooterConfig) -> Result<ConnectionResult> {
    let params = config.params()?;
    let k = config.options.minima.unwrap_or(0);
    if params.sigma < 0.0 && fam == Family::P0C {
        return Ok(find_negative_sigma(&params, cfg)?);
    }
    Ok(find_connection(&params, fam, k, hint(config)?, cfg)?)
}

fn origin_law(result: &ConnectionResult) -> Law {
    match result.family {
        Family::P0C if result.params.sigma < 0.0 => Law::OriginP0neg,
        Family::P0C => Law::OriginP0,
        Family::Q5Theta => Law::DeadcoreQ5,
        Family::P3P => Law::OriginP3,
    }
}

pub fn connection_docs(result: &ConnectionResult) -> (RecordBuilder, Vec<Document>, Option<Profile>) {
    let mut rec = RecordBuilder::default();
    rec.put("family", result.family.to_string())
        .put("m", result.params.m)
        .put("N", result.params.n as usize)
        .put("p", result.params.p)
        .put("sigma", result.params.sigma)
        .put("parameter_star", result.parameter_star)
        .put("bracket_lo", result.bracket.0)
        .put("bracket_hi", result.bracket.1)
        .put("relative_width", result.relative_width())
        .put("minima", result.oscillations)
        .put("minima_lo", result.minima_at_ends.0)
        .put("minima_hi", result.minima_at_ends.1)
        .put("fate_lo", format!("{:?}", result.fate_at_bracket_ends.0.fate))
        .put("fate_hi", format!("{:?}", result.fate_at_bracket_ends.1.fate))
        .put("q1_signature", result.q1_signature)
        .put("signature_x", result.signature_x)
        .put("iterations", result.iterations);
    let mut docs = Vec::new();
    let mut kept = None;
    if let Some(orbit) = &result.orbit {
        rec.put("x_match", orbit.x_match).put("junction_defect", orbit.junction_defect);
        docs.push(trajectory_doc("orbit", &orbit.trajectory));
    }
    match result.profile() {
        Ok(profile) => {
            if let Ok(fit) = fit_asymptotics(&profile, Law::TailQ1) {
                rec.put("tail_exponent", fit.exponent_fit).put("tail_expected", fit.expected_exponent);
            }
            if let Ok(fit) = fit_asymptotics(&profile, origin_law(result)) {
                rec.put("origin_exponent", fit.exponent_fit)
                    .put("origin_prefactor", fit.prefactor_fit)
                    .put("origin_expected_prefactor", fit.expected_prefactor);
            }
            if let Ok(res) = ode_residuals(&profile, &result.params) {
                let worst = res.iter().filter(|r| r.resolved()).map(|r| r.residual).fold(0.0, f64::max);
                rec.put("ode_residual_max", worst);
            }
            docs.push(profile_doc("profile", &profile));
            kept = Some(profile);
        }
        Err(e) => {
            rec.put("profile_error", e.to_string());
        }
    }
    (rec, docs, kept)
}

pub fn find_cmd(config: &RunConfig) -> Result<Vec<Document>> {
    let result = search(config, family(config)?, &config.shooter())?;
    let (rec, mut docs, _) = connection_docs(&result);
    docs.insert(0, rec.finish("connection"));
    Ok(docs)
}

pub fn deadcore_cmd(config: &RunConfig) -> Result<Vec<Document>> {
    let result = search(config, Family::Q5Theta, &config.shooter())?;
    let (mut rec, mut docs, profile) = connection_docs(&result);
    if let Some(profile) = profile {
        rec.put("edge", profile.deadcore_edge);
        if let Ok(flux) = edge_flux(&profile) {
            rec.put("edge_flux", flux);
        }
    }
    docs.insert(0, rec.finish("deadcore"));
    Ok(docs)
}

pub fn pohozaev_cmd(config: &RunConfig) -> Result<Vec<Document>> {
    let fam = family(config)?;
    let result = search(config, fam, &config.shooter())?;
    let profile = result.profile()?;
    let report = pohozaev(&profile, &result.params)?;
    let mut rec = RecordBuilder::default();
    rec.put("parameter_star", result.parameter_star)
        .put("minima", result.oscillations)
        .put("T1", report.t1)
        .put("T2", report.t2)
        .put("T3", report.t3)
        .put("Q", report.q_value)
        .put("residual", report.residual)
        .put("relative_residual", report.relative_residual)
        .put("converged", report.converged);
    for (i, share) in report.tail_completion.iter().enumerate() {
        rec.put(&format!("tail_share_T{}", i + 1), *share);
    }
    Ok(vec![rec.finish("pohozaev"), profile_doc("profile", &profile)])
}

pub fn nonexist_cmd(config: &RunConfig) -> Result<Vec<Document>> {
    let params = config.params()?;
    let v = nonexistence_predicate(&params)?;
    let th = pohozaev_thresholds(&params);
    let tab = exponent_table(&params);
    let mut rec = RecordBuilder::default();
    rec.put("verdict", v.verdict)
        .put("criterion", format!("{:?}", v.criterion))
        .put("pohozaev_range", v.pohozaev_range)
        .put("barrier_range", v.barrier_range)
        .put("sigma_star", tab.sigma_star)
        .put("p_s", extended(tab.p_s))
        .put("p1_poh", th.p1_poh)
        .put("p2_barrier", th.p2_barrier);
    Ok(vec![rec.finish("nonexist")])
}
