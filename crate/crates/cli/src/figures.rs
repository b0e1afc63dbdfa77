//! Plot-data bundles for the four figures.

use crate::commands::{connection_docs, profile_doc, trajectory_doc};
use crate::config::{ParamValues, RunConfig};
use crate::emit::{meta, render, write_file, Cell, Document};
use anyhow::Result;
use blowup::integrate::{integrate, Controls, EventKind, EventSet, Trajectory};
use blowup::phasespace::{vf, Chart, ChartPoint};
use blowup::profiles::{reconstruct, Source};
use blowup::shooter::{find_connection, log_grid, shoot, sweep, Family};
use blowup::Params;
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
        }
    }

    /// `(m, N, p, sigma)` of the figure.
    pub fn params(self) -> (f64, u32, f64, f64) {
        match self {
            FigureId::Fig1 => (2.0, 5, 2.1, 0.5),
            FigureId::Fig2 => (2.0, 5, 2.1, 0.1),
            FigureId::Fig3 => (2.0, 5, 2.1, 1.0),
            FigureId::Fig4 => (2.0, 5, 3.0, 0.0),
        }
    }

    fn connections(self) -> &'static [usize] {
        match self {
            FigureId::Fig1 => &[0],
            FigureId::Fig2 => &[0, 1],
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Series {
    pub name: String,
    pub kind: String,
    pub parameter: Option<f64>,
    pub minima: Option<usize>,
    pub n_max: Option<usize>,
    pub n_min: Option<usize>,
    pub fate: Option<String>,
    pub no_return_y: Option<f64>,
    /// Interior maxima of `y` along a plane orbit.
    pub y_maxima: Option<usize>,
    pub monotone_y: Option<bool>,
    pub trajectory_file: Option<String>,
    pub profile_file: Option<String>,
    pub error: Option<String>,
}

struct Bundle<'a> {
    dir: PathBuf,
    config: &'a RunConfig,
}

impl Bundle<'_> {
    fn write(&self, doc: &Document) -> Result<String> {
        let file = format!("{}.{}", doc.name, self.config.format.extension());
        write_file(&self.dir, &file, &render(doc, self.config, self.config.format)?)?;
        Ok(file)
    }
}

/// Indices spread evenly over `members`, at most `count` of them.
fn spread(members: &[usize], count: usize) -> Vec<usize> {
    if members.len() <= count {
        return members.to_vec();
    }
    (0..count).map(|i| members[i * (members.len() - 1) / (count - 1)]).collect()
}

fn shot_series(
    bundle: &Bundle,
    params: &Params,
    parameter: f64,
    index: usize,
    cfg: &blowup::shooter::ShooterConfig,
) -> Result<Series> {
    let name = format!("shot_{index:03}");
    let mut s = Series { name: name.clone(), kind: "shot".into(), parameter: Some(parameter), ..Default::default() };
    let out = match shoot(params, Family::P0C, parameter, cfg, true) {
        Ok(o) => o,
        Err(e) => {
            s.error = Some(e.to_string());
            return Ok(s);
        }
    };
    let traj = out.trajectory.as_ref().expect("trajectory kept");
    s.minima = Some(out.minima);
    s.n_max = Some(out.count.n_max);
    s.n_min = Some(out.count.n_min);
    s.fate = Some(format!("{:?}", out.terminal.fate));
    s.no_return_y = traj.events_of(EventKind::NoReturnCross).next().map(|e| e.coords[1]);
    s.trajectory_file = Some(bundle.write(&trajectory_doc(&format!("{name}_trajectory"), traj))?);
    match reconstruct(traj, params, Source::P0 { c: parameter }) {
        Ok(profile) => s.profile_file = Some(bundle.write(&profile_doc(&format!("{name}_profile"), &profile))?),
        Err(e) => s.error = Some(format!("profile: {e}")),
    }
    Ok(s)
}

fn shooting_figure(id: FigureId, bundle: &Bundle, params: &Params) -> Result<(Vec<Series>, serde_json::Value)> {
    let cfg = bundle.config.shooter();
    let grid = log_grid(1e-3, 1e3, bundle.config.options.points.unwrap_or(200));
    let entries = sweep(params, Family::P0C, &grid, &cfg)?;
    let rows = entries
        .iter()
        .map(|e| match &e.outcome {
            Ok(o) => vec![
                Cell::Num(e.parameter),
                o.count.n_max.into(),
                o.count.n_min.into(),
                o.minima.into(),
                format!("{:?}", o.terminal.fate).into(),
            ],
            Err(_) => vec![Cell::Num(e.parameter), Cell::Empty, Cell::Empty, Cell::Empty, "Error".into()],
        })
        .collect();
    let sweep_file = bundle.write(&Document::table("sweep", &["param", "n_max", "n_min", "minima", "fate"], rows))?;

    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        if let Ok(o) = &e.outcome {
            classes.entry(o.minima).or_default().push(i);
        }
    }
    let per_class = (12 / classes.len().max(1)).max(4);
    let mut picks: Vec<usize> = classes.values().flat_map(|members| spread(members, per_class)).collect();
    picks.sort_unstable();
    let mut series = Vec::new();
    for i in picks {
        series.push(shot_series(bundle, params, grid[i], i, &cfg)?);
    }
    for &k in id.connections() {
        let name = format!("connection_k{k}");
        let mut s = Series { name: name.clone(), kind: "connection".into(), minima: Some(k), ..Default::default() };
        match find_connection(params, Family::P0C, k, None, &cfg) {
            Ok(result) => {
                s.parameter = Some(result.parameter_star);
                s.fate = Some("Q1Connection".into());
                let (_, docs, _) = connection_docs(&result);
                for doc in docs {
                    let renamed = Document { name: format!("{name}_{}", doc.name), body: doc.body };
                    let file = bundle.write(&renamed)?;
                    if renamed.name.ends_with("_profile") {
                        s.profile_file = Some(file);
                    } else {
                        s.trajectory_file = Some(file);
                    }
                }
            }
            Err(e) => s.error = Some(e.to_string()),
        }
        series.push(s);
    }
    let counts: BTreeMap<String, usize> = classes.iter().map(|(k, v)| (k.to_string(), v.len())).collect();
    let extra = json!({
        "sweep_file": sweep_file,
        "minima_classes": counts,
        "no_return_level": params.no_return_level(),
        "axes": { "trajectory": ["X", "Y", "Z"], "profile": ["xi", "f"] },
    });
    Ok((series, extra))
}

fn y_rate(y: f64, w: f64, params: &Params) -> f64 {
    vf(Chart::WChart, &[y, w, 0.0], params)[0]
}

fn plane_orbit(start: [f64; 2], params: &Params, controls: &Controls) -> blowup::Result<Trajectory> {
    let point = ChartPoint::new(Chart::WChart, [start[0], start[1], 0.0]);
    integrate(&point, params, controls, &EventSet::default())
}

/// `(interior maxima of y, y never increasing)` along a plane orbit.
pub fn y_shape(traj: &Trajectory, params: &Params) -> (usize, bool) {
    let rates: Vec<f64> = traj.samples.iter().map(|s| y_rate(s.coords[0], s.coords[1], params)).collect();
    let maxima = rates.windows(2).filter(|w| w[0] > 0.0 && w[1] <= 0.0).count();
    (maxima, rates.iter().all(|&r| r <= 0.0))
}

/// Seeds of the plane orbits: the unstable orbit of `Q5'` and orbits leaving
/// `Q1'` along centre manifolds, offset from the quadratic approximation.
pub fn plane_seeds(params: &Params) -> Vec<(String, [f64; 2])> {
    let k = params.drift();
    let mp = params.m + params.p;
    let eps = 1e-6 * k;
    let norm = (1.0 + ((mp - 1.0) * k).powi(2)).sqrt();
    let mut seeds = vec![("q5prime".to_string(), [k - eps / norm, eps * (mp - 1.0) * k / norm])];
    let w0 = 1e-3 * k * k;
    let centre = w0 / k + (mp - 1.0) * w0 * w0 / k.powi(3);
    for (i, offset) in [0.0, 1e-6, 1e-4, 1e-2, 1e-1].iter().enumerate() {
        seeds.push((format!("q1prime_{i}"), [centre + offset * k, w0]));
    }
    seeds
}

fn plane_figure(bundle: &Bundle, params: &Params) -> Result<(Vec<Series>, serde_json::Value)> {
    let mut controls = bundle.config.shooter().controls;
    controls.s_max = controls.s_max.max(1e5);
    controls.max_step = 1.0;
    let mut series = Vec::new();
    for (name, seed) in plane_seeds(params) {
        let kind = if name.starts_with("q5") { "Q5prime" } else { "Q1prime" };
        let mut s = Series { name: name.clone(), kind: kind.into(), ..Default::default() };
        match plane_orbit(seed, params, &controls) {
            Ok(traj) => {
                let (maxima, monotone) = y_shape(&traj, params);
                s.y_maxima = Some(maxima);
                s.monotone_y = Some(monotone);
                s.trajectory_file = Some(bundle.write(&trajectory_doc(&format!("{name}_trajectory"), &traj))?);
            }
            Err(e) => s.error = Some(e.to_string()),
        }
        series.push(s);
    }
    let extra = json!({
        "axes": { "trajectory": ["y", "w"] },
        "Q5prime": [params.drift(), 0.0],
        "Q1prime": [0.0, 0.0],
    });
    Ok((series, extra))
}

pub fn figure_cmd(id: FigureId, config: &RunConfig) -> Result<PathBuf> {
    let (m, n, p, sigma) = id.params();
    let mut config = config.clone();
    config.params = ParamValues { m: Some(m), n: Some(n), p: Some(p), sigma: Some(sigma) };
    let params = config.params()?;
    let dir = config.output_dir.clone().unwrap_or_else(|| Path::new(id.name()).to_path_buf());
    let bundle = Bundle { dir: dir.clone(), config: &config };
    let (series, extra) = match id {
        FigureId::Fig4 => plane_figure(&bundle, &params)?,
        _ => shooting_figure(id, &bundle, &params)?,
    };
    let manifest = json!({
        "meta": meta(&config),
        "figure": id.name(),
        "params": params,
        "format": config.format,
        "series": series,
        "details": extra,
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_file(&dir, "manifest.json", &text)?;
    Ok(dir)
}
