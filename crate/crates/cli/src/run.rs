//! Batch runs: map loading, execution and the files they leave behind.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use occlusion_risk::metrics::{cdf, profile_bands, summarize, ModeSummary, BAND_PERCENTILES};
use occlusion_risk::risk::RiskMode;
use occlusion_risk::scene::{synthetic_fourway, FourWayParams, IntersectionMap};
use occlusion_risk::simulator::{run_batch, BatchRecord, BatchSpec};

use crate::params::Params;
use crate::CliError;

/// Width of the time bins in exported profile tables, seconds.
const PROFILE_BIN: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub enum MapSource {
    Synthetic,
    File(PathBuf),
    Dir(PathBuf),
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Exports {
    pub traces: bool,
    pub particles: bool,
    pub profiles: bool,
    pub cdfs: bool,
}

/// Fully resolved run settings.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub maps: MapSource,
    pub n_scenarios: usize,
    pub n_others: usize,
    pub modes: Vec<RiskMode>,
    pub seed: u64,
    pub parallelism: usize,
    pub ego_route: Option<String>,
    pub out: PathBuf,
    pub exports: Exports,
    pub params: Params,
}

fn load_map(path: &Path) -> Result<IntersectionMap, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Map(format!("{}: {e}", path.display())))?;
    IntersectionMap::from_json(&text).map_err(|e| CliError::Map(format!("{}: {e}", path.display())))
}

pub fn load_maps(source: &MapSource) -> Result<Vec<IntersectionMap>, CliError> {
    match source {
        MapSource::Synthetic => Ok(vec![
            synthetic_fourway(FourWayParams::default()).map_err(|e| CliError::Map(format!("synthetic: {e}")))?
        ]),
        MapSource::File(p) => Ok(vec![load_map(p)?]),
        MapSource::Dir(dir) => {
            let entries = fs::read_dir(dir).map_err(|e| CliError::Map(format!("{}: {e}", dir.display())))?;
            let mut paths: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(CliError::Map(format!("{}: no .json intersection files", dir.display())));
            }
            let maps = paths.iter().map(|p| load_map(p)).collect::<Result<Vec<_>, _>>()?;
            let mut names: Vec<&str> = maps.iter().map(|m| m.name.as_str()).collect();
            names.sort();
            if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
                return Err(CliError::Map(format!(
                    "{}: duplicate intersection name {}",
                    dir.display(),
                    w[0]
                )));
            }
            Ok(maps)
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn create(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

fn write_summary(path: &Path, rows: &[ModeSummary]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record([
        "name",
        "mode",
        "n",
        "collision_rate_pct",
        "discomfort_median",
        "discomfort_p95",
        "timeout_count",
        "lat",
        "lon",
    ])?;
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.mode.name().to_string(),
            r.n.to_string(),
            r.collision_rate.to_string(),
            fmt_opt(r.discomfort_median),
            fmt_opt(r.discomfort_p95),
            r.timeouts.to_string(),
            fmt_opt(r.lat),
            fmt_opt(r.lon),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_episode_files(out: &Path, map: &IntersectionMap, records: &[BatchRecord], exports: Exports) -> Result<()> {
    let stem = file_stem(&map.name);
    for rec in records {
        let Ok(res) = &rec.result else { continue };
        let file = format!("{:05}.csv", rec.scenario_id);
        if exports.traces {
            let mut w = create(&out.join("traces").join(&stem).join(rec.mode.name()).join(&file))?;
            w.write_record(["t", "s_ego", "v_ego", "a_ego", "x", "y", "outcome"])?;
            for t in &res.trace {
                w.write_record([
                    t.t.to_string(),
                    t.s.to_string(),
                    t.v.to_string(),
                    t.a.to_string(),
                    t.x.to_string(),
                    t.y.to_string(),
                    res.outcome.name().to_string(),
                ])?;
            }
            w.flush()?;
        }
        if exports.particles {
            let mut w = create(&out.join("particles").join(&stem).join(rec.mode.name()).join(&file))?;
            w.write_record(["t", "lane_id", "x", "y"])?;
            for frame in &res.particles {
                for &(lane, p) in &frame.points {
                    w.write_record([
                        frame.t.to_string(),
                        map.lanes[lane].id.clone(),
                        p.x.to_string(),
                        p.y.to_string(),
                    ])?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn write_profiles(out: &Path, map: &IntersectionMap, modes: &[RiskMode], records: &[BatchRecord]) -> Result<()> {
    for &mode in modes {
        let results = records
            .iter()
            .filter(|r| r.mode == mode)
            .filter_map(|r| r.result.as_ref().ok());
        let bands = profile_bands(results, PROFILE_BIN)?;
        let path = out
            .join("profiles")
            .join(format!("{}_{}.csv", file_stem(&map.name), mode.name()));
        let mut w = create(&path)?;
        let mut header = vec!["t".to_string(), "active".to_string()];
        for var in ["v", "a"] {
            header.extend(BAND_PERCENTILES.iter().map(|q| format!("{var}_p{q}")));
        }
        w.write_record(&header)?;
        for row in &bands.rows {
            let mut rec = vec![row.t.to_string(), row.active.to_string()];
            rec.extend(row.v.iter().chain(&row.a).map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn write_cdf(path: &Path, per_mode: &[(RiskMode, Vec<f64>)]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["mode", "value", "fraction"])?;
    for (mode, values) in per_mode {
        if values.is_empty() {
            continue;
        }
        for (v, f) in cdf(values)? {
            w.write_record([mode.name().to_string(), v.to_string(), f.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    let maps = load_maps(&cfg.maps)?;
    let mut rows: Vec<ModeSummary> = Vec::new();
    for map in maps {
        let ego_route = match &cfg.ego_route {
            Some(id) => Some(
                map.route_index(id)
                    .ok_or_else(|| CliError::Map(format!("{}: unknown ego route {id}", map.name)))?,
            ),
            None => None,
        };
        let spec = BatchSpec {
            n_scenarios: cfg.n_scenarios,
            n_others: cfg.n_others,
            modes: cfg.modes.clone(),
            base_seed: cfg.seed,
            parallelism: cfg.parallelism,
            ego_route,
            ..BatchSpec::default()
        };
        let mut episode = cfg.params.episode;
        episode.capture_particles = cfg.exports.particles;
        let map = Arc::new(map);
        let records =
            run_batch(&map, &spec, &episode).map_err(|e| CliError::Other(anyhow::anyhow!("{}: {e}", map.name)))?;
        let origin = map.origin_lat.zip(map.origin_lon);
        let summary = summarize(&map.name, origin, &records, cfg.params.a_thresh).map_err(anyhow::Error::from)?;
        for s in &summary {
            println!(
                "{} {}: collision rate {}% ({}/{}), discomfort median {} p95 {}, timeouts {}, generation failures {}",
                s.name,
                s.mode,
                s.collision_rate,
                s.collisions,
                s.n,
                fmt_opt(s.discomfort_median),
                fmt_opt(s.discomfort_p95),
                s.timeouts,
                s.generation_failures,
            );
        }
        write_episode_files(&cfg.out, &map, &records, cfg.exports)?;
        if cfg.exports.profiles {
            write_profiles(&cfg.out, &map, &cfg.modes, &records)?;
        }
        rows.extend(summary);
    }
    write_summary(&cfg.out.join("summary.csv"), &rows)?;
    if cfg.exports.cdfs {
        let gather = |f: &dyn Fn(&ModeSummary) -> Vec<f64>| -> Vec<(RiskMode, Vec<f64>)> {
            cfg.modes
                .iter()
                .map(|&m| (m, rows.iter().filter(|r| r.mode == m).flat_map(f).collect()))
                .collect()
        };
        write_cdf(
            &cfg.out.join("cdf_collision_rate.csv"),
            &gather(&|r| vec![r.collision_rate]),
        )?;
        write_cdf(&cfg.out.join("cdf_discomfort.csv"), &gather(&|r| r.discomfort.clone()))?;
    }
    Ok(())
}
