//! Merges run summaries into one collision-rate table per intersection.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use occlusion_risk::risk::RiskMode;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
struct SummaryRow {
    name: String,
    mode: String,
    collision_rate_pct: f64,
    lat: Option<f64>,
    lon: Option<f64>,
}

#[derive(Debug, Default, PartialEq)]
pub struct Site {
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    /// Collision rate per mode, percent.
    pub rates: BTreeMap<String, f64>,
}

/// Intersection name to its site, sorted by name.
pub fn merge(paths: &[impl AsRef<Path>]) -> Result<BTreeMap<String, Site>> {
    let mut sites: BTreeMap<String, Site> = BTreeMap::new();
    for path in paths {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        for row in reader.deserialize() {
            let row: SummaryRow = row.with_context(|| format!("reading {}", path.display()))?;
            let site = sites.entry(row.name.clone()).or_insert_with(|| Site {
                lat: row.lat,
                lon: row.lon,
                rates: BTreeMap::new(),
            });
            if (site.lat, site.lon) != (row.lat, row.lon) {
                bail!("conflicting coordinates for intersection {}", row.name);
            }
            match site.rates.get(&row.mode) {
                Some(&r) if r != row.collision_rate_pct => {
                    bail!(
                        "conflicting {} collision rates for intersection {}: {r} vs {}",
                        row.mode,
                        row.name,
                        row.collision_rate_pct
                    )
                }
                _ => {
                    site.rates.insert(row.mode, row.collision_rate_pct);
                }
            }
        }
    }
    Ok(sites)
}

/// Known modes first in their usual order, then any others alphabetically.
fn columns(sites: &BTreeMap<String, Site>) -> Vec<String> {
    let mut seen: Vec<String> = sites.values().flat_map(|s| s.rates.keys().cloned()).collect();
    seen.sort();
    seen.dedup();
    let mut cols: Vec<String> = RiskMode::ALL
        .iter()
        .map(|m| m.name().to_string())
        .filter(|m| seen.contains(m))
        .collect();
    let rest: Vec<String> = seen.into_iter().filter(|m| !cols.contains(m)).collect();
    cols.extend(rest);
    cols
}

pub fn write_table(sites: &BTreeMap<String, Site>, out: impl std::io::Write) -> Result<()> {
    let cols = columns(sites);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["name".to_string(), "lat".into(), "lon".into()];
    header.extend(cols.iter().map(|c| format!("{c}_collision_rate_pct")));
    w.write_record(&header)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for (name, site) in sites {
        let mut rec = vec![name.clone(), opt(site.lat), opt(site.lon)];
        rec.extend(cols.iter().map(|c| opt(site.rates.get(c).copied())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
