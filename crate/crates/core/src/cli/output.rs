//! CSV tables and run manifests.
//!
//! Reals are written with 17 significant digits so that every value
//! round-trips to the same `f64`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BoundRequest, CliError, ExperimentRecord};
use crate::analysis::CurvePoint;
use crate::empirics::ExperimentConfig;
use crate::theory::DiscreteDistribution;

pub const DISTRIBUTIONS_FILE: &str = "distributions.csv";
pub const CURVE_FILE: &str = "curve.csv";
pub const BOUND_CURVES_FILE: &str = "bound_curves.csv";
pub const BOUND_SUMMARY_FILE: &str = "bound_summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub const DISTRIBUTIONS_HEADER: [&str; 6] = ["m", "source", "slot_index", "slot_lo", "slot_hi", "mass"];
pub const CURVE_HEADER: [&str; 6] = ["m", "mean_p", "std_p", "mean_q", "std_q", "kl"];

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Everything needed to regenerate a run's outputs byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    #[serde(flatten)]
    pub run: RunSpec,
    /// Output files, relative to the output directory.
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "kebab-case")]
pub enum RunSpec {
    Experiment(ExperimentConfig),
    Bound(BoundRequest),
}

impl RunManifest {
    pub fn new(run: RunSpec, outputs: &[&str]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            run,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("manifest: {e}")))
    }
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub(crate) fn distribution_rows(m: u64, source: &str, d: &DiscreteDistribution) -> Vec<Vec<String>> {
    d.masses()
        .iter()
        .enumerate()
        .map(|(i, &mass)| {
            let (lo, hi) = d.slot_bounds(i);
            vec![
                m.to_string(),
                source.to_string(),
                i.to_string(),
                fmt_real(lo),
                fmt_real(hi),
                fmt_real(mass),
            ]
        })
        .collect()
}

pub fn distributions_csv(records: &[ExperimentRecord]) -> Vec<u8> {
    let rows = records.iter().flat_map(|r| {
        let mut rows = distribution_rows(r.point.m, "P", &r.p);
        rows.extend(distribution_rows(r.point.m, "Q", &r.q));
        rows
    });
    table(&DISTRIBUTIONS_HEADER, rows)
}

pub fn q_distributions_csv(qs: &[(u64, DiscreteDistribution)]) -> Vec<u8> {
    table(&DISTRIBUTIONS_HEADER, qs.iter().flat_map(|(m, q)| distribution_rows(*m, "Q", q)))
}

pub fn curve_csv(points: &[CurvePoint]) -> Vec<u8> {
    let rows = points.iter().map(|p| {
        vec![
            p.m.to_string(),
            fmt_real(p.mean_p),
            fmt_real(p.std_p),
            fmt_real(p.mean_q),
            fmt_real(p.std_q),
            fmt_real(p.kl),
        ]
    });
    table(&CURVE_HEADER, rows)
}

pub(crate) fn generic_csv(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    table(header, rows)
}

/// One `(m, source)` group read back from a distributions table.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDistribution {
    pub m: u64,
    pub source: String,
    pub dist: DiscreteDistribution,
}

/// Picks one group out of a distributions table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DistSelector {
    pub m: Option<u64>,
    pub source: Option<String>,
}

impl DistSelector {
    fn matches(&self, d: &LoadedDistribution) -> bool {
        self.m.is_none_or(|m| m == d.m) && self.source.as_ref().is_none_or(|s| *s == d.source)
    }
}

pub fn read_distributions(path: &Path) -> Result<Vec<LoadedDistribution>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_distributions(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn parse_distributions(text: &str) -> Result<Vec<LoadedDistribution>, String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(DISTRIBUTIONS_HEADER) {
        return Err(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()));
    }
    let mut groups: Vec<(u64, String, Vec<f64>)> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let row = line + 2;
        let field = |i: usize| rec.get(i).ok_or_else(|| format!("row {row}: missing field {i}"));
        let m: u64 = field(0)?.parse().map_err(|e| format!("row {row}: m: {e}"))?;
        let source = field(1)?.to_string();
        let slot: usize = field(2)?.parse().map_err(|e| format!("row {row}: slot_index: {e}"))?;
        let mass: f64 = field(5)?.parse().map_err(|e| format!("row {row}: mass: {e}"))?;
        match groups.last_mut() {
            Some((gm, gs, masses)) if *gm == m && *gs == source => {
                if slot != masses.len() {
                    return Err(format!("row {row}: slot {slot} out of order"));
                }
                masses.push(mass);
            }
            _ => {
                if slot != 0 {
                    return Err(format!("row {row}: group must start at slot 0"));
                }
                groups.push((m, source, vec![mass]));
            }
        }
    }
    groups
        .into_iter()
        .map(|(m, source, masses)| {
            let dist = DiscreteDistribution::new(masses)
                .map_err(|e| format!("m={m} source={source}: {e}"))?;
            Ok(LoadedDistribution { m, source, dist })
        })
        .collect()
}

/// Loads the single group of `path` matching `selector`.
pub fn select_distribution(path: &Path, selector: &DistSelector) -> Result<DiscreteDistribution, CliError> {
    let mut hits: Vec<_> = read_distributions(path)?
        .into_iter()
        .filter(|d| selector.matches(d))
        .collect();
    match hits.len() {
        1 => Ok(hits.pop().unwrap().dist),
        0 => Err(CliError::Parse(format!("{}: no distribution matches {selector:?}", path.display()))),
        n => Err(CliError::Parse(format!(
            "{}: {n} distributions match {selector:?}; narrow with --m / --*-source",
            path.display()
        ))),
    }
}

pub fn output_paths(dir: &Path, names: &[&str]) -> Vec<PathBuf> {
    names.iter().map(|n| dir.join(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.0, 1.0, 0.1, 1.0 / 3.0, 6.305_116_760_146_989e-7, f64::MIN_POSITIVE] {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn distributions_parse_back() {
        let d = DiscreteDistribution::new(vec![0.25, 0.75]).unwrap();
        let mut rows = distribution_rows(5, "P", &d);
        rows.extend(distribution_rows(5, "Q", &d));
        let bytes = generic_csv(&DISTRIBUTIONS_HEADER, rows);
        let loaded = parse_distributions(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[1].source, "Q");
        assert_eq!(loaded[1].dist, d);
    }

    #[test]
    fn malformed_tables_are_rejected() {
        assert!(parse_distributions("a,b\n1,2\n").is_err());
        let head = DISTRIBUTIONS_HEADER.join(",");
        assert!(parse_distributions(&format!("{head}\n1,P,1,0,1,1\n")).is_err());
        assert!(parse_distributions(&format!("{head}\n1,P,0,0,0.5,0.5\n1,P,1,0.5,1,0.6\n")).is_err());
        assert!(parse_distributions(&format!("{head}\nx,P,0,0,1,1\n")).is_err());
    }
}
