//! CSV emission and ingestion. Every file carries a commented manifest
//! header (config hash, code version, timestamp, run metadata); bodies are
//! deterministic so identical config and version give byte-identical data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{CoagError, Result};
use crate::models::Model;
use crate::params::Config;
use crate::rdsolver::SpaceTimeField;
use crate::wavefront::SpeedMeasurement;

/// FNV-1a 64-bit over the canonical TOML form of the configuration.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Provenance header embedded in every emitted CSV.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config_hash: u64,
    pub version: String,
    pub timestamp: u64,
    /// Per-run metadata (seeds, tolerances, measured quantities), emitted in
    /// insertion-independent sorted order.
    pub extra: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(cfg: &Config) -> Result<RunManifest> {
        let toml = toml::to_string(cfg).map_err(|e| CoagError::Parse(e.to_string()))?;
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(RunManifest {
            config_hash: fnv1a64(toml.as_bytes()),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            extra: BTreeMap::new(),
        })
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.insert(key.to_string(), value.to_string());
        self
    }

    fn header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# config_hash: {:016x}", self.config_hash);
        let _ = writeln!(s, "# version: {}", self.version);
        let _ = writeln!(s, "# timestamp: {}", self.timestamp);
        for (k, v) in &self.extra {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s
    }
}

/// Shortest round-trip decimal form; parses back to the identical f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

/// Write a long-format CSV: manifest comments, one header row, data rows.
pub fn write_csv<P, R>(path: P, manifest: &RunManifest, columns: &[&str], rows: R) -> Result<()>
where
    P: AsRef<Path>,
    R: IntoIterator<Item = Vec<String>>,
{
    let mut body = manifest.header();
    body.push_str(&columns.join(","));
    body.push('\n');
    for row in rows {
        if row.len() != columns.len() {
            return Err(CoagError::DimensionMismatch {
                kind: "csv row".into(),
                expected: columns.len(),
                got: row.len(),
            });
        }
        body.push_str(&row.join(","));
        body.push('\n');
    }
    if let Some(dir) = path.as_ref().parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, body)?;
    Ok(())
}

/// Parsed CSV: manifest key/value lines, column names, string-valued rows.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub manifest: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CoagError::Parse(format!("csv has no column named {name}")))
    }

    pub fn f64_column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[idx]
                    .parse::<f64>()
                    .map_err(|e| CoagError::Parse(format!("bad float {:?}: {e}", r[idx])))
            })
            .collect()
    }
}

pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<CsvTable> {
    let text = fs::read_to_string(path)?;
    let mut manifest = BTreeMap::new();
    let mut columns = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once(':') {
                manifest.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
        if columns.is_empty() {
            columns = fields;
        } else {
            if fields.len() != columns.len() {
                return Err(CoagError::Parse(format!(
                    "csv row has {} fields, header has {}",
                    fields.len(),
                    columns.len()
                )));
            }
            rows.push(fields);
        }
    }
    if columns.is_empty() {
        return Err(CoagError::Parse("csv has no header row".into()));
    }
    Ok(CsvTable {
        manifest,
        columns,
        rows,
    })
}

/// Full profile stack in long format: t, x, component, value. Plot-ready
/// (e.g. gnuplot: plot for each t every block, or filter by component).
pub fn write_profiles<P: AsRef<Path>>(
    path: P,
    manifest: &RunManifest,
    field: &SpaceTimeField,
    model: &Model,
) -> Result<()> {
    let names = model.names();
    let xs = field.grid.xs();
    let n = field.grid.nodes;
    let mut rows = Vec::with_capacity(field.times.len() * model.dim() * n);
    for (k, &t) in field.times.iter().enumerate() {
        for (comp, name) in names.iter().enumerate() {
            let u = field.component(k, comp);
            for i in 0..n {
                rows.push(vec![
                    fmt_f64(t),
                    fmt_f64(xs[i]),
                    (*name).to_string(),
                    fmt_f64(u[i]),
                ]);
            }
        }
    }
    write_csv(path, manifest, &["t", "x", "component", "value"], rows)
}

/// Reconstruct the last stored snapshot from a profiles CSV: returns
/// (times, xs, per-component values of the final snapshot in `names` order).
pub fn read_last_profile(table: &CsvTable, names: &[&str]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let t_col = table.column("t")?;
    let x_col = table.column("x")?;
    let c_col = table.column("component")?;
    let v_col = table.column("value")?;
    let mut t_last = f64::NEG_INFINITY;
    for r in &table.rows {
        let t: f64 = r[t_col]
            .parse()
            .map_err(|e| CoagError::Parse(format!("bad t {:?}: {e}", r[t_col])))?;
        t_last = t_last.max(t);
    }
    if !t_last.is_finite() {
        return Err(CoagError::Parse("profiles csv holds no rows".into()));
    }
    let mut xs = Vec::new();
    let mut per_comp: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for r in &table.rows {
        let t: f64 = r[t_col].parse().unwrap();
        if t != t_last {
            continue;
        }
        let comp = names
            .iter()
            .position(|n| *n == r[c_col])
            .ok_or_else(|| CoagError::Parse(format!("unknown component {:?}", r[c_col])))?;
        let x: f64 = r[x_col]
            .parse()
            .map_err(|e| CoagError::Parse(format!("bad x {:?}: {e}", r[x_col])))?;
        let v: f64 = r[v_col]
            .parse()
            .map_err(|e| CoagError::Parse(format!("bad value {:?}: {e}", r[v_col])))?;
        if comp == 0 {
            xs.push(x);
        }
        per_comp[comp].push(v);
    }
    let nodes = xs.len();
    if nodes < 3 {
        return Err(CoagError::Parse(
            "profiles csv final snapshot has fewer than 3 nodes".into(),
        ));
    }
    let mut rho = Vec::with_capacity(names.len() * nodes);
    for (comp, vals) in per_comp.into_iter().enumerate() {
        if vals.len() != nodes {
            return Err(CoagError::Parse(format!(
                "component {} has {} values, expected {}",
                names[comp],
                vals.len(),
                nodes
            )));
        }
        rho.extend(vals);
    }
    Ok((t_last, xs, rho))
}

/// Front trace plus fit summary. The measured quantities ride in the
/// manifest so the body stays a pure (t, x_front) table.
pub fn write_speed<P: AsRef<Path>>(
    path: P,
    manifest: &RunManifest,
    m: &SpeedMeasurement,
) -> Result<()> {
    let manifest = manifest
        .clone()
        .with("speed", fmt_f64(m.speed))
        .with("converged", m.converged)
        .with("residual", fmt_f64(m.residual))
        .with("window_start", fmt_f64(m.window.0))
        .with("window_end", fmt_f64(m.window.1));
    let rows = m
        .front_trace
        .iter()
        .map(|&(t, x)| vec![fmt_f64(t), fmt_f64(x)]);
    write_csv(path, &manifest, &["t", "x_front"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;
    use crate::rdsolver::{default_ic, simulate, Grid1D};

    #[test]
    fn csv_round_trips_and_bodies_are_reproducible() {
        let cfg = Config::default();
        let m1 = RunManifest::new(&cfg).unwrap().with("seed", 7);
        let m2 = RunManifest::new(&cfg).unwrap().with("seed", 7);
        assert_eq!(m1.config_hash, m2.config_hash);
        let dir = std::env::temp_dir().join("coagwave_io_test");
        let rows = |seed: f64| {
            (0..5)
                .map(|i| vec![fmt_f64(i as f64 * 0.1 + seed), fmt_f64((i * i) as f64)])
                .collect::<Vec<_>>()
        };
        let p1 = dir.join("a.csv");
        let p2 = dir.join("b.csv");
        write_csv(&p1, &m1, &["t", "v"], rows(0.05)).unwrap();
        write_csv(&p2, &m2, &["t", "v"], rows(0.05)).unwrap();
        let strip = |p: &std::path::Path| {
            std::fs::read_to_string(p)
                .unwrap()
                .lines()
                .filter(|l| !l.starts_with('#'))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&p1), strip(&p2));
        let table = read_csv(&p1).unwrap();
        assert_eq!(table.columns, vec!["t", "v"]);
        assert_eq!(table.rows.len(), 5);
        assert_eq!(table.manifest["seed"], "7");
        assert_eq!(table.f64_column("t").unwrap()[1], 1.0f64 * 0.1 + 0.05);
    }

    #[test]
    fn floats_round_trip_exactly() {
        for v in [0.05, 1.0 / 3.0, 1400.0, 2.3e-13, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn profile_stack_reconstructs_the_final_snapshot() {
        let cfg = Config::default();
        let model = Model::new(ModelKind::OneEq, &cfg).unwrap();
        let grid = Grid1D::new(1.0, 51).unwrap();
        let ic = default_ic(&model, &grid).unwrap();
        let sim = simulate(&model, &grid, &ic, 2.0, 0.5).unwrap();
        let manifest = RunManifest::new(&cfg).unwrap();
        let path = std::env::temp_dir().join("coagwave_io_test/profiles.csv");
        write_profiles(&path, &manifest, &sim.field, &model).unwrap();
        let table = read_csv(&path).unwrap();
        let (t_last, xs, rho) = read_last_profile(&table, model.names()).unwrap();
        assert_eq!(t_last, 2.0);
        assert_eq!(xs.len(), 51);
        let last = sim.field.snapshots.len() - 1;
        for (a, b) in rho.iter().zip(sim.field.snapshots[last].iter()) {
            assert_eq!(a, b);
        }
    }
}
