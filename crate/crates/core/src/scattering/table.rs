use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{CascadeDiagnostics, ScatteringPath};
use crate::error::{Error, Result};
use crate::filters::ProfileKind;

/// S̄_q^m[j₁,…,j_m]f over a path grid.
#[derive(Debug, Clone, Serialize)]
pub struct MomentTable {
    pub(crate) q: f64,
    pub(crate) order: usize,
    pub(crate) j_min: i32,
    pub(crate) j_max: i32,
    pub(crate) profile: ProfileKind,
    pub(crate) zero_value: f64,
    pub(crate) n_modes: usize,
    pub(crate) seed: Option<u64>,
    pub(crate) sparsity: Option<f64>,
    pub(crate) metadata: Vec<(String, String)>,
    #[serde(serialize_with = "serialize_entries")]
    pub(crate) entries: BTreeMap<ScatteringPath, f64>,
    pub(crate) diagnostics: CascadeDiagnostics,
}

fn serialize_entries<S: serde::Serializer>(
    entries: &BTreeMap<ScatteringPath, f64>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = serializer.serialize_seq(Some(entries.len()))?;
    for (path, value) in entries {
        seq.serialize_element(&(path.scales(), value))?;
    }
    seq.end()
}

impl MomentTable {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn window(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    pub fn profile(&self) -> ProfileKind {
        self.profile
    }

    pub fn zero_value(&self) -> f64 {
        self.zero_value
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn sparsity(&self) -> Option<f64> {
        self.sparsity
    }

    pub fn is_sparse(&self) -> bool {
        self.sparsity.is_some()
    }

    pub fn diagnostics(&self) -> &CascadeDiagnostics {
        &self.diagnostics
    }

    pub fn entries(&self) -> &BTreeMap<ScatteringPath, f64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry for `path`; paths dropped by a sparsity threshold read as 0.
    pub fn get(&self, path: &ScatteringPath) -> Option<f64> {
        match self.entries.get(path) {
            Some(&v) => Some(v),
            None if self.is_sparse() && self.in_grid(path) => Some(0.0),
            None => None,
        }
    }

    fn in_grid(&self, path: &ScatteringPath) -> bool {
        path.order() == self.order && path.scales().iter().all(|j| (self.j_min..=self.j_max).contains(j))
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.values().cloned().fold(0.0, f64::max)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Extra `key = value` lines echoed into the CSV preamble.
    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.push((key.into(), value.into()));
        self
    }

    /// Drop entries below `epsilon · max` and flag the table as sparse.
    pub fn with_sparsity(mut self, epsilon: f64) -> Self {
        let threshold = epsilon * self.max_entry();
        self.entries.retain(|_, v| *v >= threshold);
        self.sparsity = Some(epsilon);
        self
    }

    /// CSV export: `#` metadata lines, a column header, then one row per path.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        let header: [(&str, String); 8] = [
            ("q", format!("{:?}", self.q)),
            ("m", self.order.to_string()),
            ("j_min", self.j_min.to_string()),
            ("j_max", self.j_max.to_string()),
            ("profile", self.profile.name().to_string()),
            ("C", format!("{:?}", self.zero_value)),
            ("n_modes", self.n_modes.to_string()),
            ("seed", seed),
        ];
        for (key, value) in header.iter() {
            writeln!(out, "# {key} = {value}").expect("writing to a String");
        }
        if let Some(eps) = self.sparsity {
            writeln!(out, "# sparsity = {eps:?}").expect("writing to a String");
        }
        for (key, value) in &self.metadata {
            writeln!(out, "# {key} = {value}").expect("writing to a String");
        }
        let columns: Vec<String> = (1..=self.order).map(|i| format!("j{i}")).collect();
        writeln!(out, "{},value", columns.join(",")).expect("writing to a String");
        for (path, value) in &self.entries {
            for j in path.scales() {
                write!(out, "{j},").expect("writing to a String");
            }
            writeln!(out, "{value:?}").expect("writing to a String");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    fn check_compatible(&self, other: &MomentTable) -> Result<()> {
        if self.q != other.q {
            return Err(Error::IncompatibleTables(format!("q = {} vs {}", self.q, other.q)));
        }
        if self.order != other.order {
            return Err(Error::IncompatibleTables(format!(
                "order {} vs {}",
                self.order, other.order
            )));
        }
        if self.window() != other.window() {
            return Err(Error::IncompatibleTables(format!(
                "window {:?} vs {:?}",
                self.window(),
                other.window()
            )));
        }
        Ok(())
    }
}

/// ‖a − b‖ over the path grid in ℓ², or ‖a‖ when `b` is `None`.
pub fn scattering_norm(a: &MomentTable, b: Option<&MomentTable>) -> Result<f64> {
    let Some(b) = b else {
        return Ok(a.entries.values().map(|v| v * v).sum::<f64>().sqrt());
    };
    a.check_compatible(b)?;
    let mut total = 0.0;
    for (path, x) in &a.entries {
        let y = b.get(path).unwrap_or(0.0);
        total += (x - y).powi(2);
    }
    for (path, y) in &b.entries {
        if !a.entries.contains_key(path) {
            total += y * y;
        }
    }
    Ok(total.sqrt())
}

/// The q-power convention: `scattering_norm(a, b)^q`.
pub fn scattering_norm_qpower(a: &MomentTable, b: Option<&MomentTable>) -> Result<f64> {
    Ok(scattering_norm(a, b)?.powf(a.q))
}

/// Read a table written by [`MomentTable::to_csv`].
pub fn read_moment_csv(text: &str) -> Result<MomentTable> {
    let mut meta: BTreeMap<String, String> = BTreeMap::new();
    let mut extra = Vec::new();
    let mut entries = BTreeMap::new();
    let mut seen_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let bad = |msg: String| Error::Format(format!("line {}: {msg}", lineno + 1));
        if let Some(rest) = line.strip_prefix('#') {
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| bad("metadata line without `=`".into()))?;
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            const KNOWN: [&str; 9] = [
                "q", "m", "j_min", "j_max", "profile", "C", "n_modes", "seed", "sparsity",
            ];
            if KNOWN.contains(&key.as_str()) {
                meta.insert(key, value);
            } else {
                extra.push((key, value));
            }
            continue;
        }
        if !seen_header {
            seen_header = true;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let (value, scales) = fields.split_last().ok_or_else(|| bad("empty row".into()))?;
        let scales = scales
            .iter()
            .map(|s| s.parse::<i32>().map_err(|e| bad(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<i32>>>()?;
        let value: f64 = value.parse().map_err(|e| bad(format!("{value:?}: {e}")))?;
        entries.insert(ScatteringPath::new(scales), value);
    }
    let field = |key: &str| {
        meta.get(key)
            .ok_or_else(|| Error::Format(format!("missing metadata field {key}")))
    };
    let number = |key: &str| -> Result<f64> {
        field(key)?
            .parse()
            .map_err(|e| Error::Format(format!("metadata {key}: {e}")))
    };
    let integer = |key: &str| -> Result<i64> {
        field(key)?
            .parse()
            .map_err(|e| Error::Format(format!("metadata {key}: {e}")))
    };
    let seed = match field("seed")?.as_str() {
        "none" => None,
        s => Some(s.parse().map_err(|e| Error::Format(format!("metadata seed: {e}")))?),
    };
    let sparsity = match meta.get("sparsity") {
        Some(s) => Some(
            s.parse()
                .map_err(|e| Error::Format(format!("metadata sparsity: {e}")))?,
        ),
        None => None,
    };
    Ok(MomentTable {
        q: number("q")?,
        order: integer("m")? as usize,
        j_min: integer("j_min")? as i32,
        j_max: integer("j_max")? as i32,
        profile: field("profile")?.parse()?,
        zero_value: number("C")?,
        n_modes: integer("n_modes")? as usize,
        seed,
        sparsity,
        metadata: extra,
        entries,
        diagnostics: CascadeDiagnostics::default(),
    })
}
