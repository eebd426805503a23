use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PivotalKind, MIN_REPLICATIONS};
use crate::error::{Error, Result};

pub const QUANTILE_FORMAT_VERSION: u32 = 1;

const HEADER_PREFIX: &str = "# xlindley-quantiles v";

/// One simulated quantile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileEntry {
    pub kind: PivotalKind,
    pub psi: f64,
    pub n: usize,
    pub m: usize,
    pub q: Option<usize>,
    pub tau: f64,
    pub value: f64,
    #[serde(rename = "N")]
    pub reps: usize,
    pub seed: u64,
}

type Key = (PivotalKind, i64, usize, usize, Option<usize>, i64);

fn micro(x: f64) -> i64 {
    (x * 1e6).round() as i64
}

fn key(kind: PivotalKind, psi: f64, n: usize, m: usize, q: Option<usize>, tau: f64) -> Key {
    (kind, micro(psi), n, m, q, micro(tau))
}

/// Pivotal quantiles keyed by `(kind, ψ, n, m, q, τ)`. Shape and level are
/// matched to six decimals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuantileTable {
    entries: BTreeMap<Key, QuantileEntry>,
}

/// Configuration summary written next to a persisted table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTableMeta {
    pub format_version: u32,
    pub generator: String,
    pub schemes: Vec<SchemeMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeMeta {
    pub psi: f64,
    pub n: usize,
    pub m: usize,
    pub reps: usize,
    pub seed: u64,
    pub kinds: Vec<PivotalKind>,
    pub taus: Vec<f64>,
}

impl QuantileTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = QuantileEntry>) -> Self {
        let mut t = Self::new();
        t.extend(entries);
        t
    }

    pub fn insert(&mut self, e: QuantileEntry) {
        self.entries.insert(key(e.kind, e.psi, e.n, e.m, e.q, e.tau), e);
    }

    pub fn extend(&mut self, entries: impl IntoIterator<Item = QuantileEntry>) {
        for e in entries {
            self.insert(e);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &QuantileEntry> {
        self.entries.values()
    }

    pub fn get(&self, kind: PivotalKind, psi: f64, n: usize, m: usize, q: Option<usize>, tau: f64) -> Option<&QuantileEntry> {
        self.entries.get(&key(kind, psi, n, m, q, tau))
    }

    pub fn lookup(&self, kind: PivotalKind, psi: f64, n: usize, m: usize, q: Option<usize>, tau: f64) -> Result<f64> {
        self.get(kind, psi, n, m, q, tau).map(|e| e.value).ok_or_else(|| {
            let q = q.map(|q| format!(", q={q}")).unwrap_or_default();
            Error::MissingQuantile(format!("{kind} at psi={psi}, n={n}, m={m}{q}, tau={tau}"))
        })
    }

    /// Quantiles must be nondecreasing in `τ` and rest on enough replications.
    pub fn validate(&self) -> Result<()> {
        let mut prev: Option<&QuantileEntry> = None;
        for (k, e) in &self.entries {
            if e.reps < MIN_REPLICATIONS {
                return Err(Error::invalid(format!("{} entry built from only {} replications", e.kind, e.reps)));
            }
            if !e.value.is_finite() {
                return Err(Error::invalid(format!("{} entry is not finite", e.kind)));
            }
            if let Some(p) = prev {
                let pk = key(p.kind, p.psi, p.n, p.m, p.q, p.tau);
                if (pk.0, pk.1, pk.2, pk.3, pk.4) == (k.0, k.1, k.2, k.3, k.4) && p.value > e.value {
                    return Err(Error::invalid(format!(
                        "{} quantiles decrease between tau={} and tau={}",
                        e.kind, p.tau, e.tau
                    )));
                }
            }
            prev = Some(e);
        }
        Ok(())
    }

    pub fn meta(&self) -> QuantileTableMeta {
        let mut groups: BTreeMap<(i64, usize, usize, usize, u64), (f64, BTreeSet<PivotalKind>, BTreeSet<i64>)> =
            BTreeMap::new();
        for e in self.entries.values() {
            let g = groups
                .entry((micro(e.psi), e.n, e.m, e.reps, e.seed))
                .or_insert_with(|| (e.psi, BTreeSet::new(), BTreeSet::new()));
            g.1.insert(e.kind);
            g.2.insert(micro(e.tau));
        }
        QuantileTableMeta {
            format_version: QUANTILE_FORMAT_VERSION,
            generator: format!("xlindley {}", env!("CARGO_PKG_VERSION")),
            schemes: groups
                .into_iter()
                .map(|((_, n, m, reps, seed), (psi, kinds, taus))| SchemeMeta {
                    psi,
                    n,
                    m,
                    reps,
                    seed,
                    kinds: kinds.into_iter().collect(),
                    taus: taus.into_iter().map(|t| t as f64 / 1e6).collect(),
                })
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{HEADER_PREFIX}{QUANTILE_FORMAT_VERSION}")?;
        let mut csv = csv::Writer::from_writer(w);
        for e in self.entries.values() {
            csv.serialize(e)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let version: u32 = first
            .trim()
            .strip_prefix(HEADER_PREFIX)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse("missing quantile table version line".into()))?;
        if version != QUANTILE_FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported quantile table version {version}")));
        }
        let mut csv = csv::Reader::from_reader(reader);
        let mut table = Self::new();
        for row in csv.deserialize() {
            table.insert(row?);
        }
        table.validate()?;
        Ok(table)
    }

    /// Writes the CSV and a `.json` sidecar with the configuration summary.
    pub fn save(&self, path: &Path) -> Result<PathBuf> {
        self.write_csv(std::fs::File::create(path)?)?;
        let sidecar = sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.meta())?;
        std::fs::write(&sidecar, json + "\n")?;
        Ok(sidecar)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}
