//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::capacity::LawSpec;
use crate::cylinder::{CylinderShape, NuEntry, NuTable};
use crate::error::{Error, Result};
use crate::geometry::{BoxDoc, BoxUnion, DomainSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Maxflow,
    Mincut,
    Nu,
    Lln,
    Cutconv,
    Divergence,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Maxflow => "maxflow",
            Kind::Mincut => "mincut",
            Kind::Nu => "nu",
            Kind::Lln => "lln",
            Kind::Cutconv => "cutconv",
            Kind::Divergence => "divergence",
        }
    }
}

/// Candidate set `F` given as a union of boxes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceDoc {
    pub d: usize,
    pub boxes: Vec<BoxDoc>,
}

impl ReferenceDoc {
    pub fn build(&self) -> Result<BoxUnion> {
        if self.boxes.is_empty() {
            return Ok(BoxUnion::empty(self.d));
        }
        BoxUnion::new(self.d, self.boxes.iter().map(BoxDoc::build).collect::<Result<Vec<_>>>()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpDoc {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Conservation tolerance in floating mode.
    #[serde(default = "default_float_tol")]
    pub conservation: f64,
}

fn default_float_tol() -> f64 {
    crate::maxflow::FLOAT_TOLERANCE
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { conservation: default_float_tol() }
    }
}

fn one() -> u64 {
    1
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    /// Domain file; required for every kind except `nu`.
    #[serde(default)]
    pub domain: Option<PathBuf>,
    pub law: LawSpec,
    pub n_list: Vec<i64>,
    #[serde(default = "one")]
    pub replicates: u64,
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Reference set file for `lln` and `cutconv`.
    #[serde(default)]
    pub reference: Option<PathBuf>,
    /// Integer directions for `nu`.
    #[serde(default)]
    pub directions: Vec<Vec<i64>>,
    #[serde(default)]
    pub cylinder: Option<CylinderShape>,
    /// Tabulated `ν̂` used by the duality check of `lln`.
    #[serde(default)]
    pub nu_table: Option<Vec<NuEntry>>,
    #[serde(default)]
    pub bump: Option<BumpDoc>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Exact fixed-point capacities; `false` switches to floating point.
    #[serde(default = "yes")]
    pub exact: bool,
    /// Record wall-clock times (makes outputs run-dependent).
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    /// Parses `path` and resolves relative file references against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.domain, &mut cfg.reference].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_list must be nonempty and strictly increasing".into());
        }
        if self.n_list[0] < 1 {
            return bad("n must be >= 1".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be >= 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be >= 1".into());
        }
        match (&self.domain, self.kind) {
            (None, Kind::Nu) => {}
            (None, _) => return bad(format!("kind {} needs a domain file", self.kind.name())),
            (Some(p), _) if !p.is_file() => return bad(format!("domain file {} not found", p.display())),
            _ => {}
        }
        if let Some(p) = &self.reference {
            if !p.is_file() {
                return bad(format!("reference file {} not found", p.display()));
            }
        }
        if self.kind == Kind::Cutconv && self.reference.is_none() {
            return bad("cutconv needs a reference file".into());
        }
        if self.kind == Kind::Divergence && self.bump.is_none() {
            return bad("divergence needs a bump test function".into());
        }
        if self.kind == Kind::Nu && self.directions.iter().any(|w| w.iter().all(|&c| c == 0)) {
            return bad("directions must be nonzero".into());
        }
        self.law.validate()?;
        Ok(())
    }

    pub fn load_domain(&self) -> Result<Option<DomainSpec>> {
        self.domain.as_deref().map(DomainSpec::load).transpose()
    }

    pub fn load_reference(&self) -> Result<Option<BoxUnion>> {
        self.reference
            .as_deref()
            .map(|p| {
                let text = std::fs::read_to_string(p)?;
                serde_json::from_str::<ReferenceDoc>(&text)?.build()
            })
            .transpose()
    }

    pub fn nu(&self) -> Option<NuTable> {
        self.nu_table.as_ref().map(|entries| {
            let mut t = NuTable::default();
            for e in entries {
                t.insert(&e.unit, e.nu, e.stderr);
            }
            t
        })
    }
}
