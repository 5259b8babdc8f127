//! The `bethe-flow/1` model format.
//!
//! ```json
//! {
//!   "format": "bethe-flow/1",
//!   "variables": [{"id": 1, "cardinality": 2}, {"id": 2, "cardinality": 3}],
//!   "regions": [[1, 2]],
//!   "potentials": [
//!     {"region": [1, 2], "table": [0.0, 0.1, 0.2, 1.0, 1.1, 1.2], "space": "log"}
//!   ],
//!   "options": {"tau": 0.5}
//! }
//! ```
//!
//! Tables are flat, first variable slowest: in the example above entry
//! `3 * x1 + x2` holds `h(x1, x2)`, so `h(1, 0) = 1.0`. Log-space tables give
//! `h` directly; linear-space tables give strictly positive factors `f` with
//! `h = −ln f`.
//!
//! Generators are closed under intersection. Regions added by the closure get
//! zero potential. A potential on a subset of a generator that is not itself
//! a lattice region is extended to the smallest lattice region containing it.
//! Several potentials on one region add up.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::FlowConfig;
use crate::error::{Error, Result};
use crate::fields::Field0;
use crate::lattice::{Region, RegionLattice, VariableSpec};
use crate::tensor::Tensor;

pub const FORMAT: &str = "bethe-flow/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub region: Region,
    pub table: Vec<f64>,
    #[serde(default)]
    pub space: Space,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub variables: Vec<VariableSpec>,
    pub regions: Vec<Region>,
    #[serde(default)]
    pub potentials: Vec<PotentialSpec>,
    #[serde(default)]
    pub options: FlowConfig,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub lattice: RegionLattice,
    pub h: Field0,
    pub options: FlowConfig,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn into_model(self) -> Result<Model> {
        if self.format != FORMAT {
            return Err(Error::Parse(format!(
                "format: expected \"{FORMAT}\", got \"{}\"",
                self.format
            )));
        }
        self.options
            .validate()
            .map_err(|e| Error::Parse(format!("options: {e}")))?;
        let lattice = RegionLattice::build(&self.regions, &self.variables)?;
        let vars = lattice.variables();
        let mut h = Field0::zeros(&lattice);
        for (k, p) in self.potentials.iter().enumerate() {
            let at = |msg: String| Error::Parse(format!("potentials[{k}] on {}: {msg}", p.region));
            vars.check(&p.region).map_err(|e| at(e.to_string()))?;
            let host = lattice
                .regions()
                .iter()
                .rposition(|r| p.region.is_subset(r))
                .filter(|_| self.regions.iter().any(|g| p.region.is_subset(g)))
                .ok_or_else(|| at("region is not contained in any generator".into()))?;
            let table = match p.space {
                Space::Log => p.table.clone(),
                Space::Linear => {
                    if let Some(bad) = p.table.iter().find(|&&f| !(f > 0.0 && f.is_finite())) {
                        return Err(at(format!(
                            "linear table entries must be positive, found {bad}"
                        )));
                    }
                    p.table.iter().map(|f| -f.ln()).collect()
                }
            };
            if table.iter().any(|x| !x.is_finite()) {
                return Err(at("table entries must be finite".into()));
            }
            let expected = vars.state_count(&p.region);
            if table.len() as u128 != expected {
                return Err(at(format!(
                    "table has {} entries, region needs {expected}",
                    table.len()
                )));
            }
            let t = Tensor::from_values(&p.region, vars, table).map_err(|e| at(e.to_string()))?;
            h.get_mut(host)
                .add_assign(&t.extend(lattice.region(host), vars)?)?;
        }
        Ok(Model {
            lattice,
            h,
            options: self.options,
        })
    }
}

impl Model {
    pub fn from_json(text: &str) -> Result<Self> {
        ModelFile::from_json(text)?.into_model()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}
