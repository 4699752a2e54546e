//! Declarative run configuration.
//!
//! ```toml
//! method = "more_adapt"
//! out_dir = "out/h4_rect_more"
//! manifest = "../fixtures/h4_rect/manifest.toml"
//!
//! [[reference]]
//! label = "1Ag"
//! terms = [["2200", 1.0]]
//!
//! [stop]
//! max_ops = 50
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::path::{Path, PathBuf};
use std::result::Result;
use std::sync::Arc;

use more_adapt::prelude::*;
use more_adapt::vqe::check_orthonormal;
use serde::Deserialize;

use crate::error::ScanError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Single-reference ADAPT-VQE.
    Adapt,
    /// State-averaged ADAPT over all references, then Ritz diagonalization.
    MoreAdapt,
    /// ADAPT ground state from one reference, excited states from the others.
    Qsceom,
    /// Exact diagonalization only.
    Fci,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Adapt => "adapt",
            Method::MoreAdapt => "more_adapt",
            Method::Qsceom => "qsceom",
            Method::Fci => "fci",
        }
    }
}

/// `"all"` or a list of irrep labels (0 = totally symmetric).
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum IrrepSpec {
    Keyword(String),
    Only(Vec<Irrep>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub id: String,
    /// Scan coordinate used on plot axes.
    pub coordinate: f64,
    pub fcidump: PathBuf,
    /// x, y, z property files; optional.
    #[serde(default)]
    pub dipole: Vec<PathBuf>,
}

/// A CSF as determinant occupation strings and coefficients.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    pub label: String,
    pub terms: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    pub max_ops: Option<usize>,
    pub grad_norm: Option<f64>,
    pub energy_change: Option<f64>,
    /// Stop single-reference runs once within this tolerance of the exact
    /// energy of the reference's symmetry.
    pub target_fci: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    #[serde(default = "default_gtol")]
    pub gtol: f64,
    pub max_iter: Option<usize>,
}

fn default_gtol() -> f64 {
    OptimizerSettings::default().gtol
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        Self { gtol: default_gtol(), max_iter: None }
    }
}

impl From<OptimizerSpec> for OptimizerSettings {
    fn from(s: OptimizerSpec) -> Self {
        OptimizerSettings { gtol: s.gtol, max_iter: s.max_iter }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    pub out_dir: PathBuf,
    /// Fixture manifest supplying `[[geometry]]` entries.
    pub manifest: Option<PathBuf>,
    /// Keep only these manifest geometry ids, in this order.
    pub geometries: Option<Vec<String>>,
    #[serde(default, rename = "geometry")]
    pub extra_geometries: Vec<GeometrySpec>,
    /// Working sector; defaults to the union of the reference irreps.
    pub irreps: Option<IrrepSpec>,
    #[serde(default, rename = "reference")]
    pub references: Vec<ReferenceSpec>,
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub stop: StopSpec,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    /// Reference used as the q-sc-EOM ground state.
    #[serde(default)]
    pub ground: usize,
    /// FCI method: number of states reported (defaults to the number of references, or 6).
    pub n_states: Option<usize>,
    /// Directory the relative paths refer to; set by [`RunConfig::load`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    #[serde(rename = "geometry")]
    geometries: Vec<ManifestGeometry>,
}

#[derive(Debug, Deserialize)]
struct ManifestGeometry {
    id: String,
    coordinate: f64,
    fcidump: PathBuf,
    #[serde(default)]
    dipole: Vec<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ScanError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScanError::Config(format!("{}: {}", path.display(), e)))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ScanError> {
        toml::from_str(text).map_err(|e| ScanError::Config(e.to_string()))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out_dir)
    }

    /// Manifest geometries (filtered) followed by explicit ones, paths resolved.
    pub fn geometry_list(&self) -> Result<Vec<GeometrySpec>, ScanError> {
        let mut out = Vec::new();
        if let Some(m) = &self.manifest {
            let path = self.resolve(m);
            let text = std::fs::read_to_string(&path).map_err(|e| ScanError::Config(format!("{}: {}", path.display(), e)))?;
            let manifest: Manifest =
                toml::from_str(&text).map_err(|e| ScanError::Config(format!("{}: {}", path.display(), e)))?;
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            let entries: Vec<GeometrySpec> = manifest
                .geometries
                .into_iter()
                .map(|g| GeometrySpec {
                    id: g.id,
                    coordinate: g.coordinate,
                    fcidump: dir.join(g.fcidump),
                    dipole: g.dipole.into_iter().map(|d| dir.join(d)).collect(),
                })
                .collect();
            match &self.geometries {
                None => out.extend(entries),
                Some(ids) => {
                    for id in ids {
                        let g = entries
                            .iter()
                            .find(|g| &g.id == id)
                            .ok_or_else(|| ScanError::Config(format!("geometry {} not in {}", id, path.display())))?;
                        out.push(g.clone());
                    }
                }
            }
        } else if self.geometries.is_some() {
            return Err(ScanError::Config("`geometries` filters a manifest, but no manifest is given".into()));
        }
        for g in &self.extra_geometries {
            out.push(GeometrySpec {
                id: g.id.clone(),
                coordinate: g.coordinate,
                fcidump: self.resolve(&g.fcidump),
                dipole: g.dipole.iter().map(|d| self.resolve(d)).collect(),
            });
        }
        Ok(out)
    }

    pub fn stop_criteria(&self) -> StopCriteria {
        StopCriteria {
            max_ops: self.stop.max_ops,
            grad_norm: self.stop.grad_norm,
            energy_change: self.stop.energy_change,
            target: None,
        }
    }

    pub fn determinants(&self) -> Result<Vec<Vec<(Determinant, f64)>>, ScanError> {
        self.references
            .iter()
            .map(|r| {
                r.terms
                    .iter()
                    .map(|(occ, c)| {
                        Determinant::from_occupation(occ)
                            .map(|d| (d, *c))
                            .map_err(|e| ScanError::Config(format!("reference {}: {}", r.label, e)))
                    })
                    .collect()
            })
            .collect()
    }

    /// Irreps of the working sector for the given orbital irreps.
    pub fn irrep_sector(&self, orbital_irreps: &[Irrep]) -> Result<IrrepSector, ScanError> {
        match &self.irreps {
            Some(IrrepSpec::Keyword(k)) if k == "all" => Ok(IrrepSector::All),
            Some(IrrepSpec::Keyword(k)) => Err(ScanError::Config(format!("irreps must be \"all\" or a list, got {:?}", k))),
            Some(IrrepSpec::Only(v)) => Ok(IrrepSector::Only(v.clone())),
            None if self.references.is_empty() => Ok(IrrepSector::All),
            None => {
                let mut v: Vec<Irrep> =
                    self.determinants()?.iter().flatten().map(|(d, _)| d.irrep(orbital_irreps)).collect();
                v.sort_unstable();
                v.dedup();
                Ok(IrrepSector::Only(v))
            }
        }
    }

    /// Everything that can be checked without running a calculation.
    pub fn validate(&self) -> Result<(), ScanError> {
        let k = self.references.len();
        let need = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(ScanError::Config(msg.into())) };
        match self.method {
            Method::Adapt => need(k == 1, "method adapt needs exactly one reference")?,
            Method::MoreAdapt => need(k >= 1, "method more_adapt needs at least one reference")?,
            Method::Qsceom => {
                need(k >= 2, "method qsceom needs a ground reference and at least one more")?;
                need(self.ground < k, "ground index outside the reference list")?;
            }
            Method::Fci => need(self.n_states != Some(0), "n_states must be positive")?,
        }
        if self.method != Method::Fci {
            let s = self.stop_criteria();
            need(
                s.max_ops.is_some() || s.grad_norm.is_some() || s.energy_change.is_some() || self.stop.target_fci.is_some(),
                "at least one stop criterion is required",
            )?;
        }
        if self.stop.target_fci.is_some() && self.method == Method::MoreAdapt {
            return Err(ScanError::Config("target_fci applies to single-reference runs only".into()));
        }
        if let Some(w) = &self.weights {
            need(self.method == Method::MoreAdapt, "weights apply to more_adapt only")?;
            need(w.len() == k, "one weight per reference")?;
        }
        for g in self.geometry_list()? {
            need(g.fcidump.is_file(), &format!("geometry {}: missing {}", g.id, g.fcidump.display()))?;
            need(g.dipole.is_empty() || g.dipole.len() == 3, &format!("geometry {}: give three dipole files or none", g.id))?;
            for d in &g.dipole {
                need(d.is_file(), &format!("geometry {}: missing {}", g.id, d.display()))?;
            }
        }
        self.determinants()?;
        Ok(())
    }

    /// Reference states on `basis`, checked for orthonormality.
    pub fn reference_states(&self, basis: &Arc<Basis>) -> Result<Vec<StateVector>, ScanError> {
        let states = self
            .determinants()?
            .into_iter()
            .zip(&self.references)
            .map(|(entries, r)| {
                build_reference(&entries, basis.clone()).map_err(|e| ScanError::Config(format!("reference {}: {}", r.label, e)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        check_orthonormal(&states, 1e-10).map_err(|e| ScanError::Config(format!("references: {}", e)))?;
        Ok(states)
    }
}
