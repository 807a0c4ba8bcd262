//! Catalog of fields with known bi-Hamiltonian structure.
//!
//! Entries are TOML tables:
//!
//! ```toml
//! [[system]]
//! name = "euler-top"
//! field = "y*z, x*z, x*y"
//! hamiltonians = ["(x^2 - y^2)/2", "(y^2 - z^2)/2"]   # optional
//! poisson = ["x, -y, 0", "0, -y, z"]                   # optional
//! seed = [1.0, 2.0, 3.0]
//! notes = "free text"
//! ```
//!
//! `poisson` requires `hamiltonians` and must satisfy
//! `v = J1 x grad H2 = J2 x grad H1`. Known data is checked at load.

use std::path::Path;
use std::sync::OnceLock;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::calc3::VectorHandle;
use crate::error::{Error, Result};
use crate::expr::{parse_scalar, parse_vector, Expr, VectorFieldSpec};
use crate::poisson::{compatibility_residual, hamilton_residual, jacobi_residual, nambu_residual};

/// Residual bound checked at load.
pub const LOAD_TOLERANCE: f64 = 1e-9;

const BUILTIN: &str = include_str!("catalog.toml");

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawCatalog {
    system: Vec<RawEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawEntry {
    name: String,
    field: String,
    hamiltonians: Option<[String; 2]>,
    poisson: Option<[String; 2]>,
    seed: [f64; 3],
    #[serde(default)]
    notes: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub field: VectorFieldSpec,
    pub known_hamiltonians: Option<[Expr; 2]>,
    pub known_poisson: Option<[VectorFieldSpec; 2]>,
    pub recommended_seed: Vector3<f64>,
    pub notes: String,
}

/// Residuals of an entry's known data at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KnownResiduals {
    pub psi: Option<f64>,
    pub nambu: Option<f64>,
    /// `|grad H1 . v|`, `|grad H2 . v|`
    pub conservation: Option<[f64; 2]>,
    /// `|v - J1 x grad H2|`, `|v - J2 x grad H1|`
    pub hamilton: Option<[f64; 2]>,
    /// `|J . v|` for both structures
    pub orthogonality: Option<[f64; 2]>,
    pub jacobi: Option<[f64; 2]>,
    pub compatibility: Option<f64>,
}

impl KnownResiduals {
    /// Largest residual, with `psi` measured as `|psi - 1|` when `expect_unit_psi`.
    pub fn max(&self) -> f64 {
        let pairs = [
            self.conservation,
            self.hamilton,
            self.orthogonality,
            self.jacobi,
        ];
        pairs
            .iter()
            .flatten()
            .flat_map(|p| p.iter().copied())
            .chain(self.nambu)
            .chain(self.compatibility)
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

impl CatalogEntry {
    fn from_raw(raw: RawEntry) -> Result<Self> {
        let ctx = |what: &str, e: crate::error::ParseError| Error::CatalogCheck {
            name: raw.name.clone(),
            detail: format!("{what}: {e}"),
        };
        let field = parse_vector(&raw.field).map_err(|e| ctx("field", e))?;
        let known_hamiltonians = match &raw.hamiltonians {
            Some([a, b]) => Some([
                parse_scalar(a).map_err(|e| ctx("H1", e))?,
                parse_scalar(b).map_err(|e| ctx("H2", e))?,
            ]),
            None => None,
        };
        let known_poisson = match &raw.poisson {
            Some([a, b]) => Some([
                parse_vector(a).map_err(|e| ctx("J1", e))?,
                parse_vector(b).map_err(|e| ctx("J2", e))?,
            ]),
            None => None,
        };
        if known_poisson.is_some() && known_hamiltonians.is_none() {
            return Err(Error::CatalogCheck {
                name: raw.name,
                detail: "poisson vectors need hamiltonians".into(),
            });
        }
        Ok(CatalogEntry {
            name: raw.name,
            field,
            known_hamiltonians,
            known_poisson,
            recommended_seed: Vector3::from(raw.seed),
            notes: raw.notes,
        })
    }

    fn to_raw(&self) -> RawEntry {
        RawEntry {
            name: self.name.clone(),
            field: self.field.to_string(),
            hamiltonians: self
                .known_hamiltonians
                .as_ref()
                .map(|h| [h[0].to_string(), h[1].to_string()]),
            poisson: self
                .known_poisson
                .as_ref()
                .map(|j| [j[0].to_string(), j[1].to_string()]),
            seed: [
                self.recommended_seed[0],
                self.recommended_seed[1],
                self.recommended_seed[2],
            ],
            notes: self.notes.clone(),
        }
    }

    /// Residuals of the known data at `p`; `None` fields where data is absent.
    pub fn known_residuals(&self, p: &Vector3<f64>) -> Result<KnownResiduals> {
        let mut out = KnownResiduals::default();
        let Some([h1, h2]) = &self.known_hamiltonians else {
            return Ok(out);
        };
        let nambu = nambu_residual(&self.field, h1, h2, p)?;
        out.psi = Some(nambu.psi);
        out.nambu = Some(nambu.residual);
        if let Some([j1, j2]) = &self.known_poisson {
            let (j1, j2): (VectorHandle, VectorHandle) = (j1.clone().into(), j2.clone().into());
            let r1 = hamilton_residual(&j1, h2, &self.field, p)?;
            let r2 = hamilton_residual(&j2, h1, &self.field, p)?;
            out.conservation = Some([r2.grad_h_dot_v.abs(), r1.grad_h_dot_v.abs()]);
            out.hamilton = Some([r1.vec_residual.norm(), r2.vec_residual.norm()]);
            out.orthogonality = Some([r1.j_dot_v.abs(), r2.j_dot_v.abs()]);
            out.jacobi = Some([
                jacobi_residual(&j1, p)?.abs(),
                jacobi_residual(&j2, p)?.abs(),
            ]);
            out.compatibility = Some(compatibility_residual(&j1, &j2, p, None)?.abs());
        } else {
            let vp = self.field.eval_f64(p)?;
            out.conservation = Some([
                h1.eval_jet2(p)?.gradient.dot(&vp).abs(),
                h2.eval_jet2(p)?.gradient.dot(&vp).abs(),
            ]);
        }
        Ok(out)
    }

    fn check(&self) -> Result<()> {
        let r = self
            .known_residuals(&self.recommended_seed)
            .map_err(|e| Error::CatalogCheck {
                name: self.name.clone(),
                detail: e.to_string(),
            })?;
        if r.max() > LOAD_TOLERANCE {
            return Err(Error::CatalogCheck {
                name: self.name.clone(),
                detail: format!("max residual {:e} at the recommended seed", r.max()),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

impl Catalog {
    /// The built-in catalog.
    pub fn builtin() -> &'static Catalog {
        static CATALOG: OnceLock<Catalog> = OnceLock::new();
        CATALOG.get_or_init(|| Catalog::from_toml_str(BUILTIN).expect("built-in catalog is valid"))
    }

    pub fn from_toml_str(src: &str) -> Result<Catalog> {
        let raw: RawCatalog =
            toml::from_str(src).map_err(|e| Error::InvalidInput(format!("catalog: {e}")))?;
        let mut entries = Vec::with_capacity(raw.system.len());
        for r in raw.system {
            if entries.iter().any(|e: &CatalogEntry| e.name == r.name) {
                return Err(Error::InvalidInput(format!(
                    "catalog: duplicate system `{}`",
                    r.name
                )));
            }
            let entry = CatalogEntry::from_raw(r)?;
            entry.check()?;
            entries.push(entry);
        }
        Ok(Catalog { entries })
    }

    pub fn from_path(path: &Path) -> Result<Catalog> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Catalog::from_toml_str(&src)
    }

    pub fn to_toml_string(&self) -> String {
        let raw = RawCatalog {
            system: self.entries.iter().map(CatalogEntry::to_raw).collect(),
        };
        toml::to_string(&raw).expect("catalog serializes")
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.name.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&CatalogEntry> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownSystem {
                name: name.to_string(),
                available: self.names(),
            })
    }
}

/// Looks `name` up in the built-in catalog.
pub fn get_system(name: &str) -> Result<CatalogEntry> {
    Catalog::builtin().get(name).cloned()
}
