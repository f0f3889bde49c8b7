use serde::Deserialize;
use std::path::Path;
use thinplate::error::{Error, Result};
use thinplate::extension::CapacityInput;
use thinplate::fem2d::Domain;
use thinplate::material::{make_isotropic, reduce_load, F0Term, LoadSpec, ReducedLoad, StiffnessMatrix};
use thinplate::poly::Poly2;

/// Polynomial given as `[i, j, c]` triples for `c y1^i y2^j`.
pub type Terms = Vec<(u32, u32, f64)>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub material: MaterialConfig,
    #[serde(default = "default_domain")]
    pub domain: Domain,
    #[serde(default)]
    pub mesh: MeshConfig,
    pub load: LoadConfig,
    #[serde(default)]
    pub capacity: CapacityConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn default_domain() -> Domain {
    Domain::unit_disk()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum MaterialConfig {
    Isotropic { lambda: f64, mu: f64 },
    /// Upper triangle of the Mandel stiffness matrix, row-major.
    Mandel(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    /// Target element size of the coarsest mesh; each further level halves it.
    pub target_h: f64,
    pub levels: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { target_h: 0.1, levels: 3 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct F0Config {
    pub component: usize,
    pub spatial: Terms,
    pub zeta: Vec<f64>,
}

/// Either the plate load `g` directly or the three-dimensional data `f0`, `f1_3`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    #[serde(default)]
    pub g1: Option<Terms>,
    #[serde(default)]
    pub g2: Option<Terms>,
    #[serde(default)]
    pub g3: Option<Terms>,
    #[serde(default)]
    pub f0: Option<Vec<F0Config>>,
    #[serde(default)]
    pub f1_3: Option<Terms>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub c_sharp: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub default_zero: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub h: Option<Vec<f64>>,
    #[serde(default)]
    pub ln_h: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFormat {
    Csv,
    Vtk,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub fields: Vec<FieldFormat>,
    /// Points per direction of the in-plane sampling grid.
    pub grid: usize,
    /// Number of transverse sample levels.
    pub zeta_levels: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), fields: vec![FieldFormat::Csv, FieldFormat::Vtk], grid: 21, zeta_levels: 3 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub decay: bool,
    pub stationarity: bool,
    pub green_formula: bool,
    pub perturbations: usize,
    pub q_pairs: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { decay: true, stationarity: true, green_formula: true, perturbations: 50, q_pairs: 1000 }
    }
}

/// One model parameter value; `h` is absent when `exp(-|ln h|)` underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HValue {
    pub h: Option<f64>,
    pub ln_h_abs: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses and validates a configuration; errors name the offending line or field.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.stiffness()?;
        if self.capacity.c_sharp.is_some() {
            self.capacity()?;
        }
        self.plate_load()?;
        self.h_values()?;
        if !(self.mesh.target_h > 0.0) {
            return Err(Error::InvalidInput("mesh.target_h must be positive".into()));
        }
        if self.mesh.levels == 0 {
            return Err(Error::InvalidInput("mesh.levels must be at least 1".into()));
        }
        if self.output.grid < 2 || self.output.zeta_levels == 0 {
            return Err(Error::InvalidInput("output.grid must be >= 2 and output.zeta_levels >= 1".into()));
        }
        Ok(())
    }

    pub fn stiffness(&self) -> Result<StiffnessMatrix> {
        match &self.material {
            MaterialConfig::Isotropic { lambda, mu } => make_isotropic(*lambda, *mu),
            MaterialConfig::Mandel(v) => {
                if v.len() != 21 {
                    return Err(Error::InvalidInput(format!("material.mandel needs 21 entries, found {}", v.len())));
                }
                StiffnessMatrix::from_upper_triangle(v)
            }
        }
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self.material, MaterialConfig::Isotropic { .. })
    }

    pub fn capacity(&self) -> Result<CapacityInput> {
        match (&self.capacity.c_sharp, self.capacity.default_zero) {
            (Some(_), true) => Err(Error::InvalidInput("capacity: give either c_sharp or default_zero, not both".into())),
            (Some(rows), false) => CapacityInput::from_rows(rows),
            (None, _) => Ok(CapacityInput::default_zero()),
        }
    }

    pub fn plate_load(&self) -> Result<ReducedLoad> {
        let l = &self.load;
        let direct = l.g1.is_some() || l.g2.is_some() || l.g3.is_some();
        let three_d = l.f0.is_some() || l.f1_3.is_some();
        let poly = |t: &Option<Terms>| t.clone().map(Poly2::from_terms).unwrap_or_else(Poly2::zero);
        match (direct, three_d) {
            (true, true) => Err(Error::InvalidInput("load: give either g1/g2/g3 or f0/f1_3, not both".into())),
            (false, false) => Err(Error::InvalidInput("load: no load terms given".into())),
            (true, false) => Ok(ReducedLoad::direct(poly(&l.g1), poly(&l.g2), poly(&l.g3))),
            (false, true) => {
                let f0 = l
                    .f0
                    .iter()
                    .flatten()
                    .map(|t| F0Term { component: t.component, spatial: Poly2::from_terms(t.spatial.clone()), zeta: t.zeta.clone() })
                    .collect();
                reduce_load(&LoadSpec { f0, f1_3: poly(&l.f1_3) })
            }
        }
    }

    pub fn h_values(&self) -> Result<Vec<HValue>> {
        match (&self.model.h, &self.model.ln_h) {
            (Some(_), Some(_)) => Err(Error::InvalidInput("model: give either h or ln_h, not both".into())),
            (Some(hs), None) => hs
                .iter()
                .map(|&h| {
                    if h > 0.0 && h < 1.0 {
                        Ok(HValue { h: Some(h), ln_h_abs: -h.ln() })
                    } else {
                        Err(Error::InvalidInput(format!("model.h entries must lie in (0, 1), found {h}")))
                    }
                })
                .collect(),
            (None, Some(ls)) => ls
                .iter()
                .map(|&l| {
                    if l > 0.0 && l.is_finite() {
                        let h = (-l).exp();
                        Ok(HValue { h: (h > 0.0).then_some(h), ln_h_abs: l })
                    } else {
                        Err(Error::InvalidInput(format!("model.ln_h entries must be positive, found {l}")))
                    }
                })
                .collect(),
            (None, None) => Ok(Vec::new()),
        }
    }

    /// Target sizes of the mesh hierarchy, coarsest first.
    pub fn mesh_sizes(&self) -> Vec<f64> {
        (0..self.mesh.levels).map(|k| self.mesh.target_h / f64::from(1u32 << k.min(30))).collect()
    }
}
