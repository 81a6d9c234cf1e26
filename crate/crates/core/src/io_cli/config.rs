//! Run configuration: one JSON file describing material, inclusion,
//! indenter, measurement protocol and conventions.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::units::{Dimension, Quantity};
use crate::elastic::{IndenterShape, InclusionParams, MaterialParams};
use crate::error::{invalid, Error, Result};
use crate::forward::{ForwardSetup, GridSpec, NoiseSpec};
use crate::inverse::Normalization;

/// Inclusion Poisson ratio assumed when the configuration does not give one.
pub const DEFAULT_NU0: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    #[serde(rename = "E")]
    pub young: Quantity,
    pub nu: f64,
}

/// Fields are optional because `extract` solves for some of them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionSection {
    pub d: Option<Quantity>,
    pub x0: Option<[Quantity; 2]>,
    pub r_eps: Option<Quantity>,
    pub alpha: Option<f64>,
    pub nu0: Option<f64>,
}

/// Either `radius` (sphere), `half_angle` (cone) or `lambda_exp` with `A`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndenterSection {
    pub lambda_exp: Option<f64>,
    /// Shape amplitude in SI units, m^(1-λ).
    #[serde(rename = "A")]
    pub amplitude: Option<f64>,
    pub radius: Option<Quantity>,
    pub half_angle: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Extent {
    Square(Quantity),
    Sides([Quantity; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub w: Quantity,
    /// Defaults to 6d on each side.
    pub extent: Option<Extent>,
    pub counts: Option<[usize; 2]>,
    pub center: Option<[Quantity; 2]>,
    #[serde(default)]
    pub noise_sigma: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conventions {
    #[serde(default = "default_normalization")]
    pub g_correction: Normalization,
    /// Unit system of bare numbers; only "SI" is defined.
    #[serde(default = "default_units")]
    pub units: String,
}

fn default_normalization() -> Normalization {
    Normalization::Repaired
}

fn default_units() -> String {
    "SI".into()
}

impl Default for Conventions {
    fn default() -> Self {
        Self { g_correction: default_normalization(), units: default_units() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub material: MaterialSection,
    #[serde(default)]
    pub inclusion: InclusionSection,
    pub indenter: IndenterSection,
    pub protocol: Option<ProtocolSection>,
    #[serde(default)]
    pub conventions: Conventions,
    /// Green-function correction at the load point; 0 for a half-space.
    pub g3: Option<Quantity>,
}

fn required<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Config(format!("missing field `{name}`")))
}

fn pair(q: &[Quantity; 2], dim: Dimension) -> Result<[f64; 2]> {
    Ok([q[0].si(dim)?, q[1].si(dim)?])
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn check(&self) -> Result<()> {
        if self.conventions.units != "SI" {
            return Err(Error::Config(format!(
                "unit system `{}` is not supported; bare numbers are SI, tag others explicitly",
                self.conventions.units
            )));
        }
        if let Some(p) = &self.protocol {
            if p.noise_sigma != 0.0 && p.seed.is_none() {
                return Err(Error::Config("protocol.seed is mandatory when noise_sigma > 0".into()));
            }
        }
        Ok(())
    }

    pub fn material(&self) -> Result<MaterialParams> {
        MaterialParams::new(self.material.young.si(Dimension::Pressure)?, self.material.nu)
    }

    pub fn indenter(&self) -> Result<IndenterShape> {
        let s = &self.indenter;
        match (&s.radius, &s.half_angle) {
            (Some(r), None) => {
                if s.amplitude.is_some() || s.lambda_exp.is_some_and(|l| l != 2.0) {
                    return Err(Error::Config("indenter: `radius` implies lambda_exp = 2 and excludes `A`".into()));
                }
                IndenterShape::spherical(r.si(Dimension::Length)?)
            }
            (None, Some(beta)) => {
                if s.amplitude.is_some() || s.lambda_exp.is_some_and(|l| l != 1.0) {
                    return Err(Error::Config("indenter: `half_angle` implies lambda_exp = 1 and excludes `A`".into()));
                }
                IndenterShape::conical(beta.si(Dimension::Angle)?)
            }
            (None, None) => IndenterShape::new(required(&s.lambda_exp, "indenter.lambda_exp")?, required(&s.amplitude, "indenter.A")?),
            (Some(_), Some(_)) => Err(Error::Config("indenter: give either `radius` or `half_angle`, not both".into())),
        }
    }

    pub fn nu0(&self) -> f64 {
        self.inclusion.nu0.unwrap_or(DEFAULT_NU0)
    }

    pub fn g3(&self) -> Result<f64> {
        self.g3.as_ref().map_or(Ok(0.0), |q| q.si(Dimension::Compliance))
    }

    pub fn normalization(&self) -> Normalization {
        self.conventions.g_correction
    }

    pub fn depth(&self) -> Result<f64> {
        required(&self.inclusion.d, "inclusion.d")?.si(Dimension::Length)
    }

    pub fn epicenter(&self) -> Result<[f64; 2]> {
        self.inclusion.x0.as_ref().map_or(Ok([0.0, 0.0]), |x| pair(x, Dimension::Length))
    }

    pub fn inclusion(&self) -> Result<InclusionParams> {
        let s = &self.inclusion;
        InclusionParams::new(
            self.depth()?,
            self.epicenter()?,
            required(&s.r_eps, "inclusion.r_eps")?.si(Dimension::Length)?,
            required(&s.alpha, "inclusion.alpha")?,
            self.nu0(),
        )
    }

    /// Indentation depth from the protocol section, when present.
    pub fn protocol_depth(&self) -> Result<Option<f64>> {
        self.protocol.as_ref().map(|p| p.w.si(Dimension::Length)).transpose()
    }

    /// Grid and model inputs for map generation.
    pub fn forward_setup(&self) -> Result<(GridSpec, ForwardSetup)> {
        let p = self.protocol.as_ref().ok_or_else(|| Error::Config("missing section `protocol`".into()))?;
        let inclusion = self.inclusion()?;
        let center = p.center.as_ref().map_or(Ok([0.0, 0.0]), |c| pair(c, Dimension::Length))?;
        let mut grid = GridSpec::default_for_depth(inclusion.depth, center);
        if let Some(c) = p.counts {
            grid.counts = c;
        }
        match &p.extent {
            Some(Extent::Square(q)) => {
                let e = q.si(Dimension::Length)?;
                grid.extent = [e, e];
            }
            Some(Extent::Sides(s)) => grid.extent = pair(s, Dimension::Length)?,
            None => {}
        }
        grid.validate()?;
        if !(p.noise_sigma.is_finite() && p.noise_sigma >= 0.0) {
            return Err(invalid("noise_sigma", format!("must be non-negative, got {}", p.noise_sigma)));
        }
        let noise = match (p.noise_sigma > 0.0, p.seed) {
            (true, Some(seed)) => Some(NoiseSpec { sigma: p.noise_sigma, seed }),
            (true, None) => return Err(Error::Config("protocol.seed is mandatory when noise_sigma > 0".into())),
            (false, _) => None,
        };
        let setup = ForwardSetup {
            material: self.material()?,
            inclusion,
            indenter: self.indenter()?,
            w: p.w.si(Dimension::Length)?,
            g3: self.g3()?,
            noise,
        };
        Ok((grid, setup))
    }
}
