//! Numerical tolerances shared by the root finder and the classifier.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Max distance of the raw winding integral from an integer.
    pub winding_window: f64,
    /// Initial contour node count.
    pub contour_nodes: usize,
    /// Cap for adaptive node doubling.
    pub contour_nodes_max: usize,
    /// On a contour, |χ| must exceed this times the local size of the
    /// Floquet entries (their square for χ_p).
    pub boundary_clearance: f64,
    /// Base cluster radius, scaled by (1 + |center|).
    pub cluster_radius: f64,
    /// Floor for the relative noise of contour power sums; k-fold clusters
    /// may spread to `radius · noise^(1/k)`.
    pub cluster_noise: f64,
    /// Max roots per disk.
    pub max_roots: usize,
    /// Refined roots must satisfy |χ| < residual · max|χ on contour|.
    pub residual: f64,
    /// ‖M̂ ∓ Id‖_max threshold for geometric multiplicity two.
    pub geometric: f64,
    /// |Im λ| < reality · (1 + |λ|) counts as real.
    pub reality: f64,
    /// Conjugate pairing and record matching tolerance.
    pub pairing: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            winding_window: 0.2,
            contour_nodes: 256,
            contour_nodes_max: 4096,
            boundary_clearance: 1e-8,
            cluster_radius: 1e-5,
            cluster_noise: 1e-12,
            max_roots: 64,
            residual: 1e-7,
            geometric: 1e-6,
            reality: 1e-7,
            pairing: 1e-7,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 11] = [
        "winding-window",
        "contour-nodes",
        "contour-nodes-max",
        "boundary-clearance",
        "cluster-radius",
        "cluster-noise",
        "max-roots",
        "residual",
        "geometric",
        "reality",
        "pairing",
    ];

    /// Override one tolerance by its command-line key (`winding-window`, ...).
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance {key} must be positive, got {value}"
            )));
        }
        let as_count = |v: f64| -> Result<usize> {
            if v.fract() != 0.0 {
                return Err(Error::InvalidInput(format!("{key} must be an integer")));
            }
            Ok(v as usize)
        };
        match key.replace('_', "-").as_str() {
            "winding-window" => self.winding_window = value,
            "contour-nodes" => self.contour_nodes = as_count(value)?,
            "contour-nodes-max" => self.contour_nodes_max = as_count(value)?,
            "boundary-clearance" => self.boundary_clearance = value,
            "cluster-radius" => self.cluster_radius = value,
            "cluster-noise" => self.cluster_noise = value,
            "max-roots" => self.max_roots = as_count(value)?,
            "residual" => self.residual = value,
            "geometric" => self.geometric = value,
            "reality" => self.reality = value,
            "pairing" => self.pairing = value,
            _ => return Err(Error::InvalidInput(format!("unknown tolerance key {key}"))),
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if self.contour_nodes < 64 {
            return Err(Error::InvalidInput("contour-nodes must be at least 64".into()));
        }
        if self.contour_nodes_max < self.contour_nodes {
            return Err(Error::InvalidInput(
                "contour-nodes-max must not be below contour-nodes".into(),
            ));
        }
        if self.winding_window >= 0.5 {
            return Err(Error::InvalidInput("winding-window must be below 0.5".into()));
        }
        Ok(())
    }

    pub fn is_real(&self, z: num_complex::Complex64) -> bool {
        z.im.abs() < self.reality * (1.0 + z.norm())
    }
}
