//! Discriminant `Δ = m̂₁ + m̂₄` and the characteristic functions
//! `χ_p = Δ² − 4`, `χ_p^± = Δ ∓ 2`, `χ_D = (m̂₄ + m̂₃ − m̂₂ − m̂₁)/2i`.

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::rootfinder::Disk;
use crate::transfer::{Integrator, Mat2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CharKind {
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "chi_p")]
    ChiP,
    #[serde(rename = "chi_p_plus")]
    ChiPPlus,
    #[serde(rename = "chi_p_minus")]
    ChiPMinus,
    #[serde(rename = "chi_D")]
    ChiD,
}

impl CharKind {
    pub const ALL: [CharKind; 5] =
        [CharKind::Delta, CharKind::ChiP, CharKind::ChiPPlus, CharKind::ChiPMinus, CharKind::ChiD];

    pub fn name(self) -> &'static str {
        match self {
            CharKind::Delta => "delta",
            CharKind::ChiP => "chi_p",
            CharKind::ChiPPlus => "chi_p_plus",
            CharKind::ChiPMinus => "chi_p_minus",
            CharKind::ChiD => "chi_D",
        }
    }
}

impl fmt::Display for CharKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CharKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "delta" => Ok(CharKind::Delta),
            "chi_p" | "chip" => Ok(CharKind::ChiP),
            "chi_p_plus" | "chip_plus" | "chi_p+" => Ok(CharKind::ChiPPlus),
            "chi_p_minus" | "chip_minus" | "chi_p-" => Ok(CharKind::ChiPMinus),
            "chi_d" | "chid" => Ok(CharKind::ChiD),
            _ => Err(Error::InvalidInput(format!("unknown characteristic kind {s:?}"))),
        }
    }
}

/// Floquet matrix and its λ-derivative at one spectral point.
#[derive(Clone, Copy, Debug)]
pub struct FloquetSample {
    pub lambda: Complex64,
    pub m: Mat2,
    pub dm: Mat2,
}

impl FloquetSample {
    pub fn new(integ: &Integrator, lambda: Complex64) -> Result<Self> {
        let (m, dm) = integ.monodromy(lambda)?;
        Ok(FloquetSample { lambda, m, dm })
    }

    pub fn delta(&self) -> (Complex64, Complex64) {
        (self.m[0] + self.m[3], self.dm[0] + self.dm[3])
    }

    /// `(χ(λ), χ̇(λ))`.
    pub fn char_value(&self, kind: CharKind) -> (Complex64, Complex64) {
        let (d, dd) = self.delta();
        match kind {
            CharKind::Delta => (d, dd),
            CharKind::ChiP => (d * d - 4.0, 2.0 * d * dd),
            CharKind::ChiPPlus => (d - 2.0, dd),
            CharKind::ChiPMinus => (d + 2.0, dd),
            CharKind::ChiD => {
                let two_i = Complex64::new(0.0, 2.0);
                let (m, dm) = (&self.m, &self.dm);
                ((m[3] + m[2] - m[1] - m[0]) / two_i, (dm[3] + dm[2] - dm[1] - dm[0]) / two_i)
            }
        }
    }

    /// Size `χ` would have without cancellation: the largest Floquet entry
    /// (at least 1), squared for `χ_p`.
    pub fn natural_size(&self, kind: CharKind) -> f64 {
        let entries = self.m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if kind == CharKind::ChiP {
            entries * entries
        } else {
            entries
        }
    }
}

pub fn evaluate_char(p: &Potential, lambda: Complex64, kind: CharKind) -> Result<(Complex64, Complex64)> {
    let integ = Integrator::new(p, lambda.norm(), false);
    Ok(FloquetSample::new(&integ, lambda)?.char_value(kind))
}

/// Values on a positively oriented circle at `λ_j = c + r·e^{2πij/N}`.
#[derive(Clone, Debug)]
pub struct ContourValues {
    pub nodes: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub dvalues: Vec<Complex64>,
    pub min_abs: f64,
    pub max_abs: f64,
}

/// Samples `kind` on `∂disk`; fails with `BoundaryRoot` when some node has
/// `|χ| < clearance · natural_size`.
pub fn char_on_contour(
    p: &Potential,
    disk: &Disk,
    nodes: usize,
    kind: CharKind,
    clearance: f64,
) -> Result<ContourValues> {
    if nodes < 64 {
        return Err(Error::InvalidInput("contour needs at least 64 nodes".into()));
    }
    let integ = Integrator::new(p, disk.center.norm() + disk.radius, false);
    let mut out = ContourValues {
        nodes: Vec::with_capacity(nodes),
        values: Vec::with_capacity(nodes),
        dvalues: Vec::with_capacity(nodes),
        min_abs: f64::INFINITY,
        max_abs: 0.0,
    };
    let mut worst = (f64::INFINITY, 1.0);
    for j in 0..nodes {
        let z = disk.center + Complex64::from_polar(disk.radius, 2.0 * PI * j as f64 / nodes as f64);
        let sample = FloquetSample::new(&integ, z)?;
        let (v, dv) = sample.char_value(kind);
        let size = sample.natural_size(kind);
        if v.norm() / size < worst.0 / worst.1 {
            worst = (v.norm(), size);
        }
        out.min_abs = out.min_abs.min(v.norm());
        out.max_abs = out.max_abs.max(v.norm());
        out.nodes.push(z);
        out.values.push(v);
        out.dvalues.push(dv);
    }
    if !(worst.0 >= clearance * worst.1) {
        return Err(Error::BoundaryRoot { min: worst.0, scale: worst.1 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_potential_closed_forms() {
        let p = Potential::zero();
        for lam in [c(0.3, 0.0), c(2.0, -0.5), c(-4.0, 1.0)] {
            let (d, dd) = evaluate_char(&p, lam, CharKind::Delta).unwrap();
            assert!((d - 2.0 * lam.cos()).norm() < 1e-12);
            assert!((dd + 2.0 * lam.sin()).norm() < 1e-12);
            let (s, ds) = evaluate_char(&p, lam, CharKind::ChiD).unwrap();
            assert!((s - lam.sin()).norm() < 1e-12);
            assert!((ds - lam.cos()).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_chi_p_is_minus_four_sin_squared() {
        let a = c(2.0, 1.0);
        let p = Potential::constant(a, 0);
        let lam = c(1.2, 0.4);
        let kappa = (lam * lam + a.norm_sqr()).sqrt();
        let (v, _) = evaluate_char(&p, lam, CharKind::ChiP).unwrap();
        let s = kappa.sin();
        assert!((v + 4.0 * s * s).norm() < 1e-11);
    }

    #[test]
    fn chi_p_factors() {
        let p = Potential::make_focusing(vec![c(0.1, 0.3), c(0.4, 0.0), c(-0.2, 0.1)]).unwrap();
        let integ = Integrator::new(&p, 5.0, false);
        let s = FloquetSample::new(&integ, c(2.5, -1.1)).unwrap();
        let (plus, dplus) = s.char_value(CharKind::ChiPPlus);
        let (minus, dminus) = s.char_value(CharKind::ChiPMinus);
        let (prod, dprod) = s.char_value(CharKind::ChiP);
        assert!((plus * minus - prod).norm() < 1e-10 * prod.norm().max(1.0));
        assert!((dplus * minus + plus * dminus - dprod).norm() < 1e-10 * dprod.norm().max(1.0));
    }

    #[test]
    fn parse_names() {
        for k in CharKind::ALL {
            assert_eq!(k.name().parse::<CharKind>().unwrap(), k);
        }
        assert_eq!("chiD".parse::<CharKind>().unwrap(), CharKind::ChiD);
        assert!("nope".parse::<CharKind>().is_err());
    }

    #[test]
    fn contour_clearance() {
        let p = Potential::zero();
        let disk = Disk::counting(1);
        let vals = char_on_contour(&p, &disk, 64, CharKind::ChiP, 1e-8).unwrap();
        assert!(vals.min_abs > 0.0);
        // a contour through the root π fails
        let through = Disk::new(c(PI - 0.5, 0.0), 0.5).unwrap();
        assert!(matches!(
            char_on_contour(&p, &through, 64, CharKind::ChiD, 1e-8),
            Err(Error::BoundaryRoot { .. })
        ));
    }
}
