//! Finite polynomials carrying the eigenvalues in `B_R`, and their Sylvester
//! discriminants.
//!
//! Coefficients come from contour power sums on `|λ| = ρ = π(R + 1/4)` through
//! Newton's identities. They are kept in the scaled variable `z = λ/ρ`, where
//! every root lies in the unit disk, so degree-22 polynomials stay in range.

use crate::characteristic::CharKind;
use crate::error::{Error, Result};
use crate::linalg::{determinant, newton_identities, poly_roots};
use crate::potential::Potential;
use crate::rootfinder::{Contour, Disk};
use crate::serial;
use crate::tolerances::Tolerances;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Multiple-root threshold on the indicator.
pub const MULTIPLE_ROOT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    /// `Q_{p,R} = Π (λ_k^+ − λ)(λ_k^− − λ)`, degree `4R + 2`.
    Periodic,
    /// `Q_{D,R} = Π (μ_k − λ)(conj μ_k − λ)`, degree `2(2R + 1)`.
    Dirichlet,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::Periodic => "periodic",
            Which::Dirichlet => "dirichlet",
        }
    }
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" | "p" => Ok(Which::Periodic),
            "dirichlet" | "d" => Ok(Which::Dirichlet),
            _ => Err(Error::InvalidInput(format!("expected periodic or dirichlet, got {s:?}"))),
        }
    }
}

/// Monic polynomial in `z = λ/scale`, descending coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharPolynomial {
    #[serde(rename = "R")]
    pub r: usize,
    pub which: Which,
    pub scale: f64,
    #[serde(with = "serial::pairs")]
    pub coeffs: Vec<Complex64>,
    /// Dirichlet only: `Π (μ_k − λ)` before adding conjugates.
    #[serde(with = "serial::pairs", default, skip_serializing_if = "Vec::is_empty")]
    pub half: Vec<Complex64>,
}

impl CharPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Roots in the λ variable.
    pub fn roots(&self) -> Vec<Complex64> {
        poly_roots(&self.coeffs).into_iter().map(|z| z * self.scale).collect()
    }
}

/// Builds `Q_{p,R}` or `Q_{D,R}` from power sums on `∂B_R`.
pub fn build_qpoly(p: &Potential, r: usize, which: Which, tol: &Tolerances) -> Result<CharPolynomial> {
    let disk = Disk::ball(r);
    let mut contour = Contour::new(p, disk, tol.contour_nodes)?;
    let (kind, expected) = match which {
        Which::Periodic => (CharKind::ChiP, 4 * r + 2),
        Which::Dirichlet => (CharKind::ChiD, 2 * r + 1),
    };
    let moments = contour.moments(kind, 2 * expected, tol)?;
    if moments.count != expected {
        return Err(Error::Layout(format!(
            "B_{r} holds {} roots of {kind}, expected {expected}",
            moments.count
        )));
    }
    let sums = &moments.sums;
    Ok(match which {
        Which::Periodic => CharPolynomial {
            r,
            which,
            scale: disk.radius,
            coeffs: newton_identities(sums, expected),
            half: Vec::new(),
        },
        Which::Dirichlet => {
            let doubled: Vec<Complex64> = sums.iter().map(|s| Complex64::new(2.0 * s.re, 0.0)).collect();
            CharPolynomial {
                r,
                which,
                scale: disk.radius,
                coeffs: newton_identities(&doubled, 2 * expected),
                half: newton_identities(sums, expected),
            }
        }
    })
}

/// `Res(f, g)` as the determinant of the Sylvester matrix: `deg g` shifted
/// rows of `f` above `deg f` shifted rows of `g` (descending coefficients).
pub fn sylvester_resultant(f: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
    if f.len() < 2 || g.is_empty() {
        return Err(Error::InvalidInput("resultant needs deg f ≥ 1 and a nonempty g".into()));
    }
    let (m, n) = (f.len() - 1, g.len() - 1);
    let size = m + n;
    let zero = Complex64::new(0.0, 0.0);
    let mut rows = Vec::with_capacity(size);
    for shift in 0..n {
        let mut row = vec![zero; size];
        row[shift..shift + m + 1].copy_from_slice(f);
        rows.push(row);
    }
    for shift in 0..m {
        let mut row = vec![zero; size];
        row[shift..shift + n + 1].copy_from_slice(g);
        rows.push(row);
    }
    Ok(determinant(rows))
}

/// `D = (−1)^{d(d−1)/2} Res(q, q′) / lead(q)`, equal to `Π_{i<j} (r_i − r_j)²`
/// for monic `q`.
pub fn sylvester_discriminant(coeffs: &[Complex64]) -> Result<Complex64> {
    if coeffs.len() < 3 {
        return Err(Error::InvalidInput("discriminant needs degree ≥ 2".into()));
    }
    let lead = coeffs[0];
    if lead.norm() == 0.0 {
        return Err(Error::ZeroInput("leading coefficient"));
    }
    let d = coeffs.len() - 1;
    let deriv: Vec<Complex64> = coeffs[..d].iter().enumerate().map(|(j, c)| c * (d - j) as f64).collect();
    let res = sylvester_resultant(coeffs, &deriv)?;
    let sign = if (d * (d - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * res / lead)
}

/// `ln Π_{i<j} |c_i − c_j|²` over distinct layout centres `c = nπ`, each
/// listed `copies` times for `|n| ≤ R`.
fn ln_layout_reference(r: usize, copies: usize) -> f64 {
    let r = r as i64;
    let mut acc = 0.0;
    for n in -r..=r {
        for m in n + 1..=r {
            acc += (copies * copies) as f64 * 2.0 * ((m - n) as f64 * PI).ln();
        }
    }
    acc
}

/// `|D_λ| / Π_{i<j} |c_i − c_j|²` where `D_λ` is the discriminant in the λ
/// variable and the `c` are the counting-disk centres the roots are assigned
/// to (pairs sharing a centre contribute 1).
pub fn layout_indicator(disc_z: Complex64, degree: usize, scale: f64, r: usize, copies: usize) -> f64 {
    if disc_z.norm() == 0.0 {
        return 0.0;
    }
    let ln = disc_z.norm().ln() + (degree * (degree - 1)) as f64 * scale.ln() - ln_layout_reference(r, copies);
    ln.exp()
}

/// `|D| / (max_j |a_j|)^{2d − 2}` on the scaled coefficients.
pub fn coefficient_indicator(disc_z: Complex64, coeffs: &[Complex64]) -> f64 {
    let d = coeffs.len() - 1;
    let top = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    disc_z.norm() / top.powi(2 * d as i32 - 2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantReport {
    #[serde(rename = "R")]
    pub r: usize,
    pub which: Which,
    /// `ρ`; coefficients and discriminants refer to `z = λ/ρ`.
    pub scale: f64,
    #[serde(with = "serial::pairs")]
    pub coeffs: Vec<Complex64>,
    #[serde(with = "serial::pair")]
    pub discriminant: Complex64,
    /// Layout-normalized `|D|`; below `MULTIPLE_ROOT_TOL` signals a multiple
    /// root.
    pub indicator: f64,
    /// `|D| / (max|a_j|)^{2d−2}`.
    pub coefficient_indicator: f64,
    /// `|Im D| / max(|D|, reference)`.
    pub imaginary_part: f64,
    /// Dirichlet only: indicator of `Π (μ_k − λ)`, which vanishes exactly
    /// on Dirichlet collisions.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub collision_indicator: Option<f64>,
    /// Dirichlet only: layout-normalized `|Res(P, conj P)|` for
    /// `P = Π (μ_k − λ)`, which vanishes when some `μ_k` is real or two are
    /// conjugate.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub conjugate_indicator: Option<f64>,
    pub multiple: bool,
}

impl DiscriminantReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

pub fn discriminant_report(q: &CharPolynomial) -> Result<DiscriminantReport> {
    let d = q.degree();
    let disc = sylvester_discriminant(&q.coeffs)?;
    let indicator = layout_indicator(disc, d, q.scale, q.r, 2);
    let reference = layout_indicator(Complex64::new(1.0, 0.0), d, q.scale, q.r, 2);
    let imaginary_part = disc.im.abs() / disc.norm().max(1.0 / reference);
    let (collision_indicator, conjugate_indicator) = match q.which {
        Which::Periodic => (None, None),
        Which::Dirichlet => {
            let h = q.half.len() - 1;
            let collision = if h >= 2 {
                layout_indicator(sylvester_discriminant(&q.half)?, h, q.scale, q.r, 1)
            } else {
                1.0
            };
            let conj: Vec<Complex64> = q.half.iter().map(|c| c.conj()).collect();
            let res = sylvester_resultant(&q.half, &conj)?;
            // Res(P, P̄) = Π_{i,j} (μ_i − μ̄_j): h² factors against h(h−1) in a discriminant
            let ln = res.norm().ln() + (h * h) as f64 * q.scale.ln() - 0.5 * ln_layout_reference(q.r, 2);
            (Some(collision), Some(if res.norm() == 0.0 { 0.0 } else { ln.exp() }))
        }
    };
    Ok(DiscriminantReport {
        r: q.r,
        which: q.which,
        scale: q.scale,
        coeffs: q.coeffs.clone(),
        discriminant: disc,
        indicator,
        coefficient_indicator: coefficient_indicator(disc, &q.coeffs),
        imaginary_part,
        collision_indicator,
        conjugate_indicator,
        multiple: indicator < MULTIPLE_ROOT_TOL,
    })
}

pub fn multiple_root_indicator(p: &Potential, r: usize, which: Which, tol: &Tolerances) -> Result<f64> {
    Ok(discriminant_report(&build_qpoly(p, r, which, tol)?)?.indicator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::poly_from_roots;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degree_two_normalization() {
        // λ² + 1: Sylvester matrix [[1,0,1],[2,0,0],[0,2,0]] has determinant 4
        let q = [c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let f = [c(2.0, 0.0), c(0.0, 0.0)];
        assert!((sylvester_resultant(&q, &f).unwrap() - 4.0).norm() < 1e-14);
        assert!((sylvester_discriminant(&q).unwrap() + 4.0).norm() < 1e-14);
        let square = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(sylvester_discriminant(&square).unwrap().norm(), 0.0);
    }

    #[test]
    fn cubic_matches_pairwise_product() {
        let roots = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let d = sylvester_discriminant(&poly_from_roots(&roots)).unwrap();
        assert!((d - 4.0).norm() < 1e-12, "{d}");
    }

    #[test]
    fn zero_potential_polynomial() {
        let tol = Tolerances::default();
        let q = build_qpoly(&Potential::zero(), 0, Which::Periodic, &tol).unwrap();
        assert_eq!(q.degree(), 2);
        assert!(q.coeffs[1].norm() < 1e-10 && q.coeffs[2].norm() < 1e-10);
        let rep = discriminant_report(&q).unwrap();
        assert!(rep.multiple);
    }

    #[test]
    fn constant_ground_pair() {
        let tol = Tolerances::default();
        let p = Potential::constant(c(0.5, 0.0), 0);
        let q = build_qpoly(&p, 0, Which::Periodic, &tol).unwrap();
        // λ² + 1/4 in z = λ/ρ: z² + 1/(4ρ²)
        let rho = PI / 4.0;
        assert!((q.coeffs[2] - 0.25 / (rho * rho)).norm() < 1e-10);
        let rep = discriminant_report(&q).unwrap();
        assert!((rep.indicator - 1.0).abs() < 1e-8, "{}", rep.indicator);
        assert!(matches!(build_qpoly(&Potential::constant(c(1.0, 0.0), 0), 0, Which::Periodic, &tol), Err(Error::Layout(_))));
        assert!(!rep.multiple);
    }

    #[test]
    fn quadruple_root_is_detected() {
        let tol = Tolerances::default();
        let p = Potential::constant(c(PI, 0.0), 0);
        let rep = discriminant_report(&build_qpoly(&p, 1, Which::Periodic, &tol).unwrap()).unwrap();
        assert!(rep.indicator < 1e-8, "{}", rep.indicator);
    }

    #[test]
    fn focusing_coefficients_are_real() {
        let tol = Tolerances::default();
        let p = Potential::make_focusing(vec![c(0.1, 0.2), c(0.3, -0.1), c(0.0, 0.15)]).unwrap();
        for which in [Which::Periodic, Which::Dirichlet] {
            let q = build_qpoly(&p, 1, which, &tol).unwrap();
            assert!(q.coeffs.iter().all(|a| a.im.abs() < 1e-9), "{which}");
            let rep = discriminant_report(&q).unwrap();
            assert!(rep.imaginary_part < 1e-8, "{which}: {}", rep.imaginary_part);
        }
    }
}
