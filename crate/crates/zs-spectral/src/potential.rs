//! Potentials φ = (φ₁, φ₂) as trigonometric polynomials or gauge-shifted constants.

use crate::error::{Error, Result};
use crate::serial::{from_pair, to_pair};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const FOCUSING_TOL: f64 = 1e-12;
const QUARTIC_GRID: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    /// φ₂ = −conj(φ₁)
    Focusing,
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    /// `φ_j(x) = Σ_{|n|≤band} coeffs_j[n + band] e^{2πinx}`.
    Fourier {
        band: usize,
        coeffs1: Vec<Complex64>,
        coeffs2: Vec<Complex64>,
        symmetry: Symmetry,
    },
    /// `φ_{a,k}(x) = (a e^{2πikx}, −conj(a) e^{−2πikx})`.
    Constant { a: Complex64, k: i64 },
}

impl Potential {
    pub fn zero() -> Self {
        Potential::Fourier {
            band: 0,
            coeffs1: vec![Complex64::new(0.0, 0.0)],
            coeffs2: vec![Complex64::new(0.0, 0.0)],
            symmetry: Symmetry::Focusing,
        }
    }

    pub fn constant(a: Complex64, k: i64) -> Self {
        Potential::Constant { a, k }
    }

    /// Fourier potential; a focusing flag is checked against the coefficients.
    pub fn fourier(
        band: usize,
        coeffs1: Vec<Complex64>,
        coeffs2: Vec<Complex64>,
        symmetry: Symmetry,
    ) -> Result<Self> {
        let len = 2 * band + 1;
        if coeffs1.len() != len || coeffs2.len() != len {
            return Err(Error::InvalidInput(format!(
                "band {band} needs {len} coefficients per component, got {} and {}",
                coeffs1.len(),
                coeffs2.len()
            )));
        }
        if coeffs1.iter().chain(&coeffs2).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidInput("non-finite Fourier coefficient".into()));
        }
        if symmetry == Symmetry::Focusing {
            for i in 0..len {
                let defect = (coeffs2[i] + coeffs1[len - 1 - i].conj()).norm();
                if defect > FOCUSING_TOL {
                    return Err(Error::InvalidInput(format!(
                        "coefficients violate the focusing relation at n = {} (defect {defect:.3e})",
                        i as i64 - band as i64
                    )));
                }
            }
        }
        Ok(Potential::Fourier { band, coeffs1, coeffs2, symmetry })
    }

    /// Focusing potential from the coefficients of φ₁ (indexed −K..K).
    pub fn make_focusing(coeffs1: Vec<Complex64>) -> Result<Self> {
        if coeffs1.len() % 2 == 0 {
            return Err(Error::InvalidInput(
                "coefficient list must have odd length 2K+1".into(),
            ));
        }
        let band = coeffs1.len() / 2;
        let coeffs2 = coeffs1.iter().rev().map(|c| -c.conj()).collect();
        Potential::fourier(band, coeffs1, coeffs2, Symmetry::Focusing)
    }

    /// Random focusing potential with Fourier band `band` and L² norm `norm`
    /// (both components counted).
    pub fn random_focusing<R: Rng>(rng: &mut R, band: usize, norm: f64) -> Self {
        let len = 2 * band + 1;
        let raw: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let l2 = (2.0 * raw.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
        let scale = if l2 > 0.0 { norm / l2 } else { 0.0 };
        Potential::make_focusing(raw.into_iter().map(|c| c * scale).collect())
            .expect("odd length by construction")
    }

    pub fn symmetry(&self) -> Symmetry {
        match self {
            Potential::Fourier { symmetry, .. } => *symmetry,
            Potential::Constant { .. } => Symmetry::Focusing,
        }
    }

    pub fn is_focusing(&self) -> bool {
        self.symmetry() == Symmetry::Focusing
    }

    /// Largest |n| with a possibly nonzero coefficient.
    pub fn band(&self) -> usize {
        match self {
            Potential::Fourier { band, .. } => *band,
            Potential::Constant { k, .. } => k.unsigned_abs() as usize,
        }
    }

    /// Fourier coefficient of φ₁ at frequency n (zero outside the band).
    pub fn coeff1(&self, n: i64) -> Complex64 {
        match self {
            Potential::Fourier { band, coeffs1, .. } => lookup(coeffs1, *band, n),
            Potential::Constant { a, k } => {
                if n == *k {
                    *a
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }

    /// Fourier coefficient of φ₂ at frequency n (zero outside the band).
    pub fn coeff2(&self, n: i64) -> Complex64 {
        match self {
            Potential::Fourier { band, coeffs2, .. } => lookup(coeffs2, *band, n),
            Potential::Constant { a, k } => {
                if n == -*k {
                    -a.conj()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }

    pub fn evaluate(&self, x: f64) -> (Complex64, Complex64) {
        match self {
            Potential::Constant { a, k } => {
                if *k == 0 {
                    (*a, -a.conj())
                } else {
                    let w = Complex64::from_polar(1.0, 2.0 * PI * (*k as f64) * x);
                    (*a * w, -a.conj() * w.conj())
                }
            }
            Potential::Fourier { band, coeffs1, coeffs2, .. } => {
                let b = *band as i64;
                let mut p1 = Complex64::new(0.0, 0.0);
                let mut p2 = Complex64::new(0.0, 0.0);
                for n in -b..=b {
                    let i = (n + b) as usize;
                    let w = Complex64::from_polar(1.0, 2.0 * PI * (n as f64) * x);
                    p1 += coeffs1[i] * w;
                    p2 += coeffs2[i] * w;
                }
                (p1, p2)
            }
        }
    }

    /// Upper bound for sup_x max(|φ₁(x)|, |φ₂(x)|).
    pub fn sup_bound(&self) -> f64 {
        match self {
            Potential::Constant { a, .. } => a.norm(),
            Potential::Fourier { coeffs1, coeffs2, .. } => {
                let s1: f64 = coeffs1.iter().map(|c| c.norm()).sum();
                let s2: f64 = coeffs2.iter().map(|c| c.norm()).sum();
                s1.max(s2)
            }
        }
    }

    /// `(Σ_n (1+(2πn)²)^N (|c₁[n]|² + |c₂[n]|²))^{1/2}`.
    pub fn sobolev_norm(&self, order: u32) -> f64 {
        let b = self.band() as i64;
        let mut acc = 0.0;
        for n in -b..=b {
            let w = (1.0 + (2.0 * PI * n as f64).powi(2)).powi(order as i32);
            acc += w * (self.coeff1(n).norm_sqr() + self.coeff2(n).norm_sqr());
        }
        acc.sqrt()
    }

    /// `(φ₁ e^{2πikx}, φ₂ e^{−2πikx})`. Fourier results carry the smallest band
    /// holding every nonzero coefficient.
    pub fn gauge_shift(&self, shift: i64) -> Potential {
        match self {
            Potential::Constant { a, k } => Potential::Constant { a: *a, k: k + shift },
            Potential::Fourier { band, symmetry, .. } => {
                let old = *band as i64;
                let new_band = trimmed_band(
                    (-old - shift.abs()..=old + shift.abs())
                        .filter(|&n| {
                            self.coeff1(n - shift) != Complex64::new(0.0, 0.0)
                                || self.coeff2(n + shift) != Complex64::new(0.0, 0.0)
                        })
                        .map(|n| n.unsigned_abs() as usize)
                        .max(),
                );
                let nb = new_band as i64;
                let c1 = (-nb..=nb).map(|n| self.coeff1(n - shift)).collect();
                let c2 = (-nb..=nb).map(|n| self.coeff2(n + shift)).collect();
                Potential::Fourier { band: new_band, coeffs1: c1, coeffs2: c2, symmetry: *symmetry }
            }
        }
    }

    /// `(J1, J2) = (∫|φ₁|², ∫|φ₁'|² − |φ₁|⁴)`; the quartic term uses a uniform grid.
    pub fn trace_invariants(&self) -> (f64, f64) {
        let b = self.band() as i64;
        let mut j1 = 0.0;
        let mut grad = 0.0;
        for n in -b..=b {
            let c = self.coeff1(n).norm_sqr();
            j1 += c;
            grad += (2.0 * PI * n as f64).powi(2) * c;
        }
        let quartic = match self {
            Potential::Constant { a, .. } => a.norm_sqr().powi(2),
            Potential::Fourier { .. } => {
                (0..QUARTIC_GRID)
                    .map(|j| self.evaluate(j as f64 / QUARTIC_GRID as f64).0.norm_sqr().powi(2))
                    .sum::<f64>()
                    / QUARTIC_GRID as f64
            }
        };
        (j1, grad - quartic)
    }

    /// The same potential in the Fourier representation.
    pub fn to_fourier(&self) -> Potential {
        match self {
            Potential::Fourier { .. } => self.clone(),
            Potential::Constant { .. } => {
                let b = self.band() as i64;
                Potential::Fourier {
                    band: b as usize,
                    coeffs1: (-b..=b).map(|n| self.coeff1(n)).collect(),
                    coeffs2: (-b..=b).map(|n| self.coeff2(n)).collect(),
                    symmetry: Symmetry::Focusing,
                }
            }
        }
    }

    /// `s·self + t·other` with real weights (so focusing is preserved).
    pub fn combine(&self, s: f64, other: &Potential, t: f64) -> Potential {
        if let (Potential::Constant { a: a1, k: k1 }, Potential::Constant { a: a2, k: k2 }) =
            (self, other)
        {
            if k1 == k2 {
                return Potential::Constant { a: *a1 * s + *a2 * t, k: *k1 };
            }
        }
        let b = self.band().max(other.band()) as i64;
        let symmetry = if self.is_focusing() && other.is_focusing() {
            Symmetry::Focusing
        } else {
            Symmetry::General
        };
        Potential::Fourier {
            band: b as usize,
            coeffs1: (-b..=b).map(|n| self.coeff1(n) * s + other.coeff1(n) * t).collect(),
            coeffs2: (-b..=b).map(|n| self.coeff2(n) * s + other.coeff2(n) * t).collect(),
            symmetry,
        }
    }

    /// Exact coefficient equality over the union of both bands.
    pub fn same_coefficients(&self, other: &Potential) -> bool {
        let b = self.band().max(other.band()) as i64;
        (-b..=b).all(|n| self.coeff1(n) == other.coeff1(n) && self.coeff2(n) == other.coeff2(n))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PotentialJson::from(self)).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Potential> {
        let raw: PotentialJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("potential JSON: {e}")))?;
        raw.try_into()
    }
}

fn lookup(coeffs: &[Complex64], band: usize, n: i64) -> Complex64 {
    let b = band as i64;
    if n.abs() > b {
        Complex64::new(0.0, 0.0)
    } else {
        coeffs[(n + b) as usize]
    }
}

fn trimmed_band(max_abs: Option<usize>) -> usize {
    max_abs.unwrap_or(0)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "lowercase")]
enum PotentialJson {
    Fourier {
        #[serde(rename = "K")]
        band: usize,
        coeffs1: Vec<[f64; 2]>,
        coeffs2: Vec<[f64; 2]>,
        symmetry: Symmetry,
    },
    Constant {
        a: [f64; 2],
        k: i64,
    },
}

impl From<&Potential> for PotentialJson {
    fn from(p: &Potential) -> Self {
        match p {
            Potential::Fourier { band, coeffs1, coeffs2, symmetry } => PotentialJson::Fourier {
                band: *band,
                coeffs1: coeffs1.iter().map(|c| to_pair(*c)).collect(),
                coeffs2: coeffs2.iter().map(|c| to_pair(*c)).collect(),
                symmetry: *symmetry,
            },
            Potential::Constant { a, k } => PotentialJson::Constant { a: to_pair(*a), k: *k },
        }
    }
}

impl TryFrom<PotentialJson> for Potential {
    type Error = Error;

    fn try_from(raw: PotentialJson) -> Result<Potential> {
        match raw {
            PotentialJson::Fourier { band, coeffs1, coeffs2, symmetry } => Potential::fourier(
                band,
                coeffs1.into_iter().map(from_pair).collect(),
                coeffs2.into_iter().map(from_pair).collect(),
                symmetry,
            ),
            PotentialJson::Constant { a, k } => {
                let a = from_pair(a);
                if !(a.re.is_finite() && a.im.is_finite()) {
                    return Err(Error::InvalidInput("non-finite constant".into()));
                }
                Ok(Potential::Constant { a, k })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn make_focusing_pairs_coefficients() {
        let p = Potential::make_focusing(vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(p.coeff2(0), c(0.0, 1.0));
        let p = Potential::make_focusing(vec![c(2.0, 1.0)]).unwrap();
        assert_eq!(p.coeff2(0), c(-2.0, 1.0));
        let p = Potential::make_focusing(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 3.0)]).unwrap();
        assert_eq!(p.coeff2(-1), c(0.0, 3.0));
    }

    #[test]
    fn evaluate_examples() {
        let (p1, p2) = Potential::constant(c(0.0, 4.0), 0).evaluate(0.3);
        assert_eq!((p1, p2), (c(0.0, 4.0), c(0.0, 4.0)));
        let (p1, p2) = Potential::constant(c(1.0, 0.0), 1).evaluate(0.0);
        assert_eq!((p1, p2), (c(1.0, 0.0), c(-1.0, 0.0)));
        let (p1, p2) = Potential::make_focusing(vec![c(1.0, 1.0)]).unwrap().evaluate(0.5);
        assert_eq!((p1, p2), (c(1.0, 1.0), c(-1.0, 1.0)));
    }

    #[test]
    fn focusing_flag_is_validated() {
        let bad = Potential::fourier(0, vec![c(1.0, 0.0)], vec![c(1.0, 0.0)], Symmetry::Focusing);
        assert!(bad.is_err());
        let ok = Potential::fourier(0, vec![c(1.0, 0.0)], vec![c(1.0, 0.0)], Symmetry::General);
        assert!(ok.is_ok());
        assert!(Potential::fourier(1, vec![c(1.0, 0.0)], vec![c(1.0, 0.0)], Symmetry::General)
            .is_err());
    }

    #[test]
    fn sobolev_examples() {
        assert_eq!(Potential::zero().sobolev_norm(3), 0.0);
        let p = Potential::constant(c(3.0, 0.0), 0);
        assert!((p.sobolev_norm(0) - 18f64.sqrt()).abs() < 1e-14);
        let single = Potential::fourier(
            1,
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0); 3],
            Symmetry::General,
        )
        .unwrap();
        assert!((single.sobolev_norm(1) - (1.0 + 4.0 * PI * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gauge_shift_examples() {
        let p = Potential::constant(c(2.0, 1.0), 0).gauge_shift(1);
        assert_eq!(p, Potential::constant(c(2.0, 1.0), 1));
        let f = Potential::make_focusing(vec![c(2.0, 1.0)]).unwrap().gauge_shift(2);
        assert_eq!(f.coeff1(2), c(2.0, 1.0));
        assert_eq!(f.coeff2(-2), c(-2.0, 1.0));
        assert_eq!(f.band(), 2);
    }

    #[test]
    fn trace_invariant_examples() {
        assert_eq!(Potential::zero().trace_invariants(), (0.0, 0.0));
        let (j1, j2) = Potential::constant(c(0.0, 2.0), 0).trace_invariants();
        assert!((j1 - 4.0).abs() < 1e-14 && (j2 + 16.0).abs() < 1e-12);
        let (f1, f2) = Potential::constant(c(0.0, 2.0), 0).to_fourier().trace_invariants();
        assert!((f1 - 4.0).abs() < 1e-14 && (f2 + 16.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Potential::random_focusing(&mut rng, 2, 0.7);
        let back = Potential::from_json(&p.to_json()).unwrap();
        assert_eq!(p, back);
        let q = Potential::constant(c(1.0, -2.0), -3);
        assert_eq!(Potential::from_json(&q.to_json()).unwrap(), q);
        assert!(Potential::from_json("{\"representation\":\"fourier\"}").is_err());
    }

    #[test]
    fn random_focusing_has_requested_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = Potential::random_focusing(&mut rng, 3, 0.5);
        assert!((p.sobolev_norm(0) - 0.5).abs() < 1e-14);
        assert!(p.is_focusing());
    }
}
