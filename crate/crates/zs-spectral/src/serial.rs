//! Wire formats: complex numbers are `[re, im]` in JSON and `re+imj` in CSV.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn to_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn from_pair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// `re+imj` with shortest round-trip formatting of both parts (exponent form
/// outside `[1e-4, 1e15)`).
pub fn csv_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", real(z.re), sign, real(z.im.abs()))
}

fn real(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Serde adapter for a single complex number as `[re, im]`.
pub mod pair {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        to_pair(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        <[f64; 2]>::deserialize(d).map(from_pair)
    }
}

/// Serde adapter for an optional complex number (`null` or `[re, im]`).
pub mod opt_pair {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        z.map(to_pair).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Complex64>, D::Error> {
        Option::<[f64; 2]>::deserialize(d).map(|v| v.map(from_pair))
    }
}

/// Serde adapter for a list of complex numbers as `[[re, im], ...]`.
pub mod pairs {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<[f64; 2]> = v.iter().map(|z| to_pair(*z)).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Vec::<[f64; 2]>::deserialize(d).map(|v| v.into_iter().map(from_pair).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format() {
        assert_eq!(csv_complex(Complex64::new(1.5, -2.0)), "1.5-2j");
        assert_eq!(csv_complex(Complex64::new(0.0, 0.25)), "0+0.25j");
        assert_eq!(csv_complex(Complex64::new(-2.5e-17, 3e20)), "-2.5e-17+3e20j");
    }
}
