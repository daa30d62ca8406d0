//! Closed-form spectra of the constant potentials `φ_{a,k}`.
//!
//! For `φ_a = (a, −ā)`, `Δ(λ) = 2cos κ`, `χ_p = −4 sin²κ` and
//! `χ_D = (sin κ/κ)(λ − i·Im a)` with `κ = √(λ² + |a|²)`. Periodic eigenvalues
//! solve `λ² + |a|² = n²π²` and are proper for even n, anti-periodic for odd n.
//! The gauge shift `φ_{a,k}` moves every value by `−kπ` and, for odd k, swaps
//! proper and anti-periodic.

use crate::classify::{Parity, SpectrumReport};
use crate::rootfinder::{counting_indices, Disk};
use crate::serial;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `|a| = nπ` is treated as resonant within this relative tolerance.
const RESONANCE_TOL: f64 = 1e-12;
/// Closed-form values closer than this (relative) are one eigenvalue.
const MERGE_TOL: f64 = 1e-9;
/// Nearest-value matching radius between oracle and numeric records.
pub const MATCH_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    #[serde(with = "serial::pair")]
    pub value: Complex64,
    pub m_alg: usize,
    pub m_geom: Option<u8>,
    pub parity: Parity,
    /// Indices n of `λ̂_n^±` or `μ̂_n` landing on this value.
    pub indices: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSpectrum {
    #[serde(with = "serial::pair")]
    pub a: Complex64,
    pub k: i64,
    pub periodic: Vec<OracleRecord>,
    pub dirichlet: Vec<OracleRecord>,
}

impl OracleSpectrum {
    pub fn new(a: Complex64, k: i64, n_range: usize) -> Self {
        let (periodic, dirichlet) = shifted_spectrum(a, k, n_range);
        OracleSpectrum { a, k, periodic, dirichlet }
    }

    pub fn records(&self) -> impl Iterator<Item = &OracleRecord> {
        self.periodic.iter().chain(&self.dirichlet)
    }
}

/// Solution of `λ² = n²π² − |a|²` signed by n; exactly 0 when `|a| = |n|π`.
fn branch(a_abs: f64, n: i64) -> Complex64 {
    let np = n as f64 * PI;
    let d = np * np - a_abs * a_abs;
    let sign = n.signum() as f64;
    if d.abs() <= RESONANCE_TOL * np * np {
        Complex64::new(0.0, 0.0)
    } else if d > 0.0 {
        Complex64::new(sign * d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, sign * (-d).sqrt())
    }
}

fn push_merged(list: &mut Vec<OracleRecord>, rec: OracleRecord) {
    let tol = MERGE_TOL * (1.0 + rec.value.norm());
    match list.iter_mut().find(|r| r.parity == rec.parity && (r.value - rec.value).norm() <= tol) {
        Some(r) => {
            r.m_alg += rec.m_alg;
            r.m_geom = r.m_geom.max(rec.m_geom);
            r.indices.extend(rec.indices);
        }
        None => list.push(rec),
    }
}

fn sort_records(list: &mut [OracleRecord]) {
    list.sort_by(|x, y| x.value.re.total_cmp(&y.value.re).then(x.value.im.total_cmp(&y.value.im)));
}

/// Periodic and anti-periodic eigenvalues `λ̂_n^±`, `|n| ≤ n_range`.
pub fn constant_periodic(a: Complex64, n_range: usize) -> Vec<OracleRecord> {
    let a_abs = a.norm();
    let mut out = Vec::new();
    for n in -(n_range as i64)..=(n_range as i64) {
        let parity = if n % 2 == 0 { Parity::Proper } else { Parity::Anti };
        if n == 0 {
            if a_abs == 0.0 {
                out.push(OracleRecord { value: 0.0.into(), m_alg: 2, m_geom: Some(2), parity, indices: vec![0] });
            } else {
                for s in [1.0, -1.0] {
                    let value = Complex64::new(0.0, s * a_abs);
                    out.push(OracleRecord { value, m_alg: 1, m_geom: Some(1), parity, indices: vec![0] });
                }
            }
            continue;
        }
        let rec = OracleRecord { value: branch(a_abs, n), m_alg: 2, m_geom: Some(2), parity, indices: vec![n] };
        push_merged(&mut out, rec);
    }
    sort_records(&mut out);
    out
}

/// Dirichlet eigenvalues `μ̂_n`, `|n| ≤ n_range`, with coincidences merged.
pub fn constant_dirichlet(a: Complex64, n_range: usize) -> Vec<OracleRecord> {
    let a_abs = a.norm();
    let mut out = Vec::new();
    let mu0 = OracleRecord {
        value: Complex64::new(0.0, a.im),
        m_alg: 1,
        m_geom: None,
        parity: Parity::Dirichlet,
        indices: vec![0],
    };
    push_merged(&mut out, mu0);
    for n in (1..=n_range as i64).flat_map(|n| [-n, n]) {
        let rec =
            OracleRecord { value: branch(a_abs, n), m_alg: 1, m_geom: None, parity: Parity::Dirichlet, indices: vec![n] };
        push_merged(&mut out, rec);
    }
    sort_records(&mut out);
    out
}

/// Spectra of `φ_{a,k}`: values shifted by `−kπ`, parity swapped for odd k.
pub fn shifted_spectrum(a: Complex64, k: i64, n_range: usize) -> (Vec<OracleRecord>, Vec<OracleRecord>) {
    let shift = Complex64::new(-(k as f64) * PI, 0.0);
    let flip = k.rem_euclid(2) == 1;
    let mut periodic = constant_periodic(a, n_range);
    for r in periodic.iter_mut() {
        r.value += shift;
        if flip {
            r.parity = if r.parity == Parity::Proper { Parity::Anti } else { Parity::Proper };
        }
    }
    let mut dirichlet = constant_dirichlet(a, n_range);
    for r in dirichlet.iter_mut() {
        r.value += shift;
    }
    (periodic, dirichlet)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffRow {
    pub parity: Parity,
    #[serde(with = "serial::opt_pair")]
    pub oracle: Option<Complex64>,
    #[serde(with = "serial::opt_pair")]
    pub numeric: Option<Complex64>,
    pub value_error: Option<f64>,
    pub m_alg_oracle: Option<usize>,
    pub m_alg_numeric: Option<usize>,
    pub m_geom_oracle: Option<u8>,
    pub m_geom_numeric: Option<u8>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    #[serde(with = "serial::pair")]
    pub a: Complex64,
    pub k: i64,
    pub value_tolerance: f64,
    pub rows: Vec<DiffRow>,
    pub pass: bool,
}

/// Whether `z` lies in the region a report scanned (`B_R` and the `D_n`).
fn scanned(report: &SpectrumReport, z: Complex64) -> bool {
    Disk::ball(report.r).contains(z) || counting_indices(report.r, report.n_scan).into_iter().any(|n| Disk::counting(n).contains(z))
}

/// Matches oracle records inside the scanned region against the report's
/// records by nearest value of the same parity.
pub fn compare(report: &SpectrumReport, oracle: &OracleSpectrum, value_tol: f64) -> OracleComparison {
    let mut used = vec![false; report.records.len()];
    let mut rows = Vec::new();
    for o in oracle.records().filter(|o| scanned(report, o.value)) {
        let best = report
            .records
            .iter()
            .enumerate()
            .filter(|(i, r)| !used[*i] && r.parity == o.parity)
            .map(|(i, r)| (i, (r.value - o.value).norm()))
            .filter(|(_, d)| *d <= MATCH_TOL * (1.0 + o.value.norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        let row = match best {
            Some((i, d)) => {
                used[i] = true;
                let r = &report.records[i];
                DiffRow {
                    parity: o.parity,
                    oracle: Some(o.value),
                    numeric: Some(r.value),
                    value_error: Some(d),
                    m_alg_oracle: Some(o.m_alg),
                    m_alg_numeric: Some(r.m_alg),
                    m_geom_oracle: o.m_geom,
                    m_geom_numeric: r.m_geom,
                    pass: d <= value_tol && o.m_alg == r.m_alg && o.m_geom == r.m_geom,
                }
            }
            None => DiffRow {
                parity: o.parity,
                oracle: Some(o.value),
                numeric: None,
                value_error: None,
                m_alg_oracle: Some(o.m_alg),
                m_alg_numeric: None,
                m_geom_oracle: o.m_geom,
                m_geom_numeric: None,
                pass: false,
            },
        };
        rows.push(row);
    }
    for r in report.records.iter().zip(&used).filter(|(_, u)| !**u).map(|(r, _)| r) {
        rows.push(DiffRow {
            parity: r.parity,
            oracle: None,
            numeric: Some(r.value),
            value_error: None,
            m_alg_oracle: None,
            m_alg_numeric: Some(r.m_alg),
            m_geom_oracle: None,
            m_geom_numeric: r.m_geom,
            pass: false,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    OracleComparison { a: oracle.a, k: oracle.k, value_tolerance: value_tol, rows, pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn find(list: &[OracleRecord], z: Complex64) -> &OracleRecord {
        list.iter().find(|r| (r.value - z).norm() < 1e-9).unwrap_or_else(|| panic!("no record at {z}"))
    }

    #[test]
    fn periodic_a_one() {
        let recs = constant_periodic(c(1.0, 0.0), 3);
        let low = find(&recs, c(0.0, 1.0));
        assert_eq!((low.m_alg, low.m_geom, low.parity), (1, Some(1), Parity::Proper));
        let first = find(&recs, c((PI * PI - 1.0).sqrt(), 0.0));
        assert_eq!((first.m_alg, first.m_geom, first.parity), (2, Some(2), Parity::Anti));
        assert!((first.value.re - 2.978189).abs() < 1e-6);
    }

    #[test]
    fn periodic_a_four_i() {
        let recs = constant_periodic(c(0.0, 4.0), 3);
        let r = find(&recs, c(0.0, (16.0 - PI * PI).sqrt()));
        assert!((r.value.im - 2.476).abs() < 1e-3);
        assert_eq!((r.m_alg, r.m_geom), (2, Some(2)));
    }

    #[test]
    fn resonant_quadruple() {
        let recs = constant_periodic(c(PI, 0.0), 3);
        let zero = find(&recs, c(0.0, 0.0));
        assert_eq!((zero.m_alg, zero.m_geom, zero.parity), (4, Some(2), Parity::Anti));
        let dir = constant_dirichlet(c(PI, 0.0), 3);
        assert_eq!(find(&dir, c(0.0, 0.0)).m_alg, 3);
        // rotated resonant constant: Im a ≠ 0, double at 0 and simple μ̂₀
        let rot = Complex64::from_polar(PI, PI / 3.0);
        let dir = constant_dirichlet(rot, 3);
        assert_eq!(find(&dir, c(0.0, 0.0)).m_alg, 2);
        assert_eq!(find(&dir, c(0.0, rot.im)).m_alg, 1);
    }

    #[test]
    fn dirichlet_collision() {
        let beta = (16.0 - PI * PI).sqrt();
        let a = c((16.0 - beta * beta).sqrt(), beta);
        let dir = constant_dirichlet(a, 3);
        assert_eq!(find(&dir, c(0.0, beta)).m_alg, 2);
        assert!(constant_dirichlet(c(1.0, 0.0), 4).iter().all(|r| r.m_alg == 1));
    }

    #[test]
    fn shift_moves_values_and_parity() {
        let (per, dir) = shifted_spectrum(c(1.0, 0.0), 1, 3);
        let r = find(&per, c(-PI, 1.0));
        assert_eq!((r.m_alg, r.parity), (1, Parity::Anti));
        find(&dir, c(-PI, 0.0));
        let (per0, _) = shifted_spectrum(c(1.0, 0.0), 0, 3);
        assert_eq!(per0, constant_periodic(c(1.0, 0.0), 3));
    }

    #[test]
    fn eigenvalue_equation_holds() {
        for a in [c(1.0, 0.0), c(2.0, 1.0), c(0.0, 4.0)] {
            for r in constant_periodic(a, 4) {
                let n = r.indices[0] as f64;
                let lhs = r.value * r.value + a.norm_sqr();
                assert!((lhs - n * n * PI * PI).norm() < 1e-9);
            }
        }
    }
}
