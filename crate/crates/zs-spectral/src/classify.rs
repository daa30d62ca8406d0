//! Eigenvalue records, multiplicities and the classification verdicts.

use crate::characteristic::CharKind;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::rootfinder::{counting_indices, DiskId, LayoutReport, Scanner};
use crate::serial;
use crate::tolerances::Tolerances;
use crate::transfer::{Integrator, Mat2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// Δ = 2
    Proper,
    /// Δ = −2
    Anti,
    Dirichlet,
}

impl Parity {
    pub fn kind(self) -> CharKind {
        match self {
            Parity::Proper => CharKind::ChiPPlus,
            Parity::Anti => CharKind::ChiPMinus,
            Parity::Dirichlet => CharKind::ChiD,
        }
    }

    /// Floquet multiplier ξ with `M̂ = ξ·Id` at a geometrically double eigenvalue.
    fn multiplier(self) -> Option<f64> {
        match self {
            Parity::Proper => Some(1.0),
            Parity::Anti => Some(-1.0),
            Parity::Dirichlet => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Proper => "proper",
            Parity::Anti => "anti",
            Parity::Dirichlet => "dirichlet",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    #[serde(with = "serial::pair")]
    pub value: Complex64,
    pub m_alg: usize,
    /// Periodic and anti-periodic records only.
    pub m_geom: Option<u8>,
    pub parity: Parity,
    pub is_real: bool,
    /// Index of the record holding the complex conjugate (itself when real);
    /// focusing potentials only.
    pub partner: Option<usize>,
    /// Label of the disk the record was found in (`B_R` or `D_n`).
    pub disk: String,
    pub residual: f64,
}

impl EigenvalueRecord {
    pub fn is_periodic(&self) -> bool {
        self.parity != Parity::Dirichlet
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub standard: bool,
    pub r_simple: bool,
    pub dirichlet_simple: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    #[serde(rename = "R")]
    pub r: usize,
    pub n_scan: usize,
    pub records: Vec<EigenvalueRecord>,
    pub layout: LayoutReport,
    pub verdicts: Verdicts,
}

impl SpectrumReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("spectrum report: {e}")))
    }

    /// One row per record: `value,m_alg,m_geom,parity,is_real,partner,disk`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,m_alg,m_geom,parity,is_real,partner,disk\n");
        for r in &self.records {
            let geom = r.m_geom.map(|g| g.to_string()).unwrap_or_default();
            let partner = r.partner.map(|g| g.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                serial::csv_complex(r.value),
                r.m_alg,
                geom,
                r.parity.name(),
                r.is_real,
                partner,
                r.disk
            );
        }
        out
    }

    pub fn periodic(&self) -> impl Iterator<Item = &EigenvalueRecord> {
        self.records.iter().filter(|r| r.is_periodic())
    }

    pub fn dirichlet(&self) -> impl Iterator<Item = &EigenvalueRecord> {
        self.records.iter().filter(|r| !r.is_periodic())
    }

    fn ball_label(&self) -> String {
        DiskId::Ball(self.r).label()
    }

    /// Periodic records inside `B_R`.
    pub fn periodic_in_ball(&self) -> impl Iterator<Item = &EigenvalueRecord> {
        let label = self.ball_label();
        self.periodic().filter(move |r| r.disk == label)
    }

    /// Dirichlet records inside `B_R`.
    pub fn dirichlet_in_ball(&self) -> impl Iterator<Item = &EigenvalueRecord> {
        let label = self.ball_label();
        self.dirichlet().filter(move |r| r.disk == label)
    }
}

/// `2` iff `‖M̂(λ) − ξ·Id‖_max < geometric`, with ξ = ±1 from the parity.
pub fn geometric_multiplicity(p: &Potential, lambda: Complex64, parity: Parity, tol: &Tolerances) -> Result<u8> {
    let integ = Integrator::new(p, lambda.norm(), false);
    let (m, _) = integ.monodromy(lambda)?;
    geometric_from_matrix(&m, lambda, parity, tol)
}

fn geometric_from_matrix(m: &Mat2, lambda: Complex64, parity: Parity, tol: &Tolerances) -> Result<u8> {
    let xi = parity
        .multiplier()
        .ok_or_else(|| Error::InvalidInput("geometric multiplicity needs a periodic parity".into()))?;
    let residual = (m[0] + m[3] - 2.0 * xi).norm();
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if residual > tol.residual * scale {
        return Err(Error::NotAnEigenvalue { lambda, residual });
    }
    let defect = [m[0] - xi, m[1], m[2], m[3] - xi].iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(if defect < tol.geometric { 2 } else { 1 })
}

/// Roots of `χ_p^±` and `χ_D` in `B_R` and every `D_n`, `R < |n| ≤ n_scan`.
/// With `r = None` the radius comes from [`Scanner::select_r`].
pub fn full_spectrum(p: &Potential, r: Option<usize>, n_scan: usize, tol: &Tolerances) -> Result<SpectrumReport> {
    let mut scanner = Scanner::new(p, tol);
    let r = match r {
        Some(r) => r,
        None => scanner.select_r(n_scan)?,
    };
    let layout = scanner.localize(r, n_scan)?;
    if !layout.pass {
        let failed: Vec<String> =
            layout.entries.iter().filter(|e| !e.pass).map(|e| format!("{}:{}", e.disk, e.kind)).collect();
        return Err(Error::Layout(format!("R = {r}: {}", failed.join(", "))));
    }
    let ids = std::iter::once(DiskId::Ball(r)).chain(counting_indices(r, n_scan).into_iter().map(DiskId::Counting));
    let mut records = Vec::new();
    for id in ids {
        for parity in [Parity::Proper, Parity::Anti, Parity::Dirichlet] {
            for cluster in scanner.roots(id, parity.kind())? {
                let m_geom = match parity {
                    Parity::Dirichlet => None,
                    _ => {
                        let integ = scanner.contour(id)?.integrator().clone();
                        let (m, _) = integ.monodromy(cluster.value)?;
                        Some(geometric_from_matrix(&m, cluster.value, parity, tol)?)
                    }
                };
                records.push(EigenvalueRecord {
                    value: cluster.value,
                    m_alg: cluster.multiplicity,
                    m_geom,
                    parity,
                    is_real: tol.is_real(cluster.value),
                    partner: None,
                    disk: id.label(),
                    residual: cluster.residual / cluster.scale.max(f64::MIN_POSITIVE),
                });
            }
        }
    }
    records.sort_by(|a, b| {
        a.parity.cmp(&b.parity).then(a.value.re.total_cmp(&b.value.re)).then(a.value.im.total_cmp(&b.value.im))
    });
    if p.is_focusing() {
        link_partners(&mut records, tol);
    }
    let mut report = SpectrumReport {
        r,
        n_scan,
        records,
        layout,
        verdicts: Verdicts { standard: false, r_simple: false, dirichlet_simple: false },
    };
    report.verdicts = Verdicts {
        standard: is_standard(&report).0,
        r_simple: is_r_simple(&report),
        dirichlet_simple: dirichlet_simple(&report),
    };
    Ok(report)
}

/// Links each periodic record to the record at its conjugate with the same
/// parity and multiplicity.
fn link_partners(records: &mut [EigenvalueRecord], tol: &Tolerances) {
    for i in 0..records.len() {
        if !records[i].is_periodic() {
            continue;
        }
        if records[i].is_real {
            records[i].partner = Some(i);
            continue;
        }
        let target = records[i].value.conj();
        let radius = tol.pairing * (1.0 + target.norm());
        let found = records
            .iter()
            .enumerate()
            .filter(|(j, r)| {
                *j != i && r.parity == records[i].parity && r.m_alg == records[i].m_alg && (r.value - target).norm() <= radius
            })
            .min_by(|x, y| (x.1.value - target).norm().total_cmp(&(y.1.value - target).norm()))
            .map(|(j, _)| j);
        records[i].partner = found;
    }
}

/// Real periodic eigenvalues have `m_alg = 2`, non-real ones `m_alg = 1`.
/// Returns the verdict and one line per offending record.
pub fn is_standard(report: &SpectrumReport) -> (bool, Vec<String>) {
    let mut why = Vec::new();
    for r in report.periodic() {
        let expected = if r.is_real { 2 } else { 1 };
        if r.m_alg != expected {
            why.push(format!(
                "{} {} eigenvalue {} has m_alg {} (expected {expected})",
                if r.is_real { "real" } else { "non-real" },
                r.parity.name(),
                r.value,
                r.m_alg
            ));
        }
    }
    (why.is_empty(), why)
}

/// Layout passed and every periodic eigenvalue in `B_R` is simple.
pub fn is_r_simple(report: &SpectrumReport) -> bool {
    report.layout.pass && report.periodic_in_ball().all(|r| r.m_alg == 1)
}

pub fn dirichlet_simple(report: &SpectrumReport) -> bool {
    report.dirichlet().all(|r| r.m_alg == 1)
}

/// `(M^D, M^p)`: the largest Dirichlet multiplicity at a geometrically double
/// periodic eigenvalue in `B_R` (0 if none), and the largest algebraic
/// multiplicity of a periodic eigenvalue in `B_R`.
pub fn multiplicity_metrics(report: &SpectrumReport, tol: &Tolerances) -> (usize, usize) {
    let m_p = report.periodic_in_ball().map(|r| r.m_alg).max().unwrap_or(0);
    let m_d = report
        .periodic_in_ball()
        .filter(|r| r.m_geom == Some(2))
        .map(|r| {
            report
                .dirichlet()
                .filter(|d| (d.value - r.value).norm() <= 1e2 * tol.pairing * (1.0 + r.value.norm()))
                .map(|d| d.m_alg)
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    (m_d, m_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn geometric_examples() {
        let tol = Tolerances::default();
        assert_eq!(geometric_multiplicity(&Potential::zero(), c(PI, 0.0), Parity::Anti, &tol).unwrap(), 2);
        let beta = (16.0 - PI * PI).sqrt();
        let p = Potential::constant(c(0.0, 4.0), 0);
        assert_eq!(geometric_multiplicity(&p, c(0.0, beta), Parity::Anti, &tol).unwrap(), 2);
        let p = Potential::constant(c(1.0, 0.0), 0);
        assert_eq!(geometric_multiplicity(&p, c(0.0, 1.0), Parity::Proper, &tol).unwrap(), 1);
        assert!(matches!(
            geometric_multiplicity(&p, c(0.5, 0.0), Parity::Proper, &tol),
            Err(Error::NotAnEigenvalue { .. })
        ));
    }

    #[test]
    fn zero_potential_report() {
        let tol = Tolerances::default();
        let rep = full_spectrum(&Potential::zero(), None, 3, &tol).unwrap();
        assert_eq!(rep.r, 0);
        for r in rep.periodic() {
            assert_eq!((r.m_alg, r.m_geom), (2, Some(2)));
            assert!(r.is_real);
        }
        assert_eq!(rep.dirichlet().count(), 7);
        assert!(rep.verdicts.standard && !rep.verdicts.r_simple && rep.verdicts.dirichlet_simple);
        let back = SpectrumReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
        assert_eq!(multiplicity_metrics(&rep, &tol), (1, 2));
    }

    #[test]
    fn verdicts_for_constants() {
        let tol = Tolerances::default();
        let rep = full_spectrum(&Potential::constant(c(1.0, 0.0), 0), None, 3, &tol).unwrap();
        assert!(rep.verdicts.standard && rep.verdicts.dirichlet_simple);
        let rep = full_spectrum(&Potential::constant(c(0.0, 4.0), 0), None, 4, &tol).unwrap();
        assert!(!rep.verdicts.standard && !rep.verdicts.r_simple);
    }
}
