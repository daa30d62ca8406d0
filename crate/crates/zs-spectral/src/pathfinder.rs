//! Degeneracy metrics along straight paths of potentials, and random
//! deformations that restore simplicity in the interior.

use crate::classify::{full_spectrum, is_standard, multiplicity_metrics, SpectrumReport};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::tolerances::Tolerances;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathOptions {
    pub samples: usize,
    pub n_scan: usize,
    /// Insert midpoints between neighbouring samples whose metrics differ.
    pub refine: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions { samples: 33, n_scan: 3, refine: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    #[serde(with = "potential_json")]
    pub potential: Potential,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<SpectrumReport>,
    #[serde(rename = "R")]
    pub r: Option<usize>,
    #[serde(rename = "M_D")]
    pub m_d: Option<usize>,
    #[serde(rename = "M_p")]
    pub m_p: Option<usize>,
    pub standard: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl PathSample {
    /// Classifies `potential`; failures are recorded, not raised.
    pub fn evaluate(t: f64, potential: Potential, n_scan: usize, tol: &Tolerances) -> Self {
        match full_spectrum(&potential, None, n_scan, tol) {
            Ok(report) => {
                let (m_d, m_p) = multiplicity_metrics(&report, tol);
                PathSample {
                    t,
                    r: Some(report.r),
                    m_d: Some(m_d),
                    m_p: Some(m_p),
                    standard: Some(is_standard(&report).0),
                    report: Some(report),
                    potential,
                    error: None,
                }
            }
            Err(e) => PathSample {
                t,
                potential,
                report: None,
                r: None,
                m_d: None,
                m_p: None,
                standard: None,
                error: Some(e.to_string()),
            },
        }
    }

    pub fn is_simple(&self) -> bool {
        self.m_d == Some(0) && self.m_p == Some(1)
    }

    /// `(M_D, M_p)`, failed samples ranking worst.
    fn metrics(&self) -> (usize, usize) {
        (self.m_d.unwrap_or(usize::MAX), self.m_p.unwrap_or(usize::MAX))
    }
}

/// `M^D_γ`, `M^p_γ` as maxima over samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    #[serde(rename = "M_D")]
    pub m_d: Option<usize>,
    #[serde(rename = "M_p")]
    pub m_p: Option<usize>,
    pub failed_samples: usize,
    /// `select_R` differs between samples.
    pub r_changes: bool,
}

pub fn path_metrics(samples: &[PathSample]) -> PathMetrics {
    let ok: Vec<&PathSample> = samples.iter().filter(|s| s.error.is_none()).collect();
    let mut rs: Vec<usize> = ok.iter().filter_map(|s| s.r).collect();
    rs.dedup();
    PathMetrics {
        m_d: ok.iter().filter_map(|s| s.m_d).max(),
        m_p: ok.iter().filter_map(|s| s.m_p).max(),
        failed_samples: samples.len() - ok.len(),
        r_changes: rs.len() > 1,
    }
}

/// Lexicographic `(max M_D, max M_p, Σ(M_D + M_p))` over interior samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Score {
    pub max_d: usize,
    pub max_p: usize,
    pub total: usize,
}

impl Score {
    fn of<'a>(samples: impl IntoIterator<Item = &'a PathSample>) -> Self {
        let mut s = Score { max_d: 0, max_p: 0, total: 0 };
        for (d, p) in samples.into_iter().map(PathSample::metrics) {
            s.max_d = s.max_d.max(d);
            s.max_p = s.max_p.max(p);
            s.total = s.total.saturating_add(d).saturating_add(p);
        }
        s
    }

    pub fn is_simple(&self) -> bool {
        self.max_d == 0 && self.max_p <= 1
    }
}

fn check_endpoints(start: &Potential, end: &Potential) -> Result<()> {
    if !start.is_focusing() || !end.is_focusing() {
        return Err(Error::InvalidInput("path endpoints must be focusing".into()));
    }
    if start.band() != end.band() {
        return Err(Error::InvalidInput(format!(
            "path endpoints need the same band, got {} and {}",
            start.band(),
            end.band()
        )));
    }
    Ok(())
}

fn sample_times(samples: usize) -> Vec<f64> {
    (0..samples).map(|j| j as f64 / (samples - 1) as f64).collect()
}

/// `t ↦ (1 − t)ζ + tξ` at uniform `t`.
pub fn straight_path(
    start: &Potential,
    end: &Potential,
    opts: &PathOptions,
    tol: &Tolerances,
) -> Result<Vec<PathSample>> {
    check_endpoints(start, end)?;
    if opts.samples < 2 {
        return Err(Error::InvalidInput("a path needs at least 2 samples".into()));
    }
    let point = |t: f64| {
        if t == 0.0 {
            start.clone()
        } else if t == 1.0 {
            end.clone()
        } else {
            start.combine(1.0 - t, end, t)
        }
    };
    let mut samples: Vec<PathSample> =
        sample_times(opts.samples).into_iter().map(|t| PathSample::evaluate(t, point(t), opts.n_scan, tol)).collect();
    if opts.refine {
        let mut refined = Vec::with_capacity(2 * samples.len());
        for pair in samples.windows(2) {
            refined.push(pair[0].clone());
            if pair[0].metrics() != pair[1].metrics() {
                let t = 0.5 * (pair[0].t + pair[1].t);
                refined.push(PathSample::evaluate(t, point(t), opts.n_scan, tol));
            }
        }
        refined.push(samples.pop().expect("at least two samples"));
        samples = refined;
    }
    Ok(samples)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deformation {
    pub attempt: usize,
    pub score: Score,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformedPath {
    pub samples: Vec<PathSample>,
    pub metrics: PathMetrics,
    /// Interior score of the returned path.
    pub score: Score,
    pub initial_score: Score,
    /// Accepted deformations in order; scores strictly decrease.
    pub accepted: Vec<Deformation>,
    pub attempts: usize,
    pub seed: u64,
    pub magnitude: f64,
    /// Perturbation field `h` of the returned path (`γ(t) + sin(πt)·h`).
    #[serde(with = "potential_json::optional", default)]
    pub field: Option<Potential>,
}

/// Adds `sin(πt)·h` to the interior samples for random focusing fields `h` of
/// L² norm `magnitude`, keeping the best deformation by interior score. Stops
/// once the interior is simple (`M_D = 0`, `M_p = 1`).
pub fn perturb_path(
    path: &[PathSample],
    magnitude: f64,
    seed: u64,
    max_tries: usize,
    opts: &PathOptions,
    tol: &Tolerances,
) -> Result<DeformedPath> {
    if path.len() < 2 {
        return Err(Error::InvalidInput("a path needs at least 2 samples".into()));
    }
    if !(magnitude > 0.0 && magnitude.is_finite()) {
        return Err(Error::InvalidInput(format!("perturbation magnitude must be positive, got {magnitude}")));
    }
    let last = path.len() - 1;
    for end in [&path[0], &path[last]] {
        if end.standard != Some(true) {
            return Err(Error::Precondition(format!("path endpoint at t = {} is not standard", end.t)));
        }
    }
    let interior = &path[1..last];
    let initial = Score::of(interior);
    let mut best = DeformedPath {
        samples: path.to_vec(),
        metrics: path_metrics(path),
        score: initial,
        initial_score: initial,
        accepted: Vec::new(),
        attempts: 0,
        seed,
        magnitude,
        field: None,
    };
    if initial.is_simple() {
        return Ok(best);
    }
    let band = path.iter().map(|s| s.potential.band()).max().unwrap_or(0).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..max_tries {
        best.attempts = attempt + 1;
        let field = Potential::random_focusing(&mut rng, band, magnitude);
        let mut candidate = Vec::with_capacity(interior.len());
        let mut running = Score { max_d: 0, max_p: 0, total: 0 };
        for s in interior {
            let moved = s.potential.combine(1.0, &field, (PI * s.t).sin());
            let sample = PathSample::evaluate(s.t, moved, opts.n_scan, tol);
            running = Score::of(candidate.iter().chain(std::iter::once(&sample)));
            candidate.push(sample);
            // maxima only grow, so a worse prefix cannot win
            if (running.max_d, running.max_p).cmp(&(best.score.max_d, best.score.max_p)) == Ordering::Greater {
                break;
            }
        }
        if candidate.len() < interior.len() || running >= best.score {
            continue;
        }
        let mut samples = Vec::with_capacity(path.len());
        samples.push(path[0].clone());
        samples.extend(candidate);
        samples.push(path[last].clone());
        best.metrics = path_metrics(&samples);
        best.samples = samples;
        best.score = running;
        best.field = Some(field);
        best.accepted.push(Deformation { attempt, score: running });
        if running.is_simple() {
            break;
        }
    }
    if best.accepted.is_empty() {
        return Err(Error::Exhausted(max_tries));
    }
    Ok(best)
}

/// Per-sample CSV: `t,R,M_D,M_p,standard,error`.
pub fn samples_csv(samples: &[PathSample]) -> String {
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("t,R,M_D,M_p,standard,error\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.t,
            opt(s.r),
            opt(s.m_d),
            opt(s.m_p),
            s.standard.map(|b| b.to_string()).unwrap_or_default(),
            s.error.as_deref().unwrap_or("").replace(',', ";"),
        ));
    }
    out
}

mod potential_json {
    use crate::potential::Potential;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &Potential, s: S) -> Result<S::Ok, S::Error> {
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).map_err(serde::ser::Error::custom)?;
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Potential, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Potential::from_json(&v.to_string()).map_err(D::Error::custom)
    }

    pub mod optional {
        use super::*;

        pub fn serialize<S: Serializer>(p: &Option<Potential>, s: S) -> Result<S::Ok, S::Error> {
            match p {
                Some(p) => super::serialize(p, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Potential>, D::Error> {
            let v = Option::<serde_json::Value>::deserialize(d)?;
            v.map(|v| Potential::from_json(&v.to_string()).map_err(D::Error::custom)).transpose()
        }
    }
}
