//! Roots of characteristic functions by the argument principle.
//!
//! On a circle `λ = c + r·w`, `|w| = 1`, the trapezoid sums
//! `σ_n = (1/N) Σ_j w_j^{n+1} · r · χ̇(λ_j)/χ(λ_j)` are the power sums of the
//! normalized roots `(λ_k − c)/r` inside. `σ₀` is the winding number. The
//! node count doubles until the sums over all nodes and over the even
//! subset agree.

use crate::characteristic::{CharKind, FloquetSample};
use crate::error::{Error, Result};
use crate::linalg::{newton_identities, poly_roots};
use crate::potential::Potential;
use crate::serial;
use crate::tolerances::Tolerances;
use crate::transfer::Integrator;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// Agreement required between power sums on N and N/2 nodes, relative to the
/// root count.
const SUM_STABILITY: f64 = 1e-8;
/// Estimates closer than this fraction of the disk radius are recounted on a
/// sub-disk.
const COARSE_LINK: f64 = 1e-2;
const NEWTON_MAX_ITER: usize = 40;
/// Safety factor on the measured noise level when sizing k-fold clusters.
const NOISE_MARGIN: f64 = 100.0;
/// Largest roundoff-to-clearance ratio accepted when confirming close roots.
const CONFIRM_NOISE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    #[serde(with = "serial::pair")]
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::InvalidInput(format!("disk needs a positive radius, got {radius}")));
        }
        Ok(Disk { center, radius })
    }

    /// `D_n = {|λ − nπ| < π/4}`.
    pub fn counting(n: i64) -> Self {
        Disk { center: Complex64::new(n as f64 * PI, 0.0), radius: PI / 4.0 }
    }

    /// `B_R = {|λ| < Rπ + π/4}`.
    pub fn ball(r: usize) -> Self {
        Disk { center: Complex64::new(0.0, 0.0), radius: r as f64 * PI + PI / 4.0 }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }

    fn node(&self, j: usize, n: usize) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, 2.0 * PI * j as f64 / n as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCluster {
    #[serde(with = "serial::pair")]
    pub value: Complex64,
    pub multiplicity: usize,
    /// `|χ(value)|`.
    pub residual: f64,
    /// `max|χ|` on the contour the cluster was found with.
    pub scale: f64,
    /// Root of the power-sum polynomial before refinement (cluster mean for
    /// multiple roots).
    #[serde(with = "serial::pair")]
    pub estimate: Complex64,
}

/// Normalized power sums of one characteristic function on one contour.
#[derive(Clone, Debug)]
pub struct Moments {
    pub count: usize,
    /// `σ₀..σ_n` of `(λ_k − c)/r`.
    pub sums: Vec<Complex64>,
    pub min_abs: f64,
    pub max_abs: f64,
    pub nodes: usize,
    /// Estimated relative error of the sums: roundoff accumulated over the
    /// integration steps, relative to the clearance of `χ` on the contour.
    pub noise: f64,
}

/// Floquet samples on a circle, refined by doubling.
#[derive(Clone, Debug)]
pub struct Contour {
    disk: Disk,
    integ: Arc<Integrator>,
    samples: Vec<FloquetSample>,
}

impl Contour {
    pub fn new(p: &Potential, disk: Disk, nodes: usize) -> Result<Self> {
        let integ = Arc::new(Integrator::new(p, disk.center.norm() + disk.radius, false));
        Self::with_integrator(integ, disk, nodes)
    }

    pub fn with_integrator(integ: Arc<Integrator>, disk: Disk, nodes: usize) -> Result<Self> {
        let samples = (0..nodes)
            .map(|j| FloquetSample::new(&integ, disk.node(j, nodes)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Contour { disk, integ, samples })
    }

    pub fn disk(&self) -> &Disk {
        &self.disk
    }

    pub fn nodes(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[FloquetSample] {
        &self.samples
    }

    pub fn integrator(&self) -> &Arc<Integrator> {
        &self.integ
    }

    /// Doubles the node count, reusing the current samples as the even nodes.
    pub fn refine(&mut self) -> Result<()> {
        let n = 2 * self.samples.len();
        let mut next = Vec::with_capacity(n);
        for (j, s) in self.samples.iter().enumerate() {
            next.push(*s);
            next.push(FloquetSample::new(&self.integ, self.disk.node(2 * j + 1, n))?);
        }
        self.samples = next;
        Ok(())
    }

    /// Power sums from every `stride`-th node.
    fn raw_sums(&self, kind: CharKind, n_max: usize, stride: usize) -> (Vec<Complex64>, f64, f64) {
        let n = self.samples.len() / stride;
        let mut sums = vec![Complex64::new(0.0, 0.0); n_max + 1];
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for j in 0..n {
            let s = &self.samples[j * stride];
            let (f, df) = s.char_value(kind);
            lo = lo.min(f.norm());
            hi = hi.max(f.norm());
            let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            let mut term = df / f * self.disk.radius * w;
            for v in sums.iter_mut() {
                *v += term;
                term *= w;
            }
        }
        for v in sums.iter_mut() {
            *v /= n as f64;
        }
        (sums, lo, hi)
    }

    /// Winding number and power sums up to `max(count, n_extra)`, doubling
    /// nodes until they settle.
    pub fn moments(&mut self, kind: CharKind, n_extra: usize, tol: &Tolerances) -> Result<Moments> {
        loop {
            let (probe, _, _) = self.raw_sums(kind, 0, 1);
            let (value, size) = self.clearance(kind);
            if !(value >= tol.boundary_clearance * size) {
                return Err(Error::BoundaryRoot { min: value, scale: size });
            }
            let w = probe[0];
            let (half, _, _) = self.raw_sums(kind, 0, 2);
            let k = w.re.round();
            let settled = (w - k).norm() <= tol.winding_window
                && (half[0] - k).norm() <= tol.winding_window
                && k >= 0.0;
            let at_cap = 2 * self.nodes() > tol.contour_nodes_max;
            if settled {
                let count = k as usize;
                let n_max = count.max(n_extra).min(tol.max_roots.max(n_extra));
                let (full, lo, hi) = self.raw_sums(kind, n_max, 1);
                let (half, _, _) = self.raw_sums(kind, n_max, 2);
                let stable = full
                    .iter()
                    .zip(&half)
                    .all(|(a, b)| (a - b).norm() <= SUM_STABILITY * (count.max(1) as f64));
                if stable || at_cap {
                    return Ok(Moments {
                        count,
                        sums: full,
                        min_abs: lo,
                        max_abs: hi,
                        nodes: self.nodes(),
                        noise: self.noise(kind).max(tol.cluster_noise),
                    });
                }
            } else if at_cap {
                return Err(Error::NonIntegerWinding(w));
            }
            self.refine()?;
        }
    }

    /// `(|χ|, g)` at the node minimizing `|χ|/g`, where `g` is the size `χ`
    /// would have without cancellation: the largest Floquet entry, squared
    /// for `χ_p`.
    fn clearance(&self, kind: CharKind) -> (f64, f64) {
        self.samples
            .iter()
            .map(|s| (s.char_value(kind).0.norm(), s.natural_size(kind)))
            .min_by(|x, y| (x.0 / x.1).total_cmp(&(y.0 / y.1)))
            .unwrap_or((0.0, 1.0))
    }

    /// Roundoff accumulated over the integration steps relative to the
    /// clearance ratio.
    fn noise(&self, kind: CharKind) -> f64 {
        let (value, size) = self.clearance(kind);
        f64::EPSILON * self.integ.steps() as f64 * size / value
    }

    pub fn count(&mut self, kind: CharKind, tol: &Tolerances) -> Result<usize> {
        Ok(self.moments(kind, 0, tol)?.count)
    }

    /// `s_n = (1/2πi)∮ λⁿ χ̇/χ dλ` (unnormalized) for n = 0..=n_max.
    pub fn power_sums(&mut self, kind: CharKind, n_max: usize, tol: &Tolerances) -> Result<Vec<Complex64>> {
        let m = self.moments(kind, n_max, tol)?;
        Ok(denormalize(&m.sums[..=n_max], self.disk.center, self.disk.radius))
    }

    /// Roots inside the disk, clustered by multiplicity.
    pub fn roots(&mut self, kind: CharKind, tol: &Tolerances) -> Result<Vec<RootCluster>> {
        let mom = self.moments(kind, 0, tol)?;
        let m = mom.count;
        if m == 0 {
            return Ok(Vec::new());
        }
        if m > tol.max_roots {
            return Err(Error::TooManyRoots(m));
        }
        let disk = self.disk;
        let estimates = normalized_roots(&mom.sums, m, &disk);
        let coarse_link = (disk.radius * COARSE_LINK).max(split_width(disk.radius, mom.noise, 4));
        let groups = single_linkage(&estimates, |_, c| coarse_link.max(base_threshold(tol, c)));

        let mut out = Vec::new();
        for group in &groups {
            let members: Vec<Complex64> = group.iter().map(|&i| estimates[i]).collect();
            let others: Vec<Complex64> = (0..m).filter(|i| !group.contains(i)).map(|i| estimates[i]).collect();
            if members.len() == 1 {
                out.push(self.refine_simple(kind, members[0], &others, mom.max_abs));
                continue;
            }
            let (points, radius, noise) =
                self.resolve_group(kind, &members, &others, tol).unwrap_or((members.clone(), disk.radius, mom.noise));
            let fine = single_linkage(&points, |k, c| base_threshold(tol, c).max(split_width(radius, noise, k)));
            let centers: Vec<Complex64> = fine.iter().map(|g| mean(g.iter().map(|&i| points[i]))).collect();
            for (a, ca) in centers.iter().enumerate() {
                for (b, cb) in centers.iter().enumerate().skip(a + 1) {
                    let sep = (ca - cb).norm();
                    if sep < 10.0 * base_threshold(tol, *ca)
                        && !(self.confirm(kind, *ca, 0.45 * sep, fine[a].len(), tol)
                            && self.confirm(kind, *cb, 0.45 * sep, fine[b].len(), tol))
                    {
                        return Err(Error::ClusterAmbiguity(sep));
                    }
                }
            }
            for (g, center) in fine.iter().zip(&centers) {
                if g.len() == 1 {
                    let mut near: Vec<Complex64> = others.clone();
                    near.extend(centers.iter().filter(|c| *c != center));
                    out.push(self.refine_simple(kind, *center, &near, mom.max_abs));
                } else {
                    let residual = self.residual_at(kind, *center);
                    out.push(RootCluster {
                        value: *center,
                        multiplicity: g.len(),
                        residual,
                        scale: mom.max_abs,
                        estimate: *center,
                    });
                }
            }
        }
        out.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
        Ok(out)
    }

    /// Recounts a group of nearby estimates on a sub-disk around their mean.
    fn resolve_group(
        &self,
        kind: CharKind,
        members: &[Complex64],
        others: &[Complex64],
        tol: &Tolerances,
    ) -> Option<(Vec<Complex64>, f64, f64)> {
        let center = mean(members.iter().copied());
        let spread = members.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
        let gap = others.iter().map(|z| (z - center).norm()).fold(f64::INFINITY, f64::min);
        let to_edge = self.disk.radius - (center - self.disk.center).norm();
        let radius = (0.5 * gap).min(0.9 * to_edge).min(0.5 * self.disk.radius);
        if !(radius > 4.0 * spread) {
            return None;
        }
        let disk = Disk::new(center, radius).ok()?;
        let mut sub = Contour::with_integrator(self.integ.clone(), disk, tol.contour_nodes).ok()?;
        let mom = sub.moments(kind, 0, tol).ok()?;
        if mom.count != members.len() {
            return None;
        }
        Some((normalized_roots(&mom.sums, mom.count, &disk), radius, mom.noise))
    }

    /// Whether a disk of `radius` around `center` holds exactly `count` roots.
    /// Such disks are small, so |χ| on them sits far below the natural size;
    /// the clearance floor there is the integration roundoff instead.
    fn confirm(&self, kind: CharKind, center: Complex64, radius: f64, count: usize, tol: &Tolerances) -> bool {
        let Ok(disk) = Disk::new(center, radius) else { return false };
        let mut local = tol.clone();
        local.boundary_clearance =
            tol.boundary_clearance.min(CONFIRM_NOISE.recip() * f64::EPSILON * self.integ.steps() as f64);
        Contour::with_integrator(self.integ.clone(), disk, tol.contour_nodes)
            .and_then(|mut c| c.count(kind, &local))
            .is_ok_and(|n| n == count)
    }

    fn refine_simple(&self, kind: CharKind, start: Complex64, others: &[Complex64], scale: f64) -> RootCluster {
        let guard = others
            .iter()
            .map(|z| 0.5 * (z - start).norm())
            .fold(self.disk.radius - (start - self.disk.center).norm(), f64::min)
            .max(0.0);
        let mut z = start;
        let mut ok = false;
        for _ in 0..NEWTON_MAX_ITER {
            let Ok(s) = FloquetSample::new(&self.integ, z) else { break };
            let (f, df) = s.char_value(kind);
            let step = f / df;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            z -= step;
            if (z - start).norm() > guard {
                break;
            }
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
                ok = true;
                break;
            }
        }
        let (value, residual) = if ok {
            (z, self.residual_at(kind, z))
        } else {
            (start, self.residual_at(kind, start))
        };
        RootCluster { value, multiplicity: 1, residual, scale, estimate: start }
    }

    fn residual_at(&self, kind: CharKind, z: Complex64) -> f64 {
        FloquetSample::new(&self.integ, z).map(|s| s.char_value(kind).0.norm()).unwrap_or(f64::INFINITY)
    }
}

fn base_threshold(tol: &Tolerances, center: Complex64) -> f64 {
    tol.cluster_radius * (1.0 + center.norm())
}

/// Diameter a k-fold root spreads to when the power sums on a circle of
/// radius `r` carry relative error `noise`.
fn split_width(r: f64, noise: f64, k: usize) -> f64 {
    2.0 * r * (NOISE_MARGIN * noise).powf(1.0 / k as f64)
}

fn mean(points: impl Iterator<Item = Complex64>) -> Complex64 {
    let (sum, n) = points.fold((Complex64::new(0.0, 0.0), 0usize), |(s, n), z| (s + z, n + 1));
    sum / n as f64
}

/// Roots of the monic polynomial with normalized power sums `sums`, mapped
/// back to the λ-plane.
fn normalized_roots(sums: &[Complex64], m: usize, disk: &Disk) -> Vec<Complex64> {
    let coeffs = newton_identities(&sums[..=m], m);
    poly_roots(&coeffs).into_iter().map(|w| disk.center + disk.radius * w).collect()
}

/// `Σ (c + r wₖ)ⁿ` from `σ_j = Σ wₖʲ` by the binomial expansion.
fn denormalize(sums: &[Complex64], c: Complex64, r: f64) -> Vec<Complex64> {
    let n_max = sums.len() - 1;
    let mut binom = vec![1.0f64];
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            let mut next = vec![1.0; n + 1];
            for j in 1..n {
                next[j] = binom[j - 1] + binom[j];
            }
            binom = next;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=n {
            acc += binom[j] * c.powu((n - j) as u32) * r.powi(j as i32) * sums[j];
        }
        out.push(acc);
    }
    out
}

/// Top-down clustering: a set is one cluster when its diameter is within
/// `threshold(size, center)`; otherwise it is cut into linkage components at
/// the threshold of the next smaller size, and each part is clustered again.
fn single_linkage(points: &[Complex64], threshold: impl Fn(usize, Complex64) -> f64) -> Vec<Vec<usize>> {
    split_clusters(points, (0..points.len()).collect(), &threshold)
}

fn split_clusters(
    points: &[Complex64],
    idx: Vec<usize>,
    threshold: &impl Fn(usize, Complex64) -> f64,
) -> Vec<Vec<usize>> {
    let n = idx.len();
    if n <= 1 {
        return vec![idx];
    }
    let center = mean(idx.iter().map(|&i| points[i]));
    let diameter = idx
        .iter()
        .flat_map(|&i| idx.iter().map(move |&j| (points[i] - points[j]).norm()))
        .fold(0.0, f64::max);
    if diameter <= threshold(n, center) {
        return vec![idx];
    }
    for k in (1..n).rev() {
        let parts = components(points, &idx, threshold(k, center));
        if parts.len() > 1 {
            return parts.into_iter().flat_map(|p| split_clusters(points, p, threshold)).collect();
        }
    }
    idx.into_iter().map(|i| vec![i]).collect()
}

/// Connected components of the graph linking points within `link`.
fn components(points: &[Complex64], idx: &[usize], link: f64) -> Vec<Vec<usize>> {
    let mut label: Vec<usize> = (0..idx.len()).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            if (points[idx[a]] - points[idx[b]]).norm() <= link {
                let (ra, rb) = (root(&mut label, a), root(&mut label, b));
                label[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for a in 0..idx.len() {
        let r = root(&mut label, a);
        groups.entry(r).or_default().push(idx[a]);
    }
    groups.into_values().collect()
}

pub fn count_zeros(p: &Potential, disk: Disk, kind: CharKind, tol: &Tolerances) -> Result<usize> {
    Contour::new(p, disk, tol.contour_nodes)?.count(kind, tol)
}

pub fn power_sums(p: &Potential, disk: Disk, kind: CharKind, n_max: usize, tol: &Tolerances) -> Result<Vec<Complex64>> {
    Contour::new(p, disk, tol.contour_nodes)?.power_sums(kind, n_max, tol)
}

pub fn roots_in_disk(p: &Potential, disk: Disk, kind: CharKind, tol: &Tolerances) -> Result<Vec<RootCluster>> {
    Contour::new(p, disk, tol.contour_nodes)?.roots(kind, tol)
}

/// Which disk of the counting layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiskId {
    Ball(usize),
    Counting(i64),
}

impl DiskId {
    pub fn disk(self) -> Disk {
        match self {
            DiskId::Ball(r) => Disk::ball(r),
            DiskId::Counting(n) => Disk::counting(n),
        }
    }

    pub fn label(self) -> String {
        match self {
            DiskId::Ball(r) => format!("B_{r}"),
            DiskId::Counting(n) => format!("D_{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutEntry {
    pub disk: String,
    pub kind: CharKind,
    pub expected: usize,
    pub found: Option<usize>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutReport {
    #[serde(rename = "R")]
    pub r: usize,
    pub n_scan: usize,
    pub entries: Vec<LayoutEntry>,
    pub pass: bool,
}

impl LayoutReport {
    /// Entries whose winding integral did not settle.
    pub fn winding_rejections(&self) -> usize {
        self.entries.iter().filter(|e| e.error.as_deref().is_some_and(|s| s.contains("winding"))).count()
    }
}

/// Contours of the counting layout, sampled once and shared between kinds.
pub struct Scanner {
    potential: Potential,
    tol: Tolerances,
    contours: BTreeMap<DiskId, std::result::Result<Contour, Error>>,
}

impl Scanner {
    pub fn new(p: &Potential, tol: &Tolerances) -> Self {
        Scanner { potential: p.clone(), tol: tol.clone(), contours: BTreeMap::new() }
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn contour(&mut self, id: DiskId) -> Result<&mut Contour> {
        let (p, nodes) = (&self.potential, self.tol.contour_nodes);
        let entry = self.contours.entry(id).or_insert_with(|| Contour::new(p, id.disk(), nodes));
        entry.as_mut().map_err(|e| e.clone())
    }

    pub fn count(&mut self, id: DiskId, kind: CharKind) -> Result<usize> {
        let tol = self.tol.clone();
        self.contour(id)?.count(kind, &tol)
    }

    pub fn roots(&mut self, id: DiskId, kind: CharKind) -> Result<Vec<RootCluster>> {
        let tol = self.tol.clone();
        self.contour(id)?.roots(kind, &tol)
    }

    fn entry(&mut self, id: DiskId, kind: CharKind, expected: usize) -> LayoutEntry {
        let (found, error) = match self.count(id, kind) {
            Ok(n) => (Some(n), None),
            Err(e) => (None, Some(e.to_string())),
        };
        LayoutEntry { disk: id.label(), kind, expected, pass: found == Some(expected), found, error }
    }

    pub fn localize(&mut self, r: usize, n_scan: usize) -> Result<LayoutReport> {
        if n_scan < r {
            return Err(Error::InvalidInput(format!("n_scan {n_scan} must be at least R = {r}")));
        }
        let mut entries = vec![
            self.entry(DiskId::Ball(r), CharKind::ChiP, 4 * r + 2),
            self.entry(DiskId::Ball(r), CharKind::ChiD, 2 * r + 1),
        ];
        for n in counting_indices(r, n_scan) {
            entries.push(self.entry(DiskId::Counting(n), CharKind::ChiP, 2));
            entries.push(self.entry(DiskId::Counting(n), CharKind::ChiD, 1));
        }
        let pass = entries.iter().all(|e| e.pass);
        Ok(LayoutReport { r, n_scan, entries, pass })
    }

    /// Smallest `R ≤ n_scan` whose layout passes.
    pub fn select_r(&mut self, n_scan: usize) -> Result<usize> {
        let mut start = 0;
        for n in counting_indices(0, n_scan) {
            let ok = self.count(DiskId::Counting(n), CharKind::ChiP).ok() == Some(2)
                && self.count(DiskId::Counting(n), CharKind::ChiD).ok() == Some(1);
            if !ok {
                start = start.max(n.unsigned_abs() as usize);
            }
        }
        for r in start..=n_scan {
            let periodic = self.count(DiskId::Ball(r), CharKind::ChiP).ok();
            let dirichlet = self.count(DiskId::Ball(r), CharKind::ChiD).ok();
            if periodic == Some(4 * r + 2) && dirichlet == Some(2 * r + 1) {
                return Ok(r);
            }
        }
        Err(Error::Layout(format!("no valid R up to n_scan = {n_scan}")))
    }
}

/// `n` with `r < |n| ≤ n_scan`, in increasing order.
pub fn counting_indices(r: usize, n_scan: usize) -> Vec<i64> {
    let mut v: Vec<i64> = ((r + 1)..=n_scan).flat_map(|n| [-(n as i64), n as i64]).collect();
    v.sort();
    v
}

pub fn localize_spectrum(p: &Potential, r: usize, n_scan: usize, tol: &Tolerances) -> Result<LayoutReport> {
    Scanner::new(p, tol).localize(r, n_scan)
}

pub fn select_r(p: &Potential, n_scan: usize, tol: &Tolerances) -> Result<usize> {
    Scanner::new(p, tol).select_r(n_scan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_potential_counts() {
        let tol = Tolerances::default();
        let p = Potential::zero();
        for n in [-2, 0, 1, 5] {
            assert_eq!(count_zeros(&p, Disk::counting(n), CharKind::ChiP, &tol).unwrap(), 2);
            assert_eq!(count_zeros(&p, Disk::counting(n), CharKind::ChiD, &tol).unwrap(), 1);
        }
        for r in [0, 2] {
            assert_eq!(count_zeros(&p, Disk::ball(r), CharKind::ChiP, &tol).unwrap(), 4 * r + 2);
        }
    }

    #[test]
    fn close_simple_roots_are_confirmed() {
        // a band-3 potential opens the gap at n = 4 only at second order
        use rand::SeedableRng;
        let tol = Tolerances::default();
        let p = Potential::random_focusing(&mut rand_chacha::ChaCha8Rng::seed_from_u64(2024), 3, 0.5);
        let roots = roots_in_disk(&p, Disk::counting(4), CharKind::ChiP, &tol).unwrap();
        assert_eq!(roots.iter().map(|r| r.multiplicity).collect::<Vec<_>>(), vec![1, 1]);
        let sep = (roots[0].value - roots[1].value).norm();
        assert!(sep < 10.0 * base_threshold(&tol, roots[0].value), "{sep}");
    }

    #[test]
    fn power_sums_of_simple_dirichlet_root() {
        let tol = Tolerances::default();
        let s = power_sums(&Potential::zero(), Disk::counting(1), CharKind::ChiD, 2, &tol).unwrap();
        assert!((s[0] - 1.0).norm() < 1e-12);
        assert!((s[1] - PI).norm() < 1e-10);
        assert!((s[2] - PI * PI).norm() < 1e-9);
    }

    #[test]
    fn double_root_at_pi() {
        let tol = Tolerances::default();
        let roots = roots_in_disk(&Potential::zero(), Disk::counting(1), CharKind::ChiP, &tol).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 2);
        assert!((roots[0].value - PI).norm() < 1e-9);
    }

    #[test]
    fn quadruple_root_of_resonant_constant() {
        let tol = Tolerances::default();
        let p = Potential::constant(c(PI, 0.0), 0);
        let disk = Disk::new(c(0.0, 0.0), 0.5).unwrap();
        let roots = roots_in_disk(&p, disk, CharKind::ChiP, &tol).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 4);
        assert!(roots[0].value.norm() < 1e-8);
    }

    #[test]
    fn simple_roots_are_refined() {
        let tol = Tolerances::default();
        let p = Potential::constant(c(1.0, 0.0), 0);
        let disk = Disk::new(c(0.0, 0.0), 1.5).unwrap();
        let roots = roots_in_disk(&p, disk, CharKind::ChiP, &tol).unwrap();
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert_eq!(r.multiplicity, 1);
            assert!((r.value.im.abs() - 1.0).abs() < 1e-12 && r.value.re.abs() < 1e-12);
            assert!((r.value - r.estimate).norm() < 1e-7);
        }
    }

    #[test]
    fn select_r_examples() {
        let tol = Tolerances::default();
        assert_eq!(select_r(&Potential::zero(), 6, &tol).unwrap(), 0);
        // ±i lie outside B_0, so the layout first passes at R = 1
        assert_eq!(select_r(&Potential::constant(c(1.0, 0.0), 0), 6, &tol).unwrap(), 1);
        // √(9π² − 16) ≈ 8.50 sits outside D_3
        assert_eq!(select_r(&Potential::constant(c(0.0, 4.0), 0), 6, &tol).unwrap(), 3);
    }

    #[test]
    fn denormalize_matches_direct_sums() {
        let roots = [c(0.3, -0.2), c(-0.5, 0.1)];
        let (center, r) = (c(2.0, 1.0), 1.5);
        let normalized: Vec<Complex64> = (0..4).map(|n| roots.iter().map(|w| w.powu(n)).sum()).collect();
        let direct: Vec<Complex64> = (0..4).map(|n| roots.iter().map(|w| (center + r * w).powu(n)).sum()).collect();
        for (a, b) in denormalize(&normalized, center, r).iter().zip(&direct) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
