//! L²-gradients of spectral quantities with respect to the potential.
//!
//! A gradient `∂F = (∂₁F, ∂₂F)` is sampled on the path grid and paired with a
//! direction by `⟨∂F, h⟩_r = ∫₀¹ (∂₁F h₁ + ∂₂F h₂) dx`. Floquet entries follow
//! from variation of constants, `δM̂ = M̂ ∫ M⁻¹ δA M dx`, which in terms of the
//! columns `M₁ = (m₁, m₃)`, `M₂ = (m₂, m₄)` of `M(x, λ)` reads
//! `∂m̂₁ = i(m̂₁ M₁∗M₂ − m̂₂ M₁∗M₁)`, `∂m̂₂ = i(m̂₁ M₂∗M₂ − m̂₂ M₁∗M₂)` and
//! likewise for the second row.

use crate::characteristic::{CharKind, FloquetSample};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::rootfinder::{Contour, Disk};
use crate::serial;
use crate::tolerances::Tolerances;
use crate::transfer::{fundamental_matrix, Integrator, Mat2, PATH_GRID};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Central-difference step for gradient checks.
pub const FD_STEP: f64 = 1e-5;
/// Relative error accepted by a gradient check.
pub const FD_TOL: f64 = 1e-5;
/// Gram-determinant threshold relative to `‖g₊‖²‖g₋‖²`.
const GRAM_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A pair of complex functions sampled at `x_j = j / grid_n`, `j = 0..=grid_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientField {
    pub grid_n: usize,
    #[serde(with = "serial::pairs")]
    pub comp1: Vec<Complex64>,
    #[serde(with = "serial::pairs")]
    pub comp2: Vec<Complex64>,
}

impl GradientField {
    pub fn zeros(grid_n: usize) -> Self {
        GradientField { grid_n, comp1: vec![ZERO; grid_n + 1], comp2: vec![ZERO; grid_n + 1] }
    }

    pub fn from_fn(grid_n: usize, mut f: impl FnMut(f64) -> (Complex64, Complex64)) -> Self {
        let (comp1, comp2) = (0..=grid_n).map(|j| f(j as f64 / grid_n as f64)).unzip();
        GradientField { grid_n, comp1, comp2 }
    }

    /// Samples a potential as a direction.
    pub fn from_potential(p: &Potential, grid_n: usize) -> Self {
        Self::from_fn(grid_n, |x| p.evaluate(x))
    }

    fn check_grid(&self, other: &GradientField) -> Result<()> {
        if self.grid_n != other.grid_n {
            return Err(Error::InvalidInput(format!(
                "grid mismatch: {} vs {} intervals",
                self.grid_n, other.grid_n
            )));
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &GradientField,
        f: impl Fn(Complex64, Complex64, Complex64, Complex64) -> (Complex64, Complex64),
    ) -> Result<GradientField> {
        self.check_grid(other)?;
        let (comp1, comp2) = (0..=self.grid_n)
            .map(|j| f(self.comp1[j], self.comp2[j], other.comp1[j], other.comp2[j]))
            .unzip();
        Ok(GradientField { grid_n: self.grid_n, comp1, comp2 })
    }

    fn map(&self, f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64)) -> GradientField {
        let (comp1, comp2) = self.comp1.iter().zip(&self.comp2).map(|(&a, &b)| f(a, b)).unzip();
        GradientField { grid_n: self.grid_n, comp1, comp2 }
    }

    pub fn scale(&self, c: Complex64) -> GradientField {
        self.map(|a, b| (c * a, c * b))
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: Complex64, other: &GradientField) -> Result<GradientField> {
        self.zip_with(other, |a1, a2, b1, b2| (a1 + c * b1, a2 + c * b2))
    }

    /// `⟨self, h⟩_r = ∫ (f₁h₁ + f₂h₂) dx` by composite Simpson.
    pub fn pair(&self, h: &GradientField) -> Result<Complex64> {
        self.check_grid(h)?;
        Ok(simpson(self.grid_n, |j| self.comp1[j] * h.comp1[j] + self.comp2[j] * h.comp2[j]))
    }

    /// `Re ∫ (f₁ conj(g₁) + f₂ conj(g₂)) dx`.
    pub fn real_inner(&self, g: &GradientField) -> Result<f64> {
        self.check_grid(g)?;
        Ok(simpson(self.grid_n, |j| self.comp1[j] * g.comp1[j].conj() + self.comp2[j] * g.comp2[j].conj()).re)
    }

    pub fn norm(&self) -> f64 {
        self.real_inner(self).expect("same grid").max(0.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.comp1.iter().chain(&self.comp2).map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: GradientField =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("gradient JSON: {e}")))?;
        if f.comp1.len() != f.grid_n + 1 || f.comp2.len() != f.grid_n + 1 {
            return Err(Error::InvalidInput(format!("gradient needs {} samples per component", f.grid_n + 1)));
        }
        Ok(f)
    }
}

/// Composite Simpson on `n` intervals of `[0, 1]` (trapezoid when `n` is odd).
fn simpson(n: usize, f: impl Fn(usize) -> Complex64) -> Complex64 {
    let h = 1.0 / n as f64;
    if n % 2 == 1 {
        let inner: Complex64 = (1..n).map(&f).sum();
        return h * (inner + 0.5 * (f(0) + f(n)));
    }
    let mut acc = f(0) + f(n);
    for j in 1..n {
        acc += f(j) * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

/// `(f₁, f₂) ∗ (g₁, g₂) = (f₂g₂, f₁g₁)`.
pub fn star(f: &GradientField, g: &GradientField) -> Result<GradientField> {
    f.zip_with(g, |f1, f2, g1, g2| (f2 * g2, f1 * g1))
}

/// `f̂ = −(conj f₂, conj f₁)`; fixes exactly the focusing pairs.
pub fn hat(f: &GradientField) -> GradientField {
    f.map(|a, b| (-b.conj(), -a.conj()))
}

/// `f̆ = (−conj f₂, conj f₁)`; squares to `−f`.
pub fn breve(f: &GradientField) -> GradientField {
    f.map(|a, b| (-b.conj(), a.conj()))
}

/// `M(x_j, λ)` on the path grid and `M̂`, `Ṁ(1)`.
#[derive(Clone, Debug)]
pub struct PathSample {
    pub lambda: Complex64,
    pub endpoint: Mat2,
    pub dendpoint: Mat2,
    pub path: Vec<Mat2>,
}

impl PathSample {
    pub fn new(p: &Potential, lambda: Complex64) -> Result<Self> {
        let r = fundamental_matrix(p, lambda, true, true)?;
        Ok(PathSample {
            lambda,
            endpoint: r.endpoint,
            dendpoint: r.dlambda.expect("requested"),
            path: r.path.expect("requested"),
        })
    }

    /// `(M₁∗M₁, M₁∗M₂, M₂∗M₂)` from the columns of `M(x)`.
    fn column_products(&self) -> [GradientField; 3] {
        let n = self.path.len() - 1;
        let field = |f: &dyn Fn(&Mat2) -> (Complex64, Complex64)| {
            let (comp1, comp2) = self.path.iter().map(f).unzip();
            GradientField { grid_n: n, comp1, comp2 }
        };
        [
            field(&|m| (m[2] * m[2], m[0] * m[0])),
            field(&|m| (m[2] * m[3], m[0] * m[1])),
            field(&|m| (m[3] * m[3], m[1] * m[1])),
        ]
    }

    /// `u·M₁∗M₁ + v·M₁∗M₂ + w·M₂∗M₂`.
    fn combination(&self, u: Complex64, v: Complex64, w: Complex64) -> GradientField {
        let [a, b, c] = self.column_products();
        let (comp1, comp2) = (0..=a.grid_n)
            .map(|j| {
                (u * a.comp1[j] + v * b.comp1[j] + w * c.comp1[j], u * a.comp2[j] + v * b.comp2[j] + w * c.comp2[j])
            })
            .unzip();
        GradientField { grid_n: a.grid_n, comp1, comp2 }
    }

    /// `[∂m̂₁, ∂m̂₂, ∂m̂₃, ∂m̂₄]`.
    pub fn floquet_entries(&self) -> [GradientField; 4] {
        let m = &self.endpoint;
        [
            self.combination(-I * m[1], I * m[0], ZERO),
            self.combination(ZERO, -I * m[1], I * m[0]),
            self.combination(-I * m[3], I * m[2], ZERO),
            self.combination(ZERO, -I * m[3], I * m[2]),
        ]
    }

    /// `∂Δ = ∂m̂₁ + ∂m̂₄`, valid at every λ.
    pub fn delta(&self) -> GradientField {
        let m = &self.endpoint;
        self.combination(-I * m[1], I * (m[0] - m[3]), I * m[2])
    }

    pub fn chi_d(&self) -> GradientField {
        let m = &self.endpoint;
        self.combination(0.5 * (m[1] - m[3]), 0.5 * (m[1] + m[2] - m[0] - m[3]), 0.5 * (m[2] - m[0]))
    }

    /// Gradient of a characteristic function.
    pub fn char_gradient(&self, kind: CharKind) -> GradientField {
        match kind {
            CharKind::Delta | CharKind::ChiPPlus | CharKind::ChiPMinus => self.delta(),
            CharKind::ChiP => self.delta().scale(2.0 * (self.endpoint[0] + self.endpoint[3])),
            CharKind::ChiD => self.chi_d(),
        }
    }

    fn sample(&self) -> FloquetSample {
        FloquetSample { lambda: self.lambda, m: self.endpoint, dm: self.dendpoint }
    }
}

pub fn grad_floquet_entries(p: &Potential, lambda: Complex64) -> Result<[GradientField; 4]> {
    Ok(PathSample::new(p, lambda)?.floquet_entries())
}

pub fn grad_chi_d(p: &Potential, lambda: Complex64) -> Result<GradientField> {
    Ok(PathSample::new(p, lambda)?.chi_d())
}

pub fn grad_char(p: &Potential, lambda: Complex64, kind: CharKind) -> Result<GradientField> {
    Ok(PathSample::new(p, lambda)?.char_gradient(kind))
}

/// Which eigenfunction normalization `grad_delta` used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `f = M(x)(1, ζ)ᵀ`, `ζ = (ξ − m̂₁)/m̂₂`.
    M2,
    /// `f = M(x)(ζ, 1)ᵀ`, `ζ = (ξ − m̂₄)/m̂₃`.
    M3,
}

/// `∂Δ` at a periodic eigenvalue from its Floquet eigenfunction:
/// `∂Δ = −i m̂₂ f∗f` or `∂Δ = i m̂₃ f∗f`.
pub fn grad_delta(p: &Potential, lambda: Complex64, tol: &Tolerances) -> Result<GradientField> {
    let s = PathSample::new(p, lambda)?;
    let branch = eigen_branch(&s, tol)?;
    grad_delta_branch(&s, branch, tol)
}

fn floquet_multiplier(s: &PathSample, tol: &Tolerances) -> Result<Complex64> {
    let m = &s.endpoint;
    let delta = m[0] + m[3];
    let xi = if delta.re >= 0.0 { 1.0 } else { -1.0 };
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let residual = (delta - 2.0 * xi).norm();
    if residual > tol.residual * scale {
        return Err(Error::NotAnEigenvalue { lambda: s.lambda, residual: residual / scale });
    }
    Ok(Complex64::new(xi, 0.0))
}

fn eigen_branch(s: &PathSample, tol: &Tolerances) -> Result<Branch> {
    let m = &s.endpoint;
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if m[1].norm().max(m[2].norm()) <= tol.geometric * scale {
        return Err(Error::GeometricMultiplicityTwo(s.lambda));
    }
    Ok(if m[1].norm() >= m[2].norm() { Branch::M2 } else { Branch::M3 })
}

/// `grad_delta` on a fixed branch.
pub fn grad_delta_branch(s: &PathSample, branch: Branch, tol: &Tolerances) -> Result<GradientField> {
    let xi = floquet_multiplier(s, tol)?;
    let m = &s.endpoint;
    let (pivot, start, sign) = match branch {
        Branch::M2 => (m[1], [Complex64::new(1.0, 0.0), (xi - m[0]) / m[1]], -I),
        Branch::M3 => (m[2], [(xi - m[3]) / m[2], Complex64::new(1.0, 0.0)], I),
    };
    if pivot.norm() == 0.0 {
        return Err(Error::Precondition(format!("{branch:?} branch needs a nonzero pivot")));
    }
    let eigen = eigenfunction(s, start);
    Ok(star(&eigen, &eigen)?.scale(sign * pivot))
}

/// `f(x) = M(x)·start`.
pub fn eigenfunction(s: &PathSample, start: [Complex64; 2]) -> GradientField {
    let (comp1, comp2) =
        s.path.iter().map(|m| (m[0] * start[0] + m[1] * start[1], m[2] * start[0] + m[3] * start[1])).unzip();
    GradientField { grid_n: s.path.len() - 1, comp1, comp2 }
}

/// Integrands `F` of the averaged functionals `F_χ = Σ_roots F(z_j, φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Integrand {
    One,
    /// `(λ − center)^q`.
    Power {
        q: u32,
        #[serde(with = "serial::pair")]
        center: Complex64,
    },
    /// `m̂₂(λ, φ)`.
    M2,
}

impl Integrand {
    /// `(F, Ḟ)` at a node.
    fn value(&self, s: &PathSample) -> (Complex64, Complex64) {
        match *self {
            Integrand::One => (Complex64::new(1.0, 0.0), ZERO),
            Integrand::Power { q, center } => {
                let z = s.lambda - center;
                let dz = if q == 0 { ZERO } else { q as f64 * z.powu(q - 1) };
                (z.powu(q), dz)
            }
            Integrand::M2 => (s.endpoint[1], s.dendpoint[1]),
        }
    }

    fn gradient(&self, s: &PathSample) -> Option<GradientField> {
        match self {
            Integrand::M2 => Some(s.floquet_entries()[1].clone()),
            _ => None,
        }
    }
}

/// Sum of `F` over the roots of `kind` in `disk`, and its gradient.
#[derive(Clone, Debug)]
pub struct Averaged {
    pub value: Complex64,
    pub gradient: GradientField,
    pub count: usize,
    pub nodes: usize,
}

/// `F_χ = (1/2πi)∮ F χ̇/χ dλ` with gradient `(1/2πi)∮ (χ̇ ∂F − Ḟ ∂χ)/χ dλ`.
pub fn averaged_functional(
    p: &Potential,
    disk: Disk,
    kind: CharKind,
    integrand: Integrand,
    tol: &Tolerances,
) -> Result<Averaged> {
    let mut contour = Contour::new(p, disk, tol.contour_nodes)?;
    let count = contour.count(kind, tol)?;
    let n = contour.nodes();
    let mut value = ZERO;
    let mut gradient = GradientField::zeros(PATH_GRID);
    for j in 0..n {
        let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        let s = PathSample::new(p, disk.center + disk.radius * w)?;
        let (chi, dchi) = s.sample().char_value(kind);
        let (f, df) = integrand.value(&s);
        // dλ/(2πi) = r·w·dθ/2π
        let weight = disk.radius * w / (n as f64 * chi);
        value += weight * f * dchi;
        if df != ZERO {
            gradient = gradient.add_scaled(-weight * df, &s.char_gradient(kind))?;
        }
        if let Some(g) = integrand.gradient(&s) {
            gradient = gradient.add_scaled(weight * dchi, &g)?;
        }
    }
    Ok(Averaged { value, gradient, count, nodes: n })
}

/// `G = m^{m−1} E_m − E₁^m` with `E_q = Σ (z_j − center)^q`; zero when the
/// `m` roots in the disk coincide. Returns `(G, ∂G, scale)` where `scale`
/// is `m^{m−1}|E_m| + |E₁|^m`.
pub fn g_functional(
    p: &Potential,
    disk: Disk,
    kind: CharKind,
    center: Complex64,
    tol: &Tolerances,
) -> Result<(Complex64, GradientField, f64)> {
    let one = averaged_functional(p, disk, kind, Integrand::Power { q: 1, center }, tol)?;
    let m = one.count as u32;
    if m == 0 {
        return Err(Error::Precondition("no roots in the disk".into()));
    }
    let top = averaged_functional(p, disk, kind, Integrand::Power { q: m, center }, tol)?;
    let lead = (m as f64).powi(m as i32 - 1);
    let value = lead * top.value - one.value.powu(m);
    let gradient = top.gradient.scale(Complex64::new(lead, 0.0)).add_scaled(
        -(m as f64) * one.value.powu(m - 1),
        &one.gradient,
    )?;
    Ok((value, gradient, lead * top.value.norm() + one.value.norm().powi(m as i32)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dependence {
    Independent,
    Dependent,
}

/// Whether `ℓ_R = ⟨g₊, ·⟩_r` and `ℓ_I = ⟨g₋, ·⟩_r` with `g₊ = (f + f̂)/2`,
/// `g₋ = (f − f̂)/2i` are R-linearly dependent, by the Gram determinant of
/// `{g₊, g₋}`.
pub fn linear_independence(f: &GradientField) -> Result<Dependence> {
    let scale = f.norm();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::ZeroInput("linear_independence needs a nonzero field"));
    }
    let fh = hat(f);
    let plus = f.add_scaled(Complex64::new(1.0, 0.0), &fh)?.scale(Complex64::new(0.5, 0.0));
    let minus = f.add_scaled(Complex64::new(-1.0, 0.0), &fh)?.scale(Complex64::new(0.0, -0.5));
    let (pp, mm, pm) = (plus.real_inner(&plus)?, minus.real_inner(&minus)?, plus.real_inner(&minus)?);
    let negligible = 1e-12 * scale * scale;
    if pp <= negligible || mm <= negligible {
        return Ok(Dependence::Dependent);
    }
    Ok(if pp * mm - pm * pm < GRAM_TOL * pp * mm { Dependence::Dependent } else { Dependence::Independent })
}

/// Which gradient a check exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `∂Δ` from the eigenfunction formula (λ must be an eigenvalue).
    Delta,
    /// `∂Δ` as `∂m̂₁ + ∂m̂₄` (any λ).
    Trace,
    ChiD,
    /// Entry `0..4` of the Floquet matrix.
    Floquet(usize),
}

impl Target {
    pub fn name(self) -> String {
        match self {
            Target::Delta => "delta".into(),
            Target::Trace => "trace".into(),
            Target::ChiD => "chi_D".into(),
            Target::Floquet(k) => format!("m{}", k + 1),
        }
    }

    fn evaluate(self, m: &Mat2) -> Complex64 {
        match self {
            Target::Delta | Target::Trace => m[0] + m[3],
            Target::ChiD => (m[3] + m[2] - m[1] - m[0]) / (2.0 * I),
            Target::Floquet(k) => m[k],
        }
    }

    fn gradient(self, s: &PathSample, tol: &Tolerances) -> Result<GradientField> {
        match self {
            Target::Delta => {
                let branch = eigen_branch(s, tol)?;
                grad_delta_branch(s, branch, tol)
            }
            Target::Trace => Ok(s.delta()),
            Target::ChiD => Ok(s.chi_d()),
            Target::Floquet(k) => Ok(s.floquet_entries()[k].clone()),
        }
    }
}

/// Central difference `(F(φ + εh) − F(φ − εh))/2ε` with a fixed step table.
pub fn finite_difference(
    p: &Potential,
    direction: &Potential,
    lambda: Complex64,
    step: f64,
    f: impl Fn(&Mat2) -> Complex64,
) -> Result<Complex64> {
    let plus = p.combine(1.0, direction, step);
    let minus = p.combine(1.0, direction, -step);
    let steps = crate::transfer::step_count(p, lambda.norm(), false)
        .max(crate::transfer::step_count(&plus, lambda.norm(), false));
    let eval = |q: &Potential| -> Result<Complex64> {
        Ok(f(&Integrator::with_steps(q, steps, lambda.norm()).monodromy(lambda)?.0))
    };
    Ok((eval(&plus)? - eval(&minus)?) / (2.0 * step))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradCheckRow {
    pub target: String,
    pub direction: usize,
    #[serde(with = "serial::pair")]
    pub analytic: Complex64,
    #[serde(with = "serial::pair")]
    pub finite_difference: Complex64,
    pub rel_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradCheck {
    #[serde(with = "serial::pair")]
    pub lambda: Complex64,
    pub rows: Vec<GradCheckRow>,
    pub max_rel_error: f64,
    pub pass: bool,
}

/// Compares `⟨∂F, h⟩_r` with central differences along `directions` random
/// focusing directions of unit size.
pub fn gradcheck(
    p: &Potential,
    lambda: Complex64,
    targets: &[Target],
    directions: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<GradCheck> {
    let s = PathSample::new(p, lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Potential> =
        (0..directions).map(|_| Potential::random_focusing(&mut rng, p.band().clamp(1, 3), 1.0)).collect();
    let mut rows = Vec::new();
    for &target in targets {
        let grad = target.gradient(&s, tol)?;
        for (k, h) in dirs.iter().enumerate() {
            let analytic = grad.pair(&GradientField::from_potential(h, grad.grid_n))?;
            let fd = finite_difference(p, h, lambda, FD_STEP, |m| target.evaluate(m))?;
            let denom = analytic.norm().max(fd.norm()).max(f64::MIN_POSITIVE);
            let rel_error = (analytic - fd).norm() / denom;
            rows.push(GradCheckRow {
                target: target.name(),
                direction: k,
                analytic,
                finite_difference: fd,
                rel_error,
                pass: rel_error < FD_TOL,
            });
        }
    }
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.pass);
    Ok(GradCheck { lambda, rows, max_rel_error, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootfinder::roots_in_disk;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_potential() -> Potential {
        Potential::make_focusing(vec![c(0.2, -0.1), c(0.3, 0.2), c(-0.1, 0.25)]).unwrap()
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(8, |j| {
            let x = j as f64 / 8.0;
            c(x * x * x, 1.0)
        });
        assert!((v - c(0.25, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn star_hat_breve_laws() {
        let f = GradientField::from_fn(16, |x| (c(x, 1.0), c(0.5, -x * x)));
        let g = GradientField::from_fn(16, |x| (c(1.0 - x, 0.3), c(x, x)));
        assert_eq!(star(&f, &g).unwrap(), star(&g, &f).unwrap());
        assert_eq!(hat(&hat(&f)), f);
        assert_eq!(breve(&breve(&f)), f.scale(c(-1.0, 0.0)));
        let z = c(0.3, 1.7);
        let lhs = hat(&f.scale(z));
        let rhs = hat(&f).scale(z.conj());
        assert!(lhs.add_scaled(c(-1.0, 0.0), &rhs).unwrap().max_abs() < 1e-15);
        let phi = GradientField::from_potential(&sample_potential(), 16);
        assert!(hat(&phi).add_scaled(c(-1.0, 0.0), &phi).unwrap().max_abs() < 1e-15);
        assert!(star(&f, &GradientField::zeros(16)).unwrap().max_abs() == 0.0);
        assert!(star(&f, &GradientField::zeros(8)).is_err());
    }

    #[test]
    fn floquet_entries_at_identity() {
        // |a| = π, λ = 0: M̂ = −Id
        let p = Potential::constant(c(PI, 0.0), 0);
        let s = PathSample::new(&p, c(0.0, 0.0)).unwrap();
        let [_, dm2, _, _] = s.floquet_entries();
        // ∂m̂₂ = i m̂₁ M₂∗M₂ and M₂∗M₂(0) = (1, 0)
        assert!((dm2.comp1[0] - c(0.0, -1.0)).norm() < 1e-9);
        assert!(dm2.comp2[0].norm() < 1e-9);
    }

    #[test]
    fn chi_d_at_identity_start() {
        // |a| = 2π: M̂ = Id at λ = 0
        let p = Potential::constant(c(0.0, 2.0 * PI), 0);
        let s = PathSample::new(&p, c(0.0, 0.0)).unwrap();
        assert!((s.endpoint[0] - 1.0).norm() < 1e-9 && s.endpoint[1].norm() < 1e-9);
        let g = s.chi_d();
        assert!((g.comp1[0] + 0.5).norm() < 1e-6);
        assert!((g.comp2[0] + 0.5).norm() < 1e-6);
    }

    #[test]
    fn delta_at_constant_ground_state() {
        // a = 1, λ = i: eigenfunction (1, i), m̂₂ = i
        let p = Potential::constant(c(1.0, 0.0), 0);
        let tol = Tolerances::default();
        let g = grad_delta(&p, c(0.0, 1.0), &tol).unwrap();
        // −i·i·(f₂², f₁²) = (−1, 1)
        for j in [0, 300, 1024] {
            assert!((g.comp1[j] - c(-1.0, 0.0)).norm() < 1e-9);
            assert!((g.comp2[j] - c(1.0, 0.0)).norm() < 1e-9);
        }
        let s = PathSample::new(&p, c(0.0, 1.0)).unwrap();
        assert!(g.add_scaled(c(-1.0, 0.0), &s.delta()).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn delta_rejects_non_eigenvalues() {
        let tol = Tolerances::default();
        let p = Potential::constant(c(1.0, 0.0), 0);
        assert!(matches!(grad_delta(&p, c(0.7, 0.2), &tol), Err(Error::NotAnEigenvalue { .. })));
        assert!(matches!(
            grad_delta(&Potential::zero(), c(PI, 0.0), &tol),
            Err(Error::GeometricMultiplicityTwo(_))
        ));
    }

    #[test]
    fn branches_agree() {
        let tol = Tolerances::default();
        let p = sample_potential();
        let roots = roots_in_disk(&p, Disk::counting(1), CharKind::ChiP, &tol).unwrap();
        let simple = roots.iter().find(|r| r.multiplicity == 1).expect("simple eigenvalue");
        let s = PathSample::new(&p, simple.value).unwrap();
        let a = grad_delta_branch(&s, Branch::M2, &tol).unwrap();
        let b = grad_delta_branch(&s, Branch::M3, &tol).unwrap();
        let diff = a.add_scaled(c(-1.0, 0.0), &b).unwrap().max_abs();
        assert!(diff < 1e-6 * a.max_abs(), "{diff}");
        assert!(a.add_scaled(c(-1.0, 0.0), &s.delta()).unwrap().max_abs() < 1e-6 * a.max_abs());
    }

    #[test]
    fn finite_difference_checks() {
        let tol = Tolerances::default();
        let p = sample_potential();
        let targets =
            [Target::Trace, Target::ChiD, Target::Floquet(0), Target::Floquet(1), Target::Floquet(2), Target::Floquet(3)];
        let check = gradcheck(&p, c(1.3, -0.4), &targets, 3, 7, &tol).unwrap();
        assert!(check.pass, "{:?}", check.rows.iter().filter(|r| !r.pass).collect::<Vec<_>>());
    }

    #[test]
    fn averaged_power_sums_match_roots() {
        let tol = Tolerances::default();
        let p = sample_potential();
        let disk = Disk::counting(1);
        let center = c(3.0, 0.1);
        let roots = roots_in_disk(&p, disk, CharKind::ChiP, &tol).unwrap();
        let one = averaged_functional(&p, disk, CharKind::ChiP, Integrand::One, &tol).unwrap();
        assert!((one.value - 2.0).norm() < 1e-9);
        assert!(one.gradient.max_abs() < 1e-9);
        for q in 1..=4 {
            let e = averaged_functional(&p, disk, CharKind::ChiP, Integrand::Power { q, center }, &tol).unwrap();
            let direct: Complex64 =
                roots.iter().map(|r| r.multiplicity as f64 * (r.value - center).powu(q)).sum();
            assert!((e.value - direct).norm() < 1e-9, "q={q}");
        }
    }

    #[test]
    fn averaged_gradient_matches_finite_difference() {
        let tol = Tolerances::default();
        let p = sample_potential();
        let disk = Disk::counting(1);
        let h = Potential::make_focusing(vec![c(0.1, 0.3), c(-0.2, 0.1), c(0.05, 0.0)]).unwrap();
        for integrand in [Integrand::Power { q: 2, center: c(3.0, 0.0) }, Integrand::M2] {
            let e = averaged_functional(&p, disk, CharKind::ChiD, integrand, &tol).unwrap();
            let analytic = e.gradient.pair(&GradientField::from_potential(&h, PATH_GRID)).unwrap();
            let at = |s: f64| averaged_functional(&p.combine(1.0, &h, s), disk, CharKind::ChiD, integrand, &tol);
            let fd = (at(FD_STEP).unwrap().value - at(-FD_STEP).unwrap().value) / (2.0 * FD_STEP);
            assert!((analytic - fd).norm() < 1e-5 * fd.norm(), "{integrand:?}: {analytic} vs {fd}");
        }
    }

    #[test]
    fn g_vanishes_on_quadruple_root() {
        let tol = Tolerances::default();
        let p = Potential::constant(c(PI, 0.0), 0);
        let disk = Disk::new(c(0.0, 0.0), 0.5).unwrap();
        let (g, _, scale) = g_functional(&p, disk, CharKind::ChiPMinus, c(0.1, 0.05), &tol).unwrap();
        assert!(g.norm() < 1e-8 * scale, "{g} vs {scale}");
    }

    #[test]
    fn independence_cases() {
        let phi = GradientField::from_potential(&sample_potential(), 64);
        assert_eq!(linear_independence(&phi).unwrap(), Dependence::Dependent);
        let generic = GradientField::from_fn(64, |x| (c(1.0, 0.0), Complex64::from_polar(1.0, 2.0 * PI * x) * c(0.3, 0.8)));
        assert_eq!(linear_independence(&generic).unwrap(), Dependence::Independent);
        // a ∈ iR, ground state (a, i|a|): f∗f = (−|a|², a²)
        let a = c(0.0, 2.0);
        let f = GradientField::from_fn(64, |_| (a, c(0.0, a.norm())));
        assert_eq!(linear_independence(&star(&f, &f).unwrap()).unwrap(), Dependence::Dependent);
        assert!(matches!(linear_independence(&GradientField::zeros(8)), Err(Error::ZeroInput(_))));
    }

    #[test]
    fn json_round_trip() {
        let f = GradientField::from_fn(4, |x| (c(x, 1.0), c(-x, 0.5)));
        assert_eq!(GradientField::from_json(&f.to_json()).unwrap(), f);
        assert!(GradientField::from_json(r#"{"grid_n":3,"comp1":[],"comp2":[]}"#).is_err());
    }
}
