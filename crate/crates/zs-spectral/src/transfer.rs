//! Fundamental matrix `M(x, λ)` of `L(φ)M = λM`, `M(0) = Id`, and its λ-derivative.
//!
//! Rewritten as `M' = A(x, λ) M` with
//! `A = [[−iλ, iφ₁], [−iφ₂, iλ]]`, `∂A/∂λ = diag(−i, i)`.
//!
//! The integrator is the sixth-order Magnus scheme on three Gauss-Legendre
//! nodes. Each step applies `exp(Ω)` with `Ω` traceless, evaluated as
//! `cosh(q) Id + sinh(q)/q · Ω` with `q² = −det Ω`, so every step has unit
//! determinant and constant potentials are propagated without truncation
//! error. `Ṁ` is the exact λ-derivative of the discrete propagator.
//!
//! Matrices are row-major `[m₁, m₂, m₃, m₄] = [[m₁, m₂], [m₃, m₄]]`.

use crate::error::{Error, Result};
use crate::extended::{Cdd, Dd, Scalar};
use crate::potential::Potential;
use num_complex::Complex64;
use std::sync::OnceLock;

pub type Mat2 = [Complex64; 4];

/// Number of intervals of the stored path grid `x_j = j / PATH_GRID`.
pub const PATH_GRID: usize = 1024;

const MIN_STEPS: usize = 256;
const STEPS_PER_UNIT: f64 = 32.0;
const SERIES_LEN: usize = 24;

/// Gauss node offset √15/10 and the Magnus weights √15/3, 10/3, 1/12, 1/60, 1/240.
const NODE_OFFSET: Dd = Dd::new(0.3872983346207417, -1.3621030867463682e-17);
const W_ALPHA2: Dd = Dd::new(1.2909944487358056, 2.861143208346483e-17);
const W_ALPHA3: Dd = Dd::new(3.3333333333333335, -1.4802973661668753e-16);
const W_12: Dd = Dd::new(0.08333333333333333, 4.625929269271485e-18);
const W_60: Dd = Dd::new(0.016666666666666666, 2.312964634635743e-19);
const W_240: Dd = Dd::new(0.004166666666666667, 5.782411586589357e-20);

pub const IDENTITY: Mat2 = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(1.0, 0.0),
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Precision {
    /// IEEE double arithmetic.
    #[default]
    Double,
    /// Double-double arithmetic (about 32 digits); for validation runs where
    /// entries grow like e^{|Im λ|}.
    Extended,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct TransferOptions {
    pub with_path: bool,
    pub with_dlambda: bool,
    pub precision: Precision,
    /// Overrides the step-count rule.
    pub steps: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct TransferResult {
    pub lambda: Complex64,
    /// `M̂ = M(1, λ)`.
    pub endpoint: Mat2,
    /// `Ṁ(1, λ)`.
    pub dlambda: Option<Mat2>,
    /// `M(x_j, λ)` for `x_j = j / PATH_GRID`, `j = 0..=PATH_GRID`.
    pub path: Option<Vec<Mat2>>,
    /// `Ṁ(x_j, λ)` on the same grid (needs both flags).
    pub dpath: Option<Vec<Mat2>>,
    /// max |det M − 1| over every integration step, in working precision.
    pub max_det_defect: f64,
    pub steps: usize,
}

/// Potential samples at the Gauss nodes of a fixed step grid.
#[derive(Clone, Debug)]
pub struct Integrator {
    steps: usize,
    lambda_bound: f64,
    sup: f64,
    /// Per step: `iφ₁` then `−iφ₂` at the three Gauss nodes.
    nodes: Vec<[Complex64; 6]>,
    potential: Potential,
}

/// `max(256, 32·⌈|λ| + ‖φ‖_∞⌉)`, rounded up to a multiple of the path grid when a
/// path is stored.
pub fn step_count(p: &Potential, lambda_abs: f64, with_path: bool) -> usize {
    let base = MIN_STEPS.max((STEPS_PER_UNIT * (lambda_abs + p.sup_bound()).ceil()) as usize);
    if with_path {
        base.div_ceil(PATH_GRID) * PATH_GRID
    } else {
        base
    }
}

impl Integrator {
    /// Step table suitable for every |λ| ≤ `lambda_bound`.
    pub fn new(p: &Potential, lambda_bound: f64, with_path: bool) -> Self {
        Self::with_steps(p, step_count(p, lambda_bound, with_path), lambda_bound)
    }

    pub fn with_steps(p: &Potential, steps: usize, lambda_bound: f64) -> Self {
        let steps = steps.max(1);
        let h = 1.0 / steps as f64;
        let offset = NODE_OFFSET.to_f64();
        let i = Complex64::i();
        let nodes = (0..steps)
            .map(|j| {
                let mid = (j as f64 + 0.5) * h;
                let (a1, a2) = p.evaluate(mid - offset * h);
                let (b1, b2) = p.evaluate(mid);
                let (c1, c2) = p.evaluate(mid + offset * h);
                [i * a1, i * b1, i * c1, -i * a2, -i * b2, -i * c2]
            })
            .collect();
        Integrator { steps, lambda_bound, sup: p.sup_bound(), nodes, potential: p.clone() }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// `(M̂, Ṁ(1))` in double precision.
    pub fn monodromy(&self, lambda: Complex64) -> Result<(Mat2, Mat2)> {
        let r = self.run(lambda, TransferOptions { with_dlambda: true, ..Default::default() })?;
        Ok((r.endpoint, r.dlambda.expect("requested")))
    }

    pub fn run(&self, lambda: Complex64, opts: TransferOptions) -> Result<TransferResult> {
        let steps_ok = match opts.steps {
            Some(n) => n == self.steps,
            None => lambda.norm() <= self.lambda_bound * (1.0 + 1e-12),
        };
        let path_ok = !opts.with_path || self.steps % PATH_GRID == 0;
        if !(steps_ok && path_ok) {
            let steps = opts
                .steps
                .unwrap_or_else(|| step_count(&self.potential, lambda.norm(), opts.with_path));
            let fresh = Integrator::with_steps(&self.potential, steps, lambda.norm());
            return fresh.run(lambda, TransferOptions { steps: Some(fresh.steps), ..opts });
        }
        let raw = match opts.precision {
            Precision::Double => self.integrate::<Complex64>(lambda, opts),
            Precision::Extended => self.integrate::<Cdd>(lambda, opts),
        };
        let all_finite = raw
            .endpoint
            .iter()
            .chain(raw.dlambda.iter().flatten())
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if !all_finite {
            return Err(Error::NonFinite(lambda));
        }
        Ok(raw)
    }

    fn integrate<S: Scalar>(&self, lambda: Complex64, opts: TransferOptions) -> TransferResult {
        let n = self.steps;
        let hd = Dd::from_f64(1.0).div_f64(n as f64);
        let h = S::real(hd);
        let w2 = S::real(W_ALPHA2 * hd);
        let w3 = S::real(W_ALPHA3 * hd);
        let w12 = S::real(W_12);
        let w60 = S::real(-W_60);
        let w240 = S::real(W_240);
        let twenty = S::real(Dd::from_f64(20.0));
        let i = S::from_c64(Complex64::i());
        let lam = S::from_c64(lambda);
        let minus_i_h = -(i * h);
        let diag = minus_i_h * lam;

        let radius_bound = {
            let hf = 1.0 / n as f64;
            (hf * (lambda.norm() + self.sup)).powi(2) * 2.0 + 1e-300
        };
        let terms = series_terms(radius_bound, S::EPS);
        let coeffs = series_coefficients();

        let stride = if opts.with_path { n / PATH_GRID } else { 0 };
        let mut path = opts.with_path.then(|| {
            let mut v = Vec::with_capacity(PATH_GRID + 1);
            v.push(IDENTITY);
            v
        });
        let mut dpath = (opts.with_path && opts.with_dlambda).then(|| {
            let mut v = Vec::with_capacity(PATH_GRID + 1);
            v.push([Complex64::new(0.0, 0.0); 4]);
            v
        });

        let one = S::one();
        let zero = S::zero();
        let mut m = [one, zero, zero, one];
        let mut dm = [zero; 4];
        let mut max_defect = 0.0f64;

        for (j, node) in self.nodes.iter().enumerate() {
            let [u1, u2, u3, v1, v2, v3] = node.map(S::from_c64);

            let a1 = [diag, h * u2, h * v2];
            let a2 = [S::zero(), w2 * (u3 - u1), w2 * (v3 - v1)];
            let a3 = [S::zero(), w3 * (u3 - u2 - u2 + u1), w3 * (v3 - v2 - v2 + v1)];
            let c1 = comm(&a1, &a2);
            let inner = add3(&add3(&a3, &a3), &c1);
            let c2 = scale3(&comm(&a1, &inner), w60);
            let left = sub3(&sub3(&c1, &a3), &scale3(&a1, twenty));
            let right = add3(&a2, &c2);
            let omega = add3(&add3(&a1, &scale3(&a3, w12)), &scale3(&comm(&left, &right), w240));
            let [d, b, c] = omega;
            let q2 = d * d + b * c;

            let ch = horner(&coeffs.cosh, terms, q2);
            let sh = horner(&coeffs.sinhc, terms, q2);
            let e = [ch + sh * d, sh * b, sh * c, ch - sh * d];

            if opts.with_dlambda {
                let da1 = [minus_i_h, S::zero(), S::zero()];
                let dc1 = comm(&da1, &a2);
                let dc2 = scale3(&add3(&comm(&da1, &inner), &comm(&a1, &dc1)), w60);
                let dleft = sub3(&dc1, &scale3(&da1, twenty));
                let dcomm = add3(&comm(&dleft, &right), &comm(&left, &dc2));
                let [dd, db, dc] = add3(&da1, &scale3(&dcomm, w240));
                let dq2 = (d * dd + d * dd) + db * c + b * dc;
                let half = S::real(Dd::from_f64(0.5));
                let dch = sh * dq2 * half;
                let dsh = horner(&coeffs.sinhc_slope, terms, q2) * dq2 * half;
                let de = [
                    dch + dsh * d + sh * dd,
                    dsh * b + sh * db,
                    dsh * c + sh * dc,
                    dch - dsh * d - sh * dd,
                ];
                let a = mul(&de, &m);
                let bb = mul(&e, &dm);
                dm = [a[0] + bb[0], a[1] + bb[1], a[2] + bb[2], a[3] + bb[3]];
            }
            m = mul(&e, &m);

            let det = m[0] * m[3] - m[1] * m[2] - one;
            max_defect = max_defect.max(det.mag());

            if stride > 0 && (j + 1) % stride == 0 {
                if let Some(p) = path.as_mut() {
                    p.push(to_c64(&m));
                }
                if let Some(p) = dpath.as_mut() {
                    p.push(to_c64(&dm));
                }
            }
        }

        TransferResult {
            lambda,
            endpoint: to_c64(&m),
            dlambda: opts.with_dlambda.then(|| to_c64(&dm)),
            path,
            dpath,
            max_det_defect: max_defect,
            steps: n,
        }
    }
}

/// Integrate with the default step rule.
pub fn fundamental_matrix(
    p: &Potential,
    lambda: Complex64,
    with_path: bool,
    with_dlambda: bool,
) -> Result<TransferResult> {
    fundamental_matrix_with(p, lambda, TransferOptions { with_path, with_dlambda, ..Default::default() })
}

pub fn fundamental_matrix_with(
    p: &Potential,
    lambda: Complex64,
    opts: TransferOptions,
) -> Result<TransferResult> {
    let steps = opts.steps.unwrap_or_else(|| step_count(p, lambda.norm(), opts.with_path));
    if opts.with_path && steps % PATH_GRID != 0 {
        return Err(Error::InvalidInput(format!(
            "step count {steps} must be a multiple of {PATH_GRID} when storing a path"
        )));
    }
    Integrator::with_steps(p, steps, lambda.norm()).run(lambda, TransferOptions { steps: Some(steps), ..opts })
}

/// Richardson estimate of the endpoint error: `‖M_N − M_{2N}‖_max · 64/63`.
pub fn error_estimate(p: &Potential, lambda: Complex64) -> Result<f64> {
    let n = step_count(p, lambda.norm(), false);
    let coarse = fundamental_matrix_with(p, lambda, TransferOptions { steps: Some(n), ..Default::default() })?;
    let fine = fundamental_matrix_with(p, lambda, TransferOptions { steps: Some(2 * n), ..Default::default() })?;
    Ok(max_diff(&coarse.endpoint, &fine.endpoint) * 64.0 / 63.0)
}

/// `M(x, λ)` for the constant potential `(a, −ā)`:
/// `[[cos κx − iλ s, ia s], [iā s, cos κx + iλ s]]`, `s = sin(κx)/κ`, `κ = √(λ²+|a|²)`.
pub fn constant_closed_form(a: Complex64, lambda: Complex64, x: f64) -> Mat2 {
    let kappa = (lambda * lambda + a.norm_sqr()).sqrt();
    let cos = (kappa * x).cos();
    let s = sinc_scaled(kappa, x);
    let i = Complex64::i();
    [cos - i * lambda * s, i * a * s, i * a.conj() * s, cos + i * lambda * s]
}

/// `M(x, λ)` for `φ_{a,k}`: `diag(e^{iπkx}, e^{−iπkx}) · M_a(x, λ + kπ)`.
pub fn gauge_closed_form(a: Complex64, k: i64, lambda: Complex64, x: f64) -> Mat2 {
    let base = constant_closed_form(a, lambda + std::f64::consts::PI * k as f64, x);
    gauge_rotate(k, x, &base)
}

/// Left-multiply by `diag(e^{iπkx}, e^{−iπkx})`.
pub fn gauge_rotate(k: i64, x: f64, m: &Mat2) -> Mat2 {
    let w = Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 * x);
    [w * m[0], w * m[1], w.conj() * m[2], w.conj() * m[3]]
}

/// `sin(κx)/κ`, with its Taylor series near κ = 0.
fn sinc_scaled(kappa: Complex64, x: f64) -> Complex64 {
    let z = kappa * x;
    if z.norm() < 1e-3 {
        let z2 = z * z;
        x * (1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0)))
    } else {
        z.sin() / kappa
    }
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    mul(a, b)
}

pub fn det(m: &Mat2) -> Complex64 {
    m[0] * m[3] - m[1] * m[2]
}

pub fn max_diff(a: &Mat2, b: &Mat2) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[inline]
fn mul<S: Scalar>(a: &[S; 4], b: &[S; 4]) -> [S; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// Traceless matrices `[[d, b], [c, −d]]` stored as `[d, b, c]`.
#[inline]
fn comm<S: Scalar>(x: &[S; 3], y: &[S; 3]) -> [S; 3] {
    let two = |v: S| v + v;
    [x[1] * y[2] - y[1] * x[2], two(x[0] * y[1] - y[0] * x[1]), two(x[2] * y[0] - x[0] * y[2])]
}

#[inline]
fn add3<S: Scalar>(x: &[S; 3], y: &[S; 3]) -> [S; 3] {
    [x[0] + y[0], x[1] + y[1], x[2] + y[2]]
}

#[inline]
fn sub3<S: Scalar>(x: &[S; 3], y: &[S; 3]) -> [S; 3] {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}

#[inline]
fn scale3<S: Scalar>(x: &[S; 3], k: S) -> [S; 3] {
    [x[0] * k, x[1] * k, x[2] * k]
}

fn to_c64<S: Scalar>(m: &[S; 4]) -> Mat2 {
    [m[0].to_c64(), m[1].to_c64(), m[2].to_c64(), m[3].to_c64()]
}

#[inline]
fn horner<S: Scalar>(coeffs: &[Dd; SERIES_LEN], terms: usize, x: S) -> S {
    let mut acc = S::real(coeffs[terms]);
    for c in coeffs[..terms].iter().rev() {
        acc = acc * x + S::real(*c);
    }
    acc
}

/// Number of series terms after which `r^n/(2n)!` drops below `eps`.
fn series_terms(r: f64, eps: f64) -> usize {
    let mut term = 1.0;
    for n in 1..SERIES_LEN {
        term *= r / ((2 * n - 1) as f64 * (2 * n) as f64);
        if term < eps * 1e-2 {
            return n;
        }
    }
    SERIES_LEN - 1
}

struct SeriesCoefficients {
    /// `1/(2n)!`
    cosh: [Dd; SERIES_LEN],
    /// `1/(2n+1)!`
    sinhc: [Dd; SERIES_LEN],
    /// `(2n+2)/(2n+3)!`, the series of `(cosh q − sinh q/q)/q²`.
    sinhc_slope: [Dd; SERIES_LEN],
}

fn series_coefficients() -> &'static SeriesCoefficients {
    static TABLE: OnceLock<SeriesCoefficients> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut cosh = [Dd::default(); SERIES_LEN];
        let mut sinhc = [Dd::default(); SERIES_LEN];
        let mut slope = [Dd::default(); SERIES_LEN];
        // inverse factorials 1/m! for m up to 2·SERIES_LEN + 1
        let mut inv = vec![Dd::from_f64(1.0)];
        for m in 1..=(2 * SERIES_LEN + 2) {
            let prev = inv[m - 1];
            inv.push(prev.div_f64(m as f64));
        }
        for n in 0..SERIES_LEN {
            cosh[n] = inv[2 * n];
            sinhc[n] = inv[2 * n + 1];
            slope[n] = inv[2 * n + 3].mul_f64((2 * n + 2) as f64);
        }
        SeriesCoefficients { cosh, sinhc, sinhc_slope: slope }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_potential_is_diagonal_exponential() {
        let lam = c(1.3, -0.4);
        let r = fundamental_matrix(&Potential::zero(), lam, false, false).unwrap();
        let expected = [(-Complex64::i() * lam).exp(), c(0.0, 0.0), c(0.0, 0.0), (Complex64::i() * lam).exp()];
        assert!(max_diff(&r.endpoint, &expected) < 1e-13);
    }

    #[test]
    fn closed_form_special_values() {
        let a = c(0.0, 0.0);
        let lam = c(0.7, 0.2);
        let m = constant_closed_form(a, lam, 0.6);
        let expected = [(-Complex64::i() * lam * 0.6).exp(), c(0.0, 0.0), c(0.0, 0.0), (Complex64::i() * lam * 0.6).exp()];
        assert!(max_diff(&m, &expected) < 1e-14);

        // κ = 2π, n = 2
        let a = c(1.0, 0.0);
        let lam = c((4.0 * PI * PI - 1.0).sqrt(), 0.0);
        let m = constant_closed_form(a, lam, 1.0);
        assert!(max_diff(&m, &IDENTITY) < 1e-12);

        // κ = 0 at λ = i|a|
        let a = c(0.0, 2.0);
        let m = constant_closed_form(a, c(0.0, 2.0), 1.0);
        assert!((m[0] - c(3.0, 0.0)).norm() < 1e-14);
        assert!((m[3] - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn closed_form_satisfies_the_ode_at_the_origin() {
        // M'(0) = A(0): m₂'(0) = iφ₁, m₃'(0) = −iφ₂ = iā
        let a = c(0.3, 1.1);
        let lam = c(0.5, 0.2);
        let h = 1e-6;
        let m = constant_closed_form(a, lam, h);
        assert!(((m[1] / h) - Complex64::i() * a).norm() < 1e-5);
        assert!(((m[2] / h) - Complex64::i() * a.conj()).norm() < 1e-5);
    }

    #[test]
    fn constant_potential_matches_closed_form() {
        for a in [c(1.0, 0.0), c(2.0, 1.0), c(0.0, 4.0)] {
            for lam in [c(0.3, 0.0), c(-4.0, 2.5), c(9.0, -6.0)] {
                let p = Potential::constant(a, 0);
                let r = fundamental_matrix(&p, lam, false, false).unwrap();
                let exact = constant_closed_form(a, lam, 1.0);
                let scale = exact.iter().map(|z| z.norm()).fold(1.0, f64::max);
                assert!(max_diff(&r.endpoint, &exact) < 1e-12 * scale, "a={a} lam={lam}");
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let p = Potential::make_focusing(vec![c(0.2, 0.1), c(0.5, -0.3), c(-0.1, 0.4)]).unwrap();
        let lam = c(2.1, -0.7);
        let h = 1e-5;
        let opts = TransferOptions { with_dlambda: true, steps: Some(512), ..Default::default() };
        let r = fundamental_matrix_with(&p, lam, opts).unwrap();
        let plus = fundamental_matrix_with(&p, lam + h, opts).unwrap().endpoint;
        let minus = fundamental_matrix_with(&p, lam - h, opts).unwrap().endpoint;
        let d = r.dlambda.unwrap();
        for k in 0..4 {
            let fd = (plus[k] - minus[k]) / (2.0 * h);
            assert!((fd - d[k]).norm() < 1e-6 * d[k].norm().max(1.0));
        }
    }

    #[test]
    fn path_matches_closed_form() {
        let a = c(1.0, 1.0);
        let lam = c(0.8, 0.3);
        let r = fundamental_matrix(&Potential::constant(a, 0), lam, true, true).unwrap();
        let path = r.path.unwrap();
        assert_eq!(path.len(), PATH_GRID + 1);
        assert_eq!(path[0], IDENTITY);
        for j in [1, 100, 512, PATH_GRID] {
            let x = j as f64 / PATH_GRID as f64;
            assert!(max_diff(&path[j], &constant_closed_form(a, lam, x)) < 1e-12);
        }
        assert_eq!(r.dpath.unwrap().len(), PATH_GRID + 1);
    }

    #[test]
    fn extended_precision_keeps_unit_determinant_at_large_imaginary_lambda() {
        let p = Potential::constant(c(PI, 0.0), 0);
        let opts = TransferOptions { precision: Precision::Extended, ..Default::default() };
        let r = fundamental_matrix_with(&p, c(15.0, 15.0), opts).unwrap();
        assert!(r.max_det_defect < 1e-9);
        let exact = constant_closed_form(c(PI, 0.0), c(15.0, 15.0), 1.0);
        assert!(max_diff(&r.endpoint, &exact) < 1e-8);
    }

    #[test]
    fn gauge_closed_form_matches_integration() {
        let a = c(1.5, -0.5);
        for k in [1i64, -2] {
            let lam = c(0.4, 0.9);
            let p = Potential::constant(a, k);
            let opts = TransferOptions { steps: Some(4096), ..Default::default() };
            let r = fundamental_matrix_with(&p, lam, opts).unwrap();
            assert!(max_diff(&r.endpoint, &gauge_closed_form(a, k, lam, 1.0)) < 1e-10);
        }
    }

    #[test]
    fn reused_integrator_matches_fresh_one() {
        let p = Potential::make_focusing(vec![c(0.1, 0.2), c(0.3, 0.0), c(0.0, -0.2)]).unwrap();
        let integ = Integrator::new(&p, 5.0, false);
        let (m, _) = integ.monodromy(c(3.0, 1.0)).unwrap();
        let (m2, _) = integ.monodromy(c(30.0, 1.0)).unwrap();
        let fresh = fundamental_matrix(&p, c(30.0, 1.0), false, true).unwrap();
        assert!(max_diff(&m2, &fresh.endpoint) == 0.0);
        assert!(det(&m).norm() > 0.0);
    }
}
