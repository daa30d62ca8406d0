//! Small dense helpers: polynomial roots, Newton's identities, determinants.

use num_complex::Complex64;

const ABERTH_MAX_ITER: usize = 2000;

/// Monic coefficients (descending, leading 1) of the polynomial whose roots have
/// power sums `sums[1..=m]`; `sums[0]` is ignored.
pub fn newton_identities(sums: &[Complex64], degree: usize) -> Vec<Complex64> {
    assert!(sums.len() > degree, "need power sums up to the degree");
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=degree {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..=k {
            let term = e[k - i] * sums[i];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / k as f64);
    }
    e.iter()
        .enumerate()
        .map(|(j, v)| if j % 2 == 0 { *v } else { -*v })
        .collect()
}

/// Power sums `Σ rᵢⁿ` for n = 0..=n_max.
pub fn power_sums_of(roots: &[Complex64], n_max: usize) -> Vec<Complex64> {
    (0..=n_max)
        .map(|n| roots.iter().map(|r| r.powu(n as u32)).sum())
        .collect()
}

/// Descending coefficients of `Π (λ − rᵢ)`.
pub fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = c.clone();
        next.push(Complex64::new(0.0, 0.0));
        for (j, v) in c.iter().enumerate() {
            next[j + 1] -= r * v;
        }
        c = next;
    }
    c
}

/// Horner evaluation of a descending coefficient list and its derivative.
pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of a polynomial (descending coefficients, nonzero leading term) by
/// Aberth-Ehrlich simultaneous iteration.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let lead = coeffs[0];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let m = monic.len() - 1;
    if m == 0 {
        return Vec::new();
    }
    if m == 1 {
        return vec![-monic[1]];
    }
    // Fujiwara bound for the root radius
    let bound = (1..=m)
        .map(|k| {
            let v = monic[k].norm();
            if k == m {
                (v / 2.0).powf(1.0 / k as f64)
            } else {
                v.powf(1.0 / k as f64)
            }
        })
        .fold(0.0, f64::max)
        * 2.0;
    let radius = if bound > 0.0 { bound * 0.5 } else { 1.0 };
    let center = -monic[1] / m as f64;
    let mut z: Vec<Complex64> = (0..m)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / m as f64 + 0.4;
            center + Complex64::from_polar(radius, angle)
        })
        .collect();

    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step = 0.0f64;
        for j in 0..m {
            let (p, dp) = poly_eval(&monic, z[j]);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..m)
                .filter(|&k| k != j)
                .map(|k| {
                    let d = z[j] - z[k];
                    if d == Complex64::new(0.0, 0.0) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        1.0 / d
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() > 0.0 && denom.re.is_finite() {
                ratio / denom
            } else {
                ratio
            };
            if step.re.is_finite() && step.im.is_finite() {
                z[j] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[j].norm()));
            }
        }
        if max_step < 1e-17 {
            break;
        }
    }
    z
}

/// Determinant by Gaussian elimination with partial pivoting (row-major input).
pub fn determinant(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .expect("nonempty range");
        if a[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for row in col + 1..n {
            let f = a[row][col] / p;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn newton_identities_recover_coefficients() {
        let roots = vec![c(1.0, 0.0), c(-2.0, 0.5), c(0.3, -1.0), c(0.0, 2.0)];
        let sums = power_sums_of(&roots, 4);
        let from_sums = newton_identities(&sums, 4);
        let direct = poly_from_roots(&roots);
        for (a, b) in from_sums.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn aberth_finds_simple_roots() {
        let roots = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(-1.0, 1.0), c(0.5, -0.25)];
        let found = poly_roots(&poly_from_roots(&roots));
        for r in &roots {
            let best = found.iter().map(|z| (z - r).norm()).fold(f64::MAX, f64::min);
            assert!(best < 1e-12, "missed {r}");
        }
    }

    #[test]
    fn aberth_on_multiple_root_stays_near_it() {
        let roots = vec![c(0.5, 0.0); 4];
        let found = poly_roots(&poly_from_roots(&roots));
        for z in found {
            assert!((z - c(0.5, 0.0)).norm() < 1e-3);
        }
    }

    #[test]
    fn determinant_small_cases() {
        let m = vec![
            vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)],
        ];
        assert!((determinant(m) - c(4.0, 0.0)).norm() < 1e-14);
        let singular = vec![vec![c(1.0, 1.0), c(2.0, 2.0)], vec![c(1.0, 0.0), c(2.0, 0.0)]];
        assert!(determinant(singular).norm() < 1e-14);
    }
}
