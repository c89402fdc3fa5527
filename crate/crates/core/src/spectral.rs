//! Singular value functions `μ_t` and majorisation `≺` relative to `(A, τ)`.
//!
//! For a positive element with pooled eigenvalues `λ` (each contributing a
//! step of its block's trace weight), `μ` is the right-continuous
//! non-increasing step function on `(0, τ(1)]` whose value on the j-th
//! interval is the j-th largest eigenvalue. `x ≺ y` holds when every initial
//! integral of `μ(x)` is dominated by that of `μ(y)` and the total traces
//! agree.

use crate::algebra::{weighted_spectrum_of, AlgElement, Algebra, Density};
use crate::error::{Error, Result};
use crate::TOL_EQ;

/// A right-continuous non-increasing step function on `(0, τ(1)]`.
///
/// `breakpoints` are `0 = t_0 < t_1 < … < t_m = τ(1)`; `values[j]` is taken
/// on `[t_j, t_{j+1})`. Equal adjacent values are merged so the
/// representation is canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    /// Build from `(value, width)` steps, already sorted non-increasing by
    /// value. Zero-width steps are dropped; equal adjacent values merged.
    pub fn from_steps(steps: &[(f64, f64)]) -> Result<Self> {
        let mut breakpoints = vec![0.0];
        let mut values = Vec::new();
        let mut prev: Option<f64> = None;
        for &(v, w) in steps {
            if w < 0.0 {
                return Err(Error::OutOfRange(format!("negative step width {w}")));
            }
            if w == 0.0 {
                continue;
            }
            if let Some(p) = prev {
                if v > p + 1e-15 {
                    return Err(Error::OutOfRange(
                        "step values must be non-increasing".into(),
                    ));
                }
            }
            let t = breakpoints.last().unwrap() + w;
            // merge steps with equal value
            if prev.is_some() && (v - prev.unwrap()).abs() <= f64::EPSILON * (1.0 + v.abs()) {
                *breakpoints.last_mut().unwrap() = t;
            } else {
                breakpoints.push(t);
                values.push(v);
            }
            prev = Some(v);
        }
        if values.is_empty() {
            return Err(Error::OutOfRange("empty step function".into()));
        }
        Ok(StepFunction {
            breakpoints,
            values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Total length of the domain, `τ(1)`.
    pub fn domain_end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Value at `t` (right-continuous; `t` below the first breakpoint reads
    /// the first value, `t ≥ τ(1)` reads 0 beyond the domain).
    pub fn value_at(&self, t: f64) -> f64 {
        if t < 0.0 || t >= self.domain_end() {
            return 0.0;
        }
        for (j, v) in self.values.iter().enumerate() {
            if t < self.breakpoints[j + 1] {
                return *v;
            }
        }
        0.0
    }

    /// Exact piecewise-linear integral `∫₀ˢ μ_t dt`.
    pub fn integral_to(&self, s: f64) -> Result<f64> {
        if s < -1e-12 || s > self.domain_end() + 1e-9 {
            return Err(Error::OutOfRange(format!(
                "integration endpoint {s} outside (0, {}]",
                self.domain_end()
            )));
        }
        let s = s.clamp(0.0, self.domain_end());
        let mut acc = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            let lo = self.breakpoints[j];
            let hi = self.breakpoints[j + 1];
            if s <= lo {
                break;
            }
            acc += v * (s.min(hi) - lo);
        }
        Ok(acc)
    }

    /// Total integral, equal to `τ(x)` for `μ(x)`.
    pub fn total_integral(&self) -> f64 {
        self.integral_to(self.domain_end()).expect("in range")
    }

    /// Sup-distance on the union of breakpoints (step functions suffice).
    pub fn sup_distance(&self, other: &StepFunction) -> f64 {
        let mut worst: f64 = (self.domain_end() - other.domain_end()).abs();
        let mut probe = |t: f64| {
            let d = (self.value_at(t) - other.value_at(t)).abs();
            if d > worst {
                worst = d;
            }
        };
        for &t in self.breakpoints.iter().chain(other.breakpoints.iter()) {
            probe(t);
            if t > 0.0 {
                probe(t - f64::min(1e-14, t * 0.5));
            }
        }
        worst
    }

    /// CSV rows `t,value`: one row per step at its left endpoint, plus a
    /// terminator row at `τ(1)` repeating the final value.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (j, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.breakpoints[j], v));
        }
        out.push_str(&format!("{},{}\n", self.domain_end(), self.values.last().unwrap()));
        out
    }
}

/// The singular value function of a positive element: pooled block
/// eigenvalues sorted descending, each contributing a step of its block
/// weight.
pub fn singular_value_function(alg: &Algebra, x: &AlgElement) -> Result<StepFunction> {
    alg.check_parent_of(x.parent())?;
    let spec = weighted_spectrum_of(alg, x.data())?;
    StepFunction::from_steps(&spec)
}

/// Singular value function of a density (left or right; the pooled spectrum
/// is side-independent by Schmidt symmetry).
pub fn singular_value_function_density(rho: &Density) -> Result<StepFunction> {
    let spec = rho.weighted_spectrum()?;
    StepFunction::from_steps(&spec)
}

/// Outcome of a majorisation test, with the failure location when false.
#[derive(Debug, Clone)]
pub struct MajorisationReport {
    pub holds: bool,
    /// |τ(x) − τ(y)|.
    pub trace_gap: f64,
    /// Largest violation `∫₀ˢ μ(x) − ∫₀ˢ μ(y)` over the merged breakpoints.
    pub worst_gap: f64,
    /// Endpoint where the worst gap was attained.
    pub worst_at: f64,
}

/// Test `x ≺ y`: equal traces within tolerance and
/// `∫₀ˢ μ(x) ≤ ∫₀ˢ μ(y) + tol` for every s. Checking the merged breakpoints
/// suffices because both integrals are piecewise linear and concave.
pub fn majorises_report(mu_x: &StepFunction, mu_y: &StepFunction) -> MajorisationReport {
    let trace_gap = (mu_x.total_integral() - mu_y.total_integral()).abs();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_at = 0.0;
    let end = mu_x.domain_end().min(mu_y.domain_end());
    for &s in mu_x
        .breakpoints()
        .iter()
        .chain(mu_y.breakpoints().iter())
    {
        let s = s.min(end);
        let gap = mu_x.integral_to(s).expect("clamped") - mu_y.integral_to(s).expect("clamped");
        if gap > worst_gap {
            worst_gap = gap;
            worst_at = s;
        }
    }
    MajorisationReport {
        holds: trace_gap <= TOL_EQ && worst_gap <= TOL_EQ,
        trace_gap,
        worst_gap,
        worst_at,
    }
}

/// `x ≺ y` for positive elements of the algebra. Returns `false` (never
/// errors) on trace mismatch; the mismatch is visible via
/// [`majorises_report`].
pub fn majorises(alg: &Algebra, x: &AlgElement, y: &AlgElement) -> Result<bool> {
    let mx = singular_value_function(alg, x)?;
    let my = singular_value_function(alg, y)?;
    Ok(majorises_report(&mx, &my).holds)
}

/// `ρ ≺ σ` at the density level.
pub fn majorises_density(rho: &Density, sigma: &Density) -> Result<bool> {
    let mx = singular_value_function_density(rho)?;
    let my = singular_value_function_density(sigma)?;
    Ok(majorises_report(&mx, &my).holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::c64;
    use crate::linalg::{cr, CMatrix};
    use crate::rand_gen::{random_density, random_positive, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_alg(dims: &[(usize, f64)]) -> Algebra {
        Algebra::new(dims).unwrap()
    }

    fn diag_elem(alg: &Algebra, per_block: &[Vec<f64>]) -> AlgElement {
        let data = per_block
            .iter()
            .map(|d| {
                let n = d.len();
                let mut m = CMatrix::zeros(n, n);
                for (i, &v) in d.iter().enumerate() {
                    m[(i, i)] = cr(v);
                }
                m
            })
            .collect();
        alg.element(data).unwrap()
    }

    #[test]
    fn b_c3_example() {
        // B(ℂ³) with τ = Tr, eigenvalues (0.5, 0.3, 0.2): unit steps
        let alg = diag_alg(&[(3, 1.0)]);
        let rho = diag_elem(&alg, &[vec![0.2, 0.5, 0.3]]);
        let mu = singular_value_function(&alg, &rho).unwrap();
        assert_eq!(mu.values(), &[0.5, 0.3, 0.2]);
        assert_eq!(mu.breakpoints(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn abelian_rearrangement() {
        // ⊕ℂ with weights m_i: μ is the non-increasing rearrangement of f
        // over the weighted measure
        let alg = diag_alg(&[(1, 0.5), (1, 2.0), (1, 0.25)]);
        let f = diag_elem(&alg, &[vec![0.3], vec![0.9], vec![1.4]]);
        let mu = singular_value_function(&alg, &f).unwrap();
        assert_eq!(mu.values(), &[1.4, 0.9, 0.3]);
        assert_eq!(mu.breakpoints(), &[0.0, 0.25, 2.25, 2.75]);
        assert!((mu.total_integral() - (0.5 * 0.3 + 2.0 * 0.9 + 0.25 * 1.4)).abs() < 1e-14);
    }

    #[test]
    fn identity_is_constant_one() {
        let alg = diag_alg(&[(2, 0.5)]);
        let mu = singular_value_function(&alg, &alg.identity()).unwrap();
        assert_eq!(mu.values(), &[1.0]);
        assert_eq!(mu.breakpoints(), &[0.0, 1.0]);
    }

    #[test]
    fn integral_examples() {
        let alg = diag_alg(&[(3, 1.0)]);
        let rho = diag_elem(&alg, &[vec![0.5, 0.3, 0.2]]);
        let mu = singular_value_function(&alg, &rho).unwrap();
        assert_eq!(mu.integral_to(0.0).unwrap(), 0.0);
        assert!((mu.integral_to(3.0).unwrap() - 1.0).abs() < 1e-15);
        // hand integration: 0.5 + 0.5·0.3 = 0.65
        assert!((mu.integral_to(1.5).unwrap() - 0.65).abs() < 1e-15);
        assert!(mu.integral_to(3.5).is_err());
        assert!(mu.integral_to(-0.1).is_err());
    }

    #[test]
    fn majorisation_basics() {
        let alg = diag_alg(&[(2, 1.0)]);
        let sep = diag_elem(&alg, &[vec![1.0, 0.0]]);
        let mixed = diag_elem(&alg, &[vec![0.5, 0.5]]);
        // diag(0.5, 0.5) ≺ diag(1, 0)
        assert!(majorises(&alg, &mixed, &sep).unwrap());
        assert!(!majorises(&alg, &sep, &mixed).unwrap());
        // reflexivity
        assert!(majorises(&alg, &sep, &sep).unwrap());

        let a = diag_elem(&alg, &[vec![0.6, 0.4]]);
        assert!(majorises(&alg, &mixed, &a).unwrap());
        assert!(!majorises(&alg, &a, &mixed).unwrap());
    }

    #[test]
    fn trace_mismatch_returns_false_with_detail() {
        let alg = diag_alg(&[(2, 1.0)]);
        let x = diag_elem(&alg, &[vec![0.5, 0.5]]);
        let y = diag_elem(&alg, &[vec![0.7, 0.5]]);
        let mx = singular_value_function(&alg, &x).unwrap();
        let my = singular_value_function(&alg, &y).unwrap();
        let rep = majorises_report(&mx, &my);
        assert!(!rep.holds);
        assert!((rep.trace_gap - 0.2).abs() < 1e-14);
    }

    #[test]
    fn negative_input_rejected() {
        let alg = diag_alg(&[(2, 1.0)]);
        let x = diag_elem(&alg, &[vec![0.5, -0.5]]);
        assert!(singular_value_function(&alg, &x).is_err());
    }

    /// Brute-force μ_t as the infimum over all spectral projections p of x
    /// with τ(1−p) ≤ t of ‖xp‖ (subset enumeration of eigenprojections).
    fn mu_projection_oracle(alg: &Algebra, x: &AlgElement, t: f64) -> f64 {
        let spec = weighted_spectrum_of(alg, x.data()).unwrap();
        let tau_one = alg.tau_one();
        let m = spec.len();
        let mut best = f64::INFINITY;
        // enumerate which eigenvalues are *removed* (complement of p)
        for mask in 0u32..(1 << m) {
            let mut removed_weight = 0.0;
            let mut kept_max = 0.0_f64;
            for (i, &(v, w)) in spec.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    removed_weight += w;
                } else {
                    kept_max = kept_max.max(v);
                }
            }
            let _ = tau_one;
            if removed_weight <= t + 1e-12 && kept_max < best {
                best = kept_max;
            }
        }
        best
    }

    #[test]
    fn spectral_mu_matches_projection_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for &(n, w) in &[(2usize, 1.0), (3, 0.5), (4, 1.0), (5, 0.2)] {
            let alg = diag_alg(&[(n, w)]);
            for _ in 0..5 {
                let x = random_positive(&mut rng, &alg);
                let mu = singular_value_function(&alg, &x).unwrap();
                // probe midpoints of the eigenvalue grid
                for k in 0..n {
                    let t = w * (k as f64 + 0.5);
                    let spectral = mu.value_at(t);
                    let oracle = mu_projection_oracle(&alg, &x, t);
                    assert_eq!(
                        spectral, oracle,
                        "μ mismatch at t={t} for n={n}, w={w}"
                    );
                }
            }
        }
    }

    #[test]
    fn unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let alg = diag_alg(&[(4, 0.3)]);
        for _ in 0..10 {
            let x = random_positive(&mut rng, &alg);
            let u = random_unitary(&mut rng, &alg);
            let conj = u.mul(&x).unwrap().mul(&u.adjoint()).unwrap();
            let mu_x = singular_value_function(&alg, &x).unwrap();
            let mu_c = singular_value_function(&alg, &conj).unwrap();
            assert!(mu_x.sup_distance(&mu_c) < 1e-10);
        }
    }

    #[test]
    fn contraction_monotonicity() {
        // 0 ≤ x ≤ y ⇒ μ_t(x) ≤ μ_t(y); μ(a x a*) ≤ ‖a‖² μ(x), pointwise
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let alg = diag_alg(&[(3, 1.0), (2, 0.5)]);
        for _ in 0..10 {
            let x = random_positive(&mut rng, &alg);
            let incr = random_positive(&mut rng, &alg);
            let y = x.add(&incr).unwrap();
            let mu_x = singular_value_function(&alg, &x).unwrap();
            let mu_y = singular_value_function(&alg, &y).unwrap();
            for &t in mu_x.breakpoints().iter().chain(mu_y.breakpoints()) {
                if t < mu_x.domain_end() {
                    assert!(mu_x.value_at(t) <= mu_y.value_at(t) + 1e-10);
                }
            }

            let a = crate::rand_gen::random_element(&mut rng, &alg);
            let axa = a.mul(&x).unwrap().mul(&a.adjoint()).unwrap();
            let bound = a.op_norm().powi(2);
            let mu_a = singular_value_function(&alg, &axa).unwrap();
            for &t in mu_a.breakpoints() {
                if t < mu_a.domain_end() {
                    assert!(mu_a.value_at(t) <= bound * mu_x.value_at(t) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn majorisation_is_a_preorder() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let alg = diag_alg(&[(4, 0.25)]);
        for _ in 0..20 {
            let a = random_density(&mut rng, &alg);
            assert!(majorises_density(&a, &a).unwrap());
        }
        // transitivity on mixture chains: ρ₂ = mix of ρ₃, ρ₁ = mix of ρ₂
        for _ in 0..10 {
            let rho3 = random_density(&mut rng, &alg);
            let rho2 = mix_of(&mut rng, &alg, &rho3);
            let rho1 = mix_of(&mut rng, &alg, &rho2);
            assert!(majorises_density(&rho2, &rho3).unwrap());
            assert!(majorises_density(&rho1, &rho2).unwrap());
            assert!(majorises_density(&rho1, &rho3).unwrap());
        }
    }

    fn mix_of(rng: &mut ChaCha8Rng, alg: &Algebra, rho: &Density) -> Density {
        let u1 = random_unitary(rng, alg);
        let u2 = random_unitary(rng, alg);
        let t = 0.3;
        let a = u1
            .mul(&rho.as_element())
            .unwrap()
            .mul(&u1.adjoint())
            .unwrap()
            .scale(cr(t));
        let b = u2
            .mul(&rho.as_element())
            .unwrap()
            .mul(&u2.adjoint())
            .unwrap()
            .scale(cr(1.0 - t));
        Density::new(
            alg,
            crate::algebra::Side::Left,
            a.add(&b).unwrap().data().to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn schur_horn_direction() {
        // diag(ρ) ≺ ρ via the diagonal conditional expectation
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let alg = diag_alg(&[(4, 1.0)]);
        for _ in 0..10 {
            let rho = random_density(&mut rng, &alg);
            let m = &rho.data()[0];
            let mut d = CMatrix::zeros(4, 4);
            for i in 0..4 {
                d[(i, i)] = m[(i, i)];
            }
            let diag = alg.element(vec![d]).unwrap();
            assert!(majorises(&alg, &diag, &rho.as_element()).unwrap());
        }
    }

    #[test]
    fn csv_emission_matches_contract() {
        let alg = diag_alg(&[(2, 0.5)]);
        let mu = singular_value_function(&alg, &alg.identity()).unwrap();
        assert_eq!(mu.to_csv(), "0,1\n1,1\n");
    }

    #[test]
    fn step_merging_is_canonical() {
        let alg = diag_alg(&[(2, 0.5), (1, 1.0)]);
        let x = diag_elem(&alg, &[vec![0.7, 0.7], vec![0.7]]);
        let mu = singular_value_function(&alg, &x).unwrap();
        assert_eq!(mu.values().len(), 1);
        assert!((mu.domain_end() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn complex_off_diagonal_spectrum() {
        let alg = diag_alg(&[(2, 1.0)]);
        let x = alg
            .element(vec![CMatrix::from_row_slice(
                2,
                2,
                &[cr(1.0), c64(0.0, -0.5), c64(0.0, 0.5), cr(1.0)],
            )])
            .unwrap();
        let mu = singular_value_function(&alg, &x).unwrap();
        assert!((mu.values()[0] - 1.5).abs() < 1e-12);
        assert!((mu.values()[1] - 0.5).abs() < 1e-12);
    }
}
