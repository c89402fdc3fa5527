//! Entropy of the singular value distribution relative to a normalised
//! trace, `H_τ(ρ) = −∫₀¹ μ_t(ρ) log μ_t(ρ) dt = −τ(ρ log ρ)`, and its
//! monotonicity under convertibility. Natural logarithm throughout; the
//! value lies in `(−∞, 0]` and vanishes exactly on `ρ = 1`.

use crate::algebra::{Algebra, Density, StdVector};
use crate::convert::decide_convertible;
use crate::error::{Error, Result};
use crate::spectral::{singular_value_function_density, StepFunction};
use crate::TOL_EQ;

/// Entropy value together with the singular value density it integrates.
#[derive(Debug, Clone)]
pub struct EntropyReport {
    /// `H_τ(ρ) ≤ 0`; zero iff the density is the constant 1.
    pub value: f64,
    /// The step function `t ↦ μ_t(ρ)`.
    pub density: StepFunction,
}

fn eta(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

fn require_normalised(alg: &Algebra, rho: &Density) -> Result<()> {
    let t1 = alg.tau_one();
    if (t1 - 1.0).abs() > TOL_EQ {
        return Err(Error::OutOfRange(format!(
            "entropy needs a normalised trace: τ(1) = {t1}"
        )));
    }
    let tr = rho.tau();
    if (tr - 1.0).abs() > TOL_EQ {
        return Err(Error::OutOfRange(format!(
            "entropy needs a normalised state: τ(ρ) = {tr}"
        )));
    }
    Ok(())
}

/// `H_τ(ρ)`: exact step-function integral of `−μ log μ` (with
/// `0·log 0 = 0`), cross-checked against the spectral value `−τ(ρ log ρ)`.
pub fn entropy_relative_to_trace(alg: &Algebra, rho: &Density) -> Result<EntropyReport> {
    alg.check_parent_of(rho.parent())?;
    require_normalised(alg, rho)?;
    let mu = singular_value_function_density(rho)?;
    let mut value = 0.0;
    for (j, &v) in mu.values().iter().enumerate() {
        let width = mu.breakpoints()[j + 1] - mu.breakpoints()[j];
        value += eta(v) * width;
    }
    // spectral route: −τ(ρ log ρ) over the pooled eigenvalues
    let spectral: f64 = rho
        .weighted_spectrum()?
        .iter()
        .map(|&(v, w)| w * eta(v))
        .sum();
    if (value - spectral).abs() > 1e-10 * (1.0 + value.abs()) {
        return Err(Error::Degenerate(format!(
            "entropy routes disagree: integral {value} vs spectral {spectral}"
        )));
    }
    Ok(EntropyReport { value, density: mu })
}

/// Outcome of the monotonicity check for a pair of states.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub convertible: bool,
    pub entropy_source: f64,
    pub entropy_target: f64,
    /// True unless the pair is convertible and the entropy increased beyond
    /// tolerance.
    pub monotone: bool,
}

/// Check `ψ → φ convertible ⇒ H_τ(ρ_ψ) ≥ H_τ(ρ_φ)` on a normalised factor.
pub fn check_monotonicity(
    alg: &Algebra,
    psi: &StdVector,
    phi: &StdVector,
) -> Result<MonotonicityReport> {
    let convertible = decide_convertible(alg, psi, phi)?;
    let h_psi = entropy_relative_to_trace(alg, &psi.densities().0)?.value;
    let h_phi = entropy_relative_to_trace(alg, &phi.densities().0)?.value;
    let monotone = !convertible || h_psi >= h_phi - TOL_EQ;
    Ok(MonotonicityReport {
        convertible,
        entropy_source: h_psi,
        entropy_target: h_phi,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Side;
    use crate::linalg::{cr, CMatrix};
    use crate::rand_gen::{random_majorising_pair, random_unit_vector, random_unitary};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn normalised_factor(n: usize) -> Algebra {
        Algebra::new(&[(n, 1.0 / n as f64)]).unwrap()
    }

    fn diag_density(alg: &Algebra, eigs: &[f64]) -> Density {
        let n = eigs.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &v) in eigs.iter().enumerate() {
            m[(i, i)] = cr(v);
        }
        Density::new(alg, Side::Left, vec![m]).unwrap()
    }

    #[test]
    fn unit_density_has_zero_entropy() {
        let alg = normalised_factor(3);
        let rho = diag_density(&alg, &[1.0, 1.0, 1.0]);
        let rep = entropy_relative_to_trace(&alg, &rho).unwrap();
        assert_eq!(rep.value, 0.0);
    }

    #[test]
    fn rank_one_in_m2_gives_minus_log2() {
        let alg = Algebra::new(&[(2, 0.5)]).unwrap();
        let rho = diag_density(&alg, &[2.0, 0.0]);
        let rep = entropy_relative_to_trace(&alg, &rho).unwrap();
        assert!((rep.value + 2.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn abelian_uniform_density_gives_log_measure() {
        // f = χ_U / λ(U) on a weighted discrete space: H = log λ(U) ≤ 0
        let alg = Algebra::new(&[(1, 0.3), (1, 0.45), (1, 0.25)]).unwrap();
        let lam_u = 0.3 + 0.45; // support on the first two atoms
        let inv = 1.0 / lam_u;
        let rho = Density::new(
            &alg,
            Side::Left,
            vec![
                CMatrix::from_element(1, 1, cr(inv)),
                CMatrix::from_element(1, 1, cr(inv)),
                CMatrix::zeros(1, 1),
            ],
        )
        .unwrap();
        let rep = entropy_relative_to_trace(&alg, &rho).unwrap();
        assert!((rep.value - lam_u.ln()).abs() < 1e-12);
        assert!(rep.value <= 0.0);
    }

    #[test]
    fn rejects_unnormalised_inputs() {
        let alg = Algebra::new(&[(2, 1.0)]).unwrap(); // τ(1) = 2
        let rho = diag_density(&alg, &[0.5, 0.5]);
        assert!(entropy_relative_to_trace(&alg, &rho).is_err());

        let alg2 = normalised_factor(2);
        let rho2 = diag_density(&alg2, &[0.5, 0.5]); // τ(ρ) = 0.5
        assert!(entropy_relative_to_trace(&alg2, &rho2).is_err());
    }

    #[test]
    fn entropy_is_nonpositive_and_zero_only_at_identity() {
        let alg = normalised_factor(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..25 {
            let psi = random_unit_vector(&mut rng, &alg);
            let rep = entropy_relative_to_trace(&alg, &psi.densities().0).unwrap();
            assert!(rep.value <= 1e-12);
        }
        // perturbations of 1 give strictly negative values beyond noise
        for _ in 0..10 {
            let eps: f64 = rng.gen_range(0.01..0.2);
            let rho = diag_density(&alg, &[1.0 + 3.0 * eps, 1.0 - eps, 1.0 - eps, 1.0 - eps]);
            let rep = entropy_relative_to_trace(&alg, &rho).unwrap();
            assert!(rep.value < -1e-6, "perturbed density has H = {}", rep.value);
        }
    }

    #[test]
    fn unitary_invariance() {
        let alg = normalised_factor(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let psi = random_unit_vector(&mut rng, &alg);
            let (rho, _) = psi.densities();
            let u = random_unitary(&mut rng, &alg);
            let conj = Density::new(
                &alg,
                Side::Left,
                u.mul(&rho.as_element())
                    .unwrap()
                    .mul(&u.adjoint())
                    .unwrap()
                    .data()
                    .to_vec(),
            )
            .unwrap();
            let a = entropy_relative_to_trace(&alg, &rho).unwrap().value;
            let b = entropy_relative_to_trace(&alg, &conj).unwrap().value;
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn majorisation_monotonicity_at_density_level() {
        // ρ₁ ≺ ρ₂ ⇒ H(ρ₁) ≥ H(ρ₂)
        let alg = normalised_factor(4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let (psi, phi) = random_majorising_pair(&mut rng, &alg, 3);
            let h1 = entropy_relative_to_trace(&alg, &psi.densities().0)
                .unwrap()
                .value;
            let h2 = entropy_relative_to_trace(&alg, &phi.densities().0)
                .unwrap()
                .value;
            assert!(h1 >= h2 - 1e-9, "H decreased: {h1} < {h2}");
        }
    }

    #[test]
    fn check_monotonicity_reports() {
        let alg = normalised_factor(4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // trace vector: H = 0 dominates everything
        let tv = alg.trace_vector();
        for _ in 0..10 {
            let phi = random_unit_vector(&mut rng, &alg);
            let rep = check_monotonicity(&alg, &tv, &phi).unwrap();
            assert!(rep.convertible);
            assert!(rep.monotone);
            assert!(rep.entropy_source.abs() < 1e-12);
            assert!(rep.entropy_target <= 1e-12);
        }
        // ψ = φ: equality
        let psi = random_unit_vector(&mut rng, &alg);
        let rep = check_monotonicity(&alg, &psi, &psi).unwrap();
        assert!(rep.convertible && rep.monotone);
        assert!((rep.entropy_source - rep.entropy_target).abs() < 1e-12);
    }

    #[test]
    fn additivity_on_tensor_products() {
        // A = M₂⊗M₂ ≅ M₄ with normalised trace; ρ⊗σ has
        // H(ρ⊗σ) = H(ρ) + H(σ) — spectral oracle
        let alg4 = normalised_factor(4);
        let alg2 = normalised_factor(2);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let r1 = random_unit_vector(&mut rng, &alg2).densities().0;
            let r2 = random_unit_vector(&mut rng, &alg2).densities().0;
            let a = r1.data()[0].clone();
            let b = r2.data()[0].clone();
            let kron = a.kronecker(&b);
            let rho = Density::new(&alg4, Side::Left, vec![kron]).unwrap();
            let h = entropy_relative_to_trace(&alg4, &rho).unwrap().value;
            let h1 = entropy_relative_to_trace(&alg2, &r1).unwrap().value;
            let h2 = entropy_relative_to_trace(&alg2, &r2).unwrap().value;
            assert!((h - (h1 + h2)).abs() <= 1e-10, "additivity defect");
        }
    }
}
