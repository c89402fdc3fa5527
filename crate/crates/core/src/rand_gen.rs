//! Seeded generators for random algebra data. All randomness in the crate
//! flows through an explicit `Rng`, so checks are reproducible from a seed.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;

use crate::algebra::{AlgElement, Algebra, Density, StdVector};
use crate::linalg::{cr, CMatrix};

fn ginibre<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        // Box-Muller pairs; scale is irrelevant for QR-based unitaries
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = (-2.0 * u1.ln()).sqrt();
        Complex::new(r * u2.cos(), r * u2.sin())
    })
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// R-diagonal phase fix.
pub fn random_unitary_matrix<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let g = ginibre(rng, n);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut fix = CMatrix::zeros(n, n);
    for i in 0..n {
        let d = r[(i, i)];
        fix[(i, i)] = if d.norm() > 0.0 {
            d / cr(d.norm())
        } else {
            cr(1.0)
        };
    }
    q * fix
}

/// Random element with independent complex Gaussian entries in every block.
pub fn random_element<R: Rng>(rng: &mut R, alg: &Algebra) -> AlgElement {
    let data = alg.blocks().iter().map(|b| ginibre(rng, b.dim)).collect();
    alg.element(data).expect("shapes match by construction")
}

/// Random unitary element (blockwise Haar).
pub fn random_unitary<R: Rng>(rng: &mut R, alg: &Algebra) -> AlgElement {
    let data = alg
        .blocks()
        .iter()
        .map(|b| random_unitary_matrix(rng, b.dim))
        .collect();
    alg.element(data).expect("shapes match by construction")
}

/// Random contraction: a random element rescaled to operator norm ≤ `bound`.
pub fn random_contraction<R: Rng>(rng: &mut R, alg: &Algebra, bound: f64) -> AlgElement {
    let x = random_element(rng, alg);
    let nrm = x.op_norm();
    if nrm < 1e-300 {
        return alg.zero();
    }
    let scale: f64 = rng.gen_range(0.2..1.0);
    x.scale(cr(bound * scale / nrm))
}

/// Random unit vector in `L²(A, τ)`.
pub fn random_unit_vector<R: Rng>(rng: &mut R, alg: &Algebra) -> StdVector {
    let data: Vec<CMatrix> = alg.blocks().iter().map(|b| ginibre(rng, b.dim)).collect();
    alg.vector(data)
        .expect("shapes match")
        .normalized()
        .expect("ginibre vector is nonzero")
}

/// Random left density with `τ(ρ) = 1` (the density of a random unit vector).
pub fn random_density<R: Rng>(rng: &mut R, alg: &Algebra) -> Density {
    random_unit_vector(rng, alg).densities().0
}

/// Random positive element, full rank with probability one.
pub fn random_positive<R: Rng>(rng: &mut R, alg: &Algebra) -> AlgElement {
    let x = random_element(rng, alg);
    x.mul(&x.adjoint()).expect("same parent")
}

/// A unit vector whose left density is a random convex mixture of unitary
/// conjugates of `rho`, hence majorised by it.
pub fn random_mixture_state<R: Rng>(rng: &mut R, rho: &Density, terms: usize) -> StdVector {
    let alg = rho.parent().clone();
    let mut mixed = alg.zero();
    let mut weights = Vec::with_capacity(terms);
    let mut total = 0.0;
    for _ in 0..terms {
        let w: f64 = rng.gen_range(0.05..1.0);
        weights.push(w);
        total += w;
    }
    for w in &mut weights {
        *w /= total;
    }
    for &w in &weights {
        let u = random_unitary(rng, &alg);
        let term = u
            .mul(&rho.as_element())
            .unwrap()
            .mul(&u.adjoint())
            .unwrap()
            .scale(cr(w));
        mixed = mixed.add(&term).unwrap();
    }
    let root = mixed.sqrt_psd();
    let ur = random_unitary(rng, &alg);
    // ψ = ρ^{1/2} u has left density ρ^{1/2} u u* ρ^{1/2} = ρ
    let psi_data: Vec<DMatrix<Complex<f64>>> = root
        .data()
        .iter()
        .zip(ur.data())
        .map(|(r, u)| r * u)
        .collect();
    alg.vector(psi_data)
        .unwrap()
        .normalized()
        .expect("mixture of unit-trace densities is nonzero")
}

/// A pair `(ψ, φ)` of unit vectors with `ρ_ψ ≺ ρ_φ` by construction.
pub fn random_majorising_pair<R: Rng>(
    rng: &mut R,
    alg: &Algebra,
    terms: usize,
) -> (StdVector, StdVector) {
    let phi = random_unit_vector(rng, alg);
    let psi = random_mixture_state(rng, &phi.densities().0, terms);
    (psi, phi)
}

/// Random vector with the prescribed left density (up to numerical error).
pub fn vector_with_left_density<R: Rng>(rng: &mut R, rho: &Density) -> StdVector {
    let alg = rho.parent().clone();
    let root = rho.sqrt();
    let u = random_unitary(rng, &alg);
    let data: Vec<CMatrix> = root.data().iter().zip(u.data()).map(|(r, q)| r * q).collect();
    alg.vector(data).expect("shapes match")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let alg = Algebra::new(&[(4, 0.25)]).unwrap();
        for _ in 0..10 {
            let u = random_unitary(&mut rng, &alg);
            assert!(u.unitary_defect() < 1e-12);
        }
    }

    #[test]
    fn majorising_pairs_have_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let alg = Algebra::new(&[(3, 1.0)]).unwrap();
        let (psi, phi) = random_majorising_pair(&mut rng, &alg, 3);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!((phi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let alg = Algebra::new(&[(3, 1.0)]).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(99);
        let mut r2 = ChaCha8Rng::seed_from_u64(99);
        let a = random_element(&mut r1, &alg);
        let b = random_element(&mut r2, &alg);
        assert!(a.distance(&b) == 0.0);
    }
}
