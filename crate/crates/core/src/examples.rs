//! Generators for the three trace-vector scenarios — spin-chain truncations,
//! finite Weyl (clock-and-shift) systems, and the anti-symmetric Fock space
//! with its Gaussian vectors — plus the numerical trace-vector predicate.
//!
//! Everything here is a finite truncation of a hyperfinite construction:
//! the half-chain of `n` entangled pairs becomes `M_{2^n}`, the irrational
//! rotation becomes the rational clock-and-shift pair on `ℂ^q`, and the
//! real-wave CAR algebra is probed through word spans on `2^d`-dimensional
//! Fock space.

use num_complex::Complex;

use crate::algebra::{AlgElement, Algebra, StdVector};
use crate::error::{Error, Result};
use crate::linalg::{cr, czero, CMatrix, CVector, C64};

const SPIN_CAP: usize = 6;
const CAR_CAP: usize = 10;

/// Half-chain truncation of the infinite spin chain: the algebra of the
/// left half of `n` maximally entangled qubit pairs is `M_{2^n}` with the
/// normalised trace, and the pair state is exactly its trace vector.
pub fn spin_chain_state(pairs: usize) -> Result<(Algebra, StdVector)> {
    if pairs < 1 || pairs > SPIN_CAP {
        return Err(Error::OutOfRange(format!(
            "pair count {pairs} outside 1..={SPIN_CAP}"
        )));
    }
    let dim = 1usize << pairs;
    let alg = Algebra::factor(dim, 1.0 / dim as f64)?;
    let psi = alg.trace_vector();
    Ok((alg, psi))
}

/// Finite Weyl system data: the clock and shift unitaries generating `M_q`
/// together with the standard form and its trace vector.
#[derive(Debug, Clone)]
pub struct WeylSystem {
    pub algebra: Algebra,
    pub clock: AlgElement,
    pub shift: AlgElement,
    pub trace_vector: StdVector,
    pub q: usize,
    pub p: usize,
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Clock-and-shift pair with `UV = e^{2πip/q}VU`: the rational-θ truncation
/// of the discretised CCR system.
pub fn weyl_pair(q: usize, p: usize) -> Result<WeylSystem> {
    if q < 2 {
        return Err(Error::OutOfRange(format!("q = {q} must be at least 2")));
    }
    if gcd(p % q, q) != 1 {
        return Err(Error::OutOfRange(format!(
            "p = {p} and q = {q} must be coprime"
        )));
    }
    let alg = Algebra::factor(q, 1.0 / q as f64)?;
    // roots table keeps powers of ω consistent across the matrix
    let root = |k: usize| -> C64 {
        let angle = std::f64::consts::TAU * ((p * k) % q) as f64 / q as f64;
        Complex::from_polar(1.0, angle)
    };
    let mut clock = CMatrix::zeros(q, q);
    for j in 0..q {
        clock[(j, j)] = root(j);
    }
    let mut shift = CMatrix::zeros(q, q);
    for j in 0..q {
        shift[((j + 1) % q, j)] = cr(1.0);
    }
    Ok(WeylSystem {
        clock: alg.element(vec![clock])?,
        shift: alg.element(vec![shift])?,
        trace_vector: alg.trace_vector(),
        algebra: alg,
        q,
        p,
    })
}

/// Anti-symmetric Fock space over `ℂ^d`, with basis indexed by subsets of
/// the modes (bitmasks) and Jordan–Wigner-consistent signs.
#[derive(Debug, Clone)]
pub struct FockSpace {
    modes: usize,
    dim: usize,
    creators: Vec<CMatrix>,
}

impl FockSpace {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The mode creation operator `a_j*`.
    pub fn creator(&self, j: usize) -> &CMatrix {
        &self.creators[j]
    }

    pub fn annihilator(&self, j: usize) -> CMatrix {
        self.creators[j].adjoint()
    }

    /// `a*(ψ) = Σ_j ψ_j a_j*` (linear in ψ).
    pub fn create(&self, psi: &[C64]) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for (j, &z) in psi.iter().enumerate() {
            acc += self.creators[j].clone() * z;
        }
        acc
    }

    /// `a(ψ) = Σ_j conj(ψ_j) a_j` (conjugate-linear in ψ).
    pub fn annihilate(&self, psi: &[C64]) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for (j, &z) in psi.iter().enumerate() {
            acc += self.creators[j].adjoint() * z.conj();
        }
        acc
    }

    /// Field operator `B(ψ) = a*(ψ) + a(ψ)`; self-adjoint for real ψ.
    pub fn field(&self, psi: &[C64]) -> CMatrix {
        self.create(psi) + self.annihilate(psi)
    }

    /// Fields of the standard real basis vectors, the generators of the
    /// real-wave algebra.
    pub fn field_generators(&self) -> Vec<CMatrix> {
        (0..self.modes)
            .map(|j| {
                let mut e = vec![czero(); self.modes];
                e[j] = cr(1.0);
                self.field(&e)
            })
            .collect()
    }

    /// Parity `S = ⊕ (−1)^n`.
    pub fn parity(&self) -> CMatrix {
        let mut s = CMatrix::zeros(self.dim, self.dim);
        for mask in 0..self.dim {
            let sign = if (mask as u32).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            s[(mask, mask)] = cr(sign);
        }
        s
    }

    /// The vacuum `Ω = e_∅`.
    pub fn vacuum(&self) -> CVector {
        let mut v = CVector::zeros(self.dim);
        v[0] = cr(1.0);
        v
    }

    /// Two-particle creation operator `a*(c) = Σ_{ij} c_{ij} a_i* a_j*` for
    /// an anti-symmetric coefficient matrix.
    pub fn two_particle_creator(&self, c: &CMatrix) -> Result<CMatrix> {
        self.check_antisymmetric(c)?;
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for i in 0..self.modes {
            for j in 0..self.modes {
                if c[(i, j)].norm() > 0.0 {
                    acc += (&self.creators[i] * &self.creators[j]) * c[(i, j)];
                }
            }
        }
        Ok(acc)
    }

    fn check_antisymmetric(&self, c: &CMatrix) -> Result<()> {
        if c.nrows() != self.modes || c.ncols() != self.modes {
            return Err(Error::ShapeMismatch(format!(
                "coefficient matrix must be {0}×{0}",
                self.modes
            )));
        }
        let defect = (c + c.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > 1e-12 {
            return Err(Error::OutOfRange(format!(
                "coefficient matrix is not anti-symmetric (defect {defect:.3e})"
            )));
        }
        Ok(())
    }

    /// The Fermionic Gaussian vector
    /// `Ω_c = det(1 + c*c)^{−1/4} exp(−a*(c)/2) Ω`. The exponential series
    /// terminates because `a*(c)` is nilpotent.
    pub fn gaussian_vector(&self, c: &CMatrix) -> Result<CVector> {
        let a_c = self.two_particle_creator(c)?;
        let norm = {
            let g = c.adjoint() * c + CMatrix::identity(self.modes, self.modes);
            let det: C64 = g.determinant();
            det.re.max(0.0).powf(-0.25)
        };
        let mut vec = self.vacuum();
        let mut term = self.vacuum();
        let mut k = 1.0;
        loop {
            term = (&a_c * &term).scale(-0.5 / k);
            if term.norm() < 1e-300 {
                break;
            }
            vec += &term;
            k += 1.0;
            if k > self.modes as f64 + 2.0 {
                break;
            }
        }
        Ok(vec.scale(norm))
    }

    /// Standard form of the real-wave algebra for an even number of modes:
    /// the Clifford algebra on `d` generators is the factor `M_{2^{d/2}}`,
    /// whose trace vector corresponds to the quasi-free vacuum. Odd mode
    /// counts have a two-dimensional centre and are rejected.
    pub fn standard_form_factor(&self) -> Result<(Algebra, StdVector)> {
        if self.modes % 2 != 0 {
            return Err(Error::NonFactor(format!(
                "the real-wave algebra of {} modes has nontrivial centre",
                self.modes
            )));
        }
        let dim = 1usize << (self.modes / 2);
        let alg = Algebra::factor(dim, 1.0 / dim as f64)?;
        let tv = alg.trace_vector();
        Ok((alg, tv))
    }
}

/// Build creation/annihilation matrices on `2^d`-dimensional Fock space.
pub fn car_fock(modes: usize) -> Result<FockSpace> {
    if modes < 1 || modes > CAR_CAP {
        return Err(Error::OutOfRange(format!(
            "mode count {modes} outside 1..={CAR_CAP}"
        )));
    }
    let dim = 1usize << modes;
    let mut creators = Vec::with_capacity(modes);
    for j in 0..modes {
        let mut m = CMatrix::zeros(dim, dim);
        for mask in 0..dim {
            if mask & (1 << j) == 0 {
                // (−1)^{#{i < j occupied}}
                let below = (mask & ((1 << j) - 1)) as u32;
                let sign = if below.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(mask | (1 << j), mask)] = cr(sign);
            }
        }
        creators.push(m);
    }
    Ok(FockSpace {
        modes,
        dim,
        creators,
    })
}

/// Result of the numerical trace-vector test.
#[derive(Debug, Clone)]
pub struct TraceVectorReport {
    /// Verdict; meaningful only when `saturated` is true.
    pub is_trace_vector: bool,
    /// Max over word pairs of `|⟨xyΩ, Ω⟩ − ⟨yxΩ, Ω⟩|`.
    pub defect: f64,
    /// Whether the word span stopped growing before the depth cap.
    pub saturated: bool,
    /// Linear dimension of the generated word span.
    pub span_dim: usize,
}

/// Test whether `ω_Ω` restricts to a tracial state on the algebra generated
/// by `generators` (closed under adjoints internally). Spans words up to
/// `depth`, detecting saturation by rank stabilisation; the tracial defect
/// is maximised over all pairs from a linearly independent word family.
pub fn is_trace_vector(
    generators: &[CMatrix],
    omega: &CVector,
    depth: usize,
) -> Result<TraceVectorReport> {
    if generators.is_empty() {
        return Err(Error::ShapeMismatch("no generators".into()));
    }
    let dim = omega.len();
    for g in generators {
        if g.nrows() != dim || g.ncols() != dim {
            return Err(Error::ShapeMismatch(
                "generator shape does not match the vector".into(),
            ));
        }
    }
    let nrm = omega.norm();
    if (nrm - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnit(nrm));
    }

    let mut gens: Vec<CMatrix> = generators.to_vec();
    gens.extend(generators.iter().map(|g| g.adjoint()));

    // orthonormal basis of the word span (matrices flattened), kept via
    // modified Gram–Schmidt; `words` holds one representative per basis
    // direction
    let mut basis: Vec<CMatrix> = Vec::new();
    let mut words: Vec<CMatrix> = Vec::new();
    let accept = |m: &CMatrix, basis: &mut Vec<CMatrix>, words: &mut Vec<CMatrix>| -> bool {
        let mut r = m.clone();
        for b in basis.iter() {
            let coeff: C64 = b.iter().zip(r.iter()).map(|(x, y)| x.conj() * *y).sum();
            r -= b.clone() * coeff;
        }
        let n = r.norm();
        if n > 1e-10 * (1.0 + m.norm()) {
            basis.push(r.unscale(n));
            words.push(m.clone());
            true
        } else {
            false
        }
    };

    let identity = CMatrix::identity(dim, dim);
    accept(&identity, &mut basis, &mut words);
    let mut frontier: Vec<CMatrix> = vec![identity];
    let mut saturated = false;
    for _gen in 0..depth {
        let mut next = Vec::new();
        let mut grew = false;
        for w in &frontier {
            for g in &gens {
                let m = w * g;
                if accept(&m, &mut basis, &mut words) {
                    next.push(m);
                    grew = true;
                }
            }
        }
        if !grew {
            saturated = true;
            break;
        }
        frontier = next;
        if basis.len() >= dim * dim {
            saturated = true;
            break;
        }
    }
    // one more closure probe: saturation also holds when the last frontier
    // generates nothing new
    if !saturated {
        let mut probe_basis = basis.clone();
        let mut probe_words = words.clone();
        let mut grew = false;
        for w in &frontier {
            for g in &gens {
                if accept(&(w * g), &mut probe_basis, &mut probe_words) {
                    grew = true;
                }
            }
        }
        saturated = !grew;
    }

    // tracial defect over word pairs: ⟨xyΩ, Ω⟩ = (yΩ, x*Ω)
    let forward: Vec<CVector> = words.iter().map(|w| w * omega).collect();
    let adj: Vec<CVector> = words.iter().map(|w| w.adjoint() * omega).collect();
    let pair = |a: &CVector, b: &CVector| -> C64 {
        // (a, b) linear in the first argument
        b.iter().zip(a.iter()).map(|(x, y)| x.conj() * *y).sum()
    };
    let mut defect: f64 = 0.0;
    for x in 0..words.len() {
        for y in 0..words.len() {
            let xy = pair(&forward[y], &adj[x]);
            let yx = pair(&forward[x], &adj[y]);
            defect = defect.max((xy - yx).norm());
        }
    }

    Ok(TraceVectorReport {
        is_trace_vector: saturated && defect <= 1e-8,
        defect,
        saturated,
        span_dim: basis.len(),
    })
}
