//! Convertibility: decide `ρ_ψ ≺ ρ_φ` and synthesize an explicit one-way
//! protocol realising the conversion.
//!
//! The constructive chain for a factor is: eigenvalue transfer through a
//! product of T-transforms, Birkhoff decomposition of the resulting doubly
//! stochastic matrix into permutations, a mixing decomposition
//! `ρ_ψ = Σ p_i u_i ρ_φ u_i*`, measurement operators
//! `M_i = ρ_i^{1/2} pinv(ρ_ψ^{1/2})`, and commutant corrections obtained by
//! GNS matching of equal-density vectors. In finite dimension every step is
//! exact, so the synthesized protocol converts `ω_ψ` to `ω_φ` up to rounding
//! only.

use nalgebra::DMatrix;

use crate::algebra::{AlgElement, Algebra, Density, Side, StdVector};
use crate::channels::{LoccMap, OneWayProtocol, ProtocolDirection};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMatrix};
use crate::spectral::{majorises_report, singular_value_function_density};
use crate::TOL_EQ;

/// A square matrix with nonnegative entries whose rows and columns each sum
/// to one.
#[derive(Debug, Clone)]
pub struct DoublyStochastic {
    matrix: DMatrix<f64>,
}

impl DoublyStochastic {
    /// Validate entries and marginals (tolerance 1e-12).
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::ShapeMismatch("doubly stochastic matrix must be square".into()));
        }
        for v in matrix.iter() {
            if *v < -1e-12 {
                return Err(Error::OutOfRange(format!("negative entry {v}")));
            }
        }
        for i in 0..n {
            let rs: f64 = matrix.row(i).iter().sum();
            let cs: f64 = matrix.column(i).iter().sum();
            if (rs - 1.0).abs() > 1e-12 || (cs - 1.0).abs() > 1e-12 {
                return Err(Error::OutOfRange(format!(
                    "marginal sums differ from 1: row {rs}, column {cs}"
                )));
            }
        }
        Ok(DoublyStochastic { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)] * v[j]).sum())
            .collect()
    }
}

fn is_sorted_desc(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1] - 1e-12)
}

/// Partial-sum majorisation check for plain sorted vectors.
fn vector_majorised_by(src: &[f64], tgt: &[f64], tol: f64) -> bool {
    if src.len() != tgt.len() {
        return false;
    }
    let mut ps = 0.0;
    let mut pt = 0.0;
    for (s, t) in src.iter().zip(tgt) {
        ps += s;
        pt += t;
        if ps > pt + tol {
            return false;
        }
    }
    (ps - pt).abs() <= tol
}

/// Build a doubly stochastic `D` with `src = D · tgt` as a product of at
/// most `len − 1` T-transforms. Both vectors must be sorted descending with
/// equal totals and `src ≺ tgt`.
pub fn transfer_matrix(src: &[f64], tgt: &[f64]) -> Result<DoublyStochastic> {
    let n = src.len();
    if n == 0 || tgt.len() != n {
        return Err(Error::ShapeMismatch("vector length mismatch".into()));
    }
    if !is_sorted_desc(src) || !is_sorted_desc(tgt) {
        return Err(Error::OutOfRange("vectors must be sorted descending".into()));
    }
    if !vector_majorised_by(src, tgt, TOL_EQ) {
        return Err(Error::NotMajorised(
            "transfer_matrix requires src ≺ tgt".into(),
        ));
    }
    let mut d = DMatrix::<f64>::identity(n, n);
    let mut y: Vec<f64> = tgt.to_vec();
    for _round in 0..n {
        // largest j with y_j > x_j
        let j = match (0..n).rev().find(|&j| y[j] > src[j] + 1e-13) {
            Some(j) => j,
            None => break,
        };
        // smallest k > j with y_k < x_k
        let k = match ((j + 1)..n).find(|&k| y[k] < src[k] - 1e-13) {
            Some(k) => k,
            None => break,
        };
        let delta = (y[j] - src[j]).min(src[k] - y[k]);
        let spread = y[j] - y[k];
        if spread <= 0.0 {
            break;
        }
        let t = 1.0 - delta / spread;
        // T = t·I + (1−t)·(j k) applied on the left of y
        let yj = y[j];
        let yk = y[k];
        y[j] = t * yj + (1.0 - t) * yk;
        y[k] = (1.0 - t) * yj + t * yk;
        let mut tm = DMatrix::<f64>::identity(n, n);
        tm[(j, j)] = t;
        tm[(k, k)] = t;
        tm[(j, k)] = 1.0 - t;
        tm[(k, j)] = 1.0 - t;
        d = tm * d;
    }
    let residual = src
        .iter()
        .zip(&y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > 1e-10 {
        return Err(Error::Degenerate(format!(
            "T-transform chain did not reach the target (residual {residual:.3e})"
        )));
    }
    DoublyStochastic::new(d)
}

/// Birkhoff–von Neumann: greedy extraction of permutations from a doubly
/// stochastic matrix. Returns `(p_i, π_i)` with `π_i[r]` the column carrying
/// the 1 in row `r`; `Σ p_i P_i = D` within 1e-10 with at most `(n−1)² + 1`
/// terms.
pub fn birkhoff(d: &DoublyStochastic) -> Result<Vec<(f64, Vec<usize>)>> {
    let n = d.dim();
    let mut rem = d.matrix.clone();
    let mut out = Vec::new();
    let max_terms = (n - 1) * (n - 1) + 1;
    for _ in 0..=max_terms {
        let mass: f64 = rem.row_iter().next().map(|r| r.iter().sum()).unwrap_or(0.0);
        let total: f64 = rem.iter().sum::<f64>() / n as f64;
        if total.max(mass) < 1e-11 {
            break;
        }
        let thresh = 1e-13;
        let perm = match bipartite_perfect_matching(&rem, thresh) {
            Some(p) => p,
            // residual dust below the matching threshold is dropped
            None if total < 1e-9 => break,
            None => {
                return Err(Error::Degenerate(
                    "no perfect matching on the positive-entry graph; input is not doubly \
                     stochastic"
                        .into(),
                ))
            }
        };
        let p = perm
            .iter()
            .enumerate()
            .map(|(r, &c)| rem[(r, c)])
            .fold(f64::INFINITY, f64::min);
        for (r, &c) in perm.iter().enumerate() {
            rem[(r, c)] -= p;
            if rem[(r, c)].abs() < 1e-15 {
                rem[(r, c)] = 0.0;
            }
        }
        out.push((p, perm));
    }
    Ok(out)
}

/// Kuhn's augmenting-path matching on rows→columns with edges where
/// `m[(r, c)] > thresh`. Returns `perm[r] = c` on success.
fn bipartite_perfect_matching(m: &DMatrix<f64>, thresh: f64) -> Option<Vec<usize>> {
    let n = m.nrows();
    let mut col_of_row = vec![usize::MAX; n];
    let mut row_of_col = vec![usize::MAX; n];

    fn try_augment(
        m: &DMatrix<f64>,
        thresh: f64,
        r: usize,
        visited: &mut [bool],
        col_of_row: &mut [usize],
        row_of_col: &mut [usize],
    ) -> bool {
        let n = m.nrows();
        for c in 0..n {
            if m[(r, c)] > thresh && !visited[c] {
                visited[c] = true;
                if row_of_col[c] == usize::MAX
                    || try_augment(m, thresh, row_of_col[c], visited, col_of_row, row_of_col)
                {
                    col_of_row[r] = c;
                    row_of_col[c] = r;
                    return true;
                }
            }
        }
        false
    }

    for r in 0..n {
        let mut visited = vec![false; n];
        if !try_augment(m, thresh, r, &mut visited, &mut col_of_row, &mut row_of_col) {
            return None;
        }
    }
    Some(col_of_row)
}

/// Probability weights and unitaries expressing `ρ_ψ = Σ p_i u_i ρ_φ u_i*`.
#[derive(Debug, Clone)]
pub struct MixingDecomposition {
    weights: Vec<f64>,
    unitaries: Vec<AlgElement>,
    source: Density,
    target: Density,
}

impl MixingDecomposition {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn unitaries(&self) -> &[AlgElement] {
        &self.unitaries
    }

    pub fn source(&self) -> &Density {
        &self.source
    }

    pub fn target(&self) -> &Density {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The mixed density `Σ p_i u_i ρ_φ u_i*`.
    pub fn mixed(&self) -> AlgElement {
        let mut acc = self.source.parent().zero();
        for (p, u) in self.weights.iter().zip(&self.unitaries) {
            let term = u
                .mul(&self.target.as_element())
                .unwrap()
                .mul(&u.adjoint())
                .unwrap()
                .scale(cr(*p));
            acc = acc.add(&term).unwrap();
        }
        acc
    }

    /// `‖ρ_ψ − Σ p_i u_i ρ_φ u_i*‖₁`.
    pub fn residual(&self) -> f64 {
        self.source
            .as_element()
            .sub(&self.mixed())
            .unwrap()
            .trace_norm()
    }

    /// The branch densities `ρ_i = p_i u_i ρ_φ u_i*`.
    pub fn branch_densities(&self) -> Vec<AlgElement> {
        self.weights
            .iter()
            .zip(&self.unitaries)
            .map(|(p, u)| {
                u.mul(&self.target.as_element())
                    .unwrap()
                    .mul(&u.adjoint())
                    .unwrap()
                    .scale(cr(*p))
            })
            .collect()
    }
}

fn factor_eigensystem(rho: &Density) -> Result<(Vec<f64>, CMatrix)> {
    let alg = rho.parent();
    if !alg.is_factor() {
        return Err(Error::NonFactor(
            "mixing decompositions need a factor; unitary orbits do not cross blocks".into(),
        ));
    }
    let (vals, vecs) = linalg::eigh_desc(&rho.data()[0]);
    Ok((vals.iter().map(|v| v.max(0.0)).collect(), vecs))
}

/// Construct `(p_i, u_i)` with `ρ_ψ = Σ p_i u_i ρ_φ u_i*`, exactly in exact
/// arithmetic whenever `ρ_ψ ≺ ρ_φ` in a factor.
pub fn mixing_decomposition(rho_psi: &Density, rho_phi: &Density) -> Result<MixingDecomposition> {
    rho_psi.parent().check_parent_of(rho_phi.parent())?;
    let (lam_psi, u_psi) = factor_eigensystem(rho_psi)?;
    let (lam_phi, u_phi) = factor_eigensystem(rho_phi)?;
    if !vector_majorised_by(&lam_psi, &lam_phi, TOL_EQ) {
        return Err(Error::NotMajorised(
            "mixing decomposition requires ρ_ψ ≺ ρ_φ".into(),
        ));
    }
    let d = transfer_matrix(&lam_psi, &lam_phi)?;
    let decomposition = birkhoff(&d)?;
    let alg = rho_psi.parent().clone();
    let n = lam_psi.len();
    let mut weights = Vec::with_capacity(decomposition.len());
    let mut unitaries = Vec::with_capacity(decomposition.len());
    for (p, perm) in decomposition {
        // P[r, perm[r]] = 1; u = U_ψ P U_φ*
        let mut pm = CMatrix::zeros(n, n);
        for (r, &c) in perm.iter().enumerate() {
            pm[(r, c)] = cr(1.0);
        }
        let u = &u_psi * pm * u_phi.adjoint();
        weights.push(p);
        unitaries.push(alg.element(vec![u])?);
    }
    // normalise away the birkhoff tail mass
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Degenerate(format!(
            "birkhoff weights sum to {total}"
        )));
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(MixingDecomposition {
        weights,
        unitaries,
        source: rho_psi.clone(),
        target: rho_phi.clone(),
    })
}

/// Lemma-style measurement operators: `M_i = ρ_i^{1/2} · pinv(ρ_ψ^{1/2})`
/// for the branch densities `ρ_i` of the mixing decomposition, together with
/// the complement `M₀ = 1 − supp(ρ_ψ)`. Contracts: `M_i ρ_ψ M_i* = ρ_i` and
/// `Σ M_i*M_i + M₀*M₀ = 1`.
pub fn measurement_operators(
    rho_psi: &Density,
    mix: &MixingDecomposition,
) -> Result<(Vec<AlgElement>, AlgElement)> {
    rho_psi.parent().check_parent_of(mix.source.parent())?;
    if rho_psi
        .as_element()
        .sub(&mix.source.as_element())?
        .trace_norm()
        > TOL_EQ
    {
        return Err(Error::ShapeMismatch(
            "mixing decomposition does not belong to this density".into(),
        ));
    }
    let pinv_root = rho_psi.pinv_sqrt();
    let support = rho_psi.support();
    let alg = rho_psi.parent().clone();
    let mut ms = Vec::with_capacity(mix.len());
    for rho_i in mix.branch_densities() {
        let root_i = rho_i.sqrt_psd();
        ms.push(root_i.mul(&pinv_root)?);
    }
    let m0 = alg.identity().sub(&support)?;
    Ok((ms, m0))
}

/// Commutant corrections: for each branch, the stored contraction `b_i`
/// with `(u_i^* M_i ψ) · b_i = √p_i φ`, obtained by GNS matching of vectors
/// with equal left densities through a shared spectral frame.
pub fn correction_operators(
    psi: &StdVector,
    phi: &StdVector,
    ms: &[AlgElement],
    mix: &MixingDecomposition,
) -> Result<Vec<AlgElement>> {
    let alg = psi.parent().clone();
    let mut out = Vec::with_capacity(ms.len());
    for ((m_i, u_i), p_i) in ms.iter().zip(mix.unitaries()).zip(mix.weights()) {
        let a_i = u_i.adjoint().mul(m_i)?;
        let xi = psi.act(Side::Left, &a_i)?;
        let eta = phi.scale(cr(p_i.sqrt()));
        // ρ_ξ = ρ_η = p_i ρ_φ up to rounding, so range(η) = range(ξ) and
        // c = ξ⁺η solves ξc = η exactly; it is a partial isometry in exact
        // arithmetic and gets its singular values clamped at one here
        let mut c_blocks = Vec::with_capacity(alg.num_blocks());
        for k in 0..alg.num_blocks() {
            let c = linalg::pinv(xi.block(k), 1e-13) * eta.block(k);
            c_blocks.push(linalg::clip_contraction(&c));
        }
        let c = alg.element(c_blocks)?;
        // a large relative miss means the densities genuinely disagree
        // (support mismatch); small misses on low-weight branches are
        // absorbed by the protocol-level residual contract
        let landed = xi.act(Side::Right, &c)?;
        let res = landed.sub(&eta)?.norm();
        if res > 1e-3 * (1.0 + eta.norm()) {
            return Err(Error::Degenerate(format!(
                "branch density mismatch: correction misses its target by {res:.3e}"
            )));
        }
        out.push(c);
    }
    Ok(out)
}

/// Majorisation decision for a factor: `ρ_ψ ≺ ρ_φ`. Multi-block algebras
/// are rejected; use the raw `majorises` on densities instead, with the
/// caveat that the convertibility theorem is only proved for factors.
pub fn decide_convertible(alg: &Algebra, psi: &StdVector, phi: &StdVector) -> Result<bool> {
    alg.check_parent_of(psi.parent())?;
    alg.check_parent_of(phi.parent())?;
    if !alg.is_factor() {
        return Err(Error::NonFactor(
            "convertibility is decided for factors only; the general criterion needs integral \
             decompositions (use spectral::majorises_density for the raw majorisation data)"
                .into(),
        ));
    }
    psi.require_unit()?;
    phi.require_unit()?;
    let (rho_psi, _) = psi.densities();
    let (rho_phi, _) = phi.densities();
    let mu_psi = singular_value_function_density(&rho_psi)?;
    let mu_phi = singular_value_function_density(&rho_phi)?;
    Ok(majorises_report(&mu_psi, &mu_phi).holds)
}

/// Abelian MASA criterion over a finite discrete measure: convertible iff
/// `|ψ| = |φ|` pointwise.
pub fn decide_convertible_abelian(
    weights: &[f64],
    psi: &[num_complex::Complex<f64>],
    phi: &[num_complex::Complex<f64>],
) -> Result<bool> {
    if psi.len() != weights.len() || phi.len() != weights.len() {
        return Err(Error::ShapeMismatch("length mismatch".into()));
    }
    for &w in weights {
        if !(w > 0.0) {
            return Err(Error::InvalidAlgebra(format!("weight {w} must be positive")));
        }
    }
    let norm = |v: &[num_complex::Complex<f64>]| -> f64 {
        v.iter()
            .zip(weights)
            .map(|(z, w)| w * z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let np = norm(psi);
    let nf = norm(phi);
    if (np - 1.0).abs() > TOL_EQ {
        return Err(Error::NotUnit(np));
    }
    if (nf - 1.0).abs() > TOL_EQ {
        return Err(Error::NotUnit(nf));
    }
    Ok(psi
        .iter()
        .zip(phi)
        .all(|(a, b)| (a.norm() - b.norm()).abs() <= TOL_EQ))
}

/// Synthesize a one-way right protocol converting `ω_ψ` into `ω_φ`.
/// Fails with [`Error::NotConvertible`] when `ρ_ψ ⊀ ρ_φ`.
pub fn synthesize_protocol(
    alg: &Algebra,
    psi: &StdVector,
    phi: &StdVector,
) -> Result<OneWayProtocol> {
    synthesize_in_direction(alg, psi, phi, ProtocolDirection::Right)
}

/// Synthesize in a chosen direction; `Left` is obtained from the mirror
/// construction on the conjugated vectors.
pub fn synthesize_in_direction(
    alg: &Algebra,
    psi: &StdVector,
    phi: &StdVector,
    direction: ProtocolDirection,
) -> Result<OneWayProtocol> {
    match direction {
        ProtocolDirection::Right => synthesize_right(alg, psi, phi),
        ProtocolDirection::Left => {
            let p = synthesize_right(alg, &psi.conj_j(), &phi.conj_j())?;
            let mut branches = Vec::with_capacity(p.branch_count());
            for b in p.branches() {
                branches.push(crate::channels::ProtocolBranch {
                    measure: b.measure.adjoint(),
                    correct: b.correct.iter().map(|c| c.adjoint()).collect(),
                });
            }
            OneWayProtocol::new(alg, ProtocolDirection::Left, branches)
        }
    }
}

fn synthesize_right(alg: &Algebra, psi: &StdVector, phi: &StdVector) -> Result<OneWayProtocol> {
    if !decide_convertible(alg, psi, phi)? {
        return Err(Error::NotConvertible("ρ_ψ is not majorised by ρ_φ".into()));
    }
    let (rho_psi, _) = psi.densities();
    let (rho_phi, _) = phi.densities();
    let mix = mixing_decomposition(&rho_psi, &rho_phi)?;
    let (ms, m0) = measurement_operators(&rho_psi, &mix)?;
    let cs = correction_operators(psi, phi, &ms, &mix)?;

    let mut pairs = Vec::with_capacity(ms.len() + 1);
    for ((m_i, u_i), c_i) in ms.iter().zip(mix.unitaries()).zip(cs) {
        // fold the eigenbasis-aligning unitary into the Alice Kraus operator
        pairs.push((u_i.adjoint().mul(m_i)?, c_i));
    }
    // complement branch: zero mass on ψ, arbitrary isometry on the Bob side
    if m0.op_norm() > 1e-12 {
        pairs.push((m0, alg.identity()));
    }
    let protocol = OneWayProtocol::from_contractions(alg, ProtocolDirection::Right, pairs)?;
    let residual = verify_protocol(&protocol, psi, phi)?;
    if residual > 1e-8 {
        return Err(Error::Degenerate(format!(
            "synthesized protocol verifies at {residual:.3e}, above the 1e-8 contract"
        )));
    }
    Ok(protocol)
}

/// Trace-norm distance `‖Θ_*(ω_ψ) − ω_φ‖₁` on `B(L²(A,τ))`.
pub fn verify_protocol(theta: &OneWayProtocol, psi: &StdVector, phi: &StdVector) -> Result<f64> {
    let out = theta.push_state(psi)?;
    let target = phi.functional_matrix();
    Ok(linalg::trace_norm_herm(&(out - target)))
}

/// Collapse a multi-round LOCC map with pure output on `ω_ψ` to a one-way
/// right protocol with the same action, by re-synthesis from the extracted
/// target vector.
pub fn reduce_to_one_way(locc: &LoccMap, psi: &StdVector) -> Result<OneWayProtocol> {
    let alg = locc.parent().clone();
    alg.check_parent_of(psi.parent())?;
    if !alg.is_factor() {
        return Err(Error::NonFactor("one-way reduction needs a factor".into()));
    }
    let unital = locc.unitality_defect();
    if unital > 1e-8 {
        return Err(Error::OutOfRange(format!(
            "multi-round map is not unital (defect {unital:.3e})"
        )));
    }
    let omega = locc.apply_schrodinger(&psi.functional_matrix())?;
    let (vals, vecs) = linalg::eigh_desc(&omega);
    let second = vals.get(1).copied().unwrap_or(0.0);
    if second.abs() > TOL_EQ {
        return Err(Error::MixedOutput(second));
    }
    let top = vals[0];
    if (top - 1.0).abs() > 1e-6 {
        return Err(Error::Degenerate(format!(
            "output functional has trace-leading eigenvalue {top}"
        )));
    }
    let coords = vecs.column(0).into_owned();
    let phi = alg.vector_from_l2_coords(&coords)?.normalized()?;
    synthesize_protocol(&alg, psi, &phi)
}
