//! Completely positive maps with side-constrained Kraus operators,
//! instruments, one-way LOCC protocols and their multi-round linkings, the
//! Lo–Popescu transfer primitive, and the pinching estimate.
//!
//! Side convention: an `Alice` map has Kraus operators in `A` acting by left
//! multiplication (it is an `A'`-bimodule map); a `Bob` map has Kraus
//! operators in `A'`, stored as their J-conjugates in `A` and acting by
//! right multiplication (an `A`-bimodule map). All instruments are finite,
//! so the weak*-convergent sums of the countable theory become plain finite
//! sums.

use crate::algebra::{AlgElement, Algebra, Side, StdVector};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMatrix};
use crate::TOL_EQ;

/// Which party implements a Kraus map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    /// Kraus operators in `A`, acting as left multipliers.
    Alice,
    /// Kraus operators in `A'`, stored as J-conjugates in `A`, acting as
    /// right multipliers.
    Bob,
}

impl Party {
    pub fn action_side(self) -> Side {
        match self {
            Party::Alice => Side::Left,
            Party::Bob => Side::Right,
        }
    }
}

/// A CP map `x ↦ Σ_i k_i* x k_i` on `B(L²(A,τ))` whose Kraus family lives on
/// one side of the bimodule.
#[derive(Debug, Clone)]
pub struct KrausMap {
    parent: Algebra,
    side: Party,
    kraus: Vec<AlgElement>,
}

impl KrausMap {
    /// Validate a subunital Kraus family (`Σ k* k ≤ 1 + tol` in the
    /// appropriate action).
    pub fn new(parent: &Algebra, side: Party, kraus: Vec<AlgElement>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::ShapeMismatch("empty Kraus family".into()));
        }
        for k in &kraus {
            parent.check_parent_of(k.parent())?;
        }
        let map = KrausMap {
            parent: parent.clone(),
            side,
            kraus,
        };
        let comp = map.completeness();
        let top = comp
            .data()
            .iter()
            .map(linalg::op_norm)
            .fold(0.0, f64::max);
        if top > 1.0 + TOL_EQ {
            return Err(Error::OutOfRange(format!(
                "Kraus family is not subunital: ‖Σ k*k‖ = {top}"
            )));
        }
        Ok(map)
    }

    /// The identity map on the given side.
    pub fn identity(parent: &Algebra, side: Party) -> Self {
        KrausMap {
            parent: parent.clone(),
            side,
            kraus: vec![parent.identity()],
        }
    }

    pub fn parent(&self) -> &Algebra {
        &self.parent
    }

    pub fn side(&self) -> Party {
        self.side
    }

    pub fn kraus(&self) -> &[AlgElement] {
        &self.kraus
    }

    /// `Σ k_i* k_i` in stored form: `Σ k*k` for Alice, `Σ kk*` for Bob
    /// (the right action is an anti-homomorphism).
    pub fn completeness(&self) -> AlgElement {
        let mut acc = self.parent.zero();
        for k in &self.kraus {
            let term = match self.side {
                Party::Alice => k.adjoint().mul(k).expect("same parent"),
                Party::Bob => k.mul(&k.adjoint()).expect("same parent"),
            };
            acc = acc.add(&term).expect("same parent");
        }
        acc
    }

    /// Defect `‖Σ k_i* k_i − 1‖` (operator norm); zero for unital maps.
    pub fn unitality_defect(&self) -> f64 {
        self.completeness()
            .sub(&self.parent.identity())
            .expect("same parent")
            .op_norm()
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unitality_defect() <= tol
    }

    /// The Kraus operators as matrices on `L²(A,τ)`.
    pub fn l2_kraus(&self) -> Vec<CMatrix> {
        self.kraus
            .iter()
            .map(|k| match self.side {
                Party::Alice => self.parent.left_mult_matrix(k),
                Party::Bob => self.parent.right_mult_matrix(k),
            })
            .collect()
    }

    /// Heisenberg action `x ↦ Σ k* x k` on an operator on `L²`.
    pub fn apply_heisenberg(&self, x: &CMatrix) -> Result<CMatrix> {
        apply_kraus_heisenberg(&self.l2_kraus(), x, self.parent.l2_dim())
    }

    /// Predual action `ρ ↦ Σ k ρ k*` on a trace-class operator on `L²`.
    pub fn apply_schrodinger(&self, rho: &CMatrix) -> Result<CMatrix> {
        apply_kraus_schrodinger(&self.l2_kraus(), rho, self.parent.l2_dim())
    }

    /// Per-Kraus images of a vector: `k_i ψ` (Alice) or `ψ k_i` (Bob).
    pub fn branch_vectors(&self, psi: &StdVector) -> Result<Vec<StdVector>> {
        self.kraus
            .iter()
            .map(|k| psi.act(self.side.action_side(), k))
            .collect()
    }
}

fn check_l2_shape(n: usize, x: &CMatrix) -> Result<()> {
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "expected an {n}×{n} operator on L², got {}×{}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(())
}

fn apply_kraus_heisenberg(kraus: &[CMatrix], x: &CMatrix, n: usize) -> Result<CMatrix> {
    check_l2_shape(n, x)?;
    let mut acc = CMatrix::zeros(n, n);
    for k in kraus {
        acc += k.adjoint() * x * k;
    }
    Ok(acc)
}

fn apply_kraus_schrodinger(kraus: &[CMatrix], rho: &CMatrix, n: usize) -> Result<CMatrix> {
    check_l2_shape(n, rho)?;
    let mut acc = CMatrix::zeros(n, n);
    for k in kraus {
        acc += k * rho * k.adjoint();
    }
    Ok(acc)
}

/// A general normal CP map on `B(L²(A,τ))` with explicit Kraus matrices.
/// Sums and compositions of side-constrained maps land here.
#[derive(Debug, Clone)]
pub struct CpMap {
    parent: Algebra,
    kraus: Vec<CMatrix>,
    side: Option<Party>,
}

impl CpMap {
    pub fn from_kraus_map(m: &KrausMap) -> Self {
        CpMap {
            parent: m.parent.clone(),
            kraus: m.l2_kraus(),
            side: Some(m.side),
        }
    }

    pub fn from_l2_kraus(parent: &Algebra, kraus: Vec<CMatrix>) -> Result<Self> {
        let n = parent.l2_dim();
        for k in &kraus {
            check_l2_shape(n, k)?;
        }
        Ok(CpMap {
            parent: parent.clone(),
            kraus,
            side: None,
        })
    }

    pub fn identity(parent: &Algebra) -> Self {
        CpMap {
            kraus: vec![CMatrix::identity(parent.l2_dim(), parent.l2_dim())],
            parent: parent.clone(),
            side: None,
        }
    }

    pub fn parent(&self) -> &Algebra {
        &self.parent
    }

    pub fn side(&self) -> Option<Party> {
        self.side
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Heisenberg composition `self ∘ inner` (`x ↦ self(inner(x))`); the
    /// predual applies `self` after `inner`.
    pub fn compose(&self, inner: &CpMap) -> Result<CpMap> {
        self.parent.check_parent_of(&inner.parent)?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * inner.kraus.len());
        for ki in &inner.kraus {
            for ko in &self.kraus {
                kraus.push(ki * ko);
            }
        }
        let side = match (self.side, inner.side) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        };
        Ok(CpMap {
            parent: self.parent.clone(),
            kraus,
            side,
        })
    }

    /// CP sum: concatenated Kraus families.
    pub fn add(&self, other: &CpMap) -> Result<CpMap> {
        self.parent.check_parent_of(&other.parent)?;
        let mut kraus = self.kraus.clone();
        kraus.extend(other.kraus.iter().cloned());
        let side = match (self.side, other.side) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        };
        Ok(CpMap {
            parent: self.parent.clone(),
            kraus,
            side,
        })
    }

    /// `Σ k* 1 k`, the image of the identity.
    pub fn on_identity(&self) -> CMatrix {
        let n = self.parent.l2_dim();
        let mut acc = CMatrix::zeros(n, n);
        for k in &self.kraus {
            acc += k.adjoint() * k;
        }
        acc
    }

    pub fn apply_heisenberg(&self, x: &CMatrix) -> Result<CMatrix> {
        apply_kraus_heisenberg(&self.kraus, x, self.parent.l2_dim())
    }

    pub fn apply_schrodinger(&self, rho: &CMatrix) -> Result<CMatrix> {
        apply_kraus_schrodinger(&self.kraus, rho, self.parent.l2_dim())
    }
}

/// A finite instrument: labelled CP branches summing to a unital map.
#[derive(Debug, Clone)]
pub struct Instrument {
    parent: Algebra,
    branches: Vec<(String, CpMap)>,
}

/// Validation output for an instrument.
#[derive(Debug, Clone)]
pub struct InstrumentReport {
    /// `‖Σ_branches branch(1) − 1‖` in operator norm.
    pub unitality_defect: f64,
    pub branch_count: usize,
    /// Side tag per branch when the branch is side-constrained.
    pub sides: Vec<Option<Party>>,
    pub pass: bool,
}

impl Instrument {
    pub fn new(parent: &Algebra, branches: Vec<(String, CpMap)>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::ShapeMismatch("instrument with no branches".into()));
        }
        for (_, b) in &branches {
            parent.check_parent_of(&b.parent)?;
        }
        Ok(Instrument {
            parent: parent.clone(),
            branches,
        })
    }

    pub fn parent(&self) -> &Algebra {
        &self.parent
    }

    pub fn branches(&self) -> &[(String, CpMap)] {
        &self.branches
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    /// Checks `Σ branches(1) = 1`; complete positivity holds by Kraus form.
    pub fn validate(&self) -> InstrumentReport {
        let n = self.parent.l2_dim();
        let mut total = CMatrix::zeros(n, n);
        for (_, b) in &self.branches {
            total += b.on_identity();
        }
        let defect = linalg::op_norm(&(total - CMatrix::identity(n, n)));
        InstrumentReport {
            unitality_defect: defect,
            branch_count: self.branches.len(),
            sides: self.branches.iter().map(|(_, b)| b.side).collect(),
            pass: defect <= TOL_EQ,
        }
    }

    /// The total map `Θ_I = Σ_k Θ_k`.
    pub fn total_map(&self) -> CpMap {
        let mut acc = CpMap {
            parent: self.parent.clone(),
            kraus: Vec::new(),
            side: self.branches.first().and_then(|(_, b)| b.side),
        };
        for (_, b) in &self.branches {
            acc = acc.add(b).expect("same parent");
        }
        acc
    }

    /// Merge branches along a partition of `0..branch_count`. Every index
    /// must appear in exactly one part; the total map is unchanged.
    pub fn coarse_grain(&self, partition: &[Vec<usize>]) -> Result<Instrument> {
        let n = self.branches.len();
        let mut seen = vec![false; n];
        for part in partition {
            if part.is_empty() {
                return Err(Error::InvalidPartition("empty part".into()));
            }
            for &i in part {
                if i >= n {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} out of range for {n} branches"
                    )));
                }
                if seen[i] {
                    return Err(Error::InvalidPartition(format!("index {i} repeated")));
                }
                seen[i] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidPartition(
                "partition does not cover all branches".into(),
            ));
        }
        let mut branches = Vec::with_capacity(partition.len());
        for (j, part) in partition.iter().enumerate() {
            let mut acc: Option<CpMap> = None;
            let mut labels = Vec::new();
            for &i in part {
                labels.push(self.branches[i].0.clone());
                acc = Some(match acc {
                    None => self.branches[i].1.clone(),
                    Some(a) => a.add(&self.branches[i].1)?,
                });
            }
            branches.push((format!("S{j}({})", labels.join("+")), acc.unwrap()));
        }
        Instrument::new(&self.parent, branches)
    }

    pub fn apply_schrodinger(&self, rho: &CMatrix) -> Result<CMatrix> {
        self.total_map().apply_schrodinger(rho)
    }

    pub fn apply_heisenberg(&self, x: &CMatrix) -> Result<CMatrix> {
        self.total_map().apply_heisenberg(x)
    }
}

/// Direction of a one-way protocol: `Right` means the measuring party is
/// Alice (Kraus in `A`) and the correcting channels are Bob's; `Left` is the
/// mirror image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolDirection {
    Right,
    Left,
}

/// One branch of a one-way protocol: a measurement operator on the measuring
/// side and a unital correcting channel on the other side, stored as its
/// Kraus family.
#[derive(Debug, Clone)]
pub struct ProtocolBranch {
    /// Measurement Kraus operator (`a_i ∈ A` for right protocols; the stored
    /// J-conjugate of `b_i ∈ A'` for left ones).
    pub measure: AlgElement,
    /// Kraus family of the correcting channel on the opposite side; must be
    /// unital in its own action.
    pub correct: Vec<AlgElement>,
}

/// A one-way LOCC protocol `Θ = Σ_i Φ_i ∘ Ψ_i` with finitely many branches.
#[derive(Debug, Clone)]
pub struct OneWayProtocol {
    parent: Algebra,
    direction: ProtocolDirection,
    branches: Vec<ProtocolBranch>,
}

impl OneWayProtocol {
    pub fn new(
        parent: &Algebra,
        direction: ProtocolDirection,
        branches: Vec<ProtocolBranch>,
    ) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::ShapeMismatch("protocol with no branches".into()));
        }
        for b in &branches {
            parent.check_parent_of(b.measure.parent())?;
            if b.correct.is_empty() {
                return Err(Error::ShapeMismatch("branch with no correction".into()));
            }
            for c in &b.correct {
                parent.check_parent_of(c.parent())?;
            }
        }
        Ok(OneWayProtocol {
            parent: parent.clone(),
            direction,
            branches,
        })
    }

    /// Build branches from `(measurement, contraction)` pairs; the
    /// correcting channel is completed to a unital one with the defect Kraus
    /// operator, as in `x ↦ b*xb + (1−b*b)^{1/2} x (1−b*b)^{1/2}`.
    pub fn from_contractions(
        parent: &Algebra,
        direction: ProtocolDirection,
        pairs: Vec<(AlgElement, AlgElement)>,
    ) -> Result<Self> {
        let one = parent.identity();
        let mut branches = Vec::with_capacity(pairs.len());
        for (measure, b) in pairs {
            if b.op_norm() > 1.0 + TOL_EQ {
                return Err(Error::OutOfRange(format!(
                    "correction operator is not a contraction (norm {})",
                    b.op_norm()
                )));
            }
            // stored-form completeness differs per side
            let gram = match direction {
                ProtocolDirection::Right => b.mul(&b.adjoint())?, // Σ cc* = 1
                ProtocolDirection::Left => b.adjoint().mul(&b)?,  // Σ k*k = 1
            };
            let defect = one.sub(&gram)?.sqrt_psd();
            branches.push(ProtocolBranch {
                measure,
                correct: vec![b, defect],
            });
        }
        Self::new(parent, direction, branches)
    }

    /// The identity protocol (one branch, trivial measurement, trivial
    /// correction).
    pub fn identity(parent: &Algebra, direction: ProtocolDirection) -> Self {
        OneWayProtocol {
            parent: parent.clone(),
            direction,
            branches: vec![ProtocolBranch {
                measure: parent.identity(),
                correct: vec![parent.identity()],
            }],
        }
    }

    pub fn parent(&self) -> &Algebra {
        &self.parent
    }

    pub fn direction(&self) -> ProtocolDirection {
        self.direction
    }

    pub fn branches(&self) -> &[ProtocolBranch] {
        &self.branches
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    fn measure_party(&self) -> Party {
        match self.direction {
            ProtocolDirection::Right => Party::Alice,
            ProtocolDirection::Left => Party::Bob,
        }
    }

    fn correct_party(&self) -> Party {
        match self.direction {
            ProtocolDirection::Right => Party::Bob,
            ProtocolDirection::Left => Party::Alice,
        }
    }

    /// `Σ_i a_i* a_i` over measurement operators (stored action).
    pub fn measurement_completeness(&self) -> AlgElement {
        let mut acc = self.parent.zero();
        for b in &self.branches {
            let term = match self.measure_party() {
                Party::Alice => b.measure.adjoint().mul(&b.measure).unwrap(),
                Party::Bob => b.measure.mul(&b.measure.adjoint()).unwrap(),
            };
            acc = acc.add(&term).unwrap();
        }
        acc
    }

    /// Defect of `Σ a_i*a_i = 1` plus the worst per-branch correction
    /// unitality defect.
    pub fn protocol_defect(&self) -> f64 {
        let meas = self
            .measurement_completeness()
            .sub(&self.parent.identity())
            .unwrap()
            .op_norm();
        let mut corr: f64 = 0.0;
        for b in &self.branches {
            let mut acc = self.parent.zero();
            for c in &b.correct {
                let term = match self.correct_party() {
                    Party::Alice => c.adjoint().mul(c).unwrap(),
                    Party::Bob => c.mul(&c.adjoint()).unwrap(),
                };
                acc = acc.add(&term).unwrap();
            }
            corr = corr.max(acc.sub(&self.parent.identity()).unwrap().op_norm());
        }
        meas.max(corr)
    }

    /// Branch `i` as a side-aware pair of Kraus maps `(Ψ_i, Φ_i)`.
    pub fn branch_maps(&self, i: usize) -> Result<(KrausMap, KrausMap)> {
        let b = &self.branches[i];
        let measure = KrausMap::new(
            &self.parent,
            self.measure_party(),
            vec![b.measure.clone()],
        )?;
        let correct = KrausMap::new(&self.parent, self.correct_party(), b.correct.clone())?;
        Ok((measure, correct))
    }

    /// Branch `i` as a CP map on `B(L²)`.
    pub fn branch_cp(&self, i: usize) -> CpMap {
        let b = &self.branches[i];
        let meas_mat = match self.measure_party() {
            Party::Alice => self.parent.left_mult_matrix(&b.measure),
            Party::Bob => self.parent.right_mult_matrix(&b.measure),
        };
        let mut kraus = Vec::with_capacity(b.correct.len());
        for c in &b.correct {
            let c_mat = match self.correct_party() {
                Party::Alice => self.parent.left_mult_matrix(c),
                Party::Bob => self.parent.right_mult_matrix(c),
            };
            // Heisenberg: x ↦ a*(Φ(x))a with Φ's Kraus applied outside;
            // composite Kraus = measure · correct
            kraus.push(&meas_mat * c_mat);
        }
        CpMap {
            parent: self.parent.clone(),
            kraus,
            side: None,
        }
    }

    /// The protocol as a labelled instrument.
    pub fn as_instrument(&self) -> Instrument {
        let branches = (0..self.branches.len())
            .map(|i| (format!("branch{i}"), self.branch_cp(i)))
            .collect();
        Instrument {
            parent: self.parent.clone(),
            branches,
        }
    }

    pub fn apply_heisenberg(&self, x: &CMatrix) -> Result<CMatrix> {
        self.as_instrument().apply_heisenberg(x)
    }

    pub fn apply_schrodinger(&self, rho: &CMatrix) -> Result<CMatrix> {
        self.as_instrument().apply_schrodinger(rho)
    }

    /// Post-measurement branch vectors of a pure input: all Kraus images
    /// `(correction ∘ measurement) ψ`, grouped by branch.
    pub fn branch_vectors(&self, psi: &StdVector) -> Result<Vec<Vec<StdVector>>> {
        self.parent.check_parent_of(psi.parent())?;
        let m_side = self.measure_party().action_side();
        let c_side = self.correct_party().action_side();
        let mut out = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            let xi = psi.act(m_side, &b.measure)?;
            let mut vecs = Vec::with_capacity(b.correct.len());
            for c in &b.correct {
                vecs.push(xi.act(c_side, c)?);
            }
            out.push(vecs);
        }
        Ok(out)
    }

    /// Predual image of the vector state `ω_ψ` as an `L²`-level functional
    /// matrix, computed branch-by-branch from rank-one pieces.
    pub fn push_state(&self, psi: &StdVector) -> Result<CMatrix> {
        let n = self.parent.l2_dim();
        let mut acc = CMatrix::zeros(n, n);
        for vecs in self.branch_vectors(psi)? {
            for v in vecs {
                let c = self.parent.l2_coords(&v);
                acc += &c * c.adjoint();
            }
        }
        Ok(acc)
    }

    /// Composition of right protocols: the result's predual applies `other`
    /// first and `self` second, i.e. `result_* = self_* ∘ other_*`. Branches
    /// are the product family with Bob parts commuted past Alice parts.
    pub fn compose_right(&self, other: &OneWayProtocol) -> Result<OneWayProtocol> {
        if self.direction != ProtocolDirection::Right || other.direction != ProtocolDirection::Right
        {
            return Err(Error::SideViolation(
                "compose_right requires two right-direction protocols".into(),
            ));
        }
        self.parent.check_parent_of(&other.parent)?;
        let mut branches = Vec::with_capacity(self.branches.len() * other.branches.len());
        for b1 in &self.branches {
            for b2 in &other.branches {
                // predual: ρ ↦ Bob₁ Bob₂ ((a₁a₂) ρ (a₁a₂)*)
                let measure = b1.measure.mul(&b2.measure)?;
                let mut correct = Vec::with_capacity(b1.correct.len() * b2.correct.len());
                for c2 in &b2.correct {
                    for c1 in &b1.correct {
                        // stored right-multipliers compose in reverse
                        correct.push(c2.mul(c1)?);
                    }
                }
                branches.push(ProtocolBranch { measure, correct });
            }
        }
        OneWayProtocol::new(&self.parent, ProtocolDirection::Right, branches)
    }
}

/// A multi-round LOCC map: round 0 is a single instrument; each later round
/// is a continuation table holding one instrument per leaf branch of the
/// rounds before it (the linking of instruments, with coarse-graining left
/// implicit in branch labels).
#[derive(Debug, Clone)]
pub struct LoccMap {
    parent: Algebra,
    rounds: Vec<Vec<Instrument>>,
}

impl LoccMap {
    pub fn new(parent: &Algebra, first: Instrument) -> Result<Self> {
        parent.check_parent_of(&first.parent)?;
        Ok(LoccMap {
            parent: parent.clone(),
            rounds: vec![vec![first]],
        })
    }

    pub fn from_protocol(p: &OneWayProtocol) -> Self {
        LoccMap {
            parent: p.parent().clone(),
            rounds: vec![vec![p.as_instrument()]],
        }
    }

    pub fn parent(&self) -> &Algebra {
        &self.parent
    }

    pub fn rounds(&self) -> usize {
        self.rounds.len()
    }

    /// Number of leaves (composite branches) of the linking tree.
    pub fn leaf_count(&self) -> usize {
        self.leaf_maps().len()
    }

    /// Append a round: one continuation instrument per current leaf.
    pub fn add_round(&mut self, continuations: Vec<Instrument>) -> Result<()> {
        let leaves = self.leaf_count();
        if continuations.len() != leaves {
            return Err(Error::InvalidPartition(format!(
                "round needs one instrument per leaf: expected {leaves}, got {}",
                continuations.len()
            )));
        }
        for c in &continuations {
            self.parent.check_parent_of(&c.parent)?;
        }
        self.rounds.push(continuations);
        Ok(())
    }

    /// All composite leaf maps `Θ_k ∘ Θ_{ki} ∘ …` in depth-first order. The
    /// predual of a leaf applies round 0 first.
    pub fn leaf_maps(&self) -> Vec<CpMap> {
        let mut leaves: Vec<CpMap> = self.rounds[0]
            .get(0)
            .map(|i| i.branches.iter().map(|(_, b)| b.clone()).collect())
            .unwrap_or_default();
        for round in &self.rounds[1..] {
            let mut next = Vec::new();
            for (leaf, cont) in leaves.iter().zip(round.iter()) {
                for (_, b) in &cont.branches {
                    // Heisenberg composite: earlier rounds outermost
                    next.push(leaf.compose(b).expect("same parent"));
                }
            }
            leaves = next;
        }
        leaves
    }

    /// `‖Θ(1) − 1‖` over the whole linked family.
    pub fn unitality_defect(&self) -> f64 {
        let n = self.parent.l2_dim();
        let mut total = CMatrix::zeros(n, n);
        for leaf in self.leaf_maps() {
            total += leaf.on_identity();
        }
        linalg::op_norm(&(total - CMatrix::identity(n, n)))
    }

    pub fn apply_schrodinger(&self, rho: &CMatrix) -> Result<CMatrix> {
        let n = self.parent.l2_dim();
        check_l2_shape(n, rho)?;
        let mut acc = CMatrix::zeros(n, n);
        for leaf in self.leaf_maps() {
            acc += leaf.apply_schrodinger(rho)?;
        }
        Ok(acc)
    }
}

/// Commutation defect of an Alice/Bob pair (Eq. `Φ∘Ψ = Ψ∘Φ`): the supremum
/// over the matrix-unit basis of `B(L²)` of `‖Φ(Ψ(e)) − Ψ(Φ(e))‖_F`.
/// Errors when both maps act on the same side.
pub fn bimodule_commutation_defect(phi: &KrausMap, psi: &KrausMap) -> Result<f64> {
    if phi.side == psi.side {
        return Err(Error::SideViolation(format!(
            "both maps act on the {:?} side",
            phi.side
        )));
    }
    phi.parent.check_parent_of(&psi.parent)?;
    let n = phi.parent.l2_dim();
    let a_mats = psi.l2_kraus();
    let b_mats = phi.l2_kraus();
    // G = A·B realises Φ(Ψ(x)) = Σ (AB)* x (AB); H = B·A the other order
    let mut gs = Vec::new();
    let mut hs = Vec::new();
    for a in &a_mats {
        for b in &b_mats {
            gs.push(a * b);
            hs.push(b * a);
        }
    }
    let mut worst: f64 = 0.0;
    for p in 0..n {
        for q in 0..n {
            // D(e_pq)[r,s] = Σ_m conj(G_m[p,r]) G_m[q,s] − conj(H_m[p,r]) H_m[q,s]
            let mut fro = 0.0;
            for r in 0..n {
                for s in 0..n {
                    let mut d = linalg::czero();
                    for (g, h) in gs.iter().zip(&hs) {
                        d += g[(p, r)].conj() * g[(q, s)] - h[(p, r)].conj() * h[(q, s)];
                    }
                    fro += d.norm_sqr();
                }
            }
            worst = worst.max(fro.sqrt());
        }
    }
    Ok(worst)
}

/// Output of the Lo–Popescu transfer primitive.
#[derive(Debug, Clone)]
pub struct LoPopescuTransfer {
    /// Unitary in `A'` (stored as its J-conjugate in `A`, acting on the
    /// right).
    pub u: AlgElement,
    /// Partial isometry in `A`.
    pub w: AlgElement,
    /// `z = JbJ·v ∈ A`.
    pub z: AlgElement,
    /// The base partial isometry from the polar decomposition of ψ*.
    pub v: AlgElement,
}

impl LoPopescuTransfer {
    /// Apply the reconstruction `uwzψ` to a vector.
    pub fn reconstruct(&self, psi: &StdVector) -> Result<StdVector> {
        let wz = self.w.mul(&self.z)?;
        psi.act(Side::Left, &wz)?.act(Side::Right, &self.u)
    }
}

/// The transfer primitive: for a factor in standard form and a commutant
/// operator `b` (stored as its J-conjugate `c ∈ A`, acting as `ξ ↦ ξc`),
/// produce a commutant unitary `u`, a partial isometry `w ∈ A` and
/// `z = JbJ·v ∈ A` with `‖bψ‖ = ‖zψ‖` and `bψ = uwzψ` up to numerical
/// error. In finite dimension the spectra match exactly, so the paper's ε
/// is realised as 0.
pub fn lo_popescu_transfer(psi: &StdVector, b: &AlgElement) -> Result<LoPopescuTransfer> {
    let alg = psi.parent().clone();
    alg.check_parent_of(b.parent())?;
    if !alg.is_factor() {
        return Err(Error::NonFactor(
            "the transfer primitive needs a factor; conjugating unitaries act per block otherwise"
                .into(),
        ));
    }
    let (v, _) = psi.polar_vector();
    // JbJ, for b = π'(c), is left multiplication by c*
    let z = b.adjoint().mul(&v)?;
    let alpha = psi.act(Side::Left, &z)?;
    let beta = psi.act(Side::Right, b)?;

    // exact spectral conjugation between the right densities of α and β
    let ga = alpha.block(0).adjoint() * alpha.block(0);
    let gb = beta.block(0).adjoint() * beta.block(0);
    let (_, ea) = linalg::eigh_desc(&ga);
    let (_, eb) = linalg::eigh_desc(&gb);
    let g = &ea * eb.adjoint();
    let u = alg.element(vec![g])?;

    let eta = alpha.act(Side::Right, &u)?;
    // GNS matching: η and β have equal right densities, so rowspace(β) =
    // rowspace(η) and w = β·η⁺ solves wη = β; clamp to a contraction
    let w_raw = beta.block(0) * linalg::pinv(eta.block(0), 1e-13);
    let w = alg.element(vec![linalg::clip_contraction(&w_raw)])?;

    Ok(LoPopescuTransfer { u, w, z, v })
}

/// Pinching estimate data: given a state vector φ and positive functionals
/// `ω_k` on `B(L²)` with `Σ ω_k` in the unit ball, computes
/// `ε = ‖ω_φ − Σ ω_k‖₁`, `α_k = ⟨φφ*, ω_k⟩`, the left-hand side
/// `Σ ‖ω_k − α_k ω_φ‖₁` and the bound `2√ε + ε`.
#[derive(Debug, Clone)]
pub struct PinchReport {
    pub epsilon: f64,
    pub lhs: f64,
    pub bound: f64,
    pub alphas: Vec<f64>,
}

pub fn pinch_defect(phi: &StdVector, omegas: &[CMatrix]) -> Result<PinchReport> {
    let alg = phi.parent().clone();
    let n = alg.l2_dim();
    let mut total = CMatrix::zeros(n, n);
    for o in omegas {
        check_l2_shape(n, o)?;
        total += o;
    }
    let total_trace = total.trace().re;
    if total_trace > 1.0 + TOL_EQ {
        return Err(Error::OutOfRange(format!(
            "Σ ω_k has trace {total_trace} > 1"
        )));
    }
    let omega_phi = phi.functional_matrix();
    let epsilon = linalg::trace_norm_herm(&(&omega_phi - &total));
    let mut lhs = 0.0;
    let mut alphas = Vec::with_capacity(omegas.len());
    for o in omegas {
        // α_k = ⟨φφ*, ω_k⟩ = tr(ω_k φφ*)
        let alpha = (o * &omega_phi).trace().re;
        alphas.push(alpha);
        lhs += linalg::trace_norm_herm(&(o - omega_phi.clone() * cr(alpha)));
    }
    let bound = 2.0 * epsilon.sqrt() + epsilon;
    Ok(PinchReport {
        epsilon,
        lhs,
        bound,
        alphas,
    })
}
