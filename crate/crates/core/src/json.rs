//! Shared JSON schemas: algebras as `{"blocks":[{"dim":2,"weight":0.5}]}`,
//! elements and vectors as per-block row-major arrays of `[re, im]` pairs,
//! protocols as direction plus `(a, b)` branch data, and the example
//! fixtures emitted by the CLI.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgElement, Algebra, StdVector};
use crate::channels::{OneWayProtocol, ProtocolBranch, ProtocolDirection};
use crate::error::{Error, Result};
use crate::examples::{car_fock, spin_chain_state, weyl_pair, FockSpace};
use crate::linalg::{CMatrix, CVector};

/// One `[re, im]` pair.
pub type Entry = [f64; 2];
/// Row-major entries of one block.
pub type BlockData = Vec<Entry>;
/// One matrix per block.
pub type BlocksData = Vec<BlockData>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockJson {
    pub dim: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub blocks: Vec<BlockJson>,
}

pub fn algebra_to_json(alg: &Algebra) -> AlgebraJson {
    AlgebraJson {
        blocks: alg
            .blocks()
            .iter()
            .map(|b| BlockJson {
                dim: b.dim,
                weight: b.weight,
            })
            .collect(),
    }
}

pub fn algebra_from_json(j: &AlgebraJson) -> Result<Algebra> {
    let spec: Vec<(usize, f64)> = j.blocks.iter().map(|b| (b.dim, b.weight)).collect();
    Algebra::new(&spec)
}

fn matrix_to_entries(m: &CMatrix) -> BlockData {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.push([z.re, z.im]);
        }
    }
    out
}

fn matrix_from_entries(dim: usize, data: &BlockData) -> Result<CMatrix> {
    if data.len() != dim * dim {
        return Err(Error::ShapeMismatch(format!(
            "expected {} entries for a {dim}×{dim} block, got {}",
            dim * dim,
            data.len()
        )));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let e = data[i * dim + j];
            m[(i, j)] = Complex::new(e[0], e[1]);
        }
    }
    Ok(m)
}

fn blocks_to_data(blocks: &[CMatrix]) -> BlocksData {
    blocks.iter().map(matrix_to_entries).collect()
}

fn blocks_from_data(alg: &Algebra, data: &BlocksData) -> Result<Vec<CMatrix>> {
    if data.len() != alg.num_blocks() {
        return Err(Error::BlockMismatch(format!(
            "expected {} blocks, got {}",
            alg.num_blocks(),
            data.len()
        )));
    }
    alg.blocks()
        .iter()
        .zip(data)
        .map(|(b, d)| matrix_from_entries(b.dim, d))
        .collect()
}

pub fn element_to_data(e: &AlgElement) -> BlocksData {
    blocks_to_data(e.data())
}

pub fn element_from_data(alg: &Algebra, data: &BlocksData) -> Result<AlgElement> {
    alg.element(blocks_from_data(alg, data)?)
}

pub fn vector_to_data(v: &StdVector) -> BlocksData {
    blocks_to_data(v.data())
}

pub fn vector_from_data(alg: &Algebra, data: &BlocksData) -> Result<StdVector> {
    alg.vector(blocks_from_data(alg, data)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchJson {
    /// Measurement Kraus operator.
    pub a: BlocksData,
    /// Kraus family of the correcting channel (stored side convention).
    pub b: Vec<BlocksData>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolJson {
    pub direction: String,
    pub branches: Vec<BranchJson>,
}

pub fn protocol_to_json(p: &OneWayProtocol) -> ProtocolJson {
    ProtocolJson {
        direction: match p.direction() {
            ProtocolDirection::Right => "right".into(),
            ProtocolDirection::Left => "left".into(),
        },
        branches: p
            .branches()
            .iter()
            .map(|b| BranchJson {
                a: element_to_data(&b.measure),
                b: b.correct.iter().map(element_to_data).collect(),
            })
            .collect(),
    }
}

pub fn protocol_from_json(alg: &Algebra, j: &ProtocolJson) -> Result<OneWayProtocol> {
    let direction = match j.direction.as_str() {
        "right" => ProtocolDirection::Right,
        "left" => ProtocolDirection::Left,
        other => {
            return Err(Error::ShapeMismatch(format!(
                "unknown protocol direction {other:?}"
            )))
        }
    };
    let mut branches = Vec::with_capacity(j.branches.len());
    for b in &j.branches {
        branches.push(ProtocolBranch {
            measure: element_from_data(alg, &b.a)?,
            correct: b
                .b
                .iter()
                .map(|c| element_from_data(alg, c))
                .collect::<Result<Vec<_>>>()?,
        });
    }
    OneWayProtocol::new(alg, direction, branches)
}

/// A plain (non-blockwise) complex matrix, used for Fock-space operators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub data: BlockData,
}

pub fn plain_matrix_to_json(m: &CMatrix) -> MatrixJson {
    MatrixJson {
        dim: m.nrows(),
        data: matrix_to_entries(m),
    }
}

pub fn plain_matrix_from_json(j: &MatrixJson) -> Result<CMatrix> {
    matrix_from_entries(j.dim, &j.data)
}

/// Fock-space payload of a CAR fixture: the self-adjoint field generators
/// and the vacuum, enough to rerun the trace-vector checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FockJson {
    pub modes: usize,
    pub dim: usize,
    pub field_generators: Vec<MatrixJson>,
    pub vacuum: BlockData,
}

/// A generated example: the standard-form pair consumable by every verb,
/// plus scenario-specific operators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureJson {
    pub kind: String,
    pub params: BTreeMap<String, u64>,
    pub algebra: AlgebraJson,
    pub vector: BlocksData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<BTreeMap<String, BlocksData>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock: Option<FockJson>,
}

pub fn fixture_spin_chain(pairs: usize) -> Result<FixtureJson> {
    let (alg, psi) = spin_chain_state(pairs)?;
    Ok(FixtureJson {
        kind: "spin-chain".into(),
        params: BTreeMap::from([("pairs".into(), pairs as u64)]),
        algebra: algebra_to_json(&alg),
        vector: vector_to_data(&psi),
        operators: None,
        fock: None,
    })
}

pub fn fixture_weyl(q: usize, p: usize) -> Result<FixtureJson> {
    let w = weyl_pair(q, p)?;
    let mut ops = BTreeMap::new();
    ops.insert("U".to_string(), element_to_data(&w.clock));
    ops.insert("V".to_string(), element_to_data(&w.shift));
    Ok(FixtureJson {
        kind: "weyl".into(),
        params: BTreeMap::from([("q".into(), q as u64), ("p".into(), p as u64)]),
        algebra: algebra_to_json(&w.algebra),
        vector: vector_to_data(&w.trace_vector),
        operators: Some(ops),
        fock: None,
    })
}

fn car_standard_form(fock: &FockSpace) -> Result<(Algebra, StdVector)> {
    if fock.modes() % 2 == 0 {
        fock.standard_form_factor()
    } else {
        // Clifford algebra of an odd mode count: M_k ⊕ M_k with equal
        // central weights under the (unique) tracial state
        let k = 1usize << ((fock.modes() - 1) / 2);
        let w = 1.0 / (2 * k) as f64;
        let alg = Algebra::new(&[(k, w), (k, w)])?;
        let tv = alg.trace_vector();
        Ok((alg, tv))
    }
}

pub fn fixture_car(modes: usize) -> Result<FixtureJson> {
    let fock = car_fock(modes)?;
    let (alg, tv) = car_standard_form(&fock)?;
    Ok(FixtureJson {
        kind: "car".into(),
        params: BTreeMap::from([("modes".into(), modes as u64)]),
        algebra: algebra_to_json(&alg),
        vector: vector_to_data(&tv),
        operators: None,
        fock: Some(FockJson {
            modes,
            dim: fock.dim(),
            field_generators: fock
                .field_generators()
                .iter()
                .map(plain_matrix_to_json)
                .collect(),
            vacuum: {
                let v = fock.vacuum();
                (0..v.len()).map(|i| [v[i].re, v[i].im]).collect()
            },
        }),
    })
}

/// Parsed and validated fixture: the standard-form pair, plus generator
/// matrices and the reference vector for trace-vector checks.
pub struct ValidatedFixture {
    pub kind: String,
    pub algebra: Algebra,
    pub vector: StdVector,
    /// Generators acting on the check space, with the vector's coordinates.
    pub check_generators: Vec<CMatrix>,
    pub check_vector: CVector,
}

pub fn validate_fixture(j: &FixtureJson) -> Result<ValidatedFixture> {
    let algebra = algebra_from_json(&j.algebra)?;
    let vector = vector_from_data(&algebra, &j.vector)?;
    vector.require_unit()?;
    let (check_generators, check_vector) = if let Some(fock) = &j.fock {
        let gens = fock
            .field_generators
            .iter()
            .map(plain_matrix_from_json)
            .collect::<Result<Vec<_>>>()?;
        if fock.vacuum.len() != fock.dim {
            return Err(Error::ShapeMismatch("vacuum length mismatch".into()));
        }
        let mut v = CVector::zeros(fock.dim);
        for (i, e) in fock.vacuum.iter().enumerate() {
            v[i] = Complex::new(e[0], e[1]);
        }
        (gens, v)
    } else if let Some(ops) = &j.operators {
        let gens = ops
            .values()
            .map(|d| Ok(algebra.left_mult_matrix(&element_from_data(&algebra, d)?)))
            .collect::<Result<Vec<_>>>()?;
        (gens, algebra.l2_coords(&vector))
    } else {
        // fall back to the full matrix-unit generating family
        let gens = algebra
            .matrix_units()
            .iter()
            .map(|u| algebra.left_mult_matrix(u))
            .collect();
        (gens, algebra.l2_coords(&vector))
    };
    Ok(ValidatedFixture {
        kind: j.kind.clone(),
        algebra,
        vector,
        check_generators,
        check_vector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::is_trace_vector;
    use crate::rand_gen::{random_element, random_unit_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn algebra_roundtrip() {
        let alg = Algebra::new(&[(2, 0.5), (3, 1.25)]).unwrap();
        let j = algebra_to_json(&alg);
        let s = serde_json::to_string(&j).unwrap();
        assert!(s.contains("\"dim\":2"));
        let back: AlgebraJson = serde_json::from_str(&s).unwrap();
        assert_eq!(algebra_from_json(&back).unwrap(), alg);
    }

    #[test]
    fn element_and_vector_roundtrip() {
        let alg = Algebra::new(&[(2, 0.5), (3, 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = random_element(&mut rng, &alg);
        let back = element_from_data(&alg, &element_to_data(&e)).unwrap();
        assert!(e.distance(&back) == 0.0);

        let v = random_unit_vector(&mut rng, &alg);
        let vb = vector_from_data(&alg, &vector_to_data(&v)).unwrap();
        assert!(v.distance(&vb).unwrap() == 0.0);

        // wrong shape rejected
        let bad = vec![vec![[0.0, 0.0]; 3]; 2];
        assert!(element_from_data(&alg, &bad).is_err());
    }

    #[test]
    fn protocol_roundtrip_preserves_action() {
        let alg = Algebra::factor(3, 1.0 / 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (psi, phi) = crate::rand_gen::random_majorising_pair(&mut rng, &alg, 2);
        let p = crate::convert::synthesize_protocol(&alg, &psi, &phi).unwrap();
        let j = protocol_to_json(&p);
        let s = serde_json::to_string(&j).unwrap();
        let back: ProtocolJson = serde_json::from_str(&s).unwrap();
        let p2 = protocol_from_json(&alg, &back).unwrap();
        let r = crate::convert::verify_protocol(&p2, &psi, &phi).unwrap();
        assert!(r <= 1e-8, "re-parsed protocol residual {r}");
    }

    #[test]
    fn fixtures_reparse_and_validate() {
        for fixture in [
            fixture_spin_chain(2).unwrap(),
            fixture_weyl(5, 2).unwrap(),
            fixture_car(3).unwrap(),
            fixture_car(4).unwrap(),
        ] {
            let s = serde_json::to_string(&fixture).unwrap();
            let back: FixtureJson = serde_json::from_str(&s).unwrap();
            let v = validate_fixture(&back).unwrap();
            let rep = is_trace_vector(&v.check_generators, &v.check_vector, 12).unwrap();
            assert!(rep.saturated, "{} fixture did not saturate", v.kind);
            assert!(
                rep.is_trace_vector,
                "{} fixture defect {}",
                v.kind, rep.defect
            );
        }
    }

    #[test]
    fn car_odd_mode_structure() {
        let f = fixture_car(3).unwrap();
        let alg = algebra_from_json(&f.algebra).unwrap();
        assert_eq!(alg.num_blocks(), 2);
        assert!((alg.tau_one() - 1.0).abs() < 1e-15);
    }
}
