//! First group cohomology of subgroups acting on integer lattices, computed
//! two independent ways: the Tate formula for cyclic groups and a
//! presentation-based cocycle solver for arbitrary subgroups. The results
//! assemble into the per-subgroup collection whose comparison decides stable
//! non-conjugacy.

use std::collections::BTreeMap;

use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::exact::intmat::IntMatrix;
use crate::group::{GroupTable, Presentation, SubgroupRecord};
use crate::picard::PicModule;

#[derive(Debug, Error)]
pub enum CohomologyError {
    #[error("generator matrix does not have order {0}")]
    WrongOrder(u32),
    #[error("cocycle lattice has unexpected free rank {0}")]
    InfiniteCohomology(usize),
    #[error("collections built over different subgroup inventories")]
    InventoryMismatch,
}

/// The elementary divisors (> 1, in chain order) of a first cohomology
/// group. An empty list is the trivial group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyResult {
    pub subgroup: String,
    pub invariants: Vec<u64>,
}

impl CohomologyResult {
    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty()
    }

    pub fn describe(&self) -> String {
        if self.invariants.is_empty() {
            return "0".into();
        }
        self.invariants
            .iter()
            .map(|d| format!("Z/{d}"))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Divisors of the quotient Z^r / (columns of `image` expressed in `kernel`),
/// where the kernel columns form a primitive basis of a sublattice
/// containing the image.
fn quotient_invariants(
    kernel: &IntMatrix,
    image: &IntMatrix,
) -> Result<Vec<u64>, CohomologyError> {
    let r = kernel.cols();
    if r == 0 {
        return Ok(Vec::new());
    }
    let coords = IntMatrix::solve_exact(kernel, image)
        .expect("image lies inside the cocycle lattice");
    let snf = coords.smith_normal_form(false, false);
    let divisors = snf.elementary_divisors();
    let free_rank = r - divisors.len();
    if free_rank > 0 {
        return Err(CohomologyError::InfiniteCohomology(free_rank));
    }
    Ok(divisors
        .into_iter()
        .filter(|d| !d.is_one())
        .map(|d| u64::try_from(&d).expect("small divisor"))
        .collect())
}

/// Tate cohomology of a cyclic group: ker(Norm) / im(A - 1) with
/// Norm = 1 + A + ... + A^(n-1).
pub fn h1_cyclic(
    generator: &IntMatrix,
    order: u32,
) -> Result<Vec<u64>, CohomologyError> {
    let n = generator.rows();
    let mut norm = IntMatrix::zero(n, n);
    let mut power = IntMatrix::identity(n);
    for _ in 0..order {
        norm = norm.add(&power);
        power = power.mul(generator);
    }
    if !power.is_identity() {
        return Err(CohomologyError::WrongOrder(order));
    }
    let kernel = norm.kernel_basis();
    let image = generator.sub(&IntMatrix::identity(n));
    // The image columns lie in ker(Norm) because Norm * (A - 1) = 0.
    quotient_invariants(&kernel, &image)
}

/// First cohomology for an arbitrary subgroup via its presentation.
///
/// A crossed homomorphism is determined by one lattice vector per generator;
/// each relator contributes the linear condition that its cocycle expansion
/// vanishes, with prefix actions as coefficients and the inverse-letter
/// correction phi(g^-1) = -A_g^-1 phi(g). Coboundaries are the image of
/// v -> ((A_g - 1)v)_g. The quotient is computed integrally.
pub fn h1_general(
    table: &GroupTable,
    record: &SubgroupRecord,
    presentation: &Presentation,
    module: &PicModule,
) -> Result<Vec<u64>, CohomologyError> {
    let rank = module.rank;
    let gens = &record.generators;
    let k = gens.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    debug_assert_eq!(presentation.generator_count, k);

    let act = |idx: u16| module.action[idx as usize].clone();
    let inv_act = |idx: u16| module.action[table.inverse(idx as usize)].clone();

    // Condition matrix: one block row of `rank` equations per relator, with
    // unknowns (phi(g_1); ...; phi(g_k)) stacked.
    let mut condition_rows: Vec<IntMatrix> = Vec::new();
    for relator in &presentation.relators {
        let mut blocks: Vec<IntMatrix> = vec![IntMatrix::zero(rank, rank); k];
        let mut prefix = IntMatrix::identity(rank);
        for &letter in relator {
            let slot = (letter.unsigned_abs() as usize) - 1;
            let g = gens[slot];
            if letter > 0 {
                // phi contribution: prefix * phi(g); then prefix *= A_g
                blocks[slot] = blocks[slot].add(&prefix);
                prefix = prefix.mul(&act(g));
            } else {
                // phi(g^-1) = -A_g^-1 phi(g); prefix *= A_g^-1
                let ainv = inv_act(g);
                let step = prefix.mul(&ainv);
                blocks[slot] = blocks[slot].sub(&step);
                prefix = step;
            }
        }
        let refs: Vec<&IntMatrix> = blocks.iter().collect();
        condition_rows.push(hstack(&refs));
    }
    let conditions = if condition_rows.is_empty() {
        IntMatrix::zero(0, rank * k)
    } else {
        let refs: Vec<&IntMatrix> = condition_rows.iter().collect();
        IntMatrix::stack(&refs)
    };

    let cocycles = conditions.kernel_basis();

    // Coboundaries: v -> ((A_g - 1) v) for each generator, stacked.
    let blocks: Vec<IntMatrix> = gens
        .iter()
        .map(|&g| act(g).sub(&IntMatrix::identity(rank)))
        .collect();
    let refs: Vec<&IntMatrix> = blocks.iter().collect();
    let coboundaries = IntMatrix::stack(&refs);

    quotient_invariants(&cocycles, &coboundaries)
}

fn hstack(blocks: &[&IntMatrix]) -> IntMatrix {
    let rows = blocks[0].rows();
    assert!(blocks.iter().all(|b| b.rows() == rows));
    let cols: usize = blocks.iter().map(|b| b.cols()).sum();
    let mut out = IntMatrix::zero(rows, cols);
    let mut offset = 0;
    for b in blocks {
        for i in 0..rows {
            for j in 0..b.cols() {
                out.set(i, offset + j, b.get(i, j).clone());
            }
        }
        offset += b.cols();
    }
    out
}

/// The collection of first cohomologies over every subgroup class of the
/// inventory, for one module.
#[derive(Clone, Debug, Serialize)]
pub struct WpCollection {
    pub module_name: String,
    pub entries: BTreeMap<String, CohomologyResult>,
}

/// Computes one cohomology result per subgroup class. Cyclic classes are
/// additionally cross-checked against the Tate formula; the two independent
/// algorithms must agree.
pub fn wp_collection(
    table: &GroupTable,
    inventory: &[SubgroupRecord],
    module: &PicModule,
    module_name: &str,
) -> Result<WpCollection, CohomologyError> {
    let mut entries = BTreeMap::new();
    for record in inventory {
        let presentation = table.presentation_of(record);
        let invariants = h1_general(table, record, &presentation, module)?;
        if record.generators.len() == 1 {
            let g = record.generators[0];
            let cyclic = h1_cyclic(
                &module.action[g as usize],
                table.order_of(g as usize),
            )?;
            assert_eq!(
                invariants, cyclic,
                "presentation solver and Tate formula disagree on {}",
                record.class_id
            );
        }
        entries.insert(
            record.class_id.clone(),
            CohomologyResult {
                subgroup: record.class_id.clone(),
                invariants,
            },
        );
    }
    Ok(WpCollection {
        module_name: module_name.to_string(),
        entries,
    })
}

/// The verdict of comparing two collections over the same inventory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Equal collections: the invariant does not separate the two actions.
    Indistinguishable,
    /// Some subgroup class separates them: the varieties are not stably
    /// birational as G-varieties, so the embeddings are not stably conjugate.
    NotStablyConjugate { witnesses: Vec<String> },
}

pub fn compare_collections(
    a: &WpCollection,
    b: &WpCollection,
) -> Result<Verdict, CohomologyError> {
    if a.entries.len() != b.entries.len()
        || a.entries.keys().zip(b.entries.keys()).any(|(x, y)| x != y)
    {
        return Err(CohomologyError::InventoryMismatch);
    }
    let witnesses: Vec<String> = a
        .entries
        .iter()
        .filter(|(id, res)| b.entries[*id].invariants != res.invariants)
        .map(|(id, _)| id.clone())
        .collect();
    if witnesses.is_empty() {
        Ok(Verdict::Indistinguishable)
    } else {
        Ok(Verdict::NotStablyConjugate { witnesses })
    }
}

/// Z as a lattice with the sign action of the cyclic group of order 2.
pub fn sign_module_rank_one() -> IntMatrix {
    IntMatrix::from_rows(&[vec![-1]])
}
