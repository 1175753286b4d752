//! The Klein simple group of order 168 as a closed set of exact 3x3 matrices
//! over Q(zeta_7), together with its multiplication table, conjugacy classes,
//! subgroup inventory up to conjugacy, and Cayley-graph presentations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::exact::cyclo::CycloNum;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("generator {0} does not have determinant 1")]
    BadGenerator(usize),
    #[error("closure exceeded {0} elements: not the expected finite group")]
    NotFinite(usize),
    #[error("generator self-check failed: {0}")]
    SelfCheck(String),
}

/// Dense 3x3 matrix over Q(zeta_7).
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Mat3(pub [[CycloNum; 3]; 3]);

impl Mat3 {
    pub fn identity() -> Self {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                if i == j {
                    CycloNum::one()
                } else {
                    CycloNum::zero()
                }
            })
        }))
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> CycloNum) -> Self {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    pub fn mul(&self, other: &Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| {
            let mut acc = CycloNum::zero();
            for k in 0..3 {
                acc += self.0[i][k].clone() * other.0[k][j].clone();
            }
            acc
        })
    }

    pub fn neg(&self) -> Mat3 {
        Mat3::from_fn(|i, j| -self.0[i][j].clone())
    }

    pub fn det(&self) -> CycloNum {
        let m = &self.0;
        let mut d = CycloNum::zero();
        d += m[0][0].clone() * (m[1][1].clone() * m[2][2].clone() - m[1][2].clone() * m[2][1].clone());
        d -= m[0][1].clone() * (m[1][0].clone() * m[2][2].clone() - m[1][2].clone() * m[2][0].clone());
        d += m[0][2].clone() * (m[1][0].clone() * m[2][1].clone() - m[1][1].clone() * m[2][0].clone());
        d
    }

    pub fn trace(&self) -> CycloNum {
        self.0[0][0].clone() + self.0[1][1].clone() + self.0[2][2].clone()
    }

    /// Inverse by adjugate; panics on singular input.
    pub fn inverse(&self) -> Mat3 {
        let m = &self.0;
        let det = self.det();
        let inv_det = det.inv().expect("invertible matrix");
        let cof = |r: [usize; 2], c: [usize; 2]| {
            m[r[0]][c[0]].clone() * m[r[1]][c[1]].clone()
                - m[r[0]][c[1]].clone() * m[r[1]][c[0]].clone()
        };
        let adj = [
            [cof([1, 2], [1, 2]), -cof([0, 2], [1, 2]).clone(), cof([0, 1], [1, 2])],
            [-cof([1, 2], [0, 2]).clone(), cof([0, 2], [0, 2]), -cof([0, 1], [0, 2]).clone()],
            [cof([1, 2], [0, 1]), -cof([0, 2], [0, 1]).clone(), cof([0, 1], [0, 1])],
        ];
        Mat3::from_fn(|i, j| adj[i][j].clone() * inv_det.clone())
    }

    /// True when other = lambda * self for some scalar lambda.
    pub fn is_scalar_multiple_of(&self, other: &Mat3) -> bool {
        let mut lambda: Option<CycloNum> = None;
        for i in 0..3 {
            for j in 0..3 {
                let (a, b) = (&self.0[i][j], &other.0[i][j]);
                match (a.is_zero(), b.is_zero()) {
                    (true, true) => continue,
                    (true, false) | (false, true) => return false,
                    (false, false) => {
                        let ratio = b.div(a).expect("nonzero");
                        match &lambda {
                            None => lambda = Some(ratio),
                            Some(l) if *l == ratio => {}
                            Some(_) => return false,
                        }
                    }
                }
            }
        }
        lambda.is_some()
    }
}

impl fmt::Debug for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for row in &self.0 {
            writeln!(f, "  [{}, {}, {}]", row[0], row[1], row[2])?;
        }
        write!(f, "]")
    }
}

/// One group element: its canonical determinant-1 matrix and table index.
#[derive(Clone, Debug)]
pub struct GroupElement {
    pub matrix: Mat3,
    pub index: usize,
}

/// How an element was first reached in the closure: `gen_slot * parent`.
#[derive(Clone, Copy, Debug)]
pub struct Derivation {
    pub gen_slot: usize,
    pub parent: usize,
}

/// The closed group with its index-level multiplication table.
pub struct GroupTable {
    elements: Vec<Mat3>,
    product: Vec<u16>,
    inverse: Vec<u16>,
    generator_indices: Vec<u16>,
    derivations: Vec<Option<Derivation>>,
    orders: Vec<u32>,
}

pub const DEFAULT_CLOSURE_BOUND: usize = 1000;

impl GroupTable {
    /// Breadth-first closure of the generators under multiplication.
    ///
    /// Element 0 is the identity; discovery order (queue order, generators in
    /// their given order) fixes the indexing deterministically.
    pub fn build(generators: &[Mat3], bound: usize) -> Result<GroupTable, GroupError> {
        for (k, g) in generators.iter().enumerate() {
            if !g.det().is_one() {
                return Err(GroupError::BadGenerator(k));
            }
        }
        let mut elements = vec![Mat3::identity()];
        let mut derivations: Vec<Option<Derivation>> = vec![None];
        let mut index: HashMap<Mat3, usize> = HashMap::new();
        index.insert(elements[0].clone(), 0);

        let mut head = 0;
        while head < elements.len() {
            let current = elements[head].clone();
            for (slot, g) in generators.iter().enumerate() {
                let candidate = g.mul(&current);
                if !index.contains_key(&candidate) {
                    if elements.len() >= bound {
                        return Err(GroupError::NotFinite(bound));
                    }
                    index.insert(candidate.clone(), elements.len());
                    elements.push(candidate);
                    derivations.push(Some(Derivation {
                        gen_slot: slot,
                        parent: head,
                    }));
                }
            }
            head += 1;
        }

        let n = elements.len();
        let generator_indices: Vec<u16> = generators
            .iter()
            .map(|g| index[g] as u16)
            .collect();

        // Product table. Generator rows come from actual matrix products;
        // every other row follows from its derivation g = gen * parent, so
        // that row_g[j] = genrow[row_parent[j]].
        let mut genrows: Vec<Vec<u16>> = Vec::with_capacity(generators.len());
        for g in generators {
            let row: Vec<u16> = elements
                .iter()
                .map(|e| index[&g.mul(e)] as u16)
                .collect();
            genrows.push(row);
        }
        let mut product = vec![0u16; n * n];
        for j in 0..n {
            product[j] = j as u16; // identity row
        }
        for i in 1..n {
            let d = derivations[i].expect("non-identity elements have derivations");
            let (genrow, parent) = (&genrows[d.gen_slot], d.parent);
            for j in 0..n {
                product[i * n + j] = genrow[product[parent * n + j] as usize];
            }
        }

        let mut inverse = vec![0u16; n];
        for i in 0..n {
            let j = (0..n)
                .find(|&j| product[i * n + j] == 0)
                .expect("every element has an inverse");
            inverse[i] = j as u16;
        }

        let mut table = GroupTable {
            elements,
            product,
            inverse,
            generator_indices,
            derivations,
            orders: Vec::new(),
        };
        table.orders = (0..n).map(|i| table.compute_order(i)).collect();
        table.spot_check_table();
        Ok(table)
    }

    fn spot_check_table(&self) {
        let n = self.len();
        let step = (n / 7).max(1);
        for i in (0..n).step_by(step) {
            for j in (0..n).step_by(step + 1) {
                let direct = self.elements[i].mul(&self.elements[j]);
                let via_table = &self.elements[self.product(i, j)];
                assert_eq!(&direct, via_table, "product table mismatch at ({i},{j})");
            }
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn matrix(&self, i: usize) -> &Mat3 {
        &self.elements[i]
    }

    pub fn element(&self, i: usize) -> GroupElement {
        GroupElement {
            matrix: self.elements[i].clone(),
            index: i,
        }
    }

    pub fn product(&self, i: usize, j: usize) -> usize {
        self.product[i * self.len() + j] as usize
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.inverse[i] as usize
    }

    pub fn generator_indices(&self) -> &[u16] {
        &self.generator_indices
    }

    pub fn derivation(&self, i: usize) -> Option<Derivation> {
        self.derivations[i]
    }

    pub fn order_of(&self, i: usize) -> u32 {
        self.orders[i]
    }

    fn compute_order(&self, i: usize) -> u32 {
        let mut acc = i;
        let mut k = 1;
        while acc != 0 {
            acc = self.product(acc, i);
            k += 1;
        }
        k
    }

    pub fn conjugate(&self, g: usize, x: usize) -> usize {
        self.product(self.product(g, x), self.inverse(g))
    }

    /// No two stored matrices may be scalar multiples of each other; this is
    /// what makes structural matrix equality a valid element equality.
    pub fn verify_canonical_lifts(&self) -> Result<(), GroupError> {
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.elements[i].is_scalar_multiple_of(&self.elements[j]) {
                    return Err(GroupError::SelfCheck(format!(
                        "elements {i} and {j} differ by a scalar"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn conjugacy_classes(&self) -> Vec<ConjugacyClass> {
        let n = self.len();
        let mut assigned = vec![false; n];
        let mut classes = Vec::new();
        for x in 0..n {
            if assigned[x] {
                continue;
            }
            let mut members = BTreeSet::new();
            for g in 0..n {
                members.insert(self.conjugate(g, x) as u16);
            }
            for &m in &members {
                assigned[m as usize] = true;
            }
            classes.push(ConjugacyClass {
                representative: x,
                size: members.len(),
                element_order: self.order_of(x),
                trace: self.elements[x].trace(),
                members: members.into_iter().collect(),
            });
        }
        classes
    }

    /// The subgroup generated by `gens`, as sorted element indices.
    pub fn subgroup_closure(&self, gens: &[u16]) -> Vec<u16> {
        let mut set = BTreeSet::new();
        set.insert(0u16);
        let mut queue: Vec<u16> = vec![0];
        while let Some(x) = queue.pop() {
            for &g in gens {
                let y = self.product(x as usize, g as usize) as u16;
                if set.insert(y) {
                    queue.push(y);
                }
            }
        }
        set.into_iter().collect()
    }

    fn conjugate_set(&self, set: &[u16], g: usize) -> Vec<u16> {
        let mut out: Vec<u16> = set
            .iter()
            .map(|&x| self.conjugate(g, x as usize) as u16)
            .collect();
        out.sort_unstable();
        out
    }

    /// Lexicographically smallest conjugate of the element set; a canonical
    /// label for the conjugacy class of the subgroup.
    fn class_key(&self, set: &[u16]) -> Vec<u16> {
        let mut best = set.to_vec();
        for g in 1..self.len() {
            let c = self.conjugate_set(set, g);
            if c < best {
                best = c;
            }
        }
        best
    }

    /// Subgroups up to conjugacy, built bottom-up: all cyclic subgroups, then
    /// one-generator extensions until nothing new appears.
    pub fn subgroups_up_to_conjugacy(&self) -> Vec<SubgroupRecord> {
        let n = self.len();
        // class key -> (element set of the canonical representative, generators)
        let mut classes: HashMap<Vec<u16>, Vec<u16>> = HashMap::new();

        let trivial = vec![0u16];
        classes.insert(trivial.clone(), vec![]);

        let mut frontier: Vec<(Vec<u16>, Vec<u16>)> = Vec::new();
        for x in 1..n as u16 {
            let set = self.subgroup_closure(&[x]);
            let key = self.class_key(&set);
            if !classes.contains_key(&key) {
                classes.insert(key.clone(), vec![x]);
                frontier.push((set, vec![x]));
            }
        }

        while let Some((set, gens)) = frontier.pop() {
            if set.len() == n {
                continue;
            }
            let members: BTreeSet<u16> = set.iter().copied().collect();
            for x in 1..n as u16 {
                if members.contains(&x) {
                    continue;
                }
                let mut new_gens = gens.clone();
                new_gens.push(x);
                let new_set = self.subgroup_closure(&new_gens);
                let key = self.class_key(&new_set);
                if !classes.contains_key(&key) {
                    classes.insert(key.clone(), new_gens.clone());
                    frontier.push((new_set, new_gens));
                }
            }
        }

        let mut records: Vec<SubgroupRecord> = classes
            .into_iter()
            .map(|(key, gens)| {
                // Re-anchor the generators inside the canonical representative:
                // conjugating the whole record keeps everything consistent.
                let (set, gens) = if gens.is_empty() {
                    (vec![0u16], vec![])
                } else {
                    let set = self.subgroup_closure(&gens);
                    if set == key {
                        (set, gens)
                    } else {
                        let g = (0..self.len())
                            .find(|&g| self.conjugate_set(&set, g) == key)
                            .expect("key is a conjugate of the set");
                        let gens: Vec<u16> = gens
                            .iter()
                            .map(|&x| self.conjugate(g, x as usize) as u16)
                            .collect();
                        (key.clone(), gens)
                    }
                };
                SubgroupRecord {
                    order: set.len(),
                    element_indices: set,
                    generators: gens,
                    class_id: String::new(),
                }
            })
            .collect();
        records.sort_by(|a, b| {
            a.order
                .cmp(&b.order)
                .then_with(|| a.element_indices.cmp(&b.element_indices))
        });
        let mut counter: HashMap<usize, usize> = HashMap::new();
        for r in &mut records {
            let c = counter.entry(r.order).or_insert(0);
            r.class_id = format!("o{}c{}", r.order, c);
            *c += 1;
        }
        records
    }

    /// All subgroups conjugate to the record, as element sets.
    pub fn conjugates_of(&self, record: &SubgroupRecord) -> Vec<Vec<u16>> {
        let mut seen: BTreeSet<Vec<u16>> = BTreeSet::new();
        for g in 0..self.len() {
            seen.insert(self.conjugate_set(&record.element_indices, g));
        }
        seen.into_iter().collect()
    }

    /// Cayley-graph presentation on the record's generators: a spanning tree
    /// plus one relator per non-tree edge, lightly simplified.
    pub fn presentation_of(&self, record: &SubgroupRecord) -> Presentation {
        let gens = &record.generators;
        if gens.is_empty() {
            return Presentation {
                generator_count: 0,
                relators: vec![],
            };
        }
        let member_pos: HashMap<u16, usize> = record
            .element_indices
            .iter()
            .enumerate()
            .map(|(p, &e)| (e, p))
            .collect();
        let m = record.element_indices.len();
        let mut word: Vec<Option<Vec<i32>>> = vec![None; m];
        let id_pos = member_pos[&0];
        word[id_pos] = Some(vec![]);
        let mut queue = vec![0u16];
        let mut non_tree: Vec<(u16, usize)> = Vec::new();
        let mut qhead = 0;
        while qhead < queue.len() {
            let x = queue[qhead];
            qhead += 1;
            for (slot, &g) in gens.iter().enumerate() {
                let y = self.product(x as usize, g as usize) as u16;
                let ypos = member_pos[&y];
                if word[ypos].is_none() {
                    let mut w = word[member_pos[&x]].clone().unwrap();
                    w.push(slot as i32 + 1);
                    word[ypos] = Some(w);
                    queue.push(y);
                } else {
                    non_tree.push((x, slot));
                }
            }
        }

        let mut relators: BTreeSet<Vec<i32>> = BTreeSet::new();
        for (x, slot) in non_tree {
            let mut w = word[member_pos[&x]].clone().unwrap();
            w.push(slot as i32 + 1);
            let y = self.product(x as usize, gens[slot] as usize) as u16;
            let wy = word[member_pos[&y]].clone().unwrap();
            for &letter in wy.iter().rev() {
                w.push(-letter);
            }
            let w = reduce_word(&w);
            if !w.is_empty() {
                relators.insert(canonical_cyclic(&w));
            }
        }
        let p = Presentation {
            generator_count: gens.len(),
            relators: relators.into_iter().collect(),
        };
        debug_assert!(self.presentation_holds(record, &p));
        p
    }

    /// Checks that all relators evaluate to the identity and that the
    /// generators rebuild a subgroup of the recorded order.
    pub fn presentation_holds(&self, record: &SubgroupRecord, p: &Presentation) -> bool {
        if self.subgroup_closure(&record.generators).len() != record.order {
            return false;
        }
        p.relators
            .iter()
            .all(|w| self.evaluate_word(&record.generators, w) == 0)
    }

    /// Evaluates a signed word in the given generators to an element index.
    pub fn evaluate_word(&self, gens: &[u16], word: &[i32]) -> usize {
        let mut acc = 0usize;
        for &letter in word {
            let slot = (letter.unsigned_abs() as usize) - 1;
            let g = gens[slot] as usize;
            let g = if letter < 0 { self.inverse(g) } else { g };
            acc = self.product(acc, g);
        }
        acc
    }
}

/// Free reduction of a signed word.
fn reduce_word(w: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Cheapest canonical form: the lexicographically smallest cyclic rotation of
/// the word or of its inverse, after cyclic reduction.
fn canonical_cyclic(w: &[i32]) -> Vec<i32> {
    let mut w = w.to_vec();
    // cyclic reduction
    while w.len() >= 2 && w.first() == w.last().map(|&l| -l).as_ref() {
        w = w[1..w.len() - 1].to_vec();
    }
    if w.is_empty() {
        return w;
    }
    // Prefer positive letters, then lexicographic on absolute values.
    fn key(w: &[i32]) -> Vec<(i32, bool)> {
        w.iter().map(|&l| (l.abs(), l < 0)).collect()
    }
    let inv: Vec<i32> = w.iter().rev().map(|&l| -l).collect();
    let mut best = w.clone();
    for cand in [w, inv] {
        for r in 0..cand.len() {
            let rot: Vec<i32> = cand[r..].iter().chain(&cand[..r]).copied().collect();
            if key(&rot) < key(&best) {
                best = rot;
            }
        }
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugacyClass {
    pub representative: usize,
    pub size: usize,
    pub element_order: u32,
    pub trace: CycloNum,
    pub members: Vec<u16>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubgroupRecord {
    pub element_indices: Vec<u16>,
    pub generators: Vec<u16>,
    pub order: usize,
    pub class_id: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Presentation {
    pub generator_count: usize,
    pub relators: Vec<Vec<i32>>,
}

/// The classical generators of the 3-dimensional representation: the cyclic
/// coordinate shift, the diagonal of 7th roots of unity, and the symmetric
/// involution with entries (z^(a_i a_j) - z^(-a_i a_j)) / sqrt(-7) for
/// (a_1, a_2, a_3) = (1, 2, 4).
///
/// The involution's global sign is not pinned down by the construction; the
/// returned matrix is normalized to determinant 1, and `klein_group`
/// re-verifies every required property.
pub fn klein_generators() -> [Mat3; 3] {
    // Substitution convention: acting on a polynomial substitutes by the
    // inverse matrix, so the shift S is stored as the matrix whose inverse
    // maps (x, y, z) to (y, z, x).
    let zero = CycloNum::zero;
    let one = CycloNum::one;
    let s = Mat3([
        [zero(), zero(), one()],
        [one(), zero(), zero()],
        [zero(), one(), zero()],
    ]);
    let t = Mat3::from_fn(|i, j| {
        if i != j {
            CycloNum::zero()
        } else {
            CycloNum::zeta_pow([4, 2, 1][i])
        }
    });
    let sqrt_m7 = CycloNum::sqrt_minus_seven();
    let inv_s7 = sqrt_m7.inv().expect("sqrt(-7) is nonzero");
    let a = [1i64, 2, 4];
    let mut r = Mat3::from_fn(|i, j| {
        let e = a[i] * a[j];
        (CycloNum::zeta_pow(e) - CycloNum::zeta_pow(-e)) * inv_s7.clone()
    });
    if !r.det().is_one() {
        r = r.neg();
    }
    [s, t, r]
}

/// Builds the order-168 group from the classical generators, running the
/// mandatory self-checks: generator orders, determinant-1 lifts, canonical
/// lift uniqueness, and invariance of the quartic x^3 y + y^3 z + z^3 x.
pub fn klein_group() -> Result<GroupTable, GroupError> {
    let gens = klein_generators();
    let r = &gens[2];
    if !r.det().is_one() {
        return Err(GroupError::SelfCheck("involution has determinant != 1".into()));
    }
    if r.mul(r) != Mat3::identity() {
        return Err(GroupError::SelfCheck("involution does not square to 1".into()));
    }
    let table = GroupTable::build(&gens, DEFAULT_CLOSURE_BOUND)?;
    if table.len() != 168 {
        return Err(GroupError::SelfCheck(format!(
            "closure has {} elements, expected 168",
            table.len()
        )));
    }
    let gi = table.generator_indices();
    let expected_orders = [3u32, 7, 2];
    for (k, &g) in gi.iter().enumerate() {
        if table.order_of(g as usize) != expected_orders[k] {
            return Err(GroupError::SelfCheck(format!(
                "generator {k} has order {}, expected {}",
                table.order_of(g as usize),
                expected_orders[k]
            )));
        }
    }
    table.verify_canonical_lifts()?;

    // Invariance of the quartic under every generator.
    let ctx = crate::invariants::plane_context();
    let f = crate::invariants::klein_quartic(&ctx);
    for &g in gi {
        let image = crate::invariants::act_on_poly(&table, g as usize, &f);
        if image != f {
            return Err(GroupError::SelfCheck(format!(
                "generator at index {g} does not fix the quartic"
            )));
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group() -> GroupTable {
        klein_group().expect("group builds")
    }

    #[test]
    fn closure_of_single_generators() {
        let [s, t, _r] = klein_generators();
        let ts = GroupTable::build(&[s], 10).unwrap();
        assert_eq!(ts.len(), 3);
        let tt = GroupTable::build(&[t], 10).unwrap();
        assert_eq!(tt.len(), 7);
    }

    #[test]
    fn closure_bound_is_enforced() {
        let [s, t, r] = klein_generators();
        match GroupTable::build(&[s, t, r], 100) {
            Err(GroupError::NotFinite(100)) => {}
            Err(other) => panic!("expected NotFinite, got {other:?}"),
            Ok(_) => panic!("expected NotFinite, got a table"),
        }
    }

    #[test]
    fn full_group_has_order_168() {
        assert_eq!(group().len(), 168);
    }

    #[test]
    fn involution_generator_squares_to_identity() {
        let [_, _, r] = klein_generators();
        assert_eq!(r.mul(&r), Mat3::identity());
        assert!(r.det().is_one());
    }

    #[test]
    fn inverses_and_associativity() {
        let g = group();
        for i in 0..g.len() {
            assert_eq!(g.product(i, g.inverse(i)), 0);
        }
        // Seeded random triples through the index table.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            let (a, b, c) = (
                rng.gen_range(0..g.len()),
                rng.gen_range(0..g.len()),
                rng.gen_range(0..g.len()),
            );
            assert_eq!(g.product(g.product(a, b), c), g.product(a, g.product(b, c)));
        }
    }

    #[test]
    fn conjugacy_class_data() {
        let g = group();
        let classes = g.conjugacy_classes();
        assert_eq!(classes.len(), 6);
        let mut sizes: Vec<usize> = classes.iter().map(|c| c.size).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 21, 24, 24, 42, 56]);
        let mut by_order: Vec<(u32, usize)> =
            classes.iter().map(|c| (c.element_order, c.size)).collect();
        by_order.sort_unstable();
        assert_eq!(
            by_order,
            vec![(1, 1), (2, 21), (3, 56), (4, 42), (7, 24), (7, 24)]
        );
        let total: usize = classes.iter().map(|c| c.size).sum();
        assert_eq!(total, 168);

        // Oracle: recompute the partition by brute-force double loop.
        let mut brute: Vec<BTreeSet<u16>> = Vec::new();
        let mut seen = vec![false; g.len()];
        for x in 0..g.len() {
            if seen[x] {
                continue;
            }
            let mut class = BTreeSet::new();
            for h in 0..g.len() {
                class.insert(g.conjugate(h, x) as u16);
            }
            for &m in &class {
                seen[m as usize] = true;
            }
            brute.push(class);
        }
        assert_eq!(brute.len(), classes.len());
    }

    #[test]
    fn class_members_share_trace_and_order() {
        let g = group();
        for class in g.conjugacy_classes() {
            let rep_trace = g.matrix(class.representative).trace();
            for &m in &class.members {
                assert_eq!(g.matrix(m as usize).trace(), rep_trace);
                assert_eq!(g.order_of(m as usize), class.element_order);
            }
        }
    }

    #[test]
    fn subgroup_inventory() {
        let g = group();
        let subs = g.subgroups_up_to_conjugacy();
        let orders: BTreeSet<usize> = subs.iter().map(|s| s.order).collect();
        assert!(orders.contains(&1));
        assert!(orders.contains(&168));
        assert!(orders.contains(&21), "Frobenius subgroup of order 21");
        assert!(orders.contains(&2));
        for s in &subs {
            assert_eq!(168 % s.order, 0, "Lagrange");
            // closure check
            let members: BTreeSet<u16> = s.element_indices.iter().copied().collect();
            for &a in &s.element_indices {
                for &b in &s.element_indices {
                    assert!(members.contains(&(g.product(a as usize, b as usize) as u16)));
                }
            }
        }
        // The order-2 class has 21 conjugates.
        let c2 = subs.iter().find(|s| s.order == 2).unwrap();
        assert_eq!(g.conjugates_of(c2).len(), 21);
        // Every cyclic subgroup appears: orders of elements are 1,2,3,4,7.
        for o in [2usize, 3, 4, 7] {
            assert!(orders.contains(&o), "missing cyclic subgroup of order {o}");
        }
    }

    #[test]
    fn presentations_verify() {
        let g = group();
        let subs = g.subgroups_up_to_conjugacy();
        for s in &subs {
            let p = g.presentation_of(s);
            assert!(g.presentation_holds(s, &p), "class {}", s.class_id);
        }
        // Cyclic order 2: a single generator with relator a^2.
        let c2 = subs.iter().find(|s| s.order == 2).unwrap();
        let p2 = g.presentation_of(c2);
        assert_eq!(p2.generator_count, 1);
        assert_eq!(p2.relators, vec![vec![1, 1]]);
        // Cyclic order 7: relator a^7.
        let c7 = subs
            .iter()
            .find(|s| s.order == 7 && s.generators.len() == 1)
            .unwrap();
        let p7 = g.presentation_of(c7);
        assert_eq!(p7.relators, vec![vec![1; 7]]);
    }

    #[test]
    fn klein_four_subgroup_presentation() {
        let g = group();
        let subs = g.subgroups_up_to_conjugacy();
        let v4 = subs
            .iter()
            .find(|s| s.order == 4 && s.element_indices[1..].iter().all(|&x| g.order_of(x as usize) == 2));
        let v4 = v4.expect("Klein four-subgroup exists");
        let p = g.presentation_of(v4);
        // Relators force a^2, b^2 and commutation; re-verified by order.
        assert!(g.presentation_holds(v4, &p));
        assert_eq!(g.subgroup_closure(&v4.generators).len(), 4);
    }

    #[test]
    fn no_scalar_multiple_pairs() {
        group().verify_canonical_lifts().unwrap();
    }
}
