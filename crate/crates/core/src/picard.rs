//! The Picard lattice of the degree-2 del Pezzo surface as an explicit
//! integer module for the group, via the combinatorial model: the 56
//! exceptional classes are labeled by ordered pairs from an 8-element set,
//! and the group permutes the 8 points through its action on the projective
//! line over F_7.
//!
//! The two classes of an unordered pair sum to -K, so the 56 classes form a
//! double cover of the 28 pairs. A transposition (a b) of the 8 points acts
//! on labels with an orientation flip, (x, y) -> (tau y, tau x); the plain
//! rule does not extend to a lattice isometry. Arbitrary permutations act by
//! composing transposition matrices, which is well defined because the flip
//! maps differ from the even-part action exactly by the central class-swap
//! involution.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::ser::Serializer;
use serde::Serialize;
use thiserror::Error;

use crate::exact::intmat::IntMatrix;
use crate::group::GroupTable;

#[derive(Debug, Error)]
pub enum PicardError {
    #[error("label pair ({0}, {1}) is incompatible with the octad action")]
    IncompatiblePair(u8, u8),
    #[error("action matrix for element {0} fails {1}")]
    BadAction(usize, String),
    #[error("could not locate the group inside the Mobius permutations: {0}")]
    EmbeddingFailed(String),
}

fn serialize_bigints<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(BigInt::to_string))
}

/// One exceptional class: its ordered-pair label and its coordinates on the
/// basis h, e1, ..., e7.
#[derive(Clone, Debug, Serialize)]
pub struct ExcClass {
    pub label: (u8, u8),
    #[serde(serialize_with = "serialize_bigints")]
    pub vector: Vec<BigInt>,
}

/// An integer lattice with a distinguished canonical class and one action
/// matrix per group element.
#[derive(Clone, Serialize)]
pub struct PicModule {
    pub rank: usize,
    pub gram: IntMatrix,
    #[serde(serialize_with = "serialize_bigints")]
    pub canonical_class: Vec<BigInt>,
    pub action: Vec<IntMatrix>,
}

/// The degree-2 del Pezzo module together with its class data and the
/// underlying permutation embedding.
pub struct DpTwoModule {
    pub module: PicModule,
    pub classes: Vec<ExcClass>,
    /// Permutation of the 8 points per group element; indices 0..6 are the
    /// field elements of F_7 and index 7 is the point at infinity.
    pub point_perms: Vec<[u8; 8]>,
}

fn vec_i64(v: [i64; 8]) -> Vec<BigInt> {
    v.into_iter().map(BigInt::from).collect()
}

/// Gram matrix of h, e1..e7: diag(1, -1, ..., -1).
pub fn dp2_gram() -> IntMatrix {
    IntMatrix::from_fn(8, 8, |i, j| {
        if i != j {
            BigInt::zero()
        } else if i == 0 {
            BigInt::one()
        } else {
            -BigInt::one()
        }
    })
}

/// K = -3h + e1 + ... + e7.
pub fn dp2_canonical() -> Vec<BigInt> {
    vec_i64([-3, 1, 1, 1, 1, 1, 1, 1])
}

pub fn pairing(gram: &IntMatrix, a: &[BigInt], b: &[BigInt]) -> BigInt {
    let gb = gram.mul_vec(b);
    a.iter().zip(&gb).map(|(x, y)| x * y).sum()
}

/// The 56 exceptional classes with their ordered-pair labels:
///   (i, 8) -> e_i                  (8, i) -> 3h - 2e_i - sum of others
///   (i, j) -> h - e_i - e_j        (j, i) -> 2h - the five e's off i, j
/// for 1 <= i < j <= 7. Labels exhaust the ordered pairs of {1..8}.
pub fn dp2_classes() -> Vec<ExcClass> {
    let mut out = Vec::with_capacity(56);
    for a in 1..=8u8 {
        for b in 1..=8u8 {
            if a == b {
                continue;
            }
            let mut v = [0i64; 8];
            if b == 8 {
                v[a as usize] = 1;
            } else if a == 8 {
                v[0] = 3;
                for j in 1..=7 {
                    v[j] = if j == b as usize { -2 } else { -1 };
                }
            } else if a < b {
                v[0] = 1;
                v[a as usize] = -1;
                v[b as usize] = -1;
            } else {
                v[0] = 2;
                for j in 1..=7 {
                    if j != a as usize && j != b as usize {
                        v[j] = -1;
                    }
                }
            }
            out.push(ExcClass {
                label: (a, b),
                vector: vec_i64(v),
            });
        }
    }
    out
}

fn label_index(classes: &[ExcClass]) -> BTreeMap<(u8, u8), usize> {
    classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.label, i))
        .collect()
}

fn vector_index(classes: &[ExcClass]) -> HashMap<Vec<BigInt>, usize> {
    classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.vector.clone(), i))
        .collect()
}

/// Builds a lattice automorphism realizing the given permutation of the 8
/// points, with the reference image orientation fixed by `flip_ref`.
///
/// The image of a class with label (a, b) lies in the partner pair of
/// {perm a, perm b}; the two partners have intersection numbers p and 1 - p
/// with any fixed class, so the product with the chosen reference image
/// resolves the orientation uniquely. The candidate is accepted only if it
/// reproduces every resolved image, preserves the Gram matrix, and fixes K.
fn resolved_matrix(
    classes: &[ExcClass],
    perm: &[u8; 8],
    flip_ref: bool,
) -> Result<IntMatrix, PicardError> {
    let labels = label_index(classes);
    let gram = dp2_gram();
    let vec_of = |l: (u8, u8)| -> &Vec<BigInt> { &classes[labels[&l]].vector };
    let pl = |x: u8| point_label(perm, x);

    let ref_label = (1u8, 2u8);
    let ref_img_label = if flip_ref {
        (pl(2), pl(1))
    } else {
        (pl(1), pl(2))
    };
    let ref_vec = vec_of(ref_label).clone();
    let ref_img = vec_of(ref_img_label).clone();

    let resolve = |(a, b): (u8, u8)| -> Result<(u8, u8), PicardError> {
        let want = pairing(&gram, vec_of((a, b)), &ref_vec);
        let plain = (pl(a), pl(b));
        let flipped = (pl(b), pl(a));
        let p_plain = pairing(&gram, vec_of(plain), &ref_img);
        let p_flip = pairing(&gram, vec_of(flipped), &ref_img);
        if p_plain == want && p_flip != want {
            Ok(plain)
        } else if p_flip == want && p_plain != want {
            Ok(flipped)
        } else {
            Err(PicardError::IncompatiblePair(a, b))
        }
    };

    // Columns of M on the basis h, e1..e7, using e_i = v(i, 8) and the
    // anchor decomposition h = v(1,2) + v(1,8) + v(2,8).
    let mut m = IntMatrix::zero(8, 8);
    for i in 1..=7u8 {
        let img = vec_of(resolve((i, 8))?);
        for r in 0..8 {
            m.set(r, i as usize, img[r].clone());
        }
    }
    let parts = [
        vec_of(resolve((1, 2))?).clone(),
        vec_of(resolve((1, 8))?).clone(),
        vec_of(resolve((2, 8))?).clone(),
    ];
    for r in 0..8 {
        m.set(r, 0, parts.iter().map(|p| &p[r]).sum::<BigInt>());
    }

    for c in classes {
        let got = m.mul_vec(&c.vector);
        if &got != vec_of(resolve(c.label)?) {
            return Err(PicardError::IncompatiblePair(c.label.0, c.label.1));
        }
    }
    if m.transpose().mul(&gram).mul(&m) != gram {
        return Err(PicardError::IncompatiblePair(1, 2));
    }
    if m.mul_vec(&dp2_canonical()) != dp2_canonical() {
        return Err(PicardError::IncompatiblePair(1, 2));
    }
    Ok(m)
}

/// The verified candidates (at most two, differing by the class-swap
/// involution) realizing one point permutation.
fn octad_matrices(classes: &[ExcClass], perm: &[u8; 8]) -> Vec<IntMatrix> {
    [false, true]
        .into_iter()
        .filter_map(|flip| resolved_matrix(classes, perm, flip).ok())
        .collect()
}

/// Structural prechecks on the class table: ordered-pair labels, partner
/// classes summing to -K, self-intersection and degree, and the anchor
/// decomposition of the hyperplane class.
fn precheck_classes(classes: &[ExcClass]) -> Result<(), PicardError> {
    if classes.len() != 56 {
        return Err(PicardError::IncompatiblePair(0, 0));
    }
    let labels = label_index(classes);
    if labels.len() != 56 {
        return Err(PicardError::IncompatiblePair(0, 0));
    }
    let gram = dp2_gram();
    let k = dp2_canonical();
    for c in classes {
        let (a, b) = c.label;
        if pairing(&gram, &c.vector, &c.vector) != BigInt::from(-1)
            || pairing(&gram, &c.vector, &k) != BigInt::from(-1)
        {
            return Err(PicardError::IncompatiblePair(a, b));
        }
        let partner = &classes[labels[&(b, a)]].vector;
        for (i, (x, y)) in c.vector.iter().zip(partner).enumerate() {
            if x + y != -&k[i] {
                return Err(PicardError::IncompatiblePair(a, b));
            }
        }
    }
    // anchor: h = v(1,2) + v(1,8) + v(2,8)
    let h_sum: Vec<BigInt> = (0..8)
        .map(|r| {
            [&(1u8, 2u8), &(1, 8), &(2, 8)]
                .iter()
                .map(|l| &classes[labels[*l]].vector[r])
                .sum::<BigInt>()
        })
        .collect();
    let ok = h_sum[0].is_one() && h_sum[1..].iter().all(|x| x.is_zero());
    if !ok {
        return Err(PicardError::IncompatiblePair(1, 2));
    }
    Ok(())
}

/// Checks that every transposition of the 8 points extends to a lattice
/// automorphism compatible with the pair structure of the labels. A wrong
/// orientation in the class table fails here with the offending pair named.
pub fn verify_s8_compatibility(classes: &[ExcClass]) -> Result<(), PicardError> {
    precheck_classes(classes)?;
    for a in 1..=8u8 {
        for b in a + 1..=8u8 {
            let mut perm: [u8; 8] = std::array::from_fn(|i| i as u8);
            perm.swap((a - 1) as usize, (b - 1) as usize);
            if octad_matrices(classes, &perm).is_empty() {
                return Err(PicardError::IncompatiblePair(a, b));
            }
        }
    }
    Ok(())
}

/// Enumerates the Mobius group of P^1(F_7) as permutations of the 8 points
/// (0..6 and infinity = index 7): z -> (az + b)/(cz + d) with ad - bc = 1.
fn mobius_group() -> Vec<[u8; 8]> {
    let mut seen: Vec<[u8; 8]> = Vec::new();
    for a in 0..7i64 {
        for b in 0..7i64 {
            for c in 0..7i64 {
                for d in 0..7i64 {
                    if (a * d - b * c).rem_euclid(7) != 1 {
                        continue;
                    }
                    let mut p = [0u8; 8];
                    for z in 0..7i64 {
                        let num = (a * z + b).rem_euclid(7);
                        let den = (c * z + d).rem_euclid(7);
                        p[z as usize] = if den == 0 {
                            7
                        } else {
                            (num * mod_inverse(den)).rem_euclid(7) as u8
                        };
                    }
                    p[7] = if c == 0 {
                        7
                    } else {
                        ((a * mod_inverse(c)).rem_euclid(7)) as u8
                    };
                    if !seen.contains(&p) {
                        seen.push(p);
                    }
                }
            }
        }
    }
    seen.sort_unstable();
    seen
}

fn mod_inverse(x: i64) -> i64 {
    for y in 1..7 {
        if (x * y).rem_euclid(7) == 1 {
            return y;
        }
    }
    panic!("{x} has no inverse mod 7");
}

fn compose(p: &[u8; 8], q: &[u8; 8]) -> [u8; 8] {
    std::array::from_fn(|i| p[q[i] as usize])
}

fn perm_inverse(p: &[u8; 8]) -> [u8; 8] {
    let mut out = [0u8; 8];
    for i in 0..8 {
        out[p[i] as usize] = i as u8;
    }
    out
}

/// Realizes each group element as a Mobius permutation of P^1(F_7).
///
/// The order-7 generator goes to z -> z + 1; the order-3 generator to
/// z -> kz for the k determined by conjugation; the involution is found by
/// exhausting the 168 candidates against a full presentation. The images of
/// all other elements follow from the closure derivations.
pub fn mobius_permutations(table: &GroupTable) -> Result<Vec<[u8; 8]>, PicardError> {
    let gi = table.generator_indices();
    if gi.len() != 3 {
        return Err(PicardError::EmbeddingFailed(
            "expected the three classical generators".into(),
        ));
    }
    let (s, t, r) = (gi[0] as usize, gi[1] as usize, gi[2] as usize);
    if table.order_of(t) != 7 || table.order_of(s) != 3 || table.order_of(r) != 2 {
        return Err(PicardError::EmbeddingFailed(
            "generator orders are not (3, 7, 2)".into(),
        ));
    }

    // tau: z -> z + 1
    let tau: [u8; 8] = [1, 2, 3, 4, 5, 6, 0, 7];
    // S T S^-1 = T^a determines the multiplier of the order-3 generator.
    let sts = table.product(table.product(s, t), table.inverse(s));
    let mut a = None;
    let mut power = t;
    for k in 1..7usize {
        if power == sts {
            a = Some(k as i64);
            break;
        }
        power = table.product(power, t);
    }
    let Some(a) = a else {
        return Err(PicardError::EmbeddingFailed(
            "conjugate of the 7-element is not one of its powers".into(),
        ));
    };
    let sigma: [u8; 8] =
        std::array::from_fn(|i| if i == 7 { 7 } else { ((i as i64 * a) % 7) as u8 });

    // Relators of the full group on (S, T, R).
    let full = crate::group::SubgroupRecord {
        element_indices: (0..table.len() as u16).collect(),
        generators: gi.to_vec(),
        order: table.len(),
        class_id: "full".into(),
    };
    let pres = table.presentation_of(&full);

    let evaluate = |imgs: &[[u8; 8]; 3], word: &[i32]| -> [u8; 8] {
        let mut acc: [u8; 8] = std::array::from_fn(|i| i as u8);
        for &letter in word {
            let slot = (letter.unsigned_abs() as usize) - 1;
            let g = if letter < 0 {
                perm_inverse(&imgs[slot])
            } else {
                imgs[slot]
            };
            acc = compose(&acc, &g);
        }
        acc
    };

    let identity: [u8; 8] = std::array::from_fn(|i| i as u8);
    let candidates = mobius_group();
    let mut rho_found = None;
    for cand in &candidates {
        if compose(cand, cand) != identity || *cand == identity {
            continue;
        }
        let imgs = [sigma, tau, *cand];
        if pres
            .relators
            .iter()
            .all(|w| evaluate(&imgs, w) == identity)
        {
            if rho_found.is_some() {
                return Err(PicardError::EmbeddingFailed(
                    "involution image is not unique".into(),
                ));
            }
            rho_found = Some(*cand);
        }
    }
    let Some(rho) = rho_found else {
        return Err(PicardError::EmbeddingFailed(
            "no involution satisfies the relators".into(),
        ));
    };

    // Propagate along the closure derivations: element = gen * parent.
    let gen_perms = [sigma, tau, rho];
    let mut perms: Vec<[u8; 8]> = vec![identity; table.len()];
    for i in 1..table.len() {
        let d = table.derivation(i).expect("derivation exists");
        perms[i] = compose(&gen_perms[d.gen_slot], &perms[d.parent]);
    }
    // Faithfulness: distinct elements get distinct permutations.
    {
        let mut sorted: Vec<[u8; 8]> = perms.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != table.len() {
            return Err(PicardError::EmbeddingFailed(
                "permutation images are not distinct".into(),
            ));
        }
    }
    Ok(perms)
}

/// Builds the full degree-2 del Pezzo module: the lattice, the 56 labeled
/// classes, and one verified action matrix per group element.
pub fn build_g_action(table: &GroupTable) -> Result<DpTwoModule, PicardError> {
    let classes = dp2_classes();
    verify_s8_compatibility(&classes)?;
    let point_perms = mobius_permutations(table)?;
    let gram = dp2_gram();
    let k = dp2_canonical();
    let by_vector = vector_index(&classes);

    // Each generator permutation admits up to two candidate matrices, which
    // differ by the central class-swap involution. The group is simple, so
    // exactly one combination satisfies the group relations; it is found by
    // evaluating every relator of a full presentation.
    let gi = table.generator_indices();
    let gen_candidates: Vec<Vec<IntMatrix>> = gi
        .iter()
        .map(|&g| octad_matrices(&classes, &point_perms[g as usize]))
        .collect();
    if gen_candidates.iter().any(Vec::is_empty) {
        return Err(PicardError::EmbeddingFailed(
            "a generator permutation admits no lattice action".into(),
        ));
    }
    let full = crate::group::SubgroupRecord {
        element_indices: (0..table.len() as u16).collect(),
        generators: gi.to_vec(),
        order: table.len(),
        class_id: "full".into(),
    };
    let pres = table.presentation_of(&full);
    let isometry_inverse = |m: &IntMatrix| -> IntMatrix {
        // For an isometry of the Gram form g, the inverse is g m^T g with
        // g = g^-1 diagonal.
        let inv = gram.mul(&m.transpose()).mul(&gram);
        debug_assert!(m.mul(&inv).is_identity());
        inv
    };
    let eval_word = |imgs: &[&IntMatrix; 3], word: &[i32]| -> IntMatrix {
        let mut acc = IntMatrix::identity(8);
        for &letter in word {
            let slot = (letter.unsigned_abs() as usize) - 1;
            let m = if letter < 0 {
                isometry_inverse(imgs[slot])
            } else {
                imgs[slot].clone()
            };
            acc = acc.mul(&m);
        }
        acc
    };
    let mut chosen: Option<[IntMatrix; 3]> = None;
    for a in &gen_candidates[0] {
        for b in &gen_candidates[1] {
            for c in &gen_candidates[2] {
                let imgs = [a, b, c];
                if pres
                    .relators
                    .iter()
                    .all(|w| eval_word(&imgs, w).is_identity())
                {
                    if chosen.is_some() {
                        return Err(PicardError::EmbeddingFailed(
                            "relator-consistent action is not unique".into(),
                        ));
                    }
                    chosen = Some([a.clone(), b.clone(), c.clone()]);
                }
            }
        }
    }
    let Some(gen_matrices) = chosen else {
        return Err(PicardError::EmbeddingFailed(
            "no orientation choice satisfies the group relations".into(),
        ));
    };

    // Propagate along the closure derivations: element = gen * parent.
    let mut action: Vec<IntMatrix> = vec![IntMatrix::identity(8); table.len()];
    for i in 1..table.len() {
        let d = table.derivation(i).expect("derivation exists");
        action[i] = gen_matrices[d.gen_slot].mul(&action[d.parent]);
    }

    for (i, perm) in point_perms.iter().enumerate() {
        let m = &action[i];
        // Hard verification: isometry, K fixed, 56 classes permuted in a way
        // compatible with the point permutation on unordered labels.
        if m.transpose().mul(&gram).mul(&m) != gram {
            return Err(PicardError::BadAction(i, "Gram preservation".into()));
        }
        if m.mul_vec(&k) != k {
            return Err(PicardError::BadAction(i, "K invariance".into()));
        }
        for c in &classes {
            let img = m.mul_vec(&c.vector);
            let Some(&j) = by_vector.get(&img) else {
                return Err(PicardError::BadAction(i, format!(
                    "class {:?} leaves the class set",
                    c.label
                )));
            };
            let (a, b) = c.label;
            let (pa, pb) = (point_label(perm, a), point_label(perm, b));
            let got = classes[j].label;
            if got != (pa, pb) && got != (pb, pa) {
                return Err(PicardError::BadAction(
                    i,
                    format!("label {:?} maps off its pair orbit", c.label),
                ));
            }
        }
    }

    // Homomorphism spot checks on the generators.
    for &g in table.generator_indices() {
        for &h in table.generator_indices() {
            let gh = table.product(g as usize, h as usize);
            if action[g as usize].mul(&action[h as usize]) != action[gh] {
                return Err(PicardError::BadAction(gh, "homomorphism".into()));
            }
        }
    }

    Ok(DpTwoModule {
        module: PicModule {
            rank: 8,
            gram,
            canonical_class: k,
            action,
        },
        classes,
        point_perms,
    })
}

/// Applies the point permutation to a 1-based label.
fn point_label(perm: &[u8; 8], label: u8) -> u8 {
    perm[(label - 1) as usize] + 1
}

/// Pic(P^2) = Z with the trivial action: rank 1, Gram (1).
pub fn trivial_module(group_order: usize) -> PicModule {
    PicModule {
        rank: 1,
        gram: IntMatrix::identity(1),
        canonical_class: vec![BigInt::from(-3)],
        action: vec![IntMatrix::identity(1); group_order],
    }
}

/// Rank and primitive basis of the sublattice fixed by the subgroup
/// generated by the given elements: the kernel of the stacked (A_g - I).
pub fn fixed_sublattice(module: &PicModule, generators: &[u16]) -> (usize, IntMatrix) {
    if generators.is_empty() {
        return (module.rank, IntMatrix::identity(module.rank));
    }
    let blocks: Vec<IntMatrix> = generators
        .iter()
        .map(|&g| module.action[g as usize].sub(&IntMatrix::identity(module.rank)))
        .collect();
    let refs: Vec<&IntMatrix> = blocks.iter().collect();
    let stacked = IntMatrix::stack(&refs);
    let kernel = stacked.kernel_basis();
    (kernel.cols(), kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::klein_group;
    use std::sync::OnceLock;

    fn group() -> &'static GroupTable {
        static G: OnceLock<GroupTable> = OnceLock::new();
        G.get_or_init(|| klein_group().expect("group builds"))
    }

    fn dp2() -> &'static DpTwoModule {
        static M: OnceLock<DpTwoModule> = OnceLock::new();
        M.get_or_init(|| build_g_action(group()).expect("module builds"))
    }

    #[test]
    fn class_basics() {
        let classes = dp2_classes();
        assert_eq!(classes.len(), 56);
        let gram = dp2_gram();
        let k = dp2_canonical();
        assert_eq!(pairing(&gram, &k, &k), BigInt::from(2));

        let labels = label_index(&classes);
        // labels exhaust ordered pairs
        assert_eq!(labels.len(), 56);

        let v18 = &classes[labels[&(1, 8)]].vector;
        let v81 = &classes[labels[&(8, 1)]].vector;
        assert_eq!(pairing(&gram, v18, v18), BigInt::from(-1));
        assert_eq!(pairing(&gram, v18, v81), BigInt::from(2));

        for c in &classes {
            // self-intersection -1 and K-degree -1
            assert_eq!(pairing(&gram, &c.vector, &c.vector), BigInt::from(-1));
            assert_eq!(pairing(&gram, &c.vector, &k), BigInt::from(-1));
            // the two classes of a pair sum to -K
            let partner = &classes[labels[&(c.label.1, c.label.0)]].vector;
            let sum: Vec<BigInt> = c
                .vector
                .iter()
                .zip(partner)
                .map(|(x, y)| x + y)
                .collect();
            let minus_k: Vec<BigInt> = k.iter().map(|x| -x).collect();
            assert_eq!(sum, minus_k);
        }
    }

    #[test]
    fn intersection_multiset_by_incidence_pattern() {
        // The multiset of products for each label-incidence pattern, frozen
        // from the basis computation and re-checked here in full.
        use std::collections::BTreeMap as Map;
        let classes = dp2_classes();
        let gram = dp2_gram();
        let mut table: Map<&'static str, Map<BigInt, usize>> = Map::new();
        for x in &classes {
            for y in &classes {
                let (a, b) = x.label;
                let (c, d) = y.label;
                let pattern = if (a, b) == (c, d) {
                    "equal"
                } else if (a, b) == (d, c) {
                    "reversed"
                } else if a == c {
                    "share-first"
                } else if b == d {
                    "share-second"
                } else if a == d || b == c {
                    "crossed"
                } else {
                    "disjoint"
                };
                let p = pairing(&gram, &x.vector, &y.vector);
                *table.entry(pattern).or_default().entry(p).or_default() += 1;
            }
        }
        // Frozen from the expansion in the h, e basis.
        let expected: Map<&str, Vec<(i64, usize)>> = Map::from([
            ("equal", vec![(-1, 56)]),
            ("reversed", vec![(2, 56)]),
            ("share-first", vec![(0, 224), (1, 112)]),
            ("share-second", vec![(0, 224), (1, 112)]),
            ("crossed", vec![(0, 224), (1, 448)]),
            ("disjoint", vec![(0, 840), (1, 840)]),
        ]);
        for (pat, pairs) in &expected {
            let m = &table[pat];
            assert_eq!(m.len(), pairs.len(), "{pat}");
            for (value, count) in pairs {
                assert_eq!(m[&BigInt::from(*value)], *count, "{pat} at {value}");
            }
        }
    }

    #[test]
    fn s8_compatibility_and_sabotage() {
        let classes = dp2_classes();
        verify_s8_compatibility(&classes).expect("standard labeling is compatible");

        // Deliberately wrong orientation of the anchor pair: the hyperplane
        // decomposition breaks and the offending pair is named.
        let mut bad = dp2_classes();
        let labels = label_index(&bad);
        let i = labels[&(1, 2)];
        let j = labels[&(2, 1)];
        let vi = bad[i].vector.clone();
        bad[i].vector = bad[j].vector.clone();
        bad[j].vector = vi;
        match verify_s8_compatibility(&bad).unwrap_err() {
            PicardError::IncompatiblePair(1, 2) => {}
            other => panic!("unexpected error {other:?}"),
        }

        // Corrupting a vector across pairs violates the partner law.
        let mut bad = dp2_classes();
        let k = labels[&(3, 5)];
        let other = labels[&(3, 6)];
        bad[k].vector = bad[other].vector.clone();
        match verify_s8_compatibility(&bad).unwrap_err() {
            PicardError::IncompatiblePair(a, b) => {
                assert!([3u8, 5, 6].contains(&a) && [3u8, 5, 6].contains(&b));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn identity_permutation_resolves_to_identity_matrix() {
        let classes = dp2_classes();
        let id: [u8; 8] = std::array::from_fn(|i| i as u8);
        let candidates = octad_matrices(&classes, &id);
        assert!(candidates.iter().any(IntMatrix::is_identity));
    }

    #[test]
    fn mobius_embedding_properties() {
        let g = group();
        let perms = mobius_permutations(g).expect("embedding exists");
        assert_eq!(perms.len(), 168);
        // 2-transitive on the 8 points: the ordered-pair orbit is everything.
        let mut reached = std::collections::BTreeSet::new();
        for p in &perms {
            reached.insert((p[0], p[7]));
        }
        assert_eq!(reached.len(), 56);
        // homomorphism against the table on random pairs
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let a = rng.gen_range(0..g.len());
            let b = rng.gen_range(0..g.len());
            assert_eq!(compose(&perms[a], &perms[b]), perms[g.product(a, b)]);
        }
        // involutions act with no fixed points (cycle type 2^4)
        for i in 0..g.len() {
            if g.order_of(i) == 2 {
                assert!((0..8).all(|x| perms[i][x] != x as u8));
            }
        }
    }

    #[test]
    fn action_matrices_verify() {
        let g = group();
        let dp = dp2();
        assert_eq!(dp.module.action.len(), 168);
        let gram = &dp.module.gram;
        let k = &dp.module.canonical_class;
        let by_vec = vector_index(&dp.classes);
        for a in &dp.module.action {
            assert_eq!(&a.transpose().mul(gram).mul(a), gram);
            assert_eq!(&a.mul_vec(k), k);
            for c in &dp.classes {
                assert!(by_vec.contains_key(&a.mul_vec(&c.vector)));
            }
        }
        // identity has trace 8
        let tr = |m: &IntMatrix| -> BigInt { (0..8).map(|i| m.get(i, i).clone()).sum() };
        assert_eq!(tr(&dp.module.action[0]), BigInt::from(8));
        // homomorphism on seeded random pairs
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let a = rng.gen_range(0..g.len());
            let b = rng.gen_range(0..g.len());
            assert_eq!(
                dp.module.action[a].mul(&dp.module.action[b]),
                dp.module.action[g.product(a, b)]
            );
        }
    }

    #[test]
    fn involutions_have_trace_zero_on_the_lattice() {
        let g = group();
        let dp = dp2();
        let tr = |m: &IntMatrix| -> BigInt { (0..8).map(|i| m.get(i, i).clone()).sum() };
        let mut involutions = 0;
        for i in 0..g.len() {
            if g.order_of(i) == 2 {
                involutions += 1;
                assert_eq!(tr(&dp.module.action[i]), BigInt::zero());
            }
        }
        assert_eq!(involutions, 21);
    }

    #[test]
    fn fixed_sublattices() {
        let g = group();
        let dp = dp2();
        // trivial subgroup: everything
        let (rank, _) = fixed_sublattice(&dp.module, &[]);
        assert_eq!(rank, 8);
        // full group: rank 1, spanned rationally by K
        let gens: Vec<u16> = g.generator_indices().to_vec();
        let (rank, basis) = fixed_sublattice(&dp.module, &gens);
        assert_eq!(rank, 1);
        let v = basis.column(0);
        let k = dp2_canonical();
        // v is proportional to K over Q: cross-ratios vanish
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(&v[i] * &k[j], &v[j] * &k[i]);
            }
        }
        // an involution: rank 4, matching the trace identity (8 + 0) / 2
        let inv = (0..g.len()).find(|&i| g.order_of(i) == 2).unwrap();
        let (rank, _) = fixed_sublattice(&dp.module, &[inv as u16]);
        assert_eq!(rank, 4);
    }

    #[test]
    fn class_vectors_span_a_finite_index_sublattice_saturating_to_everything() {
        let dp = dp2();
        let cols: Vec<Vec<BigInt>> = dp.classes.iter().map(|c| c.vector.clone()).collect();
        let m = IntMatrix::from_columns(&cols, 8);
        let snf = m.smith_normal_form(false, false);
        let divs = snf.elementary_divisors();
        assert_eq!(divs.len(), 8, "full rank");
        // saturation equals the full lattice: all elementary divisors 1
        assert!(divs.iter().all(|d| d.is_one()), "unimodular saturation");
    }

    #[test]
    fn trivial_module_shape() {
        let g = group();
        let m = trivial_module(g.len());
        assert_eq!(m.rank, 1);
        assert!(m.action.iter().all(|a| a.is_identity()));
        let (rank, _) = fixed_sublattice(&m, &g.generator_indices().to_vec());
        assert_eq!(rank, 1);
        assert_eq!(m.gram, IntMatrix::identity(1));
    }
}
