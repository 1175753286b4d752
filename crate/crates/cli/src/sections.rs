//! Builders for the report sections: each one runs part of the pipeline and
//! turns the outcome into catalog claims with exact data attached.

use anyhow::{anyhow, Result};
use serde_json::{json, Value};

use klein_core::cohomology::{self, Verdict};
use klein_core::exact::cyclo::CycloNum;
use klein_core::fibration::{
    self, build_theorem_chain, check_equivariance_points, check_equivariance_symbolic,
    classify_fibre, roundtrip_certify, singular_points, validate_model,
    FibreClass, LinearFactor, ModelKind, RationalMap,
};
use klein_core::group::GroupTable;
use klein_core::invariants;
use klein_core::picard;

use crate::report::{entry, failed_entry, Entry, Section, Status};

pub struct Pipeline {
    pub table: GroupTable,
}

impl Pipeline {
    pub fn build() -> Result<Self> {
        let table = klein_core::group::klein_group().map_err(|e| anyhow!(e.to_string()))?;
        Ok(Pipeline { table })
    }

    pub fn group_section(&self) -> Section {
        let g = &self.table;
        let mut entries = Vec::new();
        entries.push(check(
            "group.order",
            json!(g.len()),
            g.len() == 168,
            json!(168),
        ));
        let orders: Vec<u32> = g
            .generator_indices()
            .iter()
            .map(|&i| g.order_of(i as usize))
            .collect();
        entries.push(check(
            "group.generators",
            json!({ "orders": orders }),
            orders == vec![3, 7, 2],
            json!([3, 7, 2]),
        ));
        entries.push(check(
            "group.canonical-lifts",
            json!("pairwise scalar-independence checked"),
            g.verify_canonical_lifts().is_ok(),
            json!("unique lifts"),
        ));
        let classes = g.conjugacy_classes();
        let mut sizes: Vec<usize> = classes.iter().map(|c| c.size).collect();
        sizes.sort_unstable();
        let mut orders: Vec<u32> = classes.iter().map(|c| c.element_order).collect();
        orders.sort_unstable();
        let ok = classes.len() == 6
            && sizes == vec![1, 21, 24, 24, 42, 56]
            && orders == vec![1, 2, 3, 4, 7, 7];
        entries.push(check(
            "group.conjugacy-classes",
            json!({
                "count": classes.len(),
                "sizes": sizes,
                "element_orders": orders,
            }),
            ok,
            json!({"count": 6}),
        ));
        let subs = g.subgroups_up_to_conjugacy();
        let sub_orders: Vec<usize> = subs.iter().map(|s| s.order).collect();
        entries.push(entry(
            "group.subgroup-inventory",
            Status::Computed,
            json!({
                "classes": subs.len(),
                "orders": sub_orders,
            }),
        ));
        Section {
            name: "group",
            entries,
        }
    }

    pub fn invariants_section(&self) -> Section {
        let g = &self.table;
        let ctx = invariants::plane_context();
        let f = invariants::klein_quartic(&ctx);
        let mut entries = Vec::new();

        let fixed = (0..g.len()).all(|i| invariants::act_on_poly(g, i, &f) == f);
        entries.push(check(
            "invariants.quartic-fixed",
            json!({ "elements_checked": g.len() }),
            fixed,
            json!("all fix f"),
        ));

        let expected = [1u64, 0, 0, 0, 1, 0, 1];
        let images = invariants::reynolds_monomial_images(g, 6);
        let molien: Vec<u64> = (0..=6).map(|d| invariants::molien_dimension(g, d)).collect();
        entries.push(check(
            "invariants.molien-dimensions",
            json!(molien),
            molien == expected,
            json!(expected.to_vec()),
        ));
        let ranks: Vec<u64> = images
            .iter()
            .map(|per_degree| invariants::poly_span_rank(per_degree) as u64)
            .collect();
        entries.push(check(
            "invariants.molien-cross-check",
            json!({ "reynolds_ranks": ranks }),
            ranks == molien,
            json!("two computations agree"),
        ));

        let h = invariants::hessian(&f);
        let h_fixed = (0..g.len()).all(|i| invariants::act_on_poly(g, i, &h) == h);
        entries.push(check(
            "invariants.hessian",
            json!({
                "degree": h.total_degree(),
                "fixed_by_all": h_fixed,
                "terms": h.num_terms(),
            }),
            h.total_degree() == Some(6) && h_fixed,
            json!({"degree": 6}),
        ));
        Section {
            name: "invariants",
            entries,
        }
    }

    pub fn bitangents_section(&self) -> Result<Section> {
        let g = &self.table;
        let ctx = invariants::plane_context();
        let f = invariants::klein_quartic(&ctx);
        let search = invariants::find_bitangents(g, &f).map_err(|e| anyhow!(e.to_string()))?;
        let mut entries = Vec::new();
        entries.push(check(
            "bitangents.count",
            json!({
                "count": search.certificates.len(),
                "complete": search.complete,
                "used_fallback": search.used_fallback,
            }),
            search.complete && search.certificates.len() == 28,
            json!(28),
        ));
        let all_verify = search.certificates.iter().all(|c| c.verify(&f));
        entries.push(check(
            "bitangents.certificates",
            json!(search.certificates),
            all_verify,
            json!("restriction = scalar * root^2, re-derived"),
        ));
        let orbit_sizes: Vec<usize> = search.orbits.iter().map(Vec::len).collect();
        entries.push(entry(
            "bitangents.orbit-partition",
            Status::Computed,
            json!(orbit_sizes),
        ));
        let lines: std::collections::BTreeSet<_> = search
            .certificates
            .iter()
            .map(|c| c.line.clone())
            .collect();
        let stable = lines.iter().all(|l| {
            (0..g.len()).all(|gi| lines.contains(&invariants::act_on_line(g, gi, l)))
        });
        entries.push(check(
            "bitangents.group-stable",
            json!({ "lines": lines.len() }),
            stable,
            json!("closed under the action"),
        ));
        Ok(Section {
            name: "bitangents",
            entries,
        })
    }

    pub fn picard_section(&self) -> Result<(Section, picard::DpTwoModule)> {
        let g = &self.table;
        let mut entries = Vec::new();

        let classes = picard::dp2_classes();
        entries.push(check(
            "picard.class-table",
            json!({ "classes": classes.len() }),
            classes.len() == 56,
            json!(56),
        ));
        let s8 = picard::verify_s8_compatibility(&classes);
        entries.push(check(
            "picard.s8-compatibility",
            json!("all 28 transpositions extend"),
            s8.is_ok(),
            json!("compatible"),
        ));

        // negative control: anchor-pair orientation swap must be rejected
        let mut sabotaged = picard::dp2_classes();
        let (i, j) = {
            let mut i = usize::MAX;
            let mut j = usize::MAX;
            for (k, c) in sabotaged.iter().enumerate() {
                if c.label == (1, 2) {
                    i = k;
                }
                if c.label == (2, 1) {
                    j = k;
                }
            }
            (i, j)
        };
        let vi = sabotaged[i].vector.clone();
        sabotaged[i].vector = sabotaged[j].vector.clone();
        sabotaged[j].vector = vi;
        let control_rejected = picard::verify_s8_compatibility(&sabotaged).is_err();
        entries.push(check(
            "picard.negative-control",
            json!({ "sabotage": "orientation of the anchor pair (1,2)" }),
            control_rejected,
            json!("rejected"),
        ));

        let dp = picard::build_g_action(g).map_err(|e| anyhow!(e.to_string()))?;
        let gram = &dp.module.gram;
        let k = &dp.module.canonical_class;
        let by_vec: std::collections::HashMap<_, usize> = dp
            .classes
            .iter()
            .enumerate()
            .map(|(idx, c)| (c.vector.clone(), idx))
            .collect();
        let mut action_ok = true;
        for a in &dp.module.action {
            if &a.transpose().mul(gram).mul(a) != gram || &a.mul_vec(k) != k {
                action_ok = false;
                break;
            }
            if dp
                .classes
                .iter()
                .any(|c| !by_vec.contains_key(&a.mul_vec(&c.vector)))
            {
                action_ok = false;
                break;
            }
        }
        // homomorphism over generator pairs
        for &a in g.generator_indices() {
            for &b in g.generator_indices() {
                let ab = g.product(a as usize, b as usize);
                if dp.module.action[a as usize].mul(&dp.module.action[b as usize])
                    != dp.module.action[ab]
                {
                    action_ok = false;
                }
            }
        }
        entries.push(check(
            "picard.action",
            json!({ "matrices": dp.module.action.len() }),
            action_ok,
            json!("isometries fixing K, homomorphic"),
        ));

        let gens: Vec<u16> = g.generator_indices().to_vec();
        let (full_rank, _) = picard::fixed_sublattice(&dp.module, &gens);
        entries.push(check(
            "picard.fixed-rank-full",
            json!(full_rank),
            full_rank == 1,
            json!(1),
        ));
        let inv = (0..g.len()).find(|&i| g.order_of(i) == 2).expect("involution");
        let (inv_rank, _) = picard::fixed_sublattice(&dp.module, &[inv as u16]);
        entries.push(check(
            "picard.fixed-rank-involution",
            json!(inv_rank),
            inv_rank == 4,
            json!(4),
        ));
        let traces_ok = (0..g.len())
            .filter(|&i| g.order_of(i) == 2)
            .all(|i| {
                (0..8)
                    .map(|d| dp.module.action[i].get(d, d).clone())
                    .sum::<num_bigint::BigInt>()
                    == num_bigint::BigInt::from(0)
            });
        entries.push(check(
            "picard.involution-traces",
            json!({ "involutions": 21 }),
            traces_ok,
            json!(0),
        ));
        Ok((
            Section {
                name: "picard",
                entries,
            },
            dp,
        ))
    }

    pub fn cohomology_section(&self, dp: &picard::DpTwoModule) -> Result<Section> {
        let g = &self.table;
        let inventory = g.subgroups_up_to_conjugacy();
        let trivial = picard::trivial_module(g.len());
        let wp_p2 = cohomology::wp_collection(g, &inventory, &trivial, "p2")
            .map_err(|e| anyhow!(e.to_string()))?;
        let wp_dp2 = cohomology::wp_collection(g, &inventory, &dp.module, "dp2")
            .map_err(|e| anyhow!(e.to_string()))?;
        let mut entries = Vec::new();

        let full = inventory
            .iter()
            .find(|r| r.order == g.len())
            .expect("full subgroup present");
        let p2_full = &wp_p2.entries[&full.class_id];
        entries.push(check(
            "cohomology.p2.full-group",
            json!(p2_full.describe()),
            p2_full.is_trivial(),
            json!("0"),
        ));

        let dp2_full = &wp_dp2.entries[&full.class_id];
        if dp2_full.is_trivial() {
            entries.push(entry(
                "cohomology.dp2.full-group",
                Status::Verified,
                json!(dp2_full.describe()),
            ));
        } else {
            // The expected vanishing is not reproduced: the workbench reports
            // the computed group as a failed claim with its witness data.
            entries.push(failed_entry(
                "cohomology.dp2.full-group",
                json!({
                    "computed": dp2_full.describe(),
                    "invariants": dp2_full.invariants,
                }),
                json!({
                    "detail": "expected 0, computed a nontrivial group; \
                               certified independently by the mod-2 invariants \
                               of the lattice (fixed rank 1, mod-2 fixed \
                               dimension 2)",
                }),
            ));
        }

        let p2_all_trivial = wp_p2.entries.values().all(|r| r.is_trivial());
        entries.push(check(
            "cohomology.p2.collection",
            json!(describe_collection(&wp_p2)),
            p2_all_trivial,
            json!("all trivial"),
        ));

        let c2 = inventory.iter().find(|r| r.order == 2).expect("order-2 class");
        let c2_entry = &wp_dp2.entries[&c2.class_id];
        entries.push(check(
            "cohomology.dp2.involution",
            json!(c2_entry.describe()),
            !c2_entry.is_trivial(),
            json!("nontrivial"),
        ));

        entries.push(entry(
            "cohomology.dp2.collection",
            Status::Computed,
            json!(describe_collection(&wp_dp2)),
        ));

        // wp_collection already asserts Tate agreement on every cyclic class;
        // surface it as a claim.
        entries.push(entry(
            "cohomology.oracle-agreement",
            Status::Verified,
            json!("presentation solver equals the Tate formula on every cyclic class"),
        ));

        let verdict = cohomology::compare_collections(&wp_p2, &wp_dp2)
            .map_err(|e| anyhow!(e.to_string()))?;
        match &verdict {
            Verdict::NotStablyConjugate { witnesses } => {
                let has_c2 = witnesses.contains(&c2.class_id);
                entries.push(check(
                    "cohomology.verdict",
                    json!({
                        "verdict": "not stably conjugate",
                        "witnesses": witnesses,
                    }),
                    has_c2,
                    json!("not stably conjugate, witnessed by the order-2 class"),
                ));
            }
            Verdict::Indistinguishable => {
                entries.push(failed_entry(
                    "cohomology.verdict",
                    json!("indistinguishable"),
                    json!("the collections were expected to differ"),
                ));
            }
        }
        Ok(Section {
            name: "cohomology",
            entries,
        })
    }

    pub fn fibration_section(
        &self,
        n: usize,
        alpha: Vec<LinearFactor>,
        beta: Vec<LinearFactor>,
        model: ModelKind,
    ) -> Result<Section> {
        let g = &self.table;
        let mut entries = Vec::new();
        let prime = validate_model(n, alpha.clone(), beta.clone(), ModelKind::Prime, g)
            .map_err(|e| anyhow!(e.to_string()))?;
        let toric = validate_model(n, alpha, beta, ModelKind::Toric, g)
            .map_err(|e| anyhow!(e.to_string()))?;
        entries.push(entry(
            "fibration.model",
            Status::Verified,
            json!({
                "n": n,
                "requested_kind": format!("{model:?}"),
                "prime_degree": prime.equation.multidegree(),
                "toric_degree": toric.equation.multidegree(),
            }),
        ));
        if n == 0 {
            entries.push(check(
                "fibration.product-degeneration",
                json!(prime.is_product_degeneration),
                prime.is_product_degeneration,
                json!(true),
            ));
        } else {
            entries.push(entry(
                "fibration.product-degeneration",
                Status::Skipped,
                json!({ "reason": "applies to n = 0 only" }),
            ));
        }
        let points = singular_points(&toric).map_err(|e| anyhow!(e.to_string()))?;
        entries.push(check(
            "fibration.singular-points",
            json!({
                "count": points.len(),
                "points": points,
            }),
            points.len() == 2 * n,
            json!(2 * n),
        ));

        // fibre classes over one alpha-root, one beta-root, and one generic
        // base point
        let mut fibre_data = Vec::new();
        let mut fibres_ok = true;
        for bp in points.iter() {
            let class = classify_fibre(&prime, &bp.u, &bp.v).map_err(|e| anyhow!(e.to_string()))?;
            let expected_cone = bp.origin == fibration::FactorOrigin::Alpha;
            let ok = match (&class, expected_cone) {
                (FibreClass::Cone { .. }, true) => true,
                (FibreClass::NonReducedPlane { .. }, false) => true,
                _ => false,
            };
            fibres_ok &= ok;
            fibre_data.push(json!({
                "base": [bp.u.to_string(), bp.v.to_string()],
                "origin": format!("{:?}", bp.origin),
                "class": fibre_name(&class),
            }));
        }
        // a generic point: scan small integers for one avoiding all roots
        let generic = (1..100i64)
            .map(|k| (CycloNum::from_int(k), CycloNum::one()))
            .find(|(u, v)| {
                points.iter().all(|bp| {
                    // (u : v) differs from (bp.u : bp.v)
                    u.clone() * bp.v.clone() != v.clone() * bp.u.clone()
                })
            });
        if let Some((u, v)) = generic {
            let class = classify_fibre(&prime, &u, &v).map_err(|e| anyhow!(e.to_string()))?;
            fibres_ok &= matches!(class, FibreClass::SmoothDp2);
            fibre_data.push(json!({
                "base": [u.to_string(), v.to_string()],
                "origin": "generic",
                "class": fibre_name(&class),
            }));
        }
        entries.push(check(
            "fibration.fibres",
            json!(fibre_data),
            fibres_ok,
            json!("cone over alpha-roots, non-reduced plane over beta-roots, smooth otherwise"),
        ));
        Ok(Section {
            name: "fibration",
            entries,
        })
    }

    pub fn chain_section(&self, samples: usize, seed: u64) -> Result<Section> {
        let g = &self.table;
        let chain = build_theorem_chain(g).map_err(|e| anyhow!(e.to_string()))?;
        let mut entries = Vec::new();
        entries.push(entry(
            "chain.maps",
            Status::Verified,
            json!({
                "maps": chain
                    .maps
                    .iter()
                    .map(|m| json!({
                        "name": m.name,
                        "source": m.source_name,
                        "target": m.target_name,
                        "twist": m.twist,
                    }))
                    .collect::<Vec<_>>(),
            }),
        ));

        // composite tuple against the independently stated form
        let t1 = &chain.model_toric.space;
        let plane = invariants::plane_context();
        let h = invariants::hessian(&invariants::klein_quartic(&plane));
        let images: Vec<klein_core::MultiPoly> = (0..3)
            .map(|i| klein_core::MultiPoly::var(&t1.ctx, t1.xyz[i]))
            .collect();
        let h_t1 = h.substitute(&t1.ctx, &images);
        let f_t1 = {
            let x = klein_core::MultiPoly::var(&t1.ctx, t1.xyz[0]);
            let y = klein_core::MultiPoly::var(&t1.ctx, t1.xyz[1]);
            let z = klein_core::MultiPoly::var(&t1.ctx, t1.xyz[2]);
            x.pow(3).mul(&y).add(&y.pow(3).mul(&z)).add(&z.pow(3).mul(&x))
        };
        let expected = vec![
            klein_core::MultiPoly::var_named(&t1.ctx, "x"),
            klein_core::MultiPoly::var_named(&t1.ctx, "y"),
            klein_core::MultiPoly::var_named(&t1.ctx, "z"),
            h_t1,
            klein_core::MultiPoly::var_named(&t1.ctx, "v")
                .mul(&klein_core::MultiPoly::var_named(&t1.ctx, "t"))
                .mul(&f_t1),
        ];
        let composite_ok = fibration::tuples_equivalent(
            &chain.composite.target,
            &chain.composite.components,
            &expected,
            None,
        )
        .map_err(|e| anyhow!(e.to_string()))?;
        entries.push(check(
            "chain.composite",
            json!({ "components": chain.composite.components.iter().map(|c| c.to_string()).collect::<Vec<_>>() }),
            composite_ok,
            json!("(x : y : z ; hessian : v t f)"),
        ));

        let mut equivariance = Vec::new();
        let mut equi_ok = true;
        for &gi in g.generator_indices() {
            let sym = check_equivariance_symbolic(
                &chain.composite,
                g,
                gi as usize,
                Some(&chain.model_toric),
            )
            .map_err(|e| anyhow!(e.to_string()))?;
            let pts = check_equivariance_points(
                &chain.composite,
                g,
                gi as usize,
                Some(&chain.model_toric),
                samples,
                seed,
            )
            .map_err(|e| anyhow!(e.to_string()))?;
            equi_ok &= sym.certified && pts.certified;
            equivariance.push(json!({
                "element": gi,
                "symbolic": sym.certified,
                "points": pts.certified,
            }));
        }
        entries.push(check(
            "chain.equivariance",
            json!(equivariance),
            equi_ok,
            json!("symbolic and point mode for every generator"),
        ));

        let rt = roundtrip_certify(
            &chain.composite,
            &chain.inverses,
            Some(&chain.model_toric),
            samples,
            seed,
        )
        .map_err(|e| anyhow!(e.to_string()))?;
        entries.push(check(
            "chain.roundtrip",
            json!({
                "samples": rt.samples,
                "seed": rt.seed,
                "resamples": rt.resamples,
            }),
            rt.certified,
            json!("exact return on every sample"),
        ));

        // negative control: b -> x^4 b is not equivariant
        let control = sabotage_outcome(g, samples, seed)?;
        entries.push(check(
            "chain.negative-control",
            control.clone(),
            control["failed_as_expected"] == json!(true),
            json!("counterexample found"),
        ));
        Ok(Section {
            name: "chain",
            entries,
        })
    }
}

fn sabotage_outcome(g: &GroupTable, samples: usize, seed: u64) -> Result<Value> {
    let b2 = fibration::space_bundle(2);
    let b6 = fibration::space_bundle(6);
    let x4 = klein_core::MultiPoly::var_named(&b2.ctx, "x").pow(4);
    let sabotaged = RationalMap::new(
        "sabotaged fibrewise map",
        b2.clone(),
        b6,
        vec![
            klein_core::MultiPoly::var_named(&b2.ctx, "x"),
            klein_core::MultiPoly::var_named(&b2.ctx, "y"),
            klein_core::MultiPoly::var_named(&b2.ctx, "z"),
            klein_core::MultiPoly::var_named(&b2.ctx, "a"),
            x4.mul(&klein_core::MultiPoly::var_named(&b2.ctx, "b")),
        ],
    )
    .map_err(|e| anyhow!(e.to_string()))?;
    let s_idx = g.generator_indices()[0] as usize;
    let sym = check_equivariance_symbolic(&sabotaged, g, s_idx, None)
        .map_err(|e| anyhow!(e.to_string()))?;
    let pts = check_equivariance_points(&sabotaged, g, s_idx, None, samples.min(10).max(1), seed)
        .map_err(|e| anyhow!(e.to_string()))?;
    let witness = pts
        .counterexample
        .as_ref()
        .and_then(|c| c.point.as_ref())
        .map(|p| p.iter().map(CycloNum::to_string).collect::<Vec<_>>());
    Ok(json!({
        "map": "b -> x^4 b on the rank-two bundle",
        "failed_as_expected": !sym.certified && !pts.certified,
        "witness_point": witness,
    }))
}

fn fibre_name(class: &FibreClass) -> &'static str {
    match class {
        FibreClass::NonReducedPlane { .. } => "nonreduced_plane",
        FibreClass::Cone { .. } => "cone",
        FibreClass::SmoothDp2 => "smooth_dp2",
    }
}

fn describe_collection(wp: &cohomology::WpCollection) -> Value {
    let rows: Vec<Value> = wp
        .entries
        .values()
        .map(|r| json!({ "class": r.subgroup, "h1": r.describe() }))
        .collect();
    json!(rows)
}

fn check(id: &'static str, data: Value, ok: bool, expected: Value) -> Entry {
    if ok {
        entry(id, Status::Verified, data)
    } else {
        failed_entry(id, data, json!({ "expected": expected }))
    }
}

/// Default factored base data when only a degree is given: 2n distinct
/// rational roots.
pub fn default_factors(n: usize) -> (Vec<LinearFactor>, Vec<LinearFactor>) {
    let alpha = (0..n)
        .map(|k| {
            LinearFactor::new(CycloNum::one(), CycloNum::from_int(-(k as i64))).unwrap()
        })
        .collect();
    let beta = (0..n)
        .map(|k| {
            LinearFactor::new(CycloNum::one(), CycloNum::from_int(-((n + k) as i64))).unwrap()
        })
        .collect();
    (alpha, beta)
}

/// Pretty form of a factor list for the config echo.
pub fn factors_to_string(factors: &[LinearFactor]) -> String {
    if factors.is_empty() {
        return "1".into();
    }
    factors
        .iter()
        .map(|f| {
            let u = &f.coeff_u;
            let v = &f.coeff_v;
            if v.is_zero() {
                format!("({})u", u)
            } else if u.is_zero() {
                format!("({})v", v)
            } else {
                format!("({})u + ({})v", u, v)
            }
        })
        .collect::<Vec<_>>()
        .join(" * ")
}

pub fn model_kind(name: &str) -> Result<ModelKind> {
    match name {
        "prime" => Ok(ModelKind::Prime),
        "toric" => Ok(ModelKind::Toric),
        other => Err(anyhow!("unknown model kind {other}; use prime or toric")),
    }
}
