//! Report data model: per-section claim entries with statuses, the fixed
//! claim catalog, JSON and markdown rendering, and the exit-code contract.

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Checked exactly against the expected value of the claim catalog.
    Verified,
    /// Computed and reported; the catalog carries no expected value.
    Computed,
    /// The expected value of the claim catalog is not reproduced.
    Failed,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub id: &'static str,
    pub status: Status,
    pub anchor: &'static str,
    pub data: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Section {
    pub name: &'static str,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub model: String,
    pub alpha: String,
    pub beta: String,
    pub format: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub config: RunConfig,
    pub sections: Vec<Section>,
}

/// The fixed claim catalog: every entry id must appear here. The anchor
/// states what the claim asserts and where its expected value comes from.
pub const CLAIM_CATALOG: &[(&str, &str)] = &[
    ("group.order", "closure of the three classical generators has 168 elements"),
    ("group.generators", "generator orders (3, 7, 2) and determinant-1 lifts"),
    ("group.canonical-lifts", "no two stored matrices differ by a scalar"),
    ("group.conjugacy-classes", "6 classes, sizes {1,21,56,42,24,24}, orders {1,2,3,4,7,7}"),
    ("group.subgroup-inventory", "subgroup classes closed under one-generator extension"),
    ("invariants.quartic-fixed", "x^3 y + y^3 z + z^3 x is fixed by all 168 elements"),
    ("invariants.molien-dimensions", "invariant dimensions [1,0,0,0,1,0,1] in degrees 0..6"),
    ("invariants.molien-cross-check", "Molien counts equal the ranks of averaged monomials"),
    ("invariants.hessian", "the Hessian is an invariant of degree 6"),
    ("bitangents.count", "a smooth plane quartic has 28 bitangents"),
    ("bitangents.certificates", "every line carries an exact square certificate"),
    ("bitangents.orbit-partition", "orbit sizes of the group action on the bitangents"),
    ("bitangents.group-stable", "the certified set is closed under all 168 substitutions"),
    ("picard.class-table", "56 exceptional classes labeled by ordered pairs"),
    ("picard.s8-compatibility", "every transposition of the 8 points extends to the lattice"),
    ("picard.action", "168 isometries fixing K and permuting the class set"),
    ("picard.fixed-rank-full", "the full group fixes a rank-1 sublattice spanned by K"),
    ("picard.fixed-rank-involution", "an involution fixes a rank-4 sublattice"),
    ("picard.involution-traces", "all 21 involutions have trace 0 on the lattice"),
    ("picard.negative-control", "a wrong class-table orientation is rejected"),
    ("cohomology.p2.full-group", "first cohomology of the full group on the rank-1 module is 0"),
    ("cohomology.dp2.full-group", "first cohomology of the full group on the rank-8 module is 0"),
    ("cohomology.p2.collection", "every subgroup entry over the rank-1 module is trivial"),
    ("cohomology.dp2.involution", "the order-2 class is nontrivial on the rank-8 module"),
    ("cohomology.dp2.collection", "per-class invariants over the rank-8 module"),
    ("cohomology.oracle-agreement", "presentation solver equals the Tate formula on cyclic classes"),
    ("cohomology.verdict", "the collections differ, so the two actions are not stably conjugate"),
    ("fibration.model", "factored base data accepted with disjoint zero sets"),
    ("fibration.product-degeneration", "the n = 0 model is the product with the line"),
    ("fibration.singular-points", "the contracted model meets the singular locus in 2n points"),
    ("fibration.fibres", "fibre classes over alpha-roots, beta-roots, and generic points"),
    ("chain.maps", "the five maps of the birational chain assemble"),
    ("chain.composite", "the composite collapses to (x : y : z ; hessian : v t f)"),
    ("chain.equivariance", "the composite commutes with every generator"),
    ("chain.roundtrip", "forward and stepwise inverse return every sample exactly"),
    ("chain.negative-control", "the sabotaged fibrewise map fails equivariance"),
];

pub fn anchor_for(id: &str) -> &'static str {
    CLAIM_CATALOG
        .iter()
        .find(|(cid, _)| *cid == id)
        .map(|(_, a)| *a)
        .unwrap_or_else(|| panic!("claim id {id} is not in the catalog"))
}

pub fn entry(id: &'static str, status: Status, data: Value) -> Entry {
    Entry {
        id,
        status,
        anchor: anchor_for(id),
        data,
        counterexample: None,
    }
}

pub fn failed_entry(id: &'static str, data: Value, counterexample: Value) -> Entry {
    Entry {
        id,
        status: Status::Failed,
        anchor: anchor_for(id),
        data,
        counterexample: Some(counterexample),
    }
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        let failed = self
            .sections
            .iter()
            .flat_map(|s| &s.entries)
            .any(|e| e.status == Status::Failed);
        i32::from(failed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {} report (v{})\n\n", self.tool, self.version));
        out.push_str(&format!(
            "command: `{}`  n={} samples={} seed={} model={}\n",
            self.config.command,
            self.config.n,
            self.config.samples,
            self.config.seed,
            self.config.model
        ));
        if !self.config.alpha.is_empty() {
            out.push_str(&format!(
                "base data: alpha = {}; beta = {}\n",
                self.config.alpha, self.config.beta
            ));
        }
        out.push('\n');
        for section in &self.sections {
            out.push_str(&format!("## {}\n\n", section.name));
            out.push_str("| claim | status | detail |\n|---|---|---|\n");
            for e in &section.entries {
                let status = match e.status {
                    Status::Verified => "verified",
                    Status::Computed => "computed",
                    Status::Failed => "FAILED",
                    Status::Skipped => "skipped",
                };
                let mut detail = compact(&e.data);
                if let Some(ce) = &e.counterexample {
                    detail.push_str(&format!(" — counterexample: {}", compact(ce)));
                }
                out.push_str(&format!("| {} | {} | {} |\n", e.id, status, detail));
            }
            out.push('\n');
        }
        out
    }
}

fn compact(v: &Value) -> String {
    let s = serde_json::to_string(v).unwrap_or_default();
    if s.len() > 160 {
        format!("{}…", &s[..s.floor_char_boundary(159)])
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_ids_are_unique() {
        let mut ids: Vec<&str> = CLAIM_CATALOG.iter().map(|(id, _)| *id).collect();
        let before = ids.len();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), before);
    }

    #[test]
    fn exit_codes_follow_failures() {
        let base = Report {
            tool: "klein",
            version: "0",
            schema: 1,
            config: RunConfig {
                command: "x".into(),
                n: 0,
                samples: 0,
                seed: 0,
                model: String::new(),
                alpha: String::new(),
                beta: String::new(),
                format: "json".into(),
            },
            sections: vec![Section {
                name: "group",
                entries: vec![entry("group.order", Status::Verified, serde_json::json!(168))],
            }],
        };
        assert_eq!(base.exit_code(), 0);
        let mut failing = base.clone();
        failing.sections[0]
            .entries
            .push(failed_entry("group.order", serde_json::json!(0), serde_json::json!("x")));
        assert_eq!(failing.exit_code(), 1);
    }
}
