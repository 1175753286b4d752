//! Multigraded toric ambient spaces, the del Pezzo fibration models over the
//! projective line, fibre classification, and certified equivariant rational
//! maps between the models, including the full birational chain from the
//! n = 1 model to the product of the plane with a line.

use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exact::cyclo::{CycloNum, Rational};
use crate::exact::poly::{MultiPoly, VarContext};
use crate::group::GroupTable;
use crate::invariants;

#[derive(Debug, Clone, Error)]
pub enum FibrationError {
    #[error("unknown space name {0}")]
    UnknownSpace(String),
    #[error("expected {expected} linear factors, got {got}")]
    FactorCount { expected: usize, got: usize },
    #[error("zero sets overlap at the root ({0} : {1})")]
    OverlappingZeroSets(String, String),
    #[error("a factor is identically zero")]
    ZeroFactor,
    #[error("defining polynomial is not fixed by generator {0}")]
    NotInvariant(usize),
    #[error("component for {0} is not homogeneous")]
    Inhomogeneous(String),
    #[error("no integer twist makes the component degrees consistent (at {0})")]
    TwistInconsistent(String),
    #[error("all components vanish identically on an irrelevant block")]
    MapUndefined,
    #[error("point lies in the irrelevant locus")]
    IrrelevantPoint,
    #[error("point does not satisfy the model equation")]
    OffModel,
    #[error("sampling exhausted {0} resample attempts")]
    SamplingExhausted(usize),
    #[error("points cannot be compared in their charts")]
    Incomparable,
    #[error("{0}")]
    Geometry(String),
}

// ---------------------------------------------------------------------------
// Toric ambient spaces

/// A multigraded Cox-coordinate ambient space: named variables with one
/// integer weight per grading, and an irrelevant decomposition (a point is
/// invalid when all variables of some subset vanish). The group acts by
/// matrix substitution on the x, y, z block and fixes every other variable.
#[derive(Clone, Serialize)]
pub struct ToricSpace {
    pub name: String,
    #[serde(skip)]
    pub ctx: Arc<VarContext>,
    pub irrelevant: Vec<Vec<usize>>,
    pub xyz: [usize; 3],
}

impl ToricSpace {
    pub fn gradings(&self) -> usize {
        self.ctx.gradings()
    }

    /// First variable of unit weight in the given grading, used as the
    /// chart reference for normalization.
    fn unit_vars(&self, grading: usize) -> Vec<usize> {
        (0..self.ctx.len())
            .filter(|&v| {
                let w = self.ctx.weight(v);
                w.iter().enumerate().all(|(j, &x)| x == i64::from(j == grading))
            })
            .collect()
    }
}

/// The ambient of the prime models: P^1 x P(1,1,1,2).
pub fn space_p1_x_p1112() -> ToricSpace {
    ToricSpace {
        name: "P1xP1112".into(),
        ctx: VarContext::new(&[
            ("u", &[1, 0]),
            ("v", &[1, 0]),
            ("x", &[0, 1]),
            ("y", &[0, 1]),
            ("z", &[0, 1]),
            ("t", &[0, 2]),
        ]),
        irrelevant: vec![vec![0, 1], vec![2, 3, 4, 5]],
        xyz: [2, 3, 4],
    }
}

/// The rank-two toric ambient of the contracted models: t carries weight
/// (-n, 2) and the irrelevant ideal is (u, v) meet (x, y, z, t).
pub fn space_t(n: i64) -> ToricSpace {
    ToricSpace {
        name: format!("T({n})"),
        ctx: VarContext::new(&[
            ("u", &[1, 0]),
            ("v", &[1, 0]),
            ("x", &[0, 1]),
            ("y", &[0, 1]),
            ("z", &[0, 1]),
            ("t", &[-n, 2]),
        ]),
        irrelevant: vec![vec![0, 1], vec![2, 3, 4, 5]],
        xyz: [2, 3, 4],
    }
}

/// Weighted projective space P(1,1,1,2).
pub fn space_p1112() -> ToricSpace {
    ToricSpace {
        name: "P1112".into(),
        ctx: VarContext::new(&[("x", &[1]), ("y", &[1]), ("z", &[1]), ("t", &[2])]),
        irrelevant: vec![vec![0, 1, 2, 3]],
        xyz: [0, 1, 2],
    }
}

/// The projectivized bundle over the plane with fibre coordinates a, b and
/// b of degree (n, 1).
pub fn space_bundle(n: i64) -> ToricSpace {
    ToricSpace {
        name: format!("P({n})"),
        ctx: VarContext::new(&[
            ("x", &[1, 0]),
            ("y", &[1, 0]),
            ("z", &[1, 0]),
            ("a", &[0, 1]),
            ("b", &[n, 1]),
        ]),
        irrelevant: vec![vec![0, 1, 2], vec![3, 4]],
        xyz: [0, 1, 2],
    }
}

/// The product of the plane and a line; same weight table as the trivial
/// bundle.
pub fn space_p2_x_p1() -> ToricSpace {
    ToricSpace {
        name: "P2xP1".into(),
        ..space_bundle(0)
    }
}

pub fn space_catalog(name: &str, n: i64) -> Result<ToricSpace, FibrationError> {
    match name {
        "P1xP1112" => Ok(space_p1_x_p1112()),
        "T" => Ok(space_t(n)),
        "P" => Ok(space_bundle(n)),
        "P1112" => Ok(space_p1112()),
        "P2xP1" => Ok(space_p2_x_p1()),
        other => Err(FibrationError::UnknownSpace(other.into())),
    }
}

/// Substitution images of every variable under a group element: the inverse
/// matrix mixes x, y, z and all other variables are fixed.
pub fn action_images(space: &ToricSpace, table: &GroupTable, g: usize) -> Vec<MultiPoly> {
    let inv = table.matrix(table.inverse(g));
    let ctx = &space.ctx;
    (0..ctx.len())
        .map(|v| {
            if let Some(row) = space.xyz.iter().position(|&xv| xv == v) {
                let mut p = MultiPoly::zero(ctx);
                for col in 0..3 {
                    p = p.add(&MultiPoly::var(ctx, space.xyz[col]).scale(&inv.0[row][col]));
                }
                p
            } else {
                MultiPoly::var(ctx, v)
            }
        })
        .collect()
}

pub fn act_on_space_poly(
    space: &ToricSpace,
    table: &GroupTable,
    g: usize,
    p: &MultiPoly,
) -> MultiPoly {
    p.substitute(&space.ctx, &action_images(space, table, g))
}

/// The group action as a rational self-map of the space.
pub fn action_map(space: &ToricSpace, table: &GroupTable, g: usize) -> RationalMap {
    RationalMap::new(
        format!("g{g} on {}", space.name),
        space.clone(),
        space.clone(),
        action_images(space, table, g),
    )
    .expect("group actions are degree-consistent")
}

// ---------------------------------------------------------------------------
// Points

#[derive(Clone, Debug, Serialize)]
pub struct Point {
    pub space: String,
    pub coords: Vec<CycloNum>,
}

/// Valid means: no irrelevant block vanishes entirely.
pub fn point_is_valid(space: &ToricSpace, coords: &[CycloNum]) -> bool {
    space
        .irrelevant
        .iter()
        .all(|block| block.iter().any(|&v| !coords[v].is_zero()))
}

/// Exact equality of points modulo the grading tori, by matching one scalar
/// per grading read off a unit-weight chart variable. Returns None when no
/// chart variable is available to normalize some grading.
pub fn points_equal(
    space: &ToricSpace,
    a: &[CycloNum],
    b: &[CycloNum],
) -> Option<bool> {
    let k = space.gradings();
    let mut lambda: Vec<CycloNum> = Vec::with_capacity(k);
    for j in 0..k {
        let units = space.unit_vars(j);
        // Zero patterns on chart variables must agree.
        for &v in &units {
            if a[v].is_zero() != b[v].is_zero() {
                return Some(false);
            }
        }
        let Some(&r) = units.iter().find(|&&v| !a[v].is_zero()) else {
            return None;
        };
        lambda.push(b[r].div(&a[r]).expect("reference nonzero"));
    }
    for v in 0..space.ctx.len() {
        let mut scaled = a[v].clone();
        for (j, l) in lambda.iter().enumerate() {
            let w = space.ctx.weight(v)[j];
            if w > 0 {
                scaled = scaled * l.pow(w as u32);
            } else if w < 0 {
                scaled = scaled * l.inv().expect("nonzero").pow((-w) as u32);
            }
        }
        if scaled != b[v] {
            return Some(false);
        }
    }
    Some(true)
}

// ---------------------------------------------------------------------------
// Fibration models

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    /// alpha t^2 + beta f inside P^1 x P(1,1,1,2).
    Prime,
    /// alpha beta t^2 + f inside the rank-two toric space.
    Toric,
}

/// A linear form c_u u + c_v v on the base line, kept in factored form.
#[derive(Clone, Debug, Serialize)]
pub struct LinearFactor {
    pub coeff_u: CycloNum,
    pub coeff_v: CycloNum,
}

impl LinearFactor {
    pub fn new(coeff_u: CycloNum, coeff_v: CycloNum) -> Result<Self, FibrationError> {
        if coeff_u.is_zero() && coeff_v.is_zero() {
            return Err(FibrationError::ZeroFactor);
        }
        Ok(LinearFactor { coeff_u, coeff_v })
    }

    /// The root (u : v) = (-coeff_v : coeff_u).
    pub fn root(&self) -> (CycloNum, CycloNum) {
        (-self.coeff_v.clone(), self.coeff_u.clone())
    }

    fn poly(&self, ctx: &Arc<VarContext>) -> MultiPoly {
        MultiPoly::var_named(ctx, "u")
            .scale(&self.coeff_u)
            .add(&MultiPoly::var_named(ctx, "v").scale(&self.coeff_v))
    }
}

#[derive(Clone, Serialize)]
pub struct FibrationModel {
    pub n: usize,
    pub kind: ModelKind,
    pub alpha_factors: Vec<LinearFactor>,
    pub beta_factors: Vec<LinearFactor>,
    #[serde(skip)]
    pub space: ToricSpace,
    pub equation: MultiPoly,
    /// n = 0 in the prime ambient is the product of the del Pezzo surface
    /// with the line.
    pub is_product_degeneration: bool,
}

fn product_of_factors(ctx: &Arc<VarContext>, factors: &[LinearFactor]) -> MultiPoly {
    factors
        .iter()
        .fold(MultiPoly::one(ctx), |acc, f| acc.mul(&f.poly(ctx)))
}

fn quartic_in(space: &ToricSpace) -> MultiPoly {
    let ctx = &space.ctx;
    let [x, y, z] = space.xyz;
    let (x, y, z) = (
        MultiPoly::var(ctx, x),
        MultiPoly::var(ctx, y),
        MultiPoly::var(ctx, z),
    );
    x.pow(3).mul(&y).add(&y.pow(3).mul(&z)).add(&z.pow(3).mul(&x))
}

/// Builds a model after checking the factor data: equal degrees, disjoint
/// zero sets (pairwise nonvanishing resultants), and exact invariance of the
/// defining polynomial under every group generator.
pub fn validate_model(
    n: usize,
    alpha: Vec<LinearFactor>,
    beta: Vec<LinearFactor>,
    kind: ModelKind,
    table: &GroupTable,
) -> Result<FibrationModel, FibrationError> {
    if alpha.len() != n {
        return Err(FibrationError::FactorCount {
            expected: n,
            got: alpha.len(),
        });
    }
    if beta.len() != n {
        return Err(FibrationError::FactorCount {
            expected: n,
            got: beta.len(),
        });
    }
    // Pairwise resultants of the factored forms: res(au+bv, cu+dv) = ad - bc.
    for fa in &alpha {
        for fb in &beta {
            let res = fa.coeff_u.clone() * fb.coeff_v.clone()
                - fa.coeff_v.clone() * fb.coeff_u.clone();
            if res.is_zero() {
                let (ru, rv) = fa.root();
                return Err(FibrationError::OverlappingZeroSets(
                    ru.to_string(),
                    rv.to_string(),
                ));
            }
        }
    }

    let space = match kind {
        ModelKind::Prime => space_p1_x_p1112(),
        ModelKind::Toric => space_t(n as i64),
    };
    let ctx = &space.ctx;
    let alpha_poly = product_of_factors(ctx, &alpha);
    let beta_poly = product_of_factors(ctx, &beta);
    let t = MultiPoly::var_named(ctx, "t");
    let f = quartic_in(&space);
    let equation = match kind {
        ModelKind::Prime => alpha_poly.mul(&t.pow(2)).add(&beta_poly.mul(&f)),
        ModelKind::Toric => alpha_poly.mul(&beta_poly).mul(&t.pow(2)).add(&f),
    };
    let expected_degree = match kind {
        ModelKind::Prime => vec![n as i64, 4],
        ModelKind::Toric => vec![0, 4],
    };
    assert_eq!(
        equation.multidegree(),
        Some(expected_degree),
        "model equation must be homogeneous of the stated degree"
    );
    for (slot, &g) in table.generator_indices().iter().enumerate() {
        if act_on_space_poly(&space, table, g as usize, &equation) != equation {
            return Err(FibrationError::NotInvariant(slot));
        }
    }
    Ok(FibrationModel {
        n,
        kind,
        alpha_factors: alpha,
        beta_factors: beta,
        space,
        equation,
        is_product_degeneration: n == 0 && kind == ModelKind::Prime,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FactorOrigin {
    Alpha,
    Beta,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasePoint {
    pub origin: FactorOrigin,
    pub factor_index: usize,
    pub u: CycloNum,
    pub v: CycloNum,
}

/// Base points where the toric model meets the singular locus of its
/// ambient: the roots of the factors of alpha beta, one entry per factor.
pub fn singular_points(model: &FibrationModel) -> Result<Vec<BasePoint>, FibrationError> {
    if model.kind != ModelKind::Toric {
        return Err(FibrationError::Geometry(
            "singular base points are read off the toric model".into(),
        ));
    }
    let mut out = Vec::with_capacity(2 * model.n);
    for (origin, factors) in [
        (FactorOrigin::Alpha, &model.alpha_factors),
        (FactorOrigin::Beta, &model.beta_factors),
    ] {
        for (i, fct) in factors.iter().enumerate() {
            let (u, v) = fct.root();
            out.push(BasePoint {
                origin,
                factor_index: i,
                u,
                v,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub enum FibreClass {
    /// The fibre over a root of beta: a non-reduced plane, carrying the
    /// quartic curve along which the model is a product of a node and a
    /// line.
    NonReducedPlane { curve: MultiPoly },
    /// The fibre over a root of alpha: the cone over the plane quartic with
    /// vertex at x = y = z = 0.
    Cone { vertex: Vec<CycloNum> },
    /// A smooth degree-2 del Pezzo fibre, certified through smoothness of
    /// the plane quartic.
    SmoothDp2,
}

/// Classifies the fibre of the prime model over a base point.
pub fn classify_fibre(
    model: &FibrationModel,
    u: &CycloNum,
    v: &CycloNum,
) -> Result<FibreClass, FibrationError> {
    if model.kind != ModelKind::Prime {
        return Err(FibrationError::Geometry(
            "fibres are classified on the prime model".into(),
        ));
    }
    if u.is_zero() && v.is_zero() {
        return Err(FibrationError::IrrelevantPoint);
    }
    let eval_factors = |factors: &[LinearFactor]| -> CycloNum {
        factors.iter().fold(CycloNum::one(), |acc, fct| {
            acc * (fct.coeff_u.clone() * u.clone() + fct.coeff_v.clone() * v.clone())
        })
    };
    let alpha_val = eval_factors(&model.alpha_factors);
    let beta_val = eval_factors(&model.beta_factors);
    if beta_val.is_zero() {
        let plane = invariants::plane_context();
        return Ok(FibreClass::NonReducedPlane {
            curve: invariants::klein_quartic(&plane),
        });
    }
    if alpha_val.is_zero() {
        return Ok(FibreClass::Cone {
            vertex: vec![
                CycloNum::zero(),
                CycloNum::zero(),
                CycloNum::zero(),
                CycloNum::one(),
            ],
        });
    }
    // Fibre c1 t^2 + c2 f with both scalars nonzero: its singular points
    // would force t = 0 and a singular point of the quartic, so smoothness
    // of the quartic certifies the fibre.
    if !klein_quartic_is_smooth() {
        return Err(FibrationError::Geometry(
            "quartic smoothness certificate failed".into(),
        ));
    }
    Ok(FibreClass::SmoothDp2)
}

/// Exact smoothness of the quartic by elimination: the iterated resultants
/// of the partials have a constant gcd, and the one point the projection
/// misses is checked directly.
pub fn klein_quartic_is_smooth() -> bool {
    let ctx = invariants::plane_context();
    let f = invariants::klein_quartic(&ctx);
    let fx = f.derivative(0);
    let fy = f.derivative(1);
    let fz = f.derivative(2);
    // The z-leading coefficients of fx is 1, so the resultants vanish
    // exactly at projections of common roots.
    let r1 = fx.resultant(&fy, 2);
    let r2 = fx.resultant(&fz, 2);
    let g = r1.gcd(&r2);
    if g.total_degree() != Some(0) {
        return false;
    }
    // (0 : 0 : 1) is the only point invisible to the (x, y) projection.
    let at = |p: &MultiPoly| {
        p.evaluate(&[CycloNum::zero(), CycloNum::zero(), CycloNum::one()])
    };
    !(at(&fx).is_zero() && at(&fy).is_zero() && at(&fz).is_zero())
}

// ---------------------------------------------------------------------------
// Rational maps

/// A rational map between toric spaces: one polynomial component per target
/// variable, all in the source coordinates, together with the twist that
/// makes the degrees consistent: the component for a target variable of
/// multi-degree d must be homogeneous of source degree sum_j d_j * twist_j.
#[derive(Clone, Serialize)]
pub struct RationalMap {
    pub name: String,
    #[serde(skip)]
    pub source: ToricSpace,
    #[serde(skip)]
    pub target: ToricSpace,
    pub source_name: String,
    pub target_name: String,
    pub components: Vec<MultiPoly>,
    pub twist: Vec<Vec<i64>>,
}

impl RationalMap {
    pub fn new(
        name: impl Into<String>,
        source: ToricSpace,
        target: ToricSpace,
        components: Vec<MultiPoly>,
    ) -> Result<Self, FibrationError> {
        assert_eq!(components.len(), target.ctx.len());
        let twist = solve_twist(&source, &target, &components)?;
        // No irrelevant block of the target may consist of identically zero
        // components.
        for block in &target.irrelevant {
            if block.iter().all(|&w| components[w].is_zero()) {
                return Err(FibrationError::MapUndefined);
            }
        }
        Ok(RationalMap {
            name: name.into(),
            source_name: source.name.clone(),
            target_name: target.name.clone(),
            source,
            target,
            components,
            twist,
        })
    }

    pub fn identity(space: &ToricSpace) -> Self {
        let comps = (0..space.ctx.len())
            .map(|v| MultiPoly::var(&space.ctx, v))
            .collect();
        RationalMap::new(format!("id {}", space.name), space.clone(), space.clone(), comps)
            .expect("identity is consistent")
    }

    /// Substitutes the components into a polynomial on the target.
    pub fn pullback(&self, p: &MultiPoly) -> MultiPoly {
        p.substitute(&self.source.ctx, &self.components)
    }

    /// Composition: self followed by `then`, with the common polynomial
    /// factors removed grading by grading.
    pub fn compose(&self, then: &RationalMap) -> Result<RationalMap, FibrationError> {
        assert_eq!(
            self.target.name, then.source.name,
            "composition requires matching spaces"
        );
        let raw: Vec<MultiPoly> = then
            .components
            .iter()
            .map(|c| c.substitute(&self.source.ctx, &self.components))
            .collect();
        if raw.iter().all(MultiPoly::is_zero) {
            return Err(FibrationError::MapUndefined);
        }
        let reduced = reduce_tuple(&then.target, &self.source, raw);
        RationalMap::new(
            format!("{} ; {}", self.name, then.name),
            self.source.clone(),
            then.target.clone(),
            reduced,
        )
    }

    /// Exact evaluation at a point of the source. Errors when the image
    /// lands in the irrelevant locus (a base point of the map).
    pub fn evaluate(&self, coords: &[CycloNum]) -> Result<Vec<CycloNum>, FibrationError> {
        let image: Vec<CycloNum> = self
            .components
            .iter()
            .map(|c| c.evaluate(coords))
            .collect();
        if point_is_valid(&self.target, &image) {
            Ok(image)
        } else {
            Err(FibrationError::IrrelevantPoint)
        }
    }
}

/// Solves for the twist: one source-degree vector per target grading.
fn solve_twist(
    source: &ToricSpace,
    target: &ToricSpace,
    components: &[MultiPoly],
) -> Result<Vec<Vec<i64>>, FibrationError> {
    let ks = source.ctx.gradings();
    let kt = target.ctx.gradings();
    // Gather the degree data of the nonzero components.
    let mut rows: Vec<(Vec<i64>, Vec<i64>)> = Vec::new(); // (target weights, source degree)
    for (w, comp) in components.iter().enumerate() {
        if comp.is_zero() {
            continue;
        }
        let Some(deg) = comp.multidegree() else {
            return Err(FibrationError::Inhomogeneous(
                target.ctx.name(w).to_string(),
            ));
        };
        rows.push((target.ctx.weight(w).to_vec(), deg));
    }
    // Solve rows * T = degs for the kt x ks integer matrix T by rational
    // elimination, then verify integrality and exactness.
    let mut twist = vec![vec![0i64; ks]; kt];
    for col in 0..ks {
        let a: Vec<Vec<Rational>> = rows
            .iter()
            .map(|(w, _)| w.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect())
            .collect();
        let b: Vec<Rational> = rows
            .iter()
            .map(|(_, d)| Rational::from_integer(BigInt::from(d[col])))
            .collect();
        let sol = solve_rational(a, b).ok_or_else(|| {
            FibrationError::TwistInconsistent(format!("grading {col}"))
        })?;
        for (j, val) in sol.into_iter().enumerate() {
            if !val.is_integer() {
                return Err(FibrationError::TwistInconsistent(format!(
                    "grading {col} needs a fractional twist"
                )));
            }
            twist[j][col] = i64::try_from(val.to_integer()).map_err(|_| {
                FibrationError::TwistInconsistent("twist overflow".into())
            })?;
        }
    }
    // Verify every component, including those whose equation was redundant.
    for (w, comp) in components.iter().enumerate() {
        if comp.is_zero() {
            continue;
        }
        let deg = comp.multidegree().expect("checked above");
        let weights = target.ctx.weight(w);
        for c in 0..ks {
            let want: i64 = weights
                .iter()
                .zip(&twist)
                .map(|(&tw, trow)| tw * trow[c])
                .sum();
            if want != deg[c] {
                return Err(FibrationError::TwistInconsistent(
                    target.ctx.name(w).to_string(),
                ));
            }
        }
    }
    Ok(twist)
}

/// Least-squares-free exact solve of an overdetermined consistent system;
/// returns None when inconsistent or underdetermined columns remain free
/// (they are set to zero, which the verification pass then vets).
fn solve_rational(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    use num_traits::Zero;
    let rows = a.len();
    if rows == 0 {
        return None;
    }
    let cols = a[0].len();
    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        b.swap(rank, p);
        let inv = a[rank][col].clone().recip();
        for c in 0..cols {
            a[rank][c] = a[rank][c].clone() * inv.clone();
        }
        b[rank] = b[rank].clone() * inv;
        for r in 0..rows {
            if r != rank && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..cols {
                    let sub = a[rank][c].clone() * f.clone();
                    a[r][c] = a[r][c].clone() - sub;
                }
                let sub = b[rank].clone() * f;
                b[r] = b[r].clone() - sub;
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }
    for r in rank..rows {
        if !b[r].is_zero() {
            return None;
        }
    }
    let mut sol = vec![Rational::zero(); cols];
    for (r, &c) in pivot_cols.iter().enumerate() {
        sol[c] = b[r].clone();
    }
    Some(sol)
}

/// Removes common polynomial factors from a component tuple, one scalar per
/// target grading: dividing the components of a variable w by c^(weight of
/// w) is the toric tuple equivalence, so the candidate scalar is the gcd
/// over the unit-weight components and is applied only when every weighted
/// divisibility holds.
fn reduce_tuple(
    target: &ToricSpace,
    source: &ToricSpace,
    mut comps: Vec<MultiPoly>,
) -> Vec<MultiPoly> {
    // Polynomial gcds of very large tuples can swell badly in the
    // pseudo-remainder sequences; past this size only monomial content is
    // taken out, which never affects the certificates.
    const GCD_TERM_BUDGET: usize = 800;
    let total_terms: usize = comps.iter().map(MultiPoly::num_terms).sum();
    let full_gcd = total_terms <= GCD_TERM_BUDGET;
    let mut rounds = 0;
    loop {
        rounds += 1;
        if rounds > 64 {
            break;
        }
        let mut progressed = false;
        for j in 0..target.gradings() {
            let units = target.unit_vars(j);
            let mut g = MultiPoly::zero(&source.ctx);
            for &w in &units {
                if !comps[w].is_zero() {
                    g = if full_gcd {
                        g.gcd(&comps[w])
                    } else {
                        let (content, _) = comps[w].extract_monomial_content();
                        let mono = MultiPoly::monomial(
                            &source.ctx,
                            content,
                            crate::exact::cyclo::CycloNum::one(),
                        );
                        if g.is_zero() {
                            mono
                        } else {
                            g.gcd(&mono)
                        }
                    };
                }
            }
            if g.is_zero() || g.is_constant() {
                continue;
            }
            // weighted divisibility check for all variables
            let mut divisible = true;
            let mut new_comps = comps.clone();
            for (w, comp) in comps.iter().enumerate() {
                let weight = target.ctx.weight(w)[j];
                if comp.is_zero() {
                    continue;
                }
                if weight > 0 {
                    match comp.exact_div(&g.pow(weight as u32)) {
                        Ok(q) => new_comps[w] = q,
                        Err(_) => {
                            divisible = false;
                            break;
                        }
                    }
                } else if weight < 0 {
                    new_comps[w] = comp.mul(&g.pow((-weight) as u32));
                }
            }
            if divisible {
                comps = new_comps;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    comps
}

/// Symbolic toric equality of two component tuples on the same target:
/// componentwise equality after matching one polynomial scalar per grading,
/// with cross-multiplied comparisons reduced modulo the model equation when
/// one is supplied.
pub fn tuples_equivalent(
    target: &ToricSpace,
    a: &[MultiPoly],
    b: &[MultiPoly],
    modulus: Option<&MultiPoly>,
) -> Result<bool, FibrationError> {
    let k = target.gradings();
    let vanishes = |p: &MultiPoly| -> bool {
        if p.is_zero() {
            return true;
        }
        match modulus {
            Some(m) => m.divides(p),
            None => false,
        }
    };
    // scalar fractions per grading from unit-weight reference variables
    let mut num: Vec<MultiPoly> = Vec::with_capacity(k);
    let mut den: Vec<MultiPoly> = Vec::with_capacity(k);
    for j in 0..k {
        let units = target.unit_vars(j);
        let Some(&r) = units
            .iter()
            .find(|&&v| !vanishes(&a[v]) && !vanishes(&b[v]))
        else {
            return Err(FibrationError::Incomparable);
        };
        num.push(b[r].clone());
        den.push(a[r].clone());
    }
    for w in 0..target.ctx.len() {
        // b_w * prod den_j^{w_j} == a_w * prod num_j^{w_j}, with negative
        // weights moved to the other side.
        let mut lhs = b[w].clone();
        let mut rhs = a[w].clone();
        for j in 0..k {
            let weight = target.ctx.weight(w)[j];
            if weight > 0 {
                lhs = lhs.mul(&den[j].pow(weight as u32));
                rhs = rhs.mul(&num[j].pow(weight as u32));
            } else if weight < 0 {
                lhs = lhs.mul(&num[j].pow((-weight) as u32));
                rhs = rhs.mul(&den[j].pow((-weight) as u32));
            }
        }
        if !vanishes(&lhs.sub(&rhs)) {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Certification

#[derive(Clone, Debug, Serialize)]
pub enum CertMode {
    Symbolic,
    Points { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceOutcome {
    pub map: String,
    pub element: usize,
    pub mode: CertMode,
    pub certified: bool,
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub point: Option<Vec<CycloNum>>,
    pub detail: String,
}

/// Symbolic equivariance: the two composites with the group action must be
/// toric-equal as tuples, modulo the source model equation when given.
pub fn check_equivariance_symbolic(
    map: &RationalMap,
    table: &GroupTable,
    g: usize,
    model: Option<&FibrationModel>,
) -> Result<EquivarianceOutcome, FibrationError> {
    let gamma_source = action_map(&map.source, table, g);
    let gamma_target = action_map(&map.target, table, g);
    let lhs = gamma_source.compose(map)?; // map after the source action
    let rhs = map.compose(&gamma_target)?; // target action after the map
    let modulus = model.map(|m| &m.equation);
    let equal = tuples_equivalent(&map.target, &lhs.components, &rhs.components, modulus)?;
    Ok(EquivarianceOutcome {
        map: map.name.clone(),
        element: g,
        mode: CertMode::Symbolic,
        certified: equal,
        counterexample: if equal {
            None
        } else {
            Some(Counterexample {
                point: None,
                detail: "composite tuples are not toric-equal".into(),
            })
        },
    })
}

/// Point-mode equivariance on seeded samples from the source (model points
/// when a model is given, ambient points otherwise).
pub fn check_equivariance_points(
    map: &RationalMap,
    table: &GroupTable,
    g: usize,
    model: Option<&FibrationModel>,
    samples: usize,
    seed: u64,
) -> Result<EquivarianceOutcome, FibrationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma_source = action_map(&map.source, table, g);
    let gamma_target = action_map(&map.target, table, g);
    let mut done = 0;
    let mut budget = 100 * samples.max(1);
    while done < samples {
        if budget == 0 {
            return Err(FibrationError::SamplingExhausted(100 * samples.max(1)));
        }
        budget -= 1;
        let p = match sample_point(&map.source, model, &mut rng) {
            Some(p) => p,
            None => continue,
        };
        let through_source = gamma_source
            .evaluate(&p)
            .and_then(|q| map.evaluate(&q));
        let through_target = map.evaluate(&p).and_then(|q| gamma_target.evaluate(&q));
        let (lhs, rhs) = match (through_source, through_target) {
            (Ok(l), Ok(r)) => (l, r),
            _ => continue, // base locus; resample
        };
        match points_equal(&map.target, &lhs, &rhs) {
            Some(true) => done += 1,
            Some(false) => {
                return Ok(EquivarianceOutcome {
                    map: map.name.clone(),
                    element: g,
                    mode: CertMode::Points { samples, seed },
                    certified: false,
                    counterexample: Some(Counterexample {
                        point: Some(p),
                        detail: "images disagree at the sample".into(),
                    }),
                });
            }
            None => continue,
        }
    }
    Ok(EquivarianceOutcome {
        map: map.name.clone(),
        element: g,
        mode: CertMode::Points { samples, seed },
        certified: true,
        counterexample: None,
    })
}

fn random_cyclo(rng: &mut ChaCha8Rng) -> CycloNum {
    let mut acc = CycloNum::zero();
    for e in 0..3 {
        let c = rng.gen_range(-2..=2i64);
        if c != 0 {
            acc += CycloNum::from_int(c) * CycloNum::zeta_pow(e);
        }
    }
    acc
}

/// Draws one valid point: on the model when given (base coordinates solved
/// from the fibre data), otherwise anywhere off the irrelevant locus.
/// Returns None when the draw happens to be invalid; the caller loops.
fn sample_point(
    space: &ToricSpace,
    model: Option<&FibrationModel>,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<CycloNum>> {
    match model {
        None => {
            let coords: Vec<CycloNum> = (0..space.ctx.len())
                .map(|_| random_cyclo(rng))
                .collect();
            point_is_valid(space, &coords).then_some(coords)
        }
        Some(m) => sample_model_point(m, rng),
    }
}

/// Samples a point of a fibration model: draw the plane coordinates, gauge
/// t = 1, and solve the remaining linear condition on the base coordinates.
pub fn sample_model_point(
    model: &FibrationModel,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<CycloNum>> {
    let plane = invariants::plane_context();
    let f = invariants::klein_quartic(&plane);
    let (x, y, z) = (random_cyclo(rng), random_cyclo(rng), random_cyclo(rng));
    if x.is_zero() && y.is_zero() && z.is_zero() {
        return None;
    }
    let f_val = f.evaluate(&[x.clone(), y.clone(), z.clone()]);
    let t = CycloNum::one();
    let (u, v) = match (model.kind, model.n) {
        // alpha beta t^2 + f = 0 with alpha = u, beta = v: u v = -f.
        (ModelKind::Toric, 1) => (CycloNum::one(), -f_val.clone()),
        // alpha t^2 + beta f = 0 with alpha = u, beta = v: (u : v) = (f : -1)
        // after flipping sign so u t^2 + v f = f - f = 0.
        (ModelKind::Prime, 1) => (f_val.clone(), -CycloNum::one()),
        // n = 0: the equation does not involve u, v.
        (_, 0) => (CycloNum::one(), random_cyclo(rng)),
        _ => return None,
    };
    if u.is_zero() && v.is_zero() {
        return None;
    }
    let coords = vec![u, v, x, y, z, t];
    let on_model = model.equation.evaluate(&coords).is_zero();
    (on_model && point_is_valid(&model.space, &coords)).then_some(coords)
}

/// Evaluates a point through a sequence of maps.
pub fn evaluate_chain(
    maps: &[RationalMap],
    coords: &[CycloNum],
) -> Result<Vec<CycloNum>, FibrationError> {
    let mut current = coords.to_vec();
    for m in maps {
        current = m.evaluate(&current)?;
    }
    Ok(current)
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTripOutcome {
    pub forward: String,
    pub backward: String,
    pub samples: usize,
    pub seed: u64,
    pub resamples: usize,
    pub certified: bool,
    pub counterexample: Option<Counterexample>,
}

/// Draws seeded points on the source model, maps forward and back, and
/// demands exact equality in the normalized charts. Base-locus hits are
/// resampled with a bounded counter.
pub fn roundtrip_certify(
    forward: &RationalMap,
    backward: &[RationalMap],
    model: Option<&FibrationModel>,
    samples: usize,
    seed: u64,
) -> Result<RoundTripOutcome, FibrationError> {
    let backward_name = backward
        .iter()
        .map(|m| m.name.as_str())
        .collect::<Vec<_>>()
        .join(" ; ");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let mut resamples = 0;
    let budget = 100 * samples.max(1);
    while done < samples {
        if resamples >= budget {
            return Err(FibrationError::SamplingExhausted(budget));
        }
        let Some(p) = sample_point(&forward.source, model, &mut rng) else {
            resamples += 1;
            continue;
        };
        let image = match forward.evaluate(&p) {
            Ok(q) => q,
            Err(_) => {
                resamples += 1;
                continue;
            }
        };
        let back = match evaluate_chain(backward, &image) {
            Ok(q) => q,
            Err(_) => {
                resamples += 1;
                continue;
            }
        };
        match points_equal(&forward.source, &p, &back) {
            Some(true) => done += 1,
            Some(false) => {
                return Ok(RoundTripOutcome {
                    forward: forward.name.clone(),
                    backward: backward_name,
                    samples,
                    seed,
                    resamples,
                    certified: false,
                    counterexample: Some(Counterexample {
                        point: Some(p),
                        detail: "round trip does not return to the sample".into(),
                    }),
                });
            }
            None => {
                resamples += 1;
                continue;
            }
        }
    }
    Ok(RoundTripOutcome {
        forward: forward.name.clone(),
        backward: backward_name,
        samples,
        seed,
        resamples,
        certified: true,
        counterexample: None,
    })
}

// ---------------------------------------------------------------------------
// The birational chain of the main theorem

pub struct TheoremChain {
    pub model_toric: FibrationModel,
    pub model_prime: FibrationModel,
    pub maps: Vec<RationalMap>,
    /// The stated inverses in reverse order; the assembled inverse of the
    /// composite is their stepwise application.
    pub inverses: Vec<RationalMap>,
    pub composite: RationalMap,
}

/// Builds the five-step chain from the unique n = 1 toric model to the
/// product of the plane and the line, together with the stepwise inverses
/// and the two composites.
pub fn build_theorem_chain(table: &GroupTable) -> Result<TheoremChain, FibrationError> {
    let one = || CycloNum::one();
    let alpha = vec![LinearFactor::new(one(), CycloNum::zero())?]; // u
    let beta = vec![LinearFactor::new(CycloNum::zero(), one())?]; // v
    let model_toric = validate_model(1, alpha.clone(), beta.clone(), ModelKind::Toric, table)?;
    let model_prime = validate_model(1, alpha, beta, ModelKind::Prime, table)?;

    let t1 = space_t(1);
    let p1p = space_p1_x_p1112();
    let p1112 = space_p1112();
    let bundle2 = space_bundle(2);
    let bundle6 = space_bundle(6);
    let p2p1 = space_p2_x_p1();

    let var = |s: &ToricSpace, n: &str| MultiPoly::var_named(&s.ctx, n);
    let quartic = |s: &ToricSpace| quartic_in(s);
    let hessian_in = |s: &ToricSpace| -> MultiPoly {
        // Hessian of the quartic expressed in the plane block of the space.
        let plane = invariants::plane_context();
        let h = invariants::hessian(&invariants::klein_quartic(&plane));
        let images: Vec<MultiPoly> = (0..3).map(|i| MultiPoly::var(&s.ctx, s.xyz[i])).collect();
        h.substitute(&s.ctx, &images)
    };

    // (1) t -> v t into the prime ambient.
    let m1 = RationalMap::new(
        "contracted model into the prime ambient",
        t1.clone(),
        p1p.clone(),
        vec![
            var(&t1, "u"),
            var(&t1, "v"),
            var(&t1, "x"),
            var(&t1, "y"),
            var(&t1, "z"),
            var(&t1, "v").mul(&var(&t1, "t")),
        ],
    )?;
    // (1)^-1: rescale the base block by v so the t slot stays polynomial.
    let m1_inv = RationalMap::new(
        "prime ambient back to the contracted model",
        p1p.clone(),
        t1.clone(),
        vec![
            var(&p1p, "u").mul(&var(&p1p, "v")),
            var(&p1p, "v").pow(2),
            var(&p1p, "v").mul(&var(&p1p, "x")),
            var(&p1p, "v").mul(&var(&p1p, "y")),
            var(&p1p, "v").mul(&var(&p1p, "z")),
            var(&p1p, "t"),
        ],
    )?;

    // (2) projection away from the base line.
    let m2 = RationalMap::new(
        "projection to the weighted space",
        p1p.clone(),
        p1112.clone(),
        vec![
            var(&p1p, "x"),
            var(&p1p, "y"),
            var(&p1p, "z"),
            var(&p1p, "t"),
        ],
    )?;
    // (2)^-1: the base coordinates are recovered from the model equation
    // u t^2 + v f = 0 as (u : v) = (f : -t^2).
    let m2_inv = RationalMap::new(
        "section of the projection",
        p1112.clone(),
        p1p.clone(),
        vec![
            quartic(&p1112),
            var(&p1112, "t").pow(2).neg(),
            var(&p1112, "x"),
            var(&p1112, "y"),
            var(&p1112, "z"),
            var(&p1112, "t"),
        ],
    )?;

    // (3) blow up of the singular point of the weighted space.
    let m3 = RationalMap::new(
        "blow-up chart into the bundle",
        p1112.clone(),
        bundle2.clone(),
        vec![
            var(&p1112, "x"),
            var(&p1112, "y"),
            var(&p1112, "z"),
            MultiPoly::one(&p1112.ctx),
            var(&p1112, "t"),
        ],
    )?;
    let m3_inv = RationalMap::new(
        "contraction of the zero section",
        bundle2.clone(),
        p1112.clone(),
        vec![
            var(&bundle2, "a").mul(&var(&bundle2, "x")),
            var(&bundle2, "a").mul(&var(&bundle2, "y")),
            var(&bundle2, "a").mul(&var(&bundle2, "z")),
            var(&bundle2, "a").mul(&var(&bundle2, "b")),
        ],
    )?;

    // (4) fibrewise transform along the invariant quartic.
    let m4 = RationalMap::new(
        "fibrewise transform along the quartic",
        bundle2.clone(),
        bundle6.clone(),
        vec![
            var(&bundle2, "x"),
            var(&bundle2, "y"),
            var(&bundle2, "z"),
            var(&bundle2, "a"),
            quartic(&bundle2).mul(&var(&bundle2, "b")),
        ],
    )?;
    let m4_inv = RationalMap::new(
        "fibrewise transform back along the quartic",
        bundle6.clone(),
        bundle2.clone(),
        vec![
            var(&bundle6, "x"),
            var(&bundle6, "y"),
            var(&bundle6, "z"),
            quartic(&bundle6).mul(&var(&bundle6, "a")),
            var(&bundle6, "b"),
        ],
    )?;

    // (5) fibrewise transform along the invariant sextic, landing in the
    // trivial bundle.
    let m5 = RationalMap::new(
        "fibrewise transform along the sextic",
        bundle6.clone(),
        p2p1.clone(),
        vec![
            var(&bundle6, "x"),
            var(&bundle6, "y"),
            var(&bundle6, "z"),
            hessian_in(&bundle6).mul(&var(&bundle6, "a")),
            var(&bundle6, "b"),
        ],
    )?;
    let m5_inv = RationalMap::new(
        "fibrewise transform back along the sextic",
        p2p1.clone(),
        bundle6.clone(),
        vec![
            var(&p2p1, "x"),
            var(&p2p1, "y"),
            var(&p2p1, "z"),
            var(&p2p1, "a"),
            hessian_in(&p2p1).mul(&var(&p2p1, "b")),
        ],
    )?;

    let maps = vec![m1, m2, m3, m4, m5];
    let inverses = vec![m5_inv, m4_inv, m3_inv, m2_inv, m1_inv];

    let composite = maps
        .iter()
        .skip(1)
        .fold(Ok(maps[0].clone()), |acc, m| acc?.compose(m))?;

    Ok(TheoremChain {
        model_toric,
        model_prime,
        maps,
        inverses,
        composite,
    })
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

    fn chain() -> &'static TheoremChain {
        static C: OnceLock<TheoremChain> = OnceLock::new();
        C.get_or_init(|| build_theorem_chain(group()).expect("chain builds"))
    }

    fn lf(u: i64, v: i64) -> LinearFactor {
        LinearFactor::new(CycloNum::from_int(u), CycloNum::from_int(v)).unwrap()
    }

    #[test]
    fn catalog_weights() {
        let t1 = space_t(1);
        assert_eq!(t1.ctx.weight(t1.ctx.index_of("t").unwrap()), &[-1, 2]);
        let b0 = space_bundle(0);
        let p2p1 = space_p2_x_p1();
        for v in 0..b0.ctx.len() {
            assert_eq!(b0.ctx.weight(v), p2p1.ctx.weight(v));
        }
        assert!(space_catalog("nope", 0).is_err());
        assert!(space_catalog("T", 3).is_ok());
    }

    #[test]
    fn group_action_fixes_the_non_plane_variables() {
        let g = group();
        let sp = space_t(1);
        for name in ["u", "v", "t"] {
            let p = MultiPoly::var_named(&sp.ctx, name);
            for &gi in g.generator_indices() {
                assert_eq!(act_on_space_poly(&sp, g, gi as usize, &p), p);
            }
        }
        let b = space_bundle(2);
        for name in ["a", "b"] {
            let p = MultiPoly::var_named(&b.ctx, name);
            for &gi in g.generator_indices() {
                assert_eq!(act_on_space_poly(&b, g, gi as usize, &p), p);
            }
        }
    }

    #[test]
    fn model_validation() {
        let g = group();
        // n = 1 with alpha = u, beta = v.
        let m = validate_model(1, vec![lf(1, 0)], vec![lf(0, 1)], ModelKind::Prime, g).unwrap();
        assert_eq!(m.equation.multidegree(), Some(vec![1, 4]));
        assert!(!m.is_product_degeneration);

        // n = 0: t^2 + f, the product degeneration.
        let m0 = validate_model(0, vec![], vec![], ModelKind::Prime, g).unwrap();
        assert!(m0.is_product_degeneration);
        let t = MultiPoly::var_named(&m0.space.ctx, "t");
        let expected = t.pow(2).add(&quartic_in(&m0.space));
        assert_eq!(m0.equation, expected);

        // Overlapping zero sets rejected: alpha = u, beta = 2u.
        let err = validate_model(1, vec![lf(1, 0)], vec![lf(2, 0)], ModelKind::Prime, g);
        assert!(matches!(err, Err(FibrationError::OverlappingZeroSets(_, _))));

        // Toric equation has degree (0, 4).
        let mt = validate_model(1, vec![lf(1, 0)], vec![lf(0, 1)], ModelKind::Toric, g).unwrap();
        assert_eq!(mt.equation.multidegree(), Some(vec![0, 4]));
    }

    #[test]
    fn singular_point_counts() {
        let g = group();
        for n in 0..=4usize {
            // alpha = u^n, beta = (v - k u) distinct from u for k = 0..n.
            let alpha: Vec<LinearFactor> = (0..n).map(|_| lf(1, 0)).collect();
            let beta: Vec<LinearFactor> = (0..n).map(|k| lf(-(k as i64 + 1), 1)).collect();
            let m = validate_model(n, alpha, beta, ModelKind::Toric, g).unwrap();
            let pts = singular_points(&m).unwrap();
            assert_eq!(pts.len(), 2 * n);
        }
        // explicit n = 2 example with distinct roots
        let m = validate_model(
            2,
            vec![lf(1, 0), lf(0, 1)],
            vec![lf(1, -1), lf(1, 1)],
            ModelKind::Toric,
            group(),
        )
        .unwrap();
        let pts = singular_points(&m).unwrap();
        assert_eq!(pts.len(), 4);
        let mut seen = std::collections::BTreeSet::new();
        for p in &pts {
            // normalize the root projectively for dedup
            let key = if p.u.is_zero() {
                "inf".to_string()
            } else {
                p.v.div(&p.u).unwrap().to_string()
            };
            seen.insert(key);
        }
        assert_eq!(seen.len(), 4, "roots are distinct");
        // prime models do not carry the singular-locus data
        let mp = validate_model(1, vec![lf(1, 0)], vec![lf(0, 1)], ModelKind::Prime, group())
            .unwrap();
        assert!(singular_points(&mp).is_err());
    }

    #[test]
    fn fibre_classification_matches_the_construction() {
        let g = group();
        let m = validate_model(1, vec![lf(1, 0)], vec![lf(0, 1)], ModelKind::Prime, g).unwrap();
        // beta = v vanishes at (1 : 0): non-reduced plane
        let c = classify_fibre(&m, &CycloNum::one(), &CycloNum::zero()).unwrap();
        assert!(matches!(c, FibreClass::NonReducedPlane { .. }));
        // alpha = u vanishes at (0 : 1): cone with vertex at x=y=z=0
        let c = classify_fibre(&m, &CycloNum::zero(), &CycloNum::one()).unwrap();
        match c {
            FibreClass::Cone { vertex } => {
                assert!(vertex[0].is_zero() && vertex[3].is_one());
            }
            other => panic!("expected cone, got {other:?}"),
        }
        // generic point: smooth
        let c = classify_fibre(&m, &CycloNum::one(), &CycloNum::one()).unwrap();
        assert!(matches!(c, FibreClass::SmoothDp2));
        // invalid base point
        assert!(classify_fibre(&m, &CycloNum::zero(), &CycloNum::zero()).is_err());
    }

    #[test]
    fn quartic_smoothness_certificate() {
        assert!(klein_quartic_is_smooth());
    }

    #[test]
    fn twists_of_the_chain_maps() {
        let c = chain();
        // map (1): twist (1,0) and (0,1)
        assert_eq!(c.maps[0].twist, vec![vec![1, 0], vec![0, 1]]);
        // map (2) into a single grading: twist (0,1)
        assert_eq!(c.maps[1].twist, vec![vec![0, 1]]);
        // map (3): twists (1) and (0)
        assert_eq!(c.maps[2].twist, vec![vec![1], vec![0]]);
        // composite: base grading twist (0,1), fibre grading twist (0,6)
        assert_eq!(c.composite.twist, vec![vec![0, 1], vec![0, 6]]);
    }

    #[test]
    fn identity_composition_is_neutral() {
        let c = chain();
        let id = RationalMap::identity(&space_t(1));
        let composed = id.compose(&c.maps[0]).unwrap();
        assert!(tuples_equivalent(
            &c.maps[0].target,
            &composed.components,
            &c.maps[0].components,
            None
        )
        .unwrap());
    }

    #[test]
    fn map_one_pulls_the_prime_equation_to_the_toric_one() {
        let c = chain();
        let pulled = c.maps[0].pullback(&c.model_prime.equation);
        // u (vt)^2 + v f = v (u v t^2 + f)
        let v = MultiPoly::var_named(&c.model_toric.space.ctx, "v");
        let expected = v.mul(&c.model_toric.equation);
        assert_eq!(pulled, expected);
    }

    #[test]
    fn composite_equals_the_directly_stated_tuple() {
        // Derived independently: the composite collapses to
        // (x : y : z ; hessian : v t f).
        let c = chain();
        let t1 = &c.model_toric.space;
        let plane = invariants::plane_context();
        let h = invariants::hessian(&invariants::klein_quartic(&plane));
        let images: Vec<MultiPoly> =
            (0..3).map(|i| MultiPoly::var(&t1.ctx, t1.xyz[i])).collect();
        let h_t1 = h.substitute(&t1.ctx, &images);
        let f_t1 = quartic_in(t1);
        let expected = vec![
            MultiPoly::var_named(&t1.ctx, "x"),
            MultiPoly::var_named(&t1.ctx, "y"),
            MultiPoly::var_named(&t1.ctx, "z"),
            h_t1,
            MultiPoly::var_named(&t1.ctx, "v")
                .mul(&MultiPoly::var_named(&t1.ctx, "t"))
                .mul(&f_t1),
        ];
        assert!(tuples_equivalent(
            &c.composite.target,
            &c.composite.components,
            &expected,
            None
        )
        .unwrap());
    }

    #[test]
    fn composition_is_associative_up_to_tuple_equivalence() {
        let c = chain();
        for i in 0..c.maps.len() - 2 {
            let left = c.maps[i]
                .compose(&c.maps[i + 1])
                .unwrap()
                .compose(&c.maps[i + 2])
                .unwrap();
            let right = c.maps[i]
                .compose(&c.maps[i + 1].compose(&c.maps[i + 2]).unwrap())
                .unwrap();
            assert!(tuples_equivalent(
                &left.target,
                &left.components,
                &right.components,
                None
            )
            .unwrap());
        }
    }

    #[test]
    fn stepwise_roundtrips_on_points() {
        let c = chain();
        // (2) then (2)^-1 on model points of the prime model.
        let fwd = &c.maps[1];
        let bwd = &c.inverses[3];
        // build the roundtrip on the prime model: sample there directly
        let out = roundtrip_certify(
            fwd,
            std::slice::from_ref(bwd),
            Some(&c.model_prime),
            30,
            11,
        )
        .unwrap();
        assert!(out.certified, "{:?}", out.counterexample);

        // (3)^-1 then (3): identity on the bundle off the contracted locus.
        let fwd3 = &c.inverses[2]; // bundle2 -> P1112
        let bwd3 = &c.maps[2]; // P1112 -> bundle2
        let out = roundtrip_certify(fwd3, std::slice::from_ref(bwd3), None, 30, 12).unwrap();
        assert!(out.certified, "{:?}", out.counterexample);
    }

    #[test]
    fn chain_roundtrip_on_fifty_model_points() {
        let c = chain();
        let out = roundtrip_certify(
            &c.composite,
            &c.inverses,
            Some(&c.model_toric),
            50,
            7,
        )
        .unwrap();
        assert!(out.certified, "{:?}", out.counterexample);
        assert_eq!(out.samples, 50);
    }

    #[test]
    fn composite_is_equivariant_for_all_generators() {
        let c = chain();
        let g = group();
        for &gi in g.generator_indices() {
            let sym = check_equivariance_symbolic(
                &c.composite,
                g,
                gi as usize,
                Some(&c.model_toric),
            )
            .unwrap();
            assert!(sym.certified, "symbolic equivariance for {gi}");
            let pts = check_equivariance_points(
                &c.composite,
                g,
                gi as usize,
                Some(&c.model_toric),
                50,
                7,
            )
            .unwrap();
            assert!(pts.certified, "point equivariance for {gi}");
        }
        // identity map certifies trivially
        let id = RationalMap::identity(&space_bundle(2));
        let out = check_equivariance_symbolic(&id, g, 5, None).unwrap();
        assert!(out.certified);
    }

    #[test]
    fn sabotaged_fibrewise_map_fails_equivariance() {
        let g = group();
        let b2 = space_bundle(2);
        let b6 = space_bundle(6);
        let x4 = MultiPoly::var_named(&b2.ctx, "x").pow(4);
        let sabotaged = RationalMap::new(
            "sabotaged fibrewise map",
            b2.clone(),
            b6,
            vec![
                MultiPoly::var_named(&b2.ctx, "x"),
                MultiPoly::var_named(&b2.ctx, "y"),
                MultiPoly::var_named(&b2.ctx, "z"),
                MultiPoly::var_named(&b2.ctx, "a"),
                x4.mul(&MultiPoly::var_named(&b2.ctx, "b")),
            ],
        )
        .unwrap();
        let s_idx = g.generator_indices()[0] as usize;
        let sym = check_equivariance_symbolic(&sabotaged, g, s_idx, None).unwrap();
        assert!(!sym.certified);
        let pts = check_equivariance_points(&sabotaged, g, s_idx, None, 10, 3).unwrap();
        assert!(!pts.certified);
        assert!(pts.counterexample.is_some());
    }

    #[test]
    fn point_equality_respects_the_weights() {
        let sp = space_p1112();
        let two = CycloNum::from_int(2);
        let a = vec![
            CycloNum::one(),
            CycloNum::from_int(3),
            CycloNum::zero(),
            CycloNum::from_int(5),
        ];
        // scale by 2: (x, y, z, t) -> (2x, 2y, 2z, 4t)
        let b = vec![
            two.clone(),
            CycloNum::from_int(6),
            CycloNum::zero(),
            CycloNum::from_int(20),
        ];
        assert_eq!(points_equal(&sp, &a, &b), Some(true));
        // wrong weight on t
        let c = vec![
            two.clone(),
            CycloNum::from_int(6),
            CycloNum::zero(),
            CycloNum::from_int(10),
        ];
        assert_eq!(points_equal(&sp, &a, &c), Some(false));
        let _ = two;
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let c = chain();
        let mut r1 = ChaCha8Rng::seed_from_u64(99);
        let mut r2 = ChaCha8Rng::seed_from_u64(99);
        let p1 = std::iter::from_fn(|| Some(sample_model_point(&c.model_toric, &mut r1)))
            .flatten()
            .next()
            .unwrap();
        let p2 = std::iter::from_fn(|| Some(sample_model_point(&c.model_toric, &mut r2)))
            .flatten()
            .next()
            .unwrap();
        assert_eq!(p1, p2);
        assert!(c.model_toric.equation.evaluate(&p1).is_zero());
    }
}
