//! Sparse multivariate polynomials over Q(zeta_7), with multi-degree
//! bookkeeping for the graded Cox rings used downstream.
//!
//! Terms are kept in a canonical map keyed by exponent vector; the graded
//! lexicographic order with the declared variable order is used for every
//! normalization convention (leading terms, monic gcds, division).

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use super::cyclo::CycloNum;
use super::{ExactError, ExactResult};

/// An ordered list of named variables, each carrying one integer weight per
/// grading. Plain polynomial rings use a single grading with weight 1.
#[derive(Debug, PartialEq, Eq)]
pub struct VarContext {
    names: Vec<String>,
    weights: Vec<Vec<i64>>,
    gradings: usize,
}

impl VarContext {
    pub fn new(vars: &[(&str, &[i64])]) -> Arc<Self> {
        assert!(!vars.is_empty());
        let gradings = vars[0].1.len();
        assert!(vars.iter().all(|(_, w)| w.len() == gradings));
        Arc::new(VarContext {
            names: vars.iter().map(|(n, _)| n.to_string()).collect(),
            weights: vars.iter().map(|(_, w)| w.to_vec()).collect(),
            gradings,
        })
    }

    /// Single grading, every variable of weight 1.
    pub fn standard(names: &[&str]) -> Arc<Self> {
        let vars: Vec<(&str, &[i64])> = names.iter().map(|n| (*n, &[1i64][..])).collect();
        Self::new(&vars)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn gradings(&self) -> usize {
        self.gradings
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn weight(&self, i: usize) -> &[i64] {
        &self.weights[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn describe(&self) -> String {
        self.names.join(",")
    }
}

fn same_context(a: &Arc<VarContext>, b: &Arc<VarContext>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Graded lexicographic comparison: total degree first, then the earlier
/// variable dominates.
fn cmp_grlex(a: &[u16], b: &[u16]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

/// Sparse polynomial with exact cyclotomic coefficients.
#[derive(Clone)]
pub struct MultiPoly {
    ctx: Arc<VarContext>,
    terms: BTreeMap<Vec<u16>, CycloNum>,
}

impl MultiPoly {
    pub fn zero(ctx: &Arc<VarContext>) -> Self {
        MultiPoly {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &Arc<VarContext>, c: CycloNum) -> Self {
        let mut p = Self::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(vec![0; ctx.len()], c);
        }
        p
    }

    pub fn one(ctx: &Arc<VarContext>) -> Self {
        Self::constant(ctx, CycloNum::one())
    }

    pub fn var(ctx: &Arc<VarContext>, index: usize) -> Self {
        assert!(index < ctx.len());
        let mut exps = vec![0u16; ctx.len()];
        exps[index] = 1;
        Self::monomial(ctx, exps, CycloNum::one())
    }

    pub fn var_named(ctx: &Arc<VarContext>, name: &str) -> Self {
        let i = ctx
            .index_of(name)
            .unwrap_or_else(|| panic!("unknown variable {name} in context {}", ctx.describe()));
        Self::var(ctx, i)
    }

    pub fn monomial(ctx: &Arc<VarContext>, exps: Vec<u16>, coeff: CycloNum) -> Self {
        assert_eq!(exps.len(), ctx.len());
        let mut p = Self::zero(ctx);
        if !coeff.is_zero() {
            p.terms.insert(exps, coeff);
        }
        p
    }

    pub fn from_terms(
        ctx: &Arc<VarContext>,
        terms: impl IntoIterator<Item = (Vec<u16>, CycloNum)>,
    ) -> Self {
        let mut p = Self::zero(ctx);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn context(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &CycloNum)> {
        self.terms.iter()
    }

    pub fn constant_value(&self) -> CycloNum {
        self.terms
            .get(&vec![0u16; self.ctx.len()])
            .cloned()
            .unwrap_or_else(CycloNum::zero)
    }

    fn add_term(&mut self, exps: Vec<u16>, coeff: CycloNum) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn assert_same_ctx(&self, other: &Self) {
        if !same_context(&self.ctx, &other.ctx) {
            panic!(
                "{}",
                ExactError::ContextMismatch(self.ctx.describe(), other.ctx.describe())
            );
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_ctx(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &CycloNum) -> Self {
        if k.is_zero() {
            return Self::zero(&self.ctx);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.clone() * k;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_ctx(other);
        let mut out = Self::zero(&self.ctx);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u16> = ea.iter().zip(eb).map(|(&a, &b)| a + b).collect();
                out.add_term(exps, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.ctx);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Max total degree over all terms, or None for the zero polynomial.
    pub fn total_degree(&self) -> Option<u64> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u64).sum())
            .max()
    }

    /// The exponent-weighted multi-degree shared by every term, if the
    /// polynomial is homogeneous for the context's gradings.
    pub fn multidegree(&self) -> Option<Vec<i64>> {
        let mut result: Option<Vec<i64>> = None;
        for e in self.terms.keys() {
            let d = self.term_multidegree(e);
            match &result {
                None => result = Some(d),
                Some(r) if *r == d => {}
                Some(_) => return None,
            }
        }
        result
    }

    pub fn term_multidegree(&self, exps: &[u16]) -> Vec<i64> {
        let mut d = vec![0i64; self.ctx.gradings()];
        for (i, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            for (j, w) in self.ctx.weight(i).iter().enumerate() {
                d[j] += *w * e as i64;
            }
        }
        d
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.multidegree().is_some()
    }

    pub fn leading_exps(&self) -> Option<&Vec<u16>> {
        self.terms.keys().max_by(|a, b| cmp_grlex(a, b))
    }

    pub fn leading_coeff(&self) -> CycloNum {
        match self.leading_exps() {
            Some(e) => self.terms[e].clone(),
            None => CycloNum::zero(),
        }
    }

    /// Scaled so the graded-lex leading coefficient is 1.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading_coeff();
        self.scale(&lc.inv().expect("leading coefficient is nonzero"))
    }

    pub fn degree_in(&self, var: usize) -> u16 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn involves(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] > 0)
    }

    /// The coefficient of var^k, as a polynomial in the remaining variables
    /// (still expressed in the same context).
    pub fn coeff_of_power(&self, var: usize, k: u16) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (e, c) in &self.terms {
            if e[var] == k {
                let mut e2 = e.clone();
                e2[var] = 0;
                out.add_term(e2, c.clone());
            }
        }
        out
    }

    pub fn mul_var_power(&self, var: usize, k: u16) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[var] += k;
            out.add_term(e2, c.clone());
        }
        out
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.add_term(e2, c.clone() * CycloNum::from_int(e[var] as i64));
        }
        out
    }

    /// Substitutes one image polynomial (in `target` variables) per source
    /// variable. Used for group actions and for composing coordinate maps.
    pub fn substitute(&self, target: &Arc<VarContext>, images: &[MultiPoly]) -> MultiPoly {
        assert_eq!(images.len(), self.ctx.len(), "one image per variable");
        for img in images {
            assert!(same_context(&img.ctx, target), "images in target context");
        }
        let mut power_cache: HashMap<(usize, u16), MultiPoly> = HashMap::new();
        let mut out = MultiPoly::zero(target);
        for (e, c) in &self.terms {
            let mut term = MultiPoly::constant(target, c.clone());
            for (i, &exp) in e.iter().enumerate() {
                if exp == 0 {
                    continue;
                }
                let img = power_cache
                    .entry((i, exp))
                    .or_insert_with(|| images[i].pow(exp as u32))
                    .clone();
                term = term.mul(&img);
            }
            out = out.add(&term);
        }
        out
    }

    pub fn evaluate(&self, values: &[CycloNum]) -> CycloNum {
        assert_eq!(values.len(), self.ctx.len());
        let mut acc = CycloNum::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &exp) in e.iter().enumerate() {
                if exp > 0 {
                    t *= values[i].pow(exp as u32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Division with remainder by a single divisor under graded lex. The
    /// quotient is returned only when the remainder vanishes; otherwise the
    /// error carries the remainder.
    pub fn exact_div(&self, divisor: &Self) -> ExactResult<Self> {
        self.assert_same_ctx(divisor);
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let (q, r) = self.div_rem(divisor);
        if r.is_zero() {
            Ok(q)
        } else {
            Err(ExactError::InexactDivision {
                remainder: r.to_string(),
            })
        }
    }

    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let lead_d = divisor.leading_exps().expect("nonzero divisor").clone();
        let lc_d = divisor.terms[&lead_d].clone();
        let mut quot = Self::zero(&self.ctx);
        let mut rem = Self::zero(&self.ctx);
        let mut work = self.clone();
        while let Some(lead_w) = work.leading_exps().cloned() {
            let c = work.terms[&lead_w].clone();
            if lead_w.iter().zip(&lead_d).all(|(&a, &b)| a >= b) {
                let exps: Vec<u16> = lead_w.iter().zip(&lead_d).map(|(&a, &b)| a - b).collect();
                let coeff = c.div(&lc_d).expect("nonzero leading coefficient");
                let t = Self::monomial(&self.ctx, exps, coeff);
                quot = quot.add(&t);
                work = work.sub(&t.mul(divisor));
            } else {
                work.terms.remove(&lead_w);
                rem.add_term(lead_w, c);
            }
        }
        (quot, rem)
    }

    pub fn divides(&self, other: &Self) -> bool {
        if other.is_zero() {
            return true;
        }
        if self.is_zero() {
            return false;
        }
        other.div_rem(self).1.is_zero()
    }

    /// Greatest common divisor, monic-normalized under graded lex.
    ///
    /// Strategy: split off the monomial content, then run a primitive
    /// pseudo-remainder sequence in the first shared variable, recursing on
    /// the coefficient contents.
    pub fn gcd(&self, other: &Self) -> Self {
        self.assert_same_ctx(other);
        let g = self.gcd_unnormalized(other);
        g.monic()
    }

    fn gcd_unnormalized(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (ma, pa) = self.extract_monomial_content();
        let (mb, pb) = other.extract_monomial_content();
        let shared: Vec<u16> = ma.iter().zip(&mb).map(|(&a, &b)| a.min(b)).collect();
        let core = Self::gcd_primitive(&pa, &pb);
        core.mul(&Self::monomial(
            &self.ctx,
            shared,
            CycloNum::one(),
        ))
    }

    /// Factors out the largest monomial dividing every term.
    pub fn extract_monomial_content(&self) -> (Vec<u16>, Self) {
        let n = self.ctx.len();
        let mut content = vec![u16::MAX; n];
        for e in self.terms.keys() {
            for i in 0..n {
                content[i] = content[i].min(e[i]);
            }
        }
        if self.is_zero() {
            return (vec![0; n], self.clone());
        }
        let mut out = Self::zero(&self.ctx);
        for (e, c) in &self.terms {
            let e2: Vec<u16> = e.iter().zip(&content).map(|(&a, &b)| a - b).collect();
            out.add_term(e2, c.clone());
        }
        (content, out)
    }

    fn gcd_primitive(a: &Self, b: &Self) -> Self {
        if a.is_constant() || b.is_constant() {
            return Self::one(&a.ctx);
        }
        let var = (0..a.ctx.len())
            .find(|&v| a.involves(v) && b.involves(v));
        let Some(var) = var else {
            // No shared variable: any common divisor would have to be free of
            // all variables of one side, hence constant.
            return Self::one(&a.ctx);
        };

        let (cont_a, pp_a) = a.content_and_primitive(var);
        let (cont_b, pp_b) = b.content_and_primitive(var);
        let cont_gcd = cont_a.gcd_unnormalized(&cont_b);

        // Primitive PRS in `var`.
        let (mut f, mut g) = if pp_a.degree_in(var) >= pp_b.degree_in(var) {
            (pp_a, pp_b)
        } else {
            (pp_b, pp_a)
        };
        loop {
            let r = Self::pseudo_rem(&f, &g, var);
            if r.is_zero() {
                break;
            }
            let (_, r_pp) = r.content_and_primitive(var);
            f = g;
            g = r_pp;
            if !g.involves(var) {
                // Coprime in the main variable.
                return cont_gcd;
            }
        }
        let (_, g_pp) = g.content_and_primitive(var);
        let candidate = cont_gcd.mul(&g_pp);
        debug_assert!(candidate.divides(a) && candidate.divides(b));
        candidate
    }

    /// Content (gcd of the var-coefficients, including their monomial parts)
    /// and primitive part with respect to one variable.
    fn content_and_primitive(&self, var: usize) -> (Self, Self) {
        let deg = self.degree_in(var);
        let mut content = Self::zero(&self.ctx);
        for k in 0..=deg {
            let c = self.coeff_of_power(var, k);
            if !c.is_zero() {
                content = content.gcd_unnormalized(&c);
            }
            if content.is_constant() && !content.is_zero() {
                content = Self::one(&self.ctx);
                break;
            }
        }
        let pp = self.exact_div(&content).expect("content divides");
        (content, pp)
    }

    /// Classical pseudo-remainder of f by g in `var`.
    fn pseudo_rem(f: &Self, g: &Self, var: usize) -> Self {
        let dg = g.degree_in(var);
        let lc_g = g.coeff_of_power(var, dg);
        let mut r = f.clone();
        while !r.is_zero() {
            let dr = r.degree_in(var);
            if dr < dg {
                break;
            }
            let lc_r = r.coeff_of_power(var, dr);
            // r := lc_g * r - lc_r * var^(dr-dg) * g
            r = r
                .mul(&lc_g)
                .sub(&lc_r.mul(&g.mul_var_power(var, dr - dg)));
        }
        r
    }

    /// Sylvester resultant of two polynomials with respect to one variable;
    /// the result does not involve that variable.
    pub fn resultant(&self, other: &Self, var: usize) -> Self {
        self.assert_same_ctx(other);
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.ctx);
        }
        let m = self.degree_in(var) as usize;
        let n = other.degree_in(var) as usize;
        if m == 0 && n == 0 {
            return Self::one(&self.ctx);
        }
        let size = m + n;
        let a: Vec<Self> = (0..=m)
            .map(|k| self.coeff_of_power(var, (m - k) as u16))
            .collect();
        let b: Vec<Self> = (0..=n)
            .map(|k| other.coeff_of_power(var, (n - k) as u16))
            .collect();
        let mut rows: Vec<Vec<Self>> = Vec::with_capacity(size);
        for i in 0..n {
            let mut row = vec![Self::zero(&self.ctx); size];
            for (k, c) in a.iter().enumerate() {
                row[i + k] = c.clone();
            }
            rows.push(row);
        }
        for i in 0..m {
            let mut row = vec![Self::zero(&self.ctx); size];
            for (k, c) in b.iter().enumerate() {
                row[i + k] = c.clone();
            }
            rows.push(row);
        }
        poly_det(rows)
    }

    pub fn to_string_pretty(&self) -> String {
        self.to_string()
    }
}

/// Determinant of a small polynomial matrix by fraction-free elimination.
pub fn poly_det(mut m: Vec<Vec<MultiPoly>>) -> MultiPoly {
    let n = m.len();
    assert!(n > 0 && m.iter().all(|r| r.len() == n));
    let ctx = m[0][0].context().clone();
    let mut sign = false;
    let mut prev = MultiPoly::one(&ctx);
    for k in 0..n.saturating_sub(1) {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = !sign;
                }
                None => return MultiPoly::zero(&ctx),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
            }
            m[i][k] = MultiPoly::zero(&ctx);
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign {
        det.neg()
    } else {
        det
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        same_context(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl Eq for MultiPoly {}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms: Vec<(&Vec<u16>, &CycloNum)> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| cmp_grlex(b, a));
        for (i, (e, c)) in terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(v, &x)| {
                    if x == 1 {
                        self.ctx.name(v).to_string()
                    } else {
                        format!("{}^{}", self.ctx.name(v), x)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "({})", c)?;
            } else if c.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "({})*{}", c, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for MultiPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            exps: &'a [u16],
            coeff: &'a CycloNum,
        }
        let mut seq = serializer.serialize_seq(Some(self.terms.len()))?;
        for (e, c) in &self.terms {
            seq.serialize_element(&Term { exps: e, coeff: c })?;
        }
        seq.end()
    }
}
