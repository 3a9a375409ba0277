//! Finite groupoids: the table model, axiom validation, Haar systems and the
//! standard constructors (pair, group, transformation, disjoint union).
//!
//! Composition follows the convention `γγ'` defined iff `src(γ) = dst(γ')`,
//! with `dst(γγ') = dst(γ)` and `src(γγ') = src(γ')`. The range fiber
//! `G^x` is the set of arrows with `dst = x`, the source fiber `G_x` the set
//! with `src = x`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier-level description of a groupoid, as it appears in instance
/// documents. Turned into a [`FiniteGroupoid`] by [`FiniteGroupoid::from_tables`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupoidTables {
    pub units: Vec<UnitRecord>,
    pub arrows: Vec<ArrowRecord>,
    /// Triples `[γ, γ', γγ']`, one for every pair with `src(γ) = dst(γ')`.
    pub compose: Vec<[String; 3]>,
    /// Pairs `[γ, γ⁻¹]`, one per arrow.
    pub inverse: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitRecord {
    pub id: String,
    pub unit_arrow: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowRecord {
    pub id: String,
    pub src: String,
    pub dst: String,
}

/// Structural problems with groupoid tables: identifiers that do not
/// resolve, duplicates, missing entries. Axiom violations are reported by
/// [`FiniteGroupoid::validate`] instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("duplicate unit id `{0}`")]
    DuplicateUnit(String),
    #[error("duplicate arrow id `{0}`")]
    DuplicateArrow(String),
    #[error("unknown unit `{id}` referenced by {context}")]
    UnknownUnit { id: String, context: String },
    #[error("unknown arrow `{id}` referenced by {context}")]
    UnknownArrow { id: String, context: String },
    #[error("composition of `{0}` and `{1}` listed more than once")]
    DuplicateCompose(String, String),
    #[error("composition of `{0}` and `{1}` listed but src({0}) != dst({1})")]
    NotComposable(String, String),
    #[error("composable pair (`{0}`, `{1}`) has no composition entry")]
    MissingCompose(String, String),
    #[error("inverse of `{0}` listed more than once")]
    DuplicateInverse(String),
    #[error("arrow `{0}` has no inverse entry")]
    MissingInverse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    UnitArrow,
    RangeOfProduct,
    SourceOfProduct,
    LeftUnit,
    RightUnit,
    InverseLaw,
    Associativity,
    HaarPositivity,
    HaarInvariance,
    BundleUnit,
    BundleFunctoriality,
    BundleUnitarity,
    BundleInverse,
    CocycleIdentity,
    CocycleUnit,
    CocycleInverse,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::UnitArrow => "unit arrow",
            Axiom::RangeOfProduct => "range of product",
            Axiom::SourceOfProduct => "source of product",
            Axiom::LeftUnit => "left unit",
            Axiom::RightUnit => "right unit",
            Axiom::InverseLaw => "inverse law",
            Axiom::Associativity => "associativity",
            Axiom::HaarPositivity => "haar positivity",
            Axiom::HaarInvariance => "haar left invariance",
            Axiom::BundleUnit => "bundle unit",
            Axiom::BundleFunctoriality => "bundle functoriality",
            Axiom::BundleUnitarity => "bundle unitarity",
            Axiom::BundleInverse => "bundle inverse",
            Axiom::CocycleIdentity => "cocycle identity",
            Axiom::CocycleUnit => "cocycle vanishes on units",
            Axiom::CocycleInverse => "cocycle inverse law",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    /// Witnessing arrows (or units, for unit-arrow violations).
    pub witnesses: Vec<String>,
    pub detail: String,
}

/// List of axiom violations; empty iff the checked object is valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, axiom: Axiom) -> usize {
        self.violations.iter().filter(|v| v.axiom == axiom).count()
    }

    pub(crate) fn push(&mut self, axiom: Axiom, witnesses: Vec<String>, detail: String) {
        self.violations.push(Violation { axiom, witnesses, detail });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrow {
    pub id: String,
    pub src: usize,
    pub dst: usize,
}

/// A finite groupoid with dense composition table. Arrows and units are
/// addressed by their position; string ids are kept for reporting.
#[derive(Debug, Clone)]
pub struct FiniteGroupoid {
    units: Vec<String>,
    arrows: Vec<Arrow>,
    unit_arrow: Vec<usize>,
    compose: Vec<Option<usize>>,
    inverse: Vec<usize>,
    range_fibers: Vec<Vec<usize>>,
    source_fibers: Vec<Vec<usize>>,
    arrow_index: HashMap<String, usize>,
    unit_index: HashMap<String, usize>,
}

impl PartialEq for FiniteGroupoid {
    fn eq(&self, other: &Self) -> bool {
        self.units == other.units
            && self.arrows == other.arrows
            && self.unit_arrow == other.unit_arrow
            && self.compose == other.compose
            && self.inverse == other.inverse
    }
}

impl FiniteGroupoid {
    /// Resolve identifier tables into a groupoid. Fails on unresolved or
    /// duplicated identifiers and on a compose table that does not list
    /// every composable pair exactly once. Does not check the axioms.
    pub fn from_tables(t: &GroupoidTables) -> Result<Self, TableError> {
        let mut unit_index = HashMap::new();
        for (i, u) in t.units.iter().enumerate() {
            if unit_index.insert(u.id.clone(), i).is_some() {
                return Err(TableError::DuplicateUnit(u.id.clone()));
            }
        }
        let lookup_unit = |id: &str, context: &str| {
            unit_index.get(id).copied().ok_or_else(|| TableError::UnknownUnit {
                id: id.to_string(),
                context: context.to_string(),
            })
        };
        let mut arrow_index = HashMap::new();
        let mut arrows = Vec::with_capacity(t.arrows.len());
        for (i, a) in t.arrows.iter().enumerate() {
            if arrow_index.insert(a.id.clone(), i).is_some() {
                return Err(TableError::DuplicateArrow(a.id.clone()));
            }
            let ctx = format!("arrow `{}`", a.id);
            arrows.push(Arrow { id: a.id.clone(), src: lookup_unit(&a.src, &ctx)?, dst: lookup_unit(&a.dst, &ctx)? });
        }
        let lookup_arrow = |id: &str, context: &str| {
            arrow_index.get(id).copied().ok_or_else(|| TableError::UnknownArrow {
                id: id.to_string(),
                context: context.to_string(),
            })
        };
        let mut unit_arrow = Vec::with_capacity(t.units.len());
        for u in &t.units {
            unit_arrow.push(lookup_arrow(&u.unit_arrow, &format!("unit `{}`", u.id))?);
        }

        let n = arrows.len();
        let mut compose = vec![None; n * n];
        for [a, b, ab] in &t.compose {
            let ctx = format!("composition [{a}, {b}, {ab}]");
            let (ia, ib, iab) = (lookup_arrow(a, &ctx)?, lookup_arrow(b, &ctx)?, lookup_arrow(ab, &ctx)?);
            if arrows[ia].src != arrows[ib].dst {
                return Err(TableError::NotComposable(a.clone(), b.clone()));
            }
            let slot = &mut compose[ia * n + ib];
            if slot.is_some() {
                return Err(TableError::DuplicateCompose(a.clone(), b.clone()));
            }
            *slot = Some(iab);
        }
        for ia in 0..n {
            for ib in 0..n {
                if arrows[ia].src == arrows[ib].dst && compose[ia * n + ib].is_none() {
                    return Err(TableError::MissingCompose(arrows[ia].id.clone(), arrows[ib].id.clone()));
                }
            }
        }

        let mut inverse = vec![None; n];
        for [a, a_inv] in &t.inverse {
            let ctx = format!("inverse [{a}, {a_inv}]");
            let (ia, ii) = (lookup_arrow(a, &ctx)?, lookup_arrow(a_inv, &ctx)?);
            if inverse[ia].replace(ii).is_some() {
                return Err(TableError::DuplicateInverse(a.clone()));
            }
        }
        let inverse = inverse
            .into_iter()
            .enumerate()
            .map(|(i, inv)| inv.ok_or_else(|| TableError::MissingInverse(arrows[i].id.clone())))
            .collect::<Result<Vec<_>, _>>()?;

        let mut range_fibers = vec![Vec::new(); t.units.len()];
        let mut source_fibers = vec![Vec::new(); t.units.len()];
        for (i, a) in arrows.iter().enumerate() {
            range_fibers[a.dst].push(i);
            source_fibers[a.src].push(i);
        }

        Ok(Self {
            units: t.units.iter().map(|u| u.id.clone()).collect(),
            arrows,
            unit_arrow,
            compose,
            inverse,
            range_fibers,
            source_fibers,
            arrow_index,
            unit_index,
        })
    }

    /// Identifier tables in canonical order: units and arrows as stored,
    /// compositions sorted by (first, second) arrow position.
    pub fn to_tables(&self) -> GroupoidTables {
        let n = self.arrows.len();
        let mut compose = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if let Some(ab) = self.compose[a * n + b] {
                    compose.push([self.arrow_id(a).into(), self.arrow_id(b).into(), self.arrow_id(ab).into()]);
                }
            }
        }
        GroupoidTables {
            units: self
                .units
                .iter()
                .zip(&self.unit_arrow)
                .map(|(id, &ua)| UnitRecord { id: id.clone(), unit_arrow: self.arrow_id(ua).into() })
                .collect(),
            arrows: self
                .arrows
                .iter()
                .map(|a| ArrowRecord { id: a.id.clone(), src: self.units[a.src].clone(), dst: self.units[a.dst].clone() })
                .collect(),
            compose,
            inverse: (0..n).map(|a| [self.arrow_id(a).into(), self.arrow_id(self.inverse[a]).into()]).collect(),
        }
    }

    pub fn n_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn src(&self, a: usize) -> usize {
        self.arrows[a].src
    }

    pub fn dst(&self, a: usize) -> usize {
        self.arrows[a].dst
    }

    pub fn unit_arrow(&self, x: usize) -> usize {
        self.unit_arrow[x]
    }

    pub fn is_unit_arrow(&self, a: usize) -> bool {
        let arrow = &self.arrows[a];
        arrow.src == arrow.dst && self.unit_arrow[arrow.dst] == a
    }

    /// `γγ'` when `src(γ) = dst(γ')`.
    pub fn compose(&self, a: usize, b: usize) -> Option<usize> {
        self.compose[a * self.arrows.len() + b]
    }

    /// Composition of a pair known to be composable.
    ///
    /// Panics if the pair is not composable; only call it on validated
    /// groupoids with pairs whose endpoints match.
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.compose(a, b).unwrap_or_else(|| {
            panic!("arrows `{}` and `{}` are not composable", self.arrows[a].id, self.arrows[b].id)
        })
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// `G^x`: arrows with range (dst) `x`.
    pub fn range_fiber(&self, x: usize) -> &[usize] {
        &self.range_fibers[x]
    }

    /// `G_x`: arrows with source `x`.
    pub fn source_fiber(&self, x: usize) -> &[usize] {
        &self.source_fibers[x]
    }

    pub fn arrow_id(&self, a: usize) -> &str {
        &self.arrows[a].id
    }

    pub fn unit_id(&self, x: usize) -> &str {
        &self.units[x]
    }

    pub fn unit_ids(&self) -> &[String] {
        &self.units
    }

    pub fn arrow_index(&self, id: &str) -> Option<usize> {
        self.arrow_index.get(id).copied()
    }

    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.unit_index.get(id).copied()
    }

    /// All composable pairs `(γ, γ')`.
    pub fn composable_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_arrows()).flat_map(move |a| self.range_fiber(self.src(a)).iter().map(move |&b| (a, b)))
    }

    /// Orbits of the unit space, each sorted, in order of smallest member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n_units()];
        let mut out = Vec::new();
        for x in 0..self.n_units() {
            if seen[x] {
                continue;
            }
            let orbit: BTreeSet<usize> = self.source_fiber(x).iter().map(|&a| self.dst(a)).collect();
            for &y in &orbit {
                seen[y] = true;
            }
            out.push(orbit.into_iter().collect());
        }
        out
    }

    /// Check every groupoid axiom, reporting each violation with its
    /// witnessing arrows.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.n_arrows();
        let id = |a: usize| self.arrows[a].id.clone();

        for x in 0..self.n_units() {
            let u = self.unit_arrow[x];
            if self.src(u) != x || self.dst(u) != x {
                report.push(
                    Axiom::UnitArrow,
                    vec![self.units[x].clone(), id(u)],
                    format!("unit arrow `{}` of `{}` does not start and end at it", id(u), self.units[x]),
                );
            }
        }

        for (a, b) in self.composable_pairs() {
            let ab = self.mul(a, b);
            if self.dst(ab) != self.dst(a) {
                report.push(
                    Axiom::RangeOfProduct,
                    vec![id(a), id(b), id(ab)],
                    format!("dst({}) = {} but dst({}) = {}", id(ab), self.units[self.dst(ab)], id(a), self.units[self.dst(a)]),
                );
            }
            if self.src(ab) != self.src(b) {
                report.push(
                    Axiom::SourceOfProduct,
                    vec![id(a), id(b), id(ab)],
                    format!("src({}) = {} but src({}) = {}", id(ab), self.units[self.src(ab)], id(b), self.units[self.src(b)]),
                );
            }
        }

        for a in 0..n {
            let left = self.unit_arrow[self.dst(a)];
            if self.compose(left, a) != Some(a) {
                report.push(Axiom::LeftUnit, vec![id(a)], format!("{}·{} != {}", id(left), id(a), id(a)));
            }
            let right = self.unit_arrow[self.src(a)];
            if self.compose(a, right) != Some(a) {
                report.push(Axiom::RightUnit, vec![id(a)], format!("{}·{} != {}", id(a), id(right), id(a)));
            }
            let inv = self.inverse[a];
            let mut broken = Vec::new();
            if self.compose(a, inv) != Some(self.unit_arrow[self.dst(a)]) {
                broken.push(format!("{}·{} is not the unit at {}", id(a), id(inv), self.units[self.dst(a)]));
            }
            if self.compose(inv, a) != Some(self.unit_arrow[self.src(a)]) {
                broken.push(format!("{}·{} is not the unit at {}", id(inv), id(a), self.units[self.src(a)]));
            }
            if !broken.is_empty() {
                report.push(Axiom::InverseLaw, vec![id(a), id(inv)], broken.join("; "));
            }
        }

        for (a, b) in self.composable_pairs() {
            for &c in self.range_fiber(self.src(b)) {
                let left = self.compose(a, b).and_then(|ab| self.compose(ab, c));
                let right = self.compose(b, c).and_then(|bc| self.compose(a, bc));
                if left.is_none() || left != right {
                    let show = |r: Option<usize>| r.map_or_else(|| "undefined".to_string(), id);
                    report.push(
                        Axiom::Associativity,
                        vec![id(a), id(b), id(c)],
                        format!("({}{}){} = {} but {}({}{}) = {}", id(a), id(b), id(c), show(left), id(a), id(b), id(c), show(right)),
                    );
                }
            }
        }
        report
    }
}

/// Left Haar system on a finite groupoid: one positive weight per arrow,
/// the mass of `γ` in the measure `λ^{dst γ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarSystem {
    weights: Vec<f64>,
}

impl HaarSystem {
    pub fn counting(g: &FiniteGroupoid) -> Self {
        Self { weights: vec![1.0; g.n_arrows()] }
    }

    pub fn from_weights(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    /// Left-invariant system with `weight(γ) = density[src γ]`. Every left
    /// invariant system on a finite groupoid has this form, since any two
    /// arrows with the same source differ by a left translation.
    pub fn from_unit_density(g: &FiniteGroupoid, density: &[f64]) -> Self {
        Self { weights: (0..g.n_arrows()).map(|a| density[g.src(a)]).collect() }
    }

    pub fn weight(&self, a: usize) -> f64 {
        self.weights[a]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_counting(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }
}

/// Positivity and left invariance `weight(γγ') = weight(γ')` over all
/// composable pairs. Weights are compared with relative tolerance 1e-12.
pub fn check_haar(g: &FiniteGroupoid, h: &HaarSystem) -> ValidationReport {
    let mut report = ValidationReport::default();
    if h.weights.len() != g.n_arrows() {
        report.push(
            Axiom::HaarPositivity,
            Vec::new(),
            format!("{} weights for {} arrows", h.weights.len(), g.n_arrows()),
        );
        return report;
    }
    for a in 0..g.n_arrows() {
        let w = h.weight(a);
        if !(w > 0.0 && w.is_finite()) {
            report.push(Axiom::HaarPositivity, vec![g.arrow_id(a).into()], format!("weight {w}"));
        }
    }
    for (a, b) in g.composable_pairs() {
        let ab = g.mul(a, b);
        let (wab, wb) = (h.weight(ab), h.weight(b));
        if (wab - wb).abs() > 1e-12 * wab.abs().max(wb.abs()) {
            report.push(
                Axiom::HaarInvariance,
                vec![g.arrow_id(a).into(), g.arrow_id(b).into()],
                format!("weight({}) = {wab} but weight({}) = {wb}", g.arrow_id(ab), g.arrow_id(b)),
            );
        }
    }
    report
}

/// Multiplication table of a finite group, `table[g][h] = gh`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTable {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructionError {
    #[error("group table is not a group: {0}")]
    NotAGroup(String),
    #[error("not a left action: {0}")]
    NotAnAction(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

impl GroupTable {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self, ConstructionError> {
        let n = table.len();
        let bad = |msg: String| Err(ConstructionError::NotAGroup(msg));
        if n == 0 {
            return bad("empty table".into());
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&v| v >= n)) {
            return bad("table must be square with entries in range".into());
        }
        let Some(identity) = (0..n).find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g)) else {
            return bad("no identity element".into());
        };
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return bad(format!("({a}{b}){c} != {a}({b}{c})"));
                    }
                }
            }
        }
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            match (0..n).find(|&h| table[g][h] == identity && table[h][g] == identity) {
                Some(h) => inverse.push(h),
                None => return bad(format!("element {g} has no inverse")),
            }
        }
        Ok(Self { table, identity, inverse })
    }

    pub fn cyclic(n: usize) -> Self {
        Self::new((0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect()).expect("Z/n is a group")
    }

    /// Z/2 × Z/2 with elements encoded as two bits.
    pub fn klein() -> Self {
        Self::new((0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect()).expect("Klein group")
    }

    /// The symmetric group on three letters, elements listed as permutations
    /// in lexicographic order, product `(στ)(i) = σ(τ(i))`.
    pub fn symmetric3() -> Self {
        let perms: Vec<[usize; 3]> =
            vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("closed");
        let table = perms
            .iter()
            .map(|s| perms.iter().map(|t| index([s[t[0]], s[t[1]], s[t[2]]])).collect())
            .collect();
        Self::new(table).expect("S3 is a group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }
}

/// Left action of a group on `{0..points}`, `action[g][x] = g·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAction {
    pub group: GroupTable,
    pub action: Vec<Vec<usize>>,
}

impl GroupAction {
    pub fn new(group: GroupTable, action: Vec<Vec<usize>>) -> Result<Self, ConstructionError> {
        let bad = |msg: String| Err(ConstructionError::NotAnAction(msg));
        if action.len() != group.order() {
            return bad(format!("{} rows for a group of order {}", action.len(), group.order()));
        }
        let points = action[0].len();
        if action.iter().any(|row| row.len() != points || row.iter().any(|&y| y >= points)) {
            return bad("rows must all map the point set into itself".into());
        }
        for x in 0..points {
            if action[group.identity()][x] != x {
                return bad(format!("identity moves point {x}"));
            }
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                for x in 0..points {
                    if action[g][action[h][x]] != action[group.mul(g, h)][x] {
                        return bad(format!("g={g}, h={h}: g·(h·{x}) != (gh)·{x}"));
                    }
                }
            }
        }
        Ok(Self { group, action })
    }

    pub fn points(&self) -> usize {
        self.action[0].len()
    }

    pub fn act(&self, g: usize, x: usize) -> usize {
        self.action[g][x]
    }
}

/// The standard finite groupoids.
#[derive(Debug, Clone, PartialEq)]
pub enum StandardKind {
    /// Pair groupoid on `n` points: arrows `(x,y)`, `(x,y)(y,z) = (x,z)`.
    Pair(usize),
    Group(GroupTable),
    /// Arrows `(x,g)` with dst `x`, src `g⁻¹·x`, `(x,g)(g⁻¹x,h) = (x,gh)`.
    Transformation(GroupAction),
    DisjointUnion(Box<StandardKind>, Box<StandardKind>),
}

/// Build a standard groupoid together with its counting Haar system.
pub fn make_standard(kind: &StandardKind) -> Result<(FiniteGroupoid, HaarSystem), ConstructionError> {
    let g = FiniteGroupoid::from_tables(&standard_tables(kind))?;
    let h = HaarSystem::counting(&g);
    Ok((g, h))
}

fn standard_tables(kind: &StandardKind) -> GroupoidTables {
    match kind {
        StandardKind::Pair(n) => {
            let n = *n;
            let arrow = |x: usize, y: usize| format!("({x},{y})");
            let mut t = empty_tables();
            for x in 0..n {
                t.units.push(UnitRecord { id: x.to_string(), unit_arrow: arrow(x, x) });
                for y in 0..n {
                    t.arrows.push(ArrowRecord { id: arrow(x, y), src: y.to_string(), dst: x.to_string() });
                    t.inverse.push([arrow(x, y), arrow(y, x)]);
                    for z in 0..n {
                        t.compose.push([arrow(x, y), arrow(y, z), arrow(x, z)]);
                    }
                }
            }
            t
        }
        StandardKind::Group(group) => {
            let mut t = empty_tables();
            t.units.push(UnitRecord { id: "e".into(), unit_arrow: group.identity().to_string() });
            for a in 0..group.order() {
                t.arrows.push(ArrowRecord { id: a.to_string(), src: "e".into(), dst: "e".into() });
                t.inverse.push([a.to_string(), group.inv(a).to_string()]);
                for b in 0..group.order() {
                    t.compose.push([a.to_string(), b.to_string(), group.mul(a, b).to_string()]);
                }
            }
            t
        }
        StandardKind::Transformation(action) => {
            let group = &action.group;
            let arrow = |x: usize, g: usize| format!("({x},{g})");
            let mut t = empty_tables();
            for x in 0..action.points() {
                t.units.push(UnitRecord { id: x.to_string(), unit_arrow: arrow(x, group.identity()) });
            }
            for x in 0..action.points() {
                for g in 0..group.order() {
                    let src = action.act(group.inv(g), x);
                    t.arrows.push(ArrowRecord { id: arrow(x, g), src: src.to_string(), dst: x.to_string() });
                    t.inverse.push([arrow(x, g), arrow(src, group.inv(g))]);
                    for h in 0..group.order() {
                        t.compose.push([arrow(x, g), arrow(src, h), arrow(x, group.mul(g, h))]);
                    }
                }
            }
            t
        }
        StandardKind::DisjointUnion(left, right) => {
            let mut t = empty_tables();
            for (tag, part) in [("0", standard_tables(left)), ("1", standard_tables(right))] {
                let p = |id: &str| format!("{tag}:{id}");
                t.units.extend(part.units.iter().map(|u| UnitRecord { id: p(&u.id), unit_arrow: p(&u.unit_arrow) }));
                t.arrows.extend(part.arrows.iter().map(|a| ArrowRecord { id: p(&a.id), src: p(&a.src), dst: p(&a.dst) }));
                t.compose.extend(part.compose.iter().map(|[a, b, c]| [p(a), p(b), p(c)]));
                t.inverse.extend(part.inverse.iter().map(|[a, b]| [p(a), p(b)]));
            }
            t
        }
    }
}

fn empty_tables() -> GroupoidTables {
    GroupoidTables { units: Vec::new(), arrows: Vec::new(), compose: Vec::new(), inverse: Vec::new() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(n: usize) -> FiniteGroupoid {
        make_standard(&StandardKind::Pair(n)).unwrap().0
    }

    #[test]
    fn pair_groupoid_is_valid() {
        let g = pair(3);
        assert!(g.validate().is_empty());
        assert_eq!(g.n_arrows(), 9);
        assert_eq!(g.n_units(), 3);
    }

    #[test]
    fn pair_two_counts() {
        let g = pair(2);
        assert_eq!(g.n_arrows(), 4);
        assert_eq!(g.n_units(), 2);
        for x in 0..2 {
            assert_eq!(g.range_fiber(x).len(), 2);
        }
    }

    #[test]
    fn cyclic_three_counts() {
        let (g, h) = make_standard(&StandardKind::Group(GroupTable::cyclic(3))).unwrap();
        assert_eq!((g.n_arrows(), g.n_units()), (3, 1));
        assert!(g.validate().is_empty());
        assert!(check_haar(&g, &h).is_empty());
    }

    #[test]
    fn swap_transformation_groupoid_by_enumeration() {
        let swap = GroupAction::new(GroupTable::cyclic(2), vec![vec![0, 1], vec![1, 0]]).unwrap();
        let (g, h) = make_standard(&StandardKind::Transformation(swap)).unwrap();
        assert_eq!((g.n_arrows(), g.n_units()), (4, 2));
        for x in 0..2 {
            assert_eq!(g.range_fiber(x).len(), 2);
        }
        // closure of composition over every (x,g),(y,h) pair, by brute force
        let mut closed = 0;
        for a in 0..4 {
            for b in 0..4 {
                if g.src(a) == g.dst(b) {
                    let ab = g.compose(a, b).expect("composable pair listed");
                    assert!(ab < 4);
                    closed += 1;
                }
            }
        }
        assert_eq!(closed, 8);
        assert!(g.validate().is_empty());
        assert!(check_haar(&g, &h).is_empty());
    }

    #[test]
    fn broken_range_of_product_is_reported_once() {
        let mut t = pair(2).to_tables();
        // (0,1)(1,1) should be (0,1); send it to (1,1) whose dst is 1
        for triple in t.compose.iter_mut() {
            if triple[0] == "(0,1)" && triple[1] == "(1,1)" {
                triple[2] = "(1,1)".into();
            }
        }
        let g = FiniteGroupoid::from_tables(&t).unwrap();
        let report = g.validate();
        assert_eq!(report.count(Axiom::RangeOfProduct), 1);
    }

    #[test]
    fn bad_inverse_in_z2() {
        let mut t = make_standard(&StandardKind::Group(GroupTable::cyclic(2))).unwrap().0.to_tables();
        t.inverse[1] = ["1".into(), "0".into()];
        let g = FiniteGroupoid::from_tables(&t).unwrap();
        let report = g.validate();
        assert_eq!(report.count(Axiom::InverseLaw), 1);
        let v = report.violations.iter().find(|v| v.axiom == Axiom::InverseLaw).unwrap();
        assert_eq!(v.witnesses[0], "1");
    }

    #[test]
    fn unresolved_ids_are_table_errors() {
        let mut t = pair(2).to_tables();
        t.arrows[0].src = "9".into();
        assert!(matches!(FiniteGroupoid::from_tables(&t), Err(TableError::UnknownUnit { .. })));
        let mut t = pair(2).to_tables();
        t.inverse.pop();
        assert!(matches!(FiniteGroupoid::from_tables(&t), Err(TableError::MissingInverse(_))));
        let mut t = pair(2).to_tables();
        t.compose.pop();
        assert!(matches!(FiniteGroupoid::from_tables(&t), Err(TableError::MissingCompose(..))));
    }

    #[test]
    fn haar_weights_depending_on_source() {
        let g = pair(2);
        // weight(x,y) depends on y only
        let h = HaarSystem::from_weights((0..4).map(|a| if g.src(a) == 0 { 1.0 } else { 2.0 }).collect());
        let mut brute_ok = true;
        for (a, b) in g.composable_pairs() {
            brute_ok &= h.weight(g.mul(a, b)) == h.weight(b);
        }
        assert!(brute_ok);
        assert!(check_haar(&g, &h).is_empty());
    }

    #[test]
    fn haar_weights_breaking_invariance() {
        let g = pair(2);
        let w: Vec<f64> = (0..4).map(|a| if g.arrow_id(a) == "(1,0)" { 2.0 } else { 1.0 }).collect();
        let h = HaarSystem::from_weights(w);
        let witness = g.composable_pairs().find(|&(a, b)| h.weight(g.mul(a, b)) != h.weight(b));
        assert!(witness.is_some());
        assert!(check_haar(&g, &h).count(Axiom::HaarInvariance) > 0);
    }

    #[test]
    fn non_group_and_non_action_are_rejected() {
        assert!(GroupTable::new(vec![vec![0, 1], vec![0, 1]]).is_err());
        let z2 = GroupTable::cyclic(2);
        assert!(GroupAction::new(z2, vec![vec![0, 1, 2], vec![1, 2, 0]]).is_err());
    }

    #[test]
    fn disjoint_union_and_s3() {
        let kind = StandardKind::DisjointUnion(
            Box::new(StandardKind::Pair(2)),
            Box::new(StandardKind::Group(GroupTable::symmetric3())),
        );
        let (g, h) = make_standard(&kind).unwrap();
        assert_eq!(g.n_arrows(), 10);
        assert_eq!(g.orbits().len(), 2);
        assert!(g.validate().is_empty());
        assert!(check_haar(&g, &h).is_empty());
        assert!(make_standard(&StandardKind::Group(GroupTable::klein())).unwrap().0.validate().is_empty());
    }

    #[test]
    fn tables_round_trip() {
        let g = pair(3);
        assert_eq!(FiniteGroupoid::from_tables(&g.to_tables()).unwrap(), g);
    }
}
