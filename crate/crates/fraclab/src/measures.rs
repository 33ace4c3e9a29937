//! Outer measures over `R^n` with staged lower-semicomputable
//! approximations.
//!
//! The concrete measures are
//!
//! * `kappa(E) = 2^(-K(E))` — two to the minus the least pointwise
//!   complexity in `E`;
//! * `nu(E) = sum 2^(-K(q))` over rational points of `E`;
//! * the algorithmic-probability measure `m(E) = sum m(q)`, where `m(q)`
//!   is the census weight of `q`'s encoding.
//!
//! Infinite sets resolve against the enumerated support of a complexity
//! table; balls evaluated under `kappa` share the precision-candidate grid
//! with the pointwise complexity `K_r`, so the two sides of the local
//! dimension identity agree bit for bit.
//!
//! A [`MeasureRegistry`] holds staged approximators `M_k(A, t)` with a
//! declared cost model. On top of it sit the clocked-simulation
//! functionals [`tau_k`], [`eta_k`], and [`theta_hat_k`] (a minimum over
//! set partitions, computed by dynamic programming over subset masks) and
//! the mixture `sum_k 2^-(k+1) theta_hat_k`, which dominates every
//! registry entry term by term.

use crate::geometry::{
    encode_point, Ball, DyadicCube, KEvaluator, KValue, PointSpec, RationalPoint,
};
use crate::machine::MACHINE_VERSION;
use crate::numeric::{pow2, pow2_neg};
use crate::table::ComplexityTable;
use num::rational::BigRational;
use num::traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Cap on the finite sets fed to the subset-partition machinery; the
/// dynamic program walks all `3^|A|` (block, rest) pairs.
pub const MAX_STAGED_SET: usize = 12;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("table was built by machine {found}, this build is {expected}")]
    VersionMismatch { found: String, expected: String },
    #[error("staged-set size {0} exceeds the cap {MAX_STAGED_SET}")]
    SetTooLarge(usize),
    #[error("unknown measure {0:?}")]
    UnknownMeasure(String),
    #[error("unknown registry entry kind {0:?}")]
    UnknownRegistryKind(String),
    #[error("registry index {0} out of range")]
    RegistryIndex(usize),
    #[error("malformed registry file: {0}")]
    RegistryFormat(String),
    #[error("registry must hold at least two entries, got {0}")]
    RegistryTooSmall(usize),
}

/// A support point of the enumerated table: an output that decodes to a
/// canonical point of `Q^n`, with its complexity and census weight.
#[derive(Debug, Clone)]
pub struct SupportPoint {
    pub point: RationalPoint,
    pub k: u32,
    pub census: BigRational,
}

/// Immutable evaluation context: the table, its decoded support in
/// decreasing weight order, and a shared shortest-program evaluator.
pub struct EvalContext {
    table: ComplexityTable,
    eval: KEvaluator,
    n: usize,
    guard: u32,
    support: Vec<SupportPoint>,
    nu_total: BigRational,
    m_total: BigRational,
}

impl EvalContext {
    pub fn new(table: ComplexityTable, n: usize, guard: u32) -> Result<Self, MeasureError> {
        if table.machine() != MACHINE_VERSION {
            return Err(MeasureError::VersionMismatch {
                found: table.machine().to_string(),
                expected: MACHINE_VERSION.to_string(),
            });
        }
        let mut support = Vec::new();
        for (output, entry) in table.outputs() {
            if let Ok(point) = crate::geometry::decode_point(output, n) {
                support.push(SupportPoint {
                    point,
                    k: entry.min_len,
                    census: entry.census(),
                });
            }
        }
        // Decreasing weight order: complexity ascending, point order as a
        // deterministic tiebreak.
        support.sort_by(|a, b| a.k.cmp(&b.k).then_with(|| a.point.cmp(&b.point)));
        let nu_total = support.iter().map(|s| pow2_neg(s.k)).sum();
        let m_total = support.iter().map(|s| s.census.clone()).sum();
        Ok(EvalContext {
            table,
            eval: KEvaluator::new(),
            n,
            guard,
            support,
            nu_total,
            m_total,
        })
    }

    pub fn table(&self) -> &ComplexityTable {
        &self.table
    }

    pub fn k_eval(&self) -> &KEvaluator {
        &self.eval
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn guard(&self) -> u32 {
        self.guard
    }

    pub fn support(&self) -> &[SupportPoint] {
        &self.support
    }

    /// Total `nu` mass of the enumerated support.
    pub fn nu_total(&self) -> &BigRational {
        &self.nu_total
    }

    /// Total census mass of the enumerated support.
    pub fn m_total(&self) -> &BigRational {
        &self.m_total
    }

    /// Support points lying in a query set.
    pub fn support_in<'a>(&'a self, query: &SetQuery) -> Vec<&'a SupportPoint> {
        match query {
            SetQuery::Finite(points) => {
                let set: BTreeSet<&RationalPoint> = points.iter().collect();
                self.support
                    .iter()
                    .filter(|s| set.contains(&s.point))
                    .collect()
            }
            SetQuery::Cube(cube) => self
                .support
                .iter()
                .filter(|s| cube.contains(&s.point))
                .collect(),
            SetQuery::Ball(ball) => self
                .support
                .iter()
                .filter(|s| ball.contains(&s.point))
                .collect(),
            SetQuery::CoFinite(points) => {
                let set: BTreeSet<&RationalPoint> = points.iter().collect();
                self.support
                    .iter()
                    .filter(|s| !set.contains(&s.point))
                    .collect()
            }
        }
    }
}

impl fmt::Debug for EvalContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvalContext")
            .field("l_max", &self.table.l_max())
            .field("budget", &self.table.budget())
            .field("n", &self.n)
            .field("support", &self.support.len())
            .finish()
    }
}

/// A set of `R^n` described well enough to evaluate measures on it.
/// Infinite sets resolve against the enumerated support; balls under
/// `kappa` use the precision-candidate grid instead (see module docs).
#[derive(Debug, Clone)]
pub enum SetQuery {
    Finite(Vec<RationalPoint>),
    Cube(DyadicCube),
    Ball(Ball),
    /// Complement of a finite set.
    CoFinite(Vec<RationalPoint>),
}

impl SetQuery {
    pub fn empty() -> Self {
        SetQuery::Finite(Vec::new())
    }

    /// All of `R^n`.
    pub fn all() -> Self {
        SetQuery::CoFinite(Vec::new())
    }
}

impl fmt::Display for SetQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetQuery::Finite(ps) if ps.is_empty() => write!(f, "{{}}"),
            SetQuery::Finite(ps) => {
                write!(f, "{{")?;
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "}}")
            }
            SetQuery::Cube(c) => write!(f, "{c}"),
            SetQuery::Ball(b) => write!(f, "{b}"),
            SetQuery::CoFinite(ps) if ps.is_empty() => write!(f, "R^n"),
            SetQuery::CoFinite(ps) => write!(f, "R^n minus {} points", ps.len()),
        }
    }
}

fn dedup_points(points: &[RationalPoint]) -> Vec<&RationalPoint> {
    let set: BTreeSet<&RationalPoint> = points.iter().collect();
    set.into_iter().collect()
}

/// An outer measure evaluable on set queries.
pub trait OuterMeasure: Send + Sync {
    fn name(&self) -> &str;
    fn eval(&self, ctx: &EvalContext, query: &SetQuery) -> BigRational;
    /// Whether a zero value on a cube or ball may merely reflect support
    /// not yet enumerated at the table's resource bound.
    fn zero_is_budget_limited(&self) -> bool {
        true
    }
}

/// `kappa(E) = 2^(-K(E))`.
pub struct Kappa;

impl Kappa {
    /// The complexity `K(E)` backing the measure value.
    pub fn k_of_query(ctx: &EvalContext, query: &SetQuery) -> KValue {
        match query {
            SetQuery::Finite(points) => ctx.eval.k_of_set(dedup_points(points)),
            SetQuery::Cube(_) | SetQuery::CoFinite(_) => {
                // Support is sorted by ascending complexity.
                ctx.support_in(query)
                    .first()
                    .map(|s| KValue::Finite(s.k))
                    .unwrap_or(KValue::Infinite)
            }
            SetQuery::Ball(ball) => KValue::Finite(crate::geometry::k_at_precision(
                &ctx.eval,
                &PointSpec::Exact(ball.center.clone()),
                ball.r,
                ctx.guard,
            )),
        }
    }
}

impl OuterMeasure for Kappa {
    fn name(&self) -> &str {
        "kappa"
    }

    fn eval(&self, ctx: &EvalContext, query: &SetQuery) -> BigRational {
        Self::k_of_query(ctx, query).kappa()
    }
}

/// `nu(E) = sum over rational points of E of 2^(-K(q))`.
pub struct Nu;

impl OuterMeasure for Nu {
    fn name(&self) -> &str {
        "nu"
    }

    fn eval(&self, ctx: &EvalContext, query: &SetQuery) -> BigRational {
        match query {
            SetQuery::Finite(points) => dedup_points(points)
                .into_iter()
                .map(|p| pow2_neg(ctx.eval.k_of_point(p)))
                .sum(),
            SetQuery::Cube(_) | SetQuery::Ball(_) => ctx
                .support_in(query)
                .into_iter()
                .map(|s| pow2_neg(s.k))
                .sum(),
            SetQuery::CoFinite(points) => {
                let excluded: BigRational = ctx
                    .support_in(&SetQuery::Finite(points.clone()))
                    .into_iter()
                    .map(|s| pow2_neg(s.k))
                    .sum();
                ctx.nu_total.clone() - excluded
            }
        }
    }
}

/// The lifted algorithmic-probability measure: `m(E) = sum m(q)` with
/// `m(q)` the census weight of `q`'s encoding.
pub struct MMeasure;

impl OuterMeasure for MMeasure {
    fn name(&self) -> &str {
        "m"
    }

    fn eval(&self, ctx: &EvalContext, query: &SetQuery) -> BigRational {
        match query {
            SetQuery::Finite(points) => dedup_points(points)
                .into_iter()
                .map(|p| ctx.table.census(&encode_point(p)))
                .sum(),
            SetQuery::Cube(_) | SetQuery::Ball(_) => ctx
                .support_in(query)
                .into_iter()
                .map(|s| s.census.clone())
                .sum(),
            SetQuery::CoFinite(points) => {
                let excluded: BigRational = ctx
                    .support_in(&SetQuery::Finite(points.clone()))
                    .into_iter()
                    .map(|s| s.census.clone())
                    .sum();
                ctx.m_total.clone() - excluded
            }
        }
    }
}

/// The degenerate zero measure; useful as a domination counterexample.
pub struct ZeroMeasure;

impl OuterMeasure for ZeroMeasure {
    fn name(&self) -> &str {
        "zero"
    }

    fn eval(&self, _ctx: &EvalContext, _query: &SetQuery) -> BigRational {
        BigRational::zero()
    }

    fn zero_is_budget_limited(&self) -> bool {
        false
    }
}

/// A measure scaled by an exact power of two; scaling shifts every
/// domination gap by exactly the exponent.
pub struct ScaledMeasure {
    pub inner: Box<dyn OuterMeasure>,
    pub log2_factor: i32,
    name: String,
}

impl ScaledMeasure {
    pub fn new(inner: Box<dyn OuterMeasure>, log2_factor: i32) -> Self {
        let name = format!("{}*2^{}", inner.name(), log2_factor);
        ScaledMeasure {
            inner,
            log2_factor,
            name,
        }
    }
}

impl OuterMeasure for ScaledMeasure {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, ctx: &EvalContext, query: &SetQuery) -> BigRational {
        let base = self.inner.eval(ctx, query);
        if self.log2_factor >= 0 {
            base * pow2(self.log2_factor as u32)
        } else {
            base * pow2_neg((-self.log2_factor) as u32)
        }
    }

    fn zero_is_budget_limited(&self) -> bool {
        self.inner.zero_is_budget_limited()
    }
}

/// `kappa` restricted to points whose encodings have even length: a
/// strongly finite measure that fails to dominate `kappa` on cubes whose
/// support is odd-length only.
pub struct EvenEncodingKappa;

impl EvenEncodingKappa {
    fn even(q: &RationalPoint) -> bool {
        encode_point(q).len() % 2 == 0
    }
}

impl OuterMeasure for EvenEncodingKappa {
    fn name(&self) -> &str {
        "kappa_even"
    }

    fn eval(&self, ctx: &EvalContext, query: &SetQuery) -> BigRational {
        match query {
            SetQuery::Finite(points) => {
                let filtered: Vec<&RationalPoint> = dedup_points(points)
                    .into_iter()
                    .filter(|p| Self::even(p))
                    .collect();
                ctx.eval.k_of_set(filtered).kappa()
            }
            SetQuery::Ball(ball) => {
                let candidates = crate::geometry::ball_candidates(
                    &PointSpec::Exact(ball.center.clone()),
                    ball.r,
                    ctx.guard,
                );
                let filtered: Vec<&RationalPoint> =
                    candidates.iter().filter(|p| Self::even(p)).collect();
                ctx.eval.k_of_set(filtered).kappa()
            }
            SetQuery::Cube(_) | SetQuery::CoFinite(_) => ctx
                .support_in(query)
                .into_iter()
                .filter(|s| Self::even(&s.point))
                .map(|s| KValue::Finite(s.k).kappa())
                .max()
                .unwrap_or_else(BigRational::zero),
        }
    }
}

/// Built-in measure lookup for the command surface.
pub fn outer_measure_by_name(name: &str) -> Result<Box<dyn OuterMeasure>, MeasureError> {
    match name {
        "kappa" => Ok(Box::new(Kappa)),
        "nu" => Ok(Box::new(Nu)),
        "m" => Ok(Box::new(MMeasure)),
        "zero" => Ok(Box::new(ZeroMeasure)),
        "kappa_even" => Ok(Box::new(EvenEncodingKappa)),
        other => Err(MeasureError::UnknownMeasure(other.to_string())),
    }
}

// ---- staged measures ---------------------------------------------------

/// A lower-semicomputable outer measure presented as a staged approximator
/// `M(A, t)` with a declared simulated cost model.
///
/// Contract: `approx` is monotone in the stage, vanishes on the empty set,
/// and its limit is monotone in `A`; the empty set completes within any
/// budget.
pub trait StagedMeasure: Send + Sync {
    fn name(&self) -> &str;
    fn approx(&self, ctx: &EvalContext, points: &[RationalPoint], stage: u32) -> BigRational;
    /// Simulated step count charged for evaluating `(points, stage)`.
    fn cost(&self, points: &[RationalPoint], stage: u32) -> u64;
    fn singleton_weight(&self, ctx: &EvalContext, q: &RationalPoint) -> BigRational;
    /// Support stream in decreasing weight order.
    fn support_stream(&self, ctx: &EvalContext, limit: usize)
        -> Vec<(RationalPoint, BigRational)>;
}

fn staged_cap(ctx: &EvalContext, stage: u32) -> u32 {
    stage.min(ctx.table.l_max())
}

/// Staged `kappa`: at stage `t` only programs of length at most
/// `min(t, L)` are admitted, so values grow with the stage.
pub struct KappaHat;

impl StagedMeasure for KappaHat {
    fn name(&self) -> &str {
        "kappa_hat"
    }

    fn approx(&self, ctx: &EvalContext, points: &[RationalPoint], stage: u32) -> BigRational {
        let cap = staged_cap(ctx, stage);
        dedup_points(points)
            .into_iter()
            .map(|p| {
                let k = ctx.eval.k_of_point(p);
                if k <= cap {
                    pow2_neg(k)
                } else {
                    BigRational::zero()
                }
            })
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    fn cost(&self, _points: &[RationalPoint], stage: u32) -> u64 {
        u64::from(stage)
    }

    fn singleton_weight(&self, ctx: &EvalContext, q: &RationalPoint) -> BigRational {
        pow2_neg(ctx.eval.k_of_point(q))
    }

    fn support_stream(
        &self,
        ctx: &EvalContext,
        limit: usize,
    ) -> Vec<(RationalPoint, BigRational)> {
        ctx.support
            .iter()
            .take(limit)
            .map(|s| (s.point.clone(), pow2_neg(s.k)))
            .collect()
    }
}

/// Staged `nu`: the pointwise sum with the same length gate.
pub struct NuHat;

impl StagedMeasure for NuHat {
    fn name(&self) -> &str {
        "nu_hat"
    }

    fn approx(&self, ctx: &EvalContext, points: &[RationalPoint], stage: u32) -> BigRational {
        let cap = staged_cap(ctx, stage);
        dedup_points(points)
            .into_iter()
            .map(|p| {
                let k = ctx.eval.k_of_point(p);
                if k <= cap {
                    pow2_neg(k)
                } else {
                    BigRational::zero()
                }
            })
            .sum()
    }

    fn cost(&self, _points: &[RationalPoint], stage: u32) -> u64 {
        u64::from(stage)
    }

    fn singleton_weight(&self, ctx: &EvalContext, q: &RationalPoint) -> BigRational {
        pow2_neg(ctx.eval.k_of_point(q))
    }

    fn support_stream(
        &self,
        ctx: &EvalContext,
        limit: usize,
    ) -> Vec<(RationalPoint, BigRational)> {
        KappaHat.support_stream(ctx, limit)
    }
}

/// Staged algorithmic probability: censuses restricted to programs of
/// length at most the stage.
pub struct MHat;

impl StagedMeasure for MHat {
    fn name(&self) -> &str {
        "m_hat"
    }

    fn approx(&self, ctx: &EvalContext, points: &[RationalPoint], stage: u32) -> BigRational {
        let cap = staged_cap(ctx, stage);
        dedup_points(points)
            .into_iter()
            .map(|p| {
                ctx.table
                    .entry(&encode_point(p))
                    .map(|e| e.census_up_to(cap))
                    .unwrap_or_else(BigRational::zero)
            })
            .sum()
    }

    fn cost(&self, _points: &[RationalPoint], stage: u32) -> u64 {
        u64::from(stage)
    }

    fn singleton_weight(&self, ctx: &EvalContext, q: &RationalPoint) -> BigRational {
        ctx.table.census(&encode_point(q))
    }

    fn support_stream(
        &self,
        ctx: &EvalContext,
        limit: usize,
    ) -> Vec<(RationalPoint, BigRational)> {
        let mut all: Vec<(RationalPoint, BigRational)> = ctx
            .support
            .iter()
            .map(|s| (s.point.clone(), s.census.clone()))
            .collect();
        all.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        all.truncate(limit);
        all
    }
}

/// The cardinality fixture `A -> 1 - 2^(-min(|A|, t))`: a genuine outer
/// measure, supported on the rationals but *not* strongly finite — every
/// singleton weighs 1/2, so singleton sums diverge.
pub struct CardinalityFixture;

impl StagedMeasure for CardinalityFixture {
    fn name(&self) -> &str {
        "example_cardinality"
    }

    fn approx(&self, _ctx: &EvalContext, points: &[RationalPoint], stage: u32) -> BigRational {
        let distinct = dedup_points(points).len() as u32;
        BigRational::one() - pow2_neg(distinct.min(stage))
    }

    fn cost(&self, _points: &[RationalPoint], stage: u32) -> u64 {
        u64::from(stage)
    }

    fn singleton_weight(&self, _ctx: &EvalContext, _q: &RationalPoint) -> BigRational {
        BigRational::new(1.into(), 2.into())
    }

    fn support_stream(
        &self,
        ctx: &EvalContext,
        limit: usize,
    ) -> Vec<(RationalPoint, BigRational)> {
        ctx.support
            .iter()
            .take(limit)
            .map(|s| (s.point.clone(), BigRational::new(1.into(), 2.into())))
            .collect()
    }
}

/// Cardinality fixture with a deliberately slow, set-dependent cost model:
/// evaluating `(B, s)` costs `s * (1 + |B|)` simulated steps. Exercises
/// the clocked-simulation functionals; excluded from the default registry.
pub struct SlowCardinalityFixture;

impl StagedMeasure for SlowCardinalityFixture {
    fn name(&self) -> &str {
        "slow_example"
    }

    fn approx(&self, ctx: &EvalContext, points: &[RationalPoint], stage: u32) -> BigRational {
        CardinalityFixture.approx(ctx, points, stage)
    }

    fn cost(&self, points: &[RationalPoint], stage: u32) -> u64 {
        u64::from(stage) * (1 + points.len() as u64)
    }

    fn singleton_weight(&self, ctx: &EvalContext, q: &RationalPoint) -> BigRational {
        CardinalityFixture.singleton_weight(ctx, q)
    }

    fn support_stream(
        &self,
        ctx: &EvalContext,
        limit: usize,
    ) -> Vec<(RationalPoint, BigRational)> {
        CardinalityFixture.support_stream(ctx, limit)
    }
}

/// A finite, configured stand-in for an enumeration of all staged
/// measures. Indices are stable across a run.
pub struct MeasureRegistry {
    entries: Vec<Box<dyn StagedMeasure>>,
}

impl MeasureRegistry {
    pub fn new(entries: Vec<Box<dyn StagedMeasure>>) -> Result<Self, MeasureError> {
        if entries.len() < 2 {
            return Err(MeasureError::RegistryTooSmall(entries.len()));
        }
        Ok(MeasureRegistry { entries })
    }

    /// The default registry: the three concrete staged measures plus the
    /// cardinality fixture. All four use the uniform cost model, which
    /// keeps the stagewise functionals monotone in their set argument.
    pub fn default_registry() -> Self {
        MeasureRegistry {
            entries: vec![
                Box::new(KappaHat),
                Box::new(NuHat),
                Box::new(MHat),
                Box::new(CardinalityFixture),
            ],
        }
    }

    pub fn staged_by_kind(kind: &str) -> Result<Box<dyn StagedMeasure>, MeasureError> {
        match kind {
            "kappa_hat" => Ok(Box::new(KappaHat)),
            "nu_hat" => Ok(Box::new(NuHat)),
            "m_hat" => Ok(Box::new(MHat)),
            "example_cardinality" => Ok(Box::new(CardinalityFixture)),
            "slow_example" => Ok(Box::new(SlowCardinalityFixture)),
            other => Err(MeasureError::UnknownRegistryKind(other.to_string())),
        }
    }

    /// Declarative configuration: a JSON array of `{"kind": ...}` entries.
    pub fn from_json(v: &serde_json::Value) -> Result<Self, MeasureError> {
        let arr = v
            .as_array()
            .ok_or_else(|| MeasureError::RegistryFormat("expected a JSON array".into()))?;
        let mut entries = Vec::new();
        for item in arr {
            let kind = item["kind"]
                .as_str()
                .ok_or_else(|| MeasureError::RegistryFormat("entry without kind".into()))?;
            entries.push(Self::staged_by_kind(kind)?);
        }
        Self::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<&dyn StagedMeasure> {
        self.entries.get(k).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}

// ---- clocked-simulation functionals ------------------------------------

fn mask_points(a: &[RationalPoint], mask: u64) -> Vec<RationalPoint> {
    a.iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, p)| p.clone())
        .collect()
}

fn check_set_size(a: &[RationalPoint]) -> Result<(), MeasureError> {
    if a.len() > MAX_STAGED_SET {
        return Err(MeasureError::SetTooLarge(a.len()));
    }
    Ok(())
}

fn registry_entry<'r>(
    reg: &'r MeasureRegistry,
    k: usize,
) -> Result<&'r dyn StagedMeasure, MeasureError> {
    reg.get(k).ok_or(MeasureError::RegistryIndex(k))
}

/// Largest stage every subset of `A` can be simulated through within a
/// per-call budget of `t` steps: the minimum over `B` of the largest
/// `s <= t` such that evaluating `(B, s')` completes for all `s' <= s`.
/// Zero when some subset never completes at this budget; the empty set
/// always completes, so `tau_k(emptyset, t) = t`.
pub fn tau_k(
    reg: &MeasureRegistry,
    k: usize,
    a: &[RationalPoint],
    t: u32,
) -> Result<u32, MeasureError> {
    check_set_size(a)?;
    let measure = registry_entry(reg, k)?;
    let budget = u64::from(t);
    let mut best = t;
    for mask in 0..(1u64 << a.len()) {
        let points = mask_points(a, mask);
        if points.is_empty() {
            continue;
        }
        let mut reach = 0u32;
        for s in 0..=t {
            if measure.cost(&points, s) <= budget {
                reach = s;
            } else {
                break;
            }
        }
        best = best.min(reach);
    }
    Ok(best)
}

/// Best approximator value over subsets of `A` and stages `<= t` whose
/// simulated evaluations complete within `big_t` steps; zero if none do.
pub fn eta_k(
    reg: &MeasureRegistry,
    k: usize,
    ctx: &EvalContext,
    a: &[RationalPoint],
    t: u32,
    big_t: u64,
) -> Result<BigRational, MeasureError> {
    check_set_size(a)?;
    let measure = registry_entry(reg, k)?;
    let mut best = BigRational::zero();
    for mask in 0..(1u64 << a.len()) {
        let points = mask_points(a, mask);
        let mut prev: Option<BigRational> = None;
        for s in 0..=t {
            if points.is_empty() || measure.cost(&points, s) <= big_t {
                let v = measure.approx(ctx, &points, s);
                if let Some(p) = &prev {
                    debug_assert!(
                        p <= &v,
                        "stage monotonicity violated by {}",
                        measure.name()
                    );
                }
                if v > best {
                    best = v.clone();
                }
                prev = Some(v);
            }
        }
    }
    Ok(best)
}

/// The result of the cover minimisation: the value and the partition of
/// the index set attaining it (empty for the empty set).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaHat {
    pub value: BigRational,
    /// Blocks as bit masks over the input slice; ties resolve to the
    /// lexicographically smallest partition for reproducibility.
    pub partition: Vec<u64>,
}

/// `theta_hat_k(A, t)`: minimum over covers of `A` by subsets of `A` of
/// `sum_i eta_k(A_i, tau_k(A, t), t)`. Because `eta_k` is monotone under
/// set inclusion, some optimal cover is a partition, so the minimum is
/// computed over partitions by dynamic programming on subset masks.
pub fn theta_hat_k(
    reg: &MeasureRegistry,
    k: usize,
    ctx: &EvalContext,
    a: &[RationalPoint],
    t: u32,
) -> Result<ThetaHat, MeasureError> {
    check_set_size(a)?;
    let measure = registry_entry(reg, k)?;
    let n = a.len();
    if n == 0 {
        return Ok(ThetaHat {
            value: BigRational::zero(),
            partition: Vec::new(),
        });
    }
    let tau = tau_k(reg, k, a, t)?;
    let big_t = u64::from(t);
    let full = (1u64 << n) - 1;

    // eta over every subset mask at (tau, t). The max over sub-subsets
    // decomposes over one-element drops, so build bottom-up.
    let mut own = vec![BigRational::zero(); (full + 1) as usize];
    for mask in 1..=full {
        let points = mask_points(a, mask);
        let mut best = BigRational::zero();
        for s in 0..=tau {
            if measure.cost(&points, s) <= big_t {
                let v = measure.approx(ctx, &points, s);
                if v > best {
                    best = v;
                }
            }
        }
        own[mask as usize] = best;
    }
    let mut eta = vec![BigRational::zero(); (full + 1) as usize];
    for mask in 1..=full {
        let mut best = own[mask as usize].clone();
        for i in 0..n {
            if mask & (1 << i) != 0 {
                let sub = mask & !(1 << i);
                if eta[sub as usize] > best {
                    best = eta[sub as usize].clone();
                }
            }
        }
        eta[mask as usize] = best;
    }

    // Partition DP anchored at the lowest set bit; ties pick the smaller
    // block mask so the recorded partition is reproducible.
    let mut dp: Vec<Option<BigRational>> = vec![None; (full + 1) as usize];
    let mut choice = vec![0u64; (full + 1) as usize];
    dp[0] = Some(BigRational::zero());
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let mut best: Option<(BigRational, u64)> = None;
        let mut sub = mask;
        while sub > 0 {
            if sub & low != 0 {
                let rest = mask & !sub;
                let cand = eta[sub as usize].clone() + dp[rest as usize].clone().expect("filled");
                let better = match &best {
                    None => true,
                    Some((v, b)) => cand < *v || (cand == *v && sub < *b),
                };
                if better {
                    best = Some((cand, sub));
                }
            }
            sub = (sub - 1) & mask;
        }
        let (v, b) = best.expect("the one-block cover always exists");
        dp[mask as usize] = Some(v);
        choice[mask as usize] = b;
    }

    let mut partition = Vec::new();
    let mut rest = full;
    while rest != 0 {
        let block = choice[rest as usize];
        partition.push(block);
        rest &= !block;
    }
    partition.sort_unstable();
    Ok(ThetaHat {
        value: dp[full as usize].clone().expect("filled"),
        partition,
    })
}

/// Convergence trace for the double limit `A -> E, t -> infinity`.
#[derive(Debug, Clone)]
pub struct ThetaTrace {
    pub k: usize,
    pub final_value: BigRational,
    /// `(|A|, t, value)` along nested support prefixes and growing stage
    /// budgets.
    pub trace: Vec<(usize, u32, BigRational)>,
}

/// Evaluate `theta_k` on a set query: take the heaviest support points of
/// the query (capped), push the stage budget to its limit, and report the
/// monotone convergence trace along the way.
pub fn theta_k_eval(
    reg: &MeasureRegistry,
    k: usize,
    ctx: &EvalContext,
    query: &SetQuery,
    a_budget: usize,
    t_budget: u32,
) -> Result<ThetaTrace, MeasureError> {
    let measure = registry_entry(reg, k)?;
    let in_query: Vec<RationalPoint> = match query {
        SetQuery::Finite(points) => dedup_points(points).into_iter().cloned().collect(),
        other => ctx
            .support_in(other)
            .into_iter()
            .map(|s| s.point.clone())
            .collect(),
    };
    // The measure's own weight order, restricted to the query; query
    // points outside the support stream keep their relative order after.
    let stream = measure.support_stream(ctx, usize::MAX);
    let mut a: Vec<RationalPoint> = stream
        .into_iter()
        .map(|(p, _)| p)
        .filter(|p| in_query.contains(p))
        .collect();
    for p in &in_query {
        if !a.contains(p) {
            a.push(p.clone());
        }
    }
    a.truncate(a_budget.min(MAX_STAGED_SET));

    let mut sizes: Vec<usize> = Vec::new();
    let mut s = 1usize;
    while s < a.len() {
        sizes.push(s);
        s *= 2;
    }
    sizes.push(a.len());
    let mut stages: Vec<u32> = Vec::new();
    let mut t = 1u32;
    while t < t_budget {
        stages.push(t);
        t *= 2;
    }
    stages.push(t_budget);

    let mut trace = Vec::new();
    for &len in &sizes {
        for &stage in &stages {
            let v = theta_hat_k(reg, k, ctx, &a[..len], stage)?;
            trace.push((len, stage, v.value));
        }
    }
    let final_value = trace
        .last()
        .map(|(_, _, v)| v.clone())
        .unwrap_or_else(BigRational::zero);
    Ok(ThetaTrace {
        k,
        final_value,
        trace,
    })
}

/// The mixture `sum_{k <= min(t, K-1)} 2^(-(k+1)) theta_hat_k(A, t)`:
/// exceeds each registered term scaled by its weight, which is the
/// domination property a globally dominating measure needs.
pub fn mixture_theta(
    reg: &MeasureRegistry,
    ctx: &EvalContext,
    a: &[RationalPoint],
    t: u32,
) -> Result<BigRational, MeasureError> {
    let mut total = BigRational::zero();
    for k in 0..reg.len().min(t as usize + 1) {
        let term = theta_hat_k(reg, k, ctx, a, t)?;
        total += pow2_neg(k as u32 + 1) * term.value;
    }
    Ok(total)
}

// ---- axiom and finiteness checkers -------------------------------------

#[derive(Debug, Clone)]
pub struct AxiomViolation {
    pub family: usize,
    pub what: String,
}

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub measure: String,
    pub families: usize,
    pub checks_run: usize,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "measure": self.measure,
            "families": self.families,
            "checks_run": self.checks_run,
            "violations": self.violations.iter()
                .map(|v| serde_json::json!({"family": v.family, "what": v.what}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Verify the outer-measure axioms on seeded random finite families from
/// `pool`: the empty set measures zero, monotonicity on nested pairs, and
/// finite subadditivity on covering families.
pub fn check_outer_measure_axioms<F>(
    name: &str,
    eval: F,
    pool: &[RationalPoint],
    families: usize,
    seed: u64,
) -> AxiomReport
where
    F: Fn(&[RationalPoint]) -> BigRational,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let mut checks = 0usize;

    let empty = eval(&[]);
    checks += 1;
    if !empty.is_zero() {
        violations.push(AxiomViolation {
            family: 0,
            what: format!("mu(empty) = {empty} != 0"),
        });
    }

    for family in 0..families {
        let max_take = pool.len().min(8).max(1);
        let take = rng.gen_range(1..=max_take);
        let mut f_set: Vec<RationalPoint> =
            pool.choose_multiple(&mut rng, take).cloned().collect();
        f_set.sort();
        let e_set: Vec<RationalPoint> = f_set
            .iter()
            .filter(|_| rng.gen_bool(0.6))
            .cloned()
            .collect();

        let mu_f = eval(&f_set);
        let mu_e = eval(&e_set);
        checks += 1;
        if mu_e > mu_f {
            violations.push(AxiomViolation {
                family,
                what: format!("monotonicity: mu(E)={mu_e} > mu(F)={mu_f}"),
            });
        }

        // Covering pieces: each member lands in one random piece, then
        // noise points may join.
        let pieces = rng.gen_range(1..=3usize);
        let mut parts: Vec<Vec<RationalPoint>> = vec![Vec::new(); pieces];
        for p in &f_set {
            let i = rng.gen_range(0..pieces);
            parts[i].push(p.clone());
        }
        for part in parts.iter_mut() {
            if rng.gen_bool(0.5) {
                if let Some(extra) = pool.choose(&mut rng) {
                    part.push(extra.clone());
                }
            }
            part.sort();
            part.dedup();
        }
        let sum: BigRational = parts.iter().map(|p| eval(p)).sum();
        checks += 1;
        if mu_f > sum {
            violations.push(AxiomViolation {
                family,
                what: format!("subadditivity: mu(F)={mu_f} > sum={sum}"),
            });
        }
    }

    AxiomReport {
        measure: name.to_string(),
        families,
        checks_run: checks,
        violations,
    }
}

/// Partial-sum trace of singleton weights in decreasing order; detects
/// measures that are supported but not strongly finite.
#[derive(Debug, Clone)]
pub struct FinitenessTrace {
    pub measure: String,
    pub partial_sums: Vec<BigRational>,
    pub bounded_by_one: bool,
}

pub fn check_strong_finiteness<I>(name: &str, weights: I, budget: usize) -> FinitenessTrace
where
    I: IntoIterator<Item = BigRational>,
{
    let mut partial_sums = Vec::with_capacity(budget);
    let mut acc = BigRational::zero();
    for w in weights.into_iter().take(budget) {
        acc += w;
        partial_sums.push(acc.clone());
    }
    let bounded_by_one = partial_sums.iter().all(|s| *s <= BigRational::one());
    FinitenessTrace {
        measure: name.to_string(),
        partial_sums,
        bounded_by_one,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rational;
    use std::sync::LazyLock;

    static CTX: LazyLock<EvalContext> = LazyLock::new(|| {
        let table = ComplexityTable::build(16, 1024).unwrap();
        EvalContext::new(table, 1, 2).unwrap()
    });

    fn pt(n: i64, d: i64) -> RationalPoint {
        RationalPoint::one_dim(rational(n, d))
    }

    #[test]
    fn support_is_nonempty_and_weight_ordered() {
        let ctx = &*CTX;
        assert!(!ctx.support().is_empty());
        for pair in ctx.support().windows(2) {
            assert!(pair[0].k <= pair[1].k);
        }
        // The origin decodes from "011" and is the cheapest point.
        assert_eq!(ctx.support()[0].point, pt(0, 1));
    }

    #[test]
    fn kappa_examples() {
        let ctx = &*CTX;
        assert!(Kappa.eval(ctx, &SetQuery::empty()).is_zero());
        let q = pt(0, 1);
        let k = ctx.k_eval().k_of_point(&q);
        assert_eq!(Kappa.eval(ctx, &SetQuery::Finite(vec![q])), pow2_neg(k));
    }

    #[test]
    fn kappa_ball_matches_precision_complexity() {
        let ctx = &*CTX;
        let x = pt(1, 3);
        for r in 1..=8u32 {
            let ball = Ball::new(x.clone(), r);
            let via_measure = Kappa.eval(ctx, &SetQuery::Ball(ball));
            let k = crate::geometry::k_at_precision(
                ctx.k_eval(),
                &PointSpec::Exact(x.clone()),
                r,
                ctx.guard(),
            );
            assert_eq!(via_measure, pow2_neg(k));
        }
    }

    #[test]
    fn nu_dominates_kappa_and_is_bounded() {
        let ctx = &*CTX;
        let queries = [
            SetQuery::Finite(vec![pt(0, 1), pt(1, 2), pt(-1, 3)]),
            SetQuery::Cube(crate::geometry::cube_of_point(&pt(0, 1), 2)),
            SetQuery::all(),
        ];
        for q in &queries {
            assert!(Nu.eval(ctx, q) >= Kappa::k_of_query(ctx, q).kappa());
        }
        assert!(Nu.eval(ctx, &SetQuery::all()) <= BigRational::one());
    }

    #[test]
    fn m_examples() {
        let ctx = &*CTX;
        assert!(MMeasure.eval(ctx, &SetQuery::empty()).is_zero());
        // The minimal program is one census summand.
        let q = pt(0, 1);
        let k = ctx.k_eval().k_of_point(&q);
        assert!(MMeasure.eval(ctx, &SetQuery::Finite(vec![q])) >= pow2_neg(k));
        assert!(MMeasure.eval(ctx, &SetQuery::all()) <= BigRational::one());
    }

    #[test]
    fn cofinite_resolution() {
        let ctx = &*CTX;
        let first = ctx.support()[0].point.clone();
        let rest = Nu.eval(ctx, &SetQuery::CoFinite(vec![first.clone()]));
        let total = Nu.eval(ctx, &SetQuery::all());
        let single = Nu.eval(ctx, &SetQuery::Finite(vec![first.clone()]));
        assert_eq!(rest + single, total);
        // kappa on the complement skips the cheapest point.
        let k_rest = Kappa::k_of_query(ctx, &SetQuery::CoFinite(vec![first]));
        assert!(k_rest >= KValue::Finite(ctx.support()[0].k));
    }

    #[test]
    fn scaled_measure_multiplies_exactly() {
        let ctx = &*CTX;
        let scaled = ScaledMeasure::new(Box::new(Nu), 10);
        let q = SetQuery::Finite(vec![pt(0, 1), pt(1, 2)]);
        assert_eq!(scaled.eval(ctx, &q), Nu.eval(ctx, &q) * pow2(10));
    }

    #[test]
    fn tau_empty_set_is_full_budget() {
        let reg = MeasureRegistry::default_registry();
        assert_eq!(tau_k(&reg, 0, &[], 16).unwrap(), 16);
    }

    #[test]
    fn tau_monotone_in_budget() {
        let reg = MeasureRegistry::new(vec![
            Box::new(SlowCardinalityFixture),
            Box::new(CardinalityFixture),
        ])
        .unwrap();
        let a = [pt(0, 1), pt(1, 2)];
        let mut last = 0;
        for t in [4u32, 8, 16, 32] {
            let tau = tau_k(&reg, 0, &a, t).unwrap();
            assert!(tau >= last);
            last = tau;
        }
    }

    #[test]
    fn tau_slow_fixture_matches_subset_brute_force() {
        let reg = MeasureRegistry::new(vec![
            Box::new(SlowCardinalityFixture),
            Box::new(CardinalityFixture),
        ])
        .unwrap();
        let a = [pt(0, 1), pt(1, 2), pt(1, 3)];
        let t = 16u32;
        // Oracle: direct scan over all eight subsets.
        let mut expected = t;
        for mask in 0u64..8 {
            let pts = mask_points(&a, mask);
            if pts.is_empty() {
                continue;
            }
            let mut reach = 0;
            for s in 0..=t {
                if SlowCardinalityFixture.cost(&pts, s) <= u64::from(t) {
                    reach = s;
                } else {
                    break;
                }
            }
            expected = expected.min(reach);
        }
        assert_eq!(tau_k(&reg, 0, &a, t).unwrap(), expected);
        // With cost s*(1+|B|) and the full 3-set, stages cap at t/4.
        assert_eq!(expected, 4);
    }

    #[test]
    fn eta_examples_and_brute_force() {
        let reg = MeasureRegistry::new(vec![
            Box::new(SlowCardinalityFixture),
            Box::new(CardinalityFixture),
        ])
        .unwrap();
        assert!(eta_k(&reg, 0, &CTX, &[], 8, 64).unwrap().is_zero());
        let a = [pt(0, 1), pt(1, 2), pt(1, 3)];
        let t = 6u32;
        let big_t = 20u64;
        let mut expected = BigRational::zero();
        for mask in 0u64..8 {
            let pts = mask_points(&a, mask);
            for s in 0..=t {
                if pts.is_empty() || SlowCardinalityFixture.cost(&pts, s) <= big_t {
                    let v = SlowCardinalityFixture.approx(&CTX, &pts, s);
                    if v > expected {
                        expected = v;
                    }
                }
            }
        }
        assert_eq!(eta_k(&reg, 0, &CTX, &a, t, big_t).unwrap(), expected);
        // Monotone in every argument.
        let base = eta_k(&reg, 0, &CTX, &a[..2], 4, 16).unwrap();
        assert!(eta_k(&reg, 0, &CTX, &a, 4, 16).unwrap() >= base);
        assert!(eta_k(&reg, 0, &CTX, &a[..2], 6, 16).unwrap() >= base);
        assert!(eta_k(&reg, 0, &CTX, &a[..2], 4, 64).unwrap() >= base);
    }

    /// Independent cover oracle: memoised minimisation over all covers of
    /// the index set by arbitrary subsets, overlaps allowed.
    fn brute_force_cover_min(
        reg: &MeasureRegistry,
        k: usize,
        ctx: &EvalContext,
        a: &[RationalPoint],
        t: u32,
    ) -> BigRational {
        let n = a.len();
        if n == 0 {
            return BigRational::zero();
        }
        let tau = tau_k(reg, k, a, t).unwrap();
        let full = (1u64 << n) - 1;
        let etas: Vec<BigRational> = (0..=full)
            .map(|mask| eta_k(reg, k, ctx, &mask_points(a, mask), tau, u64::from(t)).unwrap())
            .collect();
        // cover[uncovered]: cheapest way to finish covering `uncovered`,
        // where blocks may overlap already-covered ground.
        let mut cover: Vec<Option<BigRational>> = vec![None; (full + 1) as usize];
        cover[0] = Some(BigRational::zero());
        fn solve(
            uncovered: u64,
            full: u64,
            etas: &[BigRational],
            cover: &mut Vec<Option<BigRational>>,
        ) -> BigRational {
            if let Some(v) = &cover[uncovered as usize] {
                return v.clone();
            }
            let low = uncovered & uncovered.wrapping_neg();
            let mut best: Option<BigRational> = None;
            for block in 1..=full {
                if block & low != 0 {
                    let rest = uncovered & !block;
                    let cand = etas[block as usize].clone() + solve(rest, full, etas, cover);
                    if best.as_ref().map(|b| cand < *b).unwrap_or(true) {
                        best = Some(cand);
                    }
                }
            }
            let v = best.expect("some block covers the lowest element");
            cover[uncovered as usize] = Some(v.clone());
            v
        }
        solve(full, full, &etas, &mut cover)
    }

    #[test]
    fn theta_hat_trivial_cases() {
        let reg = MeasureRegistry::default_registry();
        let empty = theta_hat_k(&reg, 0, &CTX, &[], 8).unwrap();
        assert!(empty.value.is_zero());
        assert!(empty.partition.is_empty());

        let single = [pt(0, 1)];
        let th = theta_hat_k(&reg, 0, &CTX, &single, 16).unwrap();
        let tau = tau_k(&reg, 0, &single, 16).unwrap();
        let e = eta_k(&reg, 0, &CTX, &single, tau, 16).unwrap();
        assert_eq!(th.value, e);
        assert_eq!(th.partition, vec![1]);
    }

    #[test]
    fn theta_hat_matches_cover_brute_force() {
        let reg = MeasureRegistry::default_registry();
        let points = [pt(0, 1), pt(1, 2), pt(-1, 2), pt(1, 3)];
        for k in 0..reg.len() {
            for len in 0..=points.len() {
                let a = &points[..len];
                let got = theta_hat_k(&reg, k, &CTX, a, 20).unwrap();
                let expected = brute_force_cover_min(&reg, k, &CTX, a, 20);
                assert_eq!(got.value, expected, "k={k} len={len}");
            }
        }
    }

    #[test]
    fn theta_hat_bounded_by_one_block() {
        let reg = MeasureRegistry::default_registry();
        let a = [pt(0, 1), pt(1, 2), pt(1, 3)];
        for k in 0..reg.len() {
            let tau = tau_k(&reg, k, &a, 12).unwrap();
            let th = theta_hat_k(&reg, k, &CTX, &a, 12).unwrap();
            assert!(th.value <= eta_k(&reg, k, &CTX, &a, tau, 12).unwrap());
        }
    }

    #[test]
    fn theta_hat_finitely_subadditive() {
        let reg = MeasureRegistry::default_registry();
        let a = [pt(0, 1), pt(1, 2), pt(1, 3), pt(-1, 2)];
        let parts: [&[RationalPoint]; 2] = [&a[..2], &a[2..]];
        for k in 0..reg.len() {
            let whole = theta_hat_k(&reg, k, &CTX, &a, 16).unwrap().value;
            let sum: BigRational = parts
                .iter()
                .map(|p| theta_hat_k(&reg, k, &CTX, p, 16).unwrap().value)
                .sum();
            assert!(whole <= sum, "k={k}");
        }
    }

    #[test]
    fn theta_trace_monotone_in_stage() {
        let reg = MeasureRegistry::default_registry();
        let query = SetQuery::all();
        for k in 0..reg.len() {
            let trace = theta_k_eval(&reg, k, &CTX, &query, 6, 16).unwrap();
            let mut by_len: std::collections::BTreeMap<usize, Vec<(u32, BigRational)>> =
                Default::default();
            for (len, t, v) in &trace.trace {
                by_len.entry(*len).or_default().push((*t, v.clone()));
            }
            for (_, seq) in by_len {
                for pair in seq.windows(2) {
                    assert!(pair[0].1 <= pair[1].1, "k={k}");
                }
            }
        }
    }

    #[test]
    fn theta_eval_empty_is_zero() {
        let reg = MeasureRegistry::default_registry();
        let trace = theta_k_eval(&reg, 0, &CTX, &SetQuery::empty(), 8, 8).unwrap();
        assert!(trace.final_value.is_zero());
    }

    #[test]
    fn cardinality_fixture_reaches_closed_form() {
        let reg = MeasureRegistry::default_registry();
        // Entry 3 is the cardinality fixture with limit 1 - 2^(-|A|).
        let a = [pt(0, 1), pt(1, 2), pt(1, 3)];
        let th = theta_hat_k(&reg, 3, &CTX, &a, 32).unwrap();
        assert_eq!(th.value, BigRational::one() - pow2_neg(3));
    }

    #[test]
    fn mixture_dominates_each_term() {
        let reg = MeasureRegistry::default_registry();
        let a = [pt(0, 1), pt(1, 2)];
        for t in [2u32, 8, 16] {
            let mix = mixture_theta(&reg, &CTX, &a, t).unwrap();
            for k in 0..reg.len().min(t as usize + 1) {
                let term = theta_hat_k(&reg, k, &CTX, &a, t).unwrap().value;
                assert!(mix >= pow2_neg(k as u32 + 1) * term, "k={k} t={t}");
            }
            assert!(mixture_theta(&reg, &CTX, &[], t).unwrap().is_zero());
        }
        // Monotone in t.
        let m1 = mixture_theta(&reg, &CTX, &a, 4).unwrap();
        let m2 = mixture_theta(&reg, &CTX, &a, 12).unwrap();
        assert!(m1 <= m2);
    }

    #[test]
    fn axioms_hold_for_concrete_measures() {
        let ctx = &*CTX;
        let pool: Vec<RationalPoint> = ctx
            .support()
            .iter()
            .take(40)
            .map(|s| s.point.clone())
            .collect();
        let cases: Vec<(&str, Box<dyn Fn(&[RationalPoint]) -> BigRational>)> = vec![
            (
                "kappa",
                Box::new(|pts: &[RationalPoint]| Kappa.eval(ctx, &SetQuery::Finite(pts.to_vec()))),
            ),
            (
                "nu",
                Box::new(|pts: &[RationalPoint]| Nu.eval(ctx, &SetQuery::Finite(pts.to_vec()))),
            ),
            (
                "m",
                Box::new(|pts: &[RationalPoint]| {
                    MMeasure.eval(ctx, &SetQuery::Finite(pts.to_vec()))
                }),
            ),
            (
                "example_cardinality",
                Box::new(|pts: &[RationalPoint]| CardinalityFixture.approx(ctx, pts, u32::MAX)),
            ),
        ];
        for (name, eval) in cases {
            let report = check_outer_measure_axioms(name, eval, &pool, 60, 424242);
            assert!(report.passed(), "{name}: {:?}", report.violations);
        }
    }

    #[test]
    fn nu_subadditivity_tight_on_disjoint_sets() {
        let ctx = &*CTX;
        let a = vec![pt(0, 1), pt(1, 2)];
        let b = vec![pt(1, 3), pt(-1, 2)];
        let mut union = a.clone();
        union.extend(b.clone());
        let lhs = Nu.eval(ctx, &SetQuery::Finite(union));
        let rhs = Nu.eval(ctx, &SetQuery::Finite(a)) + Nu.eval(ctx, &SetQuery::Finite(b));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn strong_finiteness_verdicts() {
        let ctx = &*CTX;
        let kappa_weights = ctx.support().iter().map(|s| pow2_neg(s.k));
        let t = check_strong_finiteness("kappa", kappa_weights, 200);
        assert!(t.bounded_by_one);
        for pair in t.partial_sums.windows(2) {
            assert!(pair[0] <= pair[1]);
        }

        let m_weights = ctx.support().iter().map(|s| s.census.clone());
        assert!(check_strong_finiteness("m", m_weights, 200).bounded_by_one);

        let example = std::iter::repeat(BigRational::new(1.into(), 2.into()));
        let t = check_strong_finiteness("example_cardinality", example, 50);
        assert!(!t.bounded_by_one, "divergence must be detected");
    }

    #[test]
    fn registry_config_round_trip() {
        let json: serde_json::Value = serde_json::json!([
            {"kind": "kappa_hat"},
            {"kind": "nu_hat"},
            {"kind": "m_hat"},
            {"kind": "example_cardinality"},
        ]);
        let reg = MeasureRegistry::from_json(&json).unwrap();
        assert_eq!(
            reg.names(),
            vec!["kappa_hat", "nu_hat", "m_hat", "example_cardinality"]
        );
        assert!(MeasureRegistry::from_json(&serde_json::json!([{"kind": "kappa_hat"}])).is_err());
        assert!(MeasureRegistry::from_json(
            &serde_json::json!([{"kind": "nope"}, {"kind": "nu_hat"}])
        )
        .is_err());
    }

    #[test]
    fn set_too_large_is_rejected() {
        let reg = MeasureRegistry::default_registry();
        let a: Vec<RationalPoint> = (1..=13).map(|i| pt(i, 1)).collect();
        assert!(matches!(
            theta_hat_k(&reg, 0, &CTX, &a, 4),
            Err(MeasureError::SetTooLarge(13))
        ));
    }
}
