//! Exact rational geometry: points of `Q^n`, their prefix-free machine
//! encodings, dyadic cubes, open balls, and pointwise complexities.
//!
//! Everything is decided in exact rational arithmetic. Points with
//! non-rational coordinates enter as deterministic binary-expansion
//! generators and are handled through certified interval bounds.

use crate::bits::{gamma_decode, gamma_encode_big, BitString};
use crate::numeric::{floor_big, pow2_neg};
use crate::table::{exact_k, min_len_lower_bound};
use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;
use thiserror::Error;

pub type Rational = BigRational;

/// Ambient dimension cap; the encoding is prefix-free only with `n` fixed.
pub const MAX_DIM: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("ambient dimension must be between 1 and {MAX_DIM}, got {0}")]
    BadDimension(usize),
    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("encoding is not a canonical point encoding: {0}")]
    Decode(String),
}

/// Convenience constructor for small rationals.
pub fn rational(numer: i64, denom: i64) -> Rational {
    BigRational::new(numer.into(), denom.into())
}

/// A point of `Q^n`. Coordinates stay canonical (gcd one, positive
/// denominator) because the rational type normalises on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPoint {
    coords: Vec<Rational>,
}

impl RationalPoint {
    pub fn new(coords: Vec<Rational>) -> Result<Self, GeometryError> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(GeometryError::BadDimension(coords.len()));
        }
        Ok(RationalPoint { coords })
    }

    pub fn one_dim(x: Rational) -> Self {
        RationalPoint { coords: vec![x] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize) -> &Rational {
        &self.coords[i]
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    /// Squared Euclidean distance, exact.
    pub fn dist_sq(&self, other: &RationalPoint) -> Rational {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                let d = a - b;
                &d * &d
            })
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coords
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "num": c.numer().to_string(),
                        "den": c.denom().to_string(),
                    })
                })
                .collect(),
        )
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The half-open dyadic cube `2^(-r) * prod [m_i, m_i + 1)`. At fixed `r`
/// the cubes of distinct addresses partition `R^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicCube {
    r: u32,
    address: Vec<BigInt>,
}

impl DyadicCube {
    pub fn new(r: u32, address: Vec<BigInt>) -> Result<Self, GeometryError> {
        if address.is_empty() || address.len() > MAX_DIM {
            return Err(GeometryError::BadDimension(address.len()));
        }
        Ok(DyadicCube { r, address })
    }

    pub fn resolution(&self) -> u32 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.address.len()
    }

    pub fn address(&self) -> &[BigInt] {
        &self.address
    }

    /// Lower corner coordinate in axis `i`: `m_i / 2^r`, inclusive.
    pub fn lower(&self, i: usize) -> Rational {
        BigRational::new(self.address[i].clone(), BigInt::one() << self.r)
    }

    /// Upper corner coordinate in axis `i`: `(m_i + 1) / 2^r`, exclusive.
    pub fn upper(&self, i: usize) -> Rational {
        BigRational::new(&self.address[i] + 1, BigInt::one() << self.r)
    }

    pub fn side(&self) -> Rational {
        pow2_neg(self.r)
    }

    pub fn center(&self) -> RationalPoint {
        let coords = (0..self.dim())
            .map(|i| BigRational::new((&self.address[i] << 1) + 1, BigInt::one() << (self.r + 1)))
            .collect();
        RationalPoint { coords }
    }

    /// Half-open membership: `lower <= x < upper` in every axis.
    pub fn contains(&self, x: &RationalPoint) -> bool {
        debug_assert_eq!(x.dim(), self.dim());
        (0..self.dim()).all(|i| *x.coord(i) >= self.lower(i) && *x.coord(i) < self.upper(i))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "r": self.r,
            "address": self.address.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q^({})[", self.r)?;
        for (i, m) in self.address.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "]")
    }
}

/// An open Euclidean ball of radius `2^(-r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    pub center: RationalPoint,
    pub r: u32,
}

impl Ball {
    pub fn new(center: RationalPoint, r: u32) -> Self {
        Ball { center, r }
    }

    pub fn radius(&self) -> Rational {
        pow2_neg(self.r)
    }

    pub fn radius_sq(&self) -> Rational {
        pow2_neg(2 * self.r)
    }

    /// Strict membership (the ball is open).
    pub fn contains(&self, q: &RationalPoint) -> bool {
        self.center.dist_sq(q) < self.radius_sq()
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B({}, 2^-{})", self.center, self.r)
    }
}

// ---- encodings -------------------------------------------------------

/// Prefix-free encoding of a rational point, coordinate by coordinate:
/// one sign bit, `gamma(|numerator| + 1)`, `gamma(denominator)`.
/// Injective on canonical rationals; prefix-free with `n` fixed.
pub fn encode_point(q: &RationalPoint) -> BitString {
    let mut out = BitString::new();
    for c in q.coords() {
        out.push(c.numer().is_negative());
        let abs_num = c.numer().magnitude() + BigUint::one();
        out.extend_from(&gamma_encode_big(&abs_num).expect("positive"));
        out.extend_from(&gamma_encode_big(c.denom().magnitude()).expect("denominator >= 1"));
    }
    out
}

/// Decode a point encoding, insisting on canonical form and full
/// consumption of the input. The inverse of [`encode_point`].
pub fn decode_point(bits: &BitString, n: usize) -> Result<RationalPoint, GeometryError> {
    if n == 0 || n > MAX_DIM {
        return Err(GeometryError::BadDimension(n));
    }
    let mut pos = 0usize;
    let mut coords = Vec::with_capacity(n);
    for _ in 0..n {
        if pos >= bits.len() {
            return Err(GeometryError::Decode("truncated coordinate".into()));
        }
        let negative = bits.bit(pos);
        pos += 1;
        let (num_plus_one, next) =
            gamma_decode(bits, pos).map_err(|e| GeometryError::Decode(e.to_string()))?;
        pos = next;
        let (den, next) =
            gamma_decode(bits, pos).map_err(|e| GeometryError::Decode(e.to_string()))?;
        pos = next;
        let abs_num = num_plus_one - BigUint::one();
        if abs_num.is_zero() {
            if negative {
                return Err(GeometryError::Decode("negative zero".into()));
            }
            if !den.is_one() {
                return Err(GeometryError::Decode("zero with denominator != 1".into()));
            }
        } else if num::Integer::gcd(&abs_num, &den) != BigUint::one() {
            return Err(GeometryError::Decode("not in lowest terms".into()));
        }
        let mut numer = BigInt::from(abs_num);
        if negative {
            numer = -numer;
        }
        coords.push(BigRational::new_raw(numer, BigInt::from(den)));
    }
    if pos != bits.len() {
        return Err(GeometryError::Decode("trailing bits".into()));
    }
    RationalPoint::new(coords)
}

// ---- pointwise complexity --------------------------------------------

/// Complexity of a set: minimum pointwise complexity, with an infinite
/// sentinel for the empty set (where the induced measure kappa is zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum KValue {
    Finite(u32),
    Infinite,
}

impl KValue {
    pub fn bits(self) -> Option<u32> {
        match self {
            KValue::Finite(k) => Some(k),
            KValue::Infinite => None,
        }
    }

    /// `2^(-K)`, or zero for the infinite sentinel.
    pub fn kappa(self) -> BigRational {
        match self {
            KValue::Finite(k) => pow2_neg(k),
            KValue::Infinite => BigRational::zero(),
        }
    }
}

impl fmt::Display for KValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KValue::Finite(k) => write!(f, "{k}"),
            KValue::Infinite => write!(f, "inf"),
        }
    }
}

/// Memoised shortest-program evaluator. The cache is shared and
/// thread-safe; all queries are pure.
#[derive(Debug, Default)]
pub struct KEvaluator {
    memo: Mutex<HashMap<BitString, u32>>,
}

impl KEvaluator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn k_of_bits(&self, w: &BitString) -> u32 {
        if let Some(&k) = self.memo.lock().unwrap().get(w) {
            return k;
        }
        let k = exact_k(w);
        self.memo.lock().unwrap().insert(w.clone(), k);
        k
    }

    /// `K(q)`: the exact minimal program length whose output is the
    /// encoding of `q` — the machine prints the encoding itself.
    pub fn k_of_point(&self, q: &RationalPoint) -> u32 {
        self.k_of_bits(&encode_point(q))
    }

    /// `K(E) = min K(q)` over a finite set, infinite on the empty set.
    pub fn k_of_set<'a, I: IntoIterator<Item = &'a RationalPoint>>(&self, points: I) -> KValue {
        let mut encodings: Vec<BitString> = points.into_iter().map(encode_point).collect();
        if encodings.is_empty() {
            return KValue::Infinite;
        }
        // Cheapest encodings first so the output-length bound can prune.
        encodings.sort_by_key(|e| e.len());
        let mut best = u32::MAX;
        for enc in encodings {
            if min_len_lower_bound(enc.len()) >= best {
                break;
            }
            best = best.min(self.k_of_bits(&enc));
        }
        KValue::Finite(best)
    }
}

// ---- dyadic grid ------------------------------------------------------

/// The `r`-dyadic cube containing `x`: address `floor(2^r x_i)` per axis,
/// with exact floors rounding toward minus infinity.
pub fn cube_of_point(x: &RationalPoint, r: u32) -> DyadicCube {
    let scale = BigInt::one() << r;
    let address = x
        .coords()
        .iter()
        .map(|c| floor_big(&(c * BigRational::from_integer(scale.clone()))))
        .collect();
    DyadicCube { r, address }
}

/// Exact intersection test between an open ball and a half-open cube.
///
/// The open ball meets the half-open box exactly when the squared distance
/// from the center to the *closed* box is strictly below the squared
/// radius: strictness leaves room to move off an excluded upper facet, and
/// no closed-box point in range means no box point at all.
pub fn ball_intersects_cube(b: &Ball, q: &DyadicCube) -> bool {
    debug_assert_eq!(b.center.dim(), q.dim());
    let mut dist_sq = BigRational::zero();
    for i in 0..q.dim() {
        let c = b.center.coord(i);
        let lo = q.lower(i);
        let hi = q.upper(i);
        let gap = if *c < lo {
            lo - c
        } else if *c > hi {
            c - hi
        } else {
            BigRational::zero()
        };
        dist_sq += &gap * &gap;
    }
    dist_sq < b.radius_sq()
}

/// The `5^n` grid points `2^(-r) (floor(2^r q_i) + d)` for
/// `d in {-2,-1,0,1,2}` per axis, in lexicographic order. Any `r`-dyadic
/// cube holding a point within `2^(1-r)` of `q` has its address inside the
/// corresponding integer product set.
pub fn neighbor_product_set(q: &RationalPoint, r: u32) -> Vec<RationalPoint> {
    let scale = BigInt::one() << r;
    let floors: Vec<BigInt> = q
        .coords()
        .iter()
        .map(|c| floor_big(&(c * BigRational::from_integer(scale.clone()))))
        .collect();
    let n = q.dim();
    let mut out = Vec::with_capacity(5usize.pow(n as u32));
    let mut idx = vec![0i64; n];
    let mut done = false;
    while !done {
        let coords: Vec<Rational> = (0..n)
            .map(|i| BigRational::new(&floors[i] + (idx[i] - 2), scale.clone()))
            .collect();
        out.push(RationalPoint { coords });
        let mut axis = n;
        loop {
            if axis == 0 {
                done = true;
                break;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < 5 {
                break;
            }
            idx[axis] = 0;
        }
    }
    out
}

// ---- point descriptors and precision complexity ------------------------

/// Deterministic bit stream describing one coordinate's binary expansion
/// in `[0, 1)`.
#[derive(Debug, Clone)]
pub enum BitGen {
    /// `pre` then `cycle` repeated forever — exactly the eventually
    /// periodic expansions, i.e. the rationals.
    Periodic { pre: Vec<bool>, cycle: Vec<bool> },
    /// Seeded pseudorandom bits.
    Pseudorandom { seed: u64 },
}

impl BitGen {
    pub fn bit(&self, i: usize) -> bool {
        match self {
            BitGen::Periodic { pre, cycle } => {
                if i < pre.len() {
                    pre[i]
                } else {
                    cycle[(i - pre.len()) % cycle.len()]
                }
            }
            BitGen::Pseudorandom { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut byte = 0u8;
                for _ in 0..=(i / 8) {
                    byte = (rng.next_u32() & 0xff) as u8;
                }
                byte & (0x80 >> (i % 8)) != 0
            }
        }
    }

    /// Truncation to `p` bits: a dyadic rational `v` with
    /// `v <= x < v + 2^(-p)`.
    pub fn truncation(&self, p: usize) -> Rational {
        let mut num = BigInt::zero();
        for i in 0..p {
            num <<= 1;
            if self.bit(i) {
                num += 1;
            }
        }
        BigRational::new(num, BigInt::one() << p)
    }
}

/// A point given exactly or coordinatewise as binary-expansion generators.
#[derive(Debug, Clone)]
pub enum PointSpec {
    Exact(RationalPoint),
    Stream(Vec<BitGen>),
}

impl PointSpec {
    pub fn dim(&self) -> usize {
        match self {
            PointSpec::Exact(p) => p.dim(),
            PointSpec::Stream(gens) => gens.len(),
        }
    }

    /// Certified per-coordinate interval `[lo, hi]` containing the point.
    /// Exact points give degenerate intervals; streams are truncated to
    /// `p` bits.
    pub fn intervals(&self, p: usize) -> Vec<(Rational, Rational)> {
        match self {
            PointSpec::Exact(pt) => pt.coords().iter().map(|c| (c.clone(), c.clone())).collect(),
            PointSpec::Stream(gens) => gens
                .iter()
                .map(|g| {
                    let lo = g.truncation(p);
                    let hi = &lo + pow2_neg(p as u32);
                    (lo, hi)
                })
                .collect(),
        }
    }

    pub fn exact(&self) -> Option<&RationalPoint> {
        match self {
            PointSpec::Exact(p) => Some(p),
            PointSpec::Stream(_) => None,
        }
    }
}

/// Largest integer strictly below `x`.
fn largest_int_below(x: &BigRational) -> BigInt {
    let f = floor_big(x);
    if &BigRational::from_integer(f.clone()) == x {
        f - 1
    } else {
        f
    }
}

/// Candidate set for precision-`r` complexity: every dyadic rational with
/// denominator dividing `2^(r + guard)` certifiably within open Euclidean
/// distance `2^(-r)` of `x`, plus `x` itself when given exactly. Stream
/// coordinates are certified at `2r + 8` truncation bits; candidates whose
/// membership is ambiguous at that precision are excluded.
pub fn ball_candidates(x: &PointSpec, r: u32, guard: u32) -> Vec<RationalPoint> {
    let n = x.dim();
    let m = r + guard;
    let scale = BigInt::one() << m;
    let scale_rat = BigRational::from_integer(scale.clone());
    let radius = pow2_neg(r);
    let radius_sq = pow2_neg(2 * r);
    let intervals = x.intervals(2 * r as usize + 8);

    // Integer candidate ranges per axis: k/2^m inside the open slab.
    let mut ranges: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for (lo, hi) in &intervals {
        let a = (lo - &radius) * &scale_rat;
        let b = (hi + &radius) * &scale_rat;
        let k_lo: BigInt = floor_big(&a) + 1;
        let k_hi = largest_int_below(&b);
        let mut axis = Vec::new();
        let mut k = k_lo;
        while k <= k_hi {
            axis.push(k.clone());
            k += 1;
        }
        ranges.push(axis);
    }

    let mut out = Vec::new();
    if ranges.iter().all(|range| !range.is_empty()) {
        let mut idx = vec![0usize; n];
        let mut done = false;
        while !done {
            let coords: Vec<Rational> = (0..n)
                .map(|i| BigRational::new(ranges[i][idx[i]].clone(), scale.clone()))
                .collect();
            let q = RationalPoint { coords };
            // Certified strict containment: worst-case squared distance
            // over the coordinate intervals stays below the radius.
            let mut worst = BigRational::zero();
            for i in 0..n {
                let (lo, hi) = &intervals[i];
                let d_lo = (q.coord(i) - hi).abs();
                let d_hi = (q.coord(i) - lo).abs();
                let far = if d_lo > d_hi { d_lo } else { d_hi };
                worst += &far * &far;
            }
            if worst < radius_sq {
                out.push(q);
            }
            let mut axis = n;
            loop {
                if axis == 0 {
                    done = true;
                    break;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < ranges[axis].len() {
                    break;
                }
                idx[axis] = 0;
            }
        }
    }

    if let Some(pt) = x.exact() {
        out.push(pt.clone());
    }
    out.sort();
    out.dedup();
    out
}

/// `K_r(x)`: minimal pointwise complexity over the precision-`r` candidate
/// set. The grid at `r + guard` always meets the open ball, so the minimum
/// exists.
pub fn k_at_precision(eval: &KEvaluator, x: &PointSpec, r: u32, guard: u32) -> u32 {
    let candidates = ball_candidates(x, r, guard);
    match eval.k_of_set(candidates.iter()) {
        KValue::Finite(k) => k,
        KValue::Infinite => unreachable!("the refined grid always intersects the ball"),
    }
}
