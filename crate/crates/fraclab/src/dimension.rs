//! Local and global dimension estimators over finite resolution ranges.
//!
//! A [`DimensionProfile`] samples `r -> K_r(x)` or
//! `r -> log2(1 / mu(B(x, 2^-r)))`. The liminf and limsup in the dimension
//! definitions are not computable, so [`estimate_slopes`] replaces them by
//! tail minima and maxima of `value / r` past a declared cutoff `r0`,
//! with a least-squares slope carried along as a diagnostic only.
//!
//! [`global_dims`] turns per-atom slope estimates into the four global
//! dimensions via epsilon-quantiles of the weighted slope distribution:
//! the mu-null conditions in the exact definitions degenerate on finite
//! supports, so an explicit mass tolerance makes them testable.

use crate::geometry::{k_at_precision, Ball, PointSpec, RationalPoint};
use crate::measures::{EvalContext, Kappa, OuterMeasure, SetQuery};
use crate::numeric::log2_rational;
use num::rational::BigRational;
use num::traits::{Signed, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DimensionError {
    #[error("need at least 3 tail samples past r0={r0}, found {found}")]
    InsufficientData { r0: u32, found: usize },
    #[error("global dimensions are undefined on an empty atom sample")]
    EmptySupport,
    #[error("atom weights must have positive total mass")]
    ZeroMass,
}

/// One profile sample value.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileValue {
    /// An exact bit count (complexity-derived, so `log2` is an integer).
    Bits(u32),
    /// A real value `log2(1/mu(B))` for a general measure.
    Real(f64),
    /// The ball had measure zero. `support_exhausted` distinguishes a
    /// resource-bounded miss from a structurally zero measure.
    Infinite { support_exhausted: bool },
}

impl ProfileValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            ProfileValue::Bits(k) => f64::from(*k),
            ProfileValue::Real(v) => *v,
            ProfileValue::Infinite { .. } => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, ProfileValue::Infinite { .. })
    }
}

impl fmt::Display for ProfileValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileValue::Bits(k) => write!(f, "{k}"),
            ProfileValue::Real(v) => write!(f, "{v}"),
            ProfileValue::Infinite { .. } => write!(f, "inf"),
        }
    }
}

/// The sampled map `r -> value` behind a dimension estimate.
#[derive(Debug, Clone)]
pub struct DimensionProfile {
    pub subject: String,
    pub samples: Vec<(u32, ProfileValue)>,
}

impl DimensionProfile {
    pub fn new(subject: impl Into<String>, samples: Vec<(u32, ProfileValue)>) -> Self {
        let profile = DimensionProfile {
            subject: subject.into(),
            samples,
        };
        debug_assert!(
            profile.samples.windows(2).all(|w| w[0].0 < w[1].0),
            "resolutions must be strictly increasing"
        );
        profile
    }

    /// Two-column CSV `r,value`, with `inf` for the infinite sentinel.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,value\n");
        for (r, v) in &self.samples {
            out.push_str(&format!("{r},{v}\n"));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "subject": self.subject,
            "samples": self.samples.iter()
                .map(|(r, v)| serde_json::json!({"r": r, "value": v.as_f64()}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Finite-range surrogate for the liminf/limsup dimension pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeEstimate {
    /// Tail minimum of `value / r` — the liminf surrogate.
    pub lower: f64,
    /// Tail maximum of `value / r` — the limsup surrogate.
    pub upper: f64,
    pub tail_start: u32,
    /// Least-squares slope of `value` against `r` on the tail. Reported
    /// for diagnostics, never used in verdicts.
    pub regression_slope: f64,
}

impl SlopeEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lower": self.lower,
            "upper": self.upper,
            "tail_start": self.tail_start,
            "regression_slope": self.regression_slope,
        })
    }
}

/// Profile of the pointwise complexity `K_r(x)` over a resolution range.
pub fn k_profile(
    ctx: &EvalContext,
    x: &PointSpec,
    resolutions: &[u32],
) -> DimensionProfile {
    let samples = resolutions
        .iter()
        .map(|&r| {
            (
                r,
                ProfileValue::Bits(k_at_precision(ctx.k_eval(), x, r, ctx.guard())),
            )
        })
        .collect();
    DimensionProfile::new(format!("K_r[{x:?}]"), samples)
}

/// Profile of `log2(1 / mu(B(x, 2^-r)))` for a measure evaluable on balls.
///
/// Under `kappa` the value is the exact integer `K(B(x, 2^-r))`, computed
/// on the same candidate grid as [`k_profile`], so the two profiles agree
/// exactly. Stream-described centers are supported for `kappa`; other
/// measures take exact centers.
pub fn local_dim_profile(
    measure: &dyn OuterMeasure,
    ctx: &EvalContext,
    x: &PointSpec,
    resolutions: &[u32],
) -> DimensionProfile {
    let samples = resolutions
        .iter()
        .map(|&r| {
            let value = if measure.name() == Kappa.name() {
                ProfileValue::Bits(k_at_precision(ctx.k_eval(), x, r, ctx.guard()))
            } else {
                let center = x
                    .exact()
                    .expect("non-kappa ball profiles need exact centers")
                    .clone();
                let mass = measure.eval(ctx, &SetQuery::Ball(Ball::new(center, r)));
                if mass.is_zero() {
                    ProfileValue::Infinite {
                        support_exhausted: measure.zero_is_budget_limited(),
                    }
                } else {
                    ProfileValue::Real(-log2_rational(&mass))
                }
            };
            (r, value)
        })
        .collect();
    DimensionProfile::new(format!("{}[{:?}]", measure.name(), x), samples)
}

/// Tail min/max of `value / r` past `r0`, with a diagnostic regression
/// slope. Needs at least three tail samples.
pub fn estimate_slopes(
    profile: &DimensionProfile,
    r0: u32,
) -> Result<SlopeEstimate, DimensionError> {
    let tail: Vec<(f64, f64)> = profile
        .samples
        .iter()
        .filter(|(r, _)| *r >= r0)
        .map(|(r, v)| (f64::from(*r), v.as_f64()))
        .collect();
    if tail.len() < 3 {
        return Err(DimensionError::InsufficientData {
            r0,
            found: tail.len(),
        });
    }
    let ratios: Vec<f64> = tail.iter().map(|(r, v)| v / r).collect();
    let lower = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let finite: Vec<(f64, f64)> = tail
        .iter()
        .copied()
        .filter(|(_, v)| v.is_finite())
        .collect();
    let regression_slope = if finite.len() >= 2 {
        let n = finite.len() as f64;
        let sx: f64 = finite.iter().map(|(r, _)| r).sum();
        let sy: f64 = finite.iter().map(|(_, v)| v).sum();
        let sxx: f64 = finite.iter().map(|(r, _)| r * r).sum();
        let sxy: f64 = finite.iter().map(|(r, v)| r * v).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        f64::NAN
    };

    Ok(SlopeEstimate {
        lower,
        upper,
        tail_start: r0,
        regression_slope,
    })
}

/// The four global dimensions of a measure over a finite weighted atom
/// sample, via epsilon-quantiles of the per-atom slope estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalDims {
    /// Largest level whose sub-level mass is negligible for lower slopes.
    pub lower_hausdorff: f64,
    /// Smallest level whose super-level mass is negligible for lower slopes.
    pub upper_hausdorff: f64,
    pub lower_packing: f64,
    pub upper_packing: f64,
}

impl GlobalDims {
    pub fn max_value(&self) -> f64 {
        self.lower_hausdorff
            .max(self.upper_hausdorff)
            .max(self.lower_packing)
            .max(self.upper_packing)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lower_hausdorff": self.lower_hausdorff,
            "upper_hausdorff": self.upper_hausdorff,
            "lower_packing": self.lower_packing,
            "upper_packing": self.upper_packing,
        })
    }
}

/// Largest slope level whose strictly-smaller mass stays within the
/// tolerance.
fn quantile_sup(slopes: &[(f64, BigRational)], threshold: &BigRational) -> f64 {
    let mut sorted = slopes.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN slopes"));
    let mut best = sorted[0].0;
    let mut mass_below = BigRational::zero();
    let mut i = 0;
    while i < sorted.len() {
        let level = sorted[i].0;
        if &mass_below <= threshold {
            best = level;
        } else {
            break;
        }
        while i < sorted.len() && sorted[i].0 == level {
            mass_below += sorted[i].1.clone();
            i += 1;
        }
    }
    best
}

/// Smallest slope level whose strictly-larger mass stays within the
/// tolerance.
fn quantile_inf(slopes: &[(f64, BigRational)], threshold: &BigRational) -> f64 {
    let mut sorted = slopes.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("no NaN slopes"));
    let mut best = sorted[0].0;
    let mut mass_above = BigRational::zero();
    let mut i = 0;
    while i < sorted.len() {
        let level = sorted[i].0;
        if &mass_above <= threshold {
            best = level;
        } else {
            break;
        }
        while i < sorted.len() && sorted[i].0 == level {
            mass_above += sorted[i].1.clone();
            i += 1;
        }
    }
    best
}

/// Compute the four global dimensions from weighted atoms. `profile_for`
/// supplies each atom's local profile (so the caller picks the measure
/// and resolution range); `epsilon` is the mass tolerance.
pub fn global_dims<F>(
    atoms: &[(RationalPoint, BigRational)],
    profile_for: F,
    r0: u32,
    epsilon: f64,
) -> Result<GlobalDims, DimensionError>
where
    F: Fn(&RationalPoint) -> DimensionProfile,
{
    if atoms.is_empty() {
        return Err(DimensionError::EmptySupport);
    }
    let total: BigRational = atoms.iter().map(|(_, w)| w.clone()).sum();
    if !total.is_positive() {
        return Err(DimensionError::ZeroMass);
    }
    let threshold = BigRational::from_float(epsilon)
        .unwrap_or_else(BigRational::zero)
        * total;

    let mut lower_slopes = Vec::with_capacity(atoms.len());
    let mut upper_slopes = Vec::with_capacity(atoms.len());
    for (atom, weight) in atoms {
        let profile = profile_for(atom);
        let est = estimate_slopes(&profile, r0)?;
        lower_slopes.push((est.lower, weight.clone()));
        upper_slopes.push((est.upper, weight.clone()));
    }

    Ok(GlobalDims {
        lower_hausdorff: quantile_sup(&lower_slopes, &threshold),
        upper_hausdorff: quantile_inf(&lower_slopes, &threshold),
        lower_packing: quantile_sup(&upper_slopes, &threshold),
        upper_packing: quantile_inf(&upper_slopes, &threshold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rational;
    use crate::measures::Nu;
    use crate::table::ComplexityTable;
    use num::traits::One;
    use std::sync::LazyLock;

    static CTX: LazyLock<EvalContext> = LazyLock::new(|| {
        let table = ComplexityTable::build(16, 1024).unwrap();
        EvalContext::new(table, 1, 2).unwrap()
    });

    fn pt(n: i64, d: i64) -> RationalPoint {
        RationalPoint::one_dim(rational(n, d))
    }

    fn profile_of(values: &[(u32, f64)]) -> DimensionProfile {
        DimensionProfile::new(
            "fixture",
            values
                .iter()
                .map(|&(r, v)| (r, ProfileValue::Real(v)))
                .collect(),
        )
    }

    #[test]
    fn slopes_on_exactly_linear_data() {
        let p = profile_of(&[(8, 8.0), (16, 16.0), (32, 32.0)]);
        let est = estimate_slopes(&p, 8).unwrap();
        assert_eq!(est.lower, 1.0);
        assert_eq!(est.upper, 1.0);
        assert!((est.regression_slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slopes_on_constant_zero() {
        let p = profile_of(&[(8, 0.0), (16, 0.0), (32, 0.0)]);
        let est = estimate_slopes(&p, 8).unwrap();
        assert_eq!(est.lower, 0.0);
        assert_eq!(est.upper, 0.0);
    }

    #[test]
    fn slopes_on_eventually_constant_profile() {
        // Constant value c: upper -> c/r0, lower -> c/r_max.
        let c = 8.0;
        let p = profile_of(&[(32, c), (40, c), (48, c)]);
        let est = estimate_slopes(&p, 32).unwrap();
        assert_eq!(est.upper, c / 32.0);
        assert_eq!(est.lower, c / 48.0);
        assert!(est.upper <= 0.25);
        assert!(est.lower <= est.upper);
    }

    #[test]
    fn insufficient_tail_is_an_error() {
        let p = profile_of(&[(8, 1.0), (16, 2.0), (24, 2.5), (32, 3.0)]);
        assert_eq!(
            estimate_slopes(&p, 20),
            Err(DimensionError::InsufficientData { r0: 20, found: 2 })
        );
    }

    #[test]
    fn k_profile_of_rational_point_is_eventually_constant() {
        let ctx = &*CTX;
        let x = PointSpec::Exact(pt(1, 3));
        let rs: Vec<u32> = (1..=12).collect();
        let profile = k_profile(ctx, &x, &rs);
        let values: Vec<f64> = profile.samples.iter().map(|(_, v)| v.as_f64()).collect();
        // The point itself is always a candidate, so the profile caps at
        // K(x) and stabilises once cheaper candidates leave the ball.
        let own_k = f64::from(ctx.k_eval().k_of_point(&pt(1, 3)));
        assert!(values.iter().all(|&v| v <= own_k));
        assert_eq!(values.last().copied(), Some(own_k));
        // Nondecreasing in r on the computed surrogate.
        for pair in values.windows(2) {
            assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn kappa_profile_equals_k_profile_exactly() {
        let ctx = &*CTX;
        let rs: Vec<u32> = (1..=10).collect();
        for x in [pt(0, 1), pt(1, 3), pt(-5, 8)] {
            let spec = PointSpec::Exact(x);
            let kp = k_profile(ctx, &spec, &rs);
            let lp = local_dim_profile(&Kappa, ctx, &spec, &rs);
            assert_eq!(
                kp.samples.iter().map(|(r, v)| (*r, v.as_f64())).collect::<Vec<_>>(),
                lp.samples.iter().map(|(r, v)| (*r, v.as_f64())).collect::<Vec<_>>(),
            );
            let se_k = estimate_slopes(&kp, 4).unwrap();
            let se_l = estimate_slopes(&lp, 4).unwrap();
            assert_eq!(se_k, se_l);
        }
    }

    #[test]
    fn nu_profile_is_bounded_at_enumerated_points() {
        let ctx = &*CTX;
        let x = ctx.support()[0].point.clone();
        let own_k = f64::from(ctx.support()[0].k);
        let rs: Vec<u32> = (1..=10).collect();
        let profile = local_dim_profile(&Nu, ctx, &PointSpec::Exact(x), &rs);
        for (_, v) in &profile.samples {
            assert!(v.is_finite());
            // nu(B) >= 2^(-K(x)) because x itself sits in the ball.
            assert!(v.as_f64() <= own_k + 1e-9);
        }
        // Values nondecreasing in r: balls shrink.
        for pair in profile.samples.windows(2) {
            assert!(pair[0].1.as_f64() <= pair[1].1.as_f64() + 1e-12);
        }
    }

    #[test]
    fn zero_measure_profile_flags_structural_zero() {
        let ctx = &*CTX;
        let profile = local_dim_profile(
            &crate::measures::ZeroMeasure,
            ctx,
            &PointSpec::Exact(pt(0, 1)),
            &[2, 4, 6],
        );
        for (_, v) in &profile.samples {
            assert_eq!(
                v,
                &ProfileValue::Infinite {
                    support_exhausted: false
                }
            );
        }
    }

    #[test]
    fn global_dims_single_atom() {
        let s = 0.375;
        let atoms = vec![(pt(0, 1), BigRational::one())];
        let dims = global_dims(
            &atoms,
            |_| profile_of(&[(8, s * 8.0), (16, s * 16.0), (32, s * 32.0)]),
            8,
            1e-6,
        )
        .unwrap();
        assert_eq!(dims.lower_hausdorff, s);
        assert_eq!(dims.upper_hausdorff, s);
        assert_eq!(dims.lower_packing, s);
        assert_eq!(dims.upper_packing, s);
    }

    #[test]
    fn global_dims_two_atom_quantiles() {
        // Equal weights, lower slopes 0 and 1, tolerance below 1/2.
        let atoms = vec![
            (pt(0, 1), BigRational::one()),
            (pt(1, 2), BigRational::one()),
        ];
        let dims = global_dims(
            &atoms,
            |atom| {
                if *atom == pt(0, 1) {
                    profile_of(&[(8, 0.0), (16, 0.0), (32, 0.0)])
                } else {
                    profile_of(&[(8, 8.0), (16, 16.0), (32, 32.0)])
                }
            },
            8,
            1e-6,
        )
        .unwrap();
        assert_eq!(dims.lower_hausdorff, 0.0);
        assert_eq!(dims.upper_hausdorff, 1.0);
    }

    #[test]
    fn global_dims_errors() {
        assert_eq!(
            global_dims(&[], |_| profile_of(&[]), 8, 1e-6),
            Err(DimensionError::EmptySupport)
        );
        let atoms = vec![(pt(0, 1), BigRational::zero())];
        assert_eq!(
            global_dims(&atoms, |_| profile_of(&[]), 8, 1e-6),
            Err(DimensionError::ZeroMass)
        );
    }

    #[test]
    fn csv_rendering() {
        let p = DimensionProfile::new(
            "t",
            vec![
                (2, ProfileValue::Bits(9)),
                (4, ProfileValue::Infinite {
                    support_exhausted: true,
                }),
            ],
        );
        assert_eq!(p.to_csv(), "r,value\n2,9\n4,inf\n");
    }
}
