//! Attempt-indexed critical headways and the service-time series under
//! driver impatience.
//!
//! After every rejected gap the driver's critical headway shrinks: attempt
//! `j` uses `T_j = a_j T_1 + b_j` for an affine map determined by the policy.
//! The geometric policy is `T_{j+1} = alpha (T_j - delta) + delta`, i.e.
//! `a_j = alpha^{j-1}`, `b_j = (1 - alpha^{j-1}) delta`, decreasing towards
//! the floor `delta`.
//!
//! The mean service time is an infinite series over the number of failed
//! attempts; summation stops once a rigorous bound on the remaining tail
//! drops below the requested tolerance.

use std::sync::Arc;

use thiserror::Error;

use crate::distributions::{DistributionError, HeadwayDistribution};
use crate::numerics::{self, MomentOrder};
use crate::poisson::{Behavior, ServiceCharacterization};

/// Hard cap on series terms; exceeding it is reported as divergence.
pub const TERM_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImpatienceError {
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("delta must be nonnegative and finite, got {0}")]
    InvalidDelta(f64),
    #[error("explicit policies need at least one map")]
    EmptyPolicy,
    #[error("map {index}: scale must lie in (0, 1] and shift be nonnegative")]
    InvalidMap { index: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

/// The per-attempt headway map `t -> scale * t + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub scale: f64,
    pub shift: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { scale: 1.0, shift: 0.0 };

    pub fn apply(&self, t: f64) -> f64 {
        self.scale * t + self.shift
    }
}

/// Rule generating the attempt-indexed critical headway sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum ImpatiencePolicy {
    /// Every attempt reuses the first headway.
    None,
    /// `T_{j+1} = alpha (T_j - delta) + delta`.
    Geometric { alpha: f64, delta: f64 },
    /// Explicit per-attempt maps; the last entry repeats for all later
    /// attempts.
    Explicit { maps: Vec<AffineMap> },
}

impl ImpatiencePolicy {
    pub fn geometric(alpha: f64, delta: f64) -> Result<Self, ImpatienceError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(ImpatienceError::InvalidAlpha(alpha));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(ImpatienceError::InvalidDelta(delta));
        }
        Ok(ImpatiencePolicy::Geometric { alpha, delta })
    }

    pub fn explicit(maps: Vec<AffineMap>) -> Result<Self, ImpatienceError> {
        if maps.is_empty() {
            return Err(ImpatienceError::EmptyPolicy);
        }
        for (index, m) in maps.iter().enumerate() {
            if !(m.scale > 0.0 && m.scale <= 1.0 && m.shift >= 0.0 && m.shift.is_finite()) {
                return Err(ImpatienceError::InvalidMap { index });
            }
        }
        Ok(ImpatiencePolicy::Explicit { maps })
    }

    pub fn is_none(&self) -> bool {
        matches!(self, ImpatiencePolicy::None)
    }

    /// Map applied at attempt `j >= 1`.
    pub fn attempt_map(&self, j: usize) -> AffineMap {
        debug_assert!(j >= 1);
        match self {
            ImpatiencePolicy::None => AffineMap::IDENTITY,
            ImpatiencePolicy::Geometric { alpha, delta } => {
                let a = alpha.powi(j as i32 - 1);
                AffineMap { scale: a, shift: (1.0 - a) * delta }
            }
            ImpatiencePolicy::Explicit { maps } => maps[j.min(maps.len()) - 1],
        }
    }

    /// Limit of the attempt maps for large `j`.
    fn limit_map(&self) -> AffineMap {
        match self {
            ImpatiencePolicy::None => AffineMap::IDENTITY,
            ImpatiencePolicy::Geometric { alpha, delta } => {
                if *alpha == 1.0 {
                    AffineMap::IDENTITY
                } else {
                    AffineMap { scale: 0.0, shift: *delta }
                }
            }
            ImpatiencePolicy::Explicit { maps } => *maps.last().unwrap(),
        }
    }

    /// Upper bound on every map's shift (headways never exceed `T_1 + shift`).
    fn max_shift(&self) -> f64 {
        match self {
            ImpatiencePolicy::None => 0.0,
            ImpatiencePolicy::Geometric { alpha, delta } => {
                if *alpha == 1.0 {
                    0.0
                } else {
                    *delta
                }
            }
            ImpatiencePolicy::Explicit { maps } => {
                maps.iter().map(|m| m.shift).fold(0.0, f64::max)
            }
        }
    }

    /// Supremum of the attempt headways from attempt `j0` on, given a first
    /// draw `t`. Geometric sequences converge monotonically, so the sup is
    /// attained at `j0` or in the limit.
    fn sup_headway_from(&self, j0: usize, t: f64) -> f64 {
        match self {
            ImpatiencePolicy::None => t,
            ImpatiencePolicy::Geometric { .. } => {
                self.attempt_map(j0).apply(t).max(self.limit_map().apply(t))
            }
            ImpatiencePolicy::Explicit { maps } => {
                let start = j0.min(maps.len()) - 1;
                maps[start..].iter().map(|m| m.apply(t)).fold(f64::MIN, f64::max)
            }
        }
    }
}

/// Law of the `j`-th attempt headway: the pushforward of `base` under the
/// policy's attempt map.
pub fn attempt_law(
    policy: &ImpatiencePolicy,
    base: &HeadwayDistribution,
    j: usize,
) -> Result<HeadwayDistribution, DistributionError> {
    assert!(j >= 1, "attempt indices start at 1");
    let m = policy.attempt_map(j);
    if m == AffineMap::IDENTITY {
        return Ok(base.clone());
    }
    if m.scale == 0.0 {
        return HeadwayDistribution::deterministic(m.shift);
    }
    base.affine_push(m.scale, m.shift)
}

/// Truncation report of one series evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SeriesDiagnostics {
    /// Terms summed (largest count over atoms or quadrature nodes).
    pub terms: usize,
    /// Bound on the discarded tail of `E[Y]`, absolute seconds.
    pub tail_bound: f64,
    /// Set when the term cap was reached or divergence was detected
    /// analytically; the mean is then infinite.
    pub diverged: bool,
}

/// Service-time law under impatience plus its truncation diagnostics.
#[derive(Debug, Clone)]
pub struct ImpatientService {
    pub service: ServiceCharacterization,
    pub diagnostics: SeriesDiagnostics,
}

struct SeriesOutcome {
    value: f64,
    terms: usize,
    tail: f64,
    diverged: bool,
}

/// Sums `E[Y]` for a deterministic headway sequence (B1, and B3 conditioned
/// on its first draw): per failed attempt `j` the gap is rejected with
/// probability `1 - e^{-qT_j}`.
///
/// `floor_at(k)` must lower-bound the success probability of every attempt
/// beyond `k + 1`; the geometric tail it induces bounds the discarded terms.
fn b1_series(
    t_of: impl Fn(usize) -> f64,
    q: f64,
    tol: f64,
    floor_at: impl Fn(usize) -> f64,
    t_bar: f64,
) -> SeriesOutcome {
    let mut sum = 0.0;
    let mut prod = 1.0; // probability all attempts so far failed
    let mut run = 0.0; // sum of T_i e^{-qT_i} / (1 - e^{-qT_i})
    for k in 0..TERM_CAP {
        let t_next = t_of(k + 1);
        let succ = (-q * t_next).exp();
        sum += succ * (k as f64 / q + t_next - run) * prod;
        let fail = -(-q * t_next).exp_m1();
        let prod_next = prod * fail;
        let phi = floor_at(k);
        if phi > 0.0 {
            let r = 1.0 - phi;
            let tail =
                prod_next * (((k + 1) as f64 / q + t_bar) / phi + r / (q * phi * phi));
            if k >= 2 && tail < tol * sum.abs() {
                return SeriesOutcome { value: sum, terms: k + 1, tail, diverged: false };
            }
        }
        run += t_next * succ / fail;
        prod = prod_next;
    }
    SeriesOutcome { value: f64::INFINITY, terms: TERM_CAP, tail: f64::INFINITY, diverged: true }
}

/// Sums `E[Y]` when each attempt resamples (B2): the scalar exponentials of
/// the B1 series become the per-attempt transforms `E[e^{-qT_j}]` and
/// `E[T_j e^{-qT_j}]`.
fn b2_series(
    lap_of: impl Fn(usize) -> f64,
    tilt_of: impl Fn(usize) -> f64,
    q: f64,
    tol: f64,
    phi_floor: f64,
    t_bar: f64,
) -> SeriesOutcome {
    let mut sum = 0.0;
    let mut prod = 1.0;
    let mut run = 0.0;
    let r = 1.0 - phi_floor;
    for k in 0..TERM_CAP {
        let l = lap_of(k + 1);
        let m = tilt_of(k + 1);
        sum += (m + l * (k as f64 / q - run)) * prod;
        let fail = 1.0 - l;
        let prod_next = prod * fail;
        let tail = prod_next
            * (((k + 1) as f64 / q + t_bar) / phi_floor + r / (q * phi_floor * phi_floor));
        if k >= 2 && tail < tol * sum.abs() {
            return SeriesOutcome { value: sum, terms: k + 1, tail, diverged: false };
        }
        run += m / fail;
        prod = prod_next;
    }
    SeriesOutcome { value: f64::INFINITY, terms: TERM_CAP, tail: f64::INFINITY, diverged: true }
}

/// LST series shared by all behaviors; `lap_w(j)` evaluates
/// `E[e^{-(s+q)T_j}]` (a point value for deterministic sequences).
fn lst_series(lap_w: impl Fn(usize) -> f64, q: f64, s: f64, tol: f64, phi_floor: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    let ratio = q / (s + q);
    let mut sum = 0.0;
    let mut prod = 1.0;
    let mut weight = 1.0; // ratio^k
    let geo = ratio * (1.0 - phi_floor);
    for k in 0..TERM_CAP {
        let lw = lap_w(k + 1);
        sum += weight * lw * prod;
        prod *= 1.0 - lw;
        weight *= ratio;
        let tail = weight * prod / (1.0 - geo).max(1e-300);
        if k >= 2 && tail < tol * sum.abs() {
            break;
        }
    }
    sum
}

fn merge(a: SeriesOutcome, weight: f64, acc: &mut SeriesOutcome) {
    acc.value += weight * a.value;
    acc.terms = acc.terms.max(a.terms);
    acc.tail += weight * a.tail;
    acc.diverged |= a.diverged;
}

/// `E[Y]`, the service LST and the second moment under an impatience policy,
/// by summing the attempt series to tolerance `tol`.
///
/// A constant sequence (the `None` policy, or geometric with `alpha = 1`)
/// reproduces the closed forms of the no-impatience model. `q = 0` takes the
/// analytic limit `E[T_1]`.
pub fn service_impatient(
    behavior: Behavior,
    base: &HeadwayDistribution,
    policy: &ImpatiencePolicy,
    q: f64,
    tol: f64,
) -> Result<ImpatientService, ImpatienceError> {
    assert!(q >= 0.0, "major-road rate must be nonnegative, got {q}");
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(ImpatienceError::InvalidTolerance(tol));
    }
    let first = attempt_law(policy, base, 1)?;
    if q == 0.0 {
        let no_diag = SeriesDiagnostics { terms: 1, tail_bound: 0.0, diverged: false };
        let service = match behavior {
            Behavior::B1 => {
                let t = first.mean();
                ServiceCharacterization::new(t, t * t, Arc::new(move |s| (-s * t).exp()))
            }
            _ => {
                let law = first.clone();
                ServiceCharacterization::new(
                    first.mean(),
                    first.tilted_second_moment(0.0),
                    Arc::new(move |s| law.lap(s)),
                )
            }
        };
        return Ok(ImpatientService { service, diagnostics: no_diag });
    }

    // Uniform lower bound on every attempt's success probability: headways
    // never exceed the base draw plus the largest shift.
    let phi_floor = (-q * policy.max_shift()).exp() * base.lap(q);
    let t_bar = base.mean() + policy.max_shift();
    let policy_arc = Arc::new(policy.clone());

    let outcome;
    let lst: Arc<dyn Fn(f64) -> f64 + Send + Sync>;
    match behavior {
        Behavior::B1 => {
            let t1 = base.mean();
            let p = Arc::clone(&policy_arc);
            let pf = Arc::clone(&policy_arc);
            outcome = b1_series(
                |j| p.attempt_map(j).apply(t1),
                q,
                tol,
                |k| (-q * pf.sup_headway_from(k + 2, t1)).exp(),
                t_bar,
            );
            let p = Arc::clone(&policy_arc);
            lst = Arc::new(move |s: f64| {
                lst_series(
                    |j| (-(s + q) * p.attempt_map(j).apply(t1)).exp(),
                    q,
                    s,
                    1e-12,
                    (-(s + q) * p.sup_headway_from(1, t1)).exp(),
                )
            });
        }
        Behavior::B2 => {
            // per-attempt transforms of the pushforward laws, cached as the
            // series walks forward
            let p = Arc::clone(&policy_arc);
            let b = base.clone();
            let lap_j = move |j: usize| {
                let m = p.attempt_map(j);
                (-q * m.shift).exp() * b.lap(m.scale * q)
            };
            let p = Arc::clone(&policy_arc);
            let b = base.clone();
            let tilt_j = move |j: usize| {
                let m = p.attempt_map(j);
                (-q * m.shift).exp()
                    * (m.scale * b.tilted_mean(m.scale * q) + m.shift * b.lap(m.scale * q))
            };
            outcome = b2_series(&lap_j, &tilt_j, q, tol, phi_floor, t_bar);
            let p = Arc::clone(&policy_arc);
            let b = base.clone();
            lst = Arc::new(move |s: f64| {
                let w = s + q;
                let floor = (-w * p.max_shift()).exp() * b.lap(w);
                lst_series(
                    |j| {
                        let m = p.attempt_map(j);
                        (-w * m.shift).exp() * b.lap(m.scale * w)
                    },
                    q,
                    s,
                    1e-12,
                    floor,
                )
            });
        }
        Behavior::B3 => {
            let limit = policy.limit_map();
            if limit.scale > 0.0 && base.mgf(limit.scale * q).is_infinite() {
                // headways keep a positive fraction of a heavy-tailed first
                // draw forever: the outer expectation diverges
                let law = base.clone();
                return Ok(ImpatientService {
                    service: ServiceCharacterization::new(
                        f64::INFINITY,
                        f64::INFINITY,
                        Arc::new(move |s| if s == 0.0 { 1.0 } else { law.lap(s) }),
                    ),
                    diagnostics: SeriesDiagnostics {
                        terms: 0,
                        tail_bound: f64::INFINITY,
                        diverged: true,
                    },
                });
            }
            let mut acc = SeriesOutcome { value: 0.0, terms: 0, tail: 0.0, diverged: false };
            match base.as_atoms() {
                Some(atoms) => {
                    for &(t1, p1) in &atoms {
                        let pol = Arc::clone(&policy_arc);
                        let pf = Arc::clone(&policy_arc);
                        let o = b1_series(
                            |j| pol.attempt_map(j).apply(t1),
                            q,
                            tol,
                            |k| (-q * pf.sup_headway_from(k + 2, t1)).exp(),
                            t1.max(t_bar),
                        );
                        merge(o, p1, &mut acc);
                    }
                }
                None => {
                    let pol = Arc::clone(&policy_arc);
                    let max_terms = std::cell::Cell::new(0usize);
                    let diverged = std::cell::Cell::new(false);
                    let value = base.expect(
                        |t1| {
                            let o = b1_series(
                                |j| pol.attempt_map(j).apply(t1),
                                q,
                                tol,
                                |k| (-q * pol.sup_headway_from(k + 2, t1)).exp(),
                                t1.max(t_bar),
                            );
                            max_terms.set(max_terms.get().max(o.terms));
                            if o.diverged {
                                diverged.set(true);
                            }
                            o.value
                        },
                        1e-8,
                    );
                    let diverged = diverged.get();
                    acc = SeriesOutcome {
                        value: if diverged { f64::INFINITY } else { value },
                        terms: max_terms.get(),
                        tail: tol * value.abs(),
                        diverged,
                    };
                }
            }
            outcome = acc;
            let pol = Arc::clone(&policy_arc);
            let b = base.clone();
            lst = Arc::new(move |s: f64| {
                if s == 0.0 {
                    return 1.0;
                }
                let w = s + q;
                let pol2 = Arc::clone(&pol);
                b.expect(
                    move |t1| {
                        let floor = (-w * pol2.sup_headway_from(1, t1)).exp();
                        lst_series(
                            |j| (-w * pol2.attempt_map(j).apply(t1)).exp(),
                            q,
                            s,
                            1e-12,
                            floor,
                        )
                    },
                    1e-9,
                )
            });
        }
    }

    let mean = outcome.value;
    let second = if mean.is_infinite() {
        f64::INFINITY
    } else {
        let f = Arc::clone(&lst);
        match numerics::lst_moment(move |s| f(s), MomentOrder::Second) {
            Ok(est) => est.value,
            Err(_) => f64::NAN,
        }
    };
    Ok(ImpatientService {
        service: ServiceCharacterization::new(mean, second, lst),
        diagnostics: SeriesDiagnostics {
            terms: outcome.terms,
            tail_bound: outcome.tail,
            diverged: outcome.diverged,
        },
    })
}

/// Capacity `1/E[Y]` under impatience; 0 when the series diverges.
pub fn capacity_impatient(
    behavior: Behavior,
    base: &HeadwayDistribution,
    policy: &ImpatiencePolicy,
    q: f64,
) -> f64 {
    let sv = service_impatient(behavior, base, policy, q, 1e-10)
        .expect("validated policy and tolerance");
    if sv.service.mean.is_infinite() {
        0.0
    } else {
        1.0 / sv.service.mean
    }
}
