//! Service-time transforms, capacities and M/G/1 queue metrics for Poisson
//! major-road traffic without impatience.
//!
//! A minor-road driver at the head of the queue repeatedly compares the gap
//! until the next major-road car (exponential with rate `q`) against a
//! critical headway. The time from reaching the head until crossing is the
//! service time `Y`; the minor road behaves as an M/G/1 queue with capacity
//! `1/E[Y]`.
//!
//! Three behavior models:
//! * `B1` - one constant headway `T` for everybody,
//! * `B2` - a fresh random headway per attempt ("inconsistent"),
//! * `B3` - one random headway per driver, kept for all attempts
//!   ("consistent").

use std::sync::Arc;

use thiserror::Error;

use crate::distributions::HeadwayDistribution;
use crate::numerics::{self, MomentOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Behavior {
    B1,
    B2,
    B3,
}

impl Behavior {
    pub const ALL: [Behavior; 3] = [Behavior::B1, Behavior::B2, Behavior::B3];

    pub fn label(&self) -> &'static str {
        match self {
            Behavior::B1 => "b1",
            Behavior::B2 => "b2",
            Behavior::B3 => "b3",
        }
    }
}

/// Service-time law of one crossing: mean, second moment and the Laplace
/// transform `s -> E[e^{-sY}]`. Infinite moments are `f64::INFINITY`.
#[derive(Clone)]
pub struct ServiceCharacterization {
    pub mean: f64,
    pub second_moment: f64,
    lst: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for ServiceCharacterization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ServiceCharacterization")
            .field("mean", &self.mean)
            .field("second_moment", &self.second_moment)
            .finish()
    }
}

impl ServiceCharacterization {
    pub(crate) fn new(
        mean: f64,
        second_moment: f64,
        lst: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Self {
        Self { mean, second_moment, lst }
    }

    /// Evaluates `E[e^{-sY}]`.
    pub fn lst(&self, s: f64) -> f64 {
        (self.lst)(s)
    }
}

/// B1 service LST for a fixed headway `t`:
/// `(s+q) e^{-(s+q)t} / (s + q e^{-(s+q)t})`.
pub(crate) fn b1_lst(t: f64, q: f64, s: f64) -> f64 {
    if s + q == 0.0 {
        return 1.0;
    }
    let w = s + q;
    let e = (-w * t).exp();
    w * e / (s + q * e)
}

/// Mean and second moment of the B1 service time for a fixed headway.
///
/// The service is a geometric number of rejected gaps (each `tau | tau < t`)
/// followed by the accepted headway `t`; both moments follow from that
/// decomposition.
pub(crate) fn b1_moments(t: f64, q: f64) -> (f64, f64) {
    if q == 0.0 {
        return (t, t * t);
    }
    let x = q * t;
    let p = (-x).exp(); // success probability per attempt
    let fail = -(-x).exp_m1(); // 1 - e^{-qt} without cancellation
    let mean = fail / (q * p);

    // rejected-gap moments: W ~ tau | tau < t
    let m1w = 1.0 / q - t * p / fail;
    let m2w = (2.0 / (q * q) - p * (t * t + 2.0 * t / q + 2.0 / (q * q))) / fail;
    let ek = fail / p;
    let ekk1 = 2.0 * fail * fail / (p * p);
    let second = ek * m2w + ekk1 * m1w * m1w + 2.0 * t * ek * m1w + t * t;
    debug_assert!((ek * m1w + t - mean).abs() <= 1e-9 * mean.max(1.0));
    (mean, second)
}

/// B2 moments from the law's tilted transforms.
fn b2_moments(d: &HeadwayDistribution, q: f64) -> (f64, f64) {
    let l = d.lap(q); // E[e^{-qT}]
    let m = d.tilted_mean(q); // E[T e^{-qT}]
    let m2 = d.tilted_second_moment(q); // E[T^2 e^{-qT}]
    let fail = 1.0 - l;
    let mean = fail / (q * l);

    let m1w = (fail / q - m) / fail;
    let m2w = (2.0 / (q * q) - (m2 + 2.0 * m / q + 2.0 * l / (q * q))) / fail;
    let ek = fail / l;
    let ekk1 = 2.0 * fail * fail / (l * l);
    // accepted headway ~ T | gap >= T
    let et = m / l;
    let et2 = m2 / l;
    let second = ek * m2w + ekk1 * m1w * m1w + 2.0 * ek * m1w * et + et2;
    (mean, second)
}

/// Service-time characterization for one behavior at major-road rate `q`.
///
/// For `B1` a non-degenerate law is reduced to its mean (the comparison
/// convention used throughout). The `q = 0` limit is taken analytically. For
/// `B3` heavy-tailed laws the divergent moment generating function surfaces
/// as an infinite mean.
pub fn service(behavior: Behavior, d: &HeadwayDistribution, q: f64) -> ServiceCharacterization {
    assert!(q >= 0.0, "major-road rate must be nonnegative, got {q}");
    if q == 0.0 {
        // no major traffic: every first attempt succeeds, Y = T
        return match behavior {
            Behavior::B1 => {
                let t = d.mean();
                ServiceCharacterization::new(t, t * t, Arc::new(move |s| (-s * t).exp()))
            }
            _ => {
                let law = d.clone();
                ServiceCharacterization::new(
                    d.mean(),
                    d.tilted_second_moment(0.0),
                    Arc::new(move |s| law.lap(s)),
                )
            }
        };
    }
    match behavior {
        Behavior::B1 => {
            let t = d.mean();
            let (mean, second) = b1_moments(t, q);
            ServiceCharacterization::new(mean, second, Arc::new(move |s| b1_lst(t, q, s)))
        }
        Behavior::B2 => {
            let (mean, second) = b2_moments(d, q);
            let law = d.clone();
            let lst = Arc::new(move |s: f64| {
                let w = s + q;
                let l = law.lap(w);
                w * l / (s + q * l)
            });
            ServiceCharacterization::new(mean, second, lst)
        }
        Behavior::B3 => {
            let mgf = d.mgf(q);
            let mean = if mgf.is_infinite() { f64::INFINITY } else { (mgf - 1.0) / q };
            let law = d.clone();
            let lst: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match d.as_atoms() {
                Some(atoms) => Arc::new(move |s: f64| {
                    atoms.iter().map(|&(t, p)| p * b1_lst(t, q, s)).sum()
                }),
                None => Arc::new(move |s: f64| {
                    if s == 0.0 {
                        1.0
                    } else {
                        law.expect(|t| b1_lst(t, q, s), 1e-10)
                    }
                }),
            };
            let second = b3_second_moment(d, q, &lst);
            ServiceCharacterization::new(mean, second, lst)
        }
    }
}

fn b3_second_moment(
    d: &HeadwayDistribution,
    q: f64,
    lst: &Arc<dyn Fn(f64) -> f64 + Send + Sync>,
) -> f64 {
    if let Some(atoms) = d.as_atoms() {
        return atoms.iter().map(|&(t, p)| p * b1_moments(t, q).1).sum();
    }
    // E[Y^2 | T] grows like e^{2qT}, so the moment is finite iff E[e^{2qT}] is.
    if d.mgf(2.0 * q).is_infinite() {
        return f64::INFINITY;
    }
    let f = Arc::clone(lst);
    match numerics::lst_moment(move |s| f(s), MomentOrder::Second) {
        Ok(est) => est.value,
        Err(_) => f64::NAN,
    }
}

/// Minor-road capacity `1/E[Y]` in crossings per second; 0 when the mean
/// service time is infinite.
pub fn capacity(behavior: Behavior, d: &HeadwayDistribution, q: f64) -> f64 {
    let mean = service(behavior, d, q).mean;
    if mean.is_infinite() {
        0.0
    } else {
        1.0 / mean
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueueError {
    #[error("queue is unstable: rho = {rho} >= 1")]
    Unstable { rho: f64 },
}

/// Stationary M/G/1 metrics via the Pollaczek-Khinchine mean formula.
#[derive(Debug, Clone, Copy)]
pub struct QueueMetrics {
    /// Offered load `rho = lambda E[Y]`.
    pub rho: f64,
    /// Time-stationary mean number of vehicles in system.
    pub mean_queue_length: f64,
    /// Mean sojourn time (waiting plus crossing), seconds.
    pub mean_delay: f64,
    /// Set when `rho < 1` but `E[Y^2]` is infinite: the queue is stable yet
    /// its mean length and delay grow beyond any bound.
    pub infinite_second_moment: bool,
}

/// Mean queue length `rho + lambda^2 E[Y^2] / (2(1-rho))` and the matching
/// mean delay by Little's law.
pub fn queue_metrics(
    behavior: Behavior,
    d: &HeadwayDistribution,
    q: f64,
    lambda: f64,
) -> Result<QueueMetrics, QueueError> {
    assert!(lambda >= 0.0, "minor-road rate must be nonnegative, got {lambda}");
    let sv = service(behavior, d, q);
    if lambda == 0.0 {
        return Ok(QueueMetrics {
            rho: 0.0,
            mean_queue_length: 0.0,
            mean_delay: sv.mean,
            infinite_second_moment: sv.second_moment.is_infinite(),
        });
    }
    let rho = lambda * sv.mean;
    if rho >= 1.0 {
        return Err(QueueError::Unstable { rho });
    }
    if sv.second_moment.is_infinite() {
        return Ok(QueueMetrics {
            rho,
            mean_queue_length: f64::INFINITY,
            mean_delay: f64::INFINITY,
            infinite_second_moment: true,
        });
    }
    let delay = sv.mean + lambda * sv.second_moment / (2.0 * (1.0 - rho));
    Ok(QueueMetrics {
        rho,
        mean_queue_length: lambda * delay,
        mean_delay: delay,
        infinite_second_moment: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy)]
pub struct StationaryPoint {
    pub location: f64,
    pub kind: ExtremumKind,
}

/// Grid points used by the stationary-point scan.
const SCAN_POINTS: usize = 512;
/// Relative slope threshold below which the curve counts as flat.
const FLAT_TOL: f64 = 1e-12;

/// Locates interior extrema of `f` on `[lo, hi]` (log-spaced scan plus
/// golden-section refinement). Flat curves yield an empty list; results are
/// ordered by location.
pub fn find_stationary_points<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Vec<StationaryPoint> {
    assert!(lo > 0.0 && hi > lo, "range must satisfy 0 < lo < hi");
    let ratio = (hi / lo).ln();
    let xs: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp())
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();

    let slope_sign = |i: usize| -> i8 {
        let dy = ys[i + 1] - ys[i];
        let scale = ys[i].abs().max(ys[i + 1].abs()).max(f64::MIN_POSITIVE);
        if dy.abs() <= FLAT_TOL * scale {
            0
        } else if dy > 0.0 {
            1
        } else {
            -1
        }
    };

    let mut found = Vec::new();
    let mut last_sign: i8 = 0;
    let mut last_idx = 0usize;
    for i in 0..SCAN_POINTS - 1 {
        let s = slope_sign(i);
        if s == 0 {
            continue;
        }
        if last_sign != 0 && s != last_sign {
            // extremum bracketed between the start of the previous slope run
            // and the end of this one
            let a = xs[last_idx];
            let b = xs[i + 1];
            let kind = if last_sign > 0 { ExtremumKind::Maximum } else { ExtremumKind::Minimum };
            let x = golden_section(&f, a, b, kind, rel_tol);
            found.push(StationaryPoint { location: x, kind });
        }
        last_sign = s;
        last_idx = i;
    }
    // merge refinements that landed on the same point
    found.dedup_by(|b, a| {
        a.kind == b.kind && (a.location - b.location).abs() <= rel_tol * a.location.abs()
    });
    found
}

fn golden_section<F: Fn(f64) -> f64>(
    f: &F,
    mut a: f64,
    mut b: f64,
    kind: ExtremumKind,
    rel_tol: f64,
) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let better = |u: f64, v: f64| match kind {
        ExtremumKind::Maximum => u > v,
        ExtremumKind::Minimum => u < v,
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > rel_tol * 0.5 * (a + b) {
        if better(fc, fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Minor-road rates at which the PK mean queue lengths of two configurations
/// cross, scanned over `(0, min capacity)`.
pub fn queue_length_crossings(
    a: (Behavior, &HeadwayDistribution),
    b: (Behavior, &HeadwayDistribution),
    q: f64,
) -> Vec<f64> {
    let sa = service(a.0, a.1, q);
    let sb = service(b.0, b.1, q);
    if !(sa.mean.is_finite() && sb.mean.is_finite()) {
        return Vec::new();
    }
    let lam_max = (1.0 / sa.mean).min(1.0 / sb.mean) * (1.0 - 1e-9);
    let diff = |lam: f64| -> f64 {
        let la = lam * sa.mean + lam * lam * sa.second_moment / (2.0 * (1.0 - lam * sa.mean));
        let lb = lam * sb.mean + lam * lam * sb.second_moment / (2.0 * (1.0 - lam * sb.mean));
        lb - la
    };
    const N: usize = 4000;
    let mut roots = Vec::new();
    let mut prev_x = lam_max * 1e-9;
    let mut prev_y = diff(prev_x);
    for i in 1..=N {
        let x = lam_max * i as f64 / N as f64;
        let y = diff(x);
        if prev_y != 0.0 && y != 0.0 && prev_y.signum() != y.signum() {
            let (mut a, mut b) = (prev_x, x);
            let mut fa = prev_y;
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let fm = diff(m);
                if fa.signum() == fm.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_x = x;
        prev_y = y;
    }
    roots
}

/// Largest major-road rate below which configuration `b` can have a longer
/// mean queue than configuration `a` for some minor-road rate. Bisects on the
/// sign of the maximal excess; `None` when no sign change exists in the range.
pub fn queue_paradox_threshold(
    a: (Behavior, &HeadwayDistribution),
    b: (Behavior, &HeadwayDistribution),
    q_lo: f64,
    q_hi: f64,
) -> Option<f64> {
    let max_excess = |q: f64| -> f64 {
        let sa = service(a.0, a.1, q);
        let sb = service(b.0, b.1, q);
        let lam_max = (1.0 / sa.mean).min(1.0 / sb.mean) * (1.0 - 1e-9);
        let diff = |lam: f64| -> f64 {
            let la = lam * sa.mean + lam * lam * sa.second_moment / (2.0 * (1.0 - lam * sa.mean));
            let lb = lam * sb.mean + lam * lam * sb.second_moment / (2.0 * (1.0 - lam * sb.mean));
            lb - la
        };
        let mut best = f64::NEG_INFINITY;
        const N: usize = 600;
        for i in 1..N {
            best = best.max(diff(lam_max * i as f64 / N as f64));
        }
        // refine around the best grid point
        let i_best = (1..N)
            .max_by(|&i, &j| {
                diff(lam_max * i as f64 / N as f64)
                    .total_cmp(&diff(lam_max * j as f64 / N as f64))
            })
            .unwrap();
        let lo = lam_max * (i_best.saturating_sub(1)) as f64 / N as f64;
        let hi = lam_max * (i_best + 1).min(N) as f64 / N as f64;
        let refined = golden_section(&diff, lo.max(lam_max * 1e-9), hi, ExtremumKind::Maximum, 1e-10);
        best.max(diff(refined))
    };
    let (mut lo, mut hi) = (q_lo, q_hi);
    let (flo, fhi) = (max_excess(lo), max_excess(hi));
    if flo <= 0.0 || fhi >= 0.0 {
        return None;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if max_excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SECONDS_PER_HOUR;

    fn law_622() -> HeadwayDistribution {
        HeadwayDistribution::discrete(&[(6.22, 0.9), (14.0, 0.1)]).unwrap()
    }

    #[test]
    fn b1_service_matches_closed_form() {
        let d = HeadwayDistribution::deterministic(7.0).unwrap();
        let q = 1.0 / 6.0;
        let sv = service(Behavior::B1, &d, q);
        let expected = ((q * 7.0).exp_m1()) / q;
        assert!((sv.mean - expected).abs() < 1e-12);
        assert!((sv.mean - 13.265).abs() < 1e-2);
        assert!((sv.lst(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn b2_exponential_capacity_is_flat() {
        let d = HeadwayDistribution::exponential(1.0 / 7.0).unwrap();
        for q in [1e-4, 1e-3, 0.01, 0.1, 1.0, 5.0] {
            let sv = service(Behavior::B2, &d, q);
            assert!(
                (sv.mean - 7.0).abs() < 1e-9,
                "mean {} at q={}",
                sv.mean,
                q
            );
        }
    }

    #[test]
    fn b3_exponential_goes_unstable() {
        let d = HeadwayDistribution::exponential(1.0 / 7.0).unwrap();
        let sv = service(Behavior::B3, &d, 1.0 / 6.0);
        assert!(sv.mean.is_infinite());
        assert_eq!(capacity(Behavior::B3, &d, 1.0 / 6.0), 0.0);
        // below alpha the mean is 1/(alpha - q)
        let q = 0.1;
        let sv = service(Behavior::B3, &d, q);
        assert!((sv.mean - 1.0 / (1.0 / 7.0 - q)).abs() < 1e-10);
    }

    #[test]
    fn zero_rate_limit_is_mean_headway() {
        let d = law_622();
        for b in Behavior::ALL {
            let cap = capacity(b, &d, 0.0);
            assert!((cap - 1.0 / 6.998).abs() < 1e-12, "{b:?}");
        }
        let det7 = HeadwayDistribution::deterministic(7.0).unwrap();
        let cap = capacity(Behavior::B1, &det7, 0.0) * SECONDS_PER_HOUR;
        assert!((cap - 514.2857142857143).abs() < 1e-9);
    }

    #[test]
    fn capacity_anchor_values() {
        let q = 1.0 / 6.0;
        let det7 = HeadwayDistribution::deterministic(7.0).unwrap();
        let c1 = capacity(Behavior::B1, &det7, q) * SECONDS_PER_HOUR;
        assert!((c1 - 271.34).abs() < 0.05, "{c1}");

        let d = law_622();
        let c2 = capacity(Behavior::B2, &d, q) * SECONDS_PER_HOUR;
        assert!((c2 - 294.0).abs() < 0.05, "{c2}");
        let c3 = capacity(Behavior::B3, &d, q) * SECONDS_PER_HOUR;
        assert!((c3 - 233.5).abs() < 0.1, "{c3}");
    }

    #[test]
    fn b1_reduces_nondegenerate_law_to_mean() {
        let d = law_622();
        let det = HeadwayDistribution::deterministic(d.mean()).unwrap();
        let q = 0.21;
        assert_eq!(capacity(Behavior::B1, &d, q), capacity(Behavior::B1, &det, q));
    }

    #[test]
    fn second_moments_match_lst_differentiation() {
        let d = law_622();
        let q = 1.0 / 60.0;
        for b in Behavior::ALL {
            let sv = service(b, &d, q);
            let est = numerics::lst_moment(|s| sv.lst(s), MomentOrder::Second).unwrap();
            let rel = (est.value - sv.second_moment).abs() / sv.second_moment;
            assert!(rel < 1e-4, "{b:?}: analytic {} numeric {}", sv.second_moment, est.value);
        }
    }

    #[test]
    fn queue_metrics_edges() {
        let d = law_622();
        let m = queue_metrics(Behavior::B2, &d, 1.0 / 60.0, 0.0).unwrap();
        assert_eq!(m.mean_queue_length, 0.0);

        // B3 exponential with alpha > q >= alpha/2: stable but infinite mean queue
        let e = HeadwayDistribution::exponential(1.0 / 7.0).unwrap();
        let q = 0.6 * (1.0 / 7.0);
        let m = queue_metrics(Behavior::B3, &e, q, 1e-4).unwrap();
        assert!(m.rho < 1.0);
        assert!(m.infinite_second_moment);
        assert!(m.mean_queue_length.is_infinite());

        // unstable
        let err = queue_metrics(Behavior::B1, &d, 1.0 / 6.0, 1.0).unwrap_err();
        match err {
            QueueError::Unstable { rho } => assert!(rho >= 1.0),
        }
    }

    #[test]
    fn example1_queue_crossings() {
        let det7 = HeadwayDistribution::deterministic(7.0).unwrap();
        let d = HeadwayDistribution::discrete(&[(4.0, 0.9), (34.0, 0.1)]).unwrap();
        let q = 60.0 / SECONDS_PER_HOUR;
        let roots = queue_length_crossings((Behavior::B1, &det7), (Behavior::B2, &d), q);
        assert_eq!(roots.len(), 2, "{roots:?}");
        let veh: Vec<f64> = roots.iter().map(|r| r * SECONDS_PER_HOUR).collect();
        assert!((veh[0] - 71.23).abs() < 0.05, "{veh:?}");
        assert!((veh[1] - 445.06).abs() < 0.05, "{veh:?}");
    }

    #[test]
    fn example1_paradox_threshold() {
        let det7 = HeadwayDistribution::deterministic(7.0).unwrap();
        let d = HeadwayDistribution::discrete(&[(4.0, 0.9), (34.0, 0.1)]).unwrap();
        let q = queue_paradox_threshold(
            (Behavior::B1, &det7),
            (Behavior::B2, &d),
            80.0 / SECONDS_PER_HOUR,
            200.0 / SECONDS_PER_HOUR,
        )
        .expect("threshold exists");
        assert!((q * SECONDS_PER_HOUR - 124.64).abs() < 0.05, "{}", q * SECONDS_PER_HOUR);
    }

    #[test]
    fn stationary_points_examples() {
        let to_s = |veh: f64| veh / SECONDS_PER_HOUR;

        let a = HeadwayDistribution::discrete(&[(3.11, 0.9), (42.0, 0.1)]).unwrap();
        let pts = find_stationary_points(
            |q| capacity(Behavior::B2, &a, q),
            to_s(10.0),
            to_s(10_000.0),
            1e-3,
        );
        assert_eq!(pts.len(), 1, "{pts:?}");
        assert_eq!(pts[0].kind, ExtremumKind::Maximum);
        assert!((pts[0].location * SECONDS_PER_HOUR - 437.7).abs() < 2.0);

        let bturn = HeadwayDistribution::discrete(&[(7.71, 0.9), (0.57, 0.1)]).unwrap();
        let pts = find_stationary_points(
            |q| capacity(Behavior::B2, &bturn, q),
            to_s(10.0),
            to_s(10_000.0),
            1e-3,
        );
        assert_eq!(pts.len(), 2, "{pts:?}");
        assert_eq!(pts[0].kind, ExtremumKind::Minimum);
        assert!((pts[0].location * SECONDS_PER_HOUR - 1964.6).abs() < 5.0);
        assert_eq!(pts[1].kind, ExtremumKind::Maximum);
        assert!((pts[1].location * SECONDS_PER_HOUR - 6070.2).abs() < 10.0);

        // memoryless law: constant capacity, no stationary points
        let e = HeadwayDistribution::exponential(1.0 / 7.0).unwrap();
        let pts = find_stationary_points(
            |q| capacity(Behavior::B2, &e, q),
            to_s(10.0),
            to_s(10_000.0),
            1e-3,
        );
        assert!(pts.is_empty(), "{pts:?}");
    }
}
