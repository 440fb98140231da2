//! Discrete-event Monte Carlo oracle for the analytic capacities and queue
//! metrics.
//!
//! Saturated mode keeps a driver at the head of the minor road at all times
//! and estimates capacity as crossings per second; queue mode feeds Poisson
//! minor-road arrivals and measures the time-average queue length and mean
//! sojourn. The head driver at attempt `j` crosses iff the current gap (time
//! to the next major-road arrival) exceeds the attempt headway `T_j`; the
//! crossing completes `T_j` after the gap opens, and the next driver starts
//! immediately at that epoch.
//!
//! For Poisson major traffic the residual gap seen by a fresh driver is
//! regenerated memorylessly. For MMPP traffic the simulator tracks the actual
//! arrival process, so the head driver sees the true residual gap and the
//! true background state; this is exactly the bias that the per-state
//! decomposition formulas miss.
//!
//! # Random streams
//!
//! Reproducibility: every random stream is a ChaCha12 generator keyed by
//! splitmix64-mixing `(master seed, replication index, stream role)`, so a
//! fixed `(config, seed)` pair yields bit-identical estimates, replications
//! are mutually independent, and reordering replications cannot change the
//! pooled result.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::distributions::HeadwayDistribution;
use crate::impatience::ImpatiencePolicy;
use crate::mmpp::MmppSpec;
use crate::poisson::Behavior;

/// Leading fraction of the horizon discarded as warm-up.
const WARMUP_FRACTION: f64 = 0.01;

/// Two-sided 99% Student-t quantile for the given degrees of freedom; the
/// normal quantile is a poor cover below ~30 replications.
fn t_quantile_995(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        63.657, 9.925, 5.841, 4.604, 4.032, 3.707, 3.499, 3.355, 3.250, 3.169, 3.106, 3.055,
        3.012, 2.977, 2.947, 2.921, 2.898, 2.878, 2.861, 2.845, 2.831, 2.819, 2.807, 2.797,
        2.787, 2.779, 2.771, 2.763, 2.756, 2.750,
    ];
    if df == 0 {
        return f64::INFINITY;
    }
    if df <= TABLE.len() {
        return TABLE[df - 1];
    }
    let z = 2.575_829_303_548_900_4;
    z + (z * z * z + z) / (4.0 * df as f64)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("horizon too short to pass warm-up (need at least 100 crossings or positive seconds)")]
    HorizonTooShort,
    #[error("at least one replication is required")]
    NoReplications,
    #[error("impatience under MMPP traffic is not supported")]
    UnsupportedCombination,
    #[error("queue simulation needs a positive minor-road rate")]
    MissingMinorRate,
}

#[derive(Debug, Clone)]
pub enum ArrivalModel {
    /// Poisson with the given rate, per second.
    Poisson(f64),
    Mmpp(MmppSpec),
}

#[derive(Debug, Clone, Copy)]
pub enum Horizon {
    /// Number of completed crossings per replication.
    Crossings(u64),
    /// Simulated seconds per replication.
    Seconds(f64),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub arrivals: ArrivalModel,
    pub behavior: Behavior,
    pub headway: HeadwayDistribution,
    pub impatience: ImpatiencePolicy,
    /// Minor-road Poisson rate; `None` selects saturated mode.
    pub minor_rate: Option<f64>,
    pub horizon: Horizon,
    pub replications: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn saturated(
        arrivals: ArrivalModel,
        behavior: Behavior,
        headway: HeadwayDistribution,
        seed: u64,
    ) -> Self {
        Self {
            arrivals,
            behavior,
            headway,
            impatience: ImpatiencePolicy::None,
            minor_rate: None,
            horizon: Horizon::Crossings(100_000),
            replications: 10,
            seed,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.replications == 0 {
            return Err(SimError::NoReplications);
        }
        match self.horizon {
            Horizon::Crossings(n) if n < 100 => return Err(SimError::HorizonTooShort),
            Horizon::Seconds(s) if !(s > 0.0) => return Err(SimError::HorizonTooShort),
            _ => {}
        }
        if matches!(self.arrivals, ArrivalModel::Mmpp(_)) && !self.impatience.is_none() {
            return Err(SimError::UnsupportedCombination);
        }
        Ok(())
    }
}

/// Pooled estimate over replications with its 99% confidence interval.
#[derive(Debug, Clone)]
pub struct SimEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci99: (f64, f64),
    /// Total events (attempts) processed across replications.
    pub events: u64,
    pub per_replication: Vec<f64>,
}

impl SimEstimate {
    fn pool(per_replication: Vec<f64>, events: u64) -> Self {
        let n = per_replication.len() as f64;
        let mean = per_replication.iter().sum::<f64>() / n;
        let std_error = if per_replication.len() > 1 {
            let var = per_replication.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (n - 1.0);
            (var / n).sqrt()
        } else {
            f64::INFINITY
        };
        let t = t_quantile_995(per_replication.len().saturating_sub(1));
        SimEstimate {
            mean,
            std_error,
            ci99: (mean - t * std_error, mean + t * std_error),
            events,
            per_replication,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.ci99.0 && value <= self.ci99.1
    }
}

/// Stream roles for seed splitting.
mod role {
    pub const MAJOR: u64 = 1;
    pub const HEADWAY: u64 = 2;
    pub const MINOR: u64 = 3;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha12 stream keyed by `(master, replication, role)`.
fn stream_rng(master: u64, replication: u64, role: u64) -> ChaCha12Rng {
    let mut state = master;
    let _ = splitmix64(&mut state);
    state ^= replication.wrapping_mul(0xA076_1D64_78BD_642F);
    let _ = splitmix64(&mut state);
    state ^= role.wrapping_mul(0xE703_7ED1_A0B4_28DB);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

fn sample_exp<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    debug_assert!(rate > 0.0);
    let u: f64 = rng.gen::<f64>();
    -(1.0 - u).ln() / rate
}

/// Major-road arrival stream as seen by the head driver.
enum MajorRoad {
    /// Memoryless: the residual gap is regenerated at every attempt.
    Poisson { rate: f64, rng: ChaCha12Rng },
    /// Tracked MMPP: background state and the actual next arrival epoch.
    Tracked {
        exit: Vec<f64>,
        rates: Vec<f64>,
        jump_rows: Vec<Vec<(usize, f64)>>,
        state: usize,
        cursor: f64,
        next_arrival: f64,
        /// Time the background chain has spent in each state, up to `cursor`.
        occupancy: Vec<f64>,
        rng: ChaCha12Rng,
    },
}

impl MajorRoad {
    fn poisson(rate: f64, rng: ChaCha12Rng) -> Self {
        MajorRoad::Poisson { rate, rng }
    }

    fn tracked(spec: &MmppSpec, mut rng: ChaCha12Rng) -> Self {
        let d = spec.dim();
        let exit: Vec<f64> = (0..d).map(|i| spec.exit_rate(i)).collect();
        let rates = spec.rates().to_vec();
        let jump_rows: Vec<Vec<(usize, f64)>> = (0..d)
            .map(|i| {
                let total = exit[i];
                (0..d)
                    .filter(|&j| j != i && spec.transition(i, j) > 0.0)
                    .map(|j| (j, spec.transition(i, j) / total))
                    .collect()
            })
            .collect();
        // start in the stationary state so warm-up stays mild
        let pi = spec.stationary();
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut state = d - 1;
        for (i, p) in pi.iter().enumerate() {
            acc += p;
            if u < acc {
                state = i;
                break;
            }
        }
        let occupancy = vec![0.0; d];
        let mut road = MajorRoad::Tracked {
            exit,
            rates,
            jump_rows,
            state,
            cursor: 0.0,
            next_arrival: f64::INFINITY,
            occupancy,
            rng,
        };
        road.generate_next();
        road
    }

    fn generate_next(&mut self) {
        if let MajorRoad::Tracked {
            exit,
            rates,
            jump_rows,
            state,
            cursor,
            next_arrival,
            occupancy,
            rng,
        } = self
        {
            loop {
                let q = rates[*state];
                let mu = exit[*state];
                let to_arrival = if q > 0.0 { sample_exp(rng, q) } else { f64::INFINITY };
                let to_jump = if mu > 0.0 { sample_exp(rng, mu) } else { f64::INFINITY };
                if to_arrival <= to_jump {
                    occupancy[*state] += to_arrival;
                    *cursor += to_arrival;
                    *next_arrival = *cursor;
                    return;
                }
                occupancy[*state] += to_jump;
                *cursor += to_jump;
                let u: f64 = rng.gen();
                let row = &jump_rows[*state];
                let mut acc = 0.0;
                let mut chosen = row.last().map(|&(j, _)| j).unwrap_or(*state);
                for &(j, p) in row {
                    acc += p;
                    if u < acc {
                        chosen = j;
                        break;
                    }
                }
                *state = chosen;
            }
        }
    }

    /// Gap between `now` and the next major-road arrival; one event.
    fn gap_from(&mut self, now: f64) -> f64 {
        match self {
            MajorRoad::Poisson { rate, rng } => sample_exp(rng, *rate),
            MajorRoad::Tracked { .. } => {
                loop {
                    let next = match self {
                        MajorRoad::Tracked { next_arrival, .. } => *next_arrival,
                        _ => unreachable!(),
                    };
                    if next >= now {
                        return next - now;
                    }
                    // arrivals that passed while nobody watched
                    self.generate_next();
                }
            }
        }
    }

    /// The observed arrival has passed; advance the stream.
    fn pass_car(&mut self) {
        if matches!(self, MajorRoad::Tracked { .. }) {
            self.generate_next();
        }
    }
}

/// Per-driver headway sequence under the configured behavior and policy.
struct HeadwayDraw<'a> {
    behavior: Behavior,
    law: &'a HeadwayDistribution,
    policy: &'a ImpatiencePolicy,
    b1_mean: f64,
    first: f64,
    rng: &'a mut ChaCha12Rng,
}

impl HeadwayDraw<'_> {
    fn attempt(&mut self, j: usize) -> f64 {
        let map = self.policy.attempt_map(j);
        match self.behavior {
            Behavior::B1 => map.apply(self.b1_mean),
            Behavior::B2 => map.apply(self.law.sample(self.rng)),
            Behavior::B3 => map.apply(self.first),
        }
    }
}

struct ReplicationOutcome {
    value: f64,
    secondary: f64,
    events: u64,
    unstable: bool,
}

fn run_saturated(cfg: &SimConfig, rep: u64) -> ReplicationOutcome {
    let mut major = match &cfg.arrivals {
        ArrivalModel::Poisson(q) => {
            MajorRoad::poisson(*q, stream_rng(cfg.seed, rep, role::MAJOR))
        }
        ArrivalModel::Mmpp(spec) => {
            MajorRoad::tracked(spec, stream_rng(cfg.seed, rep, role::MAJOR))
        }
    };
    let mut headway_rng = stream_rng(cfg.seed, rep, role::HEADWAY);
    let b1_mean = cfg.headway.mean();

    let (target_crossings, target_seconds) = match cfg.horizon {
        Horizon::Crossings(n) => (n, f64::INFINITY),
        Horizon::Seconds(s) => (u64::MAX, s),
    };

    let mut t = 0.0f64;
    let mut crossings = 0u64;
    let mut events = 0u64;
    let mut mark: Option<(f64, u64)> = None;
    let past_warmup = |t: f64, crossings: u64| match cfg.horizon {
        Horizon::Crossings(n) => crossings as f64 >= (n as f64) * WARMUP_FRACTION,
        Horizon::Seconds(s) => t >= s * WARMUP_FRACTION,
    };

    while crossings < target_crossings && t < target_seconds {
        let first = match cfg.behavior {
            Behavior::B3 => cfg.headway.sample(&mut headway_rng),
            _ => 0.0,
        };
        let mut draw = HeadwayDraw {
            behavior: cfg.behavior,
            law: &cfg.headway,
            policy: &cfg.impatience,
            b1_mean,
            first,
            rng: &mut headway_rng,
        };
        let mut j = 1usize;
        loop {
            let t_j = draw.attempt(j);
            let gap = major.gap_from(t);
            events += 1;
            if gap > t_j {
                t += t_j;
                crossings += 1;
                break;
            }
            t += gap;
            major.pass_car();
            j += 1;
        }
        if mark.is_none() && past_warmup(t, crossings) {
            mark = Some((t, crossings));
        }
    }
    let (t0, c0) = mark.unwrap_or((0.0, 0));
    let elapsed = t - t0;
    let served = crossings - c0;
    ReplicationOutcome {
        value: served as f64 / elapsed,
        secondary: 0.0,
        events,
        unstable: false,
    }
}

/// Saturated-mode capacity estimate, crossings per second.
pub fn simulate_capacity(cfg: &SimConfig) -> Result<SimEstimate, SimError> {
    cfg.validate()?;
    let outcomes: Vec<ReplicationOutcome> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| run_saturated(cfg, rep))
        .collect();
    let events = outcomes.iter().map(|o| o.events).sum();
    Ok(SimEstimate::pool(outcomes.into_iter().map(|o| o.value).collect(), events))
}

/// Queue-mode estimates: time-average queue length and mean sojourn.
#[derive(Debug, Clone)]
pub struct QueueSimResult {
    pub queue_length: SimEstimate,
    pub delay: SimEstimate,
    /// Linear-growth heuristic tripped in at least one replication; the
    /// estimates are then meaningless.
    pub unstable: bool,
}

fn run_queue(cfg: &SimConfig, lambda: f64, rep: u64) -> ReplicationOutcome {
    let mut major = match &cfg.arrivals {
        ArrivalModel::Poisson(q) => {
            MajorRoad::poisson(*q, stream_rng(cfg.seed, rep, role::MAJOR))
        }
        ArrivalModel::Mmpp(spec) => {
            MajorRoad::tracked(spec, stream_rng(cfg.seed, rep, role::MAJOR))
        }
    };
    let mut headway_rng = stream_rng(cfg.seed, rep, role::HEADWAY);
    let mut minor_rng = stream_rng(cfg.seed, rep, role::MINOR);
    let b1_mean = cfg.headway.mean();

    let (target_departures, target_seconds) = match cfg.horizon {
        Horizon::Crossings(n) => (n, f64::INFINITY),
        Horizon::Seconds(s) => (u64::MAX, s),
    };
    let warmup_t = match cfg.horizon {
        Horizon::Seconds(s) => s * WARMUP_FRACTION,
        // expected warm-up duration: 1% of departures at the offered rate
        Horizon::Crossings(n) => (n as f64) * WARMUP_FRACTION / lambda,
    };

    let mut queue: std::collections::VecDeque<f64> = std::collections::VecDeque::new();
    let mut t = 0.0f64;
    let mut next_arrival = sample_exp(&mut minor_rng, lambda);
    let mut departures = 0u64;
    let mut events = 0u64;

    let measured_from = warmup_t;
    let mut area = 0.0f64; // integral of queue length after warm-up
    let mut sojourn_sum = 0.0f64;
    let mut sojourn_count = 0u64;
    // snapshot at the measurement midpoint for the linear-growth heuristic
    let mut mid_mark: Option<(f64, f64)> = None;
    let mid_seconds = match cfg.horizon {
        Horizon::Seconds(s) => Some(measured_from + 0.5 * (s - measured_from)),
        Horizon::Crossings(_) => None,
    };

    let advance = |area: &mut f64, from: f64, to: f64, q_len: usize| {
        let lo = from.max(measured_from);
        if to > lo {
            *area += (to - lo) * q_len as f64;
        }
    };

    while departures < target_departures && t < target_seconds {
        if queue.is_empty() {
            // idle until the next minor-road arrival
            advance(&mut area, t, next_arrival, 0);
            t = next_arrival;
            queue.push_back(t);
            next_arrival = t + sample_exp(&mut minor_rng, lambda);
        }
        // serve the head driver
        let arrival_of_head = *queue.front().unwrap();
        let first = match cfg.behavior {
            Behavior::B3 => cfg.headway.sample(&mut headway_rng),
            _ => 0.0,
        };
        let mut draw = HeadwayDraw {
            behavior: cfg.behavior,
            law: &cfg.headway,
            policy: &cfg.impatience,
            b1_mean,
            first,
            rng: &mut headway_rng,
        };
        let mut ts = t;
        let mut j = 1usize;
        let departure = loop {
            let t_j = draw.attempt(j);
            let gap = major.gap_from(ts);
            events += 1;
            if gap > t_j {
                break ts + t_j;
            }
            ts += gap;
            major.pass_car();
            j += 1;
        };
        // fold in minor arrivals that occurred during the service
        while next_arrival <= departure {
            advance(&mut area, t, next_arrival, queue.len());
            t = next_arrival;
            queue.push_back(t);
            next_arrival = t + sample_exp(&mut minor_rng, lambda);
        }
        advance(&mut area, t, departure, queue.len());
        t = departure;
        queue.pop_front();
        departures += 1;
        if departure > measured_from {
            sojourn_sum += departure - arrival_of_head;
            sojourn_count += 1;
        }
        if mid_mark.is_none() {
            let at_mid = match mid_seconds {
                Some(m) => t >= m,
                None => departures >= target_departures / 2,
            };
            if at_mid {
                mid_mark = Some((t, area));
            }
        }
    }

    let span = (t - measured_from).max(f64::MIN_POSITIVE);
    let mean_queue = area / span;
    let mean_delay = if sojourn_count > 0 { sojourn_sum / sojourn_count as f64 } else { 0.0 };

    // linear growth: the second half carries much more queue mass
    let unstable = match mid_mark {
        Some((t_mid, area_mid)) if t > t_mid => {
            let half1 = area_mid / ((t_mid - measured_from).max(f64::MIN_POSITIVE));
            let half2 = (area - area_mid) / (t - t_mid);
            half2 > 2.0 * half1 + 5.0
        }
        _ => false,
    };

    ReplicationOutcome { value: mean_queue, secondary: mean_delay, events, unstable }
}

pub fn simulate_queue(cfg: &SimConfig) -> Result<QueueSimResult, SimError> {
    cfg.validate()?;
    let lambda = match cfg.minor_rate {
        Some(l) if l > 0.0 => l,
        _ => return Err(SimError::MissingMinorRate),
    };
    let outcomes: Vec<ReplicationOutcome> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| run_queue(cfg, lambda, rep))
        .collect();
    let events = outcomes.iter().map(|o| o.events).sum();
    let unstable = outcomes.iter().any(|o| o.unstable);
    let lengths: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let delays: Vec<f64> = outcomes.iter().map(|o| o.secondary).collect();
    Ok(QueueSimResult {
        queue_length: SimEstimate::pool(lengths, events),
        delay: SimEstimate::pool(delays, events),
        unstable,
    })
}

/// Empirical background-state occupancy and arrival rate of an MMPP over the
/// given horizon (validation helper for the tracked generator).
pub fn mmpp_empirics(spec: &MmppSpec, seconds: f64, seed: u64) -> (Vec<f64>, f64) {
    let mut road = MajorRoad::tracked(spec, stream_rng(seed, 0, role::MAJOR));
    let mut arrivals = 0u64;
    loop {
        let cursor = match &road {
            MajorRoad::Tracked { cursor, .. } => *cursor,
            _ => unreachable!(),
        };
        if cursor >= seconds {
            break;
        }
        arrivals += 1;
        road.pass_car();
    }
    match &road {
        MajorRoad::Tracked { occupancy, cursor, .. } => {
            let total: f64 = occupancy.iter().sum();
            (occupancy.iter().map(|o| o / total).collect(), arrivals as f64 / cursor)
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson;
    use crate::SECONDS_PER_HOUR;

    fn base_cfg(behavior: Behavior, law: HeadwayDistribution, q: f64) -> SimConfig {
        SimConfig {
            arrivals: ArrivalModel::Poisson(q),
            behavior,
            headway: law,
            impatience: ImpatiencePolicy::None,
            minor_rate: None,
            horizon: Horizon::Crossings(40_000),
            replications: 6,
            seed: 20_240_517,
        }
    }

    #[test]
    fn reproducible_estimates() {
        let law = HeadwayDistribution::discrete(&[(6.22, 0.9), (14.0, 0.1)]).unwrap();
        let cfg = base_cfg(Behavior::B2, law, 1.0 / 6.0);
        let a = simulate_capacity(&cfg).unwrap();
        let b = simulate_capacity(&cfg).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.per_replication, b.per_replication);
    }

    #[test]
    fn pooling_is_order_independent() {
        let law = HeadwayDistribution::deterministic(7.0).unwrap();
        let cfg = base_cfg(Behavior::B1, law, 1.0 / 6.0);
        let est = simulate_capacity(&cfg).unwrap();
        let mut shuffled = est.per_replication.clone();
        shuffled.reverse();
        let repooled = SimEstimate::pool(shuffled, est.events);
        assert!((repooled.mean - est.mean).abs() < 1e-12);
        assert!((repooled.std_error - est.std_error).abs() < 1e-12);
    }

    #[test]
    fn ci_narrows_with_more_replications() {
        let law = HeadwayDistribution::deterministic(7.0).unwrap();
        let mut cfg = base_cfg(Behavior::B1, law, 1.0 / 6.0);
        cfg.horizon = Horizon::Crossings(5_000);
        cfg.replications = 4;
        let wide = simulate_capacity(&cfg).unwrap();
        cfg.replications = 16;
        let narrow = simulate_capacity(&cfg).unwrap();
        assert!(narrow.std_error < wide.std_error);
    }

    #[test]
    fn saturated_capacity_brackets_closed_forms() {
        let q = 1.0 / 6.0;
        let det = HeadwayDistribution::deterministic(7.0).unwrap();
        let cfg = base_cfg(Behavior::B1, det.clone(), q);
        let est = simulate_capacity(&cfg).unwrap();
        let exact = poisson::capacity(Behavior::B1, &det, q);
        assert!(est.contains(exact), "CI {:?} misses {exact}", est.ci99);

        let law = HeadwayDistribution::discrete(&[(6.22, 0.9), (14.0, 0.1)]).unwrap();
        for b in [Behavior::B2, Behavior::B3] {
            let cfg = base_cfg(b, law.clone(), q);
            let est = simulate_capacity(&cfg).unwrap();
            let exact = poisson::capacity(b, &law, q);
            assert!(est.contains(exact), "{b:?}: CI {:?} misses {exact}", est.ci99);
        }
    }

    #[test]
    fn b2_exponential_flat_capacity() {
        let law = HeadwayDistribution::exponential(1.0 / 7.0).unwrap();
        for q in [0.05, 0.5] {
            let cfg = base_cfg(Behavior::B2, law.clone(), q);
            let est = simulate_capacity(&cfg).unwrap();
            let exact = 1.0 / 7.0;
            assert!(est.contains(exact), "q={q}: CI {:?} misses {exact}", est.ci99);
        }
    }

    #[test]
    fn impatience_series_inside_ci() {
        let q = 900.0 / SECONDS_PER_HOUR;
        let policy = ImpatiencePolicy::geometric(0.9, 4.0).unwrap();
        let det = HeadwayDistribution::deterministic(7.0).unwrap();
        let mut cfg = base_cfg(Behavior::B1, det.clone(), q);
        cfg.impatience = policy.clone();
        let est = simulate_capacity(&cfg).unwrap();
        let exact = crate::impatience::capacity_impatient(Behavior::B1, &det, &policy, q);
        assert!(est.contains(exact), "CI {:?} misses {exact}", est.ci99);
    }

    #[test]
    fn mmpp_tracked_capacity_matches_cycle_solver() {
        let spec = MmppSpec::new(
            &[vec![-0.02, 0.02], vec![0.1, -0.1]],
            &[600.0 / SECONDS_PER_HOUR, 2400.0 / SECONDS_PER_HOUR],
        )
        .unwrap();
        let law = HeadwayDistribution::discrete(&[(56.0 / 9.0, 0.9), (14.0, 0.1)]).unwrap();
        let mut cfg = base_cfg(Behavior::B2, law.clone(), 0.0);
        cfg.arrivals = ArrivalModel::Mmpp(spec.clone());
        cfg.horizon = Horizon::Crossings(60_000);
        let est = simulate_capacity(&cfg).unwrap();
        let analytic =
            crate::mmpp::capacity_mmpp(Behavior::B2, &spec, &law, 128, 1e-5).unwrap().capacity;
        assert!(est.contains(analytic), "CI {:?} misses {analytic}", est.ci99);
    }

    #[test]
    fn mmpp_rejects_impatience() {
        let spec = MmppSpec::poisson(0.2).unwrap();
        let law = HeadwayDistribution::deterministic(7.0).unwrap();
        let mut cfg = base_cfg(Behavior::B1, law, 0.0);
        cfg.arrivals = ArrivalModel::Mmpp(spec);
        cfg.impatience = ImpatiencePolicy::geometric(0.9, 4.0).unwrap();
        assert_eq!(simulate_capacity(&cfg).unwrap_err(), SimError::UnsupportedCombination);
    }

    #[test]
    fn mmpp_empirics_match_stationary_law() {
        let spec = MmppSpec::new(
            &[vec![-1.0 / 60.0, 1.0 / 60.0], vec![1.0 / 240.0, -1.0 / 240.0]],
            &[0.5, 0.05],
        )
        .unwrap();
        let (occ, rate) = mmpp_empirics(&spec, 2_000_000.0, 99);
        let pi = spec.stationary();
        assert!((occ[0] - pi[0]).abs() < 0.02, "{occ:?} vs {pi:?}");
        let qbar = spec.average_rate();
        assert!((rate - qbar).abs() / qbar < 0.02, "{rate} vs {qbar}");
    }

    #[test]
    fn queue_little_law_and_pk() {
        let q = 60.0 / SECONDS_PER_HOUR;
        let law = HeadwayDistribution::deterministic(7.0).unwrap();
        let lambda = 200.0 / SECONDS_PER_HOUR;
        let mut cfg = base_cfg(Behavior::B1, law.clone(), q);
        cfg.minor_rate = Some(lambda);
        cfg.horizon = Horizon::Crossings(40_000);
        cfg.replications = 8;
        let res = simulate_queue(&cfg).unwrap();
        assert!(!res.unstable);

        // Little's law within CI noise
        let little = lambda * res.delay.mean;
        let slack = 4.0 * res.queue_length.std_error.max(1e-3);
        assert!(
            (res.queue_length.mean - little).abs() < slack.max(0.05),
            "L {} vs lambda W {}",
            res.queue_length.mean,
            little
        );

        // PK mean queue length within the CI
        let pk = poisson::queue_metrics(Behavior::B1, &law, q, lambda)
            .unwrap()
            .mean_queue_length;
        assert!(
            res.queue_length.contains(pk)
                || (res.queue_length.mean - pk).abs() < 6.0 * res.queue_length.std_error,
            "sim {} +- {} vs pk {pk}",
            res.queue_length.mean,
            res.queue_length.std_error
        );
    }

    #[test]
    fn queue_detects_instability() {
        let q = 1.0 / 6.0;
        let law = HeadwayDistribution::deterministic(7.0).unwrap();
        // capacity ~271 veh/h; offer 500 veh/h
        let mut cfg = base_cfg(Behavior::B1, law, q);
        cfg.minor_rate = Some(500.0 / SECONDS_PER_HOUR);
        cfg.horizon = Horizon::Crossings(20_000);
        cfg.replications = 2;
        let res = simulate_queue(&cfg).unwrap();
        assert!(res.unstable);
    }

    #[test]
    fn horizon_validation() {
        let law = HeadwayDistribution::deterministic(7.0).unwrap();
        let mut cfg = base_cfg(Behavior::B1, law, 0.1);
        cfg.horizon = Horizon::Crossings(50);
        assert_eq!(simulate_capacity(&cfg).unwrap_err(), SimError::HorizonTooShort);
    }
}
