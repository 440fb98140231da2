//! Minor-road capacity under Markov-modulated ("platooned") major-road
//! traffic.
//!
//! Major-road arrivals form a Markov modulated Poisson process: an autonomous
//! background chain with rate matrix `M` switches the arrival rate between
//! per-state values `q_i`. Deterministic critical headways are approximated by
//! Erlang phases (`k` exponential phases of rate `kappa = k/T`), which makes
//! the whole system Markovian. A regeneration cycle runs between consecutive
//! epochs at which the background chain sits in the reference state (state 1)
//! and a crossing completes; the capacity is `h10 / tau10`, mean crossings per
//! cycle over mean cycle duration, both obtained from one linear system per
//! quantity.
//!
//! The balance equations couple each phase only to the next phase, to the
//! same phase in other background states, and to the phase-0 block. The
//! solver eliminates phases backwards, carrying a d-dimensional affine map,
//! so the cost is linear in the phase count; the dense matrix of the same
//! system (`assemble_b1`) is retained for moderate sizes and cross-checks.

use thiserror::Error;

use crate::distributions::HeadwayDistribution;
use crate::numerics::{DenseSystem, LuFactors, NumericsError};
use crate::poisson::Behavior;

/// Phase counts double up to this cap (per atom) before giving up.
pub const PHASE_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MmppError {
    #[error("transition matrix must be square and match the rate vector ({0} states)")]
    ShapeMismatch(usize),
    #[error("row {row} of the transition matrix sums to {sum}, expected 0")]
    RowSum { row: usize, sum: f64 },
    #[error("off-diagonal transition rate at ({row}, {col}) must be nonnegative")]
    NegativeTransition { row: usize, col: usize },
    #[error("arrival rate for state {0} must be nonnegative and finite")]
    InvalidRate(usize),
    #[error("background chain is not irreducible")]
    Reducible,
    #[error("headway law must have finite support (deterministic or discrete)")]
    UnsupportedLaw,
    #[error("average arrival rate must be positive")]
    ZeroArrivalRate,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Background Markov chain plus per-state Poisson arrival rates.
#[derive(Debug, Clone, PartialEq)]
pub struct MmppSpec {
    d: usize,
    /// Row-major `d x d` rate matrix; rows sum to zero.
    m: Vec<f64>,
    /// Per-state arrival rates, per second.
    q: Vec<f64>,
}

impl MmppSpec {
    pub fn new(transition: &[Vec<f64>], rates: &[f64]) -> Result<Self, MmppError> {
        let d = rates.len();
        if d == 0 || transition.len() != d || transition.iter().any(|r| r.len() != d) {
            return Err(MmppError::ShapeMismatch(d));
        }
        let mut m = Vec::with_capacity(d * d);
        for (i, row) in transition.iter().enumerate() {
            let mut sum = 0.0;
            let mut scale = 0.0f64;
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(MmppError::NegativeTransition { row: i, col: j });
                }
                if i != j && v < 0.0 {
                    return Err(MmppError::NegativeTransition { row: i, col: j });
                }
                sum += v;
                scale = scale.max(v.abs());
                m.push(v);
            }
            if sum.abs() > 1e-12 * scale.max(1.0) {
                return Err(MmppError::RowSum { row: i, sum });
            }
        }
        for (i, &r) in rates.iter().enumerate() {
            if !(r.is_finite() && r >= 0.0) {
                return Err(MmppError::InvalidRate(i));
            }
        }
        let spec = Self { d, m, q: rates.to_vec() };
        if !spec.is_irreducible() {
            return Err(MmppError::Reducible);
        }
        Ok(spec)
    }

    /// Single-state spec: a plain Poisson process.
    pub fn poisson(rate: f64) -> Result<Self, MmppError> {
        Self::new(&[vec![0.0]], &[rate])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn rates(&self) -> &[f64] {
        &self.q
    }

    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.m[i * self.d + j]
    }

    /// Total exit rate `mu_i = -m_ii` of state `i`.
    pub fn exit_rate(&self, i: usize) -> f64 {
        -self.m[i * self.d + i]
    }

    fn is_irreducible(&self) -> bool {
        if self.d == 1 {
            return true;
        }
        let reach = |forward: bool| -> bool {
            let mut seen = vec![false; self.d];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..self.d {
                    let rate = if forward { self.transition(i, j) } else { self.transition(j, i) };
                    if i != j && rate > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    /// Stationary distribution `pi` of the background chain: `pi M = 0`,
    /// `sum pi = 1`.
    pub fn stationary(&self) -> Vec<f64> {
        if self.d == 1 {
            return vec![1.0];
        }
        // transpose M, replace the last equation by the normalization
        let d = self.d;
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] = if i == d - 1 { 1.0 } else { self.m[j * d + i] };
            }
        }
        let mut rhs = vec![0.0; d];
        rhs[d - 1] = 1.0;
        let lu = LuFactors::factor(d, &a).expect("irreducible chain has a unique stationary law");
        lu.solve(&rhs)
    }

    /// Long-run average arrival rate `sum_i pi_i q_i`.
    pub fn average_rate(&self) -> f64 {
        self.stationary().iter().zip(&self.q).map(|(p, q)| p * q).sum()
    }

    /// Same process with the background states relabeled by `perm`
    /// (`perm[new] = old`). Capacity is invariant under relabeling.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self, MmppError> {
        assert_eq!(perm.len(), self.d);
        let rows: Vec<Vec<f64>> = perm
            .iter()
            .map(|&oi| perm.iter().map(|&oj| self.transition(oi, oj)).collect())
            .collect();
        let rates: Vec<f64> = perm.iter().map(|&oi| self.q[oi]).collect();
        Self::new(&rows, &rates)
    }
}

/// Erlang phase counts and rates per headway atom (`kappa_n = k_n / T_n`).
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePlan {
    pub counts: Vec<usize>,
    pub rates: Vec<f64>,
}

impl PhasePlan {
    pub fn uniform(atoms: &[(f64, f64)], k: usize) -> Self {
        assert!(k >= 1);
        PhasePlan {
            counts: vec![k; atoms.len()],
            rates: atoms.iter().map(|&(t, _)| k as f64 / t).collect(),
        }
    }
}

/// Cycle solution: mean crossings per cycle and mean cycle duration, anchored
/// at the reference state, plus the full per-phase vectors and the worst
/// relative residual of the two linear systems.
#[derive(Debug, Clone)]
pub struct CycleQuantities {
    /// Mean crossings until cycle end, indexed (atom, state, phase).
    pub h: Vec<f64>,
    /// Mean time until cycle end, same indexing, seconds.
    pub tau: Vec<f64>,
    pub h10: f64,
    pub tau10: f64,
    pub residual: f64,
}

/// Dense `dk x dk` matrix of the constant-headway cycle equations, with the
/// crossing-count and cycle-duration right-hand sides `b` and `c`.
///
/// Row/column `m` (1-based) corresponds to state `i = ceil(m/k)` and phase
/// `j = m - (i-1)k - 1`. Retained for cross-checks and moderate sizes; the
/// production path eliminates phases directly.
pub fn assemble_b1(spec: &MmppSpec, t: f64, k: usize) -> DenseSystem {
    assert!(t > 0.0 && k >= 1);
    let d = spec.d;
    let n = d * k;
    let kappa = k as f64 / t;
    let rho: Vec<f64> = (0..d).map(|i| spec.exit_rate(i) + spec.q[i] + kappa).collect();

    // Assembled additively from the balance equations, so the coefficients
    // that the case list writes to one cell (the phase-0 restart on first-
    // phase rows, and additionally the completion restart when k = 1) merge
    // instead of overwriting each other.
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    let mut c = vec![0.0; n];
    for m in 1..=n {
        let i = (m + k - 1) / k; // ceil(m/k), 1-based state
        let ri = rho[i - 1];
        let row = m - 1;
        let last_of_block = m == i * k;

        a[row * n + row] += 1.0;
        // restart into phase 0 of the same state after a rejected gap
        let col = (i - 1) * k; // 0-based index of h_{i0}
        a[row * n + col] -= spec.q[i - 1] / ri;
        if last_of_block {
            // completion: one car served; in a non-reference state the next
            // car starts fresh in phase 0
            if i >= 2 {
                a[row * n + col] -= kappa / ri;
            }
            b[row] = kappa / ri;
        } else {
            a[row * n + m] -= kappa / ri;
        }
        // background switches, same phase
        for l in 0..d {
            if l == i - 1 {
                continue;
            }
            let ncol = (l as isize + 1 - i as isize) * k as isize + m as isize; // 1-based
            a[row * n + (ncol as usize - 1)] -= spec.transition(i - 1, l) / ri;
        }
        c[row] = 1.0 / ri;
    }
    DenseSystem { dim: n, matrix: a, rhs: vec![b, c] }
}

// --- small d x d helpers for the phase sweep --------------------------------

fn mat_vec(d: usize, a: &[f64], x: &[f64], out: &mut [f64]) {
    for i in 0..d {
        let mut acc = 0.0;
        for j in 0..d {
            acc += a[i * d + j] * x[j];
        }
        out[i] = acc;
    }
}

/// Per-atom pieces reused by the sweep.
struct AtomContext {
    rho: Vec<f64>,
    /// LU of `I - U`, `U_{il} = mu_il / rho_i`.
    iu: LuFactors,
    /// `q_i / rho_i` (diagonal).
    g: Vec<f64>,
    /// `kappa / rho_i` (diagonal).
    kv: Vec<f64>,
}

impl AtomContext {
    fn build(spec: &MmppSpec, t: f64, k: usize) -> Result<Self, MmppError> {
        let d = spec.d;
        let kappa = k as f64 / t;
        let rho: Vec<f64> =
            (0..d).map(|i| spec.exit_rate(i) + spec.q[i] + kappa).collect();
        let mut iu = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                iu[i * d + j] = if i == j { 1.0 } else { -spec.transition(i, j) / rho[i] };
            }
        }
        let iu = LuFactors::factor(d, &iu)?;
        let g: Vec<f64> = (0..d).map(|i| spec.q[i] / rho[i]).collect();
        let kv: Vec<f64> = (0..d).map(|i| kappa / rho[i]).collect();
        Ok(Self { rho, iu, g, kv })
    }
}

/// Whether the failed-attempt restart resamples the headway atom (B2) or
/// keeps it (B3).
#[derive(Clone, Copy, PartialEq)]
enum Restart {
    Resampled,
    Kept,
}

fn restart_of(behavior: Behavior) -> Restart {
    match behavior {
        Behavior::B2 => Restart::Resampled,
        _ => Restart::Kept,
    }
}

/// Solves the cycle equations for the given phase plan by backward phase
/// elimination; exact up to rounding, cost `O(d^3 sum k_n)`.
pub fn cycle_quantities(
    behavior: Behavior,
    spec: &MmppSpec,
    atoms: &[(f64, f64)],
    plan: &PhasePlan,
) -> Result<CycleQuantities, MmppError> {
    let d = spec.d;
    let restart = restart_of(behavior);
    let ctxs: Vec<AtomContext> = atoms
        .iter()
        .zip(&plan.counts)
        .map(|(&(t, _), &k)| AtomContext::build(spec, t, k))
        .collect::<Result<_, _>>()?;

    // Affine representation of each atom's phase-0 values in the mixed
    // restart vector h0 (and, for kept restarts, the atom's own phase-0
    // vector): v_j = P v0_own + R h0 + w.
    struct AtomClosure {
        /// own-vector solve: v0 = m h0 + gh (and gt for the duration system)
        m: Vec<f64>,
        gh: Vec<f64>,
        gt: Vec<f64>,
    }

    let mut closures = Vec::with_capacity(atoms.len());
    for (n, ctx) in ctxs.iter().enumerate() {
        let k = plan.counts[n];
        let mut p = vec![0.0; d * d]; // coefficient on the atom's own v0
        let mut r = vec![0.0; d * d]; // coefficient on the mixed h0 / tau0
        let mut wh = vec![0.0; d];
        let mut wt = vec![0.0; d];

        // last phase: completion serves one car; in non-reference states the
        // next car starts fresh (mixed restart enters through S = diag(0,1,..,1))
        for i in 0..d {
            let gi = ctx.g[i];
            match restart {
                Restart::Resampled => {
                    r[i * d + i] = gi;
                }
                Restart::Kept => {
                    p[i * d + i] = gi;
                }
            }
            if i != 0 {
                r[i * d + i] += ctx.kv[i];
            }
            wh[i] = ctx.kv[i];
            wt[i] = 1.0 / ctx.rho[i];
        }
        solve_rows(&ctx.iu, d, &mut p);
        solve_rows(&ctx.iu, d, &mut r);
        ctx.iu.solve_in_place(&mut wh);
        ctx.iu.solve_in_place(&mut wt);

        // earlier phases: same restart structure plus the phase advance
        for _ in 0..k.saturating_sub(1) {
            // p <- IUinv (G_restart + K p); r <- IUinv (K r)
            let mut next_p = vec![0.0; d * d];
            let mut next_r = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    next_p[i * d + j] = ctx.kv[i] * p[i * d + j];
                    next_r[i * d + j] = ctx.kv[i] * r[i * d + j];
                }
                match restart {
                    Restart::Resampled => next_r[i * d + i] += ctx.g[i],
                    Restart::Kept => next_p[i * d + i] += ctx.g[i],
                }
            }
            solve_rows(&ctx.iu, d, &mut next_p);
            solve_rows(&ctx.iu, d, &mut next_r);
            p = next_p;
            r = next_r;

            let mut next_wh = vec![0.0; d];
            let mut next_wt = vec![0.0; d];
            for i in 0..d {
                next_wh[i] = ctx.kv[i] * wh[i];
                next_wt[i] = 1.0 / ctx.rho[i] + ctx.kv[i] * wt[i];
            }
            ctx.iu.solve_in_place(&mut next_wh);
            ctx.iu.solve_in_place(&mut next_wt);
            wh = next_wh;
            wt = next_wt;
        }

        // close the atom: v0 = P v0 + R h0 + w  =>  v0 = M h0 + g
        let mut ip = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                ip[i * d + j] = f64::from(i == j) - p[i * d + j];
            }
        }
        let ip_lu = LuFactors::factor(d, &ip)?;
        let mut m = r.clone();
        solve_rows(&ip_lu, d, &mut m);
        let mut gh = wh.clone();
        ip_lu.solve_in_place(&mut gh);
        let mut gt = wt.clone();
        ip_lu.solve_in_place(&mut gt);
        closures.push(AtomClosure { m, gh, gt });
    }

    // mixed closure: h0 = sum_n p_n v0^{(n)} = (sum p_n M_n) h0 + sum p_n g_n
    let mut mix = vec![0.0; d * d];
    let mut rhs_h = vec![0.0; d];
    let mut rhs_t = vec![0.0; d];
    for (cl, &(_, pn)) in closures.iter().zip(atoms) {
        for i in 0..d * d {
            mix[i] += pn * cl.m[i];
        }
        for i in 0..d {
            rhs_h[i] += pn * cl.gh[i];
            rhs_t[i] += pn * cl.gt[i];
        }
    }
    let mut imix = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            imix[i * d + j] = f64::from(i == j) - mix[i * d + j];
        }
    }
    let imix_lu = LuFactors::factor(d, &imix)?;
    let mut h0 = rhs_h;
    imix_lu.solve_in_place(&mut h0);
    let mut tau0 = rhs_t;
    imix_lu.solve_in_place(&mut tau0);

    // reconstruct all phase values and measure the balance-equation residual
    let total: usize = plan.counts.iter().map(|&k| d * k).sum();
    let mut h_full = vec![0.0; total];
    let mut tau_full = vec![0.0; total];
    let mut offset = 0;
    let mut worst_h = 0.0f64;
    let mut worst_t = 0.0f64;
    let mut bmax = 0.0f64;
    let mut cmax = 0.0f64;

    for ((ctx, cl), &k) in ctxs.iter().zip(&closures).zip(&plan.counts) {
        let mut own_h = vec![0.0; d];
        let mut own_t = vec![0.0; d];
        mat_vec(d, &cl.m, &h0, &mut own_h);
        mat_vec(d, &cl.m, &tau0, &mut own_t);
        for i in 0..d {
            own_h[i] += cl.gh[i];
            own_t[i] += cl.gt[i];
        }
        let restart_h = match restart {
            Restart::Resampled => &h0,
            Restart::Kept => &own_h,
        };
        let restart_t = match restart {
            Restart::Resampled => &tau0,
            Restart::Kept => &own_t,
        };

        // backward pass with concrete numbers: v_j = IUinv (G restart + K v_{j+1} + tail terms)
        let mut vh = vec![vec![0.0; d]; k];
        let mut vt = vec![vec![0.0; d]; k];
        for j in (0..k).rev() {
            let mut bh = vec![0.0; d];
            let mut bt = vec![0.0; d];
            for i in 0..d {
                bh[i] = ctx.g[i] * restart_h[i];
                bt[i] = 1.0 / ctx.rho[i] + ctx.g[i] * restart_t[i];
                if j == k - 1 {
                    bh[i] += ctx.kv[i] * if i == 0 { 1.0 } else { 1.0 + h0[i] };
                    if i != 0 {
                        bt[i] += ctx.kv[i] * tau0[i];
                    }
                } else {
                    bh[i] += ctx.kv[i] * vh[j + 1][i];
                    bt[i] += ctx.kv[i] * vt[j + 1][i];
                }
            }
            ctx.iu.solve_in_place(&mut bh);
            ctx.iu.solve_in_place(&mut bt);
            vh[j] = bh;
            vt[j] = bt;
        }

        // residuals of the original (unsolved) equations
        for i in 0..d {
            for j in 0..k {
                let mut lhs_h = vh[j][i];
                let mut lhs_t = vt[j][i];
                for l in 0..d {
                    if l != i {
                        lhs_h -= spec.transition(i, l) / ctx.rho[i] * vh[j][l];
                        lhs_t -= spec.transition(i, l) / ctx.rho[i] * vt[j][l];
                    }
                }
                lhs_h -= ctx.g[i] * restart_h[i];
                lhs_t -= ctx.g[i] * restart_t[i];
                let (mut rhs_h_eq, rhs_t_eq) = (0.0, 1.0 / ctx.rho[i]);
                if j == k - 1 {
                    rhs_h_eq += ctx.kv[i];
                    if i != 0 {
                        lhs_h -= ctx.kv[i] * h0[i];
                        lhs_t -= ctx.kv[i] * tau0[i];
                    }
                } else {
                    lhs_h -= ctx.kv[i] * vh[j + 1][i];
                    lhs_t -= ctx.kv[i] * vt[j + 1][i];
                }
                worst_h = worst_h.max((lhs_h - rhs_h_eq).abs());
                worst_t = worst_t.max((lhs_t - rhs_t_eq).abs());
                bmax = bmax.max(rhs_h_eq.abs());
                cmax = cmax.max(rhs_t_eq.abs());
                h_full[offset + i * k + j] = vh[j][i];
                tau_full[offset + i * k + j] = vt[j][i];
            }
        }
        offset += d * k;
    }

    let residual = (worst_h / bmax.max(f64::MIN_POSITIVE))
        .max(worst_t / cmax.max(f64::MIN_POSITIVE));
    Ok(CycleQuantities { h: h_full, tau: tau_full, h10: h0[0], tau10: tau0[0], residual })
}

fn solve_rows(lu: &LuFactors, d: usize, m: &mut [f64]) {
    // The sweep needs IUinv * M acting on column vectors; IU applies row-wise,
    // so solve each column of M separately.
    let mut col = vec![0.0; d];
    for j in 0..d {
        for i in 0..d {
            col[i] = m[i * d + j];
        }
        lu.solve_in_place(&mut col);
        for i in 0..d {
            m[i * d + j] = col[i];
        }
    }
}

/// One doubling step of the convergence history.
#[derive(Debug, Clone, Copy)]
pub struct PhaseStep {
    pub phases_per_atom: usize,
    pub capacity: f64,
    /// Relative change from the previous step; NaN for the first.
    pub gap: f64,
}

/// Converged capacity plus diagnostics.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    /// Crossings per second, `h10 / tau10` at the final phase count.
    pub capacity: f64,
    pub h10: f64,
    pub tau10: f64,
    pub plan: PhasePlan,
    /// Relative capacity change over the last doubling.
    pub convergence_gap: f64,
    /// Worst relative residual of the final solve.
    pub residual: f64,
    /// False when the phase cap was hit before reaching the tolerance.
    pub converged: bool,
    pub history: Vec<PhaseStep>,
}

/// Capacity under MMPP arrivals for a finite-support headway law.
///
/// Phase counts start at `k0` per atom and double until two successive
/// capacities agree to relative `tol` (or the cap of 4096 per atom is hit,
/// which clears `converged`). `B1` uses the law's mean as its constant
/// headway, mirroring the Poisson comparison convention.
pub fn capacity_mmpp(
    behavior: Behavior,
    spec: &MmppSpec,
    law: &HeadwayDistribution,
    k0: usize,
    tol: f64,
) -> Result<CapacityResult, MmppError> {
    assert!(k0 >= 1, "initial phase count must be at least 1");
    assert!(tol > 0.0, "tolerance must be positive");
    if spec.average_rate() <= 0.0 {
        return Err(MmppError::ZeroArrivalRate);
    }
    let atoms = match behavior {
        Behavior::B1 => vec![(law.mean(), 1.0)],
        _ => law.as_atoms().ok_or(MmppError::UnsupportedLaw)?,
    };

    let mut history = Vec::new();
    let mut k = k0;
    let mut previous: Option<f64> = None;
    loop {
        let plan = PhasePlan::uniform(&atoms, k);
        let cq = cycle_quantities(behavior, spec, &atoms, &plan)?;
        let capacity = cq.h10 / cq.tau10;
        let gap = match previous {
            Some(prev) => ((capacity - prev) / capacity).abs(),
            None => f64::NAN,
        };
        history.push(PhaseStep { phases_per_atom: k, capacity, gap });
        let converged = previous.is_some() && gap < tol;
        if converged || k >= PHASE_CAP {
            return Ok(CapacityResult {
                capacity,
                h10: cq.h10,
                tau10: cq.tau10,
                plan,
                convergence_gap: gap,
                residual: cq.residual,
                converged,
                history,
            });
        }
        previous = Some(capacity);
        k *= 2;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaiveVariant {
    /// `sum_i pi_i / E[S_i]`: stationary-weighted average of per-state
    /// capacities.
    AverageOfCapacities,
    /// `1 / sum_i pi_i E[S_i]`: reciprocal of the stationary-weighted mean
    /// service time.
    AverageOfServiceTimes,
}

/// A naive decomposition estimate; `degenerate` flags infinite per-state
/// service times (the affected term is dropped for the capacity average, and
/// the service-time average collapses to zero).
#[derive(Debug, Clone, Copy)]
pub struct NaiveCapacity {
    pub value: f64,
    pub degenerate: bool,
}

/// The two decomposition formulas that weigh per-state quantities by `pi`.
/// Both ignore that the head-of-queue car does not see the background chain
/// in equilibrium, so they are generally biased; they become exact in the
/// slow-switching limit.
pub fn naive_capacity(
    spec: &MmppSpec,
    mean_service: &[f64],
    variant: NaiveVariant,
) -> NaiveCapacity {
    assert_eq!(mean_service.len(), spec.d, "one mean service time per state");
    let pi = spec.stationary();
    let degenerate = mean_service.iter().any(|m| m.is_infinite());
    let value = match variant {
        NaiveVariant::AverageOfCapacities => {
            pi.iter().zip(mean_service).map(|(p, m)| if m.is_infinite() { 0.0 } else { p / m }).sum()
        }
        NaiveVariant::AverageOfServiceTimes => {
            let mean: f64 = pi.iter().zip(mean_service).map(|(p, m)| p * m).sum();
            if mean.is_infinite() {
                0.0
            } else {
                1.0 / mean
            }
        }
    };
    NaiveCapacity { value, degenerate }
}
