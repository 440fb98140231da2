//! Critical-headway distributions and their transforms.
//!
//! The headway law `T` enters every capacity formula through `E[e^{-sT}]`,
//! `E[e^{qT}]` and the tilted means `E[T e^{-qT}]`, `E[T^2 e^{-qT}]`. Four
//! families are supported: deterministic, finite discrete, exponential and
//! gamma. Affine pushforwards `T -> aT + b` (needed for impatience sequences)
//! map deterministic and discrete laws atom-wise; exponential and gamma laws
//! carry an explicit (scale, shift) wrapper.
//!
//! Divergent moment generating functions are reported as `f64::INFINITY`; the
//! infinite value is a meaningful physical outcome, never an error.

use rand::Rng;
use rand_distr::Distribution as RandDistribution;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::numerics;

/// Probability-weight mismatch tolerated when validating discrete atoms.
const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("headway atoms must be positive and finite, got {0}")]
    InvalidAtom(f64),
    #[error("atom weights must be in (0, 1], got {0}")]
    InvalidWeight(f64),
    #[error("atom weights must sum to 1 within {WEIGHT_SUM_TOL:e}, got {0}")]
    WeightSum(f64),
    #[error("at least one atom with positive weight is required")]
    EmptySupport,
    #[error("{name} must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("affine map (scale {scale}, shift {shift}) pushes the support to nonpositive values")]
    NonPositiveSupport { scale: f64, shift: f64 },
    #[error("transform argument must be nonnegative, got {0}")]
    NegativeArgument(f64),
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Deterministic(f64),
    /// Sorted by value; weights positive and summing to one; values distinct.
    Discrete(Vec<(f64, f64)>),
    Exponential { alpha: f64 },
    Gamma { shape: f64, rate: f64 },
}

/// The law of the critical headway `T`, closed under affine pushforwards.
///
/// Immutable after construction; every operation is pure, so values can be
/// shared freely between concurrent workers.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadwayDistribution {
    kind: Kind,
    /// The represented law is `scale * K + shift` where `K` follows `kind`.
    /// Deterministic and discrete kinds always hold `scale = 1, shift = 0`
    /// (affine maps are folded into the atoms).
    scale: f64,
    shift: f64,
}

fn check_positive(name: &'static str, value: f64) -> Result<(), DistributionError> {
    if !(value.is_finite() && value > 0.0) {
        return Err(DistributionError::InvalidParameter { name, value });
    }
    Ok(())
}

impl HeadwayDistribution {
    pub fn deterministic(value: f64) -> Result<Self, DistributionError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(DistributionError::InvalidAtom(value));
        }
        Ok(Self { kind: Kind::Deterministic(value), scale: 1.0, shift: 0.0 })
    }

    /// Builds a finite discrete law from `(value, weight)` atoms.
    ///
    /// Zero-weight atoms are pruned and duplicate values merged before the
    /// weight-sum check, so downstream consumers see a minimal atom list.
    pub fn discrete(atoms: &[(f64, f64)]) -> Result<Self, DistributionError> {
        let mut kept: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for &(t, p) in atoms {
            if p == 0.0 {
                continue;
            }
            if !(t.is_finite() && t > 0.0) {
                return Err(DistributionError::InvalidAtom(t));
            }
            if !(p.is_finite() && p > 0.0 && p <= 1.0) {
                return Err(DistributionError::InvalidWeight(p));
            }
            kept.push((t, p));
        }
        if kept.is_empty() {
            return Err(DistributionError::EmptySupport);
        }
        kept.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(kept.len());
        for (t, p) in kept {
            match merged.last_mut() {
                Some(last) if last.0 == t => last.1 += p,
                _ => merged.push((t, p)),
            }
        }
        let sum: f64 = merged.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(DistributionError::WeightSum(sum));
        }
        if merged.len() == 1 {
            return Self::deterministic(merged[0].0);
        }
        Ok(Self { kind: Kind::Discrete(merged), scale: 1.0, shift: 0.0 })
    }

    pub fn exponential(alpha: f64) -> Result<Self, DistributionError> {
        check_positive("alpha", alpha)?;
        Ok(Self { kind: Kind::Exponential { alpha }, scale: 1.0, shift: 0.0 })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self, DistributionError> {
        check_positive("shape", shape)?;
        check_positive("rate", rate)?;
        Ok(Self { kind: Kind::Gamma { shape, rate }, scale: 1.0, shift: 0.0 })
    }

    /// Law of `a*T + b`. Deterministic and discrete laws map atom-wise;
    /// continuous laws compose into the (scale, shift) wrapper. `a` must be
    /// positive and the resulting support must stay positive.
    pub fn affine_push(&self, a: f64, b: f64) -> Result<Self, DistributionError> {
        if !(a.is_finite() && a > 0.0) || !b.is_finite() {
            return Err(DistributionError::NonPositiveSupport { scale: a, shift: b });
        }
        match &self.kind {
            Kind::Deterministic(t) => Self::deterministic(a * t + b),
            Kind::Discrete(atoms) => {
                let mapped: Vec<(f64, f64)> =
                    atoms.iter().map(|&(t, p)| (a * t + b, p)).collect();
                Self::discrete(&mapped)
            }
            kind => {
                let scale = a * self.scale;
                let shift = a * self.shift + b;
                if shift < 0.0 {
                    return Err(DistributionError::NonPositiveSupport { scale: a, shift: b });
                }
                // A pure rescale of an exponential or gamma law stays in the family.
                if shift == 0.0 {
                    let folded = match kind {
                        Kind::Exponential { alpha } => Kind::Exponential { alpha: alpha / scale },
                        Kind::Gamma { shape, rate } => {
                            Kind::Gamma { shape: *shape, rate: rate / scale }
                        }
                        _ => unreachable!(),
                    };
                    return Ok(Self { kind: folded, scale: 1.0, shift: 0.0 });
                }
                Ok(Self { kind: kind.clone(), scale, shift })
            }
        }
    }

    /// Exact mean `E[T]`.
    pub fn mean(&self) -> f64 {
        let base = match &self.kind {
            Kind::Deterministic(t) => *t,
            Kind::Discrete(atoms) => atoms.iter().map(|&(t, p)| p * t).sum(),
            Kind::Exponential { alpha } => 1.0 / alpha,
            Kind::Gamma { shape, rate } => shape / rate,
        };
        self.scale * base + self.shift
    }

    /// Laplace transform `E[e^{-sT}]` for `s >= 0`; exactly 1 at `s = 0`.
    pub fn laplace(&self, s: f64) -> Result<f64, DistributionError> {
        if !(s >= 0.0) {
            return Err(DistributionError::NegativeArgument(s));
        }
        Ok(self.lap(s))
    }

    pub(crate) fn lap(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        if s == 0.0 {
            return 1.0;
        }
        let sb = self.scale * s;
        let core = match &self.kind {
            Kind::Deterministic(t) => (-sb * t).exp(),
            Kind::Discrete(atoms) => atoms.iter().map(|&(t, p)| p * (-sb * t).exp()).sum(),
            Kind::Exponential { alpha } => alpha / (alpha + sb),
            Kind::Gamma { shape, rate } => (rate / (rate + sb)).powf(*shape),
        };
        (-s * self.shift).exp() * core
    }

    /// Moment generating function `E[e^{qT}]` for `q >= 0`.
    ///
    /// Returns `f64::INFINITY` when the transform diverges (exponential with
    /// `q >= alpha`, gamma with `q >= rate`, scaled accordingly). The infinite
    /// value is a first-class result, not an error.
    pub fn mgf(&self, q: f64) -> f64 {
        assert!(q >= 0.0, "mgf argument must be nonnegative, got {q}");
        if q == 0.0 {
            return 1.0;
        }
        let qb = self.scale * q;
        let core = match &self.kind {
            Kind::Deterministic(t) => (qb * t).exp(),
            Kind::Discrete(atoms) => atoms.iter().map(|&(t, p)| p * (qb * t).exp()).sum(),
            Kind::Exponential { alpha } => {
                if qb >= *alpha {
                    return f64::INFINITY;
                }
                alpha / (alpha - qb)
            }
            Kind::Gamma { shape, rate } => {
                if qb >= *rate {
                    return f64::INFINITY;
                }
                (rate / (rate - qb)).powf(*shape)
            }
        };
        (q * self.shift).exp() * core
    }

    /// Tilted mean `E[T e^{-qT}]`, the negated derivative of the Laplace
    /// transform at `s = q`.
    pub fn tilted_mean(&self, q: f64) -> f64 {
        assert!(q >= 0.0, "tilted_mean argument must be nonnegative, got {q}");
        let qb = self.scale * q;
        let (lap0, mean0) = match &self.kind {
            Kind::Deterministic(t) => ((-qb * t).exp(), t * (-qb * t).exp()),
            Kind::Discrete(atoms) => {
                let l = atoms.iter().map(|&(t, p)| p * (-qb * t).exp()).sum();
                let m = atoms.iter().map(|&(t, p)| p * t * (-qb * t).exp()).sum();
                (l, m)
            }
            Kind::Exponential { alpha } => {
                (alpha / (alpha + qb), alpha / ((alpha + qb) * (alpha + qb)))
            }
            Kind::Gamma { shape, rate } => {
                let r = rate / (rate + qb);
                (r.powf(*shape), shape / rate * r.powf(shape + 1.0))
            }
        };
        // E[(aK+b) e^{-q(aK+b)}] = e^{-qb} (a E[K e^{-aq K}] + b E[e^{-aq K}])
        (-q * self.shift).exp() * (self.scale * mean0 + self.shift * lap0)
    }

    /// Tilted second moment `E[T^2 e^{-qT}]`; at `q = 0` this is `E[T^2]`.
    pub fn tilted_second_moment(&self, q: f64) -> f64 {
        assert!(q >= 0.0, "tilted_second_moment argument must be nonnegative, got {q}");
        let qb = self.scale * q;
        let (l0, m0, s0) = match &self.kind {
            Kind::Deterministic(t) => {
                let e = (-qb * t).exp();
                (e, t * e, t * t * e)
            }
            Kind::Discrete(atoms) => {
                let mut l = 0.0;
                let mut m = 0.0;
                let mut s = 0.0;
                for &(t, p) in atoms {
                    let e = p * (-qb * t).exp();
                    l += e;
                    m += t * e;
                    s += t * t * e;
                }
                (l, m, s)
            }
            Kind::Exponential { alpha } => {
                let d = alpha + qb;
                (alpha / d, alpha / (d * d), 2.0 * alpha / (d * d * d))
            }
            Kind::Gamma { shape, rate } => {
                let r = rate / (rate + qb);
                (
                    r.powf(*shape),
                    shape / rate * r.powf(shape + 1.0),
                    shape * (shape + 1.0) / (rate * rate) * r.powf(shape + 2.0),
                )
            }
        };
        let (a, b) = (self.scale, self.shift);
        (-q * b).exp() * (a * a * s0 + 2.0 * a * b * m0 + b * b * l0)
    }

    /// Atom list `(value, weight)` when the law has finite support.
    pub fn as_atoms(&self) -> Option<Vec<(f64, f64)>> {
        match &self.kind {
            Kind::Deterministic(t) => Some(vec![(*t, 1.0)]),
            Kind::Discrete(atoms) => Some(atoms.clone()),
            _ => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.kind, Kind::Deterministic(_))
    }

    /// Infimum of the support.
    pub fn support_lower(&self) -> f64 {
        let base = match &self.kind {
            Kind::Deterministic(t) => *t,
            Kind::Discrete(atoms) => atoms[0].0,
            Kind::Exponential { .. } | Kind::Gamma { .. } => 0.0,
        };
        self.scale * base + self.shift
    }

    /// Expectation `E[g(T)]`; finite sums over atoms, adaptive Gauss-Legendre
    /// quadrature on the compactified half line for continuous laws.
    ///
    /// Gamma laws with shape below one integrate in the substituted variable
    /// `y = x^shape`, which removes the density's endpoint singularity.
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F, tol: f64) -> f64 {
        match &self.kind {
            Kind::Deterministic(t) => g(*t),
            Kind::Discrete(atoms) => atoms.iter().map(|&(t, p)| p * g(t)).sum(),
            Kind::Exponential { alpha } => {
                let a = *alpha;
                self.integrate_base(|x, eval| eval(x) * a * (-a * x).exp(), &g, tol)
            }
            Kind::Gamma { shape, rate } => {
                // substituting x = y^p with p = ceil(shape)/shape turns the
                // density's x^(shape-1) endpoint factor into the polynomial
                // y^(ceil(shape)-1), so the panels converge at every shape
                let (k, r) = (*shape, *rate);
                let lgam = ln_gamma(k);
                let p = k.ceil().max(1.0) / k;
                self.integrate_base(
                    move |y, eval| {
                        if y <= 0.0 {
                            return 0.0;
                        }
                        let x = y.powf(p);
                        let mut lw = k * r.ln() - r * x - lgam + p.ln();
                        if k != 1.0 {
                            lw += (k - 1.0) * x.ln();
                        }
                        if p != 1.0 {
                            lw += (p - 1.0) * y.ln();
                        }
                        if lw < -700.0 {
                            0.0
                        } else {
                            eval(x) * lw.exp()
                        }
                    },
                    &g,
                    tol,
                )
            }
        }
    }

    /// Integrates `kernel(x, eval)` over the half line `x > 0`, where `eval`
    /// applies the affine wrapper before calling the caller's function.
    fn integrate_base<F, K>(&self, kernel: K, g: &F, tol: f64) -> f64
    where
        F: Fn(f64) -> f64,
        K: Fn(f64, &dyn Fn(f64) -> f64) -> f64,
    {
        let eval = |x: f64| g(self.scale * x + self.shift);
        // x = u/(1-u) maps (0,1) onto (0, oo); Jacobian 1/(1-u)^2
        let integrand = |u: f64| {
            let om = 1.0 - u;
            let x = u / om;
            kernel(x, &eval) / (om * om)
        };
        let r = numerics::integrate_adaptive(&integrand, 0.0, 1.0, tol);
        debug_assert!(r.converged, "quadrature hit its subdivision cap");
        r.value
    }

    /// Draws one headway.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let base = match &self.kind {
            Kind::Deterministic(t) => *t,
            Kind::Discrete(atoms) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut chosen = atoms[atoms.len() - 1].0;
                for &(t, p) in atoms {
                    acc += p;
                    if u < acc {
                        chosen = t;
                        break;
                    }
                }
                chosen
            }
            Kind::Exponential { alpha } => {
                rand_distr::Exp::new(*alpha).expect("validated rate").sample(rng)
            }
            Kind::Gamma { shape, rate } => rand_distr::Gamma::new(*shape, 1.0 / rate)
                .expect("validated parameters")
                .sample(rng),
        };
        self.scale * base + self.shift
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_law() -> HeadwayDistribution {
        HeadwayDistribution::discrete(&[(6.22, 0.9), (14.0, 0.1)]).unwrap()
    }

    #[test]
    fn mean_values() {
        assert!((example_law().mean() - 6.998).abs() < 1e-12);
        assert_eq!(HeadwayDistribution::deterministic(7.0).unwrap().mean(), 7.0);
        let g = HeadwayDistribution::gamma(0.5, 1.0 / 14.0).unwrap();
        assert!((g.mean() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn laplace_examples() {
        let d = example_law();
        let s: f64 = 1.0 / 6.0;
        let expected = 0.9 * (-6.22 * s).exp() + 0.1 * (-14.0 * s).exp();
        assert!((d.laplace(s).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.32887).abs() < 5e-6);
        assert_eq!(d.laplace(0.0).unwrap(), 1.0);

        let e = HeadwayDistribution::exponential(0.25).unwrap();
        assert!((e.laplace(0.5).unwrap() - 0.25 / 0.75).abs() < 1e-15);

        assert!(d.laplace(-0.1).is_err());
    }

    #[test]
    fn mgf_examples() {
        let d = example_law();
        let exact: f64 = 0.9 * (6.22f64 / 6.0).exp() + 0.1 * (14.0f64 / 6.0).exp();
        assert!((d.mgf(1.0 / 6.0) - exact).abs() < 1e-12);
        assert!((exact - 3.5691).abs() < 1e-4);
        assert_eq!(d.mgf(0.0), 1.0);

        let e = HeadwayDistribution::exponential(1.0 / 7.0).unwrap();
        assert!(e.mgf(1.0 / 6.0).is_infinite());
        assert!(e.mgf(1.0 / 7.0).is_infinite());
        assert!((e.mgf(0.1) - (1.0 / 7.0) / (1.0 / 7.0 - 0.1)).abs() < 1e-12);

        let g = HeadwayDistribution::gamma(0.5, 1.0 / 14.0).unwrap();
        assert!(g.mgf(1.0 / 14.0).is_infinite());
        assert!(g.mgf(0.05).is_finite());
    }

    #[test]
    fn tilted_mean_examples() {
        let det = HeadwayDistribution::deterministic(7.0).unwrap();
        assert!((det.tilted_mean(0.2) - 7.0 * (-1.4f64).exp()).abs() < 1e-14);

        let e = HeadwayDistribution::exponential(0.25).unwrap();
        let q = 0.1;
        assert!((e.tilted_mean(q) - 0.25 / (0.35f64 * 0.35)).abs() < 1e-14);

        let d = HeadwayDistribution::discrete(&[(3.0, 0.9), (60.0, 0.1)]).unwrap();
        let exact: f64 = 0.9 * 3.0 * (-0.3f64).exp() + 0.1 * 60.0 * (-6.0f64).exp();
        assert!((d.tilted_mean(0.1) - exact).abs() < 1e-14);
        assert!((exact - 2.0152).abs() < 2.5e-4);
    }

    #[test]
    fn affine_push_examples() {
        let det = HeadwayDistribution::deterministic(7.0).unwrap();
        let pushed = det.affine_push(0.9, 0.4).unwrap();
        assert!((pushed.mean() - 6.7).abs() < 1e-12);

        let d = example_law();
        let pushed = d.affine_push(0.9, 0.4).unwrap();
        let atoms = pushed.as_atoms().unwrap();
        assert!((atoms[0].0 - 5.998).abs() < 1e-12);
        assert!((atoms[1].0 - 13.0).abs() < 1e-12);

        let same = d.affine_push(1.0, 0.0).unwrap();
        assert_eq!(same, d);

        // scaled exponential folds back into the family
        let e = HeadwayDistribution::exponential(0.5).unwrap();
        let e2 = e.affine_push(2.0, 0.0).unwrap();
        assert_eq!(e2, HeadwayDistribution::exponential(0.25).unwrap());

        assert!(det.affine_push(0.5, -4.0).is_err());
        assert!(e.affine_push(1.0, -0.5).is_err());
    }

    #[test]
    fn shifted_continuous_transforms() {
        // law of 0.5*X + 2 with X ~ Exp(1/4)
        let e = HeadwayDistribution::exponential(0.25).unwrap();
        let w = e.affine_push(0.5, 2.0).unwrap();
        assert!((w.mean() - (0.5 * 4.0 + 2.0)).abs() < 1e-12);
        let s = 0.3;
        let expected = (-s * 2.0f64).exp() * (0.25 / (0.25 + 0.5 * s));
        assert!((w.lap(s) - expected).abs() < 1e-14);
        // support bounded below by the shift
        assert_eq!(w.support_lower(), 2.0);
        // mgf diverges when the scaled argument reaches alpha
        assert!(w.mgf(0.5).is_infinite());
        assert!(w.mgf(0.4).is_finite());
    }

    #[test]
    fn discrete_atoms_are_pruned_merged_sorted() {
        let d = HeadwayDistribution::discrete(&[(8.0, 0.25), (3.0, 0.5), (8.0, 0.25), (1.0, 0.0)])
            .unwrap();
        let atoms = d.as_atoms().unwrap();
        assert_eq!(atoms, vec![(3.0, 0.5), (8.0, 0.5)]);

        // a single surviving atom collapses to a deterministic law
        let one = HeadwayDistribution::discrete(&[(5.0, 1.0), (9.0, 0.0)]).unwrap();
        assert!(one.is_degenerate());

        assert!(HeadwayDistribution::discrete(&[(5.0, 0.7), (9.0, 0.2)]).is_err());
        assert!(HeadwayDistribution::discrete(&[(-5.0, 1.0)]).is_err());
        assert!(HeadwayDistribution::discrete(&[]).is_err());
    }

    #[test]
    fn expectation_quadrature_matches_closed_forms() {
        let e = HeadwayDistribution::exponential(0.25).unwrap();
        let m = e.expect(|t| t, 1e-10);
        assert!((m - 4.0).abs() < 1e-8, "got {m}");
        let l = e.expect(|t| (-0.3 * t).exp(), 1e-10);
        assert!((l - e.lap(0.3)).abs() < 1e-8);

        let g = HeadwayDistribution::gamma(0.5, 1.0 / 14.0).unwrap();
        let m = g.expect(|t| t, 1e-10);
        assert!((m - 7.0).abs() < 1e-6, "got {m}");
        let l = g.expect(|t| (-0.05 * t).exp(), 1e-10);
        assert!((l - g.lap(0.05)).abs() / g.lap(0.05) < 1e-6, "got {l} vs {}", g.lap(0.05));

        // shifted wrapper
        let w = e.affine_push(0.5, 2.0).unwrap();
        let m = w.expect(|t| t, 1e-10);
        assert!((m - 4.0).abs() < 1e-7, "got {m}");
    }

    #[test]
    fn sampling_tracks_mean() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for law in [
            example_law(),
            HeadwayDistribution::exponential(1.0 / 7.0).unwrap(),
            HeadwayDistribution::gamma(0.5, 1.0 / 14.0).unwrap(),
            HeadwayDistribution::deterministic(7.0).unwrap(),
        ] {
            let n = 200_000;
            let sum: f64 = (0..n).map(|_| law.sample(&mut rng)).sum();
            let mean = sum / n as f64;
            assert!(
                (mean - law.mean()).abs() < 0.15,
                "sample mean {mean} vs {}",
                law.mean()
            );
        }
    }
}
