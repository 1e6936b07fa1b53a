//! Link metrics: gain matrix, SINR, rates, delay-penalised and
//! outage-constrained throughput, served-user counts and the PA mapping.
//!
//! Noise power is normalised to one, so `P` in linear scale is also the SNR.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{db_to_linear, ComplexMatrix, PaParams};

/// Real `N x N` matrix of power gains `|HV|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct GainMatrix {
    n: usize,
    g: Vec<f64>,
}

impl GainMatrix {
    pub fn new(n: usize, g: Vec<f64>) -> Result<Self> {
        if g.len() != n * n {
            return Err(Error::DimensionMismatch {
                context: "gain matrix storage",
                left: format!("{}x{}", n, n),
                right: format!("{} entries", g.len()),
            });
        }
        if g.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidArgument("gains must be finite and non-negative".into()));
        }
        Ok(Self { n, g })
    }

    pub fn users(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.n + j]
    }

    pub fn scale(&self, factor: f64) -> GainMatrix {
        GainMatrix {
            n: self.n,
            g: self.g.iter().map(|x| x * factor).collect(),
        }
    }
}

/// Elementwise `|HV|^2` for an `N x M` channel and an `M x N` precoder.
pub fn channel_gain(h: &ComplexMatrix, v: &ComplexMatrix) -> Result<GainMatrix> {
    if v.cols() != h.rows() {
        return Err(Error::DimensionMismatch {
            context: "precoder must have one column per user",
            left: format!("H {}x{}", h.rows(), h.cols()),
            right: format!("V {}x{}", v.rows(), v.cols()),
        });
    }
    let hv = h.matmul(v)?;
    Ok(GainMatrix {
        n: h.rows(),
        g: hv.as_slice().iter().map(|z| z.norm_sqr()).collect(),
    })
}

/// SINR of one user from its gain row; `snr_per_beam` is `P/M`.
#[inline]
pub(crate) fn sinr_from_row(row: impl Iterator<Item = f64>, user: usize, snr_per_beam: f64) -> f64 {
    let mut desired = 0.0;
    let mut interference = 0.0;
    for (j, g) in row.enumerate() {
        if j == user {
            desired = g;
        } else {
            interference += g;
        }
    }
    snr_per_beam * desired / (1.0 + snr_per_beam * interference)
}

/// Per-user SINR with the transmit power `p` split evenly over `antennas`.
pub fn sinr(g: &GainMatrix, p: f64, antennas: usize) -> Vec<f64> {
    let snr = p / antennas as f64;
    (0..g.n)
        .map(|i| sinr_from_row((0..g.n).map(|j| g.get(i, j)), i, snr))
        .collect()
}

/// Per-user achievable rates in bits per channel use.
#[derive(Clone, Debug, PartialEq)]
pub struct RateVector(pub Vec<f64>);

impl RateVector {
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn rates(sinrs: &[f64]) -> RateVector {
    RateVector(sinrs.iter().map(|s| s.ln_1p() / std::f64::consts::LN_2).collect())
}

/// `1 - alpha*K`, or an error once the search has used up the whole packet.
pub fn delay_factor(alpha: f64, iterations: usize) -> Result<f64> {
    let product = alpha * iterations as f64;
    // Allow rounding in products such as 0.001 * 1000.
    if product > 1.0 + 1e-12 {
        return Err(Error::DelayBudgetExceeded { product });
    }
    Ok((1.0 - product).max(0.0))
}

/// Minimum rate `log2(1 + theta)` for an SINR threshold in dB.
pub fn rate_threshold(theta_db: f64) -> f64 {
    db_to_linear(theta_db).ln_1p() / std::f64::consts::LN_2
}

pub fn throughput(r: &RateVector, alpha: f64, iterations: usize) -> Result<f64> {
    Ok(delay_factor(alpha, iterations)? * r.sum())
}

fn constrained_sum(r: &[f64], threshold: f64) -> f64 {
    r.iter().filter(|&&x| x >= threshold).sum()
}

pub fn outage_throughput(r: &RateVector, alpha: f64, iterations: usize, theta_db: f64) -> Result<f64> {
    let threshold = rate_threshold(theta_db);
    Ok(delay_factor(alpha, iterations)? * constrained_sum(&r.0, threshold))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServedStats {
    pub served: usize,
    /// `true` where the user is in outage.
    pub outage: Vec<bool>,
}

pub fn served_stats(r: &RateVector, theta_db: f64) -> ServedStats {
    let threshold = rate_threshold(theta_db);
    let outage: Vec<bool> = r.0.iter().map(|&x| x < threshold).collect();
    ServedStats {
        served: outage.iter().filter(|o| !**o).count(),
        outage,
    }
}

/// Output power of a PA that consumes `rho_cons`.
///
/// Inverts `rho_cons = rho_max^mu / (epsilon * rho_out^(mu - 1))`.
pub fn pa_output_power(rho_cons: f64, pa: &PaParams) -> Result<f64> {
    if !(rho_cons > 0.0 && rho_cons.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "consumed power must be positive and finite, got {}",
            rho_cons
        )));
    }
    if pa.mu >= 1.0 {
        return Err(Error::UnsupportedPa(
            "mu = 1 makes the consumed power independent of the output power".into(),
        ));
    }
    if !(pa.epsilon > 0.0 && pa.epsilon <= 1.0) || pa.mu < 0.0 {
        return Err(Error::UnsupportedPa(format!(
            "epsilon={} mu={}",
            pa.epsilon, pa.mu
        )));
    }
    let rho_max = pa.rho_max_linear();
    let rho_out = if pa.mu == 0.0 {
        pa.epsilon * rho_cons
    } else {
        (pa.epsilon * rho_cons / rho_max.powf(pa.mu)).powf(1.0 / (1.0 - pa.mu))
    };
    if rho_out > rho_max {
        return Err(Error::PaSaturated {
            required: rho_out,
            max: rho_max,
        });
    }
    Ok(rho_out)
}

/// Consumed power for a given output power (the forward PA model).
pub fn pa_consumed_power(rho_out: f64, pa: &PaParams) -> f64 {
    let rho_max = pa.rho_max_linear();
    if pa.mu == 0.0 {
        rho_out / pa.epsilon
    } else {
        rho_max.powf(pa.mu) / (pa.epsilon * rho_out.powf(pa.mu - 1.0))
    }
}

/// `epsilon * (rho_out / rho_max)^mu`.
pub fn effective_efficiency(rho_out: f64, pa: &PaParams) -> f64 {
    if pa.mu == 0.0 {
        return pa.epsilon;
    }
    pa.epsilon * (rho_out / pa.rho_max_linear()).powf(pa.mu)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Sum rate, delay-weighted.
    Throughput,
    /// Sum of the rates that meet the outage threshold, delay-weighted.
    OutageThroughput,
    /// Served users first, sum rate as tie-break.
    OutageCount,
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectiveKind::Throughput => "throughput",
            ObjectiveKind::OutageThroughput => "outage_throughput",
            ObjectiveKind::OutageCount => "outage_count",
        })
    }
}

impl FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "throughput" => Ok(ObjectiveKind::Throughput),
            "outage_throughput" => Ok(ObjectiveKind::OutageThroughput),
            "outage_count" => Ok(ObjectiveKind::OutageCount),
            other => Err(format!(
                "expected throughput, outage_throughput or outage_count, got `{}`",
                other
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub alpha: f64,
    pub theta_db: f64,
}

impl Objective {
    pub fn new(kind: ObjectiveKind, alpha: f64, theta_db: f64) -> Self {
        Self {
            kind,
            alpha,
            theta_db,
        }
    }

    /// Undelayed throughput this objective reports: the constrained sum for
    /// `OutageThroughput`, the plain sum rate otherwise.
    pub fn reported_throughput(&self, r: &[f64]) -> f64 {
        match self.kind {
            ObjectiveKind::OutageThroughput => constrained_sum(r, rate_threshold(self.theta_db)),
            ObjectiveKind::Throughput | ObjectiveKind::OutageCount => r.iter().sum(),
        }
    }

    /// Raw score (`K = 0`, no delay factor) using a precomputed rate threshold.
    #[inline]
    pub(crate) fn raw_score(&self, r: &[f64], threshold: f64) -> Score {
        match self.kind {
            ObjectiveKind::Throughput => Score::value(r.iter().sum()),
            ObjectiveKind::OutageThroughput => Score::value(constrained_sum(r, threshold)),
            ObjectiveKind::OutageCount => {
                let served = r.iter().filter(|&&x| x >= threshold).count();
                Score::lexicographic(served as f64, r.iter().sum())
            }
        }
    }
}

/// Comparable objective value; larger is better, compared lexicographically.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Score {
    pub primary: f64,
    pub secondary: f64,
}

impl Score {
    pub fn value(v: f64) -> Self {
        Self {
            primary: v,
            secondary: 0.0,
        }
    }

    pub fn lexicographic(primary: f64, secondary: f64) -> Self {
        Self { primary, secondary }
    }

    pub fn better_than(&self, other: &Score) -> bool {
        self.partial_cmp(other) == Some(Ordering::Greater)
    }

    /// Whether `self` is within relative tolerance `tol` of `target`.
    /// With `tol = 0` this is `self >= target`.
    pub fn reaches(&self, target: &Score, tol: f64) -> bool {
        if self.primary > target.primary {
            return true;
        }
        if target.secondary == 0.0 && self.secondary == 0.0 {
            return self.primary >= (1.0 - tol) * target.primary;
        }
        self.primary == target.primary && self.secondary >= (1.0 - tol) * target.secondary
    }
}

/// Delay-weighted objective value after `iterations` search rounds.
pub fn evaluate_objective(obj: &Objective, r: &RateVector, iterations: usize) -> Result<Score> {
    let factor = delay_factor(obj.alpha, iterations)?;
    let raw = obj.raw_score(&r.0, rate_threshold(obj.theta_db));
    Ok(match obj.kind {
        ObjectiveKind::OutageCount => Score::lexicographic(raw.primary, factor * raw.secondary),
        _ => Score::value(factor * raw.primary),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::build_dft_codebook;
    use crate::model::BeamSelection;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rv(v: &[f64]) -> RateVector {
        RateVector(v.to_vec())
    }

    fn gm(n: usize, v: &[f64]) -> GainMatrix {
        GainMatrix::new(n, v.to_vec()).unwrap()
    }

    #[test]
    fn gain_identity_channel_dft_precoder() {
        let cb = build_dft_codebook(2, 2).unwrap();
        let v = cb.materialize(&BeamSelection::new(vec![1, 2], 2).unwrap()).unwrap();
        let g = channel_gain(&ComplexMatrix::identity(2), &v).unwrap();
        for x in &g.g {
            assert!((x - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gain_zero_channel() {
        let cb = build_dft_codebook(3, 4).unwrap();
        let v = cb.materialize(&BeamSelection::new(vec![1, 2], 4).unwrap()).unwrap();
        let g = channel_gain(&ComplexMatrix::zeros(2, 3), &v).unwrap();
        assert!(g.g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gain_matches_per_entry_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut z = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let h = ComplexMatrix::from_fn(3, 3, |_, _| z());
        let v = ComplexMatrix::from_fn(3, 3, |_, _| z());
        let g = channel_gain(&h, &v).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let (mut re, mut im) = (0.0, 0.0);
                for m in 0..3 {
                    let (a, b) = (h.get(i, m), v.get(m, j));
                    re += a.re * b.re - a.im * b.im;
                    im += a.re * b.im + a.im * b.re;
                }
                let expect = re * re + im * im;
                assert!((g.get(i, j) - expect).abs() <= 1e-12 * expect.max(1.0));
            }
        }
    }

    #[test]
    fn gain_rejects_mismatch() {
        let h = ComplexMatrix::zeros(2, 4);
        let v = ComplexMatrix::zeros(4, 3);
        assert!(channel_gain(&h, &v).is_err());
    }

    #[test]
    fn sinr_no_interference() {
        let g = gm(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(sinr(&g, 3.0, 3), vec![1.0; 3]);
    }

    #[test]
    fn sinr_symmetric_interference() {
        let g = gm(2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(sinr(&g, 2.0, 2), vec![0.5, 0.5]);
    }

    #[test]
    fn sinr_matches_scalar_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 4;
        let vals: Vec<f64> = (0..n * n).map(|_| rng.random_range(0.0..3.0)).collect();
        let g = gm(n, &vals);
        let (p, m) = (10.0, 8);
        let s = sinr(&g, p, m);
        for i in 0..n {
            let num = p / m as f64 * vals[i * n + i];
            let mut den = 1.0;
            for j in 0..n {
                if j != i {
                    den += p / m as f64 * vals[i * n + j];
                }
            }
            assert!((s[i] - num / den).abs() < 1e-14);
        }
    }

    #[test]
    fn sinr_saturates_when_gains_double() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let vals: Vec<f64> = (0..9).map(|_| rng.random_range(0.01..2.0)).collect();
            let g = gm(3, &vals);
            let a = sinr(&g, 5.0, 3);
            let b = sinr(&g.scale(2.0), 5.0, 3);
            for (x, y) in a.iter().zip(&b) {
                assert!(*y < 2.0 * x);
            }
        }
    }

    #[test]
    fn rates_examples() {
        assert_eq!(rates(&[1.0, 0.0, 3.0]).0, vec![1.0, 0.0, 2.0]);
    }

    #[test]
    fn throughput_examples() {
        let r = rv(&[1.0, 1.0, 1.0]);
        assert_eq!(throughput(&r, 0.0, 12345).unwrap(), 3.0);
        assert!((throughput(&r, 0.001, 100).unwrap() - 2.7).abs() < 1e-12);
        assert_eq!(throughput(&r, 0.001, 1000).unwrap(), 0.0);
        assert!(matches!(
            throughput(&r, 0.001, 1001),
            Err(Error::DelayBudgetExceeded { .. })
        ));
    }

    #[test]
    fn throughput_monotone_in_k() {
        let r = rv(&[0.3, 2.0]);
        let mut prev = f64::INFINITY;
        for k in 0..=1000 {
            let t = throughput(&r, 0.001, k).unwrap();
            assert!(t < prev);
            prev = t;
        }
        assert_eq!(throughput(&r, 0.0, 0).unwrap(), throughput(&r, 0.0, 999).unwrap());
    }

    #[test]
    fn outage_throughput_examples() {
        let r = rv(&[0.5, 1.5]);
        assert_eq!(outage_throughput(&r, 0.0, 0, 0.0).unwrap(), 1.5);
        assert_eq!(outage_throughput(&rv(&[0.1, 0.2]), 0.0, 3, 0.0).unwrap(), 0.0);
        let small = rv(&[2e-10, 3.0, 0.7]);
        assert_eq!(
            outage_throughput(&small, 0.001, 10, -100.0).unwrap(),
            throughput(&small, 0.001, 10).unwrap()
        );
    }

    #[test]
    fn served_stats_examples() {
        let s = served_stats(&rv(&[0.5, 1.5]), 0.0);
        assert_eq!(s.served, 1);
        assert_eq!(s.outage, vec![true, false]);
        assert_eq!(served_stats(&rv(&[0.0, 1e-300, 2.0]), f64::NEG_INFINITY).served, 3);
    }

    #[test]
    fn pa_ideal_is_identity() {
        for x in [1e-3, 1.0, 10.0, 1e6] {
            assert_eq!(pa_output_power(x, &PaParams::IDEAL).unwrap(), x);
        }
    }

    #[test]
    fn pa_closed_form_example() {
        let pa = PaParams {
            epsilon: 0.5,
            mu: 0.5,
            rho_max_db: 35.0,
        };
        let out = pa_output_power(1000.0, &pa).unwrap();
        let rho_max = db_to_linear(35.0);
        assert!((rho_max - 3162.2776601683795).abs() < 1e-9);
        assert!((out - 250_000.0 / rho_max).abs() < 1e-9);
        assert!((out - 79.06).abs() < 0.01);
        assert!((pa_consumed_power(out, &pa) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn pa_errors() {
        let sat = PaParams {
            epsilon: 0.5,
            mu: 0.5,
            rho_max_db: 35.0,
        };
        assert!(matches!(pa_output_power(1e5, &sat), Err(Error::PaSaturated { .. })));
        let mu1 = PaParams { mu: 1.0, ..sat };
        assert!(matches!(pa_output_power(10.0, &mu1), Err(Error::UnsupportedPa(_))));
        assert!(pa_output_power(0.0, &PaParams::IDEAL).is_err());
    }

    #[test]
    fn pa_monotone_and_efficiency_increasing() {
        let pa = PaParams {
            epsilon: 0.5,
            mu: 0.5,
            rho_max_db: 35.0,
        };
        let mut prev_out = 0.0;
        let mut prev_eff = 0.0;
        for i in 1..=45 {
            let cons = 100.0 * i as f64;
            let out = pa_output_power(cons, &pa).unwrap();
            let eff = effective_efficiency(out, &pa);
            assert!(out > prev_out);
            assert!(eff > prev_eff);
            let better = pa_output_power(cons, &PaParams { epsilon: 0.7, ..pa }).unwrap();
            assert!(better > out);
            prev_out = out;
            prev_eff = eff;
        }
    }

    #[test]
    fn objective_scores() {
        let thr = Objective::new(ObjectiveKind::Throughput, 0.0, 0.0);
        assert_eq!(evaluate_objective(&thr, &rv(&[1.0, 2.5]), 7).unwrap(), Score::value(3.5));

        let cnt = Objective::new(ObjectiveKind::OutageCount, 0.0, 0.0);
        let a = evaluate_objective(&cnt, &rv(&[0.5, 1.5]), 0).unwrap();
        let b = evaluate_objective(&cnt, &rv(&[1.2, 1.3]), 0).unwrap();
        assert!(b.better_than(&a));
        assert_eq!(b.primary, 2.0);

        let ot = Objective::new(ObjectiveKind::OutageThroughput, 0.001, -100.0);
        let t = Objective::new(ObjectiveKind::Throughput, 0.001, -100.0);
        let r = rv(&[1e-9, 0.4, 2.0]);
        assert_eq!(
            evaluate_objective(&ot, &r, 20).unwrap(),
            evaluate_objective(&t, &r, 20).unwrap()
        );
    }

    #[test]
    fn score_reaches() {
        let target = Score::value(10.0);
        assert!(Score::value(9.5).reaches(&target, 0.05));
        assert!(!Score::value(9.4).reaches(&target, 0.05));
        assert!(!Score::value(9.99).reaches(&target, 0.0));
        let lex = Score::lexicographic(3.0, 4.0);
        assert!(Score::lexicographic(4.0, 0.0).reaches(&lex, 0.0));
        assert!(!Score::lexicographic(2.0, 100.0).reaches(&lex, 0.5));
        assert!(Score::lexicographic(3.0, 3.9).reaches(&lex, 0.05));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn outage_never_exceeds_unconstrained(
                r in proptest::collection::vec(0.0..8.0f64, 1..16),
                k in 0usize..1000,
                theta in -20.0..20.0f64,
            ) {
                let r = RateVector(r);
                let o = outage_throughput(&r, 0.001, k, theta).unwrap();
                let t = throughput(&r, 0.001, k).unwrap();
                prop_assert!(0.0 <= o && o <= t);
            }

            #[test]
            fn pa_round_trip(cons_db in -10.0..38.0f64, eps in 0.05..1.0f64, mu in 0.0..0.95f64) {
                let pa = PaParams { epsilon: eps, mu, rho_max_db: 35.0 };
                let cons = db_to_linear(cons_db);
                if let Ok(out) = pa_output_power(cons, &pa) {
                    let back = pa_consumed_power(out, &pa);
                    prop_assert!(((back - cons) / cons).abs() < 1e-10);
                }
            }
        }
    }
}
