//! Rician channel synthesis.
//!
//! `H = sqrt(k/(k+1)) H_LOS + sqrt(1/(k+1)) H_NLOS` with a deterministic
//! LOS part and IID CN(0,1) NLOS entries. Any other generator producing an
//! `N x M` matrix can replace this module without touching the search.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{ComplexMatrix, LosFormula, RicianFactor, SystemConfig};
use crate::rng::{stream_rng, Stream};

/// IID circularly-symmetric Gaussian `N x M` matrix, unit power per entry.
pub fn sample_nlos<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> ComplexMatrix {
    let std = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(cfg.users, cfg.antennas, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(std * re, std * im)
    })
}

/// Deterministic `N x M` LOS matrix: `beta(1+j)` on the leading diagonal,
/// a constant `c(1+j)` everywhere else.
pub fn build_los(cfg: &SystemConfig) -> Result<ComplexMatrix> {
    let (m, n, beta) = (cfg.antennas, cfg.users, cfg.los_beta);
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::BetaOutOfRange { beta });
    }
    let diag = m.min(n) as f64;
    let total = (m * n) as f64;
    let off = match cfg.los_formula {
        LosFormula::Normalized => {
            if 2.0 * beta * beta > 1.0 {
                return Err(Error::BetaOutOfRange { beta });
            }
            if total == diag {
                0.0
            } else {
                ((total - 2.0 * diag * beta * beta) / (2.0 * (total - diag))).sqrt()
            }
        }
        LosFormula::Verbatim => {
            let num = total - diag * beta * beta;
            if num < 0.0 {
                return Err(Error::BetaOutOfRange { beta });
            }
            (num / diag).sqrt()
        }
    };
    Ok(ComplexMatrix::from_fn(n, m, |i, k| {
        let a = if i == k { beta } else { off };
        Complex64::new(a, a)
    }))
}

pub fn compose_channel(
    los: &ComplexMatrix,
    nlos: &ComplexMatrix,
    k: RicianFactor,
) -> Result<ComplexMatrix> {
    if los.shape() != nlos.shape() {
        return Err(Error::DimensionMismatch {
            context: "LOS/NLOS components",
            left: format!("{:?}", los.shape()),
            right: format!("{:?}", nlos.shape()),
        });
    }
    if !k.is_valid() {
        return Err(Error::InvalidArgument(format!("invalid Rician factor {}", k)));
    }
    match k {
        RicianFactor::Infinite => Ok(los.clone()),
        RicianFactor::Finite(x) if x == 0.0 => Ok(nlos.clone()),
        _ => {
            let (a, b) = k.weights();
            los.weighted_sum(a, nlos, b)
        }
    }
}

/// One channel draw, reproducible from `(seed, realization_index)`.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    pub k: RicianFactor,
    pub realization_index: u64,
    pub seed: u64,
}

impl ChannelRealization {
    pub fn generate(cfg: &SystemConfig, seed: u64, realization_index: u64) -> Result<Self> {
        let los = build_los(cfg)?;
        Self::generate_with_los(cfg, &los, seed, realization_index)
    }

    /// Same as [`generate`](Self::generate) with a precomputed LOS matrix.
    pub fn generate_with_los(
        cfg: &SystemConfig,
        los: &ComplexMatrix,
        seed: u64,
        realization_index: u64,
    ) -> Result<Self> {
        let mut rng = stream_rng(seed, realization_index, Stream::Channel);
        let nlos = sample_nlos(cfg, &mut rng);
        let h = compose_channel(los, &nlos, cfg.rician_k)?;
        Ok(Self {
            h,
            k: cfg.rician_k,
            realization_index,
            seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(m: usize, n: usize, beta: f64) -> SystemConfig {
        let mut c = SystemConfig::with_dimensions(m, n, m.max(1));
        c.los_beta = beta;
        c
    }

    #[test]
    fn nlos_has_unit_power_and_zero_mean() {
        let c = cfg(10, 10, 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut power, mut re_sum, mut count) = (0.0, 0.0, 0usize);
        while count < 100_000 {
            let h = sample_nlos(&c, &mut rng);
            for z in h.as_slice() {
                power += z.norm_sqr();
                re_sum += z.re;
                count += 1;
            }
        }
        let mean_power = power / count as f64;
        let mean_re = re_sum / count as f64;
        assert!((mean_power - 1.0).abs() < 0.02, "{}", mean_power);
        assert!(mean_re.abs() < 0.01, "{}", mean_re);
    }

    #[test]
    fn nlos_is_deterministic() {
        let c = cfg(4, 2, 0.2);
        let a = sample_nlos(&c, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_nlos(&c, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn los_degenerate_single_entry() {
        let h = build_los(&cfg(1, 1, 0.3)).unwrap();
        assert_eq!(h.as_slice(), &[Complex64::new(0.3, 0.3)]);
    }

    #[test]
    fn los_two_by_one_normalization() {
        let h = build_los(&cfg(2, 1, 0.2)).unwrap();
        assert_eq!(h.shape(), (1, 2));
        assert_eq!(h.get(0, 0), Complex64::new(0.2, 0.2));
        let c = 0.96f64.sqrt();
        assert!((h.get(0, 1).re - c).abs() < 1e-15);
        assert!((h.get(0, 1).im - c).abs() < 1e-15);
        assert!((h.frobenius_sqr() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn los_rejects_bad_beta() {
        assert!(matches!(build_los(&cfg(4, 2, -0.1)), Err(Error::BetaOutOfRange { .. })));
        assert!(matches!(build_los(&cfg(4, 2, 0.8)), Err(Error::BetaOutOfRange { .. })));
    }

    #[test]
    fn verbatim_formula_is_far_from_unit_power() {
        let mut c = cfg(32, 8, 0.2);
        c.los_formula = LosFormula::Verbatim;
        let h = build_los(&c).unwrap();
        // sqrt((256 - 0.32)/8)^2 * |1+j|^2 ~= 63.9 per off-diagonal entry.
        assert!((h.get(0, 1).norm_sqr() - 2.0 * (256.0 - 0.32) / 8.0).abs() < 1e-9);
    }

    #[test]
    fn compose_edge_factors() {
        let c = cfg(3, 2, 0.2);
        let los = build_los(&c).unwrap();
        let nlos = sample_nlos(&c, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(compose_channel(&los, &nlos, RicianFactor::Finite(0.0)).unwrap(), nlos);
        assert_eq!(compose_channel(&los, &nlos, RicianFactor::Infinite).unwrap(), los);
        let h = compose_channel(&los, &nlos, RicianFactor::Finite(1.0)).unwrap();
        let w = 0.5f64.sqrt();
        for ((z, l), n) in h.as_slice().iter().zip(los.as_slice()).zip(nlos.as_slice()) {
            assert!((z - (l * w + n * w)).norm() < 1e-15);
        }
        assert!(compose_channel(&los, &ComplexMatrix::zeros(2, 2), RicianFactor::Finite(1.0)).is_err());
    }

    #[test]
    fn compose_is_linear() {
        let c = cfg(4, 3, 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (l1, l2) = (sample_nlos(&c, &mut rng), sample_nlos(&c, &mut rng));
        let (n1, n2) = (sample_nlos(&c, &mut rng), sample_nlos(&c, &mut rng));
        let k = RicianFactor::Finite(2.5);
        let sum = compose_channel(
            &l1.weighted_sum(1.0, &l2, 1.0).unwrap(),
            &n1.weighted_sum(1.0, &n2, 1.0).unwrap(),
            k,
        )
        .unwrap();
        let parts = compose_channel(&l1, &n1, k)
            .unwrap()
            .weighted_sum(1.0, &compose_channel(&l2, &n2, k).unwrap(), 1.0)
            .unwrap();
        for (a, b) in sum.as_slice().iter().zip(parts.as_slice()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn realization_regenerates_bit_identically() {
        let mut c = cfg(8, 4, 0.2);
        c.rician_k = RicianFactor::Finite(3.0);
        let a = ChannelRealization::generate(&c, 42, 17).unwrap();
        let b = ChannelRealization::generate(&c, 42, 17).unwrap();
        let other = ChannelRealization::generate(&c, 42, 18).unwrap();
        assert_eq!(a.h, b.h);
        assert_ne!(a.h, other.h);
        assert_eq!(a.h.shape(), (4, 8));
    }
}
