//! Slot-to-slot fluctuation measures and power-law fits of their decay.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats::aggregate::NodeStats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationReport<T> {
    /// Population standard deviation of the slot `mu_0` values.
    pub sigma_0: T,
    /// Root-mean-square per-node `mu` difference, averaged over slot pairs.
    pub sigma_mu: T,
    pub n_slots: usize,
    pub per_slot_mu0: Vec<T>,
}

/// `sqrt(mean((mu_0_j - <mu_0>)^2))` over slots.
pub fn sigma_0<T: Real>(per_slot_mu0: &[T]) -> Result<T> {
    if per_slot_mu0.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: per_slot_mu0.len(),
        });
    }
    let n = T::from_usize_lossy(per_slot_mu0.len());
    let mean = per_slot_mu0.iter().copied().sum::<T>() / n;
    let var = per_slot_mu0
        .iter()
        .map(|&m| (m - mean) * (m - mean))
        .sum::<T>()
        / n;
    Ok(var.sqrt())
}

/// `sqrt(mean_i (mu_a(i) - mu_b(i))^2)` for one pair of slots.
pub fn pair_dispersion<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument("slots cover different node sets".into()));
    }
    if a.is_empty() {
        return Err(Error::EmptySamples);
    }
    let ms = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        / T::from_usize_lossy(a.len());
    Ok(ms.sqrt())
}

/// Mean of [`pair_dispersion`] over all unordered slot pairs.
pub fn sigma_mu<T: Real>(slots: &[&[T]]) -> Result<T> {
    if slots.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: slots.len(),
        });
    }
    let mut total = T::zero();
    let mut pairs = 0usize;
    for a in 0..slots.len() {
        for b in a + 1..slots.len() {
            total = total + pair_dispersion(slots[a], slots[b])?;
            pairs += 1;
        }
    }
    Ok(total / T::from_usize_lossy(pairs))
}

pub fn fluctuations<T: Real>(slots: &[NodeStats<T>]) -> Result<FluctuationReport<T>> {
    let per_slot_mu0: Vec<T> = slots.iter().map(|s| s.mu_0).collect();
    let mus: Vec<&[T]> = slots.iter().map(|s| s.mu.as_slice()).collect();
    Ok(FluctuationReport {
        sigma_0: sigma_0(&per_slot_mu0)?,
        sigma_mu: sigma_mu(&mus)?,
        n_slots: slots.len(),
        per_slot_mu0,
    })
}

/// `sigma ~ prefactor * n_r^eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit<T> {
    pub eta: T,
    pub prefactor: T,
    /// Standard error of `eta`; zero for fewer than three points or an exact fit.
    pub eta_stderr: T,
}

/// Ordinary least squares of `ln sigma` against `ln n_r`.
pub fn fit_power_law<T: Real>(nr_values: &[T], sigma_values: &[T]) -> Result<PowerLawFit<T>> {
    if nr_values.len() != sigma_values.len() {
        return Err(Error::InvalidArgument("x and y differ in length".into()));
    }
    if nr_values.len() < 3 {
        return Err(Error::TooFew {
            needed: 3,
            got: nr_values.len(),
        });
    }
    if nr_values
        .iter()
        .chain(sigma_values)
        .any(|&v| !(v > T::zero()) || !v.is_finite())
    {
        return Err(Error::InvalidArgument(
            "power-law fit needs strictly positive values".into(),
        ));
    }
    let lx: Vec<T> = nr_values.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = sigma_values.iter().map(|v| v.ln()).collect();
    let n = T::from_usize_lossy(lx.len());
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = ly.iter().copied().sum::<T>() / n;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for (&x, &y) in lx.iter().zip(&ly) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    if sxx == T::zero() {
        return Err(Error::ZeroVariance("n_r"));
    }
    let eta = sxy / sxx;
    let intercept = my - eta * mx;
    let rss = lx
        .iter()
        .zip(&ly)
        .map(|(&x, &y)| {
            let r = y - (intercept + eta * x);
            r * r
        })
        .sum::<T>();
    let dof = T::from_usize_lossy(lx.len() - 2);
    Ok(PowerLawFit {
        eta,
        prefactor: intercept.exp(),
        eta_stderr: (rss / dof / sxx).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_point_std() {
        assert!((sigma_0(&[0.1f64, 0.3]).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(sigma_0(&[0.1f64]), Err(Error::TooFew { .. })));
    }

    #[test]
    fn swapped_vectors_disperse_by_one() {
        let a = [1.0f64, 0.0];
        let b = [0.0f64, 1.0];
        assert_eq!(sigma_mu(&[&a, &b]).unwrap(), 1.0);
    }

    #[test]
    fn identical_slots_do_not_fluctuate() {
        let s = NodeStats {
            mu: vec![0.5f64, -0.25, 1.0],
            white_freq: vec![0.0; 3],
            delta_mu: vec![0.0; 3],
            mu_0: 0.4,
        };
        let r = fluctuations(&[s.clone(), s]).unwrap();
        assert_eq!(r.sigma_0, 0.0);
        assert_eq!(r.sigma_mu, 0.0);
        assert_eq!(r.n_slots, 2);
    }

    #[test]
    fn inverse_square_root() {
        let nr = [100.0f64, 400.0, 1600.0];
        let sigma: Vec<f64> = nr.iter().map(|n: &f64| 1.0 / n.sqrt()).collect();
        let fit = fit_power_law(&nr, &sigma).unwrap();
        assert!((fit.eta + 0.5).abs() < 1e-12);
        assert!((fit.prefactor - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_series() {
        let fit = fit_power_law(&[10.0f64, 20.0, 40.0], &[0.3, 0.3, 0.3]).unwrap();
        assert!(fit.eta.abs() < 1e-12);
        assert!((fit.prefactor - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_power_law(&[1.0f64, 2.0, 3.0], &[1.0, 0.0, 1.0]).is_err());
        assert!(fit_power_law(&[1.0f64, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_power_law(&[2.0f64, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }

    proptest! {
        #[test]
        fn planted_exponent_recovered(eta in -2.0f64..2.0, b in 0.01f64..100.0) {
            let nr = [500.0f64, 2500.0, 12500.0, 62500.0];
            let sigma: Vec<f64> = nr.iter().map(|n| b * n.powf(eta)).collect();
            let fit = fit_power_law(&nr, &sigma).unwrap();
            prop_assert!((fit.eta - eta).abs() < 1e-12);
            prop_assert!((fit.prefactor / b - 1.0).abs() < 1e-10);
        }

        #[test]
        fn slot_relabeling_invariance(
            mus in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 5), 2..6),
            rot in 0usize..6,
        ) {
            let slots: Vec<NodeStats<f64>> = mus.iter().map(|m| NodeStats {
                mu_0: m.iter().sum::<f64>() / 5.0,
                mu: m.clone(),
                white_freq: vec![0.0; 5],
                delta_mu: vec![0.0; 5],
            }).collect();
            let mut shuffled = slots.clone();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let a = fluctuations(&slots).unwrap();
            let b = fluctuations(&shuffled).unwrap();
            prop_assert!((a.sigma_0 - b.sigma_0).abs() < 1e-12);
            prop_assert!((a.sigma_mu - b.sigma_mu).abs() < 1e-12);
        }
    }
}
