//! Standard normal quantile and the uniform-to-Gaussian transform.
//!
//! All Gaussian noise in the crate, pseudo-random or quasi-random, is produced
//! through [`inv_normal_cdf`], so MC and QMC runs differ only in the point source.

use crate::lowdisc::UnitPoint;
use crate::{Error, Result};

/// Standard normal CDF via `erfc`.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper tail `Q(x) = 1 - Phi(x)`.
#[inline]
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

// Acklam's rational approximation, relative error about 1.15e-9 before refinement.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.02425;

fn acklam(p: f64) -> f64 {
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Lower-half quantile (`p <= 0.5`) with one Halley step.
fn lower_quantile(p: f64) -> f64 {
    let x = acklam(p);
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// `z` with `Phi(z) = u`, for `0 < u < 1`.
pub fn inv_normal_cdf(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile needs 0 < u < 1, got {u}"
        )));
    }
    Ok(inv_normal_cdf_unchecked(u))
}

#[inline]
pub(crate) fn inv_normal_cdf_unchecked(u: f64) -> f64 {
    if u == 0.5 {
        0.0
    } else if u < 0.5 {
        lower_quantile(u)
    } else {
        // 1 - u is exact for u in [0.5, 1)
        -lower_quantile(1.0 - u)
    }
}

/// Isotropic Gaussian `N(mean, per_dim_std^2 I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    mean: Vec<f64>,
    per_dim_std: f64,
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, per_dim_std: f64) -> Result<Self> {
        if !(per_dim_std > 0.0 && per_dim_std.is_finite()) {
            return Err(Error::invalid(format!(
                "per-dimension std must be positive and finite, got {per_dim_std}"
            )));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("Gaussian mean must be finite"));
        }
        Ok(Self { mean, per_dim_std })
    }

    pub fn centered(dimension: usize, per_dim_std: f64) -> Result<Self> {
        Self::new(vec![0.0; dimension], per_dim_std)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn per_dim_std(&self) -> f64 {
        self.per_dim_std
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    /// Slice form of [`unit_to_gaussian`] for hot loops.
    pub fn map_into(&self, coords: &[f64], out: &mut [f64]) -> Result<()> {
        if coords.len() != self.mean.len() || out.len() != self.mean.len() {
            return Err(Error::invalid(format!(
                "point dimension {} does not match Gaussian dimension {}",
                coords.len(),
                self.mean.len()
            )));
        }
        for ((o, &u), &m) in out.iter_mut().zip(coords).zip(&self.mean) {
            *o = m + self.per_dim_std * inv_normal_cdf(u)?;
        }
        Ok(())
    }
}

/// Component `j` is `mean_j + std * inv_normal_cdf(p_j)`.
pub fn unit_to_gaussian(point: &UnitPoint, spec: &GaussianSpec) -> Result<Vec<f64>> {
    let mut out = vec![0.0; spec.dimension()];
    spec.map_into(&point.coords, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowdisc::{PointStream, SequenceGenerator, SequenceKind};
    use proptest::prelude::*;

    /// Bisection on the CDF (or the survival function above the median),
    /// independent of the rational approximation.
    fn quantile_by_bisection(u: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0f64, 40.0f64);
        let tail = 1.0 - u;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let below = if u > 0.5 { normal_sf(mid) > tail } else { normal_cdf(mid) < u };
            if below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn known_values() {
        assert_eq!(inv_normal_cdf(0.5).unwrap(), 0.0);
        let z = inv_normal_cdf(0.975).unwrap();
        assert!((z - 1.959_963_984_540_054).abs() < 1e-12, "{z}");
        assert!((z - quantile_by_bisection(0.975)).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        for u in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(inv_normal_cdf(u), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn accuracy_across_range() {
        let mut u = 1e-12;
        while u < 1.0 - 1e-12 {
            for v in [u, 1.0 - u] {
                let z = inv_normal_cdf(v).unwrap();
                let oracle = quantile_by_bisection(v);
                assert!((z - oracle).abs() <= 1e-9, "u={v} z={z} oracle={oracle}");
            }
            u *= 1.7;
            if u > 0.5 {
                break;
            }
        }
    }

    proptest! {
        #[test]
        fn symmetric(u in 1e-12f64..0.5) {
            let a = inv_normal_cdf(u).unwrap();
            let b = inv_normal_cdf(1.0 - u).unwrap();
            prop_assert!((a + b).abs() < 1e-9);
        }

        #[test]
        fn round_trip(u in 1e-12f64..(1.0 - 1e-12)) {
            let z = inv_normal_cdf(u).unwrap();
            prop_assert!((normal_cdf(z) - u).abs() <= 1e-9);
        }

        #[test]
        fn monotone(a in 1e-12f64..(1.0 - 1e-12), b in 1e-12f64..(1.0 - 1e-12)) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(inv_normal_cdf(lo).unwrap() < inv_normal_cdf(hi).unwrap());
        }
    }

    #[test]
    fn maps_median_to_mean() {
        let spec = GaussianSpec::centered(3, 1.0).unwrap();
        let p = UnitPoint { coords: vec![0.5; 3] };
        assert_eq!(unit_to_gaussian(&p, &spec).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn composes_mean_and_std() {
        let spec = GaussianSpec::new(vec![1.0, 1.0], 2.0).unwrap();
        let p = UnitPoint { coords: vec![0.975, 0.5] };
        let g = unit_to_gaussian(&p, &spec).unwrap();
        assert!((g[0] - 4.919_927_969_080_108).abs() < 1e-9);
        assert_eq!(g[1], 1.0);
    }

    #[test]
    fn rejects_mismatch_and_bad_std() {
        let spec = GaussianSpec::centered(2, 1.0).unwrap();
        let p = UnitPoint { coords: vec![0.5; 3] };
        assert!(unit_to_gaussian(&p, &spec).is_err());
        assert!(GaussianSpec::centered(2, 0.0).is_err());
        assert!(GaussianSpec::centered(2, -1.0).is_err());
    }

    #[test]
    fn sample_moments() {
        let n = 100_000;
        let spec = GaussianSpec::new(vec![0.3, -1.0], 1.5).unwrap();
        let mut gen = SequenceGenerator::new(SequenceKind::PseudoRandom, 2, 3).unwrap();
        let mut sums = [0.0f64; 2];
        let mut sq = [0.0f64; 2];
        let mut u = [0.0; 2];
        let mut g = [0.0; 2];
        for _ in 0..n {
            gen.fill_next(&mut u);
            spec.map_into(&u, &mut g).unwrap();
            for j in 0..2 {
                sums[j] += g[j];
                sq[j] += g[j] * g[j];
            }
        }
        let var = 1.5f64 * 1.5;
        for j in 0..2 {
            let mean = sums[j] / n as f64;
            let s2 = sq[j] / n as f64 - mean * mean;
            let se_mean = (var / n as f64).sqrt();
            let se_var = (2.0 * var * var / n as f64).sqrt();
            assert!((mean - spec.mean()[j]).abs() < 4.0 * se_mean, "mean {mean}");
            assert!((s2 - var).abs() < 4.0 * se_var, "var {s2}");
        }
    }

    #[test]
    fn scrambled_sobol_passes_chi_square() {
        // 64 equiprobable bins under N(0,1); 1% critical value of chi2(63) is 92.01
        let n = 1 << 14;
        let bins = 64;
        let mut gen = SequenceGenerator::new(SequenceKind::ScrambledSobol, 1, 77).unwrap();
        let spec = GaussianSpec::centered(1, 1.0).unwrap();
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let z = unit_to_gaussian(&gen.next_point(), &spec).unwrap()[0];
            let bin = ((normal_cdf(z) * bins as f64) as usize).min(bins - 1);
            counts[bin] += 1;
        }
        let expected = n as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 92.01, "chi2 = {chi2}");
    }
}
