//! Monte Carlo and importance-sampling estimators over explicit samples.

use std::collections::BTreeMap;

use super::{EstimateReport, WeightedSample};
use crate::{Error, Result};

fn max_log_weight<'a>(log_ws: impl Iterator<Item = &'a f64>) -> f64 {
    log_ws.fold(f64::NEG_INFINITY, |m, &x| m.max(x))
}

/// Sample mean with standard error `sd / sqrt(N)`.
pub fn mc_estimate(losses: &[f64]) -> Result<EstimateReport> {
    if losses.is_empty() {
        return Err(Error::invalid("Monte Carlo estimate needs at least one sample"));
    }
    let n = losses.len() as f64;
    let mean = losses.iter().sum::<f64>() / n;
    let se = if losses.len() > 1 {
        let ss: f64 = losses.iter().map(|l| (l - mean).powi(2)).sum();
        (ss / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(EstimateReport::new(mean, se, n, losses.len() as u64))
}

/// `(sum w)^2 / sum w^2`, evaluated with a max shift.
pub fn effective_sample_size(log_weights: &[f64]) -> Result<f64> {
    if log_weights.is_empty() {
        return Err(Error::invalid("effective sample size needs at least one weight"));
    }
    let m = max_log_weight(log_weights.iter());
    if m == f64::NEG_INFINITY || m.is_nan() {
        return Err(Error::DegenerateWeights("all weights are zero".into()));
    }
    let (s1, s2) = log_weights.iter().fold((0.0, 0.0), |(a, b), &lw| {
        let w = (lw - m).exp();
        (a + w, b + w * w)
    });
    Ok(s1 * s1 / s2)
}

/// Unnormalized IS: mean of `loss * w` with exact weights.
pub fn is_estimate_unnormalized(samples: &[WeightedSample]) -> Result<EstimateReport> {
    if samples.is_empty() {
        return Err(Error::invalid("IS estimate needs at least one sample"));
    }
    let n = samples.len() as f64;
    let m = max_log_weight(samples.iter().map(|s| &s.log_w));
    if m == f64::NEG_INFINITY {
        return Ok(EstimateReport::new(0.0, 0.0, 0.0, samples.len() as u64));
    }
    // values are loss * w = loss * exp(m) * exp(log_w - m)
    let scaled: Vec<f64> = samples.iter().map(|s| s.loss * (s.log_w - m).exp()).collect();
    let mean_scaled = scaled.iter().sum::<f64>() / n;
    let se_scaled = if samples.len() > 1 {
        let ss: f64 = scaled.iter().map(|v| (v - mean_scaled).powi(2)).sum();
        (ss / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let scale = m.exp();
    let logs: Vec<f64> = samples.iter().map(|s| s.log_w).collect();
    Ok(EstimateReport::new(
        mean_scaled * scale,
        se_scaled * scale,
        effective_sample_size(&logs)?,
        samples.len() as u64,
    ))
}

/// Self-normalized IS `sum w l / sum w` with delta-method standard error
/// `sqrt(sum w^2 (l - p)^2) / sum w`.
pub fn is_estimate_snis(samples: &[WeightedSample]) -> Result<EstimateReport> {
    if samples.is_empty() {
        return Err(Error::invalid("IS estimate needs at least one sample"));
    }
    let m = max_log_weight(samples.iter().map(|s| &s.log_w));
    if m == f64::NEG_INFINITY || m.is_nan() {
        return Err(Error::DegenerateWeights("all weights are zero".into()));
    }
    let ws: Vec<f64> = samples.iter().map(|s| (s.log_w - m).exp()).collect();
    let sw: f64 = ws.iter().sum();
    let sw2: f64 = ws.iter().map(|w| w * w).sum();
    let p = samples.iter().zip(&ws).map(|(s, w)| w * s.loss).sum::<f64>() / sw;
    let var = samples
        .iter()
        .zip(&ws)
        .map(|(s, w)| w * w * (s.loss - p).powi(2))
        .sum::<f64>()
        / (sw * sw);
    Ok(EstimateReport::new(p, var.sqrt(), sw * sw / sw2, samples.len() as u64))
}

/// Single self-normalized estimate over the union of samples from every
/// proposal, each carrying the log weight of its own proposal.
pub fn pool_weighted(samples: &[WeightedSample]) -> Result<EstimateReport> {
    is_estimate_snis(samples).map_err(|e| match e {
        Error::DegenerateWeights(msg) => Error::DegenerateWeights(format!("pooled weights: {msg}")),
        other => other,
    })
}

/// Average over codewords of per-codeword self-normalized estimates.
///
/// Standard error is the between-group spread when there are several groups and
/// the inner delta-method error when there is one.
pub fn conditional_is_estimate(samples: &[WeightedSample]) -> Result<EstimateReport> {
    if samples.is_empty() {
        return Err(Error::invalid("conditional IS needs at least one sample"));
    }
    let mut groups: BTreeMap<u64, Vec<WeightedSample>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.codeword_id).or_default().push(s.clone());
    }
    let mut inner = Vec::with_capacity(groups.len());
    for (id, group) in &groups {
        let report = is_estimate_snis(group).map_err(|e| match e {
            Error::DegenerateWeights(_) => {
                Error::DegenerateWeights(format!("codeword group {id} has all-zero weights"))
            }
            other => other,
        })?;
        inner.push(report);
    }
    if inner.len() == 1 {
        return Ok(inner.pop().expect("one group"));
    }
    let s = inner.len() as f64;
    let p = inner.iter().map(|r| r.p_hat).sum::<f64>() / s;
    let var = inner.iter().map(|r| (r.p_hat - p).powi(2)).sum::<f64>() / (s - 1.0);
    let ess = inner.iter().map(|r| r.ess).sum();
    Ok(EstimateReport::new(p, (var / s).sqrt(), ess, samples.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(loss: f64, log_w: f64) -> WeightedSample {
        WeightedSample::new(loss, log_w, vec![0.0], 0, 0)
    }

    #[test]
    fn mc_examples() {
        let z = mc_estimate(&[0.0; 10]).unwrap();
        assert_eq!((z.p_hat, z.std_err), (0.0, 0.0));
        assert_eq!(z.rel_err_pred, None);
        assert_eq!(mc_estimate(&[1.0, 0.0, 0.0, 0.0]).unwrap().p_hat, 0.25);
        let mut losses = vec![0.0; 10_000];
        losses[..100].iter_mut().for_each(|l| *l = 1.0);
        let r = mc_estimate(&losses).unwrap();
        assert!((r.rel_err_pred.unwrap() - 0.1).abs() < 1e-12);
        assert!(mc_estimate(&[]).is_err());
    }

    #[test]
    fn ess_examples() {
        assert!((effective_sample_size(&[0.3; 7]).unwrap() - 7.0).abs() < 1e-12);
        let one = [0.0, f64::NEG_INFINITY, f64::NEG_INFINITY];
        assert_eq!(effective_sample_size(&one).unwrap(), 1.0);
        let w = [0.0, 0.0, 2f64.ln()];
        assert!((effective_sample_size(&w).unwrap() - 16.0 / 6.0).abs() < 1e-12);
        assert!(matches!(
            effective_sample_size(&[f64::NEG_INFINITY; 3]),
            Err(Error::DegenerateWeights(_))
        ));
        assert!(effective_sample_size(&[]).is_err());
    }

    #[test]
    fn unnormalized_examples() {
        let samples: Vec<_> = [1.0, 0.0, 0.0, 1.0, 0.0].iter().map(|&l| ws(l, 0.0)).collect();
        let is = is_estimate_unnormalized(&samples).unwrap();
        let mc = mc_estimate(&[1.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((is.p_hat - mc.p_hat).abs() < 1e-15);
        assert!((is.std_err - mc.std_err).abs() < 1e-15);
        let single = is_estimate_unnormalized(&[ws(1.0, 0.5f64.ln())]).unwrap();
        assert!((single.p_hat - 0.5).abs() < 1e-15);
        assert!(is_estimate_unnormalized(&[]).is_err());
    }

    #[test]
    fn snis_examples() {
        let eq: Vec<_> = [1.0, 0.0, 0.5, 0.0].iter().map(|&l| ws(l, 3.0)).collect();
        assert!((is_estimate_snis(&eq).unwrap().p_hat - 0.375).abs() < 1e-15);
        let ones: Vec<_> = [-5.0, 2.0, 40.0].iter().map(|&w| ws(1.0, w)).collect();
        assert_eq!(is_estimate_snis(&ones).unwrap().p_hat, 1.0);
        assert!(matches!(
            is_estimate_snis(&[ws(1.0, f64::NEG_INFINITY)]),
            Err(Error::DegenerateWeights(_))
        ));
    }

    #[test]
    fn conditional_examples() {
        let group: Vec<_> = [(1.0, 0.1), (0.0, -0.4), (0.0, 0.9)]
            .iter()
            .map(|&(l, w)| ws(l, w))
            .collect();
        let single = conditional_is_estimate(&group).unwrap();
        assert_eq!(single, is_estimate_snis(&group).unwrap());
        let mut two = group.clone();
        two.extend(group.iter().map(|s| WeightedSample { codeword_id: 9, ..s.clone() }));
        let r = conditional_is_estimate(&two).unwrap();
        assert!((r.p_hat - single.p_hat).abs() < 1e-15);
        assert_eq!(r.std_err, 0.0);
        let mut bad = group.clone();
        bad.push(WeightedSample {
            codeword_id: 4,
            ..ws(1.0, f64::NEG_INFINITY)
        });
        match conditional_is_estimate(&bad) {
            Err(Error::DegenerateWeights(msg)) => assert!(msg.contains('4')),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shift_invariance() {
        let base: Vec<_> = (0..50)
            .map(|i| WeightedSample {
                codeword_id: (i % 3) as u64,
                ..ws(((i * 7) % 5) as f64 / 4.0, ((i as f64) * 0.7).sin() * 4.0)
            })
            .collect();
        let shifted: Vec<_> = base
            .iter()
            .map(|s| WeightedSample { log_w: s.log_w + 123.4, ..s.clone() })
            .collect();
        let logs = |v: &[WeightedSample]| v.iter().map(|s| s.log_w).collect::<Vec<_>>();
        for (a, b) in [
            (is_estimate_snis(&base).unwrap(), is_estimate_snis(&shifted).unwrap()),
            (pool_weighted(&base).unwrap(), pool_weighted(&shifted).unwrap()),
            (conditional_is_estimate(&base).unwrap(), conditional_is_estimate(&shifted).unwrap()),
        ] {
            assert!((a.p_hat - b.p_hat).abs() < 1e-12 * a.p_hat.abs().max(1e-300));
            assert!((a.std_err - b.std_err).abs() < 1e-12);
            assert!((a.ess - b.ess).abs() < 1e-9);
        }
        let (ea, eb) = (
            effective_sample_size(&logs(&base)).unwrap(),
            effective_sample_size(&logs(&shifted)).unwrap(),
        );
        assert!((ea - eb).abs() < 1e-9);
    }
}
