//! Event generator for the CP-sector decay densities.
//!
//! Events are drawn from the joint density `p(t, s) = |ψ̃_s(t)|²`. The
//! sector is chosen first from the closed-form integrated weights; the time
//! then comes from rejection sampling under a two-exponential envelope.
//! By Cauchy–Schwarz, for the CP = +1 sector
//!
//! `|√Γ_S e^{−iE_S t} + ε√Γ_L e^{−iE_L t}|² ≤ (1+|ε|)(Γ_S e^{−Γ_S t} + |ε|Γ_L e^{−Γ_L t})`,
//!
//! and the CP = −1 sector swaps the roles of the two widths. The accepted
//! fraction is at least `((1−|ε|)/(1+|ε|))²`.
//!
//! The random stream is ChaCha8 seeded through `SeedableRng::seed_from_u64`,
//! so a seed reproduces the same events on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::temporal::{IntensitySeries, ModelKind, Sector, TemporalWaveFunction};
use crate::{Error, Result};

const MAX_PROPOSALS_PER_EVENT: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DecaySample {
    pub times: Vec<f64>,
    pub sectors: Vec<Sector>,
    pub seed: u64,
    /// Envelope draws made, accepted or not. Zero for samples read from disk.
    pub proposals: u64,
}

impl DecaySample {
    pub fn new(times: Vec<f64>, sectors: Vec<Sector>, seed: u64) -> Result<Self> {
        if times.len() != sectors.len() {
            return Err(Error::Parameter("times and sectors differ in length".into()));
        }
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Parameter("decay times must be finite and non-negative".into()));
        }
        Ok(Self {
            times,
            sectors,
            seed,
            proposals: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.proposals > 0).then(|| self.times.len() as f64 / self.proposals as f64)
    }

    pub fn count(&self, sector: Sector) -> usize {
        self.sectors.iter().filter(|s| **s == sector).count()
    }
}

struct SectorSampler {
    sector: Sector,
    // mixture weight of the short-lived exponential
    p_short: f64,
    bound: f64,
}

pub fn sample_decays(w: &TemporalWaveFunction, n: usize, seed: u64) -> Result<DecaySample> {
    if n == 0 {
        return Err(Error::Parameter("at least one event is required".into()));
    }
    let p = w.params();
    let modulus = w.epsilon().modulus();
    let weight_plus = w.sector_weight(Sector::Plus);
    let weight_minus = w.sector_weight(Sector::Minus);
    let total = weight_plus + weight_minus;
    if !(weight_plus.is_finite() && weight_minus.is_finite() && total > 0.0) {
        return Err(Error::Sampling(format!(
            "sector weights are not usable: {weight_plus}, {weight_minus}"
        )));
    }
    let prob_plus = (weight_plus / total).clamp(0.0, 1.0);
    let bound = 1.0 + modulus;
    if !bound.is_finite() {
        return Err(Error::Sampling("envelope constant is not finite".into()));
    }
    let plus = SectorSampler {
        sector: Sector::Plus,
        p_short: 1.0 / (1.0 + modulus),
        bound,
    };
    let minus = SectorSampler {
        sector: Sector::Minus,
        p_short: modulus / (1.0 + modulus),
        bound,
    };
    // unnormalized |ψ̃_s|²·2Ñ²
    let scale = 2.0 * w.n_tilde() * w.n_tilde();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::with_capacity(n);
    let mut sectors = Vec::with_capacity(n);
    let mut proposals = 0u64;
    for _ in 0..n {
        let sampler = if rng.random::<f64>() < prob_plus {
            &plus
        } else {
            &minus
        };
        let mut tries = 0u64;
        loop {
            tries += 1;
            if tries > MAX_PROPOSALS_PER_EVENT {
                return Err(Error::Sampling(
                    "rejection sampler made no progress; envelope does not fit".into(),
                ));
            }
            let gamma = if rng.random::<f64>() < sampler.p_short {
                p.gamma_s
            } else {
                p.gamma_l
            };
            let t = -(1.0 - rng.random::<f64>()).ln() / gamma;
            let (ws, wl) = match sampler.sector {
                Sector::Plus => (1.0, modulus),
                Sector::Minus => (modulus, 1.0),
            };
            let envelope = sampler.bound
                * (ws * p.gamma_s * (-p.gamma_s * t).exp()
                    + wl * p.gamma_l * (-p.gamma_l * t).exp());
            let density = scale * w.density(sampler.sector, t);
            if !(density.is_finite() && envelope.is_finite()) {
                return Err(Error::Sampling(format!("non-finite density at t = {t:e}")));
            }
            if rng.random::<f64>() * envelope < density {
                times.push(t);
                sectors.push(sampler.sector);
                break;
            }
        }
        proposals += tries;
    }
    Ok(DecaySample {
        times,
        sectors,
        seed,
        proposals,
    })
}

/// Binned decay-time density with the events that fell outside the edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    /// Bin centres, `count/(n·width)` and `√max(count, 1)/(n·width)`.
    pub series: IntensitySeries,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Selected events below the first or above the last edge.
    pub overflow: usize,
    /// Size of the whole sample, the `n` of the normalization.
    pub total: usize,
}

/// Bins the events of `sector` (or all events when `None`), normalized by
/// the total sample size so that sector histograms add up to the marginal.
pub fn histogram(s: &DecaySample, sector: Option<Sector>, edges: &[f64]) -> Result<Histogram> {
    if edges.len() < 2 {
        return Err(Error::Parameter("at least two bin edges are required".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("bin edges must be finite and strictly ascending".into()));
    }
    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    let mut overflow = 0;
    let last = edges[bins];
    for (t, sec) in s.times.iter().zip(&s.sectors) {
        if sector.is_some_and(|want| want != *sec) {
            continue;
        }
        if *t < edges[0] || *t > last {
            overflow += 1;
            continue;
        }
        // the last bin is closed on the right
        let k = edges.partition_point(|e| e <= t).saturating_sub(1).min(bins - 1);
        counts[k] += 1;
    }
    let n = s.len() as f64;
    let mut centres = Vec::with_capacity(bins);
    let mut values = Vec::with_capacity(bins);
    let mut errors = Vec::with_capacity(bins);
    for (k, c) in counts.iter().enumerate() {
        let width = edges[k + 1] - edges[k];
        centres.push(0.5 * (edges[k] + edges[k + 1]));
        if n > 0.0 {
            values.push(*c as f64 / (n * width));
            // an empty bin still carries the error of one count
            errors.push((*c as f64).max(1.0).sqrt() / (n * width));
        } else {
            values.push(0.0);
            errors.push(0.0);
        }
    }
    let series = IntensitySeries::new(centres, values, Some(errors), ModelKind::Histogram)?;
    Ok(Histogram {
        series,
        edges: edges.to_vec(),
        counts,
        overflow,
        total: s.len(),
    })
}
