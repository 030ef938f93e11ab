//! Temporal amplitudes and decay densities.
//!
//! Two families of curves live here. The standard intensity `|ψ₁(t)|²`
//! superposes the K_S and K_L survival amplitudes. The temporal
//! two-component wave function `(ψ̃₁, ψ̃₂)` instead weights each pole by
//! `√Γ`, so that `|ψ̃₁|²` and `|ψ̃₂|²` are decay-rate densities in the
//! CP = +1 and CP = −1 sectors and integrate to one together.
//!
//! All interference terms use the signed `Δm = m_L − m_S` and the exact
//! modulus-square expansion `2|ε|e^{−Γ̄t}cos(Δm·t − arg ε)`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::cp::{self, Epsilon, EpsilonKind};
use crate::model::MesonParams;
use crate::quadrature;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn survival_probability(gamma: f64, t: f64) -> Result<f64> {
    check_rate_time(gamma, t)?;
    Ok((-gamma * t).exp())
}

/// `p_d(t) = −dP_s/dt = γe^{−γt}`.
pub fn decay_rate_density(gamma: f64, t: f64) -> Result<f64> {
    check_rate_time(gamma, t)?;
    Ok(gamma * (-gamma * t).exp())
}

fn check_rate_time(gamma: f64, t: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("decay rate must be non-negative, got {gamma}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    Ok(())
}

/// CP sector of a decay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    /// CP = +1 (K₁-like, `π⁺π⁻`).
    Plus,
    /// CP = −1 (K₂-like).
    Minus,
}

impl Sector {
    pub fn from_sign(sign: i32) -> Option<Self> {
        match sign {
            1 => Some(Sector::Plus),
            -1 => Some(Sector::Minus),
            _ => None,
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Sector::Plus => 1,
            Sector::Minus => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// `|ψ₁|²` scaled to `I(0)`.
    Standard,
    /// Decay-rate weighted intensity built from `ε^th`.
    Renormalized,
    DensityCp1,
    DensityCp2,
    /// Binned Monte Carlo events.
    Histogram,
}

/// A sampled curve on an ascending time grid, with optional error bars.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensitySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Option<Vec<f64>>,
    pub model_kind: ModelKind,
}

impl IntensitySeries {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        errors: Option<Vec<f64>>,
        model_kind: ModelKind,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Parameter("times and values differ in length".into()));
        }
        if let Some(e) = &errors {
            if e.len() != times.len() {
                return Err(Error::Parameter("errors and times differ in length".into()));
            }
            if e.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                return Err(Error::Parameter("errors must be finite and non-negative".into()));
            }
        }
        check_grid(&times)?;
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Parameter("values must be finite and non-negative".into()));
        }
        Ok(Self {
            times,
            values,
            errors,
            model_kind,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Parameter("time grid must be finite".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("time grid must be strictly ascending".into()));
    }
    Ok(())
}

/// `n` evenly spaced points on `[t0, t1]`.
pub fn linear_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => {
            let step = (t1 - t0) / (n - 1) as f64;
            (0..n).map(|k| t0 + step * k as f64).collect()
        }
    }
}

/// Coefficient of the interference term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InterferenceCoefficient {
    /// `2|ε|`, the exact expansion of a modulus square.
    #[default]
    Exact,
    /// `|ε|`, as the textbook intensity formula is often displayed. Only
    /// for comparison plots: it is not a modulus square.
    Displayed,
}

impl InterferenceCoefficient {
    fn factor(self) -> f64 {
        match self {
            InterferenceCoefficient::Exact => 2.0,
            InterferenceCoefficient::Displayed => 1.0,
        }
    }
}

/// Parameters of the three-term interference intensity
///
/// `I(t) = scale/|1+ε|² · (e^{−Γ_S t} + |ε|²e^{−Γ_L t} + c|ε|e^{−Γ̄t}cos(Δm·t − arg ε))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferenceShape {
    pub gamma_s: f64,
    pub gamma_l: f64,
    pub delta_m: f64,
    pub epsilon: Complex64,
    pub scale: f64,
    pub coefficient: InterferenceCoefficient,
}

impl InterferenceShape {
    pub fn eval(&self, t: f64) -> f64 {
        let mean = 0.5 * (self.gamma_s + self.gamma_l);
        let modulus = self.epsilon.norm();
        let arg = self.epsilon.arg();
        let norm = (Complex64::new(1.0, 0.0) + self.epsilon).norm_sqr();
        let bracket = (-self.gamma_s * t).exp()
            + modulus * modulus * (-self.gamma_l * t).exp()
            + self.coefficient.factor()
                * modulus
                * (-mean * t).exp()
                * (self.delta_m * t - arg).cos();
        self.scale / norm * bracket
    }
}

/// `ψ₁(t) = (e^{−iE_S t} + ε e^{−iE_L t}) / (√2(1 + ε))`.
pub fn psi1_standard(p: &MesonParams, e: &Epsilon, t: f64) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let den = Complex64::new(1.0, 0.0) + e.value;
    if den.norm() == 0.0 {
        return Err(Error::Pole);
    }
    let a = (-I * p.energy_s() * t).exp();
    let b = e.value * (-I * p.energy_l() * t).exp();
    Ok((a + b) / (den * SQRT_2))
}

/// Standard intensity `I(t) = I(0)·|ψ₁(t)|²/|ψ₁(0)|²`, evaluated from its
/// three-term expansion.
pub fn intensity_standard(
    p: &MesonParams,
    e: &Epsilon,
    t_grid: &[f64],
    i0: f64,
    coefficient: InterferenceCoefficient,
) -> Result<IntensitySeries> {
    if (Complex64::new(1.0, 0.0) + e.value).norm() == 0.0 {
        return Err(Error::Pole);
    }
    check_grid(t_grid)?;
    check_times_non_negative(t_grid)?;
    let shape = InterferenceShape {
        gamma_s: p.gamma_s,
        gamma_l: p.gamma_l,
        delta_m: p.delta_m(),
        epsilon: e.value,
        scale: i0,
        coefficient,
    };
    curve(t_grid, |t| shape.eval(t), ModelKind::Standard)
}

/// Renormalized intensity, the same three-term form built from `ε^th`.
/// Proportional to the CP = +1 density of the temporal wave function.
pub fn intensity_renormalized(
    p: &MesonParams,
    t_grid: &[f64],
    i0: f64,
) -> Result<IntensitySeries> {
    check_grid(t_grid)?;
    check_times_non_negative(t_grid)?;
    let eps_th = cp::epsilon_renormalized(p)?;
    let shape = InterferenceShape {
        gamma_s: p.gamma_s,
        gamma_l: p.gamma_l,
        delta_m: p.delta_m(),
        epsilon: eps_th.value,
        scale: i0,
        coefficient: InterferenceCoefficient::Exact,
    };
    curve(t_grid, |t| shape.eval(t), ModelKind::Renormalized)
}

fn check_times_non_negative(t_grid: &[f64]) -> Result<()> {
    if t_grid.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::Domain("times must be non-negative".into()));
    }
    Ok(())
}

fn curve<F: Fn(f64) -> f64>(t_grid: &[f64], f: F, kind: ModelKind) -> Result<IntensitySeries> {
    let values: Vec<f64> = t_grid.iter().map(|&t| f(t).max(0.0)).collect();
    IntensitySeries::new(t_grid.to_vec(), values, None, kind)
}

/// Two-component temporal wave function of an initial K⁰.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemporalWaveFunction {
    params: MesonParams,
    epsilon: Epsilon,
    n_tilde: f64,
}

/// Closed form of `Ñ²`, the normalization of the decay probability.
pub fn n_tilde_squared(p: &MesonParams, eps: Complex64) -> f64 {
    let mean = p.mean_gamma();
    let dm = p.delta_m();
    let root = (p.gamma_s * p.gamma_l).sqrt();
    1.0 + eps.norm_sqr() + root * (p.gamma_s + p.gamma_l) / (dm * dm + mean * mean) * eps.re
}

pub fn build_wavefunction(p: &MesonParams, e: &Epsilon) -> Result<TemporalWaveFunction> {
    p.validate()?;
    if e.kind != EpsilonKind::Bare {
        return Err(Error::Parameter(
            "the wave function takes the bare ε; the √Γ weights renormalize it".into(),
        ));
    }
    if !e.value.is_finite() {
        return Err(Error::Parameter("ε must be finite".into()));
    }
    let n2 = n_tilde_squared(p, e.value);
    if !(n2 > 0.0) {
        return Err(Error::InvalidNormalization(n2));
    }
    Ok(TemporalWaveFunction {
        params: *p,
        epsilon: *e,
        n_tilde: n2.sqrt(),
    })
}

impl TemporalWaveFunction {
    pub fn params(&self) -> &MesonParams {
        &self.params
    }

    pub fn epsilon(&self) -> &Epsilon {
        &self.epsilon
    }

    pub fn n_tilde(&self) -> f64 {
        self.n_tilde
    }

    /// `(ψ̃₁(t), ψ̃₂(t))`.
    pub fn psi(&self, t: f64) -> (Complex64, Complex64) {
        let p = &self.params;
        let eps = self.epsilon.value;
        let short = p.gamma_s.sqrt() * (-I * p.energy_s() * t).exp();
        let long = p.gamma_l.sqrt() * (-I * p.energy_l() * t).exp();
        let k = 1.0 / (SQRT_2 * self.n_tilde);
        ((short + eps * long) * k, (eps * short + long) * k)
    }

    /// `|ψ̃_s(t)|²` from the amplitudes.
    pub fn density(&self, sector: Sector, t: f64) -> f64 {
        let (a, b) = self.psi(t);
        match sector {
            Sector::Plus => a.norm_sqr(),
            Sector::Minus => b.norm_sqr(),
        }
    }

    /// `|ψ̃_s(t)|²` from the expanded exponential-plus-interference form.
    pub fn density_expanded(&self, sector: Sector, t: f64) -> f64 {
        let p = &self.params;
        let eps = self.epsilon.value;
        let root = (p.gamma_s * p.gamma_l).sqrt();
        let rotation = Complex64::from_polar(1.0, -p.delta_m() * t);
        let (ws, wl, cross) = match sector {
            Sector::Plus => (1.0, eps.norm_sqr(), (eps * rotation).re),
            Sector::Minus => (eps.norm_sqr(), 1.0, (eps * rotation.conj()).re),
        };
        let bracket = ws * p.gamma_s * (-p.gamma_s * t).exp()
            + wl * p.gamma_l * (-p.gamma_l * t).exp()
            + 2.0 * root * cross * (-p.mean_gamma() * t).exp();
        bracket / (2.0 * self.n_tilde * self.n_tilde)
    }

    /// `∫_t^∞ |ψ̃_s|² dt'`, in closed form.
    pub fn sector_tail(&self, sector: Sector, t: f64) -> f64 {
        let p = &self.params;
        let eps = self.epsilon.value;
        let root = (p.gamma_s * p.gamma_l).sqrt();
        let mean = p.mean_gamma();
        let rate = match sector {
            Sector::Plus => Complex64::new(mean, p.delta_m()),
            Sector::Minus => Complex64::new(mean, -p.delta_m()),
        };
        let (ws, wl) = match sector {
            Sector::Plus => (1.0, eps.norm_sqr()),
            Sector::Minus => (eps.norm_sqr(), 1.0),
        };
        let cross = (eps * (-rate * t).exp() / rate).re;
        let bracket =
            ws * (-p.gamma_s * t).exp() + wl * (-p.gamma_l * t).exp() + 2.0 * root * cross;
        bracket / (2.0 * self.n_tilde * self.n_tilde)
    }

    /// Total probability of decaying in `sector`.
    pub fn sector_weight(&self, sector: Sector) -> f64 {
        self.sector_tail(sector, 0.0)
    }

    /// Probability of having decayed (either sector) by time `t`.
    pub fn cumulative(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let w = self.sector_weight(Sector::Plus) + self.sector_weight(Sector::Minus);
        w - self.sector_tail(Sector::Plus, t) - self.sector_tail(Sector::Minus, t)
    }

    /// Cut-off for numerical integration, `40/min(Γ_S, Γ_L)`.
    pub fn integration_horizon(&self) -> f64 {
        40.0 / self.params.gamma_s.min(self.params.gamma_l)
    }

    /// `∫₀^∞ (|ψ̃₁|² + |ψ̃₂|²) dt` by adaptive quadrature of the amplitudes
    /// up to [`integration_horizon`](Self::integration_horizon) plus the
    /// analytic tail beyond it.
    pub fn normalization_by_quadrature(&self) -> Result<f64> {
        let horizon = self.integration_horizon();
        let fast = self.params.gamma_s.max(self.params.gamma_l);
        let mut breaks = vec![0.0];
        let mut edge = 1.0 / fast;
        while edge < horizon {
            breaks.push(edge);
            edge *= 4.0;
        }
        breaks.push(horizon);
        let body = quadrature::integrate_with_breaks(
            |t| {
                let (a, b) = self.psi(t);
                a.norm_sqr() + b.norm_sqr()
            },
            &breaks,
            1e-12,
            1e-13,
            20_000,
        )?;
        let tail = self.sector_tail(Sector::Plus, horizon) + self.sector_tail(Sector::Minus, horizon);
        Ok(body.value + tail)
    }
}

pub fn psi_tilde(w: &TemporalWaveFunction, t: f64) -> Result<(Complex64, Complex64)> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    Ok(w.psi(t))
}

pub fn density_cp(
    w: &TemporalWaveFunction,
    sector: Sector,
    t_grid: &[f64],
) -> Result<IntensitySeries> {
    check_grid(t_grid)?;
    check_times_non_negative(t_grid)?;
    let kind = match sector {
        Sector::Plus => ModelKind::DensityCp1,
        Sector::Minus => ModelKind::DensityCp2,
    };
    curve(t_grid, |t| w.density(sector, t), kind)
}
