//! CP-violation parameter `ε` and the observables derived from it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::model::{Basis, EffectiveHamiltonian, MesonParams};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsilonKind {
    /// Admixture parameter of the K_S/K_L eigenvectors.
    Bare,
    /// Scaled by `√(Γ_L/Γ_S)`: amplitudes weighted by decay rates.
    Renormalized,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Epsilon {
    pub value: Complex64,
    pub kind: EpsilonKind,
    /// Set when `|ε| ≥ 1`, outside the small-admixture regime. Not an error:
    /// the number is still returned.
    pub out_of_range: bool,
}

impl Epsilon {
    pub fn new(value: Complex64, kind: EpsilonKind) -> Self {
        Self {
            value,
            kind,
            out_of_range: !(value.norm() < 1.0),
        }
    }

    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }

    pub fn arg_deg(&self) -> f64 {
        self.value.arg().to_degrees()
    }
}

fn check_widths(p: &MesonParams) -> Result<()> {
    let all = [p.m_s, p.m_l, p.gamma_s, p.gamma_l];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("all parameters must be finite".into()));
    }
    if p.gamma_s < 0.0 || p.gamma_l < 0.0 {
        return Err(Error::Parameter("decay widths must be non-negative".into()));
    }
    Ok(())
}

/// Closed form `ε = ½√(Γ_LΓ_S) / ((m_L − m_S) − (i/2)(Γ_L − Γ_S))`.
pub fn epsilon_bare(p: &MesonParams) -> Result<Epsilon> {
    check_widths(p)?;
    let denom = Complex64::new(p.delta_m(), -0.5 * p.delta_gamma());
    if denom.norm() == 0.0 {
        return Err(Error::DegenerateParameters(
            "Δm = 0 and ΔΓ = 0: ε is undefined".into(),
        ));
    }
    let num = 0.5 * (p.gamma_l * p.gamma_s).sqrt();
    Ok(Epsilon::new(num / denom, EpsilonKind::Bare))
}

/// Reads `ε` off the K_S-like eigenvector `(1, ε)ᵀ` of `H_eff` when the
/// eigenvalue is pinned to `H₁₁`: the second row gives
/// `ε = H₂₁ / (H₁₁ − H₂₂)`.
pub fn epsilon_from_eigenvector(h: &EffectiveHamiltonian) -> Result<Epsilon> {
    require_k1k2(h)?;
    let denom = h.get(0, 0) - h.get(1, 1);
    if denom.norm() == 0.0 {
        return Err(Error::DegenerateParameters("H₁₁ = H₂₂".into()));
    }
    Ok(Epsilon::new(h.get(1, 0) / denom, EpsilonKind::Bare))
}

/// The same parameter from the K_L-like eigenvector `(ε, 1)ᵀ` with the
/// eigenvalue pinned to `H₂₂`: `ε = H₁₂ / (H₂₂ − H₁₁)`.
pub fn epsilon_from_long_eigenvector(h: &EffectiveHamiltonian) -> Result<Epsilon> {
    require_k1k2(h)?;
    let denom = h.get(1, 1) - h.get(0, 0);
    if denom.norm() == 0.0 {
        return Err(Error::DegenerateParameters("H₁₁ = H₂₂".into()));
    }
    Ok(Epsilon::new(h.get(0, 1) / denom, EpsilonKind::Bare))
}

fn require_k1k2(h: &EffectiveHamiltonian) -> Result<()> {
    if h.basis() != Basis::K1K2 {
        return Err(Error::Basis {
            expected: Basis::K1K2.name(),
            actual: h.basis().name(),
        });
    }
    Ok(())
}

/// `ε^th = ε·√(Γ_L/Γ_S)`.
pub fn epsilon_renormalized(p: &MesonParams) -> Result<Epsilon> {
    if p.gamma_s == 0.0 {
        return Err(Error::Domain("Γ_S = 0 in the renormalization factor".into()));
    }
    let bare = epsilon_bare(p)?;
    let factor = (p.gamma_l / p.gamma_s).sqrt();
    Ok(Epsilon::new(bare.value * factor, EpsilonKind::Renormalized))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QOverP {
    pub modulus: f64,
    /// `arg((1 − ε)/(1 + ε))` in degrees, in (−180, 180].
    pub phase_deg: f64,
}

pub fn q_over_p(e: &Epsilon) -> Result<QOverP> {
    let one = Complex64::new(1.0, 0.0);
    let den = one + e.value;
    if den.norm() == 0.0 {
        return Err(Error::Pole);
    }
    let ratio = (one - e.value) / den;
    let mut phase = ratio.arg();
    if phase <= -PI {
        phase += 2.0 * PI;
    }
    Ok(QOverP {
        modulus: (one - e.value).norm() / den.norm(),
        phase_deg: phase.to_degrees(),
    })
}

/// Semileptonic asymmetry `A_SL ≃ 4 Re ε`.
pub fn asymmetry_sl(e: &Epsilon) -> f64 {
    4.0 * e.value.re
}

/// `2(1 − |q/p|)`, which agrees with [`asymmetry_sl`] to first order in `ε`.
pub fn asymmetry_sl_consistency(e: &Epsilon) -> Result<f64> {
    Ok(2.0 * (1.0 - q_over_p(e)?.modulus))
}

/// Ratio of `π⁺π⁻` production rates from K_L and K_S when the amplitudes
/// carry `√Γ` weights: `|ε|²Γ_L/Γ_S`.
pub fn production_rate_ratio(p: &MesonParams) -> Result<f64> {
    if p.gamma_s == 0.0 {
        return Err(Error::Domain("Γ_S = 0 in the production-rate ratio".into()));
    }
    Ok(epsilon_bare(p)?.value.norm_sqr() * p.gamma_l / p.gamma_s)
}
