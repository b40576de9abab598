//! Dimensionless parameter space of the four-level medium.
//!
//! Every rate is measured in units of the excited-state decay rate Γ (so Γ = 1) and
//! every length in units of the medium length L (so L = 1). The atom number, the
//! single-photon coupling g and the speed of light only enter through the optical
//! depth, via g²N/c = αΓ/4L.

use crate::error::{QfcError, Result};
use crate::C64;

/// Excited-state decay rate; the unit of every rate.
pub const GAMMA: f64 = 1.0;
/// Medium length; the unit of every length.
pub const LENGTH: f64 = 1.0;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Optical depth α.
    pub alpha: f64,
    /// Coupling Rabi frequency Ω_c (|3⟩↔|2⟩).
    pub omega_c: C64,
    /// Driving Rabi frequency Ω_d (|4⟩↔|2⟩).
    pub omega_d: C64,
    /// Coherence decay rate of σ₃₁.
    pub gamma31: f64,
    /// Coherence decay rate of σ₄₁.
    pub gamma41: f64,
    /// Ground-state dephasing rate of σ₂₁.
    pub gamma21: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::symmetric(0.0, 1.0)
    }
}

impl SystemParams {
    /// Symmetric configuration: Ω_c = Ω_d = `rabi` (real), γ31 = γ41 = Γ, γ21 = 0.
    pub fn symmetric(alpha: f64, rabi: f64) -> Self {
        Self {
            alpha,
            omega_c: C64::new(rabi, 0.0),
            omega_d: C64::new(rabi, 0.0),
            gamma31: GAMMA,
            gamma41: GAMMA,
            gamma21: 0.0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Checks every invariant and returns the parameters unchanged.
    pub fn validate(self) -> Result<Self> {
        let reals = [
            ("alpha", self.alpha),
            ("omega_c", self.omega_c.re),
            ("omega_c", self.omega_c.im),
            ("omega_d", self.omega_d.re),
            ("omega_d", self.omega_d.im),
            ("gamma31", self.gamma31),
            ("gamma41", self.gamma41),
            ("gamma21", self.gamma21),
        ];
        if let Some((name, _)) = reals.iter().find(|(_, v)| !v.is_finite()) {
            return Err(QfcError::NonFinite(name));
        }
        if self.alpha < 0.0 {
            return Err(QfcError::NegativeOd(self.alpha));
        }
        if self.gamma31 <= 0.0 {
            return Err(QfcError::NonPositiveDecay {
                name: "gamma31",
                value: self.gamma31,
            });
        }
        if self.gamma41 <= 0.0 {
            return Err(QfcError::NonPositiveDecay {
                name: "gamma41",
                value: self.gamma41,
            });
        }
        if self.gamma21 < 0.0 {
            return Err(QfcError::NegativeDephasing(self.gamma21));
        }
        Ok(self)
    }

    /// True when |Ω_c| = |Ω_d|, γ31 = γ41 = Γ and γ21 = 0.
    pub fn is_symmetric(&self) -> bool {
        let (mc, md) = (self.omega_c.norm(), self.omega_d.norm());
        let scale = mc.max(md).max(1.0);
        (mc - md).abs() <= SYMMETRY_TOL * scale
            && (self.gamma31 - GAMMA).abs() <= SYMMETRY_TOL
            && (self.gamma41 - GAMMA).abs() <= SYMMETRY_TOL
            && self.gamma21 == 0.0
    }

    /// Symmetric and additionally Ω_c = Ω_d including phase. The cross couplings
    /// depend on Ω_d Ω_c*, which reduces to |Ω|² only when the phases agree.
    pub fn is_phase_matched_symmetric(&self) -> bool {
        let scale = self.omega_c.norm().max(1.0);
        self.is_symmetric() && (self.omega_c - self.omega_d).norm() <= SYMMETRY_TOL * scale
    }

    /// g²N/c = αΓ/4L.
    pub fn coupling_density(&self) -> f64 {
        self.alpha * GAMMA / (4.0 * LENGTH)
    }

    /// Largest rate scale in the problem: max(Γ, |Ω_c|, |Ω_d|).
    pub fn rate_scale(&self) -> f64 {
        GAMMA.max(self.omega_c.norm()).max(self.omega_d.norm())
    }

    /// Rotates both Rabi frequencies by a common phase.
    pub fn rotated(mut self, phase: f64) -> Self {
        let r = C64::from_polar(1.0, phase);
        self.omega_c *= r;
        self.omega_d *= r;
        self
    }
}
