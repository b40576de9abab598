//! Frequency-domain solution of the first-order Heisenberg–Langevin equations.
//!
//! In the weak-probe limit all population sits in |1⟩ and the three first-order
//! coherences σ₂₁, σ₃₁, σ₄₁ obey a linear system driven by a†_p, a†_s and the
//! Langevin forces F₂₁, F₃₁, F₄₁. After the Fourier transform (∂/∂t → iω) the
//! coherences are eliminated algebraically, leaving the coupled propagation
//! equations
//!
//! ```text
//! ∂z a†_p + Λ_p a†_p + κ_p a†_s = Σ ζ^p_jk f_jk
//! ∂z a†_s + Λ_s a†_s + κ_s a†_p = Σ ζ^s_jk f_jk
//! ```
//!
//! The numeric path ([`solve_susceptibilities`]) works for arbitrary rates and
//! Rabi frequencies; [`closed_form_coefficients`] is the symmetric-case closed
//! form and serves as its oracle.
//!
//! Units: N/c is absorbed into the renormalized noise operators, so the
//! single-photon coupling becomes g = √(αΓ/4L).

use nalgebra::{Matrix2, Matrix3, Vector3};

use crate::error::{QfcError, Result};
use crate::params::{SystemParams, GAMMA};
use crate::C64;

/// Largest 1-norm condition number accepted for the 3×3 solve.
pub const MAX_CONDITION: f64 = 1e12;
/// |G(ω)| below this (in Γ³) is treated as singular.
pub const G_FLOOR: f64 = 1e-14;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Index of a Langevin noise source, in the order (σ₂₁, σ₃₁, σ₄₁).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coherence {
    S21,
    S31,
    S41,
}

impl Coherence {
    pub const ALL: [Coherence; 3] = [Coherence::S21, Coherence::S31, Coherence::S41];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Coherence::S21 => "21",
            Coherence::S31 => "31",
            Coherence::S41 => "41",
        }
    }
}

/// Linear system for (σ₂₁, σ₃₁, σ₄₁):
/// ∂t σ = drift·σ + drive_p·a†_p + drive_s·a†_s + F.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderSystem {
    pub omega: f64,
    pub drift: Matrix3<C64>,
    pub drive_p: Vector3<C64>,
    pub drive_s: Vector3<C64>,
    /// Single-photon coupling g = √(α/4) in the normalized units.
    pub coupling: f64,
}

impl FirstOrderSystem {
    /// iω·I − drift, the matrix inverted by the frequency-domain solve.
    pub fn response_matrix(&self) -> Matrix3<C64> {
        Matrix3::from_diagonal_element(I * self.omega) - self.drift
    }

    pub fn determinant(&self) -> C64 {
        self.response_matrix().determinant()
    }
}

pub fn build_first_order_system(params: &SystemParams, omega: f64) -> FirstOrderSystem {
    let half = C64::new(0.5, 0.0);
    let (oc, od) = (params.omega_c, params.omega_d);
    let drift = Matrix3::new(
        C64::from(-0.5 * params.gamma21),
        -I * oc * half,
        -I * od * half,
        -I * oc.conj() * half,
        C64::from(-0.5 * params.gamma31),
        C64::from(0.0),
        -I * od.conj() * half,
        C64::from(0.0),
        C64::from(-0.5 * params.gamma41),
    );
    let g = params.coupling_density().sqrt();
    FirstOrderSystem {
        omega,
        drift,
        drive_p: Vector3::new(C64::from(0.0), -I * g, C64::from(0.0)),
        drive_s: Vector3::new(C64::from(0.0), C64::from(0.0), -I * g),
        coupling: g,
    }
}

/// Per-frequency propagation and noise-coupling coefficients (units 1/L and 1/√L).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCoefficients {
    pub omega: f64,
    pub lambda_p: C64,
    pub lambda_s: C64,
    pub kappa_p: C64,
    pub kappa_s: C64,
    pub zeta_p: [C64; 3],
    pub zeta_s: [C64; 3],
}

impl SpectralCoefficients {
    /// M = (Λ_p, κ_p; κ_s, Λ_s), so that ∂z a† = −M a† + noise.
    pub fn propagation_matrix(&self) -> Matrix2<C64> {
        Matrix2::new(self.lambda_p, self.kappa_p, self.kappa_s, self.lambda_s)
    }

    pub fn zeta(&self, jk: Coherence) -> (C64, C64) {
        (self.zeta_p[jk.index()], self.zeta_s[jk.index()])
    }

    /// All eight coefficients in a fixed order, for comparisons.
    pub fn as_array(&self) -> [C64; 10] {
        [
            self.lambda_p,
            self.lambda_s,
            self.kappa_p,
            self.kappa_s,
            self.zeta_p[0],
            self.zeta_p[1],
            self.zeta_p[2],
            self.zeta_s[0],
            self.zeta_s[1],
            self.zeta_s[2],
        ]
    }
}

fn one_norm(m: &Matrix3<C64>) -> f64 {
    (0..3)
        .map(|j| (0..3).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Numeric elimination of the coherences for arbitrary parameters.
pub fn solve_susceptibilities(params: &SystemParams, omega: f64) -> Result<SpectralCoefficients> {
    let sys = build_first_order_system(params, omega);
    let k = sys.response_matrix();
    let singular = |condition| QfcError::SingularSystem { omega, condition };
    let r = k.try_inverse().ok_or_else(|| singular(f64::INFINITY))?;
    let condition = one_norm(&k) * one_norm(&r);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(singular(condition));
    }

    // ∂z a†_p = −i g σ₃₁ and ∂z a†_s = +i g σ₄₁ (backward signal).
    let g = sys.coupling;
    let out_p = -I * g;
    let out_s = I * g;
    let rp = r.row(1).transpose() * out_p;
    let rs = r.row(2).transpose() * out_s;

    Ok(SpectralCoefficients {
        omega,
        lambda_p: -rp.dot(&sys.drive_p),
        kappa_p: -rp.dot(&sys.drive_s),
        lambda_s: -rs.dot(&sys.drive_s),
        kappa_s: -rs.dot(&sys.drive_p),
        zeta_p: [rp[0], rp[1], rp[2]],
        zeta_s: [rs[0], rs[1], rs[2]],
    })
}

/// G(ω) = (Γ/2 + iω)(2iΓω − 4ω² + 2|Ω|²).
pub fn g_function(omega: f64, rabi_sq: f64) -> C64 {
    let w = C64::from(omega);
    (C64::from(0.5 * GAMMA) + I * w) * (I * 2.0 * GAMMA * w - 4.0 * w * w + 2.0 * rabi_sq)
}

/// Symmetric-case closed forms, transcribed term by term. Requires Ω_c = Ω_d.
pub fn closed_form_coefficients(params: &SystemParams, omega: f64) -> Result<SpectralCoefficients> {
    if !params.is_phase_matched_symmetric() {
        return Err(QfcError::NotSymmetricCase);
    }
    let rabi = params.omega_c;
    let rabi_conj = rabi.conj();
    let rabi_sq = rabi.norm_sqr();
    let gm = g_function(omega, rabi_sq);
    if gm.norm() < G_FLOOR {
        return Err(QfcError::SingularG(omega));
    }
    let w = C64::from(omega);
    let gamma = C64::from(GAMMA);
    let density = params.alpha * GAMMA / 4.0;
    let amp = density.sqrt();

    let lambda_p = density * (I * 2.0 * gamma * w - 4.0 * w * w + rabi_sq) / gm;
    let kappa_p = density * C64::from(-rabi_sq) / gm;
    let zeta_p = [
        amp * (-I * 2.0 * w * rabi_conj - gamma * rabi_conj) / gm,
        amp * (I * 4.0 * w * w + 2.0 * gamma * w - I * rabi_sq) / gm,
        amp * (I * rabi_sq) / gm,
    ];
    let zeta_s = [
        amp * (gamma * rabi_conj + I * 2.0 * w * rabi_conj) / gm,
        amp * (-I * rabi_sq) / gm,
        amp * (-2.0 * gamma * w - I * 4.0 * w * w + I * rabi_sq) / gm,
    ];
    Ok(SpectralCoefficients {
        omega,
        lambda_p,
        lambda_s: -lambda_p,
        kappa_p,
        kappa_s: -kappa_p,
        zeta_p,
        zeta_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn drift_diagonal_matches_decay_rates() {
        let p = SystemParams::symmetric(200.0, 1.0);
        let sys = build_first_order_system(&p, 0.0);
        assert_eq!(sys.drift[(0, 0)], C64::from(0.0));
        assert_eq!(sys.drift[(1, 1)], C64::from(-0.5));
        assert_eq!(sys.drift[(2, 2)], C64::from(-0.5));
        assert_eq!(sys.drift[(0, 1)], C64::new(0.0, -0.5));
        assert_eq!(sys.drift[(2, 0)], C64::new(0.0, -0.5));
    }

    #[test]
    fn vanishing_rabi_decouples_ground_coherence() {
        let p = SystemParams::symmetric(10.0, 0.0);
        let sys = build_first_order_system(&p, 0.3);
        for j in 1..3 {
            assert_eq!(sys.drift[(0, j)], C64::from(0.0));
            assert_eq!(sys.drift[(j, 0)], C64::from(0.0));
        }
    }

    #[test]
    fn determinant_is_quarter_g() {
        // Cofactor expansion along the first row gives det = (Γ/2 + iω)(iω(Γ/2 + iω) + |Ω|²/2),
        // which is G(ω)/4.
        for &(omega, rabi) in &[(1.0, 1.0), (0.0, 1.0), (-2.5, 3.0), (0.7, 0.2)] {
            let p = SystemParams::symmetric(7.0, rabi);
            let det = build_first_order_system(&p, omega).determinant();
            let expected = g_function(omega, rabi * rabi) / 4.0;
            assert!(close(det, expected, 1e-14), "{det} vs {expected}");
        }
    }

    #[test]
    fn resonant_values() {
        let p = SystemParams::symmetric(200.0, 1.0);
        let c = solve_susceptibilities(&p, 0.0).unwrap();
        assert_relative_eq!(c.lambda_p.re, 50.0, max_relative = 1e-14);
        assert_relative_eq!(c.kappa_p.re, -50.0, max_relative = 1e-14);
        assert!(c.lambda_p.im.abs() < 1e-12 && c.kappa_p.im.abs() < 1e-12);
        // ζ^p_41(0) = i√(αΓ/4)/Γ
        assert!(close(c.zeta_p[2], C64::new(0.0, 50f64.sqrt()), 1e-14));
        let cf = closed_form_coefficients(&p, 0.0).unwrap();
        assert_relative_eq!(cf.lambda_p.re, 50.0, max_relative = 1e-15);
        assert_relative_eq!(cf.kappa_p.re, -50.0, max_relative = 1e-15);
    }

    #[test]
    fn empty_medium_has_no_coupling() {
        let p = SystemParams::symmetric(0.0, 1.0);
        let c = solve_susceptibilities(&p, 0.4).unwrap();
        assert!(c.as_array().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn singular_configuration_detected() {
        let p = SystemParams::symmetric(5.0, 0.0);
        assert!(matches!(
            solve_susceptibilities(&p, 0.0),
            Err(QfcError::SingularSystem { .. })
        ));
        assert_eq!(
            closed_form_coefficients(&p, 0.0),
            Err(QfcError::SingularG(0.0))
        );
        // Away from resonance the same medium is fine.
        assert!(solve_susceptibilities(&p, 0.5).is_ok());
        // Ground-state dephasing also regularizes it.
        let q = SystemParams { gamma21: 0.1, ..p };
        assert!(solve_susceptibilities(&q, 0.0).is_ok());
    }

    #[test]
    fn asymmetric_rejected_by_closed_form() {
        let mut p = SystemParams::symmetric(5.0, 1.0);
        p.gamma21 = 0.2;
        assert_eq!(
            closed_form_coefficients(&p, 0.0),
            Err(QfcError::NotSymmetricCase)
        );
    }

    #[test]
    fn symmetric_sign_relations() {
        let p = SystemParams::symmetric(37.0, 2.3);
        for &w in &[-3.0, -0.1, 0.0, 0.4, 5.0] {
            let c = solve_susceptibilities(&p, w).unwrap();
            assert!(close(c.lambda_s, -c.lambda_p, 1e-12));
            assert!(close(c.kappa_s, -c.kappa_p, 1e-12));
        }
    }

    #[test]
    fn conjugate_reflection_for_real_rabi() {
        let p = SystemParams::symmetric(20.0, 1.5);
        for &w in &[0.1, 0.8, 3.0, 12.0] {
            let plus = solve_susceptibilities(&p, w).unwrap();
            let minus = solve_susceptibilities(&p, -w).unwrap();
            assert!(close(minus.lambda_p, plus.lambda_p.conj(), 1e-12));
            assert!(close(minus.kappa_p, plus.kappa_p.conj(), 1e-12));
        }
    }

    #[test]
    fn optical_depth_scaling() {
        let base = SystemParams::symmetric(3.0, 0.8);
        let scaled = base.with_alpha(12.0);
        let a = solve_susceptibilities(&base, 0.35).unwrap();
        let b = solve_susceptibilities(&scaled, 0.35).unwrap();
        assert!(close(b.lambda_p, a.lambda_p * 4.0, 1e-13));
        assert!(close(b.kappa_s, a.kappa_s * 4.0, 1e-13));
        for j in 0..3 {
            assert!(close(b.zeta_p[j], a.zeta_p[j] * 2.0, 1e-13));
            assert!(close(b.zeta_s[j], a.zeta_s[j] * 2.0, 1e-13));
        }
    }

    #[test]
    fn complex_common_phase_matches_closed_form() {
        let p = SystemParams::symmetric(11.0, 1.7).rotated(0.9);
        let a = solve_susceptibilities(&p, 0.6).unwrap();
        let b = closed_form_coefficients(&p, 0.6).unwrap();
        for (x, y) in a.as_array().iter().zip(b.as_array().iter()) {
            assert!(close(*x, *y, 1e-12), "{x} vs {y}");
        }
    }
}
