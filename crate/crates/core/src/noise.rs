//! Vacuum-reservoir noise: diffusion coefficients and the Langevin integrals.
//!
//! The renormalized noise operators obey
//! ⟨f_jk(z,ω) f_k′j′(z′,ω′)⟩ = (L/2πc) D_{jk,k′j′} δ(ω−ω′) δ(z−z′).
//! With L = 1 and c absorbed into the field normalization the prefactor is 1/2π,
//! and every noise contribution to a second moment is a double integral
//! (1/2π) ∫∫ Σ K_jk D_{jk,k′j′} K*_{j′k′} dz dω over a kernel K ∈ {P, Q}.

use nalgebra::Matrix3;
use std::f64::consts::PI;

use crate::error::{QfcError, Result};
use crate::parallel;
use crate::params::{SystemParams, GAMMA};
use crate::quadrature::GaussLegendre;
use crate::spectral::solve_susceptibilities;
use crate::transfer::{noise_kernels, NoiseKernels, SingleModeTransfer};
use crate::C64;

/// Normally ordered diffusion coefficients; row jk ∈ {21, 31, 41}, column the
/// adjoint pair k′j′ ∈ {12, 13, 14} (same ordering).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix {
    pub entries: Matrix3<C64>,
}

impl DiffusionMatrix {
    pub fn zero() -> Self {
        Self {
            entries: Matrix3::zeros(),
        }
    }

    /// Weak-probe limit: no first-order excited-state population, so every entry vanishes.
    pub fn weak_probe() -> Self {
        diffusion_matrix(0.0, 0.0)
    }

    pub fn from_entries(entries: Matrix3<C64>) -> Self {
        Self { entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| *z == C64::from(0.0))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            entries: self.entries * C64::from(s),
        }
    }
}

/// Einstein-relation diffusion matrix. Only D_{21,12} = (Γ/2)(ρ44 + ρ33) survives.
pub fn diffusion_matrix(pop33: f64, pop44: f64) -> DiffusionMatrix {
    assert!(
        (0.0..=1.0).contains(&pop33) && (0.0..=1.0).contains(&pop44),
        "populations must lie in [0, 1]"
    );
    let mut entries = Matrix3::zeros();
    entries[(0, 0)] = C64::from(0.5 * GAMMA * (pop44 + pop33));
    DiffusionMatrix { entries }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// P_jk, feeding the transmitted probe.
    P,
    /// Q_jk, feeding the converted signal.
    Q,
}

/// Noise kernels tabulated on a Gauss–Legendre product grid in (ω, z).
#[derive(Debug, Clone)]
pub struct NoiseSpectrum {
    pub omega_rule: GaussLegendre,
    pub z_rule: GaussLegendre,
    /// One entry per ω node.
    pub kernels: Vec<NoiseKernels>,
}

impl NoiseSpectrum {
    pub fn build(
        params: &SystemParams,
        half_width: f64,
        omega_points: usize,
        z_points: usize,
    ) -> Result<Self> {
        let params = params.validate()?;
        let omega_rule = GaussLegendre::on_interval(omega_points, -half_width, half_width);
        let z_rule = GaussLegendre::on_interval(z_points, 0.0, 1.0);
        let kernels = parallel::try_map(&omega_rule.nodes, |&w| {
            let coeffs = solve_susceptibilities(&params, w)?;
            noise_kernels(&coeffs, &z_rule.nodes)
        })?;
        Ok(Self {
            omega_rule,
            z_rule,
            kernels,
        })
    }

    /// (1/2π) ∫∫ Σ K_jk D_{jk,k′j′} K*_{j′k′} dz dω (real part).
    pub fn quadratic_form(&self, kernel: Kernel, diffusion: &DiffusionMatrix) -> f64 {
        let idx: Vec<usize> = (0..self.kernels.len()).collect();
        let total = parallel::ordered_sum(&idx, |&i| {
            let k = &self.kernels[i];
            let slots = match kernel {
                Kernel::P => &k.p,
                Kernel::Q => &k.q,
            };
            let inner: f64 = self
                .z_rule
                .weights
                .iter()
                .enumerate()
                .map(|(iz, wz)| wz * bilinear(slots, iz, diffusion))
                .sum();
            self.omega_rule.weights[i] * inner
        });
        total / (2.0 * PI)
    }
}

/// Re Σ_{jk,j′k′} K_jk(z) D_{jk,k′j′} K*_{j′k′}(z) at grid index `iz`.
pub fn bilinear(slots: &[Vec<C64>; 3], iz: usize, diffusion: &DiffusionMatrix) -> f64 {
    let mut acc = C64::from(0.0);
    for r in 0..3 {
        for c in 0..3 {
            let d = diffusion.entries[(r, c)];
            if d != C64::from(0.0) {
                acc += slots[r][iz] * d * slots[c][iz].conj();
            }
        }
    }
    acc.re
}

/// Grid-doubling driver for the Langevin integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseIntegrator {
    /// Starting number of ω nodes.
    pub omega_points: usize,
    /// Starting number of z nodes.
    pub z_points: usize,
    /// Accept when successive estimates differ by less than `tolerance · max(1, |I|)`.
    pub tolerance: f64,
    pub max_doublings: usize,
    /// Window half-width W as a multiple of max(Γ, |Ω_c|, |Ω_d|).
    pub window_factor: f64,
}

impl Default for NoiseIntegrator {
    fn default() -> Self {
        Self {
            omega_points: 513,
            z_points: 32,
            tolerance: 1e-8,
            max_doublings: 4,
            window_factor: 10.0,
        }
    }
}

impl NoiseIntegrator {
    pub fn half_width(&self, params: &SystemParams) -> f64 {
        self.window_factor * params.rate_scale()
    }

    pub fn integrate(
        &self,
        params: &SystemParams,
        kernel: Kernel,
        diffusion: &DiffusionMatrix,
    ) -> Result<f64> {
        let params = params.validate()?;
        // The form is bilinear in D.
        if diffusion.is_zero() {
            return Ok(0.0);
        }
        let w = self.half_width(&params);
        let (mut nw, mut nz) = (self.omega_points, self.z_points);
        let mut previous =
            NoiseSpectrum::build(&params, w, nw, nz)?.quadratic_form(kernel, diffusion);
        let mut change = f64::INFINITY;
        for _ in 0..self.max_doublings {
            nw *= 2;
            nz *= 2;
            let next = NoiseSpectrum::build(&params, w, nw, nz)?.quadratic_form(kernel, diffusion);
            change = (next - previous).abs();
            if change <= self.tolerance * next.abs().max(1.0) {
                return Ok(next);
            }
            previous = next;
        }
        Err(QfcError::NonConvergedIntegral(change))
    }
}

/// Langevin contribution to the output probe photon number.
pub fn langevin_photon_noise(params: &SystemParams, diffusion: &DiffusionMatrix) -> Result<f64> {
    NoiseIntegrator::default().integrate(params, Kernel::P, diffusion)
}

/// η₁: normally ordered Langevin term in the converted-signal variance.
pub fn eta1(params: &SystemParams, diffusion: &DiffusionMatrix) -> Result<f64> {
    NoiseIntegrator::default().integrate(params, Kernel::Q, diffusion)
}

/// η₂ from the signal commutator: 1 − |C₀|² − |D₀|² + η₁, with η₁ evaluated for
/// the weak-probe diffusion matrix.
pub fn eta2(params: &SystemParams) -> Result<f64> {
    let eta1 = eta1(params, &DiffusionMatrix::weak_probe())?;
    eta2_with(params, eta1)
}

pub fn eta2_with(params: &SystemParams, eta1: f64) -> Result<f64> {
    let t = SingleModeTransfer::new(params)?;
    Ok(1.0 - t.c0.norm_sqr() - t.d0.norm_sqr() + eta1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::noise_kernels;

    fn injected() -> DiffusionMatrix {
        diffusion_matrix(0.5, 0.5)
    }

    #[test]
    fn diffusion_entries() {
        assert!(diffusion_matrix(0.0, 0.0).is_zero());
        let d = diffusion_matrix(0.5, 0.5);
        assert_eq!(d.entries[(0, 0)], C64::from(0.5));
        assert_eq!(d.entries.iter().filter(|z| z.norm() != 0.0).count(), 1);
        assert_eq!(diffusion_matrix(1.0, 0.0).entries[(0, 0)], C64::from(0.5));
    }

    #[test]
    #[should_panic]
    fn diffusion_rejects_bad_population() {
        diffusion_matrix(1.5, 0.0);
    }

    #[test]
    fn weak_probe_noise_vanishes() {
        for alpha in [0.0, 4.0, 200.0] {
            let p = SystemParams::symmetric(alpha, 1.0);
            let d = DiffusionMatrix::weak_probe();
            assert_eq!(langevin_photon_noise(&p, &d).unwrap(), 0.0);
            assert_eq!(eta1(&p, &d).unwrap(), 0.0);
        }
    }

    #[test]
    fn empty_medium_noise_vanishes() {
        let p = SystemParams::symmetric(0.0, 1.0);
        assert_eq!(langevin_photon_noise(&p, &injected()).unwrap(), 0.0);
        assert_eq!(eta1(&p, &injected()).unwrap(), 0.0);
    }

    #[test]
    fn eta2_values() {
        let e = |a: f64| eta2(&SystemParams::symmetric(a, 1.0)).unwrap();
        assert!(e(0.0).abs() < 1e-15);
        assert!((e(4.0) - 0.5).abs() < 1e-14);
        assert!(e(1e6).abs() < 1e-5);
        for alpha in [0.3f64, 1.0, 9.0, 77.0, 400.0] {
            let closed = 8.0 * alpha / (4.0 + alpha).powi(2);
            assert!((e(alpha) - closed).abs() < 1e-12);
        }
    }

    /// Midpoint rule in both ω and z with one Richardson step; independent of
    /// the Gauss–Legendre path used by the integrator.
    fn midpoint_oracle(
        params: &SystemParams,
        kernel: Kernel,
        d: &DiffusionMatrix,
        nw: usize,
        nz: usize,
    ) -> f64 {
        let w = NoiseIntegrator::default().half_width(params);
        let rule = |nw: usize, nz: usize| {
            let hw = 2.0 * w / nw as f64;
            let hz = 1.0 / nz as f64;
            let zs: Vec<f64> = (0..nz).map(|i| (i as f64 + 0.5) * hz).collect();
            let mut total = 0.0;
            for i in 0..nw {
                let omega = -w + (i as f64 + 0.5) * hw;
                let coeffs = solve_susceptibilities(params, omega).unwrap();
                let k = noise_kernels(&coeffs, &zs).unwrap();
                let slots = match kernel {
                    Kernel::P => &k.p,
                    Kernel::Q => &k.q,
                };
                for iz in 0..nz {
                    total += hw * hz * bilinear(slots, iz, d);
                }
            }
            total / (2.0 * PI)
        };
        let coarse = rule(nw, nz);
        let fine = rule(2 * nw, 2 * nz);
        (4.0 * fine - coarse) / 3.0
    }

    #[test]
    fn injected_photon_noise_matches_midpoint_oracle() {
        let p = SystemParams::symmetric(4.0, 1.0);
        let gl = langevin_photon_noise(&p, &injected()).unwrap();
        let oracle = midpoint_oracle(&p, Kernel::P, &injected(), 1600, 24);
        assert!(gl > 0.0);
        assert!((gl - oracle).abs() <= 1e-6 * gl, "{gl} vs {oracle}");
    }

    #[test]
    fn injected_eta1_matches_midpoint_oracle() {
        let p = SystemParams::symmetric(4.0, 1.0);
        let gl = eta1(&p, &injected()).unwrap();
        let oracle = midpoint_oracle(&p, Kernel::Q, &injected(), 1600, 24);
        assert!(gl > 0.0);
        assert!((gl - oracle).abs() <= 1e-6 * gl, "{gl} vs {oracle}");
    }

    #[test]
    fn bilinear_in_diffusion() {
        let p = SystemParams::symmetric(4.0, 1.0);
        let spectrum = NoiseSpectrum::build(&p, 10.0, 129, 16).unwrap();
        for kernel in [Kernel::P, Kernel::Q] {
            let one = spectrum.quadratic_form(kernel, &injected());
            let two = spectrum.quadratic_form(kernel, &injected().scaled(2.0));
            assert!((two - 2.0 * one).abs() <= 1e-14 * two.abs());
        }
    }

    #[test]
    fn non_convergence_reported() {
        let integrator = NoiseIntegrator {
            omega_points: 3,
            z_points: 2,
            max_doublings: 1,
            ..NoiseIntegrator::default()
        };
        let p = SystemParams::symmetric(4.0, 1.0);
        assert!(matches!(
            integrator.integrate(&p, Kernel::Q, &injected()),
            Err(QfcError::NonConvergedIntegral(_))
        ));
    }
}
