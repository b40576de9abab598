//! Spatial propagation through the medium and the backward boundary re-solve.
//!
//! The forward propagator e^{−ML} maps (a†_p(0), a†_s(0)) to (a†_p(L), a†_s(L)).
//! In the backward geometry the known boundary values are a†_p(0) and a†_s(L),
//! so the propagator is rearranged into the scattering form
//!
//! ```text
//! (a†_p(L), a†_s(0)) = (A, B; C, D) · (a†_p(0), a†_s(L)) + noise
//! ```

use nalgebra::Matrix2;

use crate::error::{QfcError, Result};
use crate::params::SystemParams;
use crate::spectral::{solve_susceptibilities, Coherence, SpectralCoefficients};
use crate::C64;

/// |D′| below this makes the boundary re-solve an error.
pub const MIN_D_PRIME: f64 = 1e-12;

/// Below this |δ| (half the eigenvalue gap) the exponential uses the even power series.
const SERIES_RADIUS: f64 = 0.5;

/// e^{−M} for a 2×2 complex matrix.
///
/// Writes −M = sI + N with s = −tr(M)/2 and N traceless, so N² = δ²I and
/// e^{−M} = e^{s}(cosh δ·I + sinh δ/δ·N). Well-separated eigenvalues (|δ| > 0.5)
/// use the closed form; otherwise cosh δ and sinh δ/δ are summed as power
/// series in δ², which stays exact for nilpotent N.
pub fn expm2(m: &Matrix2<C64>) -> Matrix2<C64> {
    let x = -m;
    let s = (x[(0, 0)] + x[(1, 1)]) * 0.5;
    let n = x - Matrix2::from_diagonal_element(s);
    let delta_sq = n[(0, 0)] * n[(0, 0)] + n[(0, 1)] * n[(1, 0)];
    let (ch, shc) = if delta_sq.norm() <= SERIES_RADIUS * SERIES_RADIUS {
        even_series(delta_sq)
    } else {
        let delta = delta_sq.sqrt();
        (delta.cosh(), delta.sinh() / delta)
    };
    let scale = s.exp();
    (Matrix2::from_diagonal_element(ch) + n * shc) * scale
}

/// (cosh δ, sinh δ/δ) from δ².
fn even_series(delta_sq: C64) -> (C64, C64) {
    let mut ch = C64::from(1.0);
    let mut shc = C64::from(1.0);
    let mut term = C64::from(1.0);
    for k in 1..=14 {
        let k = k as f64;
        // term = δ^{2k} / (2k)!
        term *= delta_sq / ((2.0 * k - 1.0) * (2.0 * k));
        ch += term;
        shc += term / (2.0 * k + 1.0);
    }
    (ch, shc)
}

/// Rearranges the forward propagator into the backward scattering matrix.
pub fn boundary_resolve(raw: &Matrix2<C64>) -> Result<Matrix2<C64>> {
    let (a, b, c, d) = (raw[(0, 0)], raw[(0, 1)], raw[(1, 0)], raw[(1, 1)]);
    if !(d.norm() >= MIN_D_PRIME) {
        return Err(QfcError::IllPosedBoundary(d.norm()));
    }
    Ok(Matrix2::new(a - b * c / d, b / d, -c / d, d.inv()))
}

/// Scattering matrix of two consecutive slices (Redheffer star product).
/// `first` covers the entrance side, `second` the exit side.
pub fn star_product(first: &Matrix2<C64>, second: &Matrix2<C64>) -> Result<Matrix2<C64>> {
    let (a1, b1, c1, d1) = (first[(0, 0)], first[(0, 1)], first[(1, 0)], first[(1, 1)]);
    let (a2, b2, c2, d2) = (
        second[(0, 0)],
        second[(0, 1)],
        second[(1, 0)],
        second[(1, 1)],
    );
    // Multiple reflections between the slices sum to 1/(1 − B₁C₂).
    let den = C64::from(1.0) - b1 * c2;
    if !(den.norm() >= MIN_D_PRIME) {
        return Err(QfcError::IllPosedBoundary(den.norm()));
    }
    let r = den.inv();
    Ok(Matrix2::new(
        a2 * a1 * r,
        b2 + a2 * b1 * d2 * r,
        c1 + d1 * c2 * a1 * r,
        d1 * d2 * r,
    ))
}

/// Largest raw propagator entry for which the direct re-solve is used.
const DIRECT_RESOLVE_LIMIT: f64 = 1e4;

/// Scattering matrix of a slab of thickness `length` with propagation matrix `m`.
///
/// Equal to `boundary_resolve(expm2(m·length))`. When e^{−M·length} has large
/// entries, A′ − B′C′/D′ cancels catastrophically, so the slab is instead built
/// from slices of unit norm joined by star products.
pub fn scattering_matrix(m: &Matrix2<C64>, length: f64) -> Result<Matrix2<C64>> {
    let raw = expm2(&(m * C64::from(length)));
    if raw.iter().all(|z| z.norm() <= DIRECT_RESOLVE_LIMIT) {
        return boundary_resolve(&raw);
    }
    sliced_scattering(m, length)
}

fn sliced_scattering(m: &Matrix2<C64>, length: f64) -> Result<Matrix2<C64>> {
    let norm =
        length * (m[(0, 0)].norm() + m[(1, 0)].norm()).max(m[(0, 1)].norm() + m[(1, 1)].norm());
    let halvings = if norm > 1.0 {
        norm.log2().ceil() as i32
    } else {
        0
    };
    let slice = m * C64::from(length * 0.5f64.powi(halvings));
    let mut s = boundary_resolve(&expm2(&slice))?;
    for _ in 0..halvings {
        s = star_product(&s, &s)?;
    }
    if !(s[(1, 1)].norm() <= MIN_D_PRIME.recip()) {
        return Err(QfcError::IllPosedBoundary(s[(1, 1)].norm().recip()));
    }
    Ok(s)
}

/// Inverse of [`boundary_resolve`]: recovers the forward propagator.
pub fn reassemble(resolved: &Matrix2<C64>) -> Matrix2<C64> {
    let (a, b, c, d) = (
        resolved[(0, 0)],
        resolved[(0, 1)],
        resolved[(1, 0)],
        resolved[(1, 1)],
    );
    Matrix2::new(a - b * c / d, b / d, -c / d, d.inv())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationMatrix {
    pub omega: f64,
    /// (A′, B′; C′, D′) = e^{−ML}. Overflows for strongly absorbing detunings;
    /// `resolved` does not depend on it.
    pub raw: Matrix2<C64>,
    /// (A, B; C, D).
    pub resolved: Matrix2<C64>,
}

impl PropagationMatrix {
    pub fn from_coefficients(coeffs: &SpectralCoefficients) -> Result<Self> {
        let m = coeffs.propagation_matrix();
        let raw = expm2(&m);
        let resolved = scattering_matrix(&m, 1.0)?;
        Ok(Self {
            omega: coeffs.omega,
            raw,
            resolved,
        })
    }

    pub fn at(params: &SystemParams, omega: f64) -> Result<Self> {
        Self::from_coefficients(&solve_susceptibilities(params, omega)?)
    }

    pub fn a(&self) -> C64 {
        self.resolved[(0, 0)]
    }
    pub fn b(&self) -> C64 {
        self.resolved[(0, 1)]
    }
    pub fn c(&self) -> C64 {
        self.resolved[(1, 0)]
    }
    pub fn d(&self) -> C64 {
        self.resolved[(1, 1)]
    }
}

/// Single-mode (ω = 0) transfer coefficients A₀, B₀, C₀, D₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleModeTransfer {
    pub a0: C64,
    pub b0: C64,
    pub c0: C64,
    pub d0: C64,
}

impl SingleModeTransfer {
    pub fn new(params: &SystemParams) -> Result<Self> {
        let params = params.validate()?;
        let pm = PropagationMatrix::at(&params, 0.0)?;
        Ok(Self {
            a0: pm.a(),
            b0: pm.b(),
            c0: pm.c(),
            d0: pm.d(),
        })
    }

    pub fn transmittance(&self) -> f64 {
        self.a0.norm_sqr()
    }

    pub fn conversion_efficiency(&self) -> f64 {
        self.c0.norm_sqr()
    }
}

/// Probe transmittance |A₀|².
pub fn transmittance(params: &SystemParams) -> Result<f64> {
    Ok(SingleModeTransfer::new(params)?.transmittance())
}

/// Conversion efficiency |C₀|².
pub fn conversion_efficiency(params: &SystemParams) -> Result<f64> {
    Ok(SingleModeTransfer::new(params)?.conversion_efficiency())
}

/// Langevin kernels P_jk(z), Q_jk(z) at one frequency on a grid of positions.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseKernels {
    pub omega: f64,
    pub z: Vec<f64>,
    /// P[jk][i] = P_jk(z_i), indexed by [`Coherence::index`].
    pub p: [Vec<C64>; 3],
    pub q: [Vec<C64>; 3],
}

impl NoiseKernels {
    pub fn p(&self, jk: Coherence) -> &[C64] {
        &self.p[jk.index()]
    }

    pub fn q(&self, jk: Coherence) -> &[C64] {
        &self.q[jk.index()]
    }
}

/// Kernels for a unit Langevin source at z: a jump ζ in (a†_p, a†_s) that
/// reaches the outputs through the slabs [0, z] and [z, L].
pub fn noise_kernels(coeffs: &SpectralCoefficients, z_grid: &[f64]) -> Result<NoiseKernels> {
    if let Some(z) = z_grid.iter().find(|z| !(0.0..=1.0).contains(*z)) {
        return Err(QfcError::InvalidArgument(format!(
            "kernel position {z} outside [0, 1]"
        )));
    }
    let m = coeffs.propagation_matrix();
    let mut p: [Vec<C64>; 3] = Default::default();
    let mut q: [Vec<C64>; 3] = Default::default();
    for &z in z_grid {
        let left = scattering_matrix(&m, z)?;
        let right = scattering_matrix(&m, 1.0 - z)?;
        let (b_l, d_l) = (left[(0, 1)], left[(1, 1)]);
        let (a_r, c_r) = (right[(0, 0)], right[(1, 0)]);
        let den = C64::from(1.0) - b_l * c_r;
        if !(den.norm() >= MIN_D_PRIME) {
            return Err(QfcError::IllPosedBoundary(den.norm()));
        }
        for jk in Coherence::ALL {
            let (zp, zs) = coeffs.zeta(jk);
            // probe amplitude just after the source
            let probe = (zp - b_l * zs) / den;
            p[jk.index()].push(a_r * probe);
            q[jk.index()].push(d_l * (c_r * probe - zs));
        }
    }
    Ok(NoiseKernels {
        omega: coeffs.omega,
        z: z_grid.to_vec(),
        p,
        q,
    })
}

/// `n` equally spaced points covering [0, 1] inclusive.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Default kernel grid size.
pub const DEFAULT_Z_POINTS: usize = 257;

/// Result of the classical boundary-value solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalResult {
    pub transmittance: f64,
    pub conversion_efficiency: f64,
}

/// Classical counterpart of the ω = 0 propagation: probe amplitude 1 enters at
/// z = 0, no signal enters at z = L. Integrated with RK4 from z = 0 for the two
/// unit initial signal amplitudes; linear shooting fixes a_s(0) so a_s(L) = 0.
pub fn semiclassical_solve(params: &SystemParams) -> Result<SemiclassicalResult> {
    let params = params.validate()?;
    let coeffs = solve_susceptibilities(&params, 0.0)?;
    let m = [
        [coeffs.lambda_p, coeffs.kappa_p],
        [coeffs.kappa_s, coeffs.lambda_s],
    ];
    let norm = (m[0][0].norm() + m[1][0].norm()).max(m[0][1].norm() + m[1][1].norm());
    let steps = ((50.0 * norm).ceil() as usize).max(1000);

    let u = integrate_linear(&m, [C64::from(1.0), C64::from(0.0)], steps);
    let v = integrate_linear(&m, [C64::from(0.0), C64::from(1.0)], steps);
    let scale = u[1].norm().max(1.0);
    if v[1].norm() <= 1e-14 * scale {
        return Err(QfcError::ShootingFailure(v[1].norm()));
    }
    let signal_at_entrance = -u[1] / v[1];
    let probe_at_exit = u[0] + signal_at_entrance * v[0];
    Ok(SemiclassicalResult {
        transmittance: probe_at_exit.norm_sqr(),
        conversion_efficiency: signal_at_entrance.norm_sqr(),
    })
}

/// RK4 for y' = −M y over z ∈ [0, 1].
fn integrate_linear(m: &[[C64; 2]; 2], y0: [C64; 2], steps: usize) -> [C64; 2] {
    let f = |y: [C64; 2]| -> [C64; 2] {
        [
            -(m[0][0] * y[0] + m[0][1] * y[1]),
            -(m[1][0] * y[0] + m[1][1] * y[1]),
        ]
    };
    let axpy = |y: [C64; 2], k: [C64; 2], h: f64| [y[0] + k[0] * h, y[1] + k[1] * h];
    let h = 1.0 / steps as f64;
    let mut y = y0;
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(axpy(y, k1, 0.5 * h));
        let k3 = f(axpy(y, k2, 0.5 * h));
        let k4 = f(axpy(y, k3, h));
        for i in 0..2 {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    y
}
