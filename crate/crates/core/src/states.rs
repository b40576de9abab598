//! Quantum states carried through the conversion channel.
//!
//! For a single-mode input the converted signal is a†_s(0) = C₀ a†_p(0) + vacuum
//! contributions, which acts on the probe state as a pure-loss channel of
//! transmissivity |C₀|² followed by the phase of C₀*. [`apply_loss_channel`]
//! evaluates the normally ordered series for the output matrix elements;
//! [`beam_splitter_oracle`] rebuilds the same channel from a two-mode unitary
//! and a partial trace, and is kept as an independent check.

use nalgebra::{DMatrix, DVector};

use crate::error::{QfcError, Result};
use crate::params::SystemParams;
use crate::transfer::SingleModeTransfer;
use crate::C64;

/// Default Fock truncation.
pub const DEFAULT_DIM: usize = 20;
/// Population allowed outside the trusted part of a truncated basis.
pub const TRUNCATION_GUARD: f64 = 1e-10;
/// Population tolerated in the top two levels of a channel input.
pub const TOP_LEVEL_GUARD: f64 = 1e-8;
/// Vacuum quadrature variance with X = (a + a†)/2.
pub const VACUUM_VARIANCE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputState {
    Fock(usize),
    Coherent(C64),
    /// Squeezed vacuum; θ = 0 stretches X and squeezes Y.
    Squeezed {
        r: f64,
        theta: f64,
    },
}

impl InputState {
    /// Coherent state with real amplitude and mean photon number `nbar`.
    pub fn coherent_with_mean(nbar: f64) -> Self {
        InputState::Coherent(C64::from(nbar.sqrt()))
    }

    /// Squeezed vacuum whose anti-squeezed/vacuum variance ratio is `db` decibels.
    pub fn squeezed_db(db: f64) -> Self {
        InputState::Squeezed {
            r: squeeze_parameter_from_db(db),
            theta: 0.0,
        }
    }
}

/// r such that e^{2r} = 10^{db/10}.
pub fn squeeze_parameter_from_db(db: f64) -> f64 {
    db * std::f64::consts::LN_10 / 20.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_entries(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(QfcError::InvalidArgument(
                "density matrix must be square and non-empty".into(),
            ));
        }
        Ok(Self { entries })
    }

    pub fn pure(psi: &DVector<C64>) -> Self {
        Self {
            entries: psi * psi.adjoint(),
        }
    }

    pub fn vacuum(dim: usize) -> Self {
        Self::fock(0, dim).expect("vacuum fits any non-empty basis")
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(QfcError::TruncationOverflow {
                dim,
                population: 1.0,
            });
        }
        let mut entries = DMatrix::zeros(dim, dim);
        entries[(n, n)] = C64::from(1.0);
        Ok(Self { entries })
    }

    /// Truncated coherent state |β⟩⟨β| (not renormalized).
    pub fn coherent(beta: C64, dim: usize) -> Result<Self> {
        Ok(Self::pure(&coherent_vector(beta, dim)?))
    }

    pub fn for_input(input: &InputState, dim: usize) -> Result<Self> {
        match *input {
            InputState::Fock(n) => Self::fock(n, dim),
            InputState::Coherent(beta) => Self::coherent(beta, dim),
            InputState::Squeezed { .. } => Err(QfcError::UnsupportedState),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn population(&self, n: usize) -> f64 {
        if n < self.dim() {
            self.entries[(n, n)].re
        } else {
            0.0
        }
    }

    /// Hermiticity, unit trace and positivity at the stated tolerances.
    pub fn check(&self) -> Result<()> {
        let herm = (&self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(QfcError::InvalidArgument(format!(
                "density matrix not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - C64::from(1.0)).norm() > TRUNCATION_GUARD {
            return Err(QfcError::InvalidArgument(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let min = self.min_eigenvalue();
        if min < -TRUNCATION_GUARD {
            return Err(QfcError::InvalidArgument(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.entries + self.entries.adjoint()) * C64::from(0.5);
        h.symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Copy embedded in a larger basis (zero padding).
    pub fn embedded(&self, dim: usize) -> Self {
        assert!(dim >= self.dim());
        let mut entries = DMatrix::zeros(dim, dim);
        entries
            .view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.entries);
        Self { entries }
    }

    /// e^{iφn} ρ e^{−iφn}: ρ_mn picks up e^{iφ(m−n)}.
    pub fn phase_rotated(&self, phi: f64) -> Self {
        let d = self.dim();
        Self {
            entries: DMatrix::from_fn(d, d, |m, n| {
                self.entries[(m, n)] * C64::from_polar(1.0, phi * (m as f64 - n as f64))
            }),
        }
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        let d = self.dim().max(other.dim());
        (&self.embedded(d).entries - &other.embedded(d).entries).norm()
    }

    /// ½ Σ |λ_i(ρ − σ)|.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let d = self.dim().max(other.dim());
        let diff = &self.embedded(d).entries - &other.embedded(d).entries;
        let h = (&diff + diff.adjoint()) * C64::from(0.5);
        0.5 * h
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|l| l.abs())
            .sum::<f64>()
    }

    /// Weight on the two highest Fock levels.
    fn top_population(&self) -> f64 {
        let d = self.dim();
        (d.saturating_sub(2)..d)
            .map(|n| self.entries[(n, n)].re.abs())
            .sum()
    }
}

fn sqrt_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut f = 1.0f64;
    out.push(1.0);
    for k in 1..=n {
        f *= k as f64;
        out.push(f.sqrt());
    }
    out
}

/// Σ_{n ≥ dim} e^{−μ} μⁿ/n!.
pub fn poisson_tail(mean: f64, dim: usize) -> f64 {
    if mean == 0.0 {
        return if dim == 0 { 1.0 } else { 0.0 };
    }
    // log pmf at n = dim, then walk upward
    let ln_first = -mean + dim as f64 * mean.ln() - ln_factorial(dim);
    let mut term = ln_first.exp();
    let mut sum = 0.0;
    let mut n = dim;
    while term > 0.0 && (term > 1e-18 * sum || (n as f64) < mean) {
        sum += term;
        n += 1;
        term *= mean / n as f64;
        if n > dim + 10_000 {
            break;
        }
    }
    sum
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Smallest basis size whose coherent-state tail for mean photon number `nbar` is below `tol`.
pub fn coherent_dimension(nbar: f64, tol: f64) -> usize {
    let mut d = 2;
    while poisson_tail(nbar, d) > tol {
        d += 1;
    }
    d
}

/// Fock amplitudes e^{−|β|²/2} βⁿ/√n! for n < dim.
pub fn coherent_vector(beta: C64, dim: usize) -> Result<DVector<C64>> {
    let tail = poisson_tail(beta.norm_sqr(), dim);
    if tail > TRUNCATION_GUARD {
        return Err(QfcError::TruncationOverflow {
            dim,
            population: tail,
        });
    }
    let mut psi = DVector::zeros(dim);
    let mut amp = C64::from((-0.5 * beta.norm_sqr()).exp());
    for n in 0..dim {
        psi[n] = amp;
        amp *= beta / ((n + 1) as f64).sqrt();
    }
    Ok(psi)
}

/// C₀ at the single-mode frequency.
pub fn channel_amplitude(params: &SystemParams) -> Result<C64> {
    Ok(SingleModeTransfer::new(params)?.c0)
}

/// Output matrix elements ρ^S_mn = Σ_l 𝒳_mnl Tr[(C₀a†)^{l+n} (C₀*a)^{l+m} ρ],
/// 𝒳_mnl = (−1)^l / (l! √(m! n!)), evaluated in the input's truncated basis.
pub fn apply_loss_channel(rho_in: &DensityMatrix, c0: C64) -> Result<DensityMatrix> {
    if !(c0.norm() <= 1.0 + 1e-12) {
        return Err(QfcError::InvalidArgument(format!(
            "channel amplitude |C0| = {} exceeds 1",
            c0.norm()
        )));
    }
    let d = rho_in.dim();
    let top = rho_in.top_population();
    if d < 3 || top > TOP_LEVEL_GUARD {
        return Err(QfcError::TruncationOverflow {
            dim: d,
            population: top,
        });
    }
    let sf = sqrt_factorials(2 * d);
    let rho = &rho_in.entries;

    // Tr[(a†)^p a^q ρ] = Σ_i ρ_{i,j} √(i!/(i−q)!) √(j!/(i−q)!), j = i − q + p.
    let normal_moment = |p: usize, q: usize| -> C64 {
        let mut acc = C64::from(0.0);
        for i in q..d {
            let j = i - q + p;
            if j >= d {
                break;
            }
            let base = sf[i - q];
            acc += rho[(i, j)] * (sf[i] / base) * (sf[j] / base);
        }
        acc
    };

    // Moments vanish once p or q reaches d, which bounds the series at l = d.
    let c0c = c0.conj();
    let mut inv_factorial = vec![1.0f64; d + 1];
    for l in 1..=d {
        inv_factorial[l] = inv_factorial[l - 1] / l as f64;
    }
    let out = DMatrix::from_fn(d, d, |m, n| {
        let mut acc = C64::from(0.0);
        for (l, inv_fact) in inv_factorial.iter().enumerate() {
            let (p, q) = (l + n, l + m);
            if p >= d || q >= d {
                break;
            }
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let coeff = sign * inv_fact / (sf[m] * sf[n]);
            acc += normal_moment(p, q) * c0.powu(p as u32) * c0c.powu(q as u32) * coeff;
        }
        acc
    });
    Ok(DensityMatrix { entries: out })
}

/// Pure-loss channel built from first principles: the input mode meets vacuum on
/// a beam splitter U = exp[θ(a†b − ab†)] with cos²θ = `transmissivity`, and the
/// second mode is traced out. The unitary is assembled block by block over
/// total photon number from the ladder relations a|n⟩ = √n|n−1⟩, a†|n⟩ = √(n+1)|n+1⟩.
pub fn beam_splitter_oracle(
    rho_in: &DensityMatrix,
    transmissivity: f64,
    dim: usize,
) -> Result<DensityMatrix> {
    BeamSplitter::new(transmissivity, dim)?.apply(rho_in)
}

/// Two-mode beam splitter with the ancilla in vacuum, kept as the columns of U
/// on |n, 0⟩ so it can be reused across inputs.
#[derive(Debug, Clone)]
pub struct BeamSplitter {
    dim: usize,
    /// amplitudes[n][j] = ⟨j, n − j| U |n, 0⟩
    amplitudes: Vec<Vec<f64>>,
}

impl BeamSplitter {
    pub fn new(transmissivity: f64, dim: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(QfcError::InvalidArgument(format!(
                "transmissivity {transmissivity} outside [0, 1]"
            )));
        }
        let theta = transmissivity.sqrt().acos();
        // Columns of U on |n, 0⟩, n < dim; each lives in the sector N = n.
        let mut amplitudes = Vec::with_capacity(dim);
        for sector in 0..dim {
            // basis |j, sector − j⟩, j = 0..=sector
            let size = sector + 1;
            let mut gen = DMatrix::<f64>::zeros(size, size);
            for j in 0..size {
                let k = sector - j;
                // a†b |j,k⟩ = √(j+1)√k |j+1,k−1⟩
                if k > 0 && j + 1 < dim {
                    gen[(j + 1, j)] += theta * ((j + 1) as f64).sqrt() * (k as f64).sqrt();
                }
                // −a b† |j,k⟩ = −√j √(k+1) |j−1,k+1⟩
                if j > 0 && k + 1 < dim {
                    gen[(j - 1, j)] -= theta * (j as f64).sqrt() * ((k + 1) as f64).sqrt();
                }
            }
            let block = gen.exp();
            // input column |sector, 0⟩ has local index j = sector
            amplitudes.push(block.column(sector).iter().copied().collect());
        }
        Ok(Self { dim, amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// V ρ V† with the second mode traced out.
    pub fn apply(&self, rho_in: &DensityMatrix) -> Result<DensityMatrix> {
        let dim = self.dim;
        if dim < rho_in.dim() {
            return Err(QfcError::DimensionTooSmall {
                dim,
                required: rho_in.dim(),
            });
        }
        let rho = rho_in.embedded(dim);
        let u = &self.amplitudes;
        // Tracing out |k⟩ of the ancilla pairs input levels j + k and j′ + k.
        let out = DMatrix::from_fn(dim, dim, |j, jp| {
            let mut acc = C64::from(0.0);
            for k in 0..dim - j.max(jp) {
                let (n, np) = (j + k, jp + k);
                acc += rho.entries[(n, np)] * (u[n][j] * u[np][jp]);
            }
            acc
        });
        Ok(DensityMatrix { entries: out })
    }
}

/// Output state for a coherent input: the coherent state |C₀*β⟩.
pub fn density_matrix_coherent(beta: C64, c0: C64, dim: usize) -> Result<DensityMatrix> {
    let gamma = c0.conj() * beta;
    let tail = poisson_tail(gamma.norm_sqr(), dim);
    if tail > TRUNCATION_GUARD {
        return Err(QfcError::TruncationOverflow {
            dim,
            population: tail,
        });
    }
    let sf = sqrt_factorials(dim);
    let pref = (-gamma.norm_sqr()).exp();
    let gc = gamma.conj();
    Ok(DensityMatrix {
        entries: DMatrix::from_fn(dim, dim, |m, n| {
            gamma.powu(m as u32) * gc.powu(n as u32) * (pref / (sf[m] * sf[n]))
        }),
    })
}

/// √⟨ψ|ρ|ψ⟩ for a pure input |ψ⟩.
pub fn fidelity(input: &InputState, rho_out: &DensityMatrix) -> Result<f64> {
    let overlap = match *input {
        InputState::Fock(n) => {
            if n >= rho_out.dim() {
                return Err(QfcError::TruncationOverflow {
                    dim: rho_out.dim(),
                    population: 1.0,
                });
            }
            rho_out.entries[(n, n)].re
        }
        InputState::Coherent(beta) => {
            let psi = coherent_vector(beta, rho_out.dim())?;
            (psi.adjoint() * &rho_out.entries * &psi)[(0, 0)].re
        }
        InputState::Squeezed { .. } => return Err(QfcError::UnsupportedState),
    };
    Ok(overlap.clamp(0.0, 1.0).sqrt())
}

/// |⟨β|γ⟩| = exp(−|β − γ|²/2) with γ = C₀*β.
pub fn coherent_fidelity(beta: C64, c0: C64) -> f64 {
    (-(beta - c0.conj() * beta).norm_sqr() / 2.0).exp()
}

/// Squared quadrature variances (ΔX², ΔY²) for X = (a + a†)/2, Y = (a − a†)/2i.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureStats {
    pub var_x: f64,
    pub var_y: f64,
}

impl QuadratureStats {
    pub fn product(&self) -> f64 {
        self.var_x * self.var_y
    }

    /// Both quadratures through a channel of power coefficient |C₀|² (or |A₀|²).
    pub fn through_channel(&self, power_coeff: f64) -> Self {
        Self {
            var_x: output_variance(self.var_x, power_coeff),
            var_y: output_variance(self.var_y, power_coeff),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            var_x: self.var_x * s,
            var_y: self.var_y * s,
        }
    }
}

pub fn input_variances(input: &InputState) -> QuadratureStats {
    match *input {
        InputState::Coherent(_) => QuadratureStats {
            var_x: VACUUM_VARIANCE,
            var_y: VACUUM_VARIANCE,
        },
        InputState::Fock(n) => {
            let v = (2 * n + 1) as f64 / 4.0;
            QuadratureStats { var_x: v, var_y: v }
        }
        InputState::Squeezed { r, theta } => {
            let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh() * theta.cos());
            QuadratureStats {
                var_x: (c + s) / 4.0,
                var_y: (c - s) / 4.0,
            }
        }
    }
}

/// Inherited part plus reservoir vacuum: κ·ΔX²_in + (1 − κ)/4.
pub fn output_variance(var_in: f64, power_coeff: f64) -> f64 {
    assert!(var_in >= 0.0, "variance must be non-negative");
    assert!(
        (0.0..=1.0).contains(&power_coeff),
        "power coefficient must lie in [0, 1]"
    );
    power_coeff * var_in + (1.0 - power_coeff) * VACUUM_VARIANCE
}
