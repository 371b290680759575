//! Decoherence functions built from light-particle scattering data.
//!
//! A single collision multiplies the density matrix by `1 − Λ(X−Y) + iΓ(X) − iΓ(Y)`, with
//!
//! ```text
//! Λ(ξ) = ∫ (1 − e^{2ikξ}) |r(k)|² |χ̂(k)|² dk
//! Γ(x) = ∫ e^{2ikx} conj(r(−k)) t(k) conj(χ̂(−k)) χ̂(k) dk
//! ```
//!
//! In the Wigner picture Λ becomes the momentum kernel `γ(p) = (1/2πħ)∫Λ(ξ)e^{−iξp/ħ}dξ`
//! and Γ enters as the potential shift `−(ħ/τ)Γ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::XiGrid;
use crate::spectral::AxisFft;

const NORMALIZATION_TOL: f64 = 1e-6;
const REFLECTION_TOL: f64 = 1e-12;
const IMAG_GAMMA_TOL: f64 = 1e-8;

/// Scattering data sampled on a uniform wavenumber grid.
#[derive(Debug, Clone)]
pub struct TabulatedScattering {
    k_grid: Vec<f64>,
    reflection: Vec<Complex64>,
    transmission: Option<Vec<Complex64>>,
    chi_hat: Vec<Complex64>,
}

impl TabulatedScattering {
    /// `reflection` and `transmission` are the complex amplitudes r(k), t(k); `chi_hat` is the
    /// light-particle wave function in k, normalized so that ∫|χ̂|²dk = 1.
    ///
    /// When `transmission` is given, `k_grid` must be symmetric about 0 because Γ needs
    /// values at −k.
    pub fn new(
        k_grid: Vec<f64>,
        reflection: Vec<Complex64>,
        transmission: Option<Vec<Complex64>>,
        chi_hat: Vec<Complex64>,
    ) -> Result<Self> {
        let n = k_grid.len();
        if n < 3 {
            return Err(invalid("k_grid", "need at least 3 samples"));
        }
        if reflection.len() != n || chi_hat.len() != n {
            return Err(invalid("k_grid", "reflection and chi_hat must have one sample per k"));
        }
        if let Some(t) = &transmission {
            if t.len() != n {
                return Err(invalid("transmission", "must have one sample per k"));
            }
        }
        let dk = (k_grid[n - 1] - k_grid[0]) / (n - 1) as f64;
        if !(dk > 0.0) {
            return Err(invalid("k_grid", "must be increasing"));
        }
        for (j, k) in k_grid.iter().enumerate() {
            if !k.is_finite() || (k - (k_grid[0] + j as f64 * dk)).abs() > 1e-9 * dk {
                return Err(invalid("k_grid", "must be uniform"));
            }
        }
        let finite = |v: &[Complex64]| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite(&reflection) || !finite(&chi_hat) || !transmission.as_deref().is_none_or(finite) {
            return Err(invalid("k_grid", "scattering samples must be finite"));
        }
        if let Some(bad) = reflection.iter().find(|r| r.norm_sqr() > 1.0 + REFLECTION_TOL) {
            return Err(invalid("reflection", format!("|r|^2 = {} exceeds 1", bad.norm_sqr())));
        }
        if transmission.is_some() {
            for j in 0..n / 2 {
                if (k_grid[j] + k_grid[n - 1 - j]).abs() > 1e-9 * dk {
                    return Err(invalid("k_grid", "must be symmetric about 0 when transmission is given"));
                }
            }
        }
        let weights = trapezoid_weights(n, dk);
        let integral: f64 = chi_hat
            .iter()
            .zip(&weights)
            .map(|(c, w)| c.norm_sqr() * w)
            .sum();
        if (integral - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization {
                integral,
                tolerance: NORMALIZATION_TOL,
            });
        }
        Ok(Self {
            k_grid,
            reflection,
            transmission,
            chi_hat,
        })
    }

    /// Samples the given closed forms on `n` uniform points of `[k_min, k_max]`.
    pub fn from_fns(
        (k_min, k_max, n): (f64, f64, usize),
        reflection: impl Fn(f64) -> Complex64,
        transmission: Option<&dyn Fn(f64) -> Complex64>,
        chi_hat: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        if n < 3 {
            return Err(invalid("k_grid", "need at least 3 samples"));
        }
        let dk = (k_max - k_min) / (n - 1) as f64;
        let ks: Vec<f64> = (0..n).map(|j| k_min + j as f64 * dk).collect();
        let r = ks.iter().map(|&k| reflection(k)).collect();
        let t = transmission.map(|f| ks.iter().map(|&k| f(k)).collect());
        let c = ks.iter().map(|&k| chi_hat(k)).collect();
        Self::new(ks, r, t, c)
    }

    pub fn k_grid(&self) -> &[f64] {
        &self.k_grid
    }

    pub fn r_sq(&self) -> Vec<f64> {
        self.reflection.iter().map(|r| r.norm_sqr()).collect()
    }

    pub fn has_transmission(&self) -> bool {
        self.transmission.is_some()
    }

    fn dk(&self) -> f64 {
        let n = self.k_grid.len();
        (self.k_grid[n - 1] - self.k_grid[0]) / (n - 1) as f64
    }

    /// Trapezoid-weighted |r|²|χ̂|² at each k.
    fn decay_density(&self) -> Vec<f64> {
        let weights = trapezoid_weights(self.k_grid.len(), self.dk());
        self.reflection
            .iter()
            .zip(&self.chi_hat)
            .zip(&weights)
            .map(|((r, c), w)| r.norm_sqr() * c.norm_sqr() * w)
            .collect()
    }

    /// Trapezoid-weighted conj(r(−k)) t(k) conj(χ̂(−k)) χ̂(k), or `None` without t.
    fn shift_density(&self) -> Option<Vec<Complex64>> {
        let t = self.transmission.as_ref()?;
        let n = self.k_grid.len();
        let weights = trapezoid_weights(n, self.dk());
        Some(
            (0..n)
                .map(|j| {
                    let m = n - 1 - j;
                    self.reflection[m].conj() * t[j] * self.chi_hat[m].conj() * self.chi_hat[j] * weights[j]
                })
                .collect(),
        )
    }

    fn lambda_at(&self, xi: f64, density: &[f64]) -> Complex64 {
        self.k_grid
            .iter()
            .zip(density)
            .map(|(&k, &d)| (Complex64::new(1.0, 0.0) - Complex64::cis(2.0 * k * xi)) * d)
            .sum()
    }

    fn moments(&self) -> (f64, f64) {
        let density = self.decay_density();
        let l1 = 2.0 * self.k_grid.iter().zip(&density).map(|(k, d)| k * d).sum::<f64>();
        let l2 = 2.0 * self.k_grid.iter().zip(&density).map(|(k, d)| k * k * d).sum::<f64>();
        (l1, l2)
    }

    /// Checks that `k_grid` resolves `e^{2ikξ}` with at least 4 samples per period at `xi_max`
    /// and returns the trapezoid-vs-coarse-grid error estimate of Λ(xi_max).
    fn check_resolution(&self, xi_max: f64) -> Result<()> {
        let dk = self.dk();
        let period = PI / xi_max.max(f64::MIN_POSITIVE);
        if dk <= period / 4.0 {
            return Ok(());
        }
        // Halving the sample count gives a crude Richardson estimate of the error.
        let density = self.decay_density();
        let fine = self.lambda_at(xi_max, &density);
        let coarse: Complex64 = {
            let n = self.k_grid.len();
            let rsq = self.r_sq();
            let idx: Vec<usize> = (0..n).step_by(2).collect();
            let w = trapezoid_weights(idx.len(), 2.0 * dk);
            idx.iter()
                .zip(&w)
                .map(|(&j, &wj)| {
                    (Complex64::new(1.0, 0.0) - Complex64::cis(2.0 * self.k_grid[j] * xi_max))
                        * rsq[j]
                        * self.chi_hat[j].norm_sqr()
                        * wj
                })
                .sum()
        };
        Err(Error::Quadrature {
            reason: format!(
                "k spacing {dk} gives fewer than 4 samples per period of exp(2ik xi) at |xi| = {xi_max}"
            ),
            estimated_error: (fine - coarse).norm() / 3.0,
        })
    }
}

fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    w
}

/// Environment of light particles seen by the heavy particle.
#[derive(Debug, Clone)]
pub enum ScatteringEnvironment {
    Tabulated(TabulatedScattering),
    /// Gaussian light-particle packet of mean wavenumber `k0` and position spread `sigma`,
    /// reflection probability `r0_sq` at `k0`.
    PeakedGaussian { k0: f64, sigma: f64, r0_sq: f64 },
}

impl ScatteringEnvironment {
    pub fn peaked_gaussian(k0: f64, sigma: f64, r0_sq: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(invalid("sigma", format!("must be positive, got {sigma}")));
        }
        if !(0.0..=1.0).contains(&r0_sq) {
            return Err(invalid("r0_sq", format!("must lie in [0, 1], got {r0_sq}")));
        }
        if !k0.is_finite() {
            return Err(invalid("k0", "must be finite"));
        }
        Ok(Self::PeakedGaussian { k0, sigma, r0_sq })
    }
}

/// Closed-form or tabulated source from which Λ and Γ can be re-evaluated off-grid.
#[derive(Debug, Clone)]
pub enum KernelShape {
    Tabulated {
        data: TabulatedScattering,
        decay_density: Vec<f64>,
        shift_density: Option<Vec<Complex64>>,
    },
    PeakedGaussian {
        k0: f64,
        sigma: f64,
        r0_sq: f64,
    },
    /// `1 − Λ(ξ) = e^{−|ξ|/λ} e^{ip₀ξ/ħ}`.
    Lorentzian {
        coherence_length: f64,
        p0: f64,
    },
}

/// Λ, Γ and γ sampled on a correlation grid, with the moment constants Λ₁, Λ₂.
///
/// Immutable once built.
#[derive(Debug, Clone)]
pub struct DecoherenceKernel {
    xi_grid: XiGrid,
    lambda: Vec<Complex64>,
    collisional_potential: Vec<Complex64>,
    momentum_kernel: Vec<Complex64>,
    lambda1: f64,
    lambda2: f64,
    hbar: f64,
    shape: KernelShape,
}

/// Builds the kernel for `env` on `xi_grid`.
pub fn build_kernel(env: &ScatteringEnvironment, xi_grid: XiGrid, hbar: f64) -> Result<DecoherenceKernel> {
    if !(hbar > 0.0) {
        return Err(invalid("hbar", format!("must be positive, got {hbar}")));
    }
    let shape = match env {
        ScatteringEnvironment::Tabulated(data) => {
            data.check_resolution(xi_grid.max_abs())?;
            if !data.has_transmission() {
                log::warn!("no transmission coefficient supplied; collisional potential set to zero");
            }
            KernelShape::Tabulated {
                decay_density: data.decay_density(),
                shift_density: data.shift_density(),
                data: data.clone(),
            }
        }
        &ScatteringEnvironment::PeakedGaussian { k0, sigma, r0_sq } => {
            ScatteringEnvironment::peaked_gaussian(k0, sigma, r0_sq)?;
            KernelShape::PeakedGaussian { k0, sigma, r0_sq }
        }
    };
    DecoherenceKernel::from_shape(shape, xi_grid, hbar)
}

/// Finite-coherence-length kernel `1 − Λ(ξ) = e^{−|ξ|/λ}e^{ip₀ξ/ħ}`; its collision factor is
/// the Lorentzian smoothing of half-width ħ/λ centred at `p − p₀`.
pub fn lorentzian_kernel(coherence_length: f64, p0: f64, hbar: f64, xi_grid: XiGrid) -> Result<DecoherenceKernel> {
    if !(coherence_length > 0.0) {
        return Err(invalid("coherence_length", format!("must be positive, got {coherence_length}")));
    }
    if !p0.is_finite() {
        return Err(invalid("p0", "must be finite"));
    }
    if !(hbar > 0.0) {
        return Err(invalid("hbar", format!("must be positive, got {hbar}")));
    }
    DecoherenceKernel::from_shape(KernelShape::Lorentzian { coherence_length, p0 }, xi_grid, hbar)
}

/// Returns (Λ₁, Λ₂) so that `−γ∗w/τ ≈ (ħ²Λ₂/τ)∂²w/∂p² − (ħΛ₁/τ)∂w/∂p`, after checking
/// `iΛ'(0) = Λ₁` and `Λ''(0) = 2Λ₂` against finite differences of the stored samples.
pub fn quadratic_approx(kernel: &DecoherenceKernel) -> Result<(f64, f64)> {
    if let KernelShape::Lorentzian { .. } = kernel.shape {
        return Err(Error::NotDifferentiable);
    }
    let (d1, d2) = kernel.finite_difference_derivatives();
    let (l1, l2) = (kernel.lambda1, kernel.lambda2);
    let scale = l1.abs() + l2.sqrt();
    if scale == 0.0 {
        if d1.norm() > 1e-12 || d2.norm() > 1e-12 {
            return Err(Error::InconsistentMoments {
                quantity: "Lambda''(0)",
                finite_difference: d2.re,
                stored: 0.0,
            });
        }
        return Ok((0.0, 0.0));
    }
    // iΛ'(0) must be real and equal Λ₁.
    let i_d1 = Complex64::i() * d1;
    if (i_d1.re - l1).abs() > 0.05 * scale || i_d1.im.abs() > 0.05 * scale {
        return Err(Error::InconsistentMoments {
            quantity: "i Lambda'(0)",
            finite_difference: i_d1.re,
            stored: l1,
        });
    }
    if (d2.re - 2.0 * l2).abs() > 0.05 * scale * scale || d2.im.abs() > 0.05 * scale * scale {
        return Err(Error::InconsistentMoments {
            quantity: "Lambda''(0)",
            finite_difference: d2.re,
            stored: 2.0 * l2,
        });
    }
    Ok((l1, l2))
}

impl DecoherenceKernel {
    /// The kernel with Λ ≡ Γ ≡ 0.
    pub fn zero(xi_grid: XiGrid, hbar: f64) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); xi_grid.n];
        Self {
            xi_grid,
            lambda: zero.clone(),
            collisional_potential: zero.clone(),
            momentum_kernel: zero,
            lambda1: 0.0,
            lambda2: 0.0,
            hbar,
            shape: KernelShape::PeakedGaussian {
                k0: 0.0,
                sigma: 1.0,
                r0_sq: 0.0,
            },
        }
    }

    fn from_shape(shape: KernelShape, xi_grid: XiGrid, hbar: f64) -> Result<Self> {
        let mut kernel = Self {
            xi_grid,
            lambda: Vec::new(),
            collisional_potential: Vec::new(),
            momentum_kernel: Vec::new(),
            lambda1: 0.0,
            lambda2: 0.0,
            hbar,
            shape,
        };
        let xs = xi_grid.values();
        kernel.lambda = xs.iter().map(|&xi| kernel.lambda_at(xi)).collect();
        kernel.collisional_potential = xs.iter().map(|&xi| kernel.collisional_potential_at(xi)).collect();
        let (l1, l2) = match &kernel.shape {
            KernelShape::Tabulated { data, .. } => data.moments(),
            &KernelShape::PeakedGaussian { k0, sigma, r0_sq } => {
                (2.0 * k0 * r0_sq, r0_sq * (2.0 * k0 * k0 + 1.0 / (2.0 * sigma * sigma)))
            }
            &KernelShape::Lorentzian { p0, .. } => (p0 / hbar, f64::INFINITY),
        };
        kernel.lambda1 = l1;
        kernel.lambda2 = l2;
        kernel.momentum_kernel = momentum_kernel_fft(&kernel.lambda, xi_grid, hbar);

        let origin = kernel.lambda[xi_grid.origin_index()].norm();
        let scale = kernel.lambda.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        debug_assert!(origin <= 1e-10 * scale, "Lambda(0) = {origin}");
        let max_im = kernel.collisional_potential.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let max_abs = kernel.collisional_potential.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max_im > IMAG_GAMMA_TOL * max_abs.max(1e-300) && max_abs > 0.0 {
            log::warn!("collisional potential has imaginary part up to {max_im:e}; only its real part is used");
        }
        Ok(kernel)
    }

    pub fn xi_grid(&self) -> XiGrid {
        self.xi_grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    /// Λ at the correlation-grid samples.
    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda
    }

    /// Γ at the correlation-grid samples.
    pub fn collisional_potential(&self) -> &[Complex64] {
        &self.collisional_potential
    }

    /// γ at the momentum nodes `p_j = (j − n/2)·Δp` conjugate to the correlation grid.
    pub fn momentum_kernel(&self) -> &[Complex64] {
        &self.momentum_kernel
    }

    pub fn momentum_nodes(&self) -> Vec<f64> {
        (0..self.xi_grid.n).map(|j| self.xi_grid.p(j, self.hbar)).collect()
    }

    /// Λ(ξ) evaluated from the underlying data (off-grid values allowed).
    pub fn lambda_at(&self, xi: f64) -> Complex64 {
        match &self.shape {
            KernelShape::Tabulated { data, decay_density, .. } => data.lambda_at(xi, decay_density),
            &KernelShape::PeakedGaussian { k0, sigma, r0_sq } => {
                let expo = Complex64::new(-xi * xi / (2.0 * sigma * sigma), 2.0 * k0 * xi);
                r0_sq * (Complex64::new(1.0, 0.0) - expo.exp())
            }
            &KernelShape::Lorentzian { coherence_length, p0 } => {
                Complex64::new(1.0, 0.0)
                    - Complex64::from_polar((-xi.abs() / coherence_length).exp(), p0 * xi / self.hbar)
            }
        }
    }

    /// Γ(x); zero unless the environment is tabulated with a transmission coefficient.
    pub fn collisional_potential_at(&self, x: f64) -> Complex64 {
        match &self.shape {
            KernelShape::Tabulated {
                data,
                shift_density: Some(density),
                ..
            } => data
                .k_grid
                .iter()
                .zip(density)
                .map(|(&k, &d)| Complex64::cis(2.0 * k * x) * d)
                .sum(),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// dΓ/dx.
    pub fn collisional_potential_derivative_at(&self, x: f64) -> Complex64 {
        match &self.shape {
            KernelShape::Tabulated {
                data,
                shift_density: Some(density),
                ..
            } => data
                .k_grid
                .iter()
                .zip(density)
                .map(|(&k, &d)| Complex64::new(0.0, 2.0 * k) * Complex64::cis(2.0 * k * x) * d)
                .sum(),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn has_collisional_potential(&self) -> bool {
        matches!(
            self.shape,
            KernelShape::Tabulated {
                shift_density: Some(_),
                ..
            }
        )
    }

    /// Collision factor seen in the correlation representation: `1 − Λ(ξ)`.
    pub fn collision_factor_at(&self, xi: f64) -> Complex64 {
        Complex64::new(1.0, 0.0) - self.lambda_at(xi)
    }

    /// Richardson-extrapolated (Λ'(0), Λ''(0)) from the stored samples.
    fn finite_difference_derivatives(&self) -> (Complex64, Complex64) {
        let o = self.xi_grid.origin_index();
        let h = self.xi_grid.dxi;
        let l = &self.lambda;
        let d1 = |s: usize| (l[o + s] - l[o - s]) / (2.0 * s as f64 * h);
        let d2 = |s: usize| (l[o + s] - 2.0 * l[o] + l[o - s]) / ((s as f64 * h).powi(2));
        ((4.0 * d1(1) - d1(2)) / 3.0, (4.0 * d2(1) - d2(2)) / 3.0)
    }

    /// Re Λ must be non-negative; returns the most negative sample if not.
    pub fn check_no_amplification(&self) -> Result<()> {
        let scale = self.lambda.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        for (j, z) in self.lambda.iter().enumerate() {
            if z.re < -1e-12 * scale.max(1.0) {
                return Err(Error::Amplification {
                    xi: self.xi_grid.xi(j),
                    value: z.re,
                });
            }
        }
        Ok(())
    }
}

/// γ(p_l) = (1/2πħ) Σ_j Λ(ξ_j) e^{−iξ_j p_l/ħ} Δξ via one FFT.
///
/// With ξ_j = (j − n/2)Δξ and p_l = (l − n/2)Δp, the phase splits as
/// `e^{−2πijl/n} (−1)^j (−1)^l (−1)^{n/2}`.
fn momentum_kernel_fft(lambda: &[Complex64], xi_grid: XiGrid, hbar: f64) -> Vec<Complex64> {
    let n = xi_grid.n;
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let mut buf: Vec<Complex64> = lambda.iter().enumerate().map(|(j, z)| z * sign(j)).collect();
    AxisFft::new(n).forward(&mut buf);
    let scale = xi_grid.dxi / (2.0 * PI * hbar) * sign(n / 2);
    buf.iter()
        .enumerate()
        .map(|(l, z)| z * sign(l) * scale)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dxi: f64) -> XiGrid {
        XiGrid::new(n, dxi).unwrap()
    }

    /// Direct O(n²) discrete Wigner transform, independent of the FFT path.
    fn momentum_kernel_direct(k: &DecoherenceKernel) -> Vec<Complex64> {
        let xi = k.xi_grid();
        (0..xi.n)
            .map(|l| {
                let p = xi.p(l, k.hbar());
                (0..xi.n)
                    .map(|j| k.lambda()[j] * Complex64::cis(-xi.xi(j) * p / k.hbar()))
                    .sum::<Complex64>()
                    * xi.dxi
                    / (2.0 * PI * k.hbar())
            })
            .collect()
    }

    fn gaussian_chi(k0: f64, sigma: f64) -> impl Fn(f64) -> Complex64 {
        // |χ̂|² is normal with mean k0 and variance 1/(4σ²).
        move |k: f64| {
            let var = 1.0 / (4.0 * sigma * sigma);
            let dens = (-(k - k0).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
            Complex64::new(dens.sqrt(), 0.0)
        }
    }

    #[test]
    fn peaked_gaussian_trivial_constants() {
        let env = ScatteringEnvironment::peaked_gaussian(0.0, 1.0, 1.0).unwrap();
        let k = build_kernel(&env, grid(64, 0.1), 1.0).unwrap();
        assert_eq!(k.lambda1(), 0.0);
        assert!((k.lambda2() - 0.5).abs() < 1e-15);
        assert!(k.lambda()[32].norm() < 1e-15);
    }

    #[test]
    fn peaked_gaussian_drift_constants_match_quadrature() {
        // Oracle: trapezoid quadrature of 2∫k|r|²|χ̂|², 2∫k²|r|²|χ̂|² with |r|² ≡ 0.5.
        let (k0, sigma, r0_sq) = (2.0, 1.0, 0.5);
        let chi = gaussian_chi(k0, sigma);
        let n = 20001;
        let (a, b) = (k0 - 10.0, k0 + 10.0);
        let h = (b - a) / (n - 1) as f64;
        let (mut l1, mut l2) = (0.0, 0.0);
        for j in 0..n {
            let kk = a + j as f64 * h;
            let w = if j == 0 || j == n - 1 { 0.5 * h } else { h };
            let d = r0_sq * chi(kk).norm_sqr() * w;
            l1 += 2.0 * kk * d;
            l2 += 2.0 * kk * kk * d;
        }
        assert!((l1 - 2.0).abs() < 1e-9);
        // 2·0.5·(k0² + 1/(4σ²)) = 4.25
        assert!((l2 - 4.25).abs() < 1e-9);

        let env = ScatteringEnvironment::peaked_gaussian(k0, sigma, r0_sq).unwrap();
        let k = build_kernel(&env, grid(256, 0.02), 1.0).unwrap();
        assert!((k.lambda1() - l1).abs() < 1e-9);
        assert!((k.lambda2() - l2).abs() < 1e-9);
    }

    #[test]
    fn zero_reflection_gives_zero_kernel() {
        let t = |_k: f64| Complex64::new(1.0, 0.0);
        let data = TabulatedScattering::from_fns(
            (-6.0, 6.0, 1201),
            |_| Complex64::new(0.0, 0.0),
            Some(&t),
            gaussian_chi(0.0, 1.0),
        )
        .unwrap();
        let k = build_kernel(&ScatteringEnvironment::Tabulated(data), grid(64, 0.1), 1.0).unwrap();
        assert!(k.lambda().iter().all(|z| z.norm() == 0.0));
        assert!(k.collisional_potential().iter().all(|z| z.norm() == 0.0));
        assert!(k.momentum_kernel().iter().all(|z| z.norm() == 0.0));
        assert_eq!(quadratic_approx(&k).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn tabulated_validation_errors() {
        let chi = gaussian_chi(0.0, 1.0);
        let unnormalized = |k: f64| chi(k) * 1.1;
        let err = TabulatedScattering::from_fns((-6.0, 6.0, 601), |_| Complex64::new(0.5, 0.0), None, unnormalized)
            .unwrap_err();
        assert!(matches!(err, Error::Normalization { .. }));
        let err = TabulatedScattering::from_fns((-6.0, 6.0, 601), |_| Complex64::new(1.5, 0.0), None, &chi)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "reflection", .. }));
        let t = |_k: f64| Complex64::new(0.5, 0.0);
        let err = TabulatedScattering::from_fns((-5.0, 7.0, 601), |_| Complex64::new(0.5, 0.0), Some(&t), &chi)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "k_grid", .. }));
    }

    #[test]
    fn under_resolved_k_grid_reports_quadrature_error() {
        let data = TabulatedScattering::from_fns(
            (-6.0, 6.0, 121),
            |_| Complex64::new(0.7, 0.0),
            None,
            gaussian_chi(0.0, 1.0),
        )
        .unwrap();
        // dk = 0.1; need dk <= π/(4·ξ_max) → ξ_max <= 7.85. Here ξ_max = 12.8.
        let err = build_kernel(&ScatteringEnvironment::Tabulated(data), grid(128, 0.2), 1.0).unwrap_err();
        match err {
            Error::Quadrature { estimated_error, .. } => assert!(estimated_error.is_finite()),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn fft_momentum_kernel_matches_direct_sum() {
        let env = ScatteringEnvironment::peaked_gaussian(0.7, 1.3, 0.8).unwrap();
        let k = build_kernel(&env, grid(128, 0.15), 0.8).unwrap();
        let direct = momentum_kernel_direct(&k);
        for (a, b) in k.momentum_kernel().iter().zip(&direct) {
            assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn momentum_kernel_moments() {
        // ∫γ = Λ(0) = 0, ∫pγ = −iħΛ'(0) = −ħΛ₁, ∫p²γ = −ħ²Λ''(0) = −2ħ²Λ₂.
        let hbar = 0.7;
        let env = ScatteringEnvironment::peaked_gaussian(0.4, 2.0, 0.9).unwrap();
        let k = build_kernel(&env, grid(512, 0.25), hbar).unwrap();
        let dp = k.xi_grid().dp(hbar);
        let ps = k.momentum_nodes();
        let m0: Complex64 = k.momentum_kernel().iter().map(|g| g * dp).sum();
        let m1: Complex64 = k.momentum_kernel().iter().zip(&ps).map(|(g, p)| g * p * dp).sum();
        let m2: Complex64 = k.momentum_kernel().iter().zip(&ps).map(|(g, p)| g * p * p * dp).sum();
        assert!(m0.norm() < 1e-12);
        let want1 = -hbar * k.lambda1();
        let want2 = -2.0 * hbar * hbar * k.lambda2();
        assert!((m1.re - want1).abs() < 1e-6 * want1.abs(), "{m1} vs {want1}");
        assert!((m2.re - want2).abs() < 1e-6 * want2.abs(), "{m2} vs {want2}");
        assert!(m1.im.abs() < 1e-9 && m2.im.abs() < 1e-9);
    }

    #[test]
    fn quadratic_approx_cases() {
        let env = ScatteringEnvironment::peaked_gaussian(0.0, 2.0, 1.0).unwrap();
        let k = build_kernel(&env, grid(128, 0.05), 1.0).unwrap();
        let (l1, l2) = quadratic_approx(&k).unwrap();
        assert_eq!(l1, 0.0);
        assert!((l2 - 0.125).abs() < 1e-15);
        // Cross-check Λ''(0)/2 by a plain central difference.
        let h = 1e-3;
        let fd = (k.lambda_at(h) - 2.0 * k.lambda_at(0.0) + k.lambda_at(-h)).re / (h * h) / 2.0;
        assert!((fd - 0.125).abs() < 1e-6);

        let env = ScatteringEnvironment::peaked_gaussian(1.5, 1.0, 0.6).unwrap();
        let k = build_kernel(&env, grid(128, 0.02), 1.0).unwrap();
        assert!(quadratic_approx(&k).is_ok());

        let lor = lorentzian_kernel(1.0, 0.0, 1.0, grid(64, 0.1)).unwrap();
        assert!(matches!(quadratic_approx(&lor), Err(Error::NotDifferentiable)));
    }

    #[test]
    fn even_tabulated_data_has_no_drift() {
        let data = TabulatedScattering::from_fns(
            (-8.0, 8.0, 3201),
            |k| Complex64::new((0.5 / (1.0 + k * k)).sqrt(), 0.0),
            None,
            gaussian_chi(0.0, 0.8),
        )
        .unwrap();
        let k = build_kernel(&ScatteringEnvironment::Tabulated(data), grid(128, 0.05), 1.0).unwrap();
        let (l1, l2) = quadratic_approx(&k).unwrap();
        assert!(l1.abs() < 1e-14);
        assert!(l2 > 0.0);
    }

    #[test]
    fn tabulated_converges_to_peaked_gaussian() {
        // |r(k)|² = 0.5 exp(−(k−k0)²/(2s²)): slowly varying when s ≫ 1/σ.
        let (k0, sigma) = (1.0, 1.0);
        let xi = grid(64, 0.1);
        let closed = build_kernel(&ScatteringEnvironment::peaked_gaussian(k0, sigma, 0.5).unwrap(), xi, 1.0).unwrap();
        let mut errors = Vec::new();
        for s in [2.0, 4.0, 8.0] {
            let r = move |k: f64| Complex64::new((0.5 * (-(k - k0).powi(2) / (2.0 * s * s)).exp()).sqrt(), 0.0);
            let data = TabulatedScattering::from_fns((k0 - 8.0, k0 + 8.0, 2001), r, None, gaussian_chi(k0, sigma)).unwrap();
            let tab = build_kernel(&ScatteringEnvironment::Tabulated(data), xi, 1.0).unwrap();
            let err = tab
                .lambda()
                .iter()
                .zip(closed.lambda())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            errors.push(err);
        }
        assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    }

    #[test]
    fn lambda_vanishes_at_origin_and_decays() {
        let lor = lorentzian_kernel(2.0, 0.5, 1.0, grid(64, 0.1)).unwrap();
        assert!(lor.lambda()[32].norm() < 1e-15);
        assert!(lor.lambda().iter().all(|z| z.re >= 0.0));
        assert!(lor.check_no_amplification().is_ok());
        assert!((lor.lambda1() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn collisional_potential_from_transmission() {
        // Real constant r and t with symmetric χ̂: Γ(x) = r t ∫ e^{2ikx}|χ̂|² dk, a real gaussian.
        let sigma = 1.0;
        let t = |_k: f64| Complex64::new(0.6, 0.0);
        let data = TabulatedScattering::from_fns(
            (-6.0, 6.0, 1201),
            |_| Complex64::new(0.8, 0.0),
            Some(&t),
            gaussian_chi(0.0, sigma),
        )
        .unwrap();
        let k = build_kernel(&ScatteringEnvironment::Tabulated(data), grid(64, 0.1), 1.0).unwrap();
        for x in [0.0, 0.3, 1.1] {
            // characteristic function of N(0, 1/(4σ²)) at 2x: exp(−x²/(2σ²))
            let want = 0.48 * (-x * x / (2.0 * sigma * sigma)).exp();
            let got = k.collisional_potential_at(x);
            assert!((got.re - want).abs() < 1e-9 && got.im.abs() < 1e-12);
            let h = 1e-5;
            let fd = (k.collisional_potential_at(x + h) - k.collisional_potential_at(x - h)) / (2.0 * h);
            assert!((fd - k.collisional_potential_derivative_at(x)).norm() < 1e-7);
        }
    }
}
