//! Generating functions and truncated wave packets.
//!
//! Frequency profiles: `φ̂ = A·bump(ξ/b)`, `χ = B·bump((η-d)/ε)` with
//! `∫χ = 1` and `A` fixed by the reproducing normalization
//! `∬ φ̂(t̃-η̃) χ(η̃) dη̃ dt̃/t̃ = 1`. With `h = φ̂ * χ` this reads
//! `∫ h(τ) dτ/τ = 1`, and `β(ξ) = ∫ γ(τ/ξ) h(τ) dτ/τ` for `ξ > 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::Spectral;
use crate::geometry::GeometryParams;
use crate::par;

/// `exp(-1/(1-u²))` on `(-1, 1)`, zero elsewhere.
pub fn bump(u: f64) -> f64 {
    let v = 1.0 - u * u;
    if v <= 0.0 {
        0.0
    } else {
        (-1.0 / v).exp()
    }
}

/// Smooth monotone step: 0 for `u <= 0`, 1 for `u >= 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    /// Quadrature nodes across each compact support.
    pub n_quad: usize,
    /// Tabulation points for β.
    pub n_beta: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self { n_quad: 256, n_beta: 4096 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone)]
pub struct Generators {
    pub geom: GeometryParams,
    pub resolution: Resolution,
    /// Amplitude `A` of `φ̂`.
    pub phi_amp: f64,
    /// Amplitude `B` of `χ`.
    pub chi_amp: f64,
    beta_lo: f64,
    beta_hi: f64,
    beta_dlog: f64,
    beta_vals: Vec<f64>,
    beta_slopes: Vec<f64>,
}

/// `γ̃`: 1 on `[0, 1/(1+ε)]`, 0 from `1+ε` on.
fn gamma_tilde(t: f64, eps: f64) -> f64 {
    let lo = 1.0 / (1.0 + eps);
    let hi = 1.0 + eps;
    if t <= lo {
        1.0
    } else if t >= hi {
        0.0
    } else {
        smooth_step((hi - t) / (hi - lo))
    }
}

fn gamma_eps(t: f64, eps: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let a = gamma_tilde(t, eps);
    let b = gamma_tilde(1.0 / t, eps);
    a / (a + b)
}

/// Fritsch–Carlson slopes for monotone cubic Hermite interpolation on a uniform grid.
fn pchip_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        m[i] = if a * b <= 0.0 { 0.0 } else { 2.0 * a * b / (a + b) };
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let al = m[i] / delta[i];
        let be = m[i + 1] / delta[i];
        let s = al * al + be * be;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[i] = tau * al * delta[i];
            m[i + 1] = tau * be * delta[i];
        }
    }
    m
}

impl Generators {
    pub fn build(geom: &GeometryParams, resolution: Resolution) -> Result<Self> {
        geom.validate()?;
        if resolution.n_quad < 16 {
            return Err(Error::Construction(format!(
                "phi-hat and chi need at least 16 samples across their supports, got {}",
                resolution.n_quad
            )));
        }
        if resolution.n_beta < 16 {
            return Err(Error::Construction(format!("beta table needs at least 16 points, got {}", resolution.n_beta)));
        }
        let g = *geom;
        let nq = resolution.n_quad;
        // χ normalization: ∫χ = 1.
        let du = 2.0 * g.eps / nq as f64;
        let chi_raw: f64 = (0..nq).map(|i| bump(-1.0 + (i as f64 + 0.5) * 2.0 / nq as f64) * du).sum();
        let chi_amp = 1.0 / chi_raw;
        let mut gen = Self {
            geom: g,
            resolution,
            phi_amp: 1.0,
            chi_amp,
            beta_lo: (g.d - g.eps - g.b) / (1.0 + g.eps),
            beta_hi: (g.d + g.eps + g.b) * (1.0 + g.eps),
            beta_dlog: 0.0,
            beta_vals: Vec::new(),
            beta_slopes: Vec::new(),
        };
        let (taus, wts) = gen.tau_nodes();
        let h_raw: Vec<f64> = taus.iter().map(|&tau| gen.h(tau)).collect();
        let norm: f64 = h_raw.iter().zip(&wts).map(|(h, w)| h * w).sum();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Construction("normalization integral of phi-hat * chi vanished".into()));
        }
        gen.phi_amp = 1.0 / norm;
        let h: Vec<f64> = h_raw.iter().map(|v| v / norm).collect();

        let nb = resolution.n_beta;
        let dlog = (gen.beta_hi / gen.beta_lo).ln() / (nb - 1) as f64;
        gen.beta_dlog = dlog;
        let eps = g.eps;
        let args: Vec<f64> = (0..nb).map(|m| gen.beta_lo * (m as f64 * dlog).exp()).collect();
        let mut vals = par::map_slice(&args, |&xi| {
            taus.iter().zip(&wts).zip(&h).map(|((&tau, &w), &hv)| w * hv * gamma_eps(tau / xi, eps)).sum::<f64>()
        });
        vals[0] = 0.0;
        vals[nb - 1] = 1.0;
        // Enforce monotonicity against rounding noise.
        for m in 1..nb {
            if vals[m] < vals[m - 1] {
                vals[m] = vals[m - 1];
            }
        }
        gen.beta_slopes = pchip_slopes(&vals, dlog);
        gen.beta_vals = vals;
        let check = gen.beta_vals.windows(2).all(|w| w[1] >= w[0]);
        if !check {
            return Err(Error::Construction("beta table is not monotone".into()));
        }
        Ok(gen)
    }

    pub fn default_geometry() -> Result<Self> {
        Self::build(&GeometryParams::default(), Resolution::default())
    }

    /// Log-spaced nodes covering `supp h = (d-ε-b, d+ε+b)` with `dτ/τ` weights.
    fn tau_nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &self.geom;
        let lo = g.d - g.eps - g.b;
        let hi = g.d + g.eps + g.b;
        let n = 2 * self.resolution.n_quad;
        let dl = (hi / lo).ln() / n as f64;
        let taus: Vec<f64> = (0..n).map(|i| lo * ((i as f64 + 0.5) * dl).exp()).collect();
        (taus, vec![dl; n])
    }

    pub fn phi_hat(&self, xi: f64) -> f64 {
        self.phi_amp * bump(xi / self.geom.b)
    }

    pub fn chi(&self, eta: f64) -> f64 {
        self.chi_amp * bump((eta - self.geom.d) / self.geom.eps)
    }

    pub fn chi_active(&self, eta: f64) -> bool {
        (eta - self.geom.d).abs() < self.geom.eps
    }

    /// `ψ̂`: 1 on `B_b`, supported in `B_{(1+ε)b}`.
    pub fn psi_hat(&self, xi: f64) -> f64 {
        let b = self.geom.b;
        let e = self.geom.eps;
        smooth_step(((1.0 + e) * b - xi.abs()) / (e * b))
    }

    pub fn gamma(&self, t: f64) -> f64 {
        gamma_eps(t, self.geom.eps)
    }

    /// `h(τ) = ∫ φ̂(τ-u) χ(u) du` by midpoint quadrature over `supp χ`.
    pub fn h(&self, tau: f64) -> f64 {
        let g = &self.geom;
        let nq = self.resolution.n_quad;
        let du = 2.0 * g.eps / nq as f64;
        (0..nq)
            .map(|i| {
                let u = g.d - g.eps + (i as f64 + 0.5) * du;
                self.phi_hat(tau - u) * self.chi(u) * du
            })
            .sum()
    }

    /// Support bounds of β: zero up to the first, one from the second.
    pub fn beta_thresholds(&self) -> (f64, f64) {
        (self.beta_lo, self.beta_hi)
    }

    pub fn beta(&self, xi: f64) -> f64 {
        if xi <= self.beta_lo {
            return 0.0;
        }
        if xi >= self.beta_hi {
            return 1.0;
        }
        let x = (xi / self.beta_lo).ln() / self.beta_dlog;
        let i = (x.floor() as usize).min(self.beta_vals.len() - 2);
        let s = x - i as f64;
        let h = self.beta_dlog;
        let (y0, y1) = (self.beta_vals[i], self.beta_vals[i + 1]);
        let (m0, m1) = (self.beta_slopes[i] * h, self.beta_slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1;
        v.clamp(0.0, 1.0)
    }

    /// β by direct quadrature (no table), used to check the tabulation.
    pub fn beta_direct(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return 0.0;
        }
        let (taus, wts) = self.tau_nodes();
        taus.iter().zip(&wts).map(|(&tau, &w)| w * self.h(tau) * self.gamma(tau / xi)).sum()
    }

    /// `∬ φ̂(t̃-η̃) χ(η̃) dη̃ dt̃/t̃` on an independent grid of `n` nodes per axis.
    pub fn normalization_integral(&self, n: usize) -> f64 {
        let g = &self.geom;
        let (lo, hi) = (g.d - g.eps - g.b, g.d + g.eps + g.b);
        let dl = (hi / lo).ln() / n as f64;
        let de = 2.0 * g.eps / n as f64;
        let mut acc = 0.0;
        for a in 0..n {
            let tt = lo * ((a as f64 + 0.5) * dl).exp();
            for c in 0..n {
                let e = g.d - g.eps + (c as f64 + 0.5) * de;
                acc += self.phi_hat(tt - e) * self.chi(e) * de * dl;
            }
        }
        acc
    }

    /// Whether the packet's χ factor is nonzero.
    pub fn packet_active(&self, eta: f64, t: f64, c_minus: f64, c_plus: f64, side: Side) -> bool {
        match side {
            Side::Left => c_minus.is_finite() && self.chi_active(t * (eta - c_minus)),
            Side::Right => c_plus.is_finite() && self.chi_active(t * (c_plus - eta)),
        }
    }

    /// `Ψ̂_{0,η,t}^{c⁻,c⁺,side}(ξ)`. Infinite endpoints are sentinels: the
    /// corresponding β factor is exactly one, the χ factor exactly zero.
    pub fn packet_hat(&self, xi: f64, eta: f64, t: f64, c_minus: f64, c_plus: f64, side: Side) -> f64 {
        match side {
            Side::Left => {
                if !c_minus.is_finite() {
                    return 0.0;
                }
                let c = self.chi(t * (eta - c_minus));
                if c == 0.0 {
                    return 0.0;
                }
                let p = self.phi_hat(t * (xi - eta));
                if p == 0.0 {
                    return 0.0;
                }
                let be = if c_plus == f64::INFINITY { 1.0 } else { self.beta(t * (c_plus - xi)) };
                c * p * be
            }
            Side::Right => {
                if !c_plus.is_finite() {
                    return 0.0;
                }
                let c = self.chi(t * (c_plus - eta));
                if c == 0.0 {
                    return 0.0;
                }
                let p = self.phi_hat(t * (xi - eta));
                if p == 0.0 {
                    return 0.0;
                }
                let be = if c_minus == f64::NEG_INFINITY { 1.0 } else { self.beta(t * (xi - c_minus)) };
                c * p * be
            }
        }
    }

    /// Spectrum of `Ψ_{y,η,t}` on the DFT frequencies of `spec`.
    pub fn packet_spectrum(
        &self,
        spec: &Spectral,
        y: f64,
        eta: f64,
        t: f64,
        c_minus: f64,
        c_plus: f64,
        side: Side,
    ) -> Vec<Complex64> {
        let grid = spec.grid;
        (0..grid.n)
            .map(|m| {
                let xi = grid.freq(m);
                let v = self.packet_hat(xi, eta, t, c_minus, c_plus, side);
                if v == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(v, -xi * y)
                }
            })
            .collect()
    }

    /// Samples of the truncated packet `Ψ_{y,η,t}^{c⁻,c⁺,side}` on the periodic grid.
    #[allow(clippy::too_many_arguments)]
    pub fn truncated_packet(
        &self,
        spec: &Spectral,
        y: f64,
        eta: f64,
        t: f64,
        c_minus: f64,
        c_plus: f64,
        side: Side,
    ) -> Result<Vec<Complex64>> {
        check_segment(c_minus, c_plus)?;
        if !(t > 0.0) {
            return Err(Error::Argument(format!("scale must be positive, got {t}")));
        }
        let s = self.packet_spectrum(spec, y, eta, t, c_minus, c_plus, side);
        Ok(spec.inverse(&s))
    }

    /// Samples of `ψ_{η,t}` centred at the grid origin offset `y`.
    pub fn psi_packet(&self, spec: &Spectral, y: f64, eta: f64, t: f64) -> Vec<Complex64> {
        let grid = spec.grid;
        let s: Vec<Complex64> = (0..grid.n)
            .map(|m| {
                let xi = grid.freq(m);
                Complex64::from_polar(self.psi_hat(t * (xi - eta)), -xi * y)
            })
            .collect();
        spec.inverse(&s)
    }

    /// Quadrature of `∬ (Ψ̂^l + Ψ̂^r)(ξ) dη dt` at each sample.
    pub fn reconstruct_indicator(&self, c_minus: f64, c_plus: f64, xis: &[f64], quad: &PacketQuadrature) -> Result<Vec<f64>> {
        check_segment(c_minus, c_plus)?;
        quad.validate()?;
        let g = &self.geom;
        let dth = 2.0 * g.eps / quad.n_eta as f64;
        let dl = (quad.t_max / quad.t_min).ln() / quad.n_t as f64;
        let thetas: Vec<f64> = (0..quad.n_eta).map(|j| g.d - g.eps + (j as f64 + 0.5) * dth).collect();
        let ts: Vec<f64> = (0..quad.n_t).map(|k| quad.t_min * ((k as f64 + 0.5) * dl).exp()).collect();
        Ok(par::map_slice(xis, |&xi| {
            let mut acc = 0.0;
            for &t in &ts {
                for &th in &thetas {
                    // Left: η = c⁻ + θ/t. Right: η = c⁺ - θ/t. dη dt = dθ dlog t.
                    if c_minus.is_finite() {
                        acc += self.packet_hat(xi, c_minus + th / t, t, c_minus, c_plus, Side::Left);
                    }
                    if c_plus.is_finite() {
                        acc += self.packet_hat(xi, c_plus - th / t, t, c_minus, c_plus, Side::Right);
                    }
                }
            }
            acc * dth * dl
        }))
    }

    /// Tables of the one-dimensional generators as `(argument, value)` pairs.
    pub fn tables(&self, n: usize) -> Vec<(&'static str, Vec<(f64, f64)>)> {
        let g = &self.geom;
        let lin = |a: f64, b: f64| -> Vec<f64> { (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect() };
        let mk = |xs: Vec<f64>, f: &dyn Fn(f64) -> f64| xs.into_iter().map(|x| (x, f(x))).collect::<Vec<_>>();
        vec![
            ("phi_hat", mk(lin(-1.2 * g.b, 1.2 * g.b), &|x| self.phi_hat(x))),
            ("psi_hat", mk(lin(-1.2 * (1.0 + g.eps) * g.b, 1.2 * (1.0 + g.eps) * g.b), &|x| self.psi_hat(x))),
            ("chi", mk(lin(g.d - 1.2 * g.eps, g.d + 1.2 * g.eps), &|x| self.chi(x))),
            ("gamma", mk(lin(0.0, 1.5 * (1.0 + g.eps)), &|x| self.gamma(x))),
            ("beta", mk(lin(0.0, 1.2 * self.beta_hi), &|x| self.beta(x))),
        ]
    }
}

fn check_segment(c_minus: f64, c_plus: f64) -> Result<()> {
    if c_minus.is_nan() || c_plus.is_nan() || c_minus >= c_plus || c_minus == f64::INFINITY || c_plus == f64::NEG_INFINITY {
        return Err(Error::Argument(format!("need c- < c+, got ({c_minus}, {c_plus})")));
    }
    Ok(())
}

/// `(η, t)` quadrature for the reconstruction identity. Frequency nodes sit
/// at `θ = t(η - c⁻)` (left) or `θ = t(c⁺ - η)` (right) across `supp χ`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketQuadrature {
    pub n_eta: usize,
    pub n_t: usize,
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for PacketQuadrature {
    fn default() -> Self {
        Self { n_eta: 128, n_t: 64, t_min: 0.01, t_max: 100.0 }
    }
}

impl PacketQuadrature {
    pub fn validate(&self) -> Result<()> {
        if self.n_eta == 0 || self.n_t == 0 || !(self.t_min > 0.0 && self.t_max > self.t_min) {
            return Err(Error::Argument(format!("invalid packet quadrature {self:?}")));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        Self { n_eta: 2 * self.n_eta, n_t: 2 * self.n_t, ..*self }
    }
}

/// `W(z) = (1+z²)^{-N/2}`, `W_t(z) = t^{-1} W(z/t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bump {
    pub n: u32,
}

impl Bump {
    pub fn new(n: u32) -> Self {
        Self { n }
    }

    pub fn eval(&self, t: f64, z: f64) -> f64 {
        let u = z / t;
        (1.0 + u * u).powf(-(self.n as f64) / 2.0) / t
    }

    /// `K(u) = ∫_0^u (1+v²)^{-N/2} dv` in closed form.
    pub fn antiderivative(&self, u: f64) -> f64 {
        let q = 1.0 + u * u;
        let (mut a2, mut k) = if self.n.is_multiple_of(2) { (2u32, u.atan()) } else { (1u32, u.asinh()) };
        // a2 = 2a; K_a = u / ((2a-2) q^{a-1}) + (2a-3)/(2a-2) K_{a-1}.
        while a2 < self.n {
            a2 += 2;
            let a = a2 as f64 / 2.0;
            k = u / ((2.0 * a - 2.0) * q.powf(a - 1.0)) + (2.0 * a - 3.0) / (2.0 * a - 2.0) * k;
        }
        k
    }

    /// `∫_lo^hi W_t(z - y) dz`.
    pub fn cell_integral(&self, t: f64, y: f64, lo: f64, hi: f64) -> f64 {
        self.antiderivative((hi - y) / t) - self.antiderivative((lo - y) / t)
    }
}
