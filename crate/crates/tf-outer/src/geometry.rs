//! Tents, strips, the interval parameters and the discretized upper 3-space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryParams {
    pub alpha_minus: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub alpha_plus: f64,
    pub b: f64,
    pub d: f64,
    pub d_prime: f64,
    pub d_dblprime: f64,
    pub eps: f64,
    pub decay_n: u32,
}

impl Default for GeometryParams {
    fn default() -> Self {
        let (d, d_prime, eps) = (0.9, 1.5, 0.05);
        Self {
            alpha_minus: -1.0,
            beta_minus: -0.6,
            beta_plus: 0.6,
            alpha_plus: 1.0,
            b: Self::enlarged_b(d, d_prime, eps),
            d,
            d_prime,
            d_dblprime: 2.0,
            eps,
            decay_n: 4,
        }
    }
}

impl GeometryParams {
    /// `b = (d' - d) / (2(1 - 3ε))`.
    pub fn enlarged_b(d: f64, d_prime: f64, eps: f64) -> f64 {
        (d_prime - d) / (2.0 * (1.0 - 3.0 * eps))
    }

    pub fn validate(&self) -> Result<()> {
        let g = self;
        let fail = |msg: &str| Err(Error::Geometry(msg.to_string()));
        let vals = [g.alpha_minus, g.beta_minus, g.beta_plus, g.alpha_plus, g.b, g.d, g.d_prime, g.d_dblprime, g.eps];
        if vals.iter().any(|v| !v.is_finite()) {
            return fail("all geometry parameters must be finite");
        }
        if !(g.b > 0.0 && g.d > 0.0 && g.d_prime > 0.0 && g.d_dblprime > 0.0 && g.eps > 0.0) {
            return fail("b, d, d', d'', eps must be positive");
        }
        if g.decay_n == 0 {
            return fail("decay_N must be a positive integer");
        }
        if !(g.alpha_minus <= g.beta_minus && g.beta_minus < 0.0 && 0.0 < g.beta_plus && g.beta_plus <= g.alpha_plus) {
            return fail("alpha- <= beta- < 0 < beta+ <= alpha+");
        }
        if !(g.beta_minus < -g.b && g.b < g.beta_plus) {
            return fail("[-b, b] inside (beta-, beta+)");
        }
        if !(-g.d_prime <= g.beta_minus && g.beta_plus <= g.d_prime) {
            return fail("(beta-, beta+) inside [-d', d']");
        }
        let right = g.d - g.eps >= g.beta_plus && g.d + g.eps < g.alpha_plus;
        let left = -g.d - g.eps > g.alpha_minus && -g.d + g.eps <= g.beta_minus;
        if !(right && left) {
            return fail("[d-eps, d+eps] and [-d-eps, -d+eps] inside Theta minus Theta_i");
        }
        if !(g.d_dblprime > g.d_prime.max(g.d)) {
            return fail("d'' > max(d', d)");
        }
        if !(3.0 * g.d > g.d_prime) {
            return fail("3d > d'");
        }
        if !((1.0 + g.eps) * g.b < g.beta_plus && g.beta_plus < g.d - g.eps) {
            return fail("(1+eps) b < beta+ < d - eps");
        }
        Ok(())
    }

    pub fn in_theta(&self, th: f64) -> bool {
        self.alpha_minus < th && th < self.alpha_plus
    }

    pub fn in_interior(&self, th: f64) -> bool {
        self.beta_minus < th && th < self.beta_plus
    }

    pub fn in_exterior(&self, th: f64) -> bool {
        self.in_theta(th) && !self.in_interior(th)
    }

    /// `Θ⁺ = Θ ∩ [0, ∞)`.
    pub fn in_theta_plus(&self, th: f64) -> bool {
        (0.0..self.alpha_plus).contains(&th)
    }

    /// `Θ⁻ = Θ ∩ (-∞, 0]`.
    pub fn in_theta_minus(&self, th: f64) -> bool {
        self.alpha_minus < th && th <= 0.0
    }

    pub fn theta_width(&self) -> f64 {
        self.alpha_plus - self.alpha_minus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tent {
    pub x: f64,
    pub xi: f64,
    pub s: f64,
}

impl Tent {
    pub fn new(x: f64, xi: f64, s: f64) -> Self {
        debug_assert!(s > 0.0);
        Self { x, xi, s }
    }

    pub fn premeasure(&self) -> f64 {
        self.s
    }

    /// Tie-break order: larger `s` first, then `(x, ξ)` lexicographically.
    pub fn tie_order(&self, other: &Tent) -> std::cmp::Ordering {
        other
            .s
            .total_cmp(&self.s)
            .then(self.x.total_cmp(&other.x))
            .then(self.xi.total_cmp(&other.xi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub x: f64,
    pub s: f64,
}

impl Strip {
    pub fn new(x: f64, s: f64) -> Self {
        debug_assert!(s > 0.0);
        Self { x, s }
    }

    pub fn premeasure(&self) -> f64 {
        self.s
    }

    pub fn tie_order(&self, other: &Strip) -> std::cmp::Ordering {
        other.s.total_cmp(&self.s).then(self.x.total_cmp(&other.x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfPoint {
    pub y: f64,
    pub eta: f64,
    pub t: f64,
}

impl TfPoint {
    pub fn new(y: f64, eta: f64, t: f64) -> Self {
        Self { y, eta, t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointClass {
    Interior,
    Exterior,
    Outside,
}

pub fn classify_point(tent: &Tent, p: &TfPoint, g: &GeometryParams) -> PointClass {
    if !((p.y - tent.x).abs() < tent.s && p.t < tent.s) {
        return PointClass::Outside;
    }
    let th = p.t * (p.eta - tent.xi);
    if g.in_interior(th) {
        PointClass::Interior
    } else if g.in_theta(th) {
        PointClass::Exterior
    } else {
        PointClass::Outside
    }
}

pub fn strip_contains(strip: &Strip, p: &TfPoint) -> bool {
    (p.y - strip.x).abs() < strip.s && p.t < strip.s
}

/// Membership in `R·T = ∪_{|ξ'-ξ|<R/s} T(x, ξ', Rs)`.
pub fn in_enlargement(tent: &Tent, r: f64, p: &TfPoint, g: &GeometryParams) -> bool {
    let rs = r * tent.s;
    if !((p.y - tent.x).abs() < rs && p.t < rs) {
        return false;
    }
    let lo = tent.xi - r / tent.s + g.alpha_minus / p.t;
    let hi = tent.xi + r / tent.s + g.alpha_plus / p.t;
    lo < p.eta && p.eta < hi
}

/// Finite tent cover of `R·T` with frequency windows overlapping by half.
pub fn enlarge_tent(tent: &Tent, r: f64, g: &GeometryParams) -> Result<Vec<Tent>> {
    if !(r >= 1.0) {
        return Err(Error::Argument(format!("enlargement factor must be >= 1, got {r}")));
    }
    let rs = r * tent.s;
    let h = g.theta_width() / (2.0 * rs);
    let reach = r / tent.s;
    let j = (reach / h).ceil() as i64;
    Ok((-j..=j).map(|i| Tent::new(tent.x, tent.xi + i as f64 * h, rs)).collect())
}

pub fn cover_premeasure(tents: &[Tent]) -> f64 {
    tents.iter().map(|t| t.s).sum()
}

/// Frequency interval `{c : s(ξ - c) ∈ Θ⁺} = (ξ - α⁺/s, ξ]`.
pub fn plus_interval(tent: &Tent, g: &GeometryParams) -> (f64, f64) {
    (tent.xi - g.alpha_plus / tent.s, tent.xi)
}

pub fn q_plus_disjoint(t1: &Tent, t2: &Tent, q: f64, g: &GeometryParams) -> bool {
    if (t1.x - t2.x).abs() >= q * (t1.s + t2.s) {
        return true;
    }
    let (a1, b1) = plus_interval(t1, g);
    let (a2, b2) = plus_interval(t2, g);
    b1 <= a2 || b2 <= a1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FreqAxis {
    /// Nodes `η_j` at cell midpoints of `[min, max]`.
    Uniform { min: f64, max: f64, n: usize },
    /// Nodes `η_{j,k} = center + θ_j / t_k` with `θ_j` at cell midpoints of
    /// `[theta_min, theta_max]`; resolves modulation at every scale alike.
    Adapted { center: f64, theta_min: f64, theta_max: f64, n: usize },
}

impl FreqAxis {
    pub fn n(&self) -> usize {
        match *self {
            FreqAxis::Uniform { n, .. } | FreqAxis::Adapted { n, .. } => n,
        }
    }
}

/// Product grid on `R × R × R⁺`.
///
/// `y` nodes are `y_min + i Δy`, `i < n_y` (periodic layout), `t` nodes are
/// log-midpoints. Point weights approximate `dy dη dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfGrid {
    pub y_min: f64,
    pub y_max: f64,
    pub n_y: usize,
    pub freq: FreqAxis,
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
}

impl TfGrid {
    pub fn uniform(y: (f64, f64, usize), eta: (f64, f64, usize), t: (f64, f64, usize)) -> Result<Self> {
        let g = Self {
            y_min: y.0,
            y_max: y.1,
            n_y: y.2,
            freq: FreqAxis::Uniform { min: eta.0, max: eta.1, n: eta.2 },
            t_min: t.0,
            t_max: t.1,
            n_t: t.2,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn adapted(y: (f64, f64, usize), center: f64, theta: (f64, f64, usize), t: (f64, f64, usize)) -> Result<Self> {
        let g = Self {
            y_min: y.0,
            y_max: y.1,
            n_y: y.2,
            freq: FreqAxis::Adapted { center, theta_min: theta.0, theta_max: theta.1, n: theta.2 },
            t_min: t.0,
            t_max: t.1,
            n_t: t.2,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Grid(m));
        if self.n_y == 0 || self.n_t == 0 || self.freq.n() == 0 {
            return bad("grid axes need at least one point".into());
        }
        if !(self.y_max > self.y_min) {
            return bad(format!("y axis not increasing: [{}, {}]", self.y_min, self.y_max));
        }
        if !(self.t_min > 0.0 && self.t_max > self.t_min) {
            return bad(format!("t axis must satisfy 0 < t_min < t_max, got [{}, {}]", self.t_min, self.t_max));
        }
        match self.freq {
            FreqAxis::Uniform { min, max, .. } if !(max > min) => bad(format!("eta axis not increasing: [{min}, {max}]")),
            FreqAxis::Adapted { theta_min, theta_max, .. } if !(theta_max > theta_min) => {
                bad(format!("theta axis not increasing: [{theta_min}, {theta_max}]"))
            }
            _ => Ok(()),
        }
    }

    /// Same ranges, every count doubled.
    pub fn refined(&self) -> Self {
        let mut g = self.clone();
        g.n_y *= 2;
        g.n_t *= 2;
        g.freq = match g.freq {
            FreqAxis::Uniform { min, max, n } => FreqAxis::Uniform { min, max, n: 2 * n },
            FreqAxis::Adapted { center, theta_min, theta_max, n } => {
                FreqAxis::Adapted { center, theta_min, theta_max, n: 2 * n }
            }
        };
        g
    }

    pub fn n_f(&self) -> usize {
        self.freq.n()
    }

    pub fn len(&self) -> usize {
        self.n_y * self.n_f() * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.n_y as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        self.y_min + i as f64 * self.dy()
    }

    pub fn dlog_t(&self) -> f64 {
        (self.t_max / self.t_min).ln() / self.n_t as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        (self.t_min.ln() + (k as f64 + 0.5) * self.dlog_t()).exp()
    }

    pub fn eta(&self, j: usize, k: usize) -> f64 {
        match self.freq {
            FreqAxis::Uniform { min, max, n } => min + (j as f64 + 0.5) * (max - min) / n as f64,
            FreqAxis::Adapted { center, theta_min, theta_max, n } => {
                center + (theta_min + (j as f64 + 0.5) * (theta_max - theta_min) / n as f64) / self.t(k)
            }
        }
    }

    /// Frequency step at scale index `k`.
    pub fn d_eta(&self, k: usize) -> f64 {
        match self.freq {
            FreqAxis::Uniform { min, max, n } => (max - min) / n as f64,
            FreqAxis::Adapted { theta_min, theta_max, n, .. } => (theta_max - theta_min) / n as f64 / self.t(k),
        }
    }

    /// Quadrature weight `Δy·Δη·t_k·Δlog t` of every point at scale index `k`.
    pub fn weight(&self, k: usize) -> f64 {
        self.dy() * self.d_eta(k) * self.t(k) * self.dlog_t()
    }

    pub fn slice_len(&self) -> usize {
        self.n_y
    }

    /// Number of `(η, t)` slices.
    pub fn n_slices(&self) -> usize {
        self.n_f() * self.n_t
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n_f() + j) * self.n_y + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let i = idx % self.n_y;
        let rest = idx / self.n_y;
        (i, rest % self.n_f(), rest / self.n_f())
    }

    pub fn point(&self, idx: usize) -> TfPoint {
        let (i, j, k) = self.coords(idx);
        TfPoint::new(self.y(i), self.eta(j, k), self.t(k))
    }

    pub fn weight_at(&self, idx: usize) -> f64 {
        self.weight(self.coords(idx).2)
    }

    pub fn total_weight(&self) -> f64 {
        (0..self.n_t).map(|k| self.weight(k) * (self.n_y * self.n_f()) as f64).sum()
    }

    /// Inclusive index range of `y` nodes with `|y - x| < r`, possibly empty.
    fn y_range(&self, x: f64, r: f64) -> Option<(usize, usize)> {
        let dy = self.dy();
        let lo = (((x - r) - self.y_min) / dy).floor().max(0.0) as usize;
        let hi_f = (((x + r) - self.y_min) / dy).ceil();
        if hi_f < 0.0 {
            return None;
        }
        let hi = (hi_f as usize).min(self.n_y - 1);
        let mut a = lo;
        while a <= hi && (self.y(a) - x).abs() >= r {
            a += 1;
        }
        let mut b = hi;
        while b >= a && (self.y(b) - x).abs() >= r {
            if b == 0 {
                return None;
            }
            b -= 1;
        }
        (a <= b).then_some((a, b))
    }

    /// Inclusive index range of frequency nodes at scale `k` with `t_k(η - ξ) ∈ (lo, hi)`.
    fn f_range(&self, k: usize, xi: f64, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let n = self.n_f();
        let t = self.t(k);
        let e_lo = xi + lo / t;
        let e_hi = xi + hi / t;
        let (start, step) = (self.eta(0, k), self.d_eta(k));
        let a = (((e_lo - start) / step).floor() - 1.0).max(0.0);
        let b = ((e_hi - start) / step).ceil() + 1.0;
        if b < 0.0 || a > (n - 1) as f64 {
            return None;
        }
        let (a, b) = (a as usize, (b as usize).min(n - 1));
        let inside = |j: usize| {
            let th = t * (self.eta(j, k) - xi);
            lo < th && th < hi
        };
        let mut a = a;
        while a <= b && !inside(a) {
            a += 1;
        }
        let mut b = b;
        while b >= a && !inside(b) {
            if b == 0 {
                return None;
            }
            b -= 1;
        }
        (a <= b).then_some((a, b))
    }

    /// All grid points in the tent with their class (never `Outside`).
    pub fn tent_points(&self, tent: &Tent, g: &GeometryParams) -> Vec<(usize, PointClass)> {
        let mut out = Vec::new();
        let Some((ia, ib)) = self.y_range(tent.x, tent.s) else { return out };
        for k in 0..self.n_t {
            if self.t(k) >= tent.s {
                break;
            }
            let Some((ja, jb)) = self.f_range(k, tent.xi, g.alpha_minus, g.alpha_plus) else { continue };
            for j in ja..=jb {
                let p = TfPoint::new(0.0, self.eta(j, k), self.t(k));
                let th = p.t * (p.eta - tent.xi);
                let class = if g.in_interior(th) {
                    PointClass::Interior
                } else if g.in_theta(th) {
                    PointClass::Exterior
                } else {
                    continue;
                };
                for i in ia..=ib {
                    out.push((self.index(i, j, k), class));
                }
            }
        }
        out
    }

    /// All grid points in the strip.
    pub fn strip_points(&self, strip: &Strip) -> Vec<usize> {
        let mut out = Vec::new();
        let Some((ia, ib)) = self.y_range(strip.x, strip.s) else { return out };
        for k in 0..self.n_t {
            if self.t(k) >= strip.s {
                break;
            }
            for j in 0..self.n_f() {
                for i in ia..=ib {
                    out.push(self.index(i, j, k));
                }
            }
        }
        out
    }
}
