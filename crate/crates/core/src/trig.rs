//! Homogeneous trigonometric polynomials in `(cos θ, sin θ)` and their
//! real Fourier form.

use std::f64::consts::PI;

use nalgebra::Complex;
use serde::Serialize;

/// `Σ_j c_j cos^(d-j)θ sin^jθ`, homogeneous of degree `d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigPoly {
    pub coeffs: Vec<f64>,
}

impl TrigPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a trigonometric polynomial needs at least one coefficient");
        Self { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        Self::new(vec![0.0; degree + 1])
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn cos() -> Self {
        Self::new(vec![1.0, 0.0])
    }

    pub fn sin() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let d = self.degree() as i32;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &a)| a * c.powi(d - j as i32) * s.powi(j as i32))
            .sum()
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        TrigPoly::new(out)
    }

    /// Sum of two polynomials of the same degree.
    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        assert_eq!(self.degree(), other.degree(), "homogeneous degrees must match");
        TrigPoly::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        TrigPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Mean over one period from the closed-form moments
    /// `⟨cos^{2m} sin^{2n}⟩ = (2m)!(2n)! / (4^{m+n} m! n! (m+n)!)`.
    pub fn mean(&self) -> f64 {
        let d = self.degree();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &a)| a * trig_moment(d - j, j))
            .sum()
    }

    /// Mean by composite Simpson's rule on `n` (even) panels.
    pub fn mean_simpson(&self, n: usize) -> f64 {
        simpson_mean(|t| self.eval(t), n)
    }

    /// Conversion to `a0 + Σ a_k cos kθ + b_k sin kθ`.
    pub fn to_fourier(&self) -> Fourier {
        let d = self.degree();
        let mut a = vec![0.0; d];
        let mut b = vec![0.0; d];
        let mut a0 = 0.0;
        // Laurent coefficients in z = e^{iθ}, index offset d.
        for (j, &cj) in self.coeffs.iter().enumerate() {
            if cj == 0.0 {
                continue;
            }
            let mut poly = vec![Complex::new(0.0, 0.0); 2 * d + 1];
            poly[d] = Complex::new(cj, 0.0);
            let cos_factor = [Complex::new(0.5, 0.0), Complex::new(0.5, 0.0)];
            // (z - 1/z) / 2i = -i/2 z + i/2 z^{-1}
            let sin_factor = [Complex::new(0.0, 0.5), Complex::new(0.0, -0.5)];
            for _ in 0..(d - j) {
                poly = laurent_mul(&poly, cos_factor);
            }
            for _ in 0..j {
                poly = laurent_mul(&poly, sin_factor);
            }
            a0 += poly[d].re;
            for k in 1..=d {
                a[k - 1] += 2.0 * poly[d + k].re;
                b[k - 1] += -2.0 * poly[d + k].im;
            }
        }
        Fourier { a0, a, b }
    }
}

// Multiply by f[0] z^{-1} + f[1] z (index offset fixed by the vector length).
fn laurent_mul(p: &[Complex<f64>], f: [Complex<f64>; 2]) -> Vec<Complex<f64>> {
    let n = p.len();
    let mut out = vec![Complex::new(0.0, 0.0); n];
    for i in 0..n {
        if p[i] == Complex::new(0.0, 0.0) {
            continue;
        }
        if i + 1 < n {
            out[i + 1] += p[i] * f[1];
        }
        if i >= 1 {
            out[i - 1] += p[i] * f[0];
        }
    }
    out
}

/// `⟨cos^p θ sin^q θ⟩` over one period.
pub fn trig_moment(p: usize, q: usize) -> f64 {
    if p % 2 == 1 || q % 2 == 1 {
        return 0.0;
    }
    let (m, n) = (p / 2, q / 2);
    // (2m)!(2n)! / (4^{m+n} m! n! (m+n)!) evaluated as a running product.
    let mut v = 1.0;
    for k in 1..=m {
        v *= (m + k) as f64 / 4.0;
        v /= k as f64;
    }
    for k in 1..=n {
        v *= (n + k) as f64 / 4.0;
        v /= k as f64;
    }
    // v = (2m)!/(4^m m! m!) * (2n)!/(4^n n! n!); fix the m! n! / (m+n)! factor.
    let mut ratio = 1.0;
    for k in 1..=n {
        ratio *= k as f64 / (m + k) as f64;
    }
    v * ratio
}

/// Mean of a `2π`-periodic function by composite Simpson's rule.
pub fn simpson_mean(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    assert!(n >= 2 && n.is_multiple_of(2), "Simpson needs an even panel count");
    let h = 2.0 * PI / n as f64;
    let mut s = f(0.0) + f(2.0 * PI);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0 / (2.0 * PI)
}

/// Real trigonometric series `a0 + Σ_{k≥1} a_k cos kθ + b_k sin kθ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fourier {
    pub a0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Fourier {
    pub fn eval(&self, theta: f64) -> f64 {
        let mut s = self.a0;
        for k in 0..self.a.len() {
            let (sk, ck) = ((k + 1) as f64 * theta).sin_cos();
            s += self.a[k] * ck + self.b[k] * sk;
        }
        s
    }

    pub fn derivative(&self) -> Fourier {
        let a = (0..self.a.len())
            .map(|k| (k + 1) as f64 * self.b[k])
            .collect();
        let b = (0..self.a.len())
            .map(|k| -((k + 1) as f64) * self.a[k])
            .collect();
        Fourier { a0: 0.0, a, b }
    }

    /// Periodic antiderivative of the zero-mean part (constant term zero).
    pub fn antiderivative(&self) -> Fourier {
        let a = (0..self.a.len())
            .map(|k| -self.b[k] / (k + 1) as f64)
            .collect();
        let b = (0..self.a.len())
            .map(|k| self.a[k] / (k + 1) as f64)
            .collect();
        Fourier { a0: 0.0, a, b }
    }

    pub fn add(&self, other: &Fourier) -> Fourier {
        let n = self.a.len().max(other.a.len());
        let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        Fourier {
            a0: self.a0 + other.a0,
            a: (0..n).map(|k| get(&self.a, k) + get(&other.a, k)).collect(),
            b: (0..n).map(|k| get(&self.b, k) + get(&other.b, k)).collect(),
        }
    }

    /// Product of two series, exact up to the combined degree.
    pub fn mul(&self, other: &Fourier) -> Fourier {
        let n = self.a.len() + other.a.len();
        let mut out = Fourier { a0: 0.0, a: vec![0.0; n], b: vec![0.0; n] };
        // harmonic k of each factor as (cos coefficient, sin coefficient)
        let terms = |f: &Fourier| {
            let mut t = vec![(0usize, f.a0, 0.0)];
            t.extend((0..f.a.len()).map(|k| (k + 1, f.a[k], f.b[k])));
            t
        };
        let mut push = |k: i64, c: f64, s: f64| {
            // c cos kθ + s sin kθ with possibly negative k
            let (k, s) = if k < 0 { (-k, -s) } else { (k, s) };
            if k == 0 {
                out.a0 += c;
            } else {
                out.a[k as usize - 1] += c;
                out.b[k as usize - 1] += s;
            }
        };
        for (j, ca, sa) in terms(self) {
            for (k, cb, sb) in terms(other) {
                let (j, k) = (j as i64, k as i64);
                // cos cos, sin sin, sin cos, cos sin product-to-sum
                push(j - k, 0.5 * (ca * cb + sa * sb), 0.5 * (sa * cb - ca * sb));
                push(j + k, 0.5 * (ca * cb - sa * sb), 0.5 * (sa * cb + ca * sb));
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Fourier {
        Fourier {
            a0: self.a0 * s,
            a: self.a.iter().map(|v| v * s).collect(),
            b: self.b.iter().map(|v| v * s).collect(),
        }
    }
}
