//! Vector-field abstractions and finite-difference Taylor data.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2};

type PlanarFn = dyn Fn([f64; 2], f64) -> [f64; 2] + Send + Sync;
type BranchFn = dyn Fn(f64) -> [f64; 2] + Send + Sync;
type PeriodicFn = dyn Fn(f64, &[f64], f64) -> Vec<f64> + Send + Sync;

/// A planar vector field `x' = f(x, α)` depending on one scalar parameter.
///
/// Cloning is cheap: the field closure is shared.
#[derive(Clone)]
pub struct ParametricPlanarSystem {
    label: String,
    field: Arc<PlanarFn>,
    param_range: (f64, f64),
    domain: Option<[(f64, f64); 2]>,
    equilibrium_branch: Option<Arc<BranchFn>>,
}

impl fmt::Debug for ParametricPlanarSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricPlanarSystem")
            .field("label", &self.label)
            .field("param_range", &self.param_range)
            .field("domain", &self.domain)
            .field("has_equilibrium_branch", &self.equilibrium_branch.is_some())
            .finish()
    }
}

impl ParametricPlanarSystem {
    pub fn new<F>(label: impl Into<String>, param_range: (f64, f64), field: F) -> Self
    where
        F: Fn([f64; 2], f64) -> [f64; 2] + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            field: Arc::new(field),
            param_range,
            domain: None,
            equilibrium_branch: None,
        }
    }

    /// Restrict admissible states to an open box `(lo, hi)` per coordinate.
    pub fn with_domain(mut self, domain: [(f64, f64); 2]) -> Self {
        self.domain = Some(domain);
        self
    }

    /// Attach a known equilibrium branch `α ↦ x*(α)`.
    pub fn with_equilibrium_branch<B>(mut self, branch: B) -> Self
    where
        B: Fn(f64) -> [f64; 2] + Send + Sync + 'static,
    {
        self.equilibrium_branch = Some(Arc::new(branch));
        self
    }

    #[inline]
    pub fn eval(&self, x: [f64; 2], alpha: f64) -> [f64; 2] {
        (self.field)(x, alpha)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn param_range(&self) -> (f64, f64) {
        self.param_range
    }

    pub fn domain(&self) -> Option<[(f64, f64); 2]> {
        self.domain
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        match self.domain {
            None => x.iter().all(|v| v.is_finite()),
            Some(b) => (0..2).all(|i| x[i] > b[i].0 && x[i] < b[i].1),
        }
    }

    pub fn equilibrium_branch(&self) -> Option<&BranchFn> {
        self.equilibrium_branch.as_deref()
    }

    pub fn jacobian(&self, x: [f64; 2], alpha: f64) -> Result<Mat2> {
        let t = derivatives_at(self, x, alpha, 1)?;
        Ok([
            [t.get(0, &[0]), t.get(0, &[1])],
            [t.get(1, &[0]), t.get(1, &[1])],
        ])
    }
}

/// A non-autonomous field `f(t, x, α)`, `T`-periodic in `t`, of any dimension.
#[derive(Clone)]
pub struct PeriodicSystem {
    dim: usize,
    period: f64,
    field: Arc<PeriodicFn>,
}

impl fmt::Debug for PeriodicSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicSystem")
            .field("dim", &self.dim)
            .field("period", &self.period)
            .finish()
    }
}

impl PeriodicSystem {
    pub fn new<F>(dim: usize, period: f64, field: F) -> Result<Self>
    where
        F: Fn(f64, &[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "period must be positive, got {period}"
            )));
        }
        Ok(Self {
            dim,
            period,
            field: Arc::new(field),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    #[inline]
    pub fn eval(&self, t: f64, x: &[f64], alpha: f64) -> Vec<f64> {
        (self.field)(t, x, alpha)
    }
}

/// All mixed partials of a given order of both field components at a point.
///
/// `partials[c][j]` holds `∂ⁿ f_c / ∂x^(n-j) ∂y^j`; any ordering of the
/// differentiation indices maps onto one of these entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTensor {
    pub order: usize,
    pub point: [f64; 2],
    pub partials: [Vec<f64>; 2],
}

impl DerivativeTensor {
    /// Entry for `component` differentiated along `indices` (each 0 = x, 1 = y).
    pub fn get(&self, component: usize, indices: &[usize]) -> f64 {
        assert_eq!(indices.len(), self.order, "index length must equal order");
        let j = indices.iter().filter(|&&i| i == 1).count();
        self.partials[component][j]
    }

    /// Full tensor laid out as `[component][i1][i2]...` flattened in
    /// row-major order over the `order` binary indices.
    pub fn dense(&self, component: usize) -> Vec<f64> {
        let n = 1usize << self.order;
        (0..n)
            .map(|mask| {
                let ys = (0..self.order).filter(|b| mask >> b & 1 == 1).count();
                self.partials[component][ys]
            })
            .collect()
    }
}

// Central stencils (offset multiple of h, weight) for derivative orders 0..=3.
fn stencil(order: usize) -> &'static [(f64, f64)] {
    match order {
        0 => &[(0.0, 1.0)],
        1 => &[(-1.0, -0.5), (1.0, 0.5)],
        2 => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
        3 => &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        _ => unreachable!("derivative order above 3"),
    }
}

// Base relative step per total order; third derivatives need a larger step
// to keep cancellation error below the truncation error.
fn step_base(order: usize) -> f64 {
    match order {
        1 => 1e-3,
        2 => 2e-3,
        _ => 1e-2,
    }
}

fn mixed_partial(
    sys: &ParametricPlanarSystem,
    p: [f64; 2],
    alpha: f64,
    nx: usize,
    ny: usize,
    h: [f64; 2],
) -> Result<[f64; 2]> {
    let mut acc = [0.0; 2];
    for &(ox, wx) in stencil(nx) {
        for &(oy, wy) in stencil(ny) {
            let q = [p[0] + ox * h[0], p[1] + oy * h[1]];
            let f = sys.eval(q, alpha);
            if !(f[0].is_finite() && f[1].is_finite()) {
                return Err(Error::EvaluationDomain {
                    point: q.to_vec(),
                    alpha,
                });
            }
            let w = wx * wy;
            acc[0] += w * f[0];
            acc[1] += w * f[1];
        }
    }
    let scale = h[0].powi(nx as i32) * h[1].powi(ny as i32);
    Ok([acc[0] / scale, acc[1] / scale])
}

/// All mixed partial derivatives of order `order` (1, 2 or 3) at `point`.
///
/// Tensor-product central differences with one Richardson step (ratio 2).
pub fn derivatives_at(
    sys: &ParametricPlanarSystem,
    point: [f64; 2],
    alpha: f64,
    order: usize,
) -> Result<DerivativeTensor> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "derivative order must be 1, 2 or 3, got {order}"
        )));
    }
    if !sys.contains(point) {
        return Err(Error::OutsideDomain {
            label: sys.label.clone(),
            point: point.to_vec(),
        });
    }
    let base = step_base(order);
    let h = [
        base * point[0].abs().max(1.0),
        base * point[1].abs().max(1.0),
    ];
    let half = [0.5 * h[0], 0.5 * h[1]];
    let mut partials = [vec![0.0; order + 1], vec![0.0; order + 1]];
    for j in 0..=order {
        let coarse = mixed_partial(sys, point, alpha, order - j, j, h)?;
        let fine = mixed_partial(sys, point, alpha, order - j, j, half)?;
        for c in 0..2 {
            partials[c][j] = (4.0 * fine[c] - coarse[c]) / 3.0;
        }
    }
    Ok(DerivativeTensor {
        order,
        point,
        partials,
    })
}

/// Real and (positive) imaginary part of the Jacobian's complex eigenvalue pair.
pub fn focus_eigenvalue(sys: &ParametricPlanarSystem, x: [f64; 2], alpha: f64) -> Result<(f64, f64)> {
    let j = sys.jacobian(x, alpha)?;
    let disc = linalg::discriminant2(&j);
    if disc >= 0.0 {
        return Err(Error::NotAFocus {
            param: alpha,
            discriminant: disc,
        });
    }
    Ok((0.5 * linalg::trace(&j), (-disc).sqrt()))
}

/// `dβ/dα` at `alpha0`, where `β(α)` is the real part of the complex
/// eigenvalue pair of the Jacobian along `equilibrium_branch`.
pub fn d_alpha_eigen_real(
    sys: &ParametricPlanarSystem,
    equilibrium_branch: &dyn Fn(f64) -> Result<[f64; 2]>,
    alpha0: f64,
) -> Result<f64> {
    let beta = |a: f64| -> Result<f64> { Ok(focus_eigenvalue(sys, equilibrium_branch(a)?, a)?.0) };
    let central = |h: f64| -> Result<f64> { Ok((beta(alpha0 + h)? - beta(alpha0 - h)?) / (2.0 * h)) };
    let richardson = |h: f64| -> Result<f64> { Ok((4.0 * central(0.5 * h)? - central(h)?) / 3.0) };

    let mut h = 1e-2 * alpha0.abs().max(1.0);
    let mut prev = richardson(h)?;
    for _ in 0..8 {
        h *= 0.5;
        let next = richardson(h)?;
        if (next - prev).abs() <= 1e-7 * next.abs().max(1e-12) {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}
