use std::sync::Arc;

use super::Kernel;
use crate::chain::State;
use crate::error::{invalid, Result};

/// `pi_hat(x) = n^-1 sum_i K((x - X_i) / h) / h^d`.
pub fn kde_evaluate(sample: &[State], kernel: &Kernel, h: f64, x: &[f64]) -> Result<f64> {
    if !(h > 0.0) {
        return Err(invalid(format!("bandwidth must be positive, got {h}")));
    }
    if sample.is_empty() {
        return Err(invalid("sample is empty"));
    }
    if x.len() != kernel.dim {
        return Err(invalid("evaluation point does not match the kernel dimension"));
    }
    let mut z = vec![0.0; kernel.dim];
    let mut total = 0.0;
    for s in sample {
        let y = s.coords().ok_or_else(|| invalid("kernel density estimation needs vector states"))?;
        if y.len() != kernel.dim {
            return Err(invalid("sample point does not match the kernel dimension"));
        }
        for ((zk, xk), yk) in z.iter_mut().zip(x).zip(y) {
            *zk = (xk - yk) / h;
        }
        total += kernel.eval(&z);
    }
    Ok(total / (sample.len() as f64 * h.powi(kernel.dim as i32)))
}

/// Sorted one-dimensional sample for fast evaluation of compact kernels.
#[derive(Debug, Clone)]
pub struct SortedSample {
    xs: Vec<f64>,
}

impl SortedSample {
    pub fn new(mut xs: Vec<f64>) -> Self {
        xs.sort_by(f64::total_cmp);
        Self { xs }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn kde(&self, kernel: &Kernel, h: f64, x: f64) -> f64 {
        // widened window; the kernel itself decides membership at the edge
        let w = h * (1.0 + 1e-9);
        let from = self.xs.partition_point(|&y| y < x - w);
        let to = self.xs.partition_point(|&y| y <= x + w);
        let s: f64 = self.xs[from..to].iter().map(|y| kernel.eval(&[(x - y) / h])).sum();
        s / (self.xs.len() as f64 * h)
    }
}

pub type SmoothingFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// The centering `x -> E_pi[pi_hat(x)] = int K_h(x - y) pi(y) dy`.
#[derive(Clone)]
pub enum SmoothedTarget {
    /// Uniform law on a box; closed form for product kernels.
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// A one-dimensional density, integrated by adaptive quadrature.
    Density1d { density: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
    /// Any function of the point and the bandwidth.
    Custom(SmoothingFn),
}

impl std::fmt::Debug for SmoothedTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SmoothedTarget::UniformBox { lo, hi } => write!(f, "UniformBox({lo:?}, {hi:?})"),
            SmoothedTarget::Density1d { .. } => write!(f, "Density1d"),
            SmoothedTarget::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Quadrature tolerance of the smoothed target.
pub const QUADRATURE_TOL: f64 = 1e-8;

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // start from several panels so that kinks and narrow features are resolved
    let panels = 16;
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * w, a + (i + 1) as f64 * w);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson(f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40)
        })
        .sum()
}

impl SmoothedTarget {
    pub fn uniform_unit(dim: usize) -> Self {
        SmoothedTarget::UniformBox { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn eval(&self, kernel: &Kernel, h: f64, x: &[f64]) -> Result<f64> {
        match self {
            SmoothedTarget::UniformBox { lo, hi } => {
                let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
                let a: Vec<f64> = x.iter().zip(hi).map(|(x, b)| (x - b) / h).collect();
                let b: Vec<f64> = x.iter().zip(lo).map(|(x, a)| (x - a) / h).collect();
                kernel
                    .box_mass(&a, &b)
                    .map(|m| m / vol)
                    .ok_or_else(|| invalid("closed-form smoothing of a uniform law needs a product kernel"))
            }
            SmoothedTarget::Density1d { density } => {
                if kernel.dim != 1 {
                    return Err(invalid("quadrature smoothing is one-dimensional"));
                }
                let x = x[0];
                Ok(integrate(&|t| kernel.eval(&[t]) * density(x - h * t), -1.0, 1.0, QUADRATURE_TOL))
            }
            SmoothedTarget::Custom(f) => Ok(f(x, h)),
        }
    }
}

/// Product grid over `[lo - h, hi + h]` with spacing at most `spacing_factor * h` in each coordinate.
pub fn eval_grid(lo: &[f64], hi: &[f64], h: f64, spacing_factor: f64) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| {
            let (from, to) = (a - h, b + h);
            let cells = ((to - from) / (spacing_factor * h)).ceil().max(1.0) as usize;
            (0..=cells).map(|i| from + (to - from) * i as f64 / cells as f64).collect()
        })
        .collect();
    let mut grid = vec![Vec::new()];
    for axis in &axes {
        grid = grid
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    grid
}

/// `max over grid of |pi_hat(x) - E_pi[pi_hat(x)]|`.
pub fn uniform_deviation(
    sample: &[State],
    kernel: &Kernel,
    h: f64,
    grid: &[Vec<f64>],
    target: &SmoothedTarget,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(invalid("evaluation grid is empty"));
    }
    if !(h > 0.0) {
        return Err(invalid(format!("bandwidth must be positive, got {h}")));
    }
    if sample.is_empty() {
        return Err(invalid("sample is empty"));
    }
    let mut sup: f64 = 0.0;
    if kernel.dim == 1 {
        let xs = sample
            .iter()
            .map(|s| s.coords().filter(|c| c.len() == 1).map(|c| c[0]))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| invalid("sample point does not match the kernel dimension"))?;
        let sorted = SortedSample::new(xs);
        for x in grid {
            sup = sup.max((sorted.kde(kernel, h, x[0]) - target.eval(kernel, h, x)?).abs());
        }
    } else {
        for x in grid {
            sup = sup.max((kde_evaluate(sample, kernel, h, x)? - target.eval(kernel, h, x)?).abs());
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kde::{KernelBase, KernelForm};

    #[test]
    fn single_point_box_kernel() {
        let k = Kernel::box_1d();
        assert_eq!(kde_evaluate(&[State::scalar(0.0)], &k, 1.0, &[0.0]).unwrap(), 0.5);
        assert_eq!(kde_evaluate(&[State::scalar(0.0)], &k, 1.0, &[2.5]).unwrap(), 0.0);
        assert!(kde_evaluate(&[State::scalar(0.0)], &k, 0.0, &[0.0]).is_err());
    }

    #[test]
    fn sorted_sample_matches_direct_sum() {
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 / 101.0).collect();
        let states: Vec<State> = xs.iter().map(|x| State::scalar(*x)).collect();
        let sorted = SortedSample::new(xs);
        let k = Kernel::epanechnikov_1d();
        for x in [-0.2, 0.0, 0.33, 0.5, 1.05] {
            let a = kde_evaluate(&states, &k, 0.07, &[x]).unwrap();
            assert!((a - sorted.kde(&k, 0.07, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_and_quadrature_agree_for_the_uniform_law() {
        let k = Kernel::epanechnikov_1d();
        let closed = SmoothedTarget::uniform_unit(1);
        let quad =
            SmoothedTarget::Density1d { density: Arc::new(|y| if (0.0..=1.0).contains(&y) { 1.0 } else { 0.0 }) };
        for x in [-0.1, 0.0, 0.04, 0.5, 0.97, 1.1] {
            let a = closed.eval(&k, 0.1, &[x]).unwrap();
            let b = quad.eval(&k, 0.1, &[x]).unwrap();
            assert!((a - b).abs() < 1e-7, "x = {x}: {a} vs {b}");
        }
        assert!((closed.eval(&k, 0.1, &[0.5]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_spacing_and_range() {
        let g = eval_grid(&[0.0], &[1.0], 0.1, 0.25);
        assert!((g[0][0] + 0.1).abs() < 1e-15 && (g.last().unwrap()[0] - 1.1).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1][0] - w[0][0] <= 0.025 + 1e-12));
        let g2 = eval_grid(&[0.0, 0.0], &[1.0, 1.0], 0.5, 0.25);
        assert_eq!(g2.len(), 17 * 17);
    }

    #[test]
    fn zero_deviation_against_itself() {
        let sample: Vec<State> = [0.1, 0.4, 0.45, 0.8].iter().map(|x| State::scalar(*x)).collect();
        let k = Kernel::box_1d();
        let s2 = sample.clone();
        let target = SmoothedTarget::Custom(Arc::new(move |x: &[f64], h: f64| {
            kde_evaluate(&s2, &Kernel::box_1d(), h, x).unwrap()
        }));
        let grid = eval_grid(&[0.0], &[1.0], 0.2, 0.25);
        assert!(uniform_deviation(&sample, &k, 0.2, &grid, &target).unwrap() < 1e-12);
        assert!(uniform_deviation(&sample, &k, 0.2, &[], &target).is_err());
    }

    #[test]
    fn product_kernel_closed_form_in_two_dimensions() {
        let k = Kernel::new(KernelBase::Box, KernelForm::Product, 2).unwrap();
        let t = SmoothedTarget::uniform_unit(2);
        assert!((t.eval(&k, 0.1, &[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        assert!((t.eval(&k, 0.1, &[0.0, 0.0]).unwrap() - 0.25).abs() < 1e-15);
    }
}
