use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};

/// Univariate profile `K0` supported on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelBase {
    /// `K0(t) = 1/2` on `[-1, 1]`.
    Box,
    /// `K0(t) = 3/4 (1 - t^2)` on `[-1, 1]`.
    Epanechnikov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelForm {
    /// `K(x) = c_d K0(|x|)`, with `c_d` making `K` integrate to one.
    Radial,
    /// `K(x) = prod_k K0(x_k)`.
    Product,
}

/// A compactly supported kernel on R^d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub base: KernelBase,
    pub form: KernelForm,
    pub dim: usize,
    norm: f64,
}

/// Surface area of the unit sphere in R^d.
fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma(h)
}

impl KernelBase {
    pub fn profile(self, t: f64) -> f64 {
        if t.abs() > 1.0 {
            return 0.0;
        }
        match self {
            KernelBase::Box => 0.5,
            KernelBase::Epanechnikov => 0.75 * (1.0 - t * t),
        }
    }

    /// `G(t) = int_{-1}^t K0`.
    pub fn cdf(self, t: f64) -> f64 {
        let t = t.clamp(-1.0, 1.0);
        match self {
            KernelBase::Box => 0.5 * (t + 1.0),
            KernelBase::Epanechnikov => 0.5 + 0.75 * (t - t * t * t / 3.0),
        }
    }

    /// `int_0^1 K0(r)^j r^(d-1) dr` for `j` in {1, 2}.
    fn radial_moment(self, d: usize, j: i32) -> f64 {
        let d = d as f64;
        match (self, j) {
            (KernelBase::Box, _) => 0.5f64.powi(j) / d,
            (KernelBase::Epanechnikov, 1) => 0.75 * (1.0 / d - 1.0 / (d + 2.0)),
            (KernelBase::Epanechnikov, _) => 0.5625 * (1.0 / d - 2.0 / (d + 2.0) + 1.0 / (d + 4.0)),
        }
    }

    /// `int K0^2` over `[-1, 1]`.
    fn l2_norm_sq(self) -> f64 {
        match self {
            KernelBase::Box => 0.5,
            KernelBase::Epanechnikov => 0.6,
        }
    }
}

impl Kernel {
    pub fn new(base: KernelBase, form: KernelForm, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("kernel dimension must be at least 1"));
        }
        let norm = match form {
            KernelForm::Product => 1.0,
            KernelForm::Radial if dim == 1 => 1.0,
            KernelForm::Radial => 1.0 / (sphere_area(dim) * base.radial_moment(dim, 1)),
        };
        Ok(Self { base, form, dim, norm })
    }

    pub fn box_1d() -> Self {
        Self::new(KernelBase::Box, KernelForm::Product, 1).expect("valid kernel")
    }

    pub fn epanechnikov_1d() -> Self {
        Self::new(KernelBase::Epanechnikov, KernelForm::Product, 1).expect("valid kernel")
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.form {
            KernelForm::Product => x.iter().map(|t| self.base.profile(*t)).product(),
            KernelForm::Radial => {
                let r = x.iter().map(|t| t * t).sum::<f64>().sqrt();
                self.norm * self.base.profile(r)
            }
        }
    }

    /// `U_K = sup |K|`.
    pub fn sup_norm(&self) -> f64 {
        match self.form {
            KernelForm::Product => self.base.profile(0.0).powi(self.dim as i32),
            KernelForm::Radial => self.norm * self.base.profile(0.0),
        }
    }

    /// `v_K = int K^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        match self.form {
            KernelForm::Product => self.base.l2_norm_sq().powi(self.dim as i32),
            KernelForm::Radial if self.dim == 1 => self.base.l2_norm_sq(),
            KernelForm::Radial => self.norm * self.norm * sphere_area(self.dim) * self.base.radial_moment(self.dim, 2),
        }
    }

    /// Integral of `K` over the box `prod [lo_k, hi_k]` (product form, or d = 1).
    pub fn box_mass(&self, lo: &[f64], hi: &[f64]) -> Option<f64> {
        (self.form == KernelForm::Product || self.dim == 1)
            .then(|| lo.iter().zip(hi).map(|(a, b)| self.base.cdf(*b) - self.base.cdf(*a)).product())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn riemann_1d(f: impl Fn(f64) -> f64, m: usize) -> f64 {
        let w = 2.0 / m as f64;
        (0..m).map(|i| f(-1.0 + (i as f64 + 0.5) * w) * w).sum()
    }

    #[test]
    fn one_dimensional_kernels_integrate_to_one() {
        for k in [Kernel::box_1d(), Kernel::epanechnikov_1d()] {
            assert!((riemann_1d(|t| k.eval(&[t]), 200_000) - 1.0).abs() < 1e-8);
            assert!((riemann_1d(|t| k.eval(&[t]).powi(2), 200_000) - k.l2_norm_sq()).abs() < 1e-8);
            assert!((k.base.cdf(1.0) - 1.0).abs() < 1e-15 && k.base.cdf(-1.0) == 0.0);
        }
        assert_eq!(Kernel::box_1d().eval(&[0.0]), 0.5);
        assert_eq!(Kernel::box_1d().eval(&[1.5]), 0.0);
    }

    #[test]
    fn radial_kernels_integrate_to_one_in_the_plane() {
        for base in [KernelBase::Box, KernelBase::Epanechnikov] {
            let k = Kernel::new(base, KernelForm::Radial, 2).unwrap();
            // polar quadrature: int_0^1 K(r) 2 pi r dr
            let m = 200_000;
            let (mass, sq) = (0..m).fold((0.0, 0.0), |(a, b), i| {
                let r = (i as f64 + 0.5) / m as f64;
                let v = k.eval(&[r, 0.0]);
                let w = 2.0 * std::f64::consts::PI * r / m as f64;
                (a + v * w, b + v * v * w)
            });
            assert!((mass - 1.0).abs() < 1e-8, "{base:?} mass {mass}");
            assert!((sq - k.l2_norm_sq()).abs() < 1e-8);
        }
    }

    #[test]
    fn product_kernel_sup_and_norm() {
        let k = Kernel::new(KernelBase::Epanechnikov, KernelForm::Product, 3).unwrap();
        assert!((k.sup_norm() - 0.75f64.powi(3)).abs() < 1e-15);
        assert!((k.l2_norm_sq() - 0.216).abs() < 1e-12);
        assert_eq!(k.box_mass(&[-1.0; 3], &[1.0; 3]), Some(1.0));
    }
}
