use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::grid::{row_sums_mean, sum_complex, GridFunction};
use crate::error::{LabError, Result};
use crate::sequences::{Alpha, FixedPointReal};

/// Closed-form torus maps: a rotation, or an affine skew product over a rotation.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemKind {
    Kronecker,
    /// `T(x, y) = (x + α, y + Σ_l a_l x_l + c)` with integer `a_l`.
    Skew {
        coeffs: Vec<i64>,
        constant: FixedPointReal,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusSystem {
    alphas: Vec<FixedPointReal>,
    kind: SystemKind,
}

impl TorusSystem {
    pub fn kronecker(alphas: Vec<FixedPointReal>) -> Result<Self> {
        let sys = TorusSystem {
            alphas,
            kind: SystemKind::Kronecker,
        };
        sys.check()?;
        Ok(sys)
    }

    pub fn skew(alphas: Vec<FixedPointReal>, coeffs: Vec<i64>, constant: FixedPointReal) -> Result<Self> {
        if coeffs.len() != alphas.len() {
            return Err(LabError::InvalidArgument(
                "skew map needs one integer coefficient per base coordinate".into(),
            ));
        }
        let sys = TorusSystem {
            alphas,
            kind: SystemKind::Skew { coeffs, constant },
        };
        sys.check()?;
        Ok(sys)
    }

    /// Rotation of the circle by `α`.
    pub fn kronecker1d(alpha: &Alpha, frac_bits: u32) -> Result<Self> {
        TorusSystem::kronecker(vec![alpha.render(frac_bits)?])
    }

    /// `(x, y) ↦ (x + α, y + 2x + α)`, so that `T^n(0,0) = (nα, n²α)`.
    pub fn skew_quadratic(alpha: &Alpha, frac_bits: u32) -> Result<Self> {
        let a = alpha.render(frac_bits)?;
        TorusSystem::skew(vec![a.clone()], vec![2], a)
    }

    fn check(&self) -> Result<()> {
        let Some(first) = self.alphas.first() else {
            return Err(LabError::InvalidArgument("system needs at least one rotation".into()));
        };
        let bits = first.frac_bits();
        let constant_bits = match &self.kind {
            SystemKind::Skew { constant, .. } => Some(constant.frac_bits()),
            SystemKind::Kronecker => None,
        };
        if self.alphas.iter().any(|a| a.frac_bits() != bits) || constant_bits.is_some_and(|b| b != bits) {
            return Err(LabError::InvalidArgument(
                "all rotation parameters must share one precision".into(),
            ));
        }
        Ok(())
    }

    /// Torus dimension.
    pub fn d(&self) -> usize {
        match self.kind {
            SystemKind::Kronecker => self.alphas.len(),
            SystemKind::Skew { .. } => self.alphas.len() + 1,
        }
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn alphas(&self) -> &[FixedPointReal] {
        &self.alphas
    }

    pub fn frac_bits(&self) -> u32 {
        self.alphas[0].frac_bits()
    }

    /// Fiber drift `A(t) = Σ_l a_l α_l t(t-1)/2 + t c mod 1`.
    fn fiber_drift(&self, coeffs: &[i64], constant: &FixedPointReal, t: &BigInt) -> Result<FixedPointReal> {
        let tri: BigInt = (t * (t - 1u32)) / 2u32;
        let mut acc = constant.mul_int_mod1(t)?;
        for (a, alpha) in coeffs.iter().zip(&self.alphas) {
            let term = alpha.mul_int_mod1(&(&tri * *a))?;
            acc = acc.add_mod1(&term)?;
        }
        Ok(acc)
    }

    /// `T^t(x0)` in closed form, all coordinates mod 1.
    pub fn iterate(&self, x0: &[FixedPointReal], t: &BigInt) -> Result<Vec<FixedPointReal>> {
        if x0.len() != self.d() {
            return Err(LabError::InvalidArgument(format!(
                "point has {} coordinates, system dimension is {}",
                x0.len(),
                self.d()
            )));
        }
        let mut out = Vec::with_capacity(x0.len());
        for (x, alpha) in x0.iter().zip(&self.alphas) {
            out.push(x.add_mod1(&alpha.mul_int_mod1(t)?)?);
        }
        if let SystemKind::Skew { coeffs, constant } = &self.kind {
            let y = &x0[self.alphas.len()];
            let mut fiber = y.add_mod1(&self.fiber_drift(coeffs, constant, t)?)?;
            for (a, x) in coeffs.iter().zip(x0) {
                fiber = fiber.add_mod1(&x.mul_int_mod1(&(t * *a))?)?;
            }
            out.push(fiber);
        }
        Ok(out)
    }

    /// How `T^t` permutes the cells of a `g`-per-axis grid under nearest-cell
    /// sampling: the image of each cell center is computed exactly and
    /// assigned to the cell containing it.
    pub fn cell_map(&self, t: &BigInt, g: usize) -> Result<CellMap> {
        let mut shifts = Vec::with_capacity(self.d());
        for alpha in &self.alphas {
            shifts.push(nearest_cell_shift(&alpha.mul_int_mod1(t)?, &BigInt::zero(), g));
        }
        match &self.kind {
            SystemKind::Kronecker => Ok(CellMap {
                g,
                d: self.d(),
                shifts,
                shear: Vec::new(),
            }),
            SystemKind::Skew { coeffs, constant } => {
                let drift = self.fiber_drift(coeffs, constant, t)?;
                let total: i64 = coeffs.iter().sum();
                let half_offset = t * total;
                shifts.push(nearest_cell_shift(&drift, &half_offset, g));
                let gb = BigInt::from(g);
                let shear = coeffs
                    .iter()
                    .map(|a| (t * *a).mod_floor(&gb).to_usize().expect("reduced mod g"))
                    .collect();
                Ok(CellMap {
                    g,
                    d: self.d(),
                    shifts,
                    shear,
                })
            }
        }
    }
}

/// `floor(1/2 + h/2 + G·v) mod G` where the image of a cell center picks up an
/// extra `h/2` cells from the shear term (`h = 0` for pure rotations).
fn nearest_cell_shift(v: &FixedPointReal, h: &BigInt, g: usize) -> usize {
    let b = v.frac_bits();
    let two_g = BigInt::from(2 * g);
    let h = h.mod_floor(&two_g);
    let numer: BigInt = (BigInt::from(1u32) + h) * (BigInt::from(1u32) << b)
        + BigInt::from(BigUint::from(2 * g) * v.mantissa());
    let floor = numer >> (b + 1);
    floor.mod_floor(&BigInt::from(g)).to_usize().expect("reduced mod g")
}

/// Cell permutation induced by `T^t` on a uniform grid.
///
/// Cell `(i_1, .., i_{d-1}, j)` maps to `(i_l + s_l, j + Σ_l c_l i_l + s_d)`
/// (mod G), with shear coefficients `c_l` empty for rotations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellMap {
    g: usize,
    d: usize,
    shifts: Vec<usize>,
    shear: Vec<usize>,
}

impl CellMap {
    pub fn shifts(&self) -> &[usize] {
        &self.shifts
    }

    pub fn shear(&self) -> &[usize] {
        &self.shear
    }

    pub fn is_identity(&self) -> bool {
        self.shifts.iter().all(|&s| s == 0) && self.shear.iter().all(|&c| c == 0)
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        if f.d() != self.d || f.g() != self.g {
            return Err(LabError::InvalidArgument(format!(
                "cell map for {}^{} applied to grid {}^{}",
                self.g,
                self.d,
                f.g(),
                f.d()
            )));
        }
        Ok(())
    }

    /// Source row and in-row offset for destination row `row` (rows run over the last axis).
    #[inline]
    fn row_source(&self, row: usize) -> (usize, usize) {
        let g = self.g;
        let base_dims = self.d - 1;
        let mut rest = row;
        let mut src_row = 0usize;
        let mut stride = 1usize;
        let mut shear_sum = 0usize;
        for axis in (0..base_dims).rev() {
            let i = rest % g;
            rest /= g;
            src_row += ((i + self.shifts[axis]) % g) * stride;
            stride *= g;
            if let Some(&c) = self.shear.get(axis) {
                shear_sum = (shear_sum + c * i) % g;
            }
        }
        (src_row, (shear_sum + self.shifts[self.d - 1]) % g)
    }

    /// `f ∘ T^t` on the grid.
    pub fn pullback(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check(f)?;
        let g = self.g;
        let src = f.values();
        let mut out = f.zeros_like();
        out.values_mut()
            .par_chunks_mut(g)
            .enumerate()
            .for_each(|(row, dst)| {
                let (sr, off) = self.row_source(row);
                let s = &src[sr * g..(sr + 1) * g];
                dst[..g - off].copy_from_slice(&s[off..]);
                dst[g - off..].copy_from_slice(&s[..off]);
            });
        Ok(out)
    }

    /// `∫ (f ∘ T^t) · conj(h) dμ` without materializing the pullback.
    pub fn correlate(&self, f: &GridFunction, h: &GridFunction) -> Result<Complex64> {
        self.check(f)?;
        f.same_grid(h)?;
        let g = self.g;
        let (fv, hv) = (f.values(), h.values());
        Ok(row_sums_mean(g, fv.len(), |row| {
            let (sr, off) = self.row_source(row);
            let s = &fv[sr * g..(sr + 1) * g];
            let d = &hv[row * g..(row + 1) * g];
            sum_complex(
                s[off..]
                    .iter()
                    .chain(&s[..off])
                    .zip(d)
                    .map(|(a, b)| a * b.conj()),
            )
        }))
    }
}
