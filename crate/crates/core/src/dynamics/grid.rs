use std::f64::consts::TAU;
use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::sequences::{Arc, CompensatedSum};

/// Largest grid accepted (cells in total).
pub const MAX_CELLS: usize = 1 << 26;

/// Samples of an observable at the centers `(i + 1/2)/G` of a uniform grid on
/// the d-torus. Flat index is row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    d: usize,
    g: usize,
    values: Vec<Complex64>,
}

fn cell_count(d: usize, g: usize) -> Result<usize> {
    if d == 0 || g == 0 {
        return Err(LabError::InvalidArgument("grid needs d >= 1 and G >= 1".into()));
    }
    let mut n = 1usize;
    for _ in 0..d {
        n = n
            .checked_mul(g)
            .filter(|&n| n <= MAX_CELLS)
            .ok_or_else(|| LabError::InvalidArgument(format!("grid {g}^{d} too large")))?;
    }
    Ok(n)
}

impl GridFunction {
    pub fn from_values(d: usize, g: usize, values: Vec<Complex64>) -> Result<Self> {
        let n = cell_count(d, g)?;
        if values.len() != n {
            return Err(LabError::InvalidArgument(format!(
                "expected {n} grid values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::InvalidArgument("grid values must be finite".into()));
        }
        Ok(GridFunction { d, g, values })
    }

    /// Sample `f` at every cell center.
    pub fn from_fn(d: usize, g: usize, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let n = cell_count(d, g)?;
        let mut coords = vec![0.0; d];
        let mut values = Vec::with_capacity(n);
        for flat in 0..n {
            let mut rest = flat;
            for axis in (0..d).rev() {
                coords[axis] = ((rest % g) as f64 + 0.5) / g as f64;
                rest /= g;
            }
            values.push(f(&coords));
        }
        GridFunction::from_values(d, g, values)
    }

    pub fn constant(d: usize, g: usize, c: Complex64) -> Result<Self> {
        let n = cell_count(d, g)?;
        GridFunction::from_values(d, g, vec![c; n])
    }

    /// `e^{2πi · freq · x_axis}`, with phases reduced exactly on the grid.
    pub fn exp_axis(d: usize, g: usize, axis: usize, freq: i64) -> Result<Self> {
        if axis >= d {
            return Err(LabError::InvalidArgument(format!("axis {axis} out of range for d = {d}")));
        }
        let n = cell_count(d, g)?;
        let stride = g.pow((d - 1 - axis) as u32);
        let two_g = 2 * g as i128;
        let table: Vec<Complex64> = (0..g)
            .map(|i| {
                // freq · (2i + 1) / (2G) turns
                let num = (freq as i128 * (2 * i as i128 + 1)).rem_euclid(two_g);
                let (s, c) = (TAU * num as f64 / two_g as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        let values = (0..n).map(|flat| table[(flat / stride) % g]).collect();
        GridFunction::from_values(d, g, values)
    }

    /// `e^{2πi y}` on the last (fiber) axis.
    pub fn exp_y(d: usize, g: usize) -> Result<Self> {
        GridFunction::exp_axis(d, g, d - 1, 1)
    }

    /// Indicator of a product of open arcs, one per axis.
    ///
    /// Fails with `ResolutionTooCoarse` when an arc spans fewer than two cells.
    pub fn indicator_box(d: usize, g: usize, arcs: &[Arc]) -> Result<Self> {
        if arcs.len() != d {
            return Err(LabError::InvalidArgument(format!(
                "box needs {d} arcs, got {}",
                arcs.len()
            )));
        }
        for arc in arcs {
            if arc.width() * (g as f64) < 2.0 {
                return Err(LabError::ResolutionTooCoarse {
                    width: arc.width(),
                    grid: g,
                });
            }
        }
        GridFunction::from_fn(d, g, |x| {
            let inside = x.iter().zip(arcs).all(|(&c, arc)| arc.contains_f64(c));
            Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        })
    }

    /// Indicator of the half-open interval `[lo, hi)` on the circle (cells whose center lies inside).
    pub fn indicator_interval(g: usize, lo: f64, hi: f64) -> Result<Self> {
        if (hi - lo) * (g as f64) < 2.0 {
            return Err(LabError::ResolutionTooCoarse { width: hi - lo, grid: g });
        }
        GridFunction::from_fn(1, g, |x| {
            let c = x[0];
            let inside = if lo <= hi { lo <= c && c < hi } else { c >= lo || c < hi };
            Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.d != other.d || self.g != other.g {
            return Err(LabError::InvalidArgument(format!(
                "grid mismatch: {}^{} vs {}^{}",
                self.g, self.d, other.g, other.d
            )));
        }
        Ok(())
    }

    /// Uniform-weight quadrature `∫ f dμ`, compensated and order-fixed.
    pub fn mean(&self) -> Complex64 {
        mean_of(self.values.iter().copied())
    }

    /// `∫ f · conj(h) dμ`
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64> {
        self.same_grid(other)?;
        Ok(row_sums_mean(self.g, self.values.len(), |row| {
            let r = row * self.g..(row + 1) * self.g;
            sum_complex(
                self.values[r.clone()]
                    .iter()
                    .zip(&other.values[r])
                    .map(|(a, b)| a * b.conj()),
            )
        }))
    }

    /// L² norm for the normalized grid measure.
    pub fn norm(&self) -> f64 {
        row_sums_mean(self.g, self.values.len(), |row| {
            let r = row * self.g..(row + 1) * self.g;
            sum_complex(self.values[r].iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)))
        })
        .re
        .sqrt()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFunction {
        GridFunction {
            d: self.d,
            g: self.g,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_grid(other)?;
        Ok(GridFunction {
            d: self.d,
            g: self.g,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// Average over the last axis, broadcast back along it.
    ///
    /// For a skew product this is the projection onto functions of the base
    /// coordinates (the Kronecker-factor part `g` of `f = g + h`).
    pub fn fiber_average(&self) -> GridFunction {
        let g = self.g;
        let mut values = Vec::with_capacity(self.values.len());
        for row in self.values.chunks(g) {
            let m = mean_of(row.iter().copied());
            values.extend(std::iter::repeat_n(m, g));
        }
        GridFunction {
            d: self.d,
            g,
            values,
        }
    }

    /// Split into base part and fiber-mean-zero part, `f = g + h`.
    pub fn kronecker_split(&self) -> (GridFunction, GridFunction) {
        let base = self.fiber_average();
        let rest = self.sub(&base).expect("same grid");
        (base, rest)
    }

    /// Range of the real parts.
    pub fn real_range(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| {
            (lo.min(z.re), hi.max(z.re))
        })
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Raw little-endian `(re, im)` f64 pairs in flat-index order.
    pub fn write_binary(&self, mut out: impl Write) -> Result<()> {
        for z in &self.values {
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(d: usize, g: usize, mut input: impl Read) -> Result<Self> {
        let n = cell_count(d, g)?;
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        if bytes.len() != n * 16 {
            return Err(LabError::Parse(format!(
                "grid file holds {} bytes, expected {} for {g}^{d} complex values",
                bytes.len(),
                n * 16
            )));
        }
        let values = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        GridFunction::from_values(d, g, values)
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub(crate) fn zeros_like(&self) -> GridFunction {
        GridFunction {
            d: self.d,
            g: self.g,
            values: vec![Complex64::new(0.0, 0.0); self.values.len()],
        }
    }
}

pub(crate) fn sum_complex(it: impl Iterator<Item = Complex64>) -> Complex64 {
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    for z in it {
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.value(), im.value())
}

fn mean_of(it: impl ExactSizeIterator<Item = Complex64>) -> Complex64 {
    let n = it.len() as f64;
    sum_complex(it) / n
}

/// Per-row sums computed in parallel, then combined sequentially in row
/// order so the result does not depend on scheduling.
pub(crate) fn row_sums_mean(
    g: usize,
    total: usize,
    row_sum: impl Fn(usize) -> Complex64 + Sync + Send,
) -> Complex64 {
    let rows = total / g;
    let sums: Vec<Complex64> = (0..rows).into_par_iter().map(row_sum).collect();
    sum_complex(sums.into_iter()) / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_and_shapes() {
        let f = GridFunction::from_fn(2, 4, |x| Complex64::new(x[0], x[1])).unwrap();
        assert_eq!(f.len(), 16);
        // flat index 1 is (i0 = 0, i1 = 1)
        assert_eq!(f.values()[1], Complex64::new(0.125, 0.375));
        assert!(GridFunction::constant(2, 0, Complex64::new(1.0, 0.0)).is_err());
        assert!(GridFunction::from_values(1, 4, vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn exp_is_orthonormal() {
        let f = GridFunction::exp_y(2, 9).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-14);
        assert!(f.mean().norm() < 1e-14);
        let x = GridFunction::exp_axis(2, 9, 0, 1).unwrap();
        assert!(f.inner(&x).unwrap().norm() < 1e-14);
    }

    #[test]
    fn indicator_measure_and_resolution() {
        let d = GridFunction::indicator_interval(1000, 0.0, 0.3).unwrap();
        assert!((d.mean().re - 0.3).abs() < 1e-12);
        assert!(matches!(
            GridFunction::indicator_interval(10, 0.0, 0.1),
            Err(LabError::ResolutionTooCoarse { .. })
        ));
        let b = GridFunction::indicator_box(2, 100, &[Arc::new(0.0, 0.5).unwrap(), Arc::new(0.9, 0.1).unwrap()]).unwrap();
        assert!((b.mean().re - 0.1).abs() < 1e-12);
    }

    #[test]
    fn kronecker_split_parts() {
        let f = GridFunction::from_fn(2, 8, |x| Complex64::new(x[0] + (TAU * x[1]).cos(), 0.0)).unwrap();
        let (base, rest) = f.kronecker_split();
        assert!(rest.fiber_average().values().iter().all(|z| z.norm() < 1e-12));
        assert!((base.values()[0].re - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn binary_round_trip() {
        let f = GridFunction::exp_y(2, 5).unwrap();
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 25 * 16);
        assert_eq!(GridFunction::read_binary(2, 5, &buf[..]).unwrap(), f);
        assert!(GridFunction::read_binary(2, 6, &buf[..]).is_err());
    }
}
