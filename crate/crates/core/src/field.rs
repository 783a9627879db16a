//! Real values on a tensor grid `[t_start, t_end] × [0, 1]`.

use crate::error::{Error, Result};
use crate::frac_calc::GridFunction;

/// Row-major `(m+1) × (n+1)` array: row `j` is the spatial slice at
/// `t_j = t_start + j (t_end − t_start)/m`, column `i` the node `ξ_i = i/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    t_start: f64,
    t_end: f64,
    m: usize,
    n: usize,
    values: Vec<f64>,
}

impl SpaceTimeField {
    pub fn new(t_start: f64, t_end: f64, m: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
            return Err(Error::InvalidInterval {
                a: t_start,
                b: t_end,
            });
        }
        if m < 1 {
            return Err(Error::InvalidParameter("time grid needs m >= 1".into()));
        }
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        if values.len() != (m + 1) * (n + 1) {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                (m + 1) * (n + 1),
                values.len()
            )));
        }
        let f = Self {
            t_start,
            t_end,
            m,
            n,
            values,
        };
        f.check_finite()?;
        Ok(f)
    }

    pub fn from_fn(
        t_start: f64,
        t_end: f64,
        m: usize,
        n: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let dt = (t_end - t_start) / m as f64;
        let h = 1.0 / n as f64;
        let mut values = Vec::with_capacity((m + 1) * (n + 1));
        for j in 0..=m {
            let t = if j == m { t_end } else { t_start + j as f64 * dt };
            for i in 0..=n {
                values.push(f(t, i as f64 * h));
            }
        }
        Self::new(t_start, t_end, m, n, values)
    }

    pub fn zeros(t_start: f64, t_end: f64, m: usize, n: usize) -> Result<Self> {
        Self::new(t_start, t_end, m, n, vec![0.0; (m + 1) * (n + 1)])
    }

    /// The same spatial slice at every time node.
    pub fn flat(t_start: f64, t_end: f64, m: usize, slice: &[f64]) -> Result<Self> {
        let n = slice.len().saturating_sub(1);
        let mut values = Vec::with_capacity((m + 1) * slice.len());
        for _ in 0..=m {
            values.extend_from_slice(slice);
        }
        Self::new(t_start, t_end, m, n, values)
    }

    /// Stacks slices of equal length.
    pub fn from_slices(t_start: f64, t_end: f64, slices: &[Vec<f64>]) -> Result<Self> {
        let m = slices.len().saturating_sub(1);
        let n = slices.first().map_or(0, |s| s.len().saturating_sub(1));
        if slices.iter().any(|s| s.len() != n + 1) {
            return Err(Error::GridMismatch("slices of unequal length".into()));
        }
        Self::new(t_start, t_end, m, n, slices.concat())
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(Error::NonFiniteField {
                t_index: k / (self.n + 1),
                xi_index: k % (self.n + 1),
            }),
        }
    }

    #[inline]
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    #[inline]
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Number of time steps.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of spatial cells.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.m as f64
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    #[inline]
    pub fn time(&self, j: usize) -> f64 {
        if j == self.m {
            self.t_end
        } else {
            self.t_start + j as f64 * self.dt()
        }
    }

    #[inline]
    pub fn xi(&self, i: usize) -> f64 {
        if i == self.n {
            1.0
        } else {
            i as f64 * self.h()
        }
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.values[j * (self.n + 1) + i]
    }

    #[inline]
    pub fn slice(&self, j: usize) -> &[f64] {
        let w = self.n + 1;
        &self.values[j * w..(j + 1) * w]
    }

    pub fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n + 1)
    }

    pub fn slice_function(&self, j: usize) -> GridFunction {
        GridFunction::new_unchecked(0.0, 1.0, self.slice(j).to_vec())
            .expect("field grids satisfy the grid invariants")
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.m == other.m
            && self.n == other.n
            && self.t_start == other.t_start
            && self.t_end == other.t_end
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// `c1·self + c2·other` on a shared grid.
    pub fn linear_combination(&self, c1: f64, other: &Self, c2: f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("fields on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| c1 * x + c2 * y)
            .collect();
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.linear_combination(1.0, other, -1.0)
    }

    /// `max |value|` over all nodes.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Time rows `lo..=hi` as a field on `[t_lo, t_hi]`.
    pub fn time_window(&self, lo: usize, hi: usize) -> Result<Self> {
        if hi > self.m || hi <= lo {
            return Err(Error::InvalidParameter(format!("time window {lo}..={hi}")));
        }
        let w = self.n + 1;
        Self::new(
            self.time(lo),
            self.time(hi),
            hi - lo,
            self.n,
            self.values[lo * w..(hi + 1) * w].to_vec(),
        )
    }
}
