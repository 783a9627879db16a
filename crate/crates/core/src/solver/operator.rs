//! `F(Y)(t, ξ) = φ(ξ) + ∫_{t_0}^t ∫_0^ξ A(Y(s, γ)) dg_γ ds` on a time window.

use crate::error::{Error, Result};
use crate::fbm::DrivingField;
use crate::field::SpaceTimeField;
use crate::par;

use super::coefficient::Coefficient;

/// The fixed-point map on the window that starts at driver time node
/// `t0_index`. Inner integrals use the driver's right-derivative tables; the
/// outer time integral uses the trapezoid rule.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointOperator<'a> {
    pub phi: &'a [f64],
    pub coeff: &'a Coefficient,
    pub driver: &'a DrivingField,
    pub t0_index: usize,
}

impl<'a> FixedPointOperator<'a> {
    pub fn new(phi: &'a [f64], coeff: &'a Coefficient, driver: &'a DrivingField, t0_index: usize) -> Self {
        Self {
            phi,
            coeff,
            driver,
            t0_index,
        }
    }

    fn check(&self, y: &SpaceTimeField) -> Result<()> {
        let g = self.driver.field();
        if y.n() != g.n() || self.phi.len() != g.n() + 1 {
            return Err(Error::GridMismatch("spatial grids of Y, phi and g differ".into()));
        }
        if self.t0_index + y.m() > g.m() {
            return Err(Error::GridMismatch("window runs past the driver horizon".into()));
        }
        let start = g.time(self.t0_index);
        let end = g.time(self.t0_index + y.m());
        let tol = 1e-9 * g.t_end().abs().max(1.0);
        if (y.t_start() - start).abs() > tol || (y.t_end() - end).abs() > tol {
            return Err(Error::GridMismatch(format!(
                "window [{}, {}] is not aligned with driver nodes [{start}, {end}]",
                y.t_start(),
                y.t_end()
            )));
        }
        Ok(())
    }

    /// `∫_0^{ξ_i} A(Y(t_j, ·)) dg` for every window node `(j, i)`.
    pub fn inner_integrals(&self, y: &SpaceTimeField) -> Result<Vec<Vec<f64>>> {
        self.check(y)?;
        let rows = par::map_indexed(y.m() + 1, |j| -> Result<Vec<f64>> {
            let a: Vec<f64> = y.slice(j).iter().map(|&v| self.coeff.eval(v)).collect();
            if let Some(i) = a.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteField {
                    t_index: self.t0_index + j,
                    xi_index: i,
                });
            }
            let table = self.driver.table(self.t0_index + j)?;
            Ok(table.integrals_from_zero(&a))
        });
        rows.into_iter().collect()
    }

    pub fn apply(&self, y: &SpaceTimeField) -> Result<SpaceTimeField> {
        let inner = self.inner_integrals(y)?;
        let half = 0.5 * y.dt();
        let mut acc = vec![0.0; self.phi.len()];
        let mut values = Vec::with_capacity((y.m() + 1) * self.phi.len());
        values.extend_from_slice(self.phi);
        for j in 1..=y.m() {
            for (i, a) in acc.iter_mut().enumerate() {
                *a += half * (inner[j - 1][i] + inner[j][i]);
            }
            values.extend(self.phi.iter().zip(&acc).map(|(p, a)| p + a));
        }
        let out = SpaceTimeField::new(y.t_start(), y.t_end(), y.m(), y.n(), values)?;
        out.check_finite()?;
        Ok(out)
    }
}

/// `F(Y)` on `[0, T]` with initial condition `phi`.
pub fn apply_f(
    y: &SpaceTimeField,
    phi: &[f64],
    coeff: &Coefficient,
    driver: &DrivingField,
) -> Result<SpaceTimeField> {
    FixedPointOperator::new(phi, coeff, driver, 0).apply(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::DriverStub;
    use crate::FractionalOrder;

    fn setup(stub: DriverStub) -> DrivingField {
        DrivingField::stub(stub, 8, 32, 0.4, FractionalOrder::new(0.3).unwrap()).unwrap()
    }

    #[test]
    fn zero_coefficient_returns_phi() {
        let g = setup(DriverStub::Sine);
        let phi: Vec<f64> = (0..=32).map(|i| (i as f64 / 32.0).sin()).collect();
        let y = SpaceTimeField::from_fn(0.0, 0.4, 8, 32, |t, x| t * x + 3.0).unwrap();
        let f = apply_f(&y, &phi, &Coefficient::Zero, &g).unwrap();
        for s in f.slices() {
            assert_eq!(s, &phi[..]);
        }
    }

    #[test]
    fn constant_coefficient_closed_form() {
        let g = setup(DriverStub::Polynomial);
        let phi = vec![0.5; 33];
        let y = SpaceTimeField::zeros(0.0, 0.4, 8, 32).unwrap();
        let f = apply_f(&y, &phi, &Coefficient::Const { value: 2.0 }, &g).unwrap();
        for j in 0..=8 {
            for i in 0..=32 {
                let expected = 0.5 + 2.0 * f.time(j) * g.field().get(0, i);
                assert!((f.get(j, i) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn odd_coefficient_fixes_zero() {
        let g = setup(DriverStub::Linear);
        let phi = vec![0.0; 33];
        let y = SpaceTimeField::zeros(0.0, 0.4, 8, 32).unwrap();
        let f = apply_f(&y, &phi, &Coefficient::Tanh { scale: 1.0 }, &g).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn misaligned_window_is_rejected() {
        let g = setup(DriverStub::Linear);
        let phi = vec![0.0; 33];
        let y = SpaceTimeField::zeros(0.0, 0.3, 8, 32).unwrap();
        assert!(apply_f(&y, &phi, &Coefficient::Zero, &g).is_err());
        let y = SpaceTimeField::zeros(0.05, 0.15, 2, 32).unwrap();
        let op = FixedPointOperator::new(&phi, &Coefficient::Zero, &g, 1);
        assert!(op.apply(&y).is_ok());
    }
}
