use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::operators::yosida_op;
use crate::spectral::{Field, Grid2D, Kind};

/// `(u, v, ∂t v)` at time `t`.
#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub u: Field,
    pub v: Field,
    pub vt: Field,
}

impl State {
    /// Validates that all fields share a grid, `u` is complex and `v`, `vt` real.
    pub fn new(t: f64, u: Field, v: Field, vt: Field) -> Result<Self> {
        u.check_same_grid(&v)?;
        u.check_same_grid(&vt)?;
        if v.kind() != Kind::Real || vt.kind() != Kind::Real {
            return invalid("ion-sound fields v and ∂t v must be real");
        }
        let u = if u.kind() == Kind::Complex { u } else { u.to_complex() };
        Ok(Self { t, u, v, vt })
    }

    pub fn zeros(grid: &Arc<Grid2D>) -> Self {
        Self {
            t: 0.0,
            u: Field::zeros(grid, Kind::Complex),
            v: Field::zeros(grid, Kind::Real),
            vt: Field::zeros(grid, Kind::Real),
        }
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.vt.is_finite()
    }

    /// Data `(J_n φ, J_n ψ₀, J_n ψ₁)` of the regularized problem.
    pub fn regularized(&self, n: u64) -> Result<Self> {
        let j = yosida_op(n, self.grid())?;
        Ok(Self {
            t: self.t,
            u: j.apply(&self.u)?,
            v: j.apply(&self.v)?,
            vt: j.apply(&self.vt)?,
        })
    }
}

/// Model and discretization parameters of one run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SystemParams {
    /// Improvement coefficient: 1 for improved Boussinesq, 0 for Zakharov.
    pub eps: f64,
    /// Yosida index `n` of the regularized system; `None` runs the original system.
    pub yosida_n: Option<u64>,
    pub dt: f64,
    /// Dealiased (exactly projected) `|u|²` source; collocation when false.
    pub dealias: bool,
    /// Test hook: `false` switches the coupling terms off.
    pub coupled: bool,
}

impl SystemParams {
    pub fn new(eps: f64, dt: f64) -> Result<Self> {
        let p = Self {
            eps,
            yosida_n: None,
            dt,
            dealias: true,
            coupled: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_yosida(mut self, n: u64) -> Result<Self> {
        self.yosida_n = Some(n);
        self.validate()?;
        Ok(self)
    }

    pub fn uncoupled(mut self) -> Self {
        self.coupled = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eps) {
            return invalid(format!("ε must lie in [0, 1], got {}", self.eps));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("time step must be positive, got {}", self.dt));
        }
        if self.yosida_n == Some(0) {
            return invalid("Yosida index must be ≥ 1");
        }
        Ok(())
    }
}
