//! Brute-force time-ordered propagation, independent of the Sambe machinery.

use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};
use crate::sambe::{Params, PeriodicModel};
use crate::scalar::{expm_hermitian, hermitize, identity, unitarity_defect, CMatrix, Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleScheme {
    /// Product of `exp(−iH(t_mid)Δt)` over uniform substeps.
    Midpoint,
    /// Classical RK4 on `dU/dt = −iH(t)U`.
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Substeps per drive period.
    pub step_count: usize,
    pub scheme: OracleScheme,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { step_count: 20_000, scheme: OracleScheme::Midpoint }
    }
}

#[derive(Clone, Debug)]
pub struct DirectSample<T: Real> {
    pub u_matrix: CMatrix<T>,
    pub unitarity_defect: T,
    pub steps: usize,
}

/// Propagates `U(t)` for an arbitrary Hamiltonian with a fixed step count.
pub fn propagate_fn<T: Real, F>(h_of_t: F, levels: usize, t: T, steps: usize, scheme: OracleScheme) -> CMatrix<T>
where
    F: Fn(T) -> CMatrix<T>,
{
    let steps = steps.max(1);
    let dt = t / T::lit(steps as f64);
    let half = T::lit(0.5);
    let mut u = identity::<T>(levels);
    match scheme {
        OracleScheme::Midpoint => {
            for j in 0..steps {
                let tm = (T::lit(j as f64) + half) * dt;
                u = expm_hermitian(&h_of_t(tm), dt) * u;
            }
        }
        OracleScheme::Rk4 => {
            let minus_i = C::new(T::zero(), -T::one());
            let rhs = |s: T, v: &CMatrix<T>| (h_of_t(s) * v).map(|z| z * minus_i);
            for j in 0..steps {
                let t0 = T::lit(j as f64) * dt;
                let k1 = rhs(t0, &u);
                let k2 = rhs(t0 + half * dt, &(&u + k1.map(|z| z * half * dt)));
                let k3 = rhs(t0 + half * dt, &(&u + k2.map(|z| z * half * dt)));
                let k4 = rhs(t0 + dt, &(&u + k3.map(|z| z * dt)));
                let sixth = dt / T::lit(6.0);
                let two = T::lit(2.0);
                u += (k1 + (k2 + k3).map(|z| z * two) + k4).map(|z| z * sixth);
            }
        }
    }
    u
}

/// Direct `U(t)` of a model from its time-domain Hamiltonian.
pub fn propagate_direct<T: Real>(
    model: &dyn PeriodicModel<T>,
    params: &Params<T>,
    t: T,
    cfg: &OracleConfig,
) -> Result<DirectSample<T>> {
    if t < T::zero() {
        return Err(FloquetError::InvalidArgument(format!("t = {t} < 0")));
    }
    let omega = model.omega(params);
    let periods = t * omega / T::two_pi();
    let steps = ((periods.as_f64() * cfg.step_count as f64).ceil() as usize).max(1);
    let u = propagate_fn(|s| model.hamiltonian(s, params), model.levels(), t, steps, cfg.scheme);
    let defect = unitarity_defect(&u);
    Ok(DirectSample { u_matrix: u, unitarity_defect: defect, steps })
}

/// `i U†(x) [U(x+δ) − U(x−δ)]/(2δ)`, Hermitized.
pub fn generator_direct<T: Real>(
    model: &dyn PeriodicModel<T>,
    params: &Params<T>,
    param: &str,
    t: T,
    delta: T,
    cfg: &OracleConfig,
) -> Result<CMatrix<T>> {
    if delta <= T::zero() {
        return Err(FloquetError::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    let plus = propagate_direct(model, &params.shifted(param, delta)?, t, cfg)?.u_matrix;
    let minus = propagate_direct(model, &params.shifted(param, -delta)?, t, cfg)?.u_matrix;
    let center = propagate_direct(model, params, t, cfg)?.u_matrix;
    let scale = C::new(T::zero(), T::one() / (T::lit(2.0) * delta));
    let h = (center.adjoint() * (plus - minus)).map(|z| z * scale);
    Ok(hermitize(&h))
}
