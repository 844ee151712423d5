//! Built-in driven two-level models and their closed-form diagnostics.

use crate::error::{FloquetError, Result};
use crate::sambe::{Params, PeriodicModel};
use crate::scalar::{pauli_x, pauli_y, pauli_z, re, CMatrix, CVector, Real, C};

/// `μ_B/h` in GHz per tesla.
pub const BOHR_GHZ_PER_TESLA: f64 = 13.996;

fn zeros<T: Real>() -> CMatrix<T> {
    CMatrix::zeros(2, 2)
}

fn entry<T: Real>(r: usize, c: usize, v: C<T>) -> CMatrix<T> {
    let mut m = zeros();
    m[(r, c)] = v;
    m
}

/// Ring interferometer: `H(t) = B₀[cos ωt σx + sin ωt σy] − B₁σx`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RashbaModel<T> {
    pub b0: T,
    pub b1: T,
    pub omega: T,
}

impl<T: Real> RashbaModel<T> {
    pub fn new(b0: T, b1: T, omega: T) -> Self {
        Self { b0, b1, omega }
    }

    pub fn period(&self) -> T {
        T::two_pi() / self.omega
    }

    fn read(params: &Params<T>, fallback: &Self) -> Self {
        Self {
            b0: params.get("b0").unwrap_or(fallback.b0),
            b1: params.get("b1").unwrap_or(fallback.b1),
            omega: params.get("omega").unwrap_or(fallback.omega),
        }
    }

    /// Magnitude of the total field, `𝓑(t)`.
    pub fn field_magnitude(&self, t: T) -> T {
        self.field_squared(t).max(T::zero()).sqrt()
    }

    fn field_squared(&self, t: T) -> T {
        let (b0, b1) = (self.b0, self.b1);
        b0 * b0 + b1 * b1 - T::lit(2.0) * b0 * b1 * (self.omega * t).cos()
    }

    /// Direction angle of the total field, `atan2(B₀ sin ωt, B₀ cos ωt − B₁)`.
    pub fn field_angle(&self, t: T) -> T {
        let wt = self.omega * t;
        (self.b0 * wt.sin()).atan2(self.b0 * wt.cos() - self.b1)
    }

    /// `K = −∂_t ϑ`, or `None` where `𝓑` vanishes.
    fn curvature_raw(&self, t: T) -> Option<T> {
        let f2 = self.field_squared(t);
        if f2.sqrt() < T::lit(1e-12) {
            return None;
        }
        let wt = self.omega * t;
        Some(-self.b0 * self.omega * (self.b0 - self.b1 * wt.cos()) / f2)
    }

    /// On the transition line the curvature is `−ω/2` everywhere, including
    /// the isolated zero of the field.
    fn curvature_or_limit(&self, t: T) -> Option<T> {
        self.curvature_raw(t).or_else(|| {
            let scale = T::one().max(self.b0.abs());
            ((self.b0 - self.b1).abs() < T::lit(1e-12) * scale && self.b0 != T::zero())
                .then(|| -self.omega * T::lit(0.5))
        })
    }
}

impl<T: Real> PeriodicModel<T> for RashbaModel<T> {
    fn levels(&self) -> usize {
        2
    }

    fn max_harmonic(&self) -> usize {
        1
    }

    fn params(&self) -> Params<T> {
        Params::new().with("b0", self.b0).with("b1", self.b1).with("omega", self.omega)
    }

    fn omega(&self, params: &Params<T>) -> T {
        params.get("omega").unwrap_or(self.omega)
    }

    fn fourier_component(&self, n: i64, params: &Params<T>) -> CMatrix<T> {
        let m = Self::read(params, self);
        match n {
            0 => pauli_x::<T>() * re(-m.b1),
            1 => entry(1, 0, re(m.b0)),
            -1 => entry(0, 1, re(m.b0)),
            _ => zeros(),
        }
    }

    fn hamiltonian(&self, t: T, params: &Params<T>) -> CMatrix<T> {
        let m = Self::read(params, self);
        let wt = m.omega * t;
        pauli_x::<T>() * re(m.b0 * wt.cos() - m.b1) + pauli_y::<T>() * re(m.b0 * wt.sin())
    }

    fn name(&self) -> &str {
        "rashba"
    }
}

/// Rotating-field benchmark: `H(t) = −B[cos ωt σx + sin ωt σz]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatingFieldModel<T> {
    pub b: T,
    pub omega: T,
}

impl<T: Real> RotatingFieldModel<T> {
    pub fn new(b: T, omega: T) -> Self {
        Self { b, omega }
    }

    pub fn period(&self) -> T {
        T::two_pi() / self.omega
    }

    fn read(params: &Params<T>, fallback: &Self) -> Self {
        Self { b: params.get("b").unwrap_or(fallback.b), omega: params.get("omega").unwrap_or(fallback.omega) }
    }
}

impl<T: Real> PeriodicModel<T> for RotatingFieldModel<T> {
    fn levels(&self) -> usize {
        2
    }

    fn max_harmonic(&self) -> usize {
        1
    }

    fn params(&self) -> Params<T> {
        Params::new().with("b", self.b).with("omega", self.omega)
    }

    fn omega(&self, params: &Params<T>) -> T {
        params.get("omega").unwrap_or(self.omega)
    }

    fn fourier_component(&self, n: i64, params: &Params<T>) -> CMatrix<T> {
        let half = Self::read(params, self).b * T::lit(0.5);
        let plus =
            CMatrix::from_row_slice(2, 2, &[C::new(T::zero(), half), re(-half), re(-half), C::new(T::zero(), -half)]);
        match n {
            0 => zeros(),
            1 => plus,
            -1 => plus.adjoint(),
            _ => zeros(),
        }
    }

    fn hamiltonian(&self, t: T, params: &Params<T>) -> CMatrix<T> {
        let m = Self::read(params, self);
        let wt = m.omega * t;
        (pauli_x::<T>() * re(wt.cos()) + pauli_z::<T>() * re(wt.sin())) * re(-m.b)
    }

    fn name(&self) -> &str {
        "rotating"
    }
}

/// Driven two-level toy: `H(t) = −(Δ/2)σx − ((A cos ωt + ε₀)/2)σz`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyModel<T> {
    pub delta: T,
    pub eps0: T,
    pub amp: T,
    pub omega: T,
}

impl<T: Real> ToyModel<T> {
    fn read(params: &Params<T>, fallback: &Self) -> Self {
        Self {
            delta: params.get("delta").unwrap_or(fallback.delta),
            eps0: params.get("eps0").unwrap_or(fallback.eps0),
            amp: params.get("amp").unwrap_or(fallback.amp),
            omega: params.get("omega").unwrap_or(fallback.omega),
        }
    }
}

impl<T: Real> PeriodicModel<T> for ToyModel<T> {
    fn levels(&self) -> usize {
        2
    }

    fn max_harmonic(&self) -> usize {
        1
    }

    fn params(&self) -> Params<T> {
        Params::new().with("delta", self.delta).with("eps0", self.eps0).with("amp", self.amp).with("omega", self.omega)
    }

    fn omega(&self, params: &Params<T>) -> T {
        params.get("omega").unwrap_or(self.omega)
    }

    fn fourier_component(&self, n: i64, params: &Params<T>) -> CMatrix<T> {
        let m = Self::read(params, self);
        let half = T::lit(0.5);
        match n {
            0 => pauli_x::<T>() * re(-m.delta * half) + pauli_z::<T>() * re(-m.eps0 * half),
            1 | -1 => pauli_z::<T>() * re(-m.amp * T::lit(0.25)),
            _ => zeros(),
        }
    }

    fn hamiltonian(&self, t: T, params: &Params<T>) -> CMatrix<T> {
        let m = Self::read(params, self);
        let half = T::lit(0.5);
        pauli_x::<T>() * re(-m.delta * half) - pauli_z::<T>() * re((m.amp * (m.omega * t).cos() + m.eps0) * half)
    }

    fn name(&self) -> &str {
        "toy"
    }
}

/// Built-in model looked up by registry name, with `params` overriding the
/// defaults (`B₀ = B₁ = 0.5`, `B = 0.5`, `ω = 1`).
pub fn model_by_name(name: &str, params: &Params<f64>) -> Result<Box<dyn PeriodicModel<f64>>> {
    let p = |k: &str, d: f64| params.get(k).unwrap_or(d);
    match name {
        "rashba" => Ok(Box::new(RashbaModel::new(p("b0", 0.5), p("b1", 0.5), p("omega", 1.0)))),
        "rotating" => Ok(Box::new(RotatingFieldModel::new(p("b", 0.5), p("omega", 1.0)))),
        "toy" => Ok(Box::new(ToyModel {
            delta: p("delta", 1.0),
            eps0: p("eps0", 0.0),
            amp: p("amp", 1.0),
            omega: p("omega", 1.0),
        })),
        other => Err(FloquetError::InvalidArgument(format!("unknown model `{other}`"))),
    }
}

/// Instantaneous eigenvalues `E_∓ = ∓𝓑(t)`.
pub fn instantaneous_spectrum<T: Real>(rashba: &RashbaModel<T>, t: T) -> (T, T) {
    let e = rashba.field_magnitude(t);
    (-e, e)
}

/// Driving curvature `K(t) = −∂_t ϑ(t)`.
pub fn driving_curvature<T: Real>(rashba: &RashbaModel<T>, t: T) -> Result<T> {
    rashba.curvature_raw(t).ok_or(FloquetError::VanishingField { t: t.as_f64() })
}

/// Closed-form `(1/2π)∫₀^{t'} K dt` for `t' ∈ (0, T)`.
pub fn winding_partial<T: Real>(rashba: &RashbaModel<T>, t_prime: T) -> Result<T> {
    let (b0, b1, w) = (rashba.b0, rashba.b1, rashba.omega);
    if b0 == b1 {
        return Err(FloquetError::TransitionBoundary(b0.as_f64()));
    }
    let sign = (b0 - b1).signum();
    let half = w * t_prime * T::lit(0.5);
    let arg = (b0 - b1) / (b0 + b1) / half.tan();
    Ok(-w * t_prime / (T::lit(2.0) * T::two_pi()) + arg.atan() / T::two_pi() - T::lit(0.25) / sign)
}

/// The full-period closed form before rounding. At `t' = T` the cotangent
/// diverges to `−∞` from below, so the arctangent term becomes
/// `−(π/2)·sign(B₀ − B₁)`.
pub fn winding_value<T: Real>(rashba: &RashbaModel<T>) -> Result<T> {
    let (b0, b1) = (rashba.b0, rashba.b1);
    if b0 == b1 {
        return Err(FloquetError::TransitionBoundary(b0.as_f64()));
    }
    let sign = (b0 - b1).signum();
    let arctan_limit = -T::frac_pi_2() * sign;
    Ok(-T::lit(0.5) + arctan_limit / T::two_pi() - T::lit(0.25) / sign)
}

/// Winding number `n_K`: `−1` when `B₀ > B₁`, `0` when `B₀ < B₁`.
pub fn winding_number<T: Real>(rashba: &RashbaModel<T>) -> Result<i32> {
    Ok(winding_value(rashba)?.round().as_f64() as i32)
}

/// `(1/2π)∫₀ᵀ K dt` by the periodic trapezoid with `points` nodes.
pub fn winding_quadrature<T: Real>(rashba: &RashbaModel<T>, points: usize) -> Result<T> {
    let h = rashba.period() / T::lit(points as f64);
    let mut acc = T::zero();
    for j in 0..points {
        acc += driving_curvature(rashba, T::lit(j as f64) * h)?;
    }
    Ok(acc * h / T::two_pi())
}

/// Berry phase `Ω/2 = π(1 − cos θ)` of a cone with half-angle `θ`.
pub fn berry_phase<T: Real>(theta: T) -> T {
    T::pi() * (T::one() - theta.cos())
}

/// Adiabatic-limit Berry phase, `θ = π/2`.
pub fn berry_phase_adiabatic<T: Real>() -> T {
    T::pi()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseReport<T> {
    pub gamma_a: T,
    pub d: T,
    pub total: T,
    pub quadrature_points: usize,
}

/// Aharonov–Anandan and dynamical phases over one period.
pub fn total_phase<T: Real>(rashba: &RashbaModel<T>, hbar: T, quad_points: usize) -> Result<PhaseReport<T>> {
    if quad_points < 64 {
        return Err(FloquetError::InvalidArgument(format!("quad_points = {quad_points} < 64")));
    }
    let h = rashba.period() / T::lit(quad_points as f64);
    let (mut k_int, mut nonad, mut dyn_int) = (T::zero(), T::zero(), T::zero());
    let tiny = T::lit(1e-12);
    for j in 0..quad_points {
        let t = T::lit(j as f64) * h;
        let f2 = rashba.field_squared(t).max(T::zero());
        let k = rashba.curvature_or_limit(t).ok_or(FloquetError::SingularIntegrand { t: t.as_f64() })?;
        let root = (T::lit(4.0) * f2 + hbar * hbar * k * k).sqrt();
        if root < tiny {
            return Err(FloquetError::SingularIntegrand { t: t.as_f64() });
        }
        k_int += k;
        nonad += hbar * k * k / root;
        dyn_int += T::lit(2.0) * f2 / root;
    }
    let half = T::lit(0.5);
    let gamma_a = half * k_int * h - half * nonad * h;
    let d = -dyn_int * h / hbar;
    Ok(PhaseReport { gamma_a, d, total: gamma_a + d, quadrature_points: quad_points })
}

/// Effective field `{0, 2𝓑/ħ, K}` in the Frenet–Serret frame.
pub fn spin_texture_field<T: Real>(rashba: &RashbaModel<T>, t: T, hbar: T) -> Result<[T; 3]> {
    let k = driving_curvature(rashba, t)?;
    Ok([T::zero(), T::lit(2.0) * rashba.field_magnitude(t) / hbar, k])
}

fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Fixed-step RK4 integration of `∂_t s = H_eff × s`; returns `steps + 1`
/// samples including the initial one.
pub fn precess_spin<T: Real>(
    rashba: &RashbaModel<T>,
    s0: [T; 3],
    t_end: T,
    steps: usize,
    hbar: T,
) -> Result<Vec<[T; 3]>> {
    let h = t_end / T::lit(steps as f64);
    let half = T::lit(0.5);
    let rhs = |t: T, s: [T; 3]| -> Result<[T; 3]> { Ok(cross(spin_texture_field(rashba, t, hbar)?, s)) };
    let axpy = |s: [T; 3], k: [T; 3], a: T| [s[0] + a * k[0], s[1] + a * k[1], s[2] + a * k[2]];
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = s0;
    out.push(s);
    for j in 0..steps {
        let t = T::lit(j as f64) * h;
        let k1 = rhs(t, s)?;
        let k2 = rhs(t + half * h, axpy(s, k1, half * h))?;
        let k3 = rhs(t + half * h, axpy(s, k2, half * h))?;
        let k4 = rhs(t + h, axpy(s, k3, h))?;
        let sixth = h / T::lit(6.0);
        for i in 0..3 {
            s[i] += sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
        }
        out.push(s);
    }
    Ok(out)
}

/// `σ_T(t)`, `σ_N(t)` of the Frenet–Serret frame attached to the field.
pub fn frenet_serret_operators<T: Real>(rashba: &RashbaModel<T>, t: T) -> (CMatrix<T>, CMatrix<T>) {
    let a = rashba.field_angle(t);
    let sigma_t = pauli_x::<T>() * re(a.sin()) - pauli_y::<T>() * re(a.cos());
    let sigma_n = pauli_x::<T>() * re(a.cos()) + pauli_y::<T>() * re(a.sin());
    (sigma_t, sigma_n)
}

/// Which rotating-field generator to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RotatingParam {
    B,
    Omega,
}

fn check_one_period<T: Real>(rf: &RotatingFieldModel<T>, t: T) -> Result<T> {
    let period = rf.period();
    if (t - period).abs() > T::lit(1e-9) * period {
        return Err(FloquetError::InvalidArgument(format!("closed forms hold at t = T = {period}, got {t}")));
    }
    Ok(period)
}

/// `h_B(T)` or `h_ω(T)` of the rotating-field model as a Pauli combination.
pub fn rotating_generator_analytic<T: Real>(
    rf: &RotatingFieldModel<T>,
    param: RotatingParam,
    t: T,
) -> Result<CMatrix<T>> {
    let tp = check_one_period(rf, t)?;
    let (b, w) = (rf.b, rf.omega);
    let two = T::lit(2.0);
    let s = T::lit(4.0) * b * b + w * w;
    let r = s.sqrt();
    let s32 = s * r;
    let (sn, cs) = ((tp * r).sin(), (tp * r).cos());
    let (cx, cy, cz) = match param {
        RotatingParam::B => (
            -(T::lit(4.0) * b * b * tp / s + w * w * sn / s32),
            two * b * w * (tp / s - sn / s32),
            -w * (T::one() - cs) / s,
        ),
        RotatingParam::Omega => {
            let common = b * (sn / s32 - tp * cs / s);
            (common * w, common * two * b, b * (-tp * sn / r + (T::one() - cs) / s))
        }
    };
    Ok(pauli_x::<T>() * re(cx) + pauli_y::<T>() * re(cy) + pauli_z::<T>() * re(cz))
}

/// Closed-form spread bounds `I_B^M` and `I_ω^M` at `t = T`.
pub fn rotating_bound_analytic<T: Real>(rf: &RotatingFieldModel<T>, param: RotatingParam, t: T) -> Result<T> {
    let tp = check_one_period(rf, t)?;
    let (b, w) = (rf.b, rf.omega);
    let s = T::lit(4.0) * b * b + w * w;
    let r = s.sqrt();
    let (sn, cs) = ((tp * r).sin(), (tp * r).cos());
    let b2 = b * b;
    Ok(match param {
        RotatingParam::B => T::lit(16.0) * b2 * tp * tp / s + T::lit(8.0) * w * w * (T::one() - cs) / (s * s),
        RotatingParam::Omega => {
            T::lit(4.0) * b2 * tp * tp / s - T::lit(8.0) * b2 * tp * sn / (s * r)
                + T::lit(8.0) * b2 * (T::one() - cs) / (s * s)
        }
    })
}

/// Default probe `(|0⟩ − |1⟩)/√2`.
pub fn default_probe<T: Real>() -> CVector<T> {
    let a = T::lit(0.5).sqrt();
    CVector::from_vec(vec![re(a), re(-a)])
}

/// Closed-form `Ω_{Bω}` at `t = T` for the default probe only.
pub fn rotating_incompatibility_analytic<T: Real>(rf: &RotatingFieldModel<T>, t: T, probe: &CVector<T>) -> Result<T> {
    let overlap = default_probe::<T>().dotc(probe).norm_sqr().sqrt();
    if probe.len() != 2 || (overlap - T::one()).abs() > T::lit(1e-10) {
        return Err(FloquetError::InvalidArgument(
            "the closed-form incompatibility holds for the (|0⟩−|1⟩)/√2 probe only".into(),
        ));
    }
    let tp = check_one_period(rf, t)?;
    let (b, w) = (rf.b, rf.omega);
    let s = T::lit(4.0) * b * b + w * w;
    let r = s.sqrt();
    let (sn, cs) = ((tp * r).sin(), (tp * r).cos());
    let b2 = b * b;
    Ok(T::lit(8.0) * b2 * tp * w * (cs - T::one()) / (s * s) + T::lit(4.0) * b2 * tp * tp * w * sn / (s * r))
}

/// Physical field strengths `(B_ac, B_dc)` in tesla for drive frequency
/// `f_ghz` and effective g-factor `g_factor`.
pub fn unit_mapping(f_ghz: f64, g_factor: f64) -> Result<(f64, f64)> {
    if f_ghz <= 0.0 || g_factor == 0.0 || !f_ghz.is_finite() || !g_factor.is_finite() {
        return Err(FloquetError::InvalidArgument(format!("f = {f_ghz} GHz, g = {g_factor}")));
    }
    let b = f_ghz / (BOHR_GHZ_PER_TESLA * g_factor.abs());
    Ok((b, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sambe::fourier_components_from_timedomain;
    use crate::scalar::{eigvalsh, hermiticity_defect, max_abs_diff};
    use std::f64::consts::PI;

    #[test]
    fn rashba_fourier_reassembly() {
        let m = RashbaModel::<f64>::new(0.7, 0.4, 1.3);
        let p = m.params();
        for j in 0..16 {
            let t = 0.37 * j as f64;
            let direct = m.hamiltonian(t, &p);
            let mut sum = CMatrix::zeros(2, 2);
            for n in -1..=1 {
                sum += m.fourier_component(n, &p) * crate::scalar::cis(n as f64 * 1.3 * t);
            }
            assert!(max_abs_diff(&direct, &sum) < 1e-14);
        }
        let q = fourier_components_from_timedomain(|t| m.hamiltonian(t, &p), 1.3, 1, 32).unwrap();
        for n in -1..=1 {
            assert!(max_abs_diff(q.component(n).unwrap(), &m.fourier_component(n, &p)) < 1e-13);
        }
        for j in 0..16 {
            let t = 0.91 * j as f64 + 0.1;
            assert!(max_abs_diff(&q.reassemble(1.3, t), &m.hamiltonian(t, &p)) < 1e-12);
        }
    }

    #[test]
    fn rotating_fourier_reassembly() {
        let m = RotatingFieldModel::<f64>::new(0.8, 0.9);
        let p = m.params();
        let q = fourier_components_from_timedomain(|t| m.hamiltonian(t, &p), 0.9, 1, 16).unwrap();
        for n in -1..=1 {
            assert!(max_abs_diff(q.component(n).unwrap(), &m.fourier_component(n, &p)) < 1e-13);
        }
    }

    #[test]
    fn spectrum_examples() {
        let (lo, hi) = instantaneous_spectrum(&RashbaModel::<f64>::new(1.0, 1.0, 1.0), 0.0);
        assert_eq!((lo, hi), (0.0, 0.0));
        for t in [0.0, 1.0, 2.5] {
            let (lo, hi) = instantaneous_spectrum(&RashbaModel::<f64>::new(1.0, 0.0, 1.0), t);
            assert!((lo + 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
            let a = instantaneous_spectrum(&RashbaModel::<f64>::new(0.3, 1.7, 1.0), t);
            let b = instantaneous_spectrum(&RashbaModel::<f64>::new(1.7, 0.3, 1.0), t);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn spectrum_matches_hamiltonian_eigenvalues() {
        let m = RashbaModel::<f64>::new(0.9, 0.35, 1.0);
        for t in [0.1, 1.4, 3.0] {
            let ev = eigvalsh(&m.hamiltonian(t, &m.params()));
            let (lo, hi) = instantaneous_spectrum(&m, t);
            assert!((ev[0] - lo).abs() < 1e-12 && (ev[1] - hi).abs() < 1e-12);
        }
    }

    #[test]
    fn curvature_limits() {
        let m = RashbaModel::<f64>::new(1.2, 0.0, 0.8);
        assert!((driving_curvature(&m, 0.7).unwrap() + 0.8).abs() < 1e-14);
        let m = RashbaModel::<f64>::new(0.0, 1.0, 0.8);
        assert_eq!(driving_curvature(&m, 0.7).unwrap(), 0.0);
        assert!(driving_curvature(&RashbaModel::<f64>::new(1.0, 1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn curvature_is_minus_angle_derivative() {
        let m = RashbaModel::<f64>::new(0.8, 0.5, 1.0);
        let h = 1e-5;
        for t in [0.3, 2.0, 5.0] {
            let mut d = m.field_angle(t + h) - m.field_angle(t - h);
            if d > PI {
                d -= 2.0 * PI;
            } else if d < -PI {
                d += 2.0 * PI;
            }
            assert!((driving_curvature(&m, t).unwrap() + d / (2.0 * h)).abs() < 1e-8);
        }
    }

    #[test]
    fn winding_regimes() {
        assert_eq!(winding_number(&RashbaModel::<f64>::new(2.0, 1.0, 1.0)).unwrap(), -1);
        assert_eq!(winding_number(&RashbaModel::<f64>::new(1.0, 2.0, 1.0)).unwrap(), 0);
        assert!(matches!(
            winding_number(&RashbaModel::<f64>::new(1.0, 1.0, 1.0)),
            Err(FloquetError::TransitionBoundary(_))
        ));
        for (b0, b1) in [(2.0, 1.0), (1.0, 2.0), (0.6, 0.5)] {
            let m = RashbaModel::<f64>::new(b0, b1, 1.0);
            let q = winding_quadrature(&m, 512).unwrap();
            assert!((q - winding_value(&m).unwrap()).abs() < 1e-8, "{b0} {b1} {q}");
        }
    }

    #[test]
    fn partial_winding_approaches_full_period() {
        for (b0, b1) in [(2.0, 1.0), (1.0, 2.0)] {
            let m = RashbaModel::<f64>::new(b0, b1, 1.0);
            let near = winding_partial(&m, m.period() * (1.0 - 1e-9)).unwrap();
            assert!((near - winding_value(&m).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn berry_phase_values() {
        assert_eq!(berry_phase_adiabatic::<f64>(), PI);
        assert!((berry_phase(PI / 2.0) - PI).abs() < 1e-15);
        assert_eq!(berry_phase(0.0), 0.0);
        assert!((berry_phase(PI) - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn static_field_phases() {
        // B₀ = 0: no curvature, dynamical phase −∫𝓑 dt of the ground mode.
        let m = RashbaModel::<f64>::new(0.0, 0.7, 1.0);
        let r = total_phase(&m, 1.0, 1024).unwrap();
        assert_eq!(r.gamma_a, 0.0);
        let expected: f64 = -0.7 * m.period();
        assert!((r.d - expected).abs() < 1e-6);
        assert_eq!(r.total, r.gamma_a + r.d);
        assert!(total_phase(&RashbaModel::<f64>::new(0.0, 0.0, 1.0), 1.0, 1024).is_err());
        assert!(total_phase(&m, 1.0, 32).is_err());
    }

    #[test]
    fn total_phase_is_defined_on_the_transition_line() {
        let r = total_phase(&RashbaModel::<f64>::new(1.0, 1.0, 1.0), 1.0, 1024).unwrap();
        assert!(r.total.is_finite());
    }

    #[test]
    fn phase_dislocation_on_the_diagonal() {
        let total = |b0: f64, b1: f64| total_phase(&RashbaModel::<f64>::new(b0, b1, 1.0), 1.0, 1024).unwrap().total;
        let b1 = 1.5;
        let h = 0.01;
        let slope = |b0: f64| (total(b0 + h / 2.0, b1) - total(b0 - h / 2.0, b1)) / h;
        let jump = (slope(b1 + 2.0 * h) - slope(b1 - 2.0 * h)).abs();
        let far = slope(b1 + 0.8).abs().max(slope(b1 - 0.8).abs());
        let far_change = (slope(b1 + 0.8) - slope(b1 + 0.8 - 4.0 * h)).abs();
        assert!(jump > 10.0 * far_change, "jump {jump} far {far} change {far_change}");
    }

    #[test]
    fn spin_texture_examples() {
        let m = RashbaModel::<f64>::new(0.9, 0.0, 1.0);
        let f = spin_texture_field(&m, 0.4, 1.0).unwrap();
        assert!(f[0] == 0.0 && (f[1] - 1.8).abs() < 1e-14 && (f[2] + 1.0).abs() < 1e-14);
        let m = RashbaModel::<f64>::new(0.8, 0.3, 1.0);
        let norm = |s: [f64; 3]| (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        let s0 = [0.6, 0.0, 0.8];
        let traj = precess_spin(&m, s0, m.period(), 4000, 1.0).unwrap();
        assert!((norm(*traj.last().unwrap()) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rotating_analytic_forms_are_consistent() {
        for b in [0.0, 0.1, 0.5, 1.3, 2.0] {
            let rf = RotatingFieldModel::<f64>::new(b, 1.0);
            let t = rf.period();
            for (param, sel) in [(RotatingParam::B, 0), (RotatingParam::Omega, 1)] {
                let h = rotating_generator_analytic(&rf, param, t).unwrap();
                assert_eq!(hermiticity_defect(&h), 0.0);
                let ev = eigvalsh(&h);
                let spread = (ev[1] - ev[0]).powi(2);
                let bound = rotating_bound_analytic(&rf, param, t).unwrap();
                assert!((spread - bound).abs() <= 1e-10 * bound.max(1.0), "{b} {sel} {spread} {bound}");
            }
            assert!(rotating_generator_analytic(&rf, RotatingParam::B, 1.0).is_err());
        }
        let h = rotating_generator_analytic(&RotatingFieldModel::<f64>::new(0.0, 1.0), RotatingParam::Omega, 2.0 * PI)
            .unwrap();
        assert_eq!(crate::scalar::max_abs(&h), 0.0);
        let rf = RotatingFieldModel::<f64>::new(0.5, 1.0);
        let ib = rotating_bound_analytic(&rf, RotatingParam::B, rf.period()).unwrap();
        assert!((ib - 82.67).abs() < 0.01);
    }

    #[test]
    fn rotating_incompatibility_decays() {
        let probe = default_probe::<f64>();
        let zero = RotatingFieldModel::<f64>::new(0.0, 1.0);
        assert_eq!(rotating_incompatibility_analytic(&zero, zero.period(), &probe).unwrap(), 0.0);
        let big = RotatingFieldModel::<f64>::new(50.0, 1.0);
        let small = RotatingFieldModel::<f64>::new(0.5, 1.0);
        let ob = rotating_incompatibility_analytic(&big, big.period(), &probe).unwrap().abs();
        let os = rotating_incompatibility_analytic(&small, small.period(), &probe).unwrap().abs();
        assert!(ob < 0.1 * os);
        let other = CVector::from_vec(vec![re(1.0), re(0.0)]);
        assert!(rotating_incompatibility_analytic(&small, small.period(), &other).is_err());
    }

    #[test]
    fn unit_mapping_values() {
        for (f, expected) in [(10.0, 0.18), (20.0, 0.36), (60.0, 1.07)] {
            let (ac, dc) = unit_mapping(f, -4.0).unwrap();
            assert!((ac - expected).abs() < 0.01 && ac == dc);
        }
        assert!(unit_mapping(0.0, 4.0).is_err());
        assert!(unit_mapping(10.0, 0.0).is_err());
    }
}
