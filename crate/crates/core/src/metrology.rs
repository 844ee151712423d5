//! Finite-difference generators, their three-way split, and the Fisher
//! information quantities built from them.
//!
//! Generators are taken in the form `h = i U†(x) ∂U`, whose variance on the
//! prepared probe `|ψ₀⟩` is the QFI of the evolved state `U|ψ₀⟩`.

use std::ops::Range;

use serde::Serialize;

use crate::error::{FloquetError, Result};
use crate::propagator::{mapped_back, DEFAULT_DEFECT_TOL};
use crate::sambe::{build_floquet_matrix_at, Params, PeriodicModel};
use crate::scalar::{eigvalsh, hermiticity_defect, hermitize, state_norm, unitarity_defect, CMatrix, CVector, Real, C};
use crate::spectral::{diagonalize, FloquetSpectrum, EDGE_WEIGHT};

pub const DEFAULT_DELTA: f64 = 1e-6;
/// Sorted eigenvalues closer than this are differenced as one subspace.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-3;
/// Pairing overlap below which a split is marked gauge-unreliable.
pub const GAUGE_RELIABLE_OVERLAP: f64 = 0.95;
/// Pairing overlap below which an interior subspace aborts the split.
pub const PAIRING_ABORT_OVERLAP: f64 = 0.5;
pub const DEFAULT_SMOOTH_WINDOW: usize = 21;
/// Outcomes less likely than this are left out of the CFI sum.
pub const CFI_PROBABILITY_FLOOR: f64 = 1e-12;
/// Slack on the decomposition and ordering invariants.
pub const INVARIANT_SLACK: f64 = 1e-6;

fn scale<T: Real>(m: &CMatrix<T>, z: C<T>) -> CMatrix<T> {
    m.map(|v| v * z)
}

/// Spectra at `x_ℓ ± δ` for one parameter.
#[derive(Clone, Debug)]
pub struct ShiftedSpectra<T: Real> {
    pub param: String,
    pub delta: T,
    pub plus: FloquetSpectrum<T>,
    pub minus: FloquetSpectrum<T>,
}

pub fn spectrum_at<T: Real>(
    model: &dyn PeriodicModel<T>,
    params: &Params<T>,
    n_cut: usize,
) -> Result<FloquetSpectrum<T>> {
    diagonalize(&build_floquet_matrix_at(model, params, n_cut)?)
}

impl<T: Real> ShiftedSpectra<T> {
    /// Rebuilds and rediagonalizes the Floquet matrix at `x_ℓ ± δ`; a shift
    /// of the drive frequency moves the diagonal ladder too.
    pub fn build(
        model: &dyn PeriodicModel<T>,
        params: &Params<T>,
        param: &str,
        delta: T,
        n_cut: usize,
    ) -> Result<Self> {
        if delta <= T::zero() {
            return Err(FloquetError::InvalidArgument(format!("delta = {delta} must be positive")));
        }
        let plus = spectrum_at(model, &params.shifted(param, delta)?, n_cut)?;
        let minus = spectrum_at(model, &params.shifted(param, -delta)?, n_cut)?;
        Ok(Self { param: param.to_string(), delta, plus, minus })
    }

    /// `∂ω/∂x_ℓ` by the same central difference.
    pub fn omega_derivative(&self) -> T {
        (self.plus.omega - self.minus.omega) / (T::lit(2.0) * self.delta)
    }
}

/// Total generator for one parameter.
#[derive(Clone, Debug)]
pub struct Generator<T: Real> {
    pub param: String,
    pub time: T,
    pub fd_step: T,
    /// Hermitized `i U† ∂U`.
    pub h: CMatrix<T>,
    /// `‖h − h†‖_max` before symmetrization.
    pub hermiticity_defect: T,
    /// `U(x, t)`.
    pub u: CMatrix<T>,
    /// `[U(x+δ) − U(x−δ)]/(2δ)`.
    pub du: CMatrix<T>,
}

/// The eigenmode, quasienergy and multi-photon parts of one generator.
#[derive(Clone, Debug)]
pub struct GeneratorComponents<T: Real> {
    /// `i U† ∂U_α`, `i U† ∂U_ε`, `i U† ∂U_ω` (not individually Hermitian).
    pub eigenmode: CMatrix<T>,
    pub quasienergy: CMatrix<T>,
    pub multiphoton: CMatrix<T>,
    /// The matching pieces of `∂U`.
    pub du_eigenmode: CMatrix<T>,
    pub du_quasienergy: CMatrix<T>,
    pub du_multiphoton: CMatrix<T>,
    /// Smallest subspace overlap `tr(P₊P₋)/dim` over interior clusters.
    pub min_overlap: T,
    pub gauge_unreliable: bool,
    pub stroboscopic: bool,
}

impl<T: Real> GeneratorComponents<T> {
    pub fn du_sum(&self) -> CMatrix<T> {
        &self.du_eigenmode + &self.du_quasienergy + &self.du_multiphoton
    }

    pub fn sum(&self) -> CMatrix<T> {
        &self.eigenmode + &self.quasienergy + &self.multiphoton
    }
}

#[derive(Clone, Debug)]
pub struct GeneratorSet<T: Real> {
    pub total: Generator<T>,
    pub components: Option<GeneratorComponents<T>>,
}

fn heisenberg<T: Real>(u: &CMatrix<T>, du: &CMatrix<T>) -> CMatrix<T> {
    scale(&(u.adjoint() * du), C::new(T::zero(), T::one()))
}

/// Total generator `h_ℓ(t)` from the spectra at `x` and `x ± δ`.
pub fn generator<T: Real>(center: &FloquetSpectrum<T>, shifted: &ShiftedSpectra<T>, t: T) -> Generator<T> {
    let u = mapped_back(center, t, 0);
    let up = mapped_back(&shifted.plus, t, 0);
    let um = mapped_back(&shifted.minus, t, 0);
    let du = scale(&(up - um), C::new(T::one() / (T::lit(2.0) * shifted.delta), T::zero()));
    let raw = heisenberg(&u, &du);
    let defect = hermiticity_defect(&raw);
    if defect > T::lit(1e-4) {
        log::warn!(
            "generator for `{}` at t = {t}: pre-symmetrization defect {defect:e} (step size {})",
            shifted.param,
            shifted.delta
        );
    }
    Generator {
        param: shifted.param.clone(),
        time: t,
        fd_step: shifted.delta,
        h: hermitize(&raw),
        hermiticity_defect: defect,
        u,
        du,
    }
}

/// Builds the spectra and returns the total generator.
pub fn generator_for<T: Real>(
    model: &dyn PeriodicModel<T>,
    params: &Params<T>,
    param: &str,
    t: T,
    delta: T,
    n_cut: usize,
) -> Result<Generator<T>> {
    let center = spectrum_at(model, params, n_cut)?;
    let shifted = ShiftedSpectra::build(model, params, param, delta, n_cut)?;
    Ok(generator(&center, &shifted, t))
}

/// `Σ_{α∈c} w_α (Σ_k φ_k ⟨·,k|λ_α⟩⟩) ⟨⟨λ_α|·,0⟩` for a cluster `c`.
struct ClusterSums<'a, T: Real> {
    spectrum: &'a FloquetSpectrum<T>,
    input: CMatrix<T>,
}

impl<'a, T: Real> ClusterSums<'a, T> {
    fn new(spectrum: &'a FloquetSpectrum<T>) -> Self {
        Self { spectrum, input: spectrum.sector_rows(0) }
    }

    /// `Σ_k φ_k V_k`, an `N × dim` matrix.
    fn phased_rows(&self, phases: &[C<T>]) -> CMatrix<T> {
        let s = self.spectrum;
        let cut = s.n_cut as i64;
        let mut out = CMatrix::zeros(s.levels, s.dim());
        for (k, phase) in (-cut..=cut).zip(phases) {
            let r = s.sector_range(k);
            out += s.eigenvectors.rows(r.start, s.levels).map(|z| z * *phase);
        }
        out
    }

    fn mean_eigenvalue(&self, c: &Range<usize>) -> T {
        let sum = self.spectrum.eigenvalues[c.clone()].iter().fold(T::zero(), |a, &b| a + b);
        sum / T::lit(c.len() as f64)
    }

    fn sum(&self, rows: &CMatrix<T>, c: &Range<usize>, t: T) -> CMatrix<T> {
        let mean = self.mean_eigenvalue(c);
        let n = self.spectrum.levels;
        let mut out = CMatrix::zeros(n, n);
        for a in c.clone() {
            let w = crate::scalar::cis(-(self.spectrum.eigenvalues[a] - mean) * t);
            for g in 0..n {
                let left = rows[(g, a)] * w;
                for b in 0..n {
                    out[(g, b)] += left * self.input[(b, a)].conj();
                }
            }
        }
        out
    }
}

fn sideband_phases<T: Real>(n_cut: usize, omega: T, t: T) -> Vec<C<T>> {
    let cut = n_cut as i64;
    (-cut..=cut).map(|k| crate::scalar::cis(T::lit(k as f64) * omega * t)).collect()
}

/// `tr(P₊P₋)/dim c` for the cluster's eigenprojectors at `x ± δ`.
fn subspace_overlap<T: Real>(plus: &FloquetSpectrum<T>, minus: &FloquetSpectrum<T>, c: &Range<usize>) -> T {
    let vp = plus.eigenvectors.columns(c.start, c.len());
    let vm = minus.eigenvectors.columns(c.start, c.len());
    let o = vp.adjoint() * vm;
    o.iter().fold(T::zero(), |a, z| a + z.norm_sqr()) / T::lit(c.len() as f64)
}

struct Pairing<T> {
    min_overlap: T,
    gauge_unreliable: bool,
}

fn check_pairing<T: Real>(
    center: &FloquetSpectrum<T>,
    shifted: &ShiftedSpectra<T>,
    clusters: &[Range<usize>],
) -> Result<Pairing<T>> {
    let edge = T::lit(EDGE_WEIGHT);
    let mut min_overlap = T::one();
    for c in clusters {
        let interior = c.clone().all(|a| center.boundary_weight(a) < edge);
        if !interior {
            continue;
        }
        let overlap = subspace_overlap(&shifted.plus, &shifted.minus, c);
        if overlap < T::lit(PAIRING_ABORT_OVERLAP) {
            return Err(FloquetError::PairingFailure {
                param: shifted.param.clone(),
                overlap: overlap.as_f64(),
                first: c.start,
                last: c.end - 1,
            });
        }
        min_overlap = min_overlap.min(overlap);
    }
    Ok(Pairing { min_overlap, gauge_unreliable: min_overlap < T::lit(GAUGE_RELIABLE_OVERLAP) })
}

/// `(e^{−ia} − e^{−ib})` without cancellation.
fn phase_difference<T: Real>(a: T, b: T) -> C<T> {
    let half = T::lit(0.5);
    C::new(T::zero(), T::lit(-2.0) * ((a - b) * half).sin()) * crate::scalar::cis(-(a + b) * half)
}

/// Three-way split of `∂U` valid at any `t`.
///
/// Eigenvalues at `x ± δ` are paired by sorted order; clusters of
/// near-degenerate modes are differenced as whole subspaces (through their
/// projector-weighted amplitude sums), so no eigenvector phase or rotation
/// convention enters. With `g = e^{−iλ̄t}` the cluster-mean phase, `G` the
/// remaining amplitude sum and `f_k = e^{ikωt}`, the central difference of
/// `U = Σ f g G` is split by the discrete product rule, and the three parts
/// add up to `[U(x+δ) − U(x−δ)]/(2δ)` to rounding.
pub fn generator_components<T: Real>(
    center: &FloquetSpectrum<T>,
    shifted: &ShiftedSpectra<T>,
    t: T,
    cluster_tol: T,
) -> Result<GeneratorComponents<T>> {
    let clusters = center.clusters(cluster_tol);
    let pairing = check_pairing(center, shifted, &clusters)?;
    let n = center.levels;

    let sp = ClusterSums::new(&shifted.plus);
    let sm = ClusterSums::new(&shifted.minus);
    let fp = sideband_phases(center.n_cut, shifted.plus.omega, t);
    let fm = sideband_phases(center.n_cut, shifted.minus.omega, t);
    let (rows_pp, rows_mp) = (sp.phased_rows(&fp), sp.phased_rows(&fm));
    let (rows_pm, rows_mm) = (sm.phased_rows(&fp), sm.phased_rows(&fm));

    let half = C::new(T::lit(0.5), T::zero());
    let quarter = C::new(T::lit(0.25), T::zero());
    let mut eig = CMatrix::zeros(n, n);
    let mut qe = CMatrix::zeros(n, n);
    let mut mp = CMatrix::zeros(n, n);
    for c in &clusters {
        let a = sp.sum(&rows_pp, c, t); // f₊, x+δ
        let b = sm.sum(&rows_pm, c, t); // f₊, x−δ
        let cc = sp.sum(&rows_mp, c, t); // f₋, x+δ
        let d = sm.sum(&rows_mm, c, t); // f₋, x−δ
        let (lp, lm) = (sp.mean_eigenvalue(c) * t, sm.mean_eigenvalue(c) * t);
        let (gp, gm) = (crate::scalar::cis(-lp), crate::scalar::cis(-lm));
        let dg = phase_difference(lp, lm);
        eig += scale(&(scale(&(&a - &b), gp) + scale(&(&cc - &d), gm)), half);
        qe += scale(&(&a + &b + &cc + &d), dg * quarter);
        mp += scale(&((&a - &cc) + (&b - &d)), (gp + gm) * quarter);
    }
    finish_components(center, shifted, t, [eig, qe, mp], pairing, false)
}

fn finish_components<T: Real>(
    center: &FloquetSpectrum<T>,
    shifted: &ShiftedSpectra<T>,
    t: T,
    parts: [CMatrix<T>; 3],
    pairing: Pairing<T>,
    stroboscopic: bool,
) -> Result<GeneratorComponents<T>> {
    let inv = C::new(T::one() / (T::lit(2.0) * shifted.delta), T::zero());
    let [eig, qe, mp] = parts.map(|m| scale(&m, inv));
    let u = mapped_back(center, t, 0);
    Ok(GeneratorComponents {
        eigenmode: heisenberg(&u, &eig),
        quasienergy: heisenberg(&u, &qe),
        multiphoton: heisenberg(&u, &mp),
        du_eigenmode: eig,
        du_quasienergy: qe,
        du_multiphoton: mp,
        min_overlap: pairing.min_overlap,
        gauge_unreliable: pairing.gauge_unreliable,
        stroboscopic,
    })
}

/// Whether `t` is an integer multiple of `2π/clock_omega`.
pub fn is_stroboscopic<T: Real>(t: T, clock_omega: T) -> bool {
    let periods = t * clock_omega / T::two_pi();
    (periods - periods.round()).abs() <= T::lit(1e-9) * periods.abs().max(T::one())
}

fn require_stroboscopic<T: Real>(t: T, clock_omega: T) -> Result<()> {
    if !is_stroboscopic(t, clock_omega) {
        return Err(FloquetError::NotStroboscopic { t: t.as_f64(), period: (T::two_pi() / clock_omega).as_f64() });
    }
    Ok(())
}

/// Split at a stroboscopic time `t = l·T₀`.
///
/// The sideband phases are frozen at the central drive frequency (they are
/// all 1 when `ω = ω₀`), and the multi-photon part is the analytic frequency
/// derivative `i k t ∂ω/∂x_ℓ` of those phases.
pub fn generator_components_stroboscopic<T: Real>(
    center: &FloquetSpectrum<T>,
    shifted: &ShiftedSpectra<T>,
    t: T,
    clock_omega: T,
    cluster_tol: T,
) -> Result<GeneratorComponents<T>> {
    require_stroboscopic(t, clock_omega)?;
    let clusters = center.clusters(cluster_tol);
    let pairing = check_pairing(center, shifted, &clusters)?;
    let n = center.levels;
    let cut = center.n_cut as i64;

    let sp = ClusterSums::new(&shifted.plus);
    let sm = ClusterSums::new(&shifted.minus);
    let f0 = sideband_phases(center.n_cut, center.omega, t);
    let kf0: Vec<C<T>> = (-cut..=cut).zip(&f0).map(|(k, f)| *f * T::lit(k as f64)).collect();
    let (rows_p, rows_m) = (sp.phased_rows(&f0), sm.phased_rows(&f0));
    let (krows_p, krows_m) = (sp.phased_rows(&kf0), sm.phased_rows(&kf0));

    let half = C::new(T::lit(0.5), T::zero());
    let two_delta = T::lit(2.0) * shifted.delta;
    // ∂U_ω carries the 1/(2δ) of the other parts so that finish_components
    // can rescale all three uniformly.
    let mp_factor = C::new(T::zero(), t * shifted.omega_derivative() * two_delta);
    let mut eig = CMatrix::zeros(n, n);
    let mut qe = CMatrix::zeros(n, n);
    let mut mp = CMatrix::zeros(n, n);
    for c in &clusters {
        let a = sp.sum(&rows_p, c, t);
        let b = sm.sum(&rows_m, c, t);
        let (lp, lm) = (sp.mean_eigenvalue(c) * t, sm.mean_eigenvalue(c) * t);
        let gbar = (crate::scalar::cis(-lp) + crate::scalar::cis(-lm)) * half;
        let dg = phase_difference(lp, lm);
        eig += scale(&(&a - &b), gbar);
        qe += scale(&(&a + &b), dg * half);
        let ka = sp.sum(&krows_p, c, t);
        let kb = sm.sum(&krows_m, c, t);
        mp += scale(&(ka + kb), gbar * half * mp_factor);
    }
    finish_components(center, shifted, t, [eig, qe, mp], pairing, true)
}

/// Total generator plus the general-`t` split.
pub fn generator_set<T: Real>(
    center: &FloquetSpectrum<T>,
    shifted: &ShiftedSpectra<T>,
    t: T,
    cluster_tol: T,
) -> Result<GeneratorSet<T>> {
    let total = generator(center, shifted, t);
    let components = generator_components(center, shifted, t, cluster_tol)?;
    Ok(GeneratorSet { total, components: Some(components) })
}

fn check_probe<T: Real>(probe: &CVector<T>) -> Result<()> {
    let norm = state_norm(probe);
    if (norm - T::one()).abs() > T::lit(1e-10) {
        return Err(FloquetError::UnnormalizedProbe { norm: norm.as_f64() });
    }
    Ok(())
}

fn mean<T: Real>(a: &CMatrix<T>, psi: &CVector<T>) -> C<T> {
    psi.dotc(&(a * psi))
}

/// `½⟨AB + BA⟩ − ⟨A⟩⟨B⟩` on `|ψ⟩`; complex for non-Hermitian arguments.
pub fn covariance<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>, psi: &CVector<T>) -> C<T> {
    let ab = psi.dotc(&(a * (b * psi)));
    let ba = psi.dotc(&(b * (a * psi)));
    (ab + ba) * T::lit(0.5) - mean(a, psi) * mean(b, psi)
}

/// Component QFIs `4 Re Var` and their coherence term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComponentQfi<T> {
    pub eigenmode: T,
    pub quasienergy: T,
    pub multiphoton: T,
    /// `8 Re(Cov[h_α,h_ε] + Cov[h_α,h_ω] + Cov[h_ε,h_ω])`.
    pub coherence: T,
}

impl<T: Real> ComponentQfi<T> {
    pub fn sum(&self) -> T {
        self.eigenmode + self.quasienergy + self.multiphoton + self.coherence
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QfiBreakdown<T> {
    pub total: T,
    pub components: Option<ComponentQfi<T>>,
}

/// `4 Var_ψ(h)` of a Hermitian generator.
pub fn qfi_of<T: Real>(h: &CMatrix<T>, probe: &CVector<T>) -> Result<T> {
    check_probe(probe)?;
    Ok(T::lit(4.0) * covariance(h, h, probe).re)
}

/// QFI with its component breakdown; asserts the decomposition identity.
pub fn qfi<T: Real>(gen: &GeneratorSet<T>, probe: &CVector<T>) -> Result<QfiBreakdown<T>> {
    let total = qfi_of(&gen.total.h, probe)?;
    let components = gen.components.as_ref().map(|c| {
        let four = T::lit(4.0);
        let eight = T::lit(8.0);
        let (a, e, w) = (&c.eigenmode, &c.quasienergy, &c.multiphoton);
        ComponentQfi {
            eigenmode: four * covariance(a, a, probe).re,
            quasienergy: four * covariance(e, e, probe).re,
            multiphoton: four * covariance(w, w, probe).re,
            coherence: eight * (covariance(a, e, probe) + covariance(a, w, probe) + covariance(e, w, probe)).re,
        }
    });
    if let Some(c) = &components {
        let gap = (total - c.sum()).abs();
        if gap >= T::lit(INVARIANT_SLACK) {
            return Err(FloquetError::Invariant(format!(
                "QFI decomposition for `{}` off by {gap:e} (total {total})",
                gen.total.param
            )));
        }
    }
    Ok(QfiBreakdown { total, components })
}

/// `(λ_max(h) − λ_min(h))²`.
pub fn qfi_upper_bound<T: Real>(h: &CMatrix<T>) -> T {
    let ev = eigvalsh(h);
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) => (hi - lo) * (hi - lo),
        _ => T::zero(),
    }
}

/// `Im Tr(ρ₀[h_ℓ, h_ℓ′]) = 2 Im⟨h_ℓψ|h_ℓ′ψ⟩` for Hermitian generators.
pub fn incompatibility<T: Real>(h_l: &CMatrix<T>, h_lp: &CMatrix<T>, probe: &CVector<T>) -> T {
    let a = h_l * probe;
    let b = h_lp * probe;
    T::lit(2.0) * a.dotc(&b).im
}

/// Off-diagonal QFIM entry `4 Re Cov(h_ℓ, h_ℓ′)`.
pub fn qfim_entry<T: Real>(h_l: &CMatrix<T>, h_lp: &CMatrix<T>, probe: &CVector<T>) -> T {
    T::lit(4.0) * covariance(h_l, h_lp, probe).re
}

/// `Σ_γ (∂P_γ)²/P_γ` with `P_γ = |⟨γ|Uψ⟩|²` and `∂P_γ = 2 Re[⟨γ|Uψ⟩* ⟨γ|∂U ψ⟩]`.
pub fn cfi_from_derivative<T: Real>(u: &CMatrix<T>, du: &CMatrix<T>, probe: &CVector<T>) -> T {
    let amp = u * probe;
    let damp = du * probe;
    let floor = T::lit(CFI_PROBABILITY_FLOOR);
    let mut f = T::zero();
    for (c, d) in amp.iter().zip(damp.iter()) {
        let p = c.norm_sqr();
        let dp = T::lit(2.0) * (c.conj() * d).re;
        if p < floor {
            if dp.abs() > T::lit(1e-6) {
                log::warn!("CFI: outcome with P = {p:e} has ∂P = {dp:e}; dropped");
            }
            continue;
        }
        f += dp * dp / p;
    }
    f
}

/// CFI of the bare-basis measurement at `t = l·T₀`, through the stroboscopic
/// split of `∂U`.
pub fn cfi_stroboscopic<T: Real>(
    center: &FloquetSpectrum<T>,
    shifted: &ShiftedSpectra<T>,
    t: T,
    clock_omega: T,
    probe: &CVector<T>,
    cluster_tol: T,
) -> Result<T> {
    check_probe(probe)?;
    let comps = generator_components_stroboscopic(center, shifted, t, clock_omega, cluster_tol)?;
    let u = mapped_back(center, t, 0);
    Ok(cfi_from_derivative(&u, &comps.du_sum(), probe))
}

/// CFI at any `t` from central differences of the outcome probabilities.
pub fn cfi_direct<T: Real>(
    center: &FloquetSpectrum<T>,
    shifted: &ShiftedSpectra<T>,
    t: T,
    probe: &CVector<T>,
) -> Result<T> {
    check_probe(probe)?;
    let probs =
        |s: &FloquetSpectrum<T>| -> Vec<T> { (mapped_back(s, t, 0) * probe).iter().map(|z| z.norm_sqr()).collect() };
    let (p0, pp, pm) = (probs(center), probs(&shifted.plus), probs(&shifted.minus));
    let floor = T::lit(CFI_PROBABILITY_FLOOR);
    let inv = T::one() / (T::lit(2.0) * shifted.delta);
    let mut f = T::zero();
    for g in 0..p0.len() {
        if p0[g] < floor {
            continue;
        }
        let dp = (pp[g] - pm[g]) * inv;
        f += dp * dp / p0[g];
    }
    Ok(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReportConfig<T> {
    pub n_cut: usize,
    pub delta: T,
    pub clock_omega: T,
    pub cluster_tol: T,
    pub defect_tol: T,
    /// Also export the QFIM off-diagonals `4 Cov(h_ℓ, h_ℓ′)`.
    pub qfim: bool,
}

impl<T: Real> Default for ReportConfig<T> {
    fn default() -> Self {
        Self {
            n_cut: 50,
            delta: T::lit(DEFAULT_DELTA),
            clock_omega: T::one(),
            cluster_tol: T::lit(DEFAULT_CLUSTER_TOL),
            defect_tol: T::lit(DEFAULT_DEFECT_TOL),
            qfim: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParameterEstimate<T> {
    pub name: String,
    pub qfi_total: T,
    pub qfi_eigenmode: T,
    pub qfi_quasienergy: T,
    pub qfi_multiphoton: T,
    pub qfi_coherence: T,
    pub qfi_upper_bound: T,
    pub cfi: T,
    /// Whether `cfi` came from the stroboscopic split rather than direct
    /// probability differencing.
    pub cfi_stroboscopic: bool,
    pub generator_defect: T,
    pub min_pair_overlap: T,
    pub gauge_unreliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimationReport<T> {
    pub time: T,
    pub n_cut: usize,
    pub fd_step: T,
    pub probe: Vec<(T, T)>,
    pub truncation_defect: T,
    pub truncation_flagged: bool,
    pub parameters: Vec<ParameterEstimate<T>>,
    /// `Ω_{ℓℓ′}`, antisymmetric.
    pub incompatibility: Vec<Vec<T>>,
    pub qfim_offdiagonal: Option<Vec<Vec<T>>>,
}

impl<T: Real> EstimationReport<T> {
    pub fn parameter(&self, name: &str) -> Option<&ParameterEstimate<T>> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn omega(&self, a: &str, b: &str) -> Option<T> {
        let i = self.parameters.iter().position(|p| p.name == a)?;
        let j = self.parameters.iter().position(|p| p.name == b)?;
        Some(self.incompatibility[i][j])
    }
}

/// Spectra at `x` and at `x_ℓ ± δ` for every estimated parameter, reusable
/// across evaluation times.
#[derive(Clone, Debug)]
pub struct ReportContext<T: Real> {
    pub levels: usize,
    pub center: FloquetSpectrum<T>,
    pub shifted: Vec<ShiftedSpectra<T>>,
}

impl<T: Real> ReportContext<T> {
    pub fn build(
        model: &dyn PeriodicModel<T>,
        params: &Params<T>,
        names: &[&str],
        cfg: &ReportConfig<T>,
    ) -> Result<Self> {
        let center = spectrum_at(model, params, cfg.n_cut)?;
        let shifted = names
            .iter()
            .map(|&name| ShiftedSpectra::build(model, params, name, cfg.delta, cfg.n_cut))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { levels: model.levels(), center, shifted })
    }

    /// Full estimation record at time `t`; never returned with a violated
    /// invariant.
    pub fn report(&self, probe: &CVector<T>, t: T, cfg: &ReportConfig<T>) -> Result<EstimationReport<T>> {
        check_probe(probe)?;
        if probe.len() != self.levels {
            return Err(FloquetError::InvalidArgument(format!(
                "probe has {} components for a {}-level model",
                probe.len(),
                self.levels
            )));
        }
        let center = &self.center;
        let u = mapped_back(center, t, 0);
        let truncation_defect = unitarity_defect(&u);
        let strobe = is_stroboscopic(t, cfg.clock_omega);

        let mut estimates = Vec::with_capacity(self.shifted.len());
        let mut gens = Vec::with_capacity(self.shifted.len());
        for shifted in &self.shifted {
            let set = generator_set(center, shifted, t, cfg.cluster_tol)?;
            let q = qfi(&set, probe)?;
            let comps = q.components.expect("generator_set always splits");
            let (cfi, cfi_strobe) = if strobe {
                (cfi_stroboscopic(center, shifted, t, cfg.clock_omega, probe, cfg.cluster_tol)?, true)
            } else {
                (cfi_direct(center, shifted, t, probe)?, false)
            };
            let split = set.components.as_ref().expect("generator_set always splits");
            estimates.push(ParameterEstimate {
                name: shifted.param.clone(),
                qfi_total: q.total,
                qfi_eigenmode: comps.eigenmode,
                qfi_quasienergy: comps.quasienergy,
                qfi_multiphoton: comps.multiphoton,
                qfi_coherence: comps.coherence,
                qfi_upper_bound: qfi_upper_bound(&set.total.h),
                cfi,
                cfi_stroboscopic: cfi_strobe,
                generator_defect: set.total.hermiticity_defect,
                min_pair_overlap: split.min_overlap,
                gauge_unreliable: split.gauge_unreliable,
            });
            gens.push(set.total.h);
        }

        let m = gens.len();
        let mut omega = vec![vec![T::zero(); m]; m];
        let mut qfim = cfg.qfim.then(|| vec![vec![T::zero(); m]; m]);
        for i in 0..m {
            for j in i + 1..m {
                let o = incompatibility(&gens[i], &gens[j], probe);
                omega[i][j] = o;
                omega[j][i] = -o;
            }
            if let Some(q) = qfim.as_mut() {
                for j in 0..m {
                    q[i][j] = if i == j { estimates[i].qfi_total } else { qfim_entry(&gens[i], &gens[j], probe) };
                }
            }
        }

        let report = EstimationReport {
            time: t,
            n_cut: cfg.n_cut,
            fd_step: cfg.delta,
            probe: probe.iter().map(|z| (z.re, z.im)).collect(),
            truncation_defect,
            truncation_flagged: truncation_defect > cfg.defect_tol,
            parameters: estimates,
            incompatibility: omega,
            qfim_offdiagonal: qfim,
        };
        check_report(&report)?;
        Ok(report)
    }
}

/// One-shot [`ReportContext::report`].
pub fn estimation_report<T: Real>(
    model: &dyn PeriodicModel<T>,
    params: &Params<T>,
    names: &[&str],
    probe: &CVector<T>,
    t: T,
    cfg: &ReportConfig<T>,
) -> Result<EstimationReport<T>> {
    check_probe(probe)?;
    ReportContext::build(model, params, names, cfg)?.report(probe, t, cfg)
}

/// Decomposition, positivity and ordering invariants of a report.
pub fn check_report<T: Real>(report: &EstimationReport<T>) -> Result<()> {
    let slack = T::lit(INVARIANT_SLACK);
    for p in &report.parameters {
        let sum = p.qfi_eigenmode + p.qfi_quasienergy + p.qfi_multiphoton + p.qfi_coherence;
        let fail = |what: &str| Err(FloquetError::Invariant(format!("`{}`: {what}", p.name)));
        if (p.qfi_total - sum).abs() >= slack {
            return fail(&format!("decomposition off by {:e}", (p.qfi_total - sum).abs()));
        }
        if p.qfi_total < -slack {
            return fail(&format!("negative QFI {}", p.qfi_total));
        }
        if p.qfi_total > p.qfi_upper_bound + slack {
            return fail(&format!("QFI {} above its bound {}", p.qfi_total, p.qfi_upper_bound));
        }
        if p.cfi > p.qfi_total + slack {
            return fail(&format!("CFI {} above QFI {}", p.cfi, p.qfi_total));
        }
    }
    Ok(())
}

/// Centered moving average; the window shrinks symmetrically at the edges.
pub fn moving_average<T: Real>(values: &[T], window: usize) -> Vec<T> {
    let half = window.max(1) / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let reach = half.min(i).min(n - 1 - i);
            let slice = &values[i - reach..=i + reach];
            slice.iter().fold(T::zero(), |a, &b| a + b) / T::lit(slice.len() as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{default_probe, RashbaModel, RotatingFieldModel};
    use crate::scalar::{max_abs, max_abs_diff, pauli_x, pauli_z, re};

    #[test]
    fn elementary_qfi_cases() {
        let probe = default_probe::<f64>();
        let zero = CMatrix::<f64>::zeros(2, 2);
        assert_eq!(qfi_of(&zero, &probe).unwrap(), 0.0);
        assert_eq!(qfi_upper_bound(&zero), 0.0);
        let hx = pauli_x::<f64>() * re(0.7);
        assert!(qfi_of(&hx, &probe).unwrap().abs() < 1e-15);
        let hz = pauli_z::<f64>() * re(0.3);
        assert!((qfi_upper_bound(&hz) - 4.0 * 0.09).abs() < 1e-15);
        assert_eq!(incompatibility(&hx, &hx, &probe), 0.0);
        assert_eq!(incompatibility(&hz, &(hz.clone() * re(2.0)), &probe), 0.0);
        let bad = CVector::from_vec(vec![re(1.0), re(1.0)]);
        assert!(matches!(qfi_of(&hx, &bad), Err(FloquetError::UnnormalizedProbe { .. })));
    }

    #[test]
    fn incompatibility_is_antisymmetric() {
        let probe = CVector::from_vec(vec![C::new(0.6, 0.0), C::new(0.0, 0.8)]);
        let a = pauli_x::<f64>() * re(0.4) + pauli_z::<f64>();
        let b = crate::scalar::pauli_y::<f64>() * re(1.3) - pauli_x::<f64>();
        assert_eq!(incompatibility(&a, &b, &probe), -incompatibility(&b, &a, &probe));
        assert!(incompatibility(&a, &b, &probe).abs() > 0.1);
    }

    #[test]
    fn smoothing() {
        let v = [1.0, 2.0, 3.0, 10.0, 5.0];
        let s = moving_average(&v, 3);
        assert_eq!(s, vec![1.0, 2.0, 5.0, 6.0, 5.0]);
        assert_eq!(moving_average(&v, 1), v.to_vec());
    }

    #[test]
    fn stroboscopic_detection() {
        assert!(is_stroboscopic(4.0 * std::f64::consts::PI, 1.0));
        assert!(!is_stroboscopic(1.0, 1.0));
    }

    #[test]
    fn static_generator_matches_textbook_form() {
        // B₀ = 0: U = exp(iB₁tσx), so h_{B₁} = i U†∂U = −tσx.
        let model = RashbaModel::<f64>::new(0.0, 0.8, 1.0);
        let p = model.params();
        let t = 2.3;
        let center = spectrum_at(&model, &p, 4).unwrap();
        let shifted = ShiftedSpectra::build(&model, &p, "b1", 1e-6, 4).unwrap();
        let set = generator_set(&center, &shifted, t, 1e-3).unwrap();
        let expected = pauli_x::<f64>() * re(-t);
        assert!(max_abs_diff(&set.total.h, &expected) < 1e-8);
        let comps = set.components.unwrap();
        assert!(max_abs_diff(&comps.sum(), &set.total.h) < 1e-6);
        assert_eq!(max_abs(&comps.multiphoton), 0.0);
    }

    #[test]
    fn spectator_parameter_vanishes() {
        let model = RashbaModel::<f64>::new(0.5, 0.5, 1.0);
        let p = model.params().with("spectator", 2.0);
        let probe = default_probe::<f64>();
        let cfg = ReportConfig { n_cut: 20, ..ReportConfig::default() };
        let r = estimation_report(&model, &p, &["b0", "spectator"], &probe, 2.0, &cfg).unwrap();
        let s = r.parameter("spectator").unwrap();
        assert_eq!(s.qfi_total, 0.0);
        assert_eq!(s.cfi, 0.0);
        assert_eq!(r.omega("b0", "spectator"), Some(0.0));
    }

    #[test]
    fn rotating_bound_at_one_period() {
        let rf = RotatingFieldModel::<f64>::new(0.5, 1.0);
        let p = rf.params();
        let t = rf.period();
        let h = generator_for(&rf, &p, "b", t, 1e-6, 30).unwrap().h;
        let exact = crate::models::rotating_generator_analytic(&rf, crate::models::RotatingParam::B, t).unwrap();
        assert!(max_abs_diff(&h, &exact) < 1e-4);
        let bound = qfi_upper_bound(&h);
        assert!((bound - 82.673).abs() < 0.01);
    }

    #[test]
    fn stroboscopic_split_matches_general_split() {
        let model = RashbaModel::<f64>::new(0.6, 0.4, 1.0);
        let p = model.params();
        let t = 2.0 * std::f64::consts::PI;
        let center = spectrum_at(&model, &p, 30).unwrap();
        for name in ["b0", "omega"] {
            let shifted = ShiftedSpectra::build(&model, &p, name, 1e-6, 30).unwrap();
            let general = generator_components(&center, &shifted, t, 1e-3).unwrap();
            let strobe = generator_components_stroboscopic(&center, &shifted, t, 1.0, 1e-3).unwrap();
            assert!(max_abs_diff(&general.du_sum(), &strobe.du_sum()) < 1e-6);
            assert!(max_abs_diff(&general.multiphoton, &strobe.multiphoton) < 1e-5, "{name}");
        }
        let shifted = ShiftedSpectra::build(&model, &p, "b0", 1e-6, 30).unwrap();
        assert!(generator_components_stroboscopic(&center, &shifted, 1.0, 1.0, 1e-3).is_err());
    }

    #[test]
    fn static_rabi_cfi() {
        let b1 = 0.7;
        let model = RashbaModel::<f64>::new(0.0, b1, 1.0);
        let p = model.params();
        let probe = CVector::from_vec(vec![re(1.0), re(0.0)]);
        let t = 4.0 * std::f64::consts::PI;
        let center = spectrum_at(&model, &p, 4).unwrap();
        let shifted = ShiftedSpectra::build(&model, &p, "b1", 1e-6, 4).unwrap();
        let f = cfi_stroboscopic(&center, &shifted, t, 1.0, &probe, 1e-3).unwrap();
        assert!((f - 4.0 * t * t).abs() < 1e-6 * 4.0 * t * t, "{f}");
        let g = cfi_direct(&center, &shifted, t, &probe).unwrap();
        assert!((g - 4.0 * t * t).abs() < 1e-3, "{g}");
    }
}
