//! Mapped-back time-evolution operator and transition probabilities.

use crate::scalar::{cis, unitarity_defect, CMatrix, Real, C};
use crate::spectral::FloquetSpectrum;

/// Default bound on `‖U†U − I‖_max` before a sample is flagged.
pub const DEFAULT_DEFECT_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct PropagatorSample<T: Real> {
    pub time: T,
    pub u_matrix: CMatrix<T>,
    /// `‖U†U − I‖_max`.
    pub truncation_defect: T,
    /// Set when the defect exceeds the tolerance the sample was built with.
    pub flagged: bool,
}

/// `U(t)` with the default tolerance and input sector 0.
pub fn evolve<T: Real>(spectrum: &FloquetSpectrum<T>, t: T) -> PropagatorSample<T> {
    evolve_with(spectrum, t, T::lit(DEFAULT_DEFECT_TOL), 0)
}

/// `⟨γ|U(t)|β⟩ = Σ_{α,k} ⟨γ,k|λ_α⟩⟩⟨⟨λ_α|β,m⟩ e^{−iλ_α t} e^{i(k−m)ωt}`.
pub fn evolve_with<T: Real>(
    spectrum: &FloquetSpectrum<T>,
    t: T,
    defect_tol: T,
    input_sector: i64,
) -> PropagatorSample<T> {
    let u = mapped_back(spectrum, t, input_sector);
    let defect = unitarity_defect(&u);
    if defect > defect_tol {
        log::warn!("propagator at t = {t}: truncation defect {defect:e} exceeds {defect_tol:e}");
    }
    PropagatorSample { time: t, u_matrix: u, truncation_defect: defect, flagged: defect > defect_tol }
}

/// Bare mapped-back propagator without defect bookkeeping.
pub fn mapped_back<T: Real>(spectrum: &FloquetSpectrum<T>, t: T, input_sector: i64) -> CMatrix<T> {
    let n = spectrum.levels;
    let dim = spectrum.dim();
    let cut = spectrum.n_cut as i64;
    let mut folded_rows = CMatrix::zeros(n, dim);
    for k in -cut..=cut {
        let phase = cis(T::lit((k - input_sector) as f64) * spectrum.omega * t);
        let r = spectrum.sector_range(k);
        folded_rows += spectrum.eigenvectors.rows(r.start, n).map(|z| z * phase);
    }
    for (a, &l) in spectrum.eigenvalues.iter().enumerate() {
        let phase = cis(-l * t);
        folded_rows.column_mut(a).iter_mut().for_each(|z| *z *= phase);
    }
    let r = spectrum.sector_range(input_sector);
    folded_rows * spectrum.eigenvectors.rows(r.start, n).adjoint()
}

/// `C_k(t) = Σ_α B_{αk}[γ][β] e^{−iλ_α t}` for every sector `k` (input sector 0).
pub fn sideband_amplitudes<T: Real>(spectrum: &FloquetSpectrum<T>, t: T, beta: usize, gamma: usize) -> Vec<C<T>> {
    let cut = spectrum.n_cut as i64;
    let input = spectrum.sector_range(0).start + beta;
    let weights: Vec<C<T>> = spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(a, &l)| spectrum.eigenvectors[(input, a)].conj() * cis(-l * t))
        .collect();
    (-cut..=cut)
        .map(|k| {
            let row = spectrum.sector_range(k).start + gamma;
            weights
                .iter()
                .enumerate()
                .fold(C::new(T::zero(), T::zero()), |acc, (a, w)| acc + spectrum.eigenvectors[(row, a)] * w)
        })
        .collect()
}

/// `P_{βγ}(t)` split into its same-sector and sideband-interference parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionProbability<T> {
    pub total: T,
    /// `Σ_k |C_k|²`.
    pub same_sector: T,
    /// `Σ_{k≠k′} C_k C*_{k′} e^{i(k−k′)ωt}`.
    pub interference: T,
}

pub fn transition_probability<T: Real>(
    spectrum: &FloquetSpectrum<T>,
    t: T,
    beta: usize,
    gamma: usize,
) -> TransitionProbability<T> {
    let amps = sideband_amplitudes(spectrum, t, beta, gamma);
    let cut = spectrum.n_cut as i64;
    let mut coherent = C::new(T::zero(), T::zero());
    let mut same = T::zero();
    for (c, k) in amps.iter().zip(-cut..=cut) {
        coherent += *c * cis(T::lit(k as f64) * spectrum.omega * t);
        same += c.norm_sqr();
    }
    let total = coherent.norm_sqr();
    TransitionProbability { total, same_sector: same, interference: total - same }
}

/// Period-averaged probability that keeps intra-sector coherence, `Σ_k |C_k(t)|²`.
pub fn averaged_probability_shirley<T: Real>(spectrum: &FloquetSpectrum<T>, t: T, beta: usize, gamma: usize) -> T {
    sideband_amplitudes(spectrum, t, beta, gamma).iter().fold(T::zero(), |a, c| a + c.norm_sqr())
}

/// Long-time average `Σ_{α,k} |B_{αk}[γ][β]|²`.
pub fn averaged_probability_longtime<T: Real>(spectrum: &FloquetSpectrum<T>, beta: usize, gamma: usize) -> T {
    let cut = spectrum.n_cut as i64;
    let input = spectrum.sector_range(0).start + beta;
    let mut p = T::zero();
    for a in 0..spectrum.dim() {
        let w_in = spectrum.eigenvectors[(input, a)].norm_sqr();
        for k in -cut..=cut {
            let row = spectrum.sector_range(k).start + gamma;
            p += spectrum.eigenvectors[(row, a)].norm_sqr() * w_in;
        }
    }
    p
}
