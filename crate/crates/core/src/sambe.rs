//! Truncated Sambe-space representation of a time-periodic Hamiltonian.
//!
//! The extended space is the physical `N`-level space tensored with the
//! Fourier modes `e^{imωt}`, `m ∈ [−n_cut, n_cut]`. Flat indices are
//! Fourier-major and level-minor, so sector `m` occupies the contiguous rows
//! `(m + n_cut)·N .. (m + n_cut + 1)·N`.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};
use crate::scalar::{cis, hermiticity_defect, max_abs, max_abs_diff, re, CMatrix, Real};

/// Ordered parameter vector `x`, keyed by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params<T> {
    entries: Vec<(String, T)>,
}

impl<T: Real> Default for Params<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Params<T> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    /// Builder-style insert; overwrites an existing entry in place.
    pub fn with(mut self, name: &str, value: T) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: T) {
        match self.entries.iter_mut().find(|(n, _)| n == name) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((name.to_string(), value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn require(&self, name: &str) -> Result<T> {
        self.get(name).ok_or_else(|| FloquetError::UnknownParameter(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    /// Copy with `name` shifted by `delta`.
    pub fn shifted(&self, name: &str, delta: T) -> Result<Self> {
        let value = self.require(name)?;
        let mut out = self.clone();
        out.set(name, value + delta);
        Ok(out)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, T)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A time-periodic `N`-level Hamiltonian `H(t) = Σ_n H⁽ⁿ⁾ e^{inωt}`.
///
/// All evaluations take an explicit parameter set so that finite-difference
/// pipelines can probe shifted points without mutating the model.
pub trait PeriodicModel<T: Real>: Send + Sync {
    fn levels(&self) -> usize;

    /// Largest `|n|` with nonzero `H⁽ⁿ⁾`.
    fn max_harmonic(&self) -> usize;

    /// Nominal parameter vector.
    fn params(&self) -> Params<T>;

    /// Drive angular frequency at the given parameters.
    fn omega(&self, params: &Params<T>) -> T;

    /// `H⁽ⁿ⁾`; the zero matrix for `|n| > max_harmonic`.
    fn fourier_component(&self, n: i64, params: &Params<T>) -> CMatrix<T>;

    /// `H(t)` in the time domain. The default reassembles the Fourier series;
    /// built-in models override it with the closed form so the brute-force
    /// oracle stays independent of the Fourier machinery.
    fn hamiltonian(&self, t: T, params: &Params<T>) -> CMatrix<T> {
        let omega = self.omega(params);
        let n = self.levels();
        let k = self.max_harmonic() as i64;
        let mut h = CMatrix::zeros(n, n);
        for harmonic in -k..=k {
            let phase = cis(T::lit(harmonic as f64) * omega * t);
            h += self.fourier_component(harmonic, params).map(|z| z * phase);
        }
        h
    }

    fn name(&self) -> &str {
        "custom"
    }
}

/// Position in the truncated Sambe basis `|level, fourier⟩`.
#[derive(Clone, Copy, Debug, Eq, PartialEq, Hash, Serialize, Deserialize)]
pub struct SambeIndex {
    pub level: usize,
    pub fourier: i64,
}

impl SambeIndex {
    pub fn new(level: usize, fourier: i64) -> Self {
        Self { level, fourier }
    }

    pub fn flat(self, levels: usize, n_cut: usize) -> usize {
        (self.fourier + n_cut as i64) as usize * levels + self.level
    }

    pub fn from_flat(flat: usize, levels: usize, n_cut: usize) -> Self {
        Self { level: flat % levels, fourier: (flat / levels) as i64 - n_cut as i64 }
    }
}

impl fmt::Display for SambeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}⟩", self.level, self.fourier)
    }
}

/// Truncated Floquet matrix with its block bookkeeping.
#[derive(Clone, Debug)]
pub struct FloquetMatrix<T: Real> {
    pub n_cut: usize,
    pub levels: usize,
    pub omega: T,
    pub data: CMatrix<T>,
}

impl<T: Real> FloquetMatrix<T> {
    pub fn dim(&self) -> usize {
        self.levels * (2 * self.n_cut + 1)
    }

    pub fn flat_index(&self, index: SambeIndex) -> usize {
        index.flat(self.levels, self.n_cut)
    }

    pub fn sambe_index(&self, flat: usize) -> SambeIndex {
        SambeIndex::from_flat(flat, self.levels, self.n_cut)
    }

    /// Flat rows of Fourier sector `k`.
    pub fn sector_range(&self, k: i64) -> Range<usize> {
        sector_range(self.levels, self.n_cut, k)
    }

    /// Block `(k, m)` as an `N×N` matrix.
    pub fn block(&self, k: i64, m: i64) -> CMatrix<T> {
        let rows = self.sector_range(k);
        let cols = self.sector_range(m);
        self.data.view((rows.start, cols.start), (self.levels, self.levels)).into_owned()
    }

    pub fn hermiticity_defect(&self) -> T {
        hermiticity_defect(&self.data)
    }
}

pub(crate) fn sector_range(levels: usize, n_cut: usize, k: i64) -> Range<usize> {
    let start = (k + n_cut as i64) as usize * levels;
    start..start + levels
}

pub(crate) fn hermitian_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::default_epsilon() * T::lit(100.0))
}

/// Checks `H⁽⁻ⁿ⁾ = (H⁽ⁿ⁾)†` for every harmonic of the model.
pub fn check_fourier_hermiticity<T: Real>(model: &dyn PeriodicModel<T>, params: &Params<T>) -> Result<()> {
    let tol = hermitian_tolerance::<T>();
    for n in 0..=model.max_harmonic() {
        let plus = model.fourier_component(n as i64, params);
        let minus = model.fourier_component(-(n as i64), params);
        let defect = max_abs_diff(&minus, &plus.adjoint());
        let scale = T::one().max(max_abs(&plus));
        if defect > tol * scale {
            return Err(FloquetError::NonHermitianFourier { harmonic: n, defect: defect.as_f64() });
        }
    }
    Ok(())
}

/// Floquet matrix at the model's nominal parameters.
pub fn build_floquet_matrix<T: Real>(model: &dyn PeriodicModel<T>, n_cut: usize) -> Result<FloquetMatrix<T>> {
    build_floquet_matrix_at(model, &model.params(), n_cut)
}

/// Floquet matrix `⟨γ,k|H_F|β,m⟩ = H⁽ᵏ⁻ᵐ⁾_γβ + kω δ_km δ_γβ` at `params`.
pub fn build_floquet_matrix_at<T: Real>(
    model: &dyn PeriodicModel<T>,
    params: &Params<T>,
    n_cut: usize,
) -> Result<FloquetMatrix<T>> {
    let max_harmonic = model.max_harmonic();
    if n_cut < max_harmonic {
        return Err(FloquetError::CutoffTooSmall { n_cut, max_harmonic });
    }
    check_fourier_hermiticity(model, params)?;

    let levels = model.levels();
    let omega = model.omega(params);
    let kmax = max_harmonic as i64;
    let components: Vec<CMatrix<T>> = (-kmax..=kmax).map(|n| model.fourier_component(n, params)).collect();

    let dim = levels * (2 * n_cut + 1);
    let mut data = CMatrix::zeros(dim, dim);
    let cut = n_cut as i64;
    for k in -cut..=cut {
        let rows = sector_range(levels, n_cut, k);
        for m in (k - kmax).max(-cut)..=(k + kmax).min(cut) {
            let cols = sector_range(levels, n_cut, m);
            let block = &components[(k - m + kmax) as usize];
            data.view_mut((rows.start, cols.start), (levels, levels)).copy_from(block);
        }
        let ladder = re(T::lit(k as f64) * omega);
        for level in 0..levels {
            data[(rows.start + level, rows.start + level)] += ladder;
        }
    }
    Ok(FloquetMatrix { n_cut, levels, omega, data })
}

/// One Floquet matrix per cutoff, for convergence studies.
pub fn truncation_ladder<T: Real>(model: &dyn PeriodicModel<T>, n_cuts: &[usize]) -> Result<Vec<FloquetMatrix<T>>> {
    if n_cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FloquetError::InvalidArgument("cutoffs must be strictly increasing".into()));
    }
    n_cuts.iter().map(|&n| build_floquet_matrix(model, n)).collect()
}

/// Fourier components `H⁽ⁿ⁾`, `n ∈ [−K, K]`, stored at offset `n + K`.
#[derive(Clone, Debug)]
pub struct FourierSet<T: Real> {
    pub max_harmonic: usize,
    pub components: Vec<CMatrix<T>>,
}

impl<T: Real> FourierSet<T> {
    pub fn component(&self, n: i64) -> Option<&CMatrix<T>> {
        let k = self.max_harmonic as i64;
        (n.abs() <= k).then(|| &self.components[(n + k) as usize])
    }

    pub fn levels(&self) -> usize {
        self.components.first().map_or(0, |m| m.nrows())
    }

    /// `Σ_n H⁽ⁿ⁾ e^{inωt}`.
    pub fn reassemble(&self, omega: T, t: T) -> CMatrix<T> {
        let k = self.max_harmonic as i64;
        let mut h = CMatrix::zeros(self.levels(), self.levels());
        for (offset, comp) in self.components.iter().enumerate() {
            let n = offset as i64 - k;
            h += comp.map(|z| z * cis(T::lit(n as f64) * omega * t));
        }
        h
    }
}

/// `H⁽ⁿ⁾ = (1/T)∫₀ᵀ H(t) e^{−inωt} dt` by the uniform (periodic) trapezoid.
///
/// The returned set is symmetrized so that `H⁽⁻ⁿ⁾ = (H⁽ⁿ⁾)†` holds exactly.
pub fn fourier_components_from_timedomain<T: Real, F>(
    h_of_t: F,
    omega: T,
    max_harmonic: usize,
    quad_points: usize,
) -> Result<FourierSet<T>>
where
    F: Fn(T) -> CMatrix<T>,
{
    let required = 4 * max_harmonic + 4;
    if quad_points < required {
        return Err(FloquetError::QuadratureTooCoarse { quad_points, max_harmonic, required });
    }
    if omega <= T::zero() {
        return Err(FloquetError::InvalidArgument("omega must be positive".into()));
    }
    let period = T::two_pi() / omega;
    let step = period / T::lit(quad_points as f64);
    let samples: Vec<CMatrix<T>> = (0..quad_points).map(|j| h_of_t(T::lit(j as f64) * step)).collect();
    let levels = samples[0].nrows();
    let weight = T::one() / T::lit(quad_points as f64);

    let k = max_harmonic as i64;
    let mut components: Vec<CMatrix<T>> = (-k..=k)
        .map(|n| {
            let mut acc = CMatrix::zeros(levels, levels);
            for (j, h) in samples.iter().enumerate() {
                let t = T::lit(j as f64) * step;
                acc += h.map(|z| z * cis(-T::lit(n as f64) * omega * t));
            }
            acc.map(|z| z * weight)
        })
        .collect();

    for n in 0..=k {
        let (lo, hi) = ((k - n) as usize, (k + n) as usize);
        let sym = (&components[hi] + components[lo].adjoint()).map(|z| z * T::lit(0.5));
        components[lo] = sym.adjoint();
        components[hi] = sym;
    }
    Ok(FourierSet { max_harmonic, components })
}

type ComponentFn<T> = dyn Fn(i64, &Params<T>) -> CMatrix<T> + Send + Sync;

/// General model described by a closure over Fourier index and parameters.
pub struct FourierModel<T: Real> {
    levels: usize,
    max_harmonic: usize,
    params: Params<T>,
    omega_param: Option<String>,
    fixed_omega: T,
    component: Box<ComponentFn<T>>,
}

impl<T: Real> FourierModel<T> {
    /// Model with a parameter-dependent component closure. If `omega_param`
    /// names an entry of `params`, the drive frequency is read from it,
    /// otherwise `fixed_omega` is used.
    pub fn new<F>(
        levels: usize,
        max_harmonic: usize,
        params: Params<T>,
        omega_param: Option<&str>,
        fixed_omega: T,
        component: F,
    ) -> Self
    where
        F: Fn(i64, &Params<T>) -> CMatrix<T> + Send + Sync + 'static,
    {
        Self {
            levels,
            max_harmonic,
            params,
            omega_param: omega_param.map(str::to_string),
            fixed_omega,
            component: Box::new(component),
        }
    }

    /// Parameter-free model from a fixed Fourier set.
    pub fn from_set(set: FourierSet<T>, omega: T) -> Self {
        let levels = set.levels();
        let max_harmonic = set.max_harmonic;
        Self::new(levels, max_harmonic, Params::new(), None, omega, move |n, _| {
            set.component(n).cloned().unwrap_or_else(|| CMatrix::zeros(levels, levels))
        })
    }

    /// Time-independent `H⁽⁰⁾`.
    pub fn static_model(h0: CMatrix<T>, omega: T) -> Self {
        Self::from_set(FourierSet { max_harmonic: 0, components: vec![h0] }, omega)
    }
}

impl<T: Real> PeriodicModel<T> for FourierModel<T> {
    fn levels(&self) -> usize {
        self.levels
    }

    fn max_harmonic(&self) -> usize {
        self.max_harmonic
    }

    fn params(&self) -> Params<T> {
        self.params.clone()
    }

    fn omega(&self, params: &Params<T>) -> T {
        self.omega_param.as_deref().and_then(|name| params.get(name)).unwrap_or(self.fixed_omega)
    }

    fn fourier_component(&self, n: i64, params: &Params<T>) -> CMatrix<T> {
        if n.unsigned_abs() as usize > self.max_harmonic {
            return CMatrix::zeros(self.levels, self.levels);
        }
        (self.component)(n, params)
    }
}
