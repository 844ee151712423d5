//! Diagonalization of the Floquet matrix and eigenmode bookkeeping.

use std::ops::Range;

use crate::error::{FloquetError, Result};
use crate::sambe::{sector_range, FloquetMatrix};
use crate::scalar::{hermiticity_defect, try_eigh_sorted, CMatrix, CVector, Real, C};

/// Weight on the outermost sector above which a mode counts as an edge mode.
pub const EDGE_WEIGHT: f64 = 1e-3;

/// Eigen-decomposition of a truncated Floquet matrix.
#[derive(Clone, Debug)]
pub struct FloquetSpectrum<T: Real> {
    /// Ascending eigenvalues `λ_α`.
    pub eigenvalues: Vec<T>,
    /// Columns are the Sambe eigenvectors `|λ_α⟩⟩`.
    pub eigenvectors: CMatrix<T>,
    pub n_cut: usize,
    pub levels: usize,
    pub omega: T,
    /// Quasienergies folded into `(−ω/2, ω/2]`.
    pub folded: Vec<T>,
}

/// Maps values into the half-open zone `(−ω/2, ω/2]`.
pub fn fold_to_fbz<T: Real>(lambdas: &[T], omega: T) -> Vec<T> {
    lambdas.iter().map(|&l| fold_one(l, omega)).collect()
}

pub(crate) fn fold_one<T: Real>(lambda: T, omega: T) -> T {
    let half = omega * T::lit(0.5);
    let mut out = lambda - omega * ((lambda - half) / omega).ceil();
    if out <= -half {
        out += omega;
    } else if out > half {
        out -= omega;
    }
    out
}

pub fn diagonalize<T: Real>(matrix: &FloquetMatrix<T>) -> Result<FloquetSpectrum<T>> {
    let dim = matrix.dim();
    let (eigenvalues, eigenvectors) =
        try_eigh_sorted(matrix.data.clone()).ok_or_else(|| FloquetError::Eigensolver {
            dim,
            detail: format!(
                "no convergence; hermiticity defect {:e}, max |entry| {:e}",
                matrix.hermiticity_defect().as_f64(),
                crate::scalar::max_abs(&matrix.data).as_f64()
            ),
        })?;
    let folded = fold_to_fbz(&eigenvalues, matrix.omega);
    Ok(FloquetSpectrum {
        eigenvalues,
        eigenvectors,
        n_cut: matrix.n_cut,
        levels: matrix.levels,
        omega: matrix.omega,
        folded,
    })
}

impl<T: Real> FloquetSpectrum<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn sector_range(&self, k: i64) -> Range<usize> {
        sector_range(self.levels, self.n_cut, k)
    }

    /// Rows of sector `k` of all eigenvectors, an `N × dim` matrix.
    pub fn sector_rows(&self, k: i64) -> CMatrix<T> {
        let r = self.sector_range(k);
        self.eigenvectors.rows(r.start, self.levels).into_owned()
    }

    /// `Σ_γ |⟨γ,k|λ_α⟩⟩|²`.
    pub fn sector_weight(&self, alpha: usize, k: i64) -> T {
        let r = self.sector_range(k);
        self.eigenvectors.column(alpha).rows(r.start, self.levels).iter().fold(T::zero(), |a, z| a + z.norm_sqr())
    }

    /// Weight on the two outermost sectors `±n_cut`.
    pub fn boundary_weight(&self, alpha: usize) -> T {
        let cut = self.n_cut as i64;
        if cut == 0 {
            return self.sector_weight(alpha, 0);
        }
        self.sector_weight(alpha, cut) + self.sector_weight(alpha, -cut)
    }

    /// Modes with more than [`EDGE_WEIGHT`] on an outermost sector.
    pub fn edge_modes(&self) -> Vec<usize> {
        let thr = T::lit(EDGE_WEIGHT);
        let cut = self.n_cut as i64;
        (0..self.dim()).filter(|&a| self.sector_weight(a, cut) > thr || self.sector_weight(a, -cut) > thr).collect()
    }

    /// Modes whose weight on the outermost sectors is below `threshold`.
    pub fn interior_modes(&self, threshold: T) -> Vec<usize> {
        (0..self.dim()).filter(|&a| self.boundary_weight(a) < threshold).collect()
    }

    /// `‖D†D − I‖_max`.
    pub fn unitarity_defect(&self) -> T {
        crate::scalar::unitarity_defect(&self.eigenvectors)
    }

    /// `‖D Λ D† − M‖_max`.
    pub fn reconstruction_error(&self, matrix: &FloquetMatrix<T>) -> T {
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= C::new(l, T::zero()));
        }
        let rebuilt = scaled * self.eigenvectors.adjoint();
        crate::scalar::max_abs_diff(&rebuilt, &matrix.data)
    }

    /// Groups of consecutive sorted eigenvalues whose neighbouring gaps are
    /// below `tol`.
    pub fn clusters(&self, tol: T) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for a in 1..=self.dim() {
            if a == self.dim() || self.eigenvalues[a] - self.eigenvalues[a - 1] >= tol {
                out.push(start..a);
                start = a;
            }
        }
        out
    }

    /// Smallest circular distance between distinct folded quasienergies of
    /// interior modes. Replicas closer than `merge_tol` count as one value.
    pub fn folded_gap(&self, merge_tol: T) -> T {
        let interior = self.interior_modes(T::lit(1e-8));
        let mut vals: Vec<T> = interior.iter().map(|&a| self.folded[a]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let mut distinct: Vec<T> = Vec::new();
        for v in vals {
            if distinct.last().map_or(true, |&l| v - l > merge_tol) {
                distinct.push(v);
            }
        }
        if distinct.len() > 1 {
            let wrap = self.omega - (*distinct.last().unwrap() - distinct[0]);
            if wrap <= merge_tol {
                distinct.pop();
            }
        }
        if distinct.len() < 2 {
            return T::zero();
        }
        let mut gap = self.omega - (*distinct.last().unwrap() - distinct[0]);
        for w in distinct.windows(2) {
            gap = gap.min(w[1] - w[0]);
        }
        gap
    }
}

/// `B_{αk}[γ][β] = ⟨γ,k|λ_α⟩⟩⟨⟨λ_α|β,m₀⟩` for a fixed input sector `m₀`.
#[derive(Clone, Debug)]
pub struct AmplitudeTable<T: Real> {
    pub levels: usize,
    pub n_cut: usize,
    pub modes: usize,
    pub input_sector: i64,
    entries: Vec<C<T>>,
}

impl<T: Real> AmplitudeTable<T> {
    fn offset(&self, alpha: usize, k: i64, gamma: usize, beta: usize) -> usize {
        let sectors = 2 * self.n_cut + 1;
        let ks = (k + self.n_cut as i64) as usize;
        ((alpha * sectors + ks) * self.levels + gamma) * self.levels + beta
    }

    pub fn get(&self, alpha: usize, k: i64, gamma: usize, beta: usize) -> C<T> {
        self.entries[self.offset(alpha, k, gamma, beta)]
    }

    pub fn sectors(&self) -> Range<i64> {
        let cut = self.n_cut as i64;
        -cut..cut + 1
    }

    /// `Σ_{α,k} B_{αk}[γ][β]`, which equals `δ_γβ`.
    pub fn identity_resolution(&self) -> CMatrix<T> {
        let mut out = CMatrix::zeros(self.levels, self.levels);
        for a in 0..self.modes {
            for k in self.sectors() {
                for g in 0..self.levels {
                    for b in 0..self.levels {
                        out[(g, b)] += self.get(a, k, g, b);
                    }
                }
            }
        }
        out
    }
}

pub fn amplitude_table<T: Real>(spectrum: &FloquetSpectrum<T>, input_sector: i64) -> Result<AmplitudeTable<T>> {
    let cut = spectrum.n_cut as i64;
    if input_sector.abs() > cut {
        return Err(FloquetError::InvalidArgument(format!("input sector {input_sector} outside truncation ±{cut}")));
    }
    let n = spectrum.levels;
    let modes = spectrum.dim();
    let input = spectrum.sector_rows(input_sector);
    let mut table = AmplitudeTable {
        levels: n,
        n_cut: spectrum.n_cut,
        modes,
        input_sector,
        entries: vec![C::new(T::zero(), T::zero()); modes * (2 * spectrum.n_cut + 1) * n * n],
    };
    for k in -cut..=cut {
        let rows = spectrum.sector_rows(k);
        for a in 0..modes {
            for g in 0..n {
                for b in 0..n {
                    let idx = table.offset(a, k, g, b);
                    table.entries[idx] = rows[(g, a)] * input[(b, a)].conj();
                }
            }
        }
    }
    Ok(table)
}

/// Sambe column of mode `alpha` restricted to sector `k`.
pub fn mode_sector<T: Real>(spectrum: &FloquetSpectrum<T>, alpha: usize, k: i64) -> CVector<T> {
    let r = spectrum.sector_range(k);
    spectrum.eigenvectors.column(alpha).rows(r.start, spectrum.levels).into_owned()
}

/// Hermiticity check used before diagonalizing externally assembled data.
pub fn is_hermitian<T: Real>(m: &CMatrix<T>, tol: T) -> bool {
    hermiticity_defect(m) < tol
}
