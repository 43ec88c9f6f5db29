//! Free-fermion spectra of ferromagnetic chains under per-site schedules.
//!
//! A zero-field open chain maps through the Jordan-Wigner transform to a
//! quadratic fermion Hamiltonian. With per-site transverse weights
//! `a_i = -A_i(s)` and bond weights `b_i = sqrt(B_i B_{i+1}) J_{i,i+1}`,
//! the quadratic form has hopping matrix `A` (diagonal `-2 a_i`, off-
//! diagonal `b_i`) and antisymmetric pairing matrix `B` (`B_{i,i+1} = b_i`).
//! Diagonalizing the `2N x 2N` block matrix `[[A, B], [-B, -A]]` yields
//! eigenvalues in `+-eps_k` pairs; the N nonnegative single-fermion
//! energies determine every excitation energy of the chain as subset sums.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::ising::IsingInstance;
use crate::schedule::{eval_coefficients, AnnealSchedule, OffsetVector};

/// Boltzmann constant over Planck constant, in GHz per kelvin.
pub const KB_OVER_H_GHZ_PER_K: f64 = 1.380649e-23 / 6.62607015e-34 * 1e-9;

/// Default analysis temperature in kelvin.
pub const DEFAULT_TEMPERATURE_K: f64 = 0.012;

/// Single-fermion energies over a grid of normalized times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermionSpectrum {
    pub s_grid: Vec<f64>,
    /// Per grid point, the N nonnegative energies sorted ascending (GHz).
    pub energies: Vec<Vec<f64>>,
}

impl FermionSpectrum {
    /// Minimum single-fermion energy per grid point.
    pub fn gap(&self) -> Vec<f64> {
        self.energies.iter().map(|e| e[0]).collect()
    }

    /// CSV rows `s,k,epsilon_GHz`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,k,epsilon_GHz\n");
        for (s, eps) in self.s_grid.iter().zip(&self.energies) {
            for (k, e) in eps.iter().enumerate() {
                out.push_str(&format!("{:.16e},{},{:.16e}\n", s, k, e));
            }
        }
        out
    }
}

/// Critical-point summary of a spectrum sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalMetrics {
    /// Grid point minimizing the gap (ties resolve to the smallest s).
    pub s_star: f64,
    /// Minimum single-fermion gap in GHz.
    pub delta_star_ghz: f64,
    /// Lowest pair-excitation energy `2 * delta_star` in GHz, for
    /// comparisons against many-body gap conventions.
    pub delta_star_manybody_ghz: f64,
    /// Number of single-fermion levels below the thermal scale at s_star.
    pub k_star: usize,
    pub temperature_k: f64,
    /// `k_B T / h` in GHz.
    pub thermal_scale_ghz: f64,
}

/// Check the instance is an open chain in index order with zero fields,
/// returning its couplings.
fn chain_couplings(instance: &IsingInstance) -> Result<Vec<f64>> {
    let n = instance.num_spins();
    if n < 2 {
        return Err(CoreError::NotAFreeFermionChain(
            "need at least two spins".into(),
        ));
    }
    if !instance.fields_all_zero() {
        return Err(CoreError::NotAFreeFermionChain(
            "longitudinal fields present".into(),
        ));
    }
    if instance.edges().len() != n - 1 {
        return Err(CoreError::NotAFreeFermionChain(format!(
            "{} edges for {} spins",
            instance.edges().len(),
            n
        )));
    }
    let mut couplings = Vec::with_capacity(n - 1);
    for (idx, &(i, j, w)) in instance.edges().iter().enumerate() {
        if (i, j) != (idx, idx + 1) {
            return Err(CoreError::NotAFreeFermionChain(
                "edges do not form a path in index order".into(),
            ));
        }
        couplings.push(w);
    }
    Ok(couplings)
}

/// Single-fermion energies of the chain Hamiltonian at normalized time s,
/// sorted ascending. Offsets enter through the per-site schedule weights.
pub fn chain_bdg_spectrum(
    instance: &IsingInstance,
    schedule: &AnnealSchedule,
    offsets: &OffsetVector,
    s: f64,
) -> Result<Vec<f64>> {
    let couplings = chain_couplings(instance)?;
    let n = instance.num_spins();
    let coef = eval_coefficients(schedule, offsets, instance, s)?;

    // transverse weight a_i = -A_i(s); bond weight b_i = scale_i * J_i
    let mut hop = nalgebra::DMatrix::<f64>::zeros(n, n);
    let mut pair = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        hop[(i, i)] = 2.0 * coef.a[i];
    }
    for (i, &j_val) in couplings.iter().enumerate() {
        let b = coef.edge_scale[i] * j_val;
        hop[(i, i + 1)] = b;
        hop[(i + 1, i)] = b;
        pair[(i, i + 1)] = b;
        pair[(i + 1, i)] = -b;
    }

    let mut bdg = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            bdg[(i, j)] = hop[(i, j)];
            bdg[(i, n + j)] = pair[(i, j)];
            bdg[(n + i, j)] = -pair[(i, j)];
            bdg[(n + i, n + j)] = -hop[(i, j)];
        }
    }

    let mut evals: Vec<f64> = bdg.symmetric_eigen().eigenvalues.iter().copied().collect();
    evals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = evals.last().map_or(1.0, |&v| v.abs().max(1.0));
    let mut eps: Vec<f64> = evals[n..].to_vec();
    for e in &mut eps {
        debug_assert!(*e >= -1e-12 * scale, "negative single-fermion energy {e}");
        *e = e.max(0.0);
    }
    Ok(eps)
}

/// Spectrum at every point of a sorted grid in [0, 1].
pub fn spectrum_sweep(
    instance: &IsingInstance,
    schedule: &AnnealSchedule,
    offsets: &OffsetVector,
    s_grid: &[f64],
) -> Result<FermionSpectrum> {
    if s_grid.is_empty() {
        return Err(CoreError::EmptyInput("s grid"));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0])
        || s_grid.iter().any(|&s| !(0.0..=1.0).contains(&s))
    {
        return Err(CoreError::InvalidParameter(
            "grid must be strictly increasing within [0, 1]".into(),
        ));
    }
    let energies: Result<Vec<Vec<f64>>> = s_grid
        .par_iter()
        .map(|&s| chain_bdg_spectrum(instance, schedule, offsets, s))
        .collect();
    Ok(FermionSpectrum {
        s_grid: s_grid.to_vec(),
        energies: energies?,
    })
}

/// Uniform grid helper covering [0, 1] with `points` samples.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2);
    (0..points)
        .map(|k| k as f64 / (points - 1) as f64)
        .collect()
}

/// Reduce a spectrum sweep to its critical-point metrics at the given
/// temperature.
pub fn critical_metrics(spectrum: &FermionSpectrum, temperature_k: f64) -> Result<CriticalMetrics> {
    if spectrum.s_grid.is_empty() {
        return Err(CoreError::EmptyInput("spectrum"));
    }
    if !(temperature_k >= 0.0) {
        return Err(CoreError::InvalidParameter(
            "temperature must be nonnegative".into(),
        ));
    }
    let gaps = spectrum.gap();
    let mut star = 0usize;
    for (i, &g) in gaps.iter().enumerate() {
        if g < gaps[star] {
            star = i;
        }
    }
    let thermal_scale_ghz = KB_OVER_H_GHZ_PER_K * temperature_k;
    let k_star = spectrum.energies[star]
        .iter()
        .filter(|&&e| e < thermal_scale_ghz)
        .count();
    Ok(CriticalMetrics {
        s_star: spectrum.s_grid[star],
        delta_star_ghz: gaps[star],
        delta_star_manybody_ghz: 2.0 * gaps[star],
        k_star,
        temperature_k,
        thermal_scale_ghz,
    })
}
