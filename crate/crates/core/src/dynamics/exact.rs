//! Exact state-vector annealing dynamics for small systems.
//!
//! The state evolves under the inhomogeneous Hamiltonian
//! `H(s) = g * sum_i A_i(s) sx_i + sum_i B_i(s) h_i sz_i
//!        + sum_(ij) sqrt(B_i B_j) J_ij sz_i sz_j`
//! with `g = -1` by default (driver ground state is the uniform
//! superposition) or `g = +1` as a convention switch. Time stepping is
//! piecewise-constant at interval midpoints with the matrix exponential
//! applied through a Lanczos subspace; adaptive mode controls the step by
//! comparing one step against two half steps.
//!
//! Energies are GHz and times ns; each step applies the phase
//! `exp(-i * 2*pi * t_ann * ds * H)`, so a constant driver term of `A` GHz
//! returns a single spin to its initial state after `1 / (2 A)` ns.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::ising::IsingInstance;
use crate::oracle::GroundStateSet;
use crate::schedule::{eval_coefficients_into, AnnealSchedule, CoefficientSet, OffsetVector};

/// Default cap on exact simulation size (2^16 amplitudes).
pub const DEFAULT_EXACT_CAP: usize = 16;

/// Sign in front of the transverse driver sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DriverSign {
    /// `-sum sx`: the uniform superposition is the driver ground state.
    #[default]
    #[serde(rename = "negative")]
    Negative,
    /// `+sum sx`, kept as a convention switch.
    #[serde(rename = "positive")]
    Positive,
}

impl DriverSign {
    fn factor(self) -> f64 {
        match self {
            DriverSign::Negative => -1.0,
            DriverSign::Positive => 1.0,
        }
    }
}

/// Step-size control for the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepMode {
    /// Fourth-order commutator-free steps with step doubling, local error
    /// kept below `tolerance * ds`.
    #[serde(rename = "adaptive")]
    Adaptive,
    /// A fixed number of equal midpoint (second-order) steps. Mainly for
    /// comparisons that pin the discretization grid.
    #[serde(rename = "fixed")]
    Fixed(usize),
}

/// Configuration for one exact run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactRunConfig {
    pub t_ann_ns: f64,
    /// Global error budget for adaptive stepping (2-norm).
    pub tolerance: f64,
    pub step: StepMode,
    pub driver_sign: DriverSign,
    /// Refuse instances larger than this many spins.
    pub cap: usize,
}

impl Default for ExactRunConfig {
    fn default() -> Self {
        ExactRunConfig {
            t_ann_ns: 20_000.0,
            tolerance: 1e-8,
            step: StepMode::Adaptive,
            driver_sign: DriverSign::Negative,
            cap: DEFAULT_EXACT_CAP,
        }
    }
}

/// A pure state over the computational basis; basis index bit i set means
/// spin i is +1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amps: Vec<Complex64>,
}

impl QuantumState {
    /// Uniform superposition over all basis states.
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        QuantumState { amps: vec![a; dim] }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability of measuring the basis state with the given index.
    pub fn basis_probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }
}

/// Basis index of a spin configuration (bit i set for spin +1).
pub fn basis_index(spins: &[i8]) -> usize {
    spins
        .iter()
        .enumerate()
        .fold(0usize, |m, (i, &s)| if s == 1 { m | 1 << i } else { m })
}

/// Result of an exact evolution.
#[derive(Debug, Clone)]
pub struct ExactRunResult {
    pub state: QuantumState,
    /// Total ground-space population at s = 1.
    pub p0: f64,
    /// `|norm(final) - 1|`.
    pub norm_drift: f64,
    /// Midpoint steps taken.
    pub steps: usize,
    /// Whether any shifted signal was clamped to the schedule table.
    pub clamped: bool,
}

/// Matrix-free Hamiltonian at fixed s: a diagonal (fields + couplings) and
/// per-qubit transverse weights.
struct FrozenHamiltonian {
    diag: Vec<f64>,
    transverse: Vec<f64>,
}

impl FrozenHamiltonian {
    /// Linear mix `wa * H(coef_a) + wb * H(coef_b)`; the Hamiltonian is
    /// linear in its coefficient arrays, so mixing commutes with building.
    fn build_mixed(
        instance: &IsingInstance,
        wa: f64,
        ca: &CoefficientSet,
        wb: f64,
        cb: &CoefficientSet,
        driver: f64,
    ) -> Self {
        let mixed = CoefficientSet {
            a: ca
                .a
                .iter()
                .zip(&cb.a)
                .map(|(&x, &y)| wa * x + wb * y)
                .collect(),
            b: ca
                .b
                .iter()
                .zip(&cb.b)
                .map(|(&x, &y)| wa * x + wb * y)
                .collect(),
            edge_scale: ca
                .edge_scale
                .iter()
                .zip(&cb.edge_scale)
                .map(|(&x, &y)| wa * x + wb * y)
                .collect(),
            clamped: ca.clamped || cb.clamped,
        };
        Self::build(instance, &mixed, driver)
    }

    fn build(instance: &IsingInstance, coef: &CoefficientSet, driver: f64) -> Self {
        let n = instance.num_spins();
        let dim = 1usize << n;
        let mut diag = vec![0.0; dim];
        let h = instance.fields();
        for x in 0..dim {
            let mut e = 0.0;
            for i in 0..n {
                let z = if x >> i & 1 == 1 { 1.0 } else { -1.0 };
                e += coef.b[i] * h[i] * z;
            }
            for (k, &(i, j, w)) in instance.edges().iter().enumerate() {
                let zi = if x >> i & 1 == 1 { 1.0 } else { -1.0 };
                let zj = if x >> j & 1 == 1 { 1.0 } else { -1.0 };
                e += coef.edge_scale[k] * w * zi * zj;
            }
            diag[x] = e;
        }
        let transverse = coef.a.iter().map(|&a| driver * a).collect();
        FrozenHamiltonian { diag, transverse }
    }

    /// `out = H v`.
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.transverse.len();
        for (x, o) in out.iter_mut().enumerate() {
            *o = v[x] * self.diag[x];
        }
        for (i, &a) in self.transverse.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let bit = 1usize << i;
            for x in 0..v.len() {
                // flip partner; each pair visited twice, once per side
                out[x] += v[x ^ bit] * a;
            }
        }
        debug_assert_eq!(1usize << n, v.len());
    }
}

/// Apply `exp(-i * theta * H)` to `psi` via a Lanczos subspace with full
/// reorthogonalization. `tol` bounds the subspace truncation residual.
fn expm_apply(
    ham: &FrozenHamiltonian,
    theta: f64,
    psi: &[Complex64],
    tol: f64,
    max_krylov: usize,
) -> Result<Vec<Complex64>> {
    let dim = psi.len();
    let beta0 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if beta0 == 0.0 {
        return Ok(psi.to_vec());
    }

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(max_krylov);
    basis.push(psi.iter().map(|a| a / beta0).collect());
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];

    for m in 1..=max_krylov {
        let v = &basis[m - 1];
        ham.apply(v, &mut w);
        // Hermitian H: diagonal projection is real
        let alpha: f64 = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        alphas.push(alpha);
        for (wx, vx) in w.iter_mut().zip(v) {
            *wx -= vx * alpha;
        }
        if m >= 2 {
            let beta_prev = betas[m - 2];
            for (wx, ux) in w.iter_mut().zip(&basis[m - 2]) {
                *wx -= ux * beta_prev;
            }
        }
        // full reorthogonalization against the whole basis
        for u in &basis {
            let overlap: Complex64 = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (wx, ux) in w.iter_mut().zip(u) {
                *wx -= ux * overlap;
            }
        }
        let beta = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();

        // exponential of the tridiagonal projection
        let small = expm_tridiag(&alphas, &betas, theta);
        // residual estimate: weight that would spill into the next vector
        let spill = beta * small[m - 1].norm();
        let happy = beta < 1e-12;
        if spill <= tol || happy || m == max_krylov {
            if !(spill <= tol || happy) {
                return Err(CoreError::IntegratorFailure { tol, s: f64::NAN });
            }
            let mut out = vec![Complex64::new(0.0, 0.0); dim];
            for (coef, u) in small.iter().zip(&basis) {
                let c = coef * beta0;
                for (ox, ux) in out.iter_mut().zip(u) {
                    *ox += ux * c;
                }
            }
            return Ok(out);
        }
        betas.push(beta);
        basis.push(w.iter().map(|a| a / beta).collect());
    }
    unreachable!("loop returns by max_krylov");
}

/// First column of `exp(-i * theta * T)` for the real symmetric tridiagonal
/// `T` given by `alphas` / `betas`. Computed by substepped Taylor series
/// (each substep keeps `|tau| * ||T|| <= 1/2`, so partial sums are stable
/// and accurate to roundoff).
fn expm_tridiag(alphas: &[f64], betas: &[f64], theta: f64) -> Vec<Complex64> {
    let m = alphas.len();
    if m == 1 {
        return vec![(-Complex64::i() * theta * alphas[0]).exp()];
    }
    let norm1: f64 = (0..m)
        .map(|i| {
            alphas[i].abs()
                + if i > 0 { betas[i - 1].abs() } else { 0.0 }
                + if i < m - 1 { betas[i].abs() } else { 0.0 }
        })
        .fold(0.0, f64::max);
    let substeps = (2.0 * theta.abs() * norm1).ceil().max(1.0) as usize;
    let tau = theta / substeps as f64;

    let tri_apply = |v: &[Complex64], out: &mut [Complex64]| {
        for i in 0..m {
            let mut acc = v[i] * alphas[i];
            if i > 0 {
                acc += v[i - 1] * betas[i - 1];
            }
            if i < m - 1 {
                acc += v[i + 1] * betas[i];
            }
            out[i] = acc;
        }
    };

    let mut y = vec![Complex64::new(0.0, 0.0); m];
    y[0] = Complex64::new(1.0, 0.0);
    let mut term = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = vec![Complex64::new(0.0, 0.0); m];
    for _ in 0..substeps {
        term.copy_from_slice(&y);
        for order in 1..64 {
            tri_apply(&term, &mut scratch);
            let f = Complex64::new(0.0, -tau / order as f64);
            let mut mag = 0.0f64;
            for (t, s) in term.iter_mut().zip(&scratch) {
                *t = s * f;
                mag += t.norm_sqr();
            }
            for (yx, t) in y.iter_mut().zip(&term) {
                *yx += t;
            }
            if mag.sqrt() < 1e-18 {
                break;
            }
        }
    }
    y
}

const MAX_KRYLOV: usize = 40;

/// Interior values of s at which any qubit's shifted signal `s + delta_i`
/// crosses a schedule table node, bracketed by 0 and 1.
fn signal_knots(schedule: &AnnealSchedule, offsets: &OffsetVector) -> Vec<f64> {
    let mut deltas: Vec<f64> = offsets.delta.clone();
    deltas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    deltas.dedup();
    let mut knots = vec![0.0, 1.0];
    for &(c, _, _) in schedule.rows() {
        for &d in &deltas {
            let s = c - d;
            if s > 1e-12 && s < 1.0 - 1e-12 {
                knots.push(s);
            }
        }
    }
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    knots
}

struct Stepper<'a> {
    instance: &'a IsingInstance,
    schedule: &'a AnnealSchedule,
    offsets: &'a OffsetVector,
    driver: f64,
    omega: f64, // 2*pi*t_ann
    coef: CoefficientSet,
    coef2: CoefficientSet,
    clamped: bool,
}

/// Gauss-Legendre nodes and mixing weights of the fourth-order
/// commutator-free propagator
/// `exp(-i th (a2 H1 + a1 H2)) exp(-i th (a1 H1 + a2 H2))`.
const CF4_NODE_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6
const CF4_W_NEAR: f64 = 0.538_675_134_594_812_9; // 1/4 + sqrt(3)/6
const CF4_W_FAR: f64 = -0.038_675_134_594_812_88; // 1/4 - sqrt(3)/6

impl<'a> Stepper<'a> {
    fn eval_at(&mut self, s: f64, second: bool) {
        let s = s.clamp(0.0, 1.0);
        if second {
            eval_coefficients_into(self.schedule, self.offsets, self.instance, s, &mut self.coef2);
            self.clamped |= self.coef2.clamped;
        } else {
            eval_coefficients_into(self.schedule, self.offsets, self.instance, s, &mut self.coef);
            self.clamped |= self.coef.clamped;
        }
    }

    /// One midpoint (second-order) step `s0 -> s1`.
    fn step_midpoint(
        &mut self,
        psi: &[Complex64],
        s0: f64,
        s1: f64,
        tol: f64,
    ) -> Result<Vec<Complex64>> {
        self.eval_at(0.5 * (s0 + s1), false);
        let ham = FrozenHamiltonian::build(self.instance, &self.coef, self.driver);
        expm_apply(&ham, self.omega * (s1 - s0), psi, tol, MAX_KRYLOV)
    }

    /// One fourth-order commutator-free step `s0 -> s1` (two exponentials
    /// over Hamiltonians sampled at the Gauss nodes).
    fn step_cf4(
        &mut self,
        psi: &[Complex64],
        s0: f64,
        s1: f64,
        tol: f64,
    ) -> Result<Vec<Complex64>> {
        let ds = s1 - s0;
        let mid = 0.5 * (s0 + s1);
        self.eval_at(mid - CF4_NODE_OFFSET * ds, false);
        self.eval_at(mid + CF4_NODE_OFFSET * ds, true);
        let first = FrozenHamiltonian::build_mixed(
            self.instance,
            CF4_W_NEAR,
            &self.coef,
            CF4_W_FAR,
            &self.coef2,
            self.driver,
        );
        let second = FrozenHamiltonian::build_mixed(
            self.instance,
            CF4_W_FAR,
            &self.coef,
            CF4_W_NEAR,
            &self.coef2,
            self.driver,
        );
        let theta = self.omega * ds;
        let intermediate = expm_apply(&first, theta, psi, tol, MAX_KRYLOV)?;
        expm_apply(&second, theta, &intermediate, tol, MAX_KRYLOV)
    }
}

/// Integrate the annealing evolution from the uniform superposition at
/// `s = 0` to `s = 1` and project onto the reference ground states.
pub fn run_exact(
    instance: &IsingInstance,
    schedule: &AnnealSchedule,
    offsets: &OffsetVector,
    reference: &GroundStateSet,
    config: &ExactRunConfig,
) -> Result<ExactRunResult> {
    let n = instance.num_spins();
    if n > config.cap {
        return Err(CoreError::ExactCapExceeded { n, cap: config.cap });
    }
    if offsets.len() != n {
        return Err(CoreError::LengthMismatch {
            expected: n,
            got: offsets.len(),
        });
    }
    if !(config.t_ann_ns > 0.0) || !(config.tolerance > 0.0) {
        return Err(CoreError::InvalidParameter(
            "annealing time and tolerance must be positive".into(),
        ));
    }
    // bounds are validated by construction of OffsetVector
    let empty_coef = CoefficientSet {
        a: vec![0.0; n],
        b: vec![0.0; n],
        edge_scale: vec![0.0; instance.edges().len()],
        clamped: false,
    };
    let mut stepper = Stepper {
        instance,
        schedule,
        offsets,
        driver: config.driver_sign.factor(),
        omega: 2.0 * std::f64::consts::PI * config.t_ann_ns,
        coef: empty_coef.clone(),
        coef2: empty_coef,
        clamped: false,
    };

    let mut psi = QuantumState::uniform(n).amps;
    let mut steps = 0usize;

    match config.step {
        StepMode::Fixed(substeps) => {
            if substeps == 0 {
                return Err(CoreError::InvalidParameter("substeps must be >= 1".into()));
            }
            let krylov_tol = config.tolerance / substeps as f64;
            for k in 0..substeps {
                let s0 = k as f64 / substeps as f64;
                let s1 = (k + 1) as f64 / substeps as f64;
                psi = stepper.step_midpoint(&psi, s0, s1, krylov_tol)?;
                steps += 1;
            }
        }
        StepMode::Adaptive => {
            // the schedule is only piecewise smooth: split the anneal at
            // every s where some qubit's shifted signal crosses a table
            // node, so steps never straddle a kink
            let knots = signal_knots(schedule, offsets);
            for window in knots.windows(2) {
                let (a, b) = (window[0], window[1]);
                let mut s = a;
                let mut ds = ((4.0 / stepper.omega).min(0.05).max(1e-7)).min(b - a);
                let min_ds = 1e-9;
                while s < b {
                    ds = ds.min(b - s);
                    let budget = (config.tolerance * ds).max(1e-14);
                    let krylov_tol = 0.05 * budget;
                    let full = stepper.step_cf4(&psi, s, s + ds, krylov_tol)?;
                    let half = stepper.step_cf4(&psi, s, s + 0.5 * ds, krylov_tol)?;
                    let halves = stepper.step_cf4(&half, s + 0.5 * ds, s + ds, krylov_tol)?;
                    let err: f64 = full
                        .iter()
                        .zip(&halves)
                        .map(|(x, y)| (x - y).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    if err <= budget {
                        psi = halves;
                        s += ds;
                        steps += 2;
                        if err < 0.05 * budget {
                            ds *= 1.7;
                        }
                    } else {
                        // fourth order: scale toward the permitted step
                        let shrink = (budget / err).powf(0.2).clamp(0.25, 0.9);
                        ds *= shrink;
                        if ds < min_ds {
                            return Err(CoreError::IntegratorFailure {
                                tol: config.tolerance,
                                s,
                            });
                        }
                    }
                }
            }
        }
    }

    let state = QuantumState { amps: psi };
    let p0 = reference
        .states
        .iter()
        .map(|cfg| state.basis_probability(basis_index(&cfg.spins)))
        .sum();
    let norm_drift = (state.norm() - 1.0).abs();
    Ok(ExactRunResult {
        state,
        p0,
        norm_drift,
        steps,
        clamped: stepper.clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{InstanceMetadata, SpinConfig};
    use crate::oracle::enumerate_ground_states;

    fn single_spin(h: f64) -> IsingInstance {
        IsingInstance::new(1, vec![], vec![h], InstanceMetadata::custom()).unwrap()
    }

    fn linear() -> AnnealSchedule {
        AnnealSchedule::synth_default(10.0, 10.0).unwrap()
    }

    #[test]
    fn rabi_period_calibrates_units() {
        // constant H = -A sx on one spin, A = 1 GHz: flipped population is
        // sin^2(2 pi A t), so t = 1/(4A) ns flips fully and t = 1/(2A)
        // returns. theta = 2 pi t for expm_apply.
        let inst = single_spin(0.0);
        let coef = CoefficientSet {
            a: vec![1.0],
            b: vec![0.0],
            edge_scale: vec![],
            clamped: false,
        };
        let ham = FrozenHamiltonian::build(&inst, &coef, -1.0);
        let psi0 = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let theta_flip = 2.0 * std::f64::consts::PI * 0.25;
        let psi_q = expm_apply(&ham, theta_flip, &psi0, 1e-12, 10).unwrap();
        assert!((psi_q[1].norm_sqr() - 1.0).abs() < 1e-10);
        let theta_return = 2.0 * std::f64::consts::PI * 0.5;
        let psi_h = expm_apply(&ham, theta_return, &psi0, 1e-12, 10).unwrap();
        assert!((psi_h[0].norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn adiabatic_single_spin() {
        let inst = single_spin(-1.0);
        let gs = enumerate_ground_states(&inst, 24).unwrap();
        assert_eq!(gs.states, vec![SpinConfig::all_up(1)]);
        let cfg = ExactRunConfig {
            t_ann_ns: 50.0,
            ..Default::default()
        };
        let out = run_exact(&inst, &linear(), &OffsetVector::zeros(1), &gs, &cfg).unwrap();
        assert!(out.p0 > 0.999, "p0 = {}", out.p0);
        assert!(out.norm_drift < 1e-8);
    }

    #[test]
    fn sudden_limit_projects_uniform() {
        // t_ann -> 0: the state stays uniform, p0 -> d0 / 2^N
        let inst = IsingInstance::new(
            3,
            vec![(0, 1, -1.0), (1, 2, -1.0)],
            vec![0.0; 3],
            InstanceMetadata::custom(),
        )
        .unwrap();
        let gs = enumerate_ground_states(&inst, 24).unwrap();
        assert_eq!(gs.degeneracy(), 2);
        let cfg = ExactRunConfig {
            t_ann_ns: 1e-5,
            ..Default::default()
        };
        let out = run_exact(&inst, &linear(), &OffsetVector::zeros(3), &gs, &cfg).unwrap();
        let expect = 2.0 / 8.0;
        assert!((out.p0 - expect).abs() < 1e-4, "p0 = {}", out.p0);
    }

    #[test]
    fn zero_offsets_match_homogeneous_reference() {
        // independent dense reference for the homogeneous case
        let inst = IsingInstance::new(
            4,
            vec![(0, 1, 0.5), (1, 2, -1.0), (2, 3, 0.75), (0, 3, -0.25)],
            vec![0.1, -0.2, 0.0, 0.3],
            InstanceMetadata::custom(),
        )
        .unwrap();
        let gs = enumerate_ground_states(&inst, 24).unwrap();
        let schedule = linear();
        let substeps = 600;
        let cfg = ExactRunConfig {
            t_ann_ns: 3.0,
            step: StepMode::Fixed(substeps),
            ..Default::default()
        };
        let out = run_exact(&inst, &schedule, &OffsetVector::zeros(4), &gs, &cfg).unwrap();
        let reference =
            homogeneous_reference(&inst, &schedule, 3.0, substeps, DriverSign::Negative);
        let p0_ref: f64 = gs
            .states
            .iter()
            .map(|c| reference[basis_index(&c.spins)].norm_sqr())
            .sum();
        assert!(
            (out.p0 - p0_ref).abs() < 1e-10,
            "p0 = {}, ref = {}",
            out.p0,
            p0_ref
        );
    }

    #[test]
    fn cap_enforced() {
        let inst = IsingInstance::new(
            3,
            vec![(0, 1, -1.0)],
            vec![0.0; 3],
            InstanceMetadata::custom(),
        )
        .unwrap();
        let gs = GroundStateSet {
            energy: 0.0,
            states: vec![SpinConfig::all_up(3)],
            certified: false,
        };
        let cfg = ExactRunConfig {
            cap: 2,
            ..Default::default()
        };
        assert!(matches!(
            run_exact(&inst, &linear(), &OffsetVector::zeros(3), &gs, &cfg),
            Err(CoreError::ExactCapExceeded { .. })
        ));
    }

    #[test]
    fn gauge_equivalence_of_p0() {
        let inst = IsingInstance::new(
            4,
            vec![(0, 1, 0.5), (1, 2, -1.0), (2, 3, 0.75)],
            vec![0.1, -0.2, 0.0, 0.3],
            InstanceMetadata::custom(),
        )
        .unwrap();
        let gauge = vec![1, -1, 1, -1];
        let gauged = inst.gauge_transformed(&gauge).unwrap();
        let gs = enumerate_ground_states(&inst, 24).unwrap();
        let gs_g = enumerate_ground_states(&gauged, 24).unwrap();
        let cfg = ExactRunConfig {
            t_ann_ns: 2.0,
            ..Default::default()
        };
        let off = OffsetVector::zeros(4);
        let a = run_exact(&inst, &linear(), &off, &gs, &cfg).unwrap();
        let b = run_exact(&gauged, &linear(), &off, &gs_g, &cfg).unwrap();
        // the two evolutions round independently; agreement is limited by
        // the integrator tolerance, not exact bit equality
        assert!((a.p0 - b.p0).abs() < 1e-9, "{} vs {}", a.p0, b.p0);
    }

    /// Dense homogeneous-schedule propagator written against the global
    /// `A(s), B(s)` form, with a Taylor-series exponential. Shares only the
    /// midpoint s-grid with the production path.
    pub(crate) fn homogeneous_reference(
        instance: &IsingInstance,
        schedule: &AnnealSchedule,
        t_ann_ns: f64,
        substeps: usize,
        driver: DriverSign,
    ) -> Vec<Complex64> {
        let n = instance.num_spins();
        let dim = 1usize << n;
        let omega = 2.0 * std::f64::consts::PI * t_ann_ns;
        let mut psi = vec![Complex64::new(1.0 / (dim as f64).sqrt(), 0.0); dim];
        for k in 0..substeps {
            let mid = (k as f64 + 0.5) / substeps as f64;
            let ((a_s, b_s), _) = schedule.eval_signal(mid);
            // dense H
            let mut h = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
            for x in 0..dim {
                let mut diag = 0.0;
                for (i, &hv) in instance.fields().iter().enumerate() {
                    let z = if x >> i & 1 == 1 { 1.0 } else { -1.0 };
                    diag += b_s * hv * z;
                }
                for &(i, j, w) in instance.edges() {
                    let zi = if x >> i & 1 == 1 { 1.0 } else { -1.0 };
                    let zj = if x >> j & 1 == 1 { 1.0 } else { -1.0 };
                    diag += b_s * w * zi * zj;
                }
                h[x][x] = Complex64::new(diag, 0.0);
                for i in 0..n {
                    h[x][x ^ (1 << i)] += Complex64::new(driver.factor() * a_s, 0.0);
                }
            }
            // scaled Taylor expm: split the phase into safe chunks
            let theta = omega / substeps as f64;
            let scale = h
                .iter()
                .map(|row| row.iter().map(|c| c.norm()).sum::<f64>())
                .fold(0.0f64, f64::max);
            let chunks = (theta * scale / 4.0).ceil().max(1.0) as usize;
            let dt = theta / chunks as f64;
            for _ in 0..chunks {
                let mut acc = psi.clone();
                let mut term = psi.clone();
                for order in 1..40 {
                    let mut next = vec![Complex64::new(0.0, 0.0); dim];
                    for (x, nx) in next.iter_mut().enumerate() {
                        let mut s = Complex64::new(0.0, 0.0);
                        for (y, &t_val) in term.iter().enumerate() {
                            if h[x][y] != Complex64::new(0.0, 0.0) {
                                s += h[x][y] * t_val;
                            }
                        }
                        *nx = s * Complex64::new(0.0, -dt) / order as f64;
                    }
                    let mag: f64 = next.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                    for (a, b) in acc.iter_mut().zip(&next) {
                        *a += b;
                    }
                    term = next;
                    if mag < 1e-16 {
                        break;
                    }
                }
                psi = acc;
            }
        }
        psi
    }
}

