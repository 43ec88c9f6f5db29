//! Annealing schedules, per-qubit offsets, and time-dependent Hamiltonian
//! coefficients.
//!
//! A schedule tabulates the driver curve `A^(c)` and problem curve `B^(c)`
//! against the control signal `c`. Homogeneous operation evaluates both at
//! `c(s) = s`; an offset `delta_i` shifts qubit i's signal to `s + delta_i`,
//! advancing (`delta > 0`) or delaying (`delta < 0`) that qubit. Couplings
//! between qubits i and j scale as `sqrt(B_i B_j)`.
//!
//! Units: energies in GHz, times in ns. Dynamics applies the angular
//! factor `2*pi` once when forming phases, so a constant 1 GHz driver term
//! has a population-return period of 0.5 ns (see the Rabi test in
//! `dynamics::exact`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::ising::{IsingInstance, Real};

/// Default symmetric per-qubit offset range.
pub const DEFAULT_OFFSET_BOUND: f64 = 0.15;

/// Tabulated annealing schedule: sorted samples `(c, A^(c), B^(c))` with
/// piecewise-linear interpolation and clamping beyond the table.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    table: Vec<(f64, f64, f64)>,
}

impl AnnealSchedule {
    /// Build from raw rows, validating strictly increasing `c`,
    /// non-increasing `A^` with an overall decrease, and non-decreasing
    /// `B^` with an overall increase (plateaus at saturation are fine).
    pub fn from_rows(table: Vec<(f64, f64, f64)>) -> Result<Self> {
        if table.len() < 2 {
            return Err(CoreError::NonMonotoneSchedule(
                "need at least two rows".into(),
            ));
        }
        for w in table.windows(2) {
            let (c0, a0, b0) = w[0];
            let (c1, a1, b1) = w[1];
            if !(c1 > c0) {
                return Err(CoreError::NonMonotoneSchedule(format!(
                    "control signal not increasing at c = {c1}"
                )));
            }
            if a1 > a0 {
                return Err(CoreError::NonMonotoneSchedule(format!(
                    "driver curve increases at c = {c1}"
                )));
            }
            if b1 < b0 {
                return Err(CoreError::NonMonotoneSchedule(format!(
                    "problem curve decreases at c = {c1}"
                )));
            }
        }
        let first = table.first().unwrap();
        let last = table.last().unwrap();
        if !(first.1 > last.1) || !(last.2 > first.2) {
            return Err(CoreError::NonMonotoneSchedule(
                "curves must decrease (driver) and increase (problem) overall".into(),
            ));
        }
        if table.iter().any(|&(_, a, b)| a < 0.0 || b < 0.0) {
            return Err(CoreError::NonMonotoneSchedule(
                "negative energy values in table".into(),
            ));
        }
        Ok(AnnealSchedule { table })
    }

    /// Linear default schedule: `A^(c) = A0 * max(0, 1 - c)` and
    /// `B^(c) = B0 * clamp(c, 0, 1)` tabulated over `c in [-0.5, 1.5]`,
    /// which leaves 0.5 of headroom on both sides for offsets.
    pub fn synth_default(a0_ghz: f64, b0_ghz: f64) -> Result<Self> {
        if !(a0_ghz > 0.0) || !(b0_ghz > 0.0) {
            return Err(CoreError::InvalidParameter(
                "schedule endpoints must be positive".into(),
            ));
        }
        Self::from_rows(vec![
            (-0.5, 1.5 * a0_ghz, 0.0),
            (0.0, a0_ghz, 0.0),
            (1.0, 0.0, b0_ghz),
            (1.5, 0.0, b0_ghz),
        ])
    }

    /// Load from CSV with header `c,A_GHz,B_GHz`.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .from_path(path)?;
        {
            let headers = rdr.headers().map_err(|e| CoreError::MalformedFile(e.to_string()))?;
            let expect = ["c", "A_GHz", "B_GHz"];
            if headers.len() != 3 || headers.iter().zip(expect).any(|(h, e)| h.trim() != e) {
                return Err(CoreError::MalformedFile(format!(
                    "schedule CSV must have header c,A_GHz,B_GHz, found {:?}",
                    headers
                )));
            }
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| CoreError::MalformedFile(e.to_string()))?;
            let parse = |idx: usize| -> Result<f64> {
                rec.get(idx)
                    .ok_or_else(|| CoreError::MalformedFile("short row".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| CoreError::MalformedFile(e.to_string()))
            };
            rows.push((parse(0)?, parse(1)?, parse(2)?));
        }
        Self::from_rows(rows)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("c,A_GHz,B_GHz\n");
        for &(c, a, b) in &self.table {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", c, a, b));
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn rows(&self) -> &[(f64, f64, f64)] {
        &self.table
    }

    pub fn c_min(&self) -> f64 {
        self.table.first().unwrap().0
    }

    pub fn c_max(&self) -> f64 {
        self.table.last().unwrap().0
    }

    /// Evaluate `(A^, B^)` at signal value `c`, clamping to the table ends.
    /// Returns the pair and whether clamping occurred.
    pub fn eval_signal(&self, c: f64) -> ((f64, f64), bool) {
        let t = &self.table;
        if c <= t[0].0 {
            return ((t[0].1, t[0].2), c < t[0].0);
        }
        if c >= t[t.len() - 1].0 {
            let last = t[t.len() - 1];
            return ((last.1, last.2), c > last.0);
        }
        // partition_point: first row with c_row > c, so the segment is rows
        // [idx-1, idx]
        let idx = t.partition_point(|row| row.0 <= c);
        let (c0, a0, b0) = t[idx - 1];
        let (c1, a1, b1) = t[idx];
        if c == c0 {
            return ((a0, b0), false);
        }
        let w = (c - c0) / (c1 - c0);
        ((a0 + (a1 - a0) * w, b0 + (b1 - b0) * w), false)
    }

    /// Check the table covers `[s_lo + min_delta, s_hi + max_delta]`.
    pub fn require_headroom(&self, offsets: &OffsetVector, s_lo: f64, s_hi: f64) -> Result<()> {
        let lo = offsets
            .delta
            .iter()
            .fold(f64::INFINITY, |m, &d| m.min(d));
        let hi = offsets
            .delta
            .iter()
            .fold(f64::NEG_INFINITY, |m, &d| m.max(d));
        let need_lo = s_lo + lo.min(0.0);
        let need_hi = s_hi + hi.max(0.0);
        if need_lo < self.c_min() || need_hi > self.c_max() {
            return Err(CoreError::InsufficientHeadroom {
                lo: self.c_min(),
                hi: self.c_max(),
                need_lo,
                need_hi,
            });
        }
        Ok(())
    }
}

/// Per-qubit anneal offsets with their legal ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetVector {
    pub delta: Vec<f64>,
    /// Per-qubit `[lo, hi]` ranges.
    pub bounds: Vec<(f64, f64)>,
}

impl OffsetVector {
    pub fn new(delta: Vec<f64>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if delta.len() != bounds.len() {
            return Err(CoreError::LengthMismatch {
                expected: delta.len(),
                got: bounds.len(),
            });
        }
        for (q, (&d, &(lo, hi))) in delta.iter().zip(&bounds).enumerate() {
            if !(lo <= hi) || d < lo || d > hi {
                return Err(CoreError::OffsetOutOfBounds {
                    qubit: q,
                    delta: d,
                    lo,
                    hi,
                });
            }
        }
        Ok(OffsetVector { delta, bounds })
    }

    /// All-zero offsets with symmetric default bounds.
    pub fn zeros(n: usize) -> Self {
        OffsetVector {
            delta: vec![0.0; n],
            bounds: vec![(-DEFAULT_OFFSET_BOUND, DEFAULT_OFFSET_BOUND); n],
        }
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.delta.iter().all(|&d| d == 0.0)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct File<'a> {
            delta: Vec<Real>,
            bounds: &'a [(f64, f64)],
        }
        serde_json::to_string_pretty(&File {
            delta: self.delta.iter().map(|&d| Real(d)).collect(),
            bounds: &self.bounds,
        })
        .expect("offset serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            delta: Vec<Real>,
            bounds: Vec<(f64, f64)>,
        }
        let f: File = serde_json::from_str(text)?;
        OffsetVector::new(f.delta.into_iter().map(|r| r.0).collect(), f.bounds)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Hamiltonian coefficients at one instant: per-qubit driver weights
/// `A_i(s)`, per-qubit problem weights `B_i(s)`, and the per-edge coupling
/// scale `sqrt(B_i B_j)` in the instance's edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub edge_scale: Vec<f64>,
    /// Set when any shifted signal fell outside the table and was clamped.
    pub clamped: bool,
}

/// Evaluate the per-qubit coefficients of the inhomogeneous Hamiltonian at
/// normalized time `s`: `A_i(s) = A^(s + delta_i)`, `B_i(s) = B^(s + delta_i)`,
/// and `sqrt(B_i B_j)` per edge. Signals outside the table clamp to its end
/// values and set the `clamped` flag.
pub fn eval_coefficients(
    schedule: &AnnealSchedule,
    offsets: &OffsetVector,
    instance: &IsingInstance,
    s: f64,
) -> Result<CoefficientSet> {
    let n = instance.num_spins();
    if offsets.len() != n {
        return Err(CoreError::LengthMismatch {
            expected: n,
            got: offsets.len(),
        });
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(CoreError::InvalidParameter(format!(
            "normalized time s = {s} outside [0, 1]"
        )));
    }
    let mut set = CoefficientSet {
        a: vec![0.0; n],
        b: vec![0.0; n],
        edge_scale: vec![0.0; instance.edges().len()],
        clamped: false,
    };
    eval_coefficients_into(schedule, offsets, instance, s, &mut set);
    Ok(set)
}

/// Allocation-free variant for hot loops; `set` must be sized for the
/// instance.
pub fn eval_coefficients_into(
    schedule: &AnnealSchedule,
    offsets: &OffsetVector,
    instance: &IsingInstance,
    s: f64,
    set: &mut CoefficientSet,
) {
    let n = instance.num_spins();
    debug_assert_eq!(set.a.len(), n);
    debug_assert_eq!(set.edge_scale.len(), instance.edges().len());
    let mut clamped = false;
    for i in 0..n {
        let ((a, b), cl) = schedule.eval_signal(s + offsets.delta[i]);
        set.a[i] = a;
        set.b[i] = b;
        clamped |= cl;
    }
    for (k, &(i, j, _)) in instance.edges().iter().enumerate() {
        set.edge_scale[k] = (set.b[i] * set.b[j]).sqrt();
    }
    set.clamped = clamped;
}
