//! Offset assignment from averaged effective fields.
//!
//! For each qubit i with neighbors j_1 < ... < j_d, the effective field of a
//! neighbor configuration is `F_i = h_i + sum_t J_{i,j_t} s_{j_t}`. The
//! average of `|F_i|` over neighbor configurations (uniform by default,
//! weighted or restricted to a subset of neighbors as variants) measures
//! how strongly the qubit is coupled to the rest of the system. Averages
//! are normalized to ratios `r_i = avg_i / max_k avg_k`, and offsets are
//! assigned as `delta_i = clamp(|delta|_max * (1 - 2 r_i), lo_i, hi_i)`:
//! the most strongly coupled qubits are delayed, weakly coupled ones
//! advanced.
//!
//! Enumeration order is canonical and documented: neighbors ascending by
//! index; configurations by bitmask with bit t set meaning `s_{j_t} = +1`;
//! the weighted sum accumulates in bitmask order. Tests and external
//! checkers can reproduce the result bit-for-bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::exact::{run_exact, ExactRunConfig};
use crate::error::{CoreError, Result};
use crate::ising::{IsingInstance, SpinConfig};
use crate::oracle::GroundStateSet;
use crate::schedule::{AnnealSchedule, OffsetVector};

/// Largest neighborhood enumerated exactly (2^20 configurations).
pub const MAX_ENUM_DEGREE: usize = 20;

/// Which averaging variant produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldVariant {
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "weighted")]
    Weighted,
    #[serde(rename = "subset")]
    Subset(usize),
}

/// Per-qubit averaged absolute effective fields and their normalized ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveFieldReport {
    pub avg_abs_field: Vec<f64>,
    pub ratios: Vec<f64>,
    pub variant: FieldVariant,
}

impl EffectiveFieldReport {
    /// Write as CSV `qubit,avg_abs_field,ratio,delta` (delta column from a
    /// matching offset vector).
    pub fn to_csv(&self, offsets: &OffsetVector) -> String {
        let mut out = String::from("qubit,avg_abs_field,ratio,delta\n");
        for i in 0..self.avg_abs_field.len() {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}\n",
                i, self.avg_abs_field[i], self.ratios[i], offsets.delta[i]
            ));
        }
        out
    }
}

/// Per-qubit weights over the 2^d neighbor configurations, indexed by the
/// canonical bitmask. Nonnegative, summing to 1 per qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborWeights {
    pub per_qubit: Vec<Vec<f64>>,
}

impl NeighborWeights {
    /// Validate against an instance's neighborhood sizes.
    pub fn validate(&self, instance: &IsingInstance) -> Result<()> {
        let adj = instance.adjacency();
        if self.per_qubit.len() != adj.len() {
            return Err(CoreError::LengthMismatch {
                expected: adj.len(),
                got: self.per_qubit.len(),
            });
        }
        for (i, (w, nb)) in self.per_qubit.iter().zip(&adj).enumerate() {
            if w.len() != 1usize << nb.len() {
                return Err(CoreError::LengthMismatch {
                    expected: 1 << nb.len(),
                    got: w.len(),
                });
            }
            if w.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(CoreError::InvalidParameter(format!(
                    "negative or non-finite weight for qubit {i}"
                )));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(CoreError::InvalidParameter(format!(
                    "weights for qubit {i} sum to {total}, not 1"
                )));
            }
        }
        Ok(())
    }
}

/// Average `|F_i|` and ratios for every qubit.
///
/// With `weights` the per-configuration probabilities are taken from the
/// given table (full neighborhoods only); with `subset_size = Some(M)` each
/// qubit's field keeps only its M strongest couplings (largest `|J|`, ties
/// to the lower index) and averages uniformly over those. The two variants
/// are mutually exclusive.
pub fn effective_field_stats(
    instance: &IsingInstance,
    weights: Option<&NeighborWeights>,
    subset_size: Option<usize>,
) -> Result<EffectiveFieldReport> {
    if weights.is_some() && subset_size.is_some() {
        return Err(CoreError::InvalidParameter(
            "weighted and subset variants cannot be combined".into(),
        ));
    }
    if let Some(w) = weights {
        w.validate(instance)?;
    }
    let adj = instance.adjacency();
    let variant = match (weights, subset_size) {
        (Some(_), _) => FieldVariant::Weighted,
        (_, Some(m)) => FieldVariant::Subset(m),
        _ => FieldVariant::Uniform,
    };

    for (i, nb) in adj.iter().enumerate() {
        let effective = subset_size.map_or(nb.len(), |m| m.min(nb.len()));
        if effective > MAX_ENUM_DEGREE {
            return Err(CoreError::DegreeTooLarge {
                qubit: i,
                degree: nb.len(),
                cap: MAX_ENUM_DEGREE,
            });
        }
    }

    let avg_abs_field: Vec<f64> = (0..instance.num_spins())
        .into_par_iter()
        .map(|i| {
            let neighborhood = select_neighborhood(&adj[i], subset_size);
            match weights {
                Some(w) => average_abs_field(
                    instance.fields()[i],
                    &neighborhood,
                    WeightSource::Table(&w.per_qubit[i]),
                ),
                None => average_abs_field(
                    instance.fields()[i],
                    &neighborhood,
                    WeightSource::Uniform,
                ),
            }
        })
        .collect();

    let max = avg_abs_field.iter().fold(0.0f64, |m, &v| m.max(v));
    if max == 0.0 {
        return Err(CoreError::AllFieldsZero);
    }
    let ratios = avg_abs_field.iter().map(|&v| v / max).collect();
    Ok(EffectiveFieldReport {
        avg_abs_field,
        ratios,
        variant,
    })
}

/// The couplings entering a qubit's field: the full sorted neighborhood, or
/// its M strongest members re-sorted by index.
fn select_neighborhood(neighbors: &[(usize, f64)], subset_size: Option<usize>) -> Vec<f64> {
    match subset_size {
        None => neighbors.iter().map(|&(_, j)| j).collect(),
        Some(m) if m >= neighbors.len() => neighbors.iter().map(|&(_, j)| j).collect(),
        Some(m) => {
            let mut ranked: Vec<(usize, f64)> = neighbors.to_vec();
            // strongest couplings first, ties broken toward lower index
            ranked.sort_by(|a, b| {
                b.1.abs()
                    .partial_cmp(&a.1.abs())
                    .unwrap()
                    .then(a.0.cmp(&b.0))
            });
            ranked.truncate(m);
            ranked.sort_by_key(|&(j, _)| j);
            ranked.into_iter().map(|(_, j)| j).collect()
        }
    }
}

enum WeightSource<'a> {
    Uniform,
    Table(&'a [f64]),
}

/// Canonical enumeration: `sum_m p_m |h + sum_t J_t s_t|` with bit t of m
/// giving the sign of neighbor t. The uniform weight `2^-d` is an exact
/// power of two, so the uniform path and an explicit uniform table agree
/// bit-for-bit.
fn average_abs_field(h: f64, couplings: &[f64], weights: WeightSource) -> f64 {
    let d = couplings.len();
    let configs = 1usize << d;
    let uniform = 1.0 / configs as f64;
    let mut acc = 0.0;
    for m in 0..configs {
        let mut field = h;
        for (t, &j) in couplings.iter().enumerate() {
            let s = if m >> t & 1 == 1 { 1.0 } else { -1.0 };
            field += j * s;
        }
        let p = match weights {
            WeightSource::Uniform => uniform,
            WeightSource::Table(w) => w[m],
        };
        acc += p * field.abs();
    }
    acc
}

/// Assign offsets from ratios: `delta_i = clamp(mag * (1 - 2 r_i), lo, hi)`.
/// Qubits with above-median ratios get negative offsets (delays).
///
/// `delta_max_mag` of zero is allowed and yields all-zero offsets (the
/// baseline point of a sweep).
pub fn assign_offsets(
    report: &EffectiveFieldReport,
    delta_max_mag: f64,
    bounds: &[(f64, f64)],
) -> Result<OffsetVector> {
    if delta_max_mag < 0.0 {
        return Err(CoreError::InvalidParameter(
            "offset magnitude must be nonnegative".into(),
        ));
    }
    if bounds.len() != report.ratios.len() {
        return Err(CoreError::LengthMismatch {
            expected: report.ratios.len(),
            got: bounds.len(),
        });
    }
    for (q, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo <= 0.0 && 0.0 <= hi) {
            return Err(CoreError::InvalidParameter(format!(
                "bounds for qubit {q} must contain zero, got [{lo}, {hi}]"
            )));
        }
    }
    let delta = report
        .ratios
        .iter()
        .zip(bounds)
        .map(|(&r, &(lo, hi))| (delta_max_mag * (1.0 - 2.0 * r)).clamp(lo, hi))
        .collect();
    OffsetVector::new(delta, bounds.to_vec())
}

/// Empirical neighbor-configuration weights from a list of sampled
/// configurations: for every qubit, `p^i(m)` is the frequency with which
/// its neighborhood took the canonical configuration `m` among the samples.
pub fn frequency_weights_from_samples(
    instance: &IsingInstance,
    samples: &[SpinConfig],
) -> Result<NeighborWeights> {
    if samples.is_empty() {
        return Err(CoreError::EmptySamples);
    }
    let adj = instance.adjacency();
    for (i, nb) in adj.iter().enumerate() {
        if nb.len() > MAX_ENUM_DEGREE {
            return Err(CoreError::DegreeTooLarge {
                qubit: i,
                degree: nb.len(),
                cap: MAX_ENUM_DEGREE,
            });
        }
    }
    for s in samples {
        if s.spins.len() != instance.num_spins() {
            return Err(CoreError::LengthMismatch {
                expected: instance.num_spins(),
                got: s.spins.len(),
            });
        }
    }
    let inv = 1.0 / samples.len() as f64;
    let per_qubit = adj
        .iter()
        .map(|nb| {
            let mut w = vec![0.0f64; 1 << nb.len()];
            for s in samples {
                let mut m = 0usize;
                for (t, &(j, _)) in nb.iter().enumerate() {
                    if s.spins[j] == 1 {
                        m |= 1 << t;
                    }
                }
                w[m] += inv;
            }
            w
        })
        .collect();
    Ok(NeighborWeights { per_qubit })
}

/// Search strategy for [`search_offsets`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchStrategy {
    /// Lexicographic scan of a per-qubit lattice of offset levels.
    #[serde(rename = "grid")]
    Grid,
    /// Greedy coordinate sweeps over per-qubit levels.
    #[serde(rename = "coordinate")]
    Coordinate,
    /// Seeded uniform draws from the bounds box.
    #[serde(rename = "random")]
    Random { seed: u64 },
}

/// Outcome of a direct offset search.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub offsets: OffsetVector,
    /// Exactly computed success probability of the returned offsets.
    pub p0: f64,
    /// Number of exact evaluations spent.
    pub evaluations: usize,
}

/// Exhaustive-style search for good offsets at exact-simulation scale.
///
/// Evaluates candidate offset vectors with the exact simulator and returns
/// the best success probability found. The zero vector is always evaluated
/// first, so the result is never worse than the baseline. This is an
/// oracle for validating heuristics at tiny N, not a production optimizer.
pub fn search_offsets(
    instance: &IsingInstance,
    schedule: &AnnealSchedule,
    reference: &GroundStateSet,
    run_config: &ExactRunConfig,
    bounds: &[(f64, f64)],
    strategy: SearchStrategy,
    budget: usize,
) -> Result<SearchResult> {
    if budget == 0 {
        return Err(CoreError::InvalidParameter("budget must be >= 1".into()));
    }
    let n = instance.num_spins();
    if bounds.len() != n {
        return Err(CoreError::LengthMismatch {
            expected: n,
            got: bounds.len(),
        });
    }

    let mut evaluations = 0usize;
    let mut eval = |delta: Vec<f64>| -> Result<(OffsetVector, f64)> {
        let off = OffsetVector::new(delta, bounds.to_vec())?;
        let out = run_exact(instance, schedule, &off, reference, run_config)?;
        evaluations += 1;
        Ok((off, out.p0))
    };

    let (mut best_off, mut best_p0) = eval(vec![0.0; n])?;

    let consider = |cand: Result<(OffsetVector, f64)>,
                        best_off: &mut OffsetVector,
                        best_p0: &mut f64|
     -> Result<()> {
        let (off, p0) = cand?;
        if p0 > *best_p0 {
            *best_p0 = p0;
            *best_off = off;
        }
        Ok(())
    };

    match strategy {
        SearchStrategy::Grid => {
            let remaining = budget - 1;
            if remaining > 0 {
                // largest lattice fitting the budget, between 2 and 5
                // levels per qubit
                let mut levels = 2usize;
                while levels < 5 && (levels + 1).pow(n as u32) <= remaining {
                    levels += 1;
                }
                if levels.pow(n as u32) <= remaining.saturating_mul(2) {
                    let mut idx = vec![0usize; n];
                    let mut spent = 0usize;
                    'grid: loop {
                        let delta: Vec<f64> = idx
                            .iter()
                            .zip(bounds)
                            .map(|(&t, &(lo, hi))| {
                                lo + (hi - lo) * t as f64 / (levels - 1) as f64
                            })
                            .collect();
                        if !delta.iter().all(|&d| d == 0.0) {
                            consider(eval(delta), &mut best_off, &mut best_p0)?;
                            spent += 1;
                            if spent >= remaining {
                                break 'grid;
                            }
                        }
                        // odometer increment
                        let mut q = 0;
                        loop {
                            idx[q] += 1;
                            if idx[q] < levels {
                                break;
                            }
                            idx[q] = 0;
                            q += 1;
                            if q == n {
                                break 'grid;
                            }
                        }
                    }
                }
            }
        }
        SearchStrategy::Coordinate => {
            let levels = 5usize;
            let mut current = best_off.delta.clone();
            let mut spent = 0usize;
            'outer: loop {
                let mut improved = false;
                for q in 0..n {
                    let (lo, hi) = bounds[q];
                    for t in 0..levels {
                        let v = lo + (hi - lo) * t as f64 / (levels - 1) as f64;
                        if v == current[q] {
                            continue;
                        }
                        let mut delta = current.clone();
                        delta[q] = v;
                        let before = best_p0;
                        consider(eval(delta.clone()), &mut best_off, &mut best_p0)?;
                        spent += 1;
                        if best_p0 > before {
                            current = delta;
                            improved = true;
                        }
                        if spent + 1 >= budget {
                            break 'outer;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
        }
        SearchStrategy::Random { seed } => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..budget - 1 {
                let delta = bounds
                    .iter()
                    .map(|&(lo, hi)| rng.gen_range(lo..=hi))
                    .collect();
                consider(eval(delta), &mut best_off, &mut best_p0)?;
            }
        }
    }

    Ok(SearchResult {
        offsets: best_off,
        p0: best_p0,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_asc, ASCParams};
    use crate::ising::InstanceMetadata;
    use crate::oracle::enumerate_ground_states;
    use proptest::prelude::*;

    fn custom(n: usize, edges: Vec<(usize, usize, f64)>, h: Vec<f64>) -> IsingInstance {
        IsingInstance::new(n, edges, h, InstanceMetadata::custom()).unwrap()
    }

    #[test]
    fn isolated_spin_field() {
        let inst = custom(2, vec![(0, 1, -1.0)], vec![0.7, 0.0]);
        // qubit with no neighbors at all
        let lone = custom(1, vec![], vec![0.7]);
        let report = effective_field_stats(&lone, None, None).unwrap();
        assert_eq!(report.avg_abs_field, vec![0.7]);
        assert_eq!(report.ratios, vec![1.0]);
        drop(inst);
    }

    #[test]
    fn two_coupling_average() {
        // couplings (-1, -0.5), h = 0: average of |{-1.5, -0.5, 0.5, 1.5}|
        let inst = custom(
            3,
            vec![(0, 1, -1.0), (1, 2, -0.5)],
            vec![0.0; 3],
        );
        let report = effective_field_stats(&inst, None, None).unwrap();
        assert_eq!(report.avg_abs_field[1], 1.0);
    }

    #[test]
    fn asc_ratio_pattern() {
        for n in [2usize, 3, 4, 6] {
            let inst = gen_asc(&ASCParams {
                n,
                b: 2,
                w1: -1.0,
                w2: -0.5,
            })
            .unwrap();
            let report = effective_field_stats(&inst, None, None).unwrap();
            let adj = inst.adjacency();
            for (i, nb) in adj.iter().enumerate() {
                let touches_heavy = nb.iter().any(|&(_, w)| w == -1.0);
                let expect = if touches_heavy { 1.0 } else { 0.5 };
                assert_eq!(
                    report.ratios[i], expect,
                    "qubit {i} of sector length {n}"
                );
            }
            // offsets follow directly: heavy-side qubits delayed by the
            // full magnitude, light-interior untouched
            let off =
                assign_offsets(&report, 0.05, &vec![(-0.15, 0.15); inst.num_spins()]).unwrap();
            for (i, nb) in adj.iter().enumerate() {
                let touches_heavy = nb.iter().any(|&(_, w)| w == -1.0);
                let expect = if touches_heavy { -0.05 } else { 0.0 };
                assert_eq!(off.delta[i], expect);
            }
        }
    }

    #[test]
    fn midpoint_ratio_gets_zero_offset() {
        let report = EffectiveFieldReport {
            avg_abs_field: vec![1.0, 0.5],
            ratios: vec![1.0, 0.5],
            variant: FieldVariant::Uniform,
        };
        let off = assign_offsets(&report, 0.05, &[(-0.15, 0.15); 2]).unwrap();
        assert_eq!(off.delta, vec![-0.05, 0.0]);
    }

    #[test]
    fn clamped_assignment() {
        let report = EffectiveFieldReport {
            avg_abs_field: vec![0.9, 1.0],
            ratios: vec![0.9, 1.0],
            variant: FieldVariant::Uniform,
        };
        let off = assign_offsets(&report, 0.1, &[(-0.05, 0.05); 2]).unwrap();
        // raw value -0.08 clamps to the bound
        assert_eq!(off.delta, vec![-0.05, -0.05]);
    }

    #[test]
    fn all_zero_fields_error() {
        let inst = custom(2, vec![(0, 1, 0.0)], vec![0.0; 2]);
        assert!(matches!(
            effective_field_stats(&inst, None, None),
            Err(CoreError::AllFieldsZero)
        ));
    }

    #[test]
    fn uniform_weights_match_uniform_path_exactly() {
        let inst = custom(
            4,
            vec![(0, 1, 0.733), (0, 2, -1.21), (1, 2, 0.4), (2, 3, -0.9)],
            vec![0.05, -0.3, 0.0, 1.7],
        );
        let uniform = effective_field_stats(&inst, None, None).unwrap();
        let adj = inst.adjacency();
        let weights = NeighborWeights {
            per_qubit: adj
                .iter()
                .map(|nb| vec![1.0 / (1usize << nb.len()) as f64; 1 << nb.len()])
                .collect(),
        };
        let weighted = effective_field_stats(&inst, Some(&weights), None).unwrap();
        for (a, b) in uniform.avg_abs_field.iter().zip(&weighted.avg_abs_field) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn full_subset_reproduces_exact() {
        let inst = custom(
            4,
            vec![(0, 1, 0.733), (0, 2, -1.21), (0, 3, 0.4), (1, 2, -0.9)],
            vec![0.05, -0.3, 0.0, 1.7],
        );
        let exact = effective_field_stats(&inst, None, None).unwrap();
        let subset = effective_field_stats(&inst, None, Some(3)).unwrap();
        for (a, b) in exact.avg_abs_field.iter().zip(&subset.avg_abs_field) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(subset.variant, FieldVariant::Subset(3));
    }

    #[test]
    fn subset_keeps_strongest_couplings() {
        // qubit 0: couplings 2.0 (to 1), -2.0 (to 2), 0.5 (to 3)
        // subset of 2 keeps the two magnitude-2 couplings
        let inst = custom(
            4,
            vec![(0, 1, 2.0), (0, 2, -2.0), (0, 3, 0.5)],
            vec![0.0; 4],
        );
        let subset = effective_field_stats(&inst, None, Some(2)).unwrap();
        // |F| over {+-2 +-2}: (4 + 0 + 0 + 4)/4 = 2
        assert_eq!(subset.avg_abs_field[0], 2.0);
    }

    #[test]
    fn frequency_weights_examples() {
        let inst = custom(3, vec![(0, 1, 1.0), (1, 2, 1.0)], vec![0.0; 3]);
        let s = SpinConfig::new(vec![1, -1, 1]).unwrap();
        let w = frequency_weights_from_samples(&inst, &[s.clone(), s.clone()]).unwrap();
        // qubit 1 has neighbors (0, 2) both +1 -> mask 0b11
        assert_eq!(w.per_qubit[1], vec![0.0, 0.0, 0.0, 1.0]);

        let t = SpinConfig::new(vec![-1, -1, -1]).unwrap();
        let w2 = frequency_weights_from_samples(&inst, &[s, t]).unwrap();
        assert_eq!(w2.per_qubit[1], vec![0.5, 0.0, 0.0, 0.5]);

        assert!(matches!(
            frequency_weights_from_samples(&inst, &[]),
            Err(CoreError::EmptySamples)
        ));
    }

    #[test]
    fn frequency_weights_concentrate_uniformly() {
        use rand::{Rng, SeedableRng};
        let inst = custom(3, vec![(0, 1, 1.0), (1, 2, 1.0)], vec![0.0; 3]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let samples: Vec<SpinConfig> = (0..20_000)
            .map(|_| {
                SpinConfig::new((0..3).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect())
                    .unwrap()
            })
            .collect();
        let w = frequency_weights_from_samples(&inst, &samples).unwrap();
        // 3 sigma of a fair 4-outcome multinomial over 20k draws
        let sigma = (0.25 * 0.75 / 20_000.0f64).sqrt();
        for &p in &w.per_qubit[1] {
            assert!((p - 0.25).abs() < 3.0 * sigma, "p = {p}");
        }
    }

    #[test]
    fn gauge_invariance_of_averages() {
        let inst = custom(
            4,
            vec![(0, 1, 0.7), (1, 2, -0.25), (2, 3, 1.5), (0, 3, -2.0)],
            vec![0.3, -0.8, 0.0, 0.44],
        );
        let report = effective_field_stats(&inst, None, None).unwrap();
        let gauge = vec![1, -1, 1, -1];
        let gauged = inst.gauge_transformed(&gauge).unwrap();
        let greport = effective_field_stats(&gauged, None, None).unwrap();
        for (a, b) in report.avg_abs_field.iter().zip(&greport.avg_abs_field) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scaling_by_powers_of_two_is_bitwise_invariant(
            js in proptest::collection::vec(-2.0f64..2.0, 5),
            hs in proptest::collection::vec(-1.0f64..1.0, 6),
            exp in -3i32..4,
        ) {
            let alpha = (2.0f64).powi(exp);
            let edges: Vec<_> = js.iter().enumerate().map(|(i, &j)| (i, i + 1, j)).collect();
            let scaled_edges: Vec<_> =
                edges.iter().map(|&(i, j, w)| (i, j, alpha * w)).collect();
            let scaled_h: Vec<f64> = hs.iter().map(|&h| alpha * h).collect();
            let inst = custom(6, edges, hs);
            let scaled = custom(6, scaled_edges, scaled_h);
            let r1 = effective_field_stats(&inst, None, None);
            let r2 = effective_field_stats(&scaled, None, None);
            if let (Ok(r1), Ok(r2)) = (r1, r2) {
                for (a, b) in r1.ratios.iter().zip(&r2.ratios) {
                    prop_assert_eq!(a.to_bits(), b.to_bits());
                }
                let bounds = vec![(-0.15, 0.15); 6];
                let o1 = assign_offsets(&r1, 0.05, &bounds).unwrap();
                let o2 = assign_offsets(&r2, 0.05, &bounds).unwrap();
                for (a, b) in o1.delta.iter().zip(&o2.delta) {
                    prop_assert_eq!(a.to_bits(), b.to_bits());
                }
            }
        }

        #[test]
        fn assignment_monotone_in_ratio(
            r0 in 0.0f64..=1.0,
            r1 in 0.0f64..=1.0,
            mag in 0.0f64..0.2,
        ) {
            let report = EffectiveFieldReport {
                avg_abs_field: vec![r0, r1, 1.0],
                ratios: vec![r0, r1, 1.0],
                variant: FieldVariant::Uniform,
            };
            let off = assign_offsets(&report, mag, &[(-1.0, 1.0); 3]).unwrap();
            if r0 < r1 {
                prop_assert!(off.delta[0] >= off.delta[1]);
                if mag > 0.0 {
                    prop_assert!(off.delta[0] > off.delta[1]);
                }
            }
        }

        #[test]
        fn clamp_respected(
            r in 0.0f64..=1.0,
            lo in -0.2f64..=0.0,
            hi in 0.0f64..=0.2,
            mag in 0.0f64..0.3,
        ) {
            let report = EffectiveFieldReport {
                avg_abs_field: vec![r, 1.0],
                ratios: vec![r, 1.0],
                variant: FieldVariant::Uniform,
            };
            let off = assign_offsets(&report, mag, &[(lo, hi); 2]).unwrap();
            prop_assert!(off.delta[0] >= lo && off.delta[0] <= hi);
        }
    }

    #[test]
    fn search_budget_one_returns_baseline() {
        let inst = custom(2, vec![(0, 1, -1.0)], vec![0.0; 2]);
        let reference = enumerate_ground_states(&inst, 24).unwrap();
        let schedule = AnnealSchedule::synth_default(10.0, 10.0).unwrap();
        let cfg = ExactRunConfig {
            t_ann_ns: 2.0,
            ..ExactRunConfig::default()
        };
        let res = search_offsets(
            &inst,
            &schedule,
            &reference,
            &cfg,
            &[(-0.15, 0.15); 2],
            SearchStrategy::Grid,
            1,
        )
        .unwrap();
        assert!(res.offsets.is_zero());
        assert_eq!(res.evaluations, 1);
    }

    #[test]
    fn search_reported_p0_matches_reevaluation() {
        let inst = custom(2, vec![(0, 1, -1.0)], vec![0.0; 2]);
        let reference = enumerate_ground_states(&inst, 24).unwrap();
        let schedule = AnnealSchedule::synth_default(10.0, 10.0).unwrap();
        let cfg = ExactRunConfig {
            t_ann_ns: 1.5,
            ..ExactRunConfig::default()
        };
        for strategy in [
            SearchStrategy::Grid,
            SearchStrategy::Coordinate,
            SearchStrategy::Random { seed: 4 },
        ] {
            let res = search_offsets(
                &inst,
                &schedule,
                &reference,
                &cfg,
                &[(-0.15, 0.15); 2],
                strategy,
                10,
            )
            .unwrap();
            let redo = run_exact(&inst, &schedule, &res.offsets, &reference, &cfg).unwrap();
            assert_eq!(res.p0.to_bits(), redo.p0.to_bits());
            // baseline is always part of the search set
            let baseline =
                run_exact(&inst, &schedule, &OffsetVector::zeros(2), &reference, &cfg).unwrap();
            assert!(res.p0 >= baseline.p0);
        }
    }
}
