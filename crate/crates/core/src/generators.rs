//! Seeded generators for the four benchmark problem classes, plus class
//! membership checkers that re-derive validity from an instance file alone.
//!
//! All generators are pure functions of `(params, seed)`; the same inputs
//! reproduce the same instance byte-for-byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::graph::{build_chimera, ChimeraGraph};
use crate::ising::{InstanceMetadata, IsingInstance, ProblemClass};

/// Chimera grid dimensions shared by the disorder classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    pub rows: usize,
    pub cols: usize,
    pub cell_size: usize,
}

impl Default for GridDims {
    fn default() -> Self {
        GridDims {
            rows: 16,
            cols: 16,
            cell_size: 4,
        }
    }
}

impl GridDims {
    pub fn new(rows: usize, cols: usize) -> Self {
        GridDims {
            rows,
            cols,
            cell_size: 4,
        }
    }

    fn build(&self) -> Result<ChimeraGraph> {
        build_chimera(self.rows, self.cols, self.cell_size)
    }
}

/// Couplers uniform over `{-k, ..., -1, 1, ..., k}`, zero fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct URkDParams {
    pub k: u32,
    pub dims: GridDims,
}

/// Couplers from `{-k, -1, 1, k}`: magnitude 1 with probability `p_light`,
/// magnitude `k` otherwise, sign fair either way. Zero fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourModalParams {
    pub k: u32,
    pub p_light: f64,
    pub dims: GridDims,
}

/// Alternating-sectors chain: `2b + 1` sectors of `n` couplings each,
/// alternating heavy `W1` and light `W2`, both ferromagnetic with
/// `|W1| > |W2| > 0`. The chain has `n*(2b+1) + 1` spins and `b + 1` heavy
/// sectors against `b` light ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ASCParams {
    /// Couplings per sector.
    pub n: usize,
    /// Number of light sectors.
    pub b: usize,
    pub w1: f64,
    pub w2: f64,
}

impl ASCParams {
    pub fn num_spins(&self) -> usize {
        self.n * (2 * self.b + 1) + 1
    }
}

/// How couplers between strong cells of different pairs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum InterCouplingRule {
    /// Independent fair draws from {-1, +1} on every available coupler
    /// between adjacent strong cells.
    #[default]
    #[serde(rename = "uniform_pm1")]
    UniformPm1,
}

/// Weak-strong cluster pairs on the Chimera grid.
///
/// Each pair is one weak cell and one vertically adjacent strong cell, all
/// intra-pair couplings ferromagnetic (-1). Fields are `h_strong` on the
/// strong cell and `-lambda * h_strong` on the weak cell, so the weak
/// field opposes the strong one; for `lambda < 1/2` an isolated pair's
/// unique ground state aligns every spin with the strong field.
///
/// Pairs stack in mirrored columns (weak-strong, strong-weak, ...), which
/// makes strong cells of neighboring pairs adjacent both horizontally and
/// vertically; those couplers are drawn per `inter_coupling_rule`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WSCParams {
    pub pairs: usize,
    pub lambda: f64,
    pub h_strong: f64,
    pub dims: GridDims,
    pub inter_coupling_rule: InterCouplingRule,
}

impl WSCParams {
    pub fn with_pairs(pairs: usize, dims: GridDims) -> Self {
        WSCParams {
            pairs,
            lambda: 0.44,
            h_strong: -1.0,
            dims,
            inter_coupling_rule: InterCouplingRule::default(),
        }
    }

    pub fn h_weak(&self) -> f64 {
        -self.lambda * self.h_strong
    }
}

fn metadata<P: Serialize>(class: ProblemClass, params: &P, seed: Option<u64>) -> InstanceMetadata {
    InstanceMetadata {
        class,
        params: serde_json::to_value(params).expect("params serialize"),
        seed,
    }
}

/// Uniform-range disorder instance on the Chimera graph.
pub fn gen_urkd(params: &URkDParams, seed: u64) -> Result<IsingInstance> {
    if params.k < 1 {
        return Err(CoreError::InvalidParameter("k must be >= 1".into()));
    }
    let graph = params.dims.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = params.k as i64;
    let edges = graph
        .edges
        .iter()
        .map(|&(i, j)| {
            // uniform over 2k values, skipping zero
            let v = rng.gen_range(-k..k);
            let v = if v >= 0 { v + 1 } else { v };
            (i, j, v as f64)
        })
        .collect();
    IsingInstance::new(
        graph.num_vertices(),
        edges,
        vec![0.0; graph.num_vertices()],
        metadata(ProblemClass::Urkd, params, Some(seed)),
    )
}

/// Four-modal disorder instance on the Chimera graph.
pub fn gen_4mrkd(params: &FourModalParams, seed: u64) -> Result<IsingInstance> {
    if params.k < 2 {
        return Err(CoreError::InvalidParameter("k must be >= 2".into()));
    }
    if !(params.p_light > 0.0 && params.p_light < 1.0) {
        return Err(CoreError::InvalidParameter(
            "p_light must lie strictly in (0, 1)".into(),
        ));
    }
    let graph = params.dims.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = graph
        .edges
        .iter()
        .map(|&(i, j)| {
            let mag = if rng.gen_bool(params.p_light) {
                1.0
            } else {
                params.k as f64
            };
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (i, j, sign * mag)
        })
        .collect();
    IsingInstance::new(
        graph.num_vertices(),
        edges,
        vec![0.0; graph.num_vertices()],
        metadata(ProblemClass::FourModal, params, Some(seed)),
    )
}

/// Alternating-sectors chain (deterministic; no RNG involved).
pub fn gen_asc(params: &ASCParams) -> Result<IsingInstance> {
    if params.n == 0 {
        return Err(CoreError::InvalidParameter("sector length must be >= 1".into()));
    }
    if !(params.w1 < 0.0 && params.w2 < 0.0) {
        return Err(CoreError::InvalidParameter(
            "both couplings must be ferromagnetic (negative)".into(),
        ));
    }
    if !(params.w1.abs() > params.w2.abs()) {
        return Err(CoreError::InvalidParameter(
            "|W1| must exceed |W2|".into(),
        ));
    }
    let n_spins = params.num_spins();
    let edges = (1..n_spins)
        .map(|i| {
            // sector of coupling i (1-based) is ceil(i/n); odd sectors heavy
            let sector = i.div_ceil(params.n);
            let w = if sector % 2 == 1 { params.w1 } else { params.w2 };
            (i - 1, i, w)
        })
        .collect();
    IsingInstance::new(
        n_spins,
        edges,
        vec![0.0; n_spins],
        metadata(ProblemClass::Asc, params, None),
    )
}

/// Cell coordinates of the p-th pair under the mirrored-columns layout:
/// `(weak_cell, strong_cell)`.
fn wsc_pair_cells(p: usize, cols: usize) -> ((usize, usize), (usize, usize)) {
    let band = p / cols; // pair row
    let col = p % cols;
    let top = 2 * band;
    if band % 2 == 0 {
        ((top, col), (top + 1, col))
    } else {
        ((top + 1, col), (top, col))
    }
}

/// Weak-strong cluster instance. Vertices are relabeled compactly so the
/// instance has exactly `16 * pairs` spins (for cell size 4); the original
/// Chimera indices are reconstructible from the layout recorded in params.
pub fn gen_wsc(params: &WSCParams, seed: u64) -> Result<IsingInstance> {
    if params.pairs == 0 {
        return Err(CoreError::InvalidParameter("need at least one pair".into()));
    }
    if !(params.lambda > 0.0 && params.lambda < 1.0) {
        return Err(CoreError::InvalidParameter(
            "lambda must lie strictly in (0, 1)".into(),
        ));
    }
    if params.h_strong == 0.0 {
        return Err(CoreError::InvalidParameter("h_strong must be nonzero".into()));
    }
    let dims = params.dims;
    let capacity = (dims.rows / 2) * dims.cols;
    if params.pairs > capacity {
        return Err(CoreError::InvalidParameter(format!(
            "{} pairs do not fit a {}x{} grid ({} pair slots); placements would overlap",
            params.pairs, dims.rows, dims.cols, capacity
        )));
    }
    let graph = dims.build()?;
    let cs = dims.cell_size;
    let h_weak = params.h_weak();

    let mut weak_cells = Vec::with_capacity(params.pairs);
    let mut strong_cells = Vec::with_capacity(params.pairs);
    for p in 0..params.pairs {
        let (w, s) = wsc_pair_cells(p, dims.cols);
        weak_cells.push(w);
        strong_cells.push(s);
    }

    // used Chimera vertices, sorted, then compacted to 0..16*pairs
    let mut used: Vec<usize> = Vec::with_capacity(params.pairs * 4 * cs);
    for &(r, c) in weak_cells.iter().chain(strong_cells.iter()) {
        for side in 0..2 {
            used.extend(graph.cell_side(r, c, side));
        }
    }
    used.sort_unstable();
    let mut remap = vec![usize::MAX; graph.num_vertices()];
    for (new, &old) in used.iter().enumerate() {
        remap[old] = new;
    }

    let mut h = vec![0.0; used.len()];
    for (cells, val) in [(&weak_cells, h_weak), (&strong_cells, params.h_strong)] {
        for &(r, c) in cells.iter() {
            for side in 0..2 {
                for v in graph.cell_side(r, c, side) {
                    h[remap[v]] = val;
                }
            }
        }
    }

    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut push = |a: usize, b: usize, w: f64| {
        let (a, b) = (remap[a], remap[b]);
        let (a, b) = (a.min(b), a.max(b));
        edges.push((a, b, w));
    };

    // intra-pair: both cells internally ferromagnetic plus the coupler
    // bundle joining them
    for p in 0..params.pairs {
        for &(r, c) in [&weak_cells[p], &strong_cells[p]] {
            for a in 0..cs {
                for b in 0..cs {
                    push(graph.vertex(r, c, 0, a), graph.vertex(r, c, 1, b), -1.0);
                }
            }
        }
        for (u, v) in graph.intercell_couplers(weak_cells[p], strong_cells[p]) {
            push(u, v, -1.0);
        }
    }

    // inter-pair couplers between adjacent strong cells, in scan order
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strong_set: std::collections::HashSet<(usize, usize)> =
        strong_cells.iter().copied().collect();
    let mut sorted_strong = strong_cells.clone();
    sorted_strong.sort_unstable();
    for &(r, c) in &sorted_strong {
        for other in [(r, c + 1), (r + 1, c)] {
            if other.0 < dims.rows && other.1 < dims.cols && strong_set.contains(&other) {
                for (u, v) in graph.intercell_couplers((r, c), other) {
                    let w = match params.inter_coupling_rule {
                        InterCouplingRule::UniformPm1 => {
                            if rng.gen_bool(0.5) {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                    };
                    push(u, v, w);
                }
            }
        }
    }

    edges.sort_by_key(|&(i, j, _)| (i, j));
    IsingInstance::new(
        used.len(),
        edges,
        h,
        metadata(ProblemClass::Wsc, params, Some(seed)),
    )
}

/// Re-derive class membership from the instance alone (structure and value
/// checks; the RNG seed is not consulted).
pub fn validate_class(instance: &IsingInstance) -> Result<()> {
    match instance.metadata.class {
        ProblemClass::Urkd => {
            let p: URkDParams = serde_json::from_value(instance.metadata.params.clone())?;
            validate_chimera_disorder(instance, &p.dims, |w| {
                let k = p.k as f64;
                w != 0.0 && w.fract() == 0.0 && w.abs() >= 1.0 && w.abs() <= k
            })
        }
        ProblemClass::FourModal => {
            let p: FourModalParams = serde_json::from_value(instance.metadata.params.clone())?;
            validate_chimera_disorder(instance, &p.dims, |w| {
                w.abs() == 1.0 || w.abs() == p.k as f64
            })
        }
        ProblemClass::Asc => {
            let p: ASCParams = serde_json::from_value(instance.metadata.params.clone())?;
            validate_asc(instance, &p)
        }
        ProblemClass::Wsc => {
            let p: WSCParams = serde_json::from_value(instance.metadata.params.clone())?;
            validate_wsc(instance, &p)
        }
        ProblemClass::Custom => Ok(()),
    }
}

fn validate_chimera_disorder(
    instance: &IsingInstance,
    dims: &GridDims,
    value_ok: impl Fn(f64) -> bool,
) -> Result<()> {
    let graph = dims.build()?;
    if instance.num_spins() != graph.num_vertices() {
        return Err(CoreError::InvalidParameter("vertex count mismatch".into()));
    }
    if !instance.fields_all_zero() {
        return Err(CoreError::InvalidParameter("fields must be zero".into()));
    }
    if instance.edges().len() != graph.edges.len() {
        return Err(CoreError::InvalidParameter("edge count mismatch".into()));
    }
    let mut expected: Vec<(usize, usize)> = graph.edges.clone();
    expected.sort_unstable();
    let mut got: Vec<(usize, usize)> = instance.edges().iter().map(|&(i, j, _)| (i, j)).collect();
    got.sort_unstable();
    if expected != got {
        return Err(CoreError::InvalidParameter("edge set is not Chimera".into()));
    }
    for &(i, j, w) in instance.edges() {
        if !value_ok(w) {
            return Err(CoreError::InvalidParameter(format!(
                "coupling {w} on edge ({i}, {j}) outside the class value set"
            )));
        }
    }
    Ok(())
}

fn validate_asc(instance: &IsingInstance, p: &ASCParams) -> Result<()> {
    let n_spins = p.num_spins();
    if instance.num_spins() != n_spins {
        return Err(CoreError::InvalidParameter(format!(
            "chain should have {} spins, found {}",
            n_spins,
            instance.num_spins()
        )));
    }
    if !instance.fields_all_zero() {
        return Err(CoreError::InvalidParameter("fields must be zero".into()));
    }
    if instance.edges().len() != n_spins - 1 {
        return Err(CoreError::InvalidParameter("not a chain".into()));
    }
    let mut heavy = 0usize;
    let mut light = 0usize;
    let mut prev: Option<f64> = None;
    for (idx, &(i, j, w)) in instance.edges().iter().enumerate() {
        if (i, j) != (idx, idx + 1) {
            return Err(CoreError::InvalidParameter("not a path in index order".into()));
        }
        if w >= 0.0 {
            return Err(CoreError::InvalidParameter(
                "all couplings must be negative".into(),
            ));
        }
        let sector = (idx + 1).div_ceil(p.n);
        let expect = if sector % 2 == 1 { p.w1 } else { p.w2 };
        if w != expect {
            return Err(CoreError::InvalidParameter(format!(
                "coupling {idx} should be {expect}, found {w}"
            )));
        }
        if prev != Some(expect) && idx % p.n == 0 {
            if sector % 2 == 1 {
                heavy += 1;
            } else {
                light += 1;
            }
        }
        prev = Some(expect);
    }
    if heavy != p.b + 1 || light != p.b {
        return Err(CoreError::InvalidParameter(format!(
            "expected {} heavy / {} light sectors, found {heavy} / {light}",
            p.b + 1,
            p.b
        )));
    }
    Ok(())
}

fn validate_wsc(instance: &IsingInstance, p: &WSCParams) -> Result<()> {
    let cs = p.dims.cell_size;
    if instance.num_spins() != p.pairs * 4 * cs {
        return Err(CoreError::InvalidParameter("vertex count mismatch".into()));
    }
    let h_weak = p.h_weak();
    let mut weak = 0usize;
    let mut strong = 0usize;
    for &hv in instance.fields() {
        if hv == h_weak {
            weak += 1;
        } else if hv == p.h_strong {
            strong += 1;
        } else {
            return Err(CoreError::InvalidParameter(format!(
                "field value {hv} is neither h_weak nor h_strong"
            )));
        }
    }
    if weak != strong || weak != p.pairs * 2 * cs {
        return Err(CoreError::InvalidParameter(
            "weak/strong cell populations are unbalanced".into(),
        ));
    }
    for &(i, j, w) in instance.edges() {
        let hi = instance.fields()[i];
        let hj = instance.fields()[j];
        let both_strong = hi == p.h_strong && hj == p.h_strong;
        match w {
            w if w == -1.0 => {}
            w if w == 1.0 && both_strong => {}
            _ => {
                return Err(CoreError::InvalidParameter(format!(
                    "coupling {w} on edge ({i}, {j}) violates the cluster rule"
                )));
            }
        }
    }
    Ok(())
}
