//! Ising problem instances and energy evaluation.
//!
//! An instance is a vertex set `0..n` with per-vertex fields `h` and a list
//! of coupled edges `(i, j, J)` with `i < j`. The classical objective is
//! `E(x) = sum_i h_i x_i + sum_(i,j) J_ij x_i x_j` over `x in {-1,+1}^n`.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CoreError, Result};

/// File format version for instance JSON.
pub const INSTANCE_FORMAT_VERSION: u32 = 1;

/// A real number that serializes as a decimal string with 17 significant
/// digits, so file round-trips reproduce the exact f64 bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:.16e}", self.0))
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a decimal string or number")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<Real, E> {
                v.parse::<f64>().map(Real).map_err(E::custom)
            }
            fn visit_f64<E>(self, v: f64) -> std::result::Result<Real, E> {
                Ok(Real(v))
            }
            fn visit_i64<E>(self, v: i64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_u64<E>(self, v: u64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }
        }
        d.deserialize_any(V)
    }
}

/// Problem-class tag carried in instance metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemClass {
    #[serde(rename = "urkd")]
    Urkd,
    #[serde(rename = "4mrkd")]
    FourModal,
    #[serde(rename = "asc")]
    Asc,
    #[serde(rename = "wsc")]
    Wsc,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let s = match self {
            ProblemClass::Urkd => "urkd",
            ProblemClass::FourModal => "4mrkd",
            ProblemClass::Asc => "asc",
            ProblemClass::Wsc => "wsc",
            ProblemClass::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Optional mask of disabled vertices/edges, for mirroring hardware graphs
/// with defects. Accepted and preserved by the file format; generators in
/// this crate always produce defect-free instances.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectMask {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<(usize, usize)>,
}

/// Generator provenance: class tag, parameters, RNG seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    pub class: ProblemClass,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl InstanceMetadata {
    pub fn custom() -> Self {
        InstanceMetadata {
            class: ProblemClass::Custom,
            params: serde_json::Value::Null,
            seed: None,
        }
    }
}

/// An Ising problem: fields on every vertex, couplings on listed edges.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    h: Vec<f64>,
    pub metadata: InstanceMetadata,
    pub mask: DefectMask,
}

impl IsingInstance {
    /// Construct and validate: edges must satisfy `i < j < n`, no duplicates;
    /// `h` must have length `n`.
    pub fn new(
        n: usize,
        edges: Vec<(usize, usize, f64)>,
        h: Vec<f64>,
        metadata: InstanceMetadata,
    ) -> Result<Self> {
        if h.len() != n {
            return Err(CoreError::LengthMismatch {
                expected: n,
                got: h.len(),
            });
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for &(i, j, _) in &edges {
            if i >= j {
                return Err(CoreError::InvalidEdge {
                    i,
                    j,
                    n,
                    reason: "requires i < j",
                });
            }
            if j >= n {
                return Err(CoreError::InvalidEdge {
                    i,
                    j,
                    n,
                    reason: "vertex out of range",
                });
            }
            if !seen.insert((i, j)) {
                return Err(CoreError::InvalidEdge {
                    i,
                    j,
                    n,
                    reason: "duplicate edge",
                });
            }
        }
        Ok(IsingInstance {
            n,
            edges,
            h,
            metadata,
            mask: DefectMask::default(),
        })
    }

    pub fn num_spins(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    /// Neighbor list `(j, J_ij)` per vertex, neighbors sorted by index.
    /// This ordering is the canonical one used by neighborhood enumerations.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, w) in &self.edges {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        for nb in &mut adj {
            nb.sort_by_key(|&(j, _)| j);
        }
        adj
    }

    /// True if every field is exactly zero.
    pub fn fields_all_zero(&self) -> bool {
        self.h.iter().all(|&v| v == 0.0)
    }

    /// Apply a spin-reversal transform: for `g in {-1,+1}^n`,
    /// `h_i -> g_i h_i` and `J_ij -> g_i g_j J_ij`. Energies satisfy
    /// `E'(g .* x) = E(x)`, so samples from the transformed instance are
    /// mapped back by the same mask.
    pub fn gauge_transformed(&self, gauge: &[i8]) -> Result<IsingInstance> {
        if gauge.len() != self.n {
            return Err(CoreError::LengthMismatch {
                expected: self.n,
                got: gauge.len(),
            });
        }
        debug_assert!(gauge.iter().all(|&g| g == 1 || g == -1));
        let h = self
            .h
            .iter()
            .zip(gauge)
            .map(|(&hi, &g)| f64::from(g) * hi)
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|&(i, j, w)| (i, j, f64::from(gauge[i]) * f64::from(gauge[j]) * w))
            .collect();
        let mut out = IsingInstance::new(self.n, edges, h, self.metadata.clone())?;
        out.mask = self.mask.clone();
        Ok(out)
    }

    /// Classical energy of a configuration: fields first in index order,
    /// then couplings in stored edge order. All energy comparisons in this
    /// crate go through this one summation order.
    pub fn energy(&self, config: &SpinConfig) -> Result<f64> {
        if config.spins.len() != self.n {
            return Err(CoreError::LengthMismatch {
                expected: self.n,
                got: config.spins.len(),
            });
        }
        Ok(self.energy_unchecked(&config.spins))
    }

    pub(crate) fn energy_unchecked(&self, spins: &[i8]) -> f64 {
        let mut e = 0.0;
        for (hi, &s) in self.h.iter().zip(spins) {
            e += hi * f64::from(s);
        }
        for &(i, j, w) in &self.edges {
            e += w * f64::from(spins[i]) * f64::from(spins[j]);
        }
        e
    }

    /// Serialize to the instance JSON format (reals as 17-significant-digit
    /// decimal strings).
    pub fn to_json(&self) -> String {
        let file = InstanceFile::from(self);
        serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

/// On-disk JSON schema: `{format_version, class, params, seed, n,
/// edges: [[i, j, J], ...], h: [...]}` with `i < j` and reals as strings.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format_version: u32,
    class: ProblemClass,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    n: usize,
    edges: Vec<(usize, usize, Real)>,
    h: Vec<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<DefectMask>,
}

impl From<&IsingInstance> for InstanceFile {
    fn from(inst: &IsingInstance) -> Self {
        InstanceFile {
            format_version: INSTANCE_FORMAT_VERSION,
            class: inst.metadata.class,
            params: inst.metadata.params.clone(),
            seed: inst.metadata.seed,
            n: inst.n,
            edges: inst.edges.iter().map(|&(i, j, w)| (i, j, Real(w))).collect(),
            h: inst.h.iter().map(|&v| Real(v)).collect(),
            mask: if inst.mask == DefectMask::default() {
                None
            } else {
                Some(inst.mask.clone())
            },
        }
    }
}

impl InstanceFile {
    fn into_instance(self) -> Result<IsingInstance> {
        if self.format_version != INSTANCE_FORMAT_VERSION {
            return Err(CoreError::MalformedFile(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        let metadata = InstanceMetadata {
            class: self.class,
            params: self.params,
            seed: self.seed,
        };
        let mut inst = IsingInstance::new(
            self.n,
            self.edges.into_iter().map(|(i, j, w)| (i, j, w.0)).collect(),
            self.h.into_iter().map(|v| v.0).collect(),
            metadata,
        )?;
        inst.mask = self.mask.unwrap_or_default();
        Ok(inst)
    }
}

/// A classical spin assignment with entries in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfig {
    pub spins: Vec<i8>,
}

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(CoreError::InvalidParameter(
                "spin values must be -1 or +1".into(),
            ));
        }
        Ok(SpinConfig { spins })
    }

    pub fn all_up(n: usize) -> Self {
        SpinConfig { spins: vec![1; n] }
    }

    pub fn all_down(n: usize) -> Self {
        SpinConfig { spins: vec![-1; n] }
    }

    /// Spin i from bit i of `mask` (set bit means +1).
    pub fn from_bitmask(mask: u64, n: usize) -> Self {
        SpinConfig {
            spins: (0..n)
                .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
                .collect(),
        }
    }

    pub fn flipped(&self) -> Self {
        SpinConfig {
            spins: self.spins.iter().map(|&s| -s).collect(),
        }
    }

    /// Component-wise product with a gauge mask.
    pub fn gauge_mapped(&self, gauge: &[i8]) -> Self {
        SpinConfig {
            spins: self
                .spins
                .iter()
                .zip(gauge)
                .map(|(&s, &g)| s * g)
                .collect(),
        }
    }
}
