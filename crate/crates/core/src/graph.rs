//! Chimera hardware-graph topology.
//!
//! A Chimera graph is a `rows x cols` grid of unit cells, each cell a
//! complete bipartite `K_{c,c}` over two sides of `c` qubits. Side-0 qubits
//! couple to the side-0 qubits of the vertically adjacent cells, side-1
//! qubits to the side-1 qubits of the horizontally adjacent cells, so the
//! maximum degree is `c + 2`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Chimera topology with deterministic vertex numbering.
///
/// Vertex index: `((row * cols + col) * 2 + side) * cell_size + k`, i.e.
/// cells row-major, side-major within a cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChimeraGraph {
    pub rows: usize,
    pub cols: usize,
    pub cell_size: usize,
    /// Edge list with `i < j`, in canonical emission order (per cell:
    /// intra-cell couplers, then the coupler bundle to the right, then down).
    pub edges: Vec<(usize, usize)>,
}

impl ChimeraGraph {
    /// Number of vertices: `rows * cols * 2 * cell_size`.
    pub fn num_vertices(&self) -> usize {
        self.rows * self.cols * 2 * self.cell_size
    }

    /// Vertex index for (cell row, cell col, side, position within side).
    pub fn vertex(&self, row: usize, col: usize, side: usize, k: usize) -> usize {
        debug_assert!(row < self.rows && col < self.cols && side < 2 && k < self.cell_size);
        ((row * self.cols + col) * 2 + side) * self.cell_size + k
    }

    /// Vertices of one side of a cell.
    pub fn cell_side(&self, row: usize, col: usize, side: usize) -> Vec<usize> {
        (0..self.cell_size)
            .map(|k| self.vertex(row, col, side, k))
            .collect()
    }

    /// The couplers joining two adjacent cells (empty if not adjacent).
    /// Vertically adjacent cells share side-0 couplers, horizontally
    /// adjacent cells share side-1 couplers.
    pub fn intercell_couplers(
        &self,
        a: (usize, usize),
        b: (usize, usize),
    ) -> Vec<(usize, usize)> {
        let ((r0, c0), (r1, c1)) = if a <= b { (a, b) } else { (b, a) };
        let side = if r0 == r1 && c1 == c0 + 1 {
            1
        } else if c0 == c1 && r1 == r0 + 1 {
            0
        } else {
            return Vec::new();
        };
        (0..self.cell_size)
            .map(|k| (self.vertex(r0, c0, side, k), self.vertex(r1, c1, side, k)))
            .collect()
    }

    /// Per-vertex degree table.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.num_vertices()];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }
}

/// Build a Chimera graph. Edge list is deterministic: cells row-major; per
/// cell the `K_{c,c}` couplers (side-0 index outer, side-1 index inner),
/// then the bundle to the right neighbor, then the bundle downward.
pub fn build_chimera(rows: usize, cols: usize, cell_size: usize) -> Result<ChimeraGraph> {
    if rows == 0 || cols == 0 || cell_size == 0 {
        return Err(CoreError::InvalidParameter(
            "chimera dimensions must be positive".into(),
        ));
    }
    let mut g = ChimeraGraph {
        rows,
        cols,
        cell_size,
        edges: Vec::new(),
    };
    for r in 0..rows {
        for c in 0..cols {
            for a in 0..cell_size {
                for b in 0..cell_size {
                    g.edges.push((g.vertex(r, c, 0, a), g.vertex(r, c, 1, b)));
                }
            }
            if c + 1 < cols {
                for k in 0..cell_size {
                    g.edges.push((g.vertex(r, c, 1, k), g.vertex(r, c + 1, 1, k)));
                }
            }
            if r + 1 < rows {
                for k in 0..cell_size {
                    g.edges.push((g.vertex(r, c, 0, k), g.vertex(r + 1, c, 0, k)));
                }
            }
        }
    }
    debug_assert!(g.edges.iter().all(|&(i, j)| i < j));
    Ok(g)
}

/// Expected Chimera edge count:
/// `rows*cols*cell_size^2 + cell_size*(rows*(cols-1) + cols*(rows-1))`.
pub fn chimera_edge_count(rows: usize, cols: usize, cell_size: usize) -> usize {
    rows * cols * cell_size * cell_size + cell_size * (rows * (cols - 1) + cols * (rows - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_is_k44() {
        let g = build_chimera(1, 1, 4).unwrap();
        assert_eq!(g.num_vertices(), 8);
        assert_eq!(g.edges.len(), 16);
        // complete bipartite: every side-0/side-1 pair present
        for a in 0..4 {
            for b in 0..4 {
                assert!(g.edges.contains(&(a, 4 + b)));
            }
        }
    }

    #[test]
    fn smallest_cell() {
        let g = build_chimera(1, 1, 1).unwrap();
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.edges, vec![(0, 1)]);
    }

    #[test]
    fn full_grid_degree_bound() {
        let g = build_chimera(16, 16, 4).unwrap();
        assert_eq!(g.num_vertices(), 2048);
        assert_eq!(g.edges.len(), chimera_edge_count(16, 16, 4));
        let deg = g.degrees();
        assert_eq!(deg.iter().copied().max(), Some(6));
        // interior cells reach the bound on both sides
        assert_eq!(deg[g.vertex(8, 8, 0, 0)], 6);
        assert_eq!(deg[g.vertex(8, 8, 1, 3)], 6);
    }

    #[test]
    fn edge_count_formula() {
        for rows in 1..5 {
            for cols in 1..5 {
                for cs in 1..5 {
                    let g = build_chimera(rows, cols, cs).unwrap();
                    assert_eq!(g.edges.len(), chimera_edge_count(rows, cols, cs));
                    assert!(g.degrees().iter().all(|&d| d <= cs + 2));
                }
            }
        }
    }

    #[test]
    fn zero_dims_rejected() {
        assert!(build_chimera(0, 1, 4).is_err());
        assert!(build_chimera(1, 1, 0).is_err());
    }

    #[test]
    fn intercell_couplers_match_edges() {
        let g = build_chimera(2, 2, 4).unwrap();
        let horiz = g.intercell_couplers((0, 0), (0, 1));
        let vert = g.intercell_couplers((0, 0), (1, 0));
        assert_eq!(horiz.len(), 4);
        assert_eq!(vert.len(), 4);
        for e in horiz.iter().chain(vert.iter()) {
            assert!(g.edges.contains(e));
        }
        assert!(g.intercell_couplers((0, 0), (1, 1)).is_empty());
    }
}
