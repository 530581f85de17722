//! Synthetic graphs drawn from a stochastic block model.

use alloc::vec::Vec;

use rand::Rng;

use crate::blockmodel::Mode;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

/// Samples a graph in which every admissible pair `(u, v)` carries an edge
/// independently with probability `p[t(u) * k + t(v)]` (undirected graphs use
/// the `(min, max)` cell).
pub fn sample_block_model(types: &[usize], k: usize, p: &[f64], mode: Mode, seed: u64) -> Result<Graph> {
    if p.len() != k * k {
        return Err(Error::LengthMismatch { expected: k * k, found: p.len() });
    }
    if let Some((vertex, &ty)) = types.iter().enumerate().find(|(_, &t)| t >= k) {
        return Err(Error::TypeOutOfRange { vertex, ty, k });
    }
    let n = types.len();
    let mut rng = seed::stream(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if (u == v && !mode.allows_self_loops()) || (!mode.is_directed() && v < u) {
                continue;
            }
            let (a, b) = (types[u], types[v]);
            let (a, b) = if mode.is_directed() || a <= b { (a, b) } else { (b, a) };
            if rng.random::<f64>() < p[a * k + b] {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, mode.is_directed(), mode.allows_self_loops(), edges)
}

/// Planted partition: `sizes[i]` vertices of type `i` laid out contiguously,
/// edge probability `p_in` within a group and `p_out` across groups.
pub fn planted_partition(sizes: &[usize], p_in: f64, p_out: f64, mode: Mode, seed: u64) -> Result<(Graph, Vec<usize>)> {
    let k = sizes.len();
    let types: Vec<usize> = sizes.iter().enumerate().flat_map(|(i, &s)| core::iter::repeat_n(i, s)).collect();
    let p: Vec<f64> = (0..k * k).map(|c| if c / k == c % k { p_in } else { p_out }).collect();
    let g = sample_block_model(&types, k, &p, mode, seed)?;
    Ok((g, types))
}

/// Erdős–Rényi graph: every admissible pair independently with probability `density`.
pub fn random_graph(n: usize, mode: Mode, density: f64, seed: u64) -> Graph {
    sample_block_model(&alloc::vec![0; n], 1, &[density], mode, seed).expect("single-block parameters are always valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_partition_layout() {
        let (g, t) = planted_partition(&[3, 2], 1.0, 0.0, Mode::UndirectedNoLoops, 1).unwrap();
        assert_eq!(t, [0, 0, 0, 1, 1]);
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2), (3, 4)]);
    }

    #[test]
    fn sampling_is_seeded() {
        let a = random_graph(12, Mode::DirectedNoLoops, 0.3, 9);
        assert_eq!(a, random_graph(12, Mode::DirectedNoLoops, 0.3, 9));
        assert!(a.edges().iter().all(|(u, v)| u != v));
    }
}
