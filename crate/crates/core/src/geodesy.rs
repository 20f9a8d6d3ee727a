//! Graph approximations of intrinsic distances under `ḡ`.
//!
//! Shortest paths run on the edge graph of the mesh, optionally refined with
//! Steiner nodes on every edge that are joined across each face. Graph paths
//! are polyhedral paths on the surface, so graph distances never undercut the
//! polyhedral geodesic distance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quadrature::GaussLegendre;
use crate::{ConformalAmbient, Error, ImmersedMesh, Result, Vec3};

/// Sources evaluated per parallel round of the diameter search.
const DIAMETER_BATCH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphOptions {
    /// Gauss–Legendre order for edge weights (1 is the midpoint rule).
    pub quadrature_order: usize,
    /// Steiner nodes inserted on each edge (0 disables refinement).
    pub steiner_per_edge: usize,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions { quadrature_order: 1, steiner_per_edge: 0 }
    }
}

impl GraphOptions {
    pub fn with_steiner(steiner_per_edge: usize) -> Self {
        GraphOptions { steiner_per_edge, ..Default::default() }
    }
}

/// Undirected graph in compressed adjacency form. Nodes `0..vertex_count()`
/// are the mesh vertices; Steiner nodes follow.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    vertices: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightedGraph {
    pub fn build(mesh: &ImmersedMesh, a: &ConformalAmbient, opts: &GraphOptions) -> Result<Self> {
        if opts.quadrature_order == 0 {
            return Err(Error::invalid("quadrature order must be at least 1"));
        }
        let rule = GaussLegendre::new(opts.quadrature_order);
        let k = opts.steiner_per_edge;
        let mut nodes: Vec<Vec3> = mesh.positions().to_vec();
        let mut pairs: Vec<(usize, usize)> = Vec::new();

        let edges = mesh.edges();
        let mut chain_of = std::collections::HashMap::with_capacity(edges.len());
        for &(u, v) in &edges {
            pairs.push((u, v));
            if k == 0 {
                continue;
            }
            let (pu, pv) = (*mesh.position(u), *mesh.position(v));
            let mut chain = Vec::with_capacity(k + 2);
            chain.push(u);
            for i in 1..=k {
                let t = i as f64 / (k + 1) as f64;
                nodes.push(pu + (pv - pu) * t);
                chain.push(nodes.len() - 1);
            }
            chain.push(v);
            for w in chain.windows(2) {
                pairs.push((w[0], w[1]));
            }
            chain_of.insert((u, v), chain[1..=k].to_vec());
        }
        if k > 0 {
            for f in mesh.faces() {
                // Nodes on each side of the face, tagged by side.
                let mut on_face: Vec<(usize, [bool; 3])> = Vec::with_capacity(3 + 3 * k);
                for (i, &c) in f.iter().enumerate() {
                    let mut sides = [false; 3];
                    sides[i] = true;
                    sides[(i + 2) % 3] = true;
                    on_face.push((c, sides));
                }
                for i in 0..3 {
                    let (u, v) = (f[i], f[(i + 1) % 3]);
                    let mut sides = [false; 3];
                    sides[i] = true;
                    for &s in &chain_of[&(u.min(v), u.max(v))] {
                        on_face.push((s, sides));
                    }
                }
                for x in 0..on_face.len() {
                    for y in x + 1..on_face.len() {
                        let shared = (0..3).any(|s| on_face[x].1[s] && on_face[y].1[s]);
                        if !shared {
                            pairs.push((on_face[x].0, on_face[y].0));
                        }
                    }
                }
            }
        }
        for p in &nodes {
            a.ensure_contains(p)?;
        }

        let weighted: Vec<(usize, usize, f64)> =
            pairs.par_iter().map(|&(u, v)| (u, v, a.segment_length(&nodes[u], &nodes[v], &rule))).collect();
        if let Some(&(u, v, _)) = weighted.iter().find(|e| !(e.2 > 0.0 && e.2.is_finite())) {
            return Err(Error::invalid(format!("edge ({u}, {v}) has non-positive length")));
        }

        let mut degree = vec![0usize; nodes.len() + 1];
        for &(u, v, _) in &weighted {
            degree[u + 1] += 1;
            degree[v + 1] += 1;
        }
        for i in 1..degree.len() {
            degree[i] += degree[i - 1];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut targets = vec![0; 2 * weighted.len()];
        let mut weights = vec![0.0; 2 * weighted.len()];
        for &(u, v, w) in &weighted {
            targets[fill[u]] = v;
            weights[fill[u]] = w;
            fill[u] += 1;
            targets[fill[v]] = u;
            weights[fill[v]] = w;
            fill[v] += 1;
        }
        Ok(WeightedGraph { vertices: mesh.vertex_count(), offsets, targets, weights })
    }

    /// Number of mesh vertices (the first nodes of the graph).
    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.targets[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    /// Single-source shortest-path distances to every node.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.node_count()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry { d: 0.0, node: source });
        while let Some(Entry { d, node }) = heap.pop() {
            if d > dist[node] {
                continue;
            }
            for (next, w) in self.neighbors(node) {
                let nd = d + w;
                if nd < dist[next] {
                    dist[next] = nd;
                    heap.push(Entry { d: nd, node: next });
                }
            }
        }
        dist
    }

    /// Exact graph diameter over mesh-vertex pairs.
    ///
    /// Eccentricity bounds from completed searches discard vertices that
    /// cannot beat the current best, so typically only a small number of
    /// full searches are needed.
    pub fn diameter(&self) -> Diameter {
        let n = self.vertices;
        let mut lower = vec![0.0f64; n];
        let mut upper = vec![f64::INFINITY; n];
        let mut active = vec![true; n];
        let mut best = Diameter { value: 0.0, pair: (0, 0), searches: 0 };
        let mut batch = vec![0usize];
        while !batch.is_empty() {
            let results: Vec<(usize, Vec<f64>)> = batch.par_iter().map(|&s| (s, self.distances_from(s))).collect();
            for (s, dist) in results {
                best.searches += 1;
                active[s] = false;
                let (far, ecc) =
                    dist[..n].iter().enumerate().fold((s, 0.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
                if ecc.is_infinite() {
                    unreachable!("graph of a connected mesh is connected");
                }
                if ecc > best.value {
                    best.value = ecc;
                    best.pair = (s, far);
                }
                for w in 0..n {
                    if active[w] {
                        lower[w] = lower[w].max(dist[w]).max(ecc - dist[w]);
                        upper[w] = upper[w].min(ecc + dist[w]);
                    }
                }
            }
            for w in 0..n {
                if active[w] && upper[w] <= best.value {
                    active[w] = false;
                }
            }
            batch = self.next_batch(&active, &lower, &upper);
        }
        best
    }

    /// Alternates between the largest upper bound and the smallest lower
    /// bound among active vertices, ties to the lowest index.
    fn next_batch(&self, active: &[bool], lower: &[f64], upper: &[f64]) -> Vec<usize> {
        let mut by_upper: Vec<usize> = (0..active.len()).filter(|&w| active[w]).collect();
        let mut by_lower = by_upper.clone();
        by_upper.sort_by(|&x, &y| upper[y].total_cmp(&upper[x]).then(x.cmp(&y)));
        by_lower.sort_by(|&x, &y| lower[x].total_cmp(&lower[y]).then(x.cmp(&y)));
        let mut batch = Vec::with_capacity(DIAMETER_BATCH);
        let mut queues = [by_upper.into_iter(), by_lower.into_iter()];
        let mut turn = 0;
        let mut exhausted = [false, false];
        while batch.len() < DIAMETER_BATCH && !(exhausted[0] && exhausted[1]) {
            match queues[turn].next() {
                Some(w) if !batch.contains(&w) => batch.push(w),
                Some(_) => {}
                None => exhausted[turn] = true,
            }
            turn = 1 - turn;
        }
        batch
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    d: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.d.total_cmp(&self.d).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diameter {
    pub value: f64,
    /// Mesh vertices realizing the diameter.
    pub pair: (usize, usize),
    /// Number of single-source searches performed.
    pub searches: usize,
}

/// Largest graph distance between two mesh vertices.
pub fn intrinsic_diameter(mesh: &ImmersedMesh, a: &ConformalAmbient, opts: &GraphOptions) -> Result<Diameter> {
    mesh.require_connected()?;
    Ok(WeightedGraph::build(mesh, a, opts)?.diameter())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Monotonicity {
    pub holds: bool,
    pub d_sigma: f64,
    pub d_double: f64,
    /// Twice the largest edge weight of either graph.
    pub tolerance: f64,
}

/// Compares `d(Σ)` with `d(M_ε)`. `correspondence[v]` is the vertex of
/// `m_eps` that copies vertex `v` of `sigma`.
pub fn doubling_monotonicity_check(
    sigma: &ImmersedMesh,
    m_eps: &ImmersedMesh,
    correspondence: &[usize],
    a: &ConformalAmbient,
    opts: &GraphOptions,
) -> Result<Monotonicity> {
    if correspondence.len() != sigma.vertex_count() {
        return Err(Error::invalid(format!(
            "correspondence covers {} of {} vertices",
            correspondence.len(),
            sigma.vertex_count()
        )));
    }
    let scale = sigma.bounding_box_diagonal().max(1.0);
    for (v, &w) in correspondence.iter().enumerate() {
        let matches = w < m_eps.vertex_count() && (m_eps.position(w) - sigma.position(v)).norm() <= 1e-12 * scale;
        if !matches {
            return Err(Error::invalid(format!("vertex {v} has no matching copy in the doubled mesh")));
        }
    }
    sigma.require_connected()?;
    m_eps.require_connected()?;
    let gs = WeightedGraph::build(sigma, a, opts)?;
    let gm = WeightedGraph::build(m_eps, a, opts)?;
    let (d_sigma, d_double) = (gs.diameter().value, gm.diameter().value);
    let tolerance = 2.0 * gs.max_weight().max(gm.max_weight());
    Ok(Monotonicity { holds: d_sigma <= d_double + tolerance, d_sigma, d_double, tolerance })
}
