//! Oriented triangle meshes representing immersed compact surfaces.
//!
//! An [`ImmersedMesh`] is validated on construction: every edge borders one or
//! two faces, adjacent faces induce opposite directions on their shared edge,
//! every vertex has a single fan of faces, and no face is degenerate. Vertex
//! positions may coincide (immersions are allowed); only the combinatorics
//! must be a manifold.

use std::collections::{HashMap, VecDeque};

use crate::{Error, MeshErrorCode, Result, Vec3};

/// Faces with Euclidean area below this fraction of the squared bounding-box
/// diagonal are rejected.
pub const DEGENERATE_AREA_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ImmersedMesh {
    positions: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    boundary_loops: Vec<Vec<usize>>,
    on_boundary: Vec<bool>,
}

impl ImmersedMesh {
    pub fn new(positions: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if faces.is_empty() || positions.is_empty() {
            return Err(Error::mesh(MeshErrorCode::Empty, "mesh has no faces"));
        }
        for (i, p) in positions.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::mesh(
                    MeshErrorCode::NonFinitePosition,
                    format!("vertex {i} has a non-finite coordinate"),
                ));
            }
        }
        let n = positions.len();
        let mut used = vec![false; n];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= n {
                    return Err(Error::mesh(
                        MeshErrorCode::IndexOutOfRange,
                        format!("face {fi} references vertex {v} but there are {n} vertices"),
                    ));
                }
                used[v] = true;
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::mesh(MeshErrorCode::RepeatedIndex, format!("face {fi} repeats a vertex")));
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::mesh(MeshErrorCode::IsolatedVertex, format!("vertex {v} belongs to no face")));
        }

        let half_edges = directed_edge_map(&faces)?;
        check_vertex_fans(n, &faces, &half_edges)?;

        let mut mesh = ImmersedMesh { positions, faces, boundary_loops: Vec::new(), on_boundary: vec![false; n] };
        mesh.check_degenerate()?;
        mesh.boundary_loops = trace_boundary_loops(n, &mesh.faces, &half_edges)?;
        for l in &mesh.boundary_loops {
            for &v in l {
                mesh.on_boundary[v] = true;
            }
        }
        Ok(mesh)
    }

    /// Same combinatorics with new vertex positions; only the finiteness and
    /// degeneracy checks are repeated.
    pub fn with_positions(&self, positions: Vec<Vec3>) -> Result<Self> {
        if positions.len() != self.positions.len() {
            return Err(Error::invalid("position count does not match the mesh"));
        }
        if positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::mesh(MeshErrorCode::NonFinitePosition, "non-finite coordinate"));
        }
        let mesh = ImmersedMesh { positions, ..self.clone() };
        mesh.check_degenerate()?;
        Ok(mesh)
    }

    fn check_degenerate(&self) -> Result<()> {
        let diag = self.bounding_box_diagonal();
        let min_area = DEGENERATE_AREA_FRACTION * diag * diag;
        for fi in 0..self.faces.len() {
            let a = self.face_area(fi);
            if !(a > min_area) {
                return Err(Error::mesh(
                    MeshErrorCode::DegenerateFace,
                    format!("face {fi} has area {a:e} (threshold {min_area:e})"),
                ));
            }
        }
        Ok(())
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> &Vec3 {
        &self.positions[v]
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Boundary loops, each traversed with the surface on its left. Every loop
    /// starts at its smallest vertex index; loops are ordered by that index.
    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_loops.is_empty()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(move |&v| !self.on_boundary[v])
    }

    pub fn face_corners(&self, f: usize) -> [&Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [&self.positions[a], &self.positions[b], &self.positions[c]]
    }

    /// Unnormalized face normal `(b − a) × (c − a)` (twice the area).
    pub fn face_cross(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.face_corners(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    pub fn face_centroid(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.face_corners(f);
        (a + b + c) / 3.0
    }

    pub fn euclidean_area(&self) -> f64 {
        (0..self.face_count()).map(|f| self.face_area(f)).sum()
    }

    pub fn bounding_box_diagonal(&self) -> f64 {
        let mut lo = self.positions[0];
        let mut hi = self.positions[0];
        for p in &self.positions {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }

    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| (0..3).map(move |i| (f[i].min(f[(i + 1) % 3]), f[i].max(f[(i + 1) % 3]))))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edges().len() as i64 + self.face_count() as i64
    }

    /// Sorted neighbor lists.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.vertex_count()];
        for (a, b) in self.edges() {
            nb[a].push(b);
            nb[b].push(a);
        }
        for l in &mut nb {
            l.sort_unstable();
        }
        nb
    }

    /// Faces incident to each vertex, in face order.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut vf = vec![Vec::new(); self.vertex_count()];
        for (fi, f) in self.faces.iter().enumerate() {
            for &v in f {
                vf[v].push(fi);
            }
        }
        vf
    }

    pub fn connected_components(&self) -> usize {
        let mut uf = UnionFind::new(self.vertex_count());
        for f in &self.faces {
            uf.union(f[0], f[1]);
            uf.union(f[1], f[2]);
        }
        uf.count()
    }

    pub fn require_connected(&self) -> Result<()> {
        match self.connected_components() {
            1 => Ok(()),
            components => Err(Error::Disconnected { components }),
        }
    }

    /// Positions of one boundary loop, in traversal order.
    pub fn loop_positions(&self, l: usize) -> Vec<Vec3> {
        self.boundary_loops[l].iter().map(|&v| self.positions[v]).collect()
    }

    /// Minimum over faces of inradius / longest edge (equilateral: `1/(2√3)`).
    pub fn min_face_quality(&self) -> f64 {
        (0..self.face_count()).map(|f| triangle_quality(self.face_corners(f))).fold(f64::INFINITY, f64::min)
    }

    /// Longest Euclidean edge.
    pub fn max_edge_length(&self) -> f64 {
        self.edges().iter().map(|&(a, b)| (self.positions[a] - self.positions[b]).norm()).fold(0.0, f64::max)
    }

    /// Reverses every face, flipping the orientation.
    pub fn reversed(&self) -> Self {
        let faces = self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect();
        ImmersedMesh::new(self.positions.clone(), faces).expect("reversal preserves validity")
    }

    /// Applies `f` to every vertex position (topology unchanged).
    pub fn map_positions(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<Self> {
        self.with_positions(self.positions.iter().map(f).collect())
    }
}

/// Inradius over longest edge.
pub fn triangle_quality([a, b, c]: [&Vec3; 3]) -> f64 {
    let (la, lb, lc) = ((b - c).norm(), (c - a).norm(), (a - b).norm());
    let s = 0.5 * (la + lb + lc);
    let area = 0.5 * (b - a).cross(&(c - a)).norm();
    let longest = la.max(lb).max(lc);
    if s == 0.0 || longest == 0.0 {
        return 0.0;
    }
    (area / s) / longest
}

fn directed_edge_map(faces: &[[usize; 3]]) -> Result<HashMap<(usize, usize), usize>> {
    let mut map = HashMap::with_capacity(faces.len() * 3);
    for (fi, f) in faces.iter().enumerate() {
        for i in 0..3 {
            let e = (f[i], f[(i + 1) % 3]);
            if let Some(other) = map.insert(e, fi) {
                return Err(Error::mesh(
                    MeshErrorCode::InconsistentOrientation,
                    format!("directed edge {}→{} used by faces {other} and {fi}", e.0, e.1),
                ));
            }
        }
    }
    let mut count: HashMap<(usize, usize), u8> = HashMap::with_capacity(map.len());
    for &(a, b) in map.keys() {
        *count.entry((a.min(b), a.max(b))).or_default() += 1;
    }
    // A directed edge is unique, so an undirected edge with more than two
    // faces always repeats a direction and was caught above.
    debug_assert!(count.values().all(|&c| c <= 2));
    Ok(map)
}

/// Every vertex must have exactly one fan of incident faces.
fn check_vertex_fans(n: usize, faces: &[[usize; 3]], half: &HashMap<(usize, usize), usize>) -> Result<()> {
    let mut incident = vec![0usize; n];
    let mut first_face = vec![usize::MAX; n];
    for (fi, f) in faces.iter().enumerate() {
        for &v in f {
            incident[v] += 1;
            if first_face[v] == usize::MAX {
                first_face[v] = fi;
            }
        }
    }
    let corner = |fi: usize, v: usize| -> (usize, usize) {
        let f = faces[fi];
        let i = f.iter().position(|&x| x == v).expect("vertex in face");
        (f[(i + 1) % 3], f[(i + 2) % 3])
    };
    for v in 0..n {
        let start = first_face[v];
        let mut visited = 1;
        // Rotate one way: from face (v, b, c) to the face holding v→c.
        let mut f = start;
        let mut closed = false;
        loop {
            let (_, c) = corner(f, v);
            match half.get(&(v, c)) {
                Some(&g) if g == start => {
                    closed = true;
                    break;
                }
                Some(&g) => {
                    visited += 1;
                    f = g;
                    if visited > incident[v] {
                        break;
                    }
                }
                None => break,
            }
        }
        if !closed {
            // Rotate the other way: from face (v, b, c) to the face holding b→v.
            let mut f = start;
            loop {
                let (b, _) = corner(f, v);
                match half.get(&(b, v)) {
                    Some(&g) => {
                        visited += 1;
                        f = g;
                        if visited > incident[v] {
                            break;
                        }
                    }
                    None => break,
                }
            }
        }
        if visited != incident[v] {
            return Err(Error::mesh(
                MeshErrorCode::NonManifoldVertex,
                format!("vertex {v} has {} incident faces but its fan reaches {visited}", incident[v]),
            ));
        }
    }
    Ok(())
}

fn trace_boundary_loops(
    n: usize,
    faces: &[[usize; 3]],
    half: &HashMap<(usize, usize), usize>,
) -> Result<Vec<Vec<usize>>> {
    let mut next = vec![usize::MAX; n];
    for f in faces {
        for i in 0..3 {
            let (a, b) = (f[i], f[(i + 1) % 3]);
            if !half.contains_key(&(b, a)) {
                if next[a] != usize::MAX {
                    return Err(Error::mesh(
                        MeshErrorCode::NonManifoldVertex,
                        format!("vertex {a} starts two boundary edges"),
                    ));
                }
                next[a] = b;
            }
        }
    }
    let mut seen = vec![false; n];
    let mut loops = Vec::new();
    for start in 0..n {
        if next[start] == usize::MAX || seen[start] {
            continue;
        }
        let mut l = Vec::new();
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            l.push(v);
            v = next[v];
            if v == usize::MAX {
                return Err(Error::mesh(MeshErrorCode::NonManifoldVertex, "open boundary chain"));
            }
        }
        if v != start {
            return Err(Error::mesh(
                MeshErrorCode::NonManifoldVertex,
                format!("boundary chain from {start} closes at {v}"),
            ));
        }
        loops.push(l);
    }
    Ok(loops)
}

/// Reorients faces so that every shared edge is traversed in opposite
/// directions, propagating from the first face of each component.
pub fn orient_consistently(faces: &[[usize; 3]]) -> Result<Vec<[usize; 3]>> {
    let mut edge_faces: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for i in 0..3 {
            let (a, b) = (f[i], f[(i + 1) % 3]);
            edge_faces.entry((a.min(b), a.max(b))).or_default().push(fi);
        }
    }
    let has_directed = |f: &[usize; 3], a: usize, b: usize| (0..3).any(|i| f[i] == a && f[(i + 1) % 3] == b);
    let mut out = faces.to_vec();
    let mut state = vec![0u8; faces.len()];
    for seed in 0..faces.len() {
        if state[seed] != 0 {
            continue;
        }
        state[seed] = 1;
        let mut queue = VecDeque::from([seed]);
        while let Some(fi) = queue.pop_front() {
            let f = out[fi];
            for i in 0..3 {
                let (a, b) = (f[i], f[(i + 1) % 3]);
                let adj = &edge_faces[&(a.min(b), a.max(b))];
                if adj.len() > 2 {
                    return Err(Error::mesh(MeshErrorCode::NonManifoldEdge, format!("edge {a}-{b}")));
                }
                for &g in adj.iter().filter(|&&g| g != fi) {
                    let agrees = !has_directed(&out[g], a, b);
                    if state[g] == 0 {
                        if !agrees {
                            let [x, y, z] = out[g];
                            out[g] = [x, z, y];
                        }
                        state[g] = 1;
                        queue.push_back(g);
                    } else if !agrees {
                        return Err(Error::mesh(MeshErrorCode::InconsistentOrientation, "surface is not orientable"));
                    }
                }
            }
        }
    }
    Ok(out)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    pub(crate) fn count(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}
