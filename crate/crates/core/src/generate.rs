//! Deterministic fixture meshes and boundary curves.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::surface::vertex_normals;
use crate::{ImmersedMesh, Vec3};

/// Triangulates the strip between two concentric vertex rings whose vertex
/// `m` sits at angle `2π m / len` (plus the ring's phase).
fn zip_rings(inner: &[usize], inner_phase: f64, outer: &[usize], outer_phase: f64, faces: &mut Vec<[usize; 3]>) {
    let (na, nb) = (inner.len(), outer.len());
    if na == 1 {
        for j in 0..nb {
            faces.push([inner[0], outer[j], outer[(j + 1) % nb]]);
        }
        return;
    }
    let angle = |m: usize, n: usize, phase: f64| 2.0 * PI * m as f64 / n as f64 + phase;
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        let next_outer = angle(j + 1, nb, outer_phase);
        let next_inner = angle(i + 1, na, inner_phase);
        if j < nb && (i == na || next_outer <= next_inner) {
            faces.push([inner[i % na], outer[j % nb], outer[(j + 1) % nb]]);
            j += 1;
        } else {
            faces.push([inner[i % na], outer[j % nb], inner[(i + 1) % na]]);
            i += 1;
        }
    }
}

/// Flat disk of the given radius in the plane `z = 0`, with `rings`
/// concentric rings (ring `k` has `6k` vertices). Oriented with normal `+z`.
pub fn disk(radius: f64, rings: usize) -> ImmersedMesh {
    assert!(rings >= 1 && radius > 0.0);
    let mut positions = vec![Vec3::zeros()];
    let mut ring_ids: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..=rings {
        let count = 6 * k;
        let r = radius * k as f64 / rings as f64;
        let ids = (0..count)
            .map(|m| {
                let t = 2.0 * PI * m as f64 / count as f64;
                positions.push(Vec3::new(r * t.cos(), r * t.sin(), 0.0));
                positions.len() - 1
            })
            .collect();
        ring_ids.push(ids);
    }
    let mut faces = Vec::new();
    for k in 1..=rings {
        zip_rings(&ring_ids[k - 1], 0.0, &ring_ids[k], 0.0, &mut faces);
    }
    ImmersedMesh::new(positions, faces).expect("disk generator produces a valid mesh")
}

/// Flat annulus `inner ≤ r ≤ outer` with `rings ≥ 2` radial subdivisions.
pub fn annulus(inner: f64, outer: f64, rings: usize) -> ImmersedMesh {
    assert!(rings >= 2 && 0.0 < inner && inner < outer);
    let h = (outer - inner) / rings as f64;
    let mut positions = Vec::new();
    let mut ring_ids = Vec::new();
    let mut phases = Vec::new();
    for k in 0..=rings {
        let r = inner + h * k as f64;
        let count = ((2.0 * PI * r / h).round() as usize).max(6);
        let phase = if k % 2 == 1 { PI / count as f64 } else { 0.0 };
        let ids: Vec<usize> = (0..count)
            .map(|m| {
                let t = 2.0 * PI * m as f64 / count as f64 + phase;
                positions.push(Vec3::new(r * t.cos(), r * t.sin(), 0.0));
                positions.len() - 1
            })
            .collect();
        ring_ids.push(ids);
        phases.push(phase);
    }
    let mut faces = Vec::new();
    for k in 1..=rings {
        zip_rings(&ring_ids[k - 1], phases[k - 1], &ring_ids[k], phases[k], &mut faces);
    }
    ImmersedMesh::new(positions, faces).expect("annulus generator produces a valid mesh")
}

/// Cap `{θ ≤ angle}` of the sphere of radius `radius` centered at the
/// origin, around the `+z` pole, oriented by the outward normal.
pub fn spherical_cap(radius: f64, angle: f64, rings: usize) -> ImmersedMesh {
    assert!(angle > 0.0 && angle < PI);
    disk(1.0, rings)
        .map_positions(|p| {
            let theta = angle * p.norm();
            let psi = p.y.atan2(p.x);
            radius * Vec3::new(theta.sin() * psi.cos(), theta.sin() * psi.sin(), theta.cos())
        })
        .expect("cap generator produces a valid mesh")
}

/// Unit icosphere with `subdivisions` rounds of midpoint refinement.
pub fn icosphere(subdivisions: usize) -> ImmersedMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut positions: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, positions: &mut Vec<Vec3>| -> usize {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                positions.push(((positions[a] + positions[b]) * 0.5).normalize());
                positions.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut positions);
            let bc = mid(b, c, &mut positions);
            let ca = mid(c, a, &mut positions);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    ImmersedMesh::new(positions, faces).expect("icosphere generator produces a valid mesh")
}

/// Open cylinder of the given radius around the z-axis, `|z| ≤ height / 2`,
/// with outward normal. `around` vertices per ring, `along` segments in z.
pub fn cylinder(radius: f64, height: f64, around: usize, along: usize) -> ImmersedMesh {
    assert!(around >= 3 && along >= 1);
    let mut positions = Vec::with_capacity(around * (along + 1));
    for j in 0..=along {
        let z = -0.5 * height + height * j as f64 / along as f64;
        for i in 0..around {
            let t = 2.0 * PI * i as f64 / around as f64;
            positions.push(Vec3::new(radius * t.cos(), radius * t.sin(), z));
        }
    }
    let id = |i: usize, j: usize| j * around + i % around;
    let mut faces = Vec::with_capacity(2 * around * along);
    for j in 0..along {
        for i in 0..around {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    ImmersedMesh::new(positions, faces).expect("cylinder generator produces a valid mesh")
}

/// Torus of revolution around the z-axis with outward normal.
pub fn torus(major: f64, minor: f64, n_major: usize, n_minor: usize) -> ImmersedMesh {
    assert!(major > minor && minor > 0.0 && n_major >= 3 && n_minor >= 3);
    let mut positions = Vec::with_capacity(n_major * n_minor);
    for i in 0..n_major {
        let u = 2.0 * PI * i as f64 / n_major as f64;
        for j in 0..n_minor {
            let v = 2.0 * PI * j as f64 / n_minor as f64;
            let r = major + minor * v.cos();
            positions.push(Vec3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % n_major) * n_minor + j % n_minor;
    let mut faces = Vec::with_capacity(2 * n_major * n_minor);
    for i in 0..n_major {
        for j in 0..n_minor {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    ImmersedMesh::new(positions, faces).expect("torus generator produces a valid mesh")
}

/// Disk with a smooth out-of-plane bump that vanishes on the boundary
/// circle: `z = a (1 − ρ²)(½ + ρ³ cos 3θ)`, `ρ = r / radius`.
pub fn bumpy_disk(radius: f64, rings: usize, amplitude: f64) -> ImmersedMesh {
    disk(radius, rings)
        .map_positions(|p| {
            let rho = p.xy().norm() / radius;
            let cos3 = if rho == 0.0 {
                0.0
            } else {
                let t = p.y.atan2(p.x);
                (3.0 * t).cos()
            };
            Vec3::new(p.x, p.y, amplitude * (1.0 - rho * rho) * (0.5 + rho.powi(3) * cos3))
        })
        .expect("bumpy disk stays valid")
}

/// Square `[-side/2, side/2]²` in the plane `z = height`, `n × n` cells.
pub fn square_patch(side: f64, n: usize, height: f64) -> ImmersedMesh {
    assert!(n >= 1);
    let mut positions = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let x = -0.5 * side + side * i as f64 / n as f64;
            let y = -0.5 * side + side * j as f64 / n as f64;
            positions.push(Vec3::new(x, y, height));
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            if (i + j) % 2 == 0 {
                faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            } else {
                faces.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
                faces.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
    }
    ImmersedMesh::new(positions, faces).expect("patch generator produces a valid mesh")
}

/// Closed polyline on the circle of the given radius in the plane
/// `z = center.z`, counterclockwise seen from `+z`.
pub fn circle(center: Vec3, radius: f64, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            center + Vec3::new(radius * t.cos(), radius * t.sin(), 0.0)
        })
        .collect()
}

/// Moves every interior vertex tangentially by up to `amplitude` times its
/// shortest incident edge, deterministically from `seed`.
pub fn jitter_interior(mesh: &ImmersedMesh, amplitude: f64, seed: u64) -> ImmersedMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normals = vertex_normals(mesh);
    let nb = mesh.vertex_neighbors();
    let mut pos = mesh.positions().to_vec();
    for v in 0..mesh.vertex_count() {
        let r = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if mesh.is_boundary_vertex(v) {
            continue;
        }
        let h = nb[v].iter().map(|&w| (mesh.position(w) - mesh.position(v)).norm()).fold(f64::INFINITY, f64::min);
        let n = normals[v];
        let tangent = r - n * r.dot(&n);
        pos[v] += tangent * (amplitude * h);
    }
    mesh.with_positions(pos).expect("small jitter keeps faces non-degenerate")
}
