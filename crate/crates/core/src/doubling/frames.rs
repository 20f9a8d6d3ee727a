//! Orthonormal frames along boundary loops: tangent, outward conormal, and
//! their cross product.

use crate::error::MeshErrorCode;
use crate::surface::vertex_normals;
use crate::{Error, ImmersedMesh, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub vertex: usize,
    /// Unit tangent along the loop (surface on the left).
    pub e1: Vec3,
    /// Outward unit conormal, tangent to the surface.
    pub e2: Vec3,
    pub e3: Vec3,
}

/// One frame per boundary vertex, grouped by boundary loop.
///
/// `e1` is the central-difference tangent of the loop. `e2` is `e1 × n` for
/// the angle-weighted vertex normal `n`, re-orthogonalized against `e1` and
/// oriented away from the centroid of the vertex's interior neighbors.
pub fn boundary_frames(mesh: &ImmersedMesh) -> Result<Vec<Vec<BoundaryFrame>>> {
    if mesh.is_closed() {
        return Err(Error::invalid("boundary frames need a mesh with boundary"));
    }
    let normals = vertex_normals(mesh);
    let neighbors = mesh.vertex_neighbors();
    mesh.boundary_loops()
        .iter()
        .map(|lp| {
            let n = lp.len();
            (0..n)
                .map(|k| {
                    let v = lp[k];
                    let p = mesh.position(v);
                    let e1 = (mesh.position(lp[(k + 1) % n]) - mesh.position(lp[(k + n - 1) % n])).normalize();
                    let interior: Vec<&Vec3> = neighbors[v]
                        .iter()
                        .filter(|&&w| !mesh.is_boundary_vertex(w))
                        .map(|&w| mesh.position(w))
                        .collect();
                    if interior.is_empty() {
                        return Err(Error::mesh(
                            MeshErrorCode::MeshQuality,
                            format!("boundary vertex {v} has no interior neighbor"),
                        ));
                    }
                    let centroid = interior.iter().fold(Vec3::zeros(), |acc, q| acc + *q) / interior.len() as f64;
                    let raw = e1.cross(&normals[v]);
                    let mut e2 = (raw - e1 * raw.dot(&e1)).normalize();
                    if e2.dot(&(p - centroid)) < 0.0 {
                        e2 = -e2;
                    }
                    Ok(BoundaryFrame { vertex: v, e1, e2, e3: e1.cross(&e2) })
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use std::f64::consts::PI;

    fn angle(a: &Vec3, b: &Vec3) -> f64 {
        a.angle(b).to_degrees()
    }

    fn assert_orthonormal(f: &BoundaryFrame) {
        for (a, b) in [(f.e1, f.e2), (f.e1, f.e3), (f.e2, f.e3)] {
            assert!(a.dot(&b).abs() <= 1e-9);
        }
        let det = nalgebra::Matrix3::from_columns(&[f.e1, f.e2, f.e3]).determinant();
        assert!((det - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn disk_conormal_is_radial() {
        let disk = generate::disk(1.0, 10);
        let frames = boundary_frames(&disk).unwrap();
        assert_eq!(frames.len(), 1);
        for f in &frames[0] {
            assert_orthonormal(f);
            assert!(angle(&f.e2, disk.position(f.vertex)) < 2.0);
        }
    }

    #[test]
    fn annulus_conormals_point_away_from_the_surface() {
        let ann = generate::annulus(0.4, 1.0, 6);
        let frames = boundary_frames(&ann).unwrap();
        assert_eq!(frames.len(), 2);
        for lp in &frames {
            for f in lp {
                assert_orthonormal(f);
                let p = ann.position(f.vertex);
                let radial = if p.norm() > 0.7 { *p } else { -p };
                assert!(angle(&f.e2, &radial) < 2.0);
            }
        }
    }

    #[test]
    fn hemisphere_conormal_is_tangent() {
        let cap = generate::spherical_cap(1.0, PI / 2.0, 24);
        for f in &boundary_frames(&cap).unwrap()[0] {
            assert_orthonormal(f);
            let normal = cap.position(f.vertex).normalize();
            assert!((angle(&f.e2, &normal) - 90.0).abs() < 2.0);
            assert!(angle(&f.e2, &-Vec3::z()) < 2.0);
        }
    }

    #[test]
    fn frames_need_interior_neighbors() {
        let tri = ImmersedMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y()], vec![[0, 1, 2]]).unwrap();
        let err = boundary_frames(&tri).unwrap_err();
        assert!(matches!(err, Error::Mesh { code: MeshErrorCode::MeshQuality, .. }));
        assert!(boundary_frames(&generate::icosphere(1)).is_err());
    }
}
