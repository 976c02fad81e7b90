//! Reference-free P1/P2 element kernels on straight triangles.

use super::mesh::ElementOrder;
use crate::error::{Error, Result};

/// Degree-4 symmetric rule (6 points), exact for P2×P2 products.
/// Barycentric coordinates and weights summing to one.
pub(crate) const QUAD6: [([f64; 3], f64); 6] = {
    const A1: f64 = 0.445_948_490_915_964_9;
    const B1: f64 = 1.0 - 2.0 * A1;
    const W1: f64 = 0.223_381_589_678_011_47;
    const A2: f64 = 0.091_576_213_509_770_74;
    const B2: f64 = 1.0 - 2.0 * A2;
    const W2: f64 = 0.109_951_743_655_321_87;
    [
        ([B1, A1, A1], W1),
        ([A1, B1, A1], W1),
        ([A1, A1, B1], W1),
        ([B2, A2, A2], W2),
        ([A2, B2, A2], W2),
        ([A2, A2, B2], W2),
    ]
};

/// Local edge `k` joins local vertices `EDGE_VERTS[k]`.
pub(crate) const EDGE_VERTS: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

/// Area and barycentric gradients of a triangle.
pub fn barycentric_gradients(p: &[[f64; 2]; 3]) -> Result<(f64, [[f64; 2]; 3])> {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    if !(area > 0.0) {
        return Err(Error::Mesh(format!("element with non-positive area {area:e}")));
    }
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[i] = [(p[j][1] - p[k][1]) / (2.0 * area), (p[k][0] - p[j][0]) / (2.0 * area)];
    }
    Ok((area, g))
}

/// Basis values at barycentric point `l`, DOF order as in `Mesh::element_dofs`.
pub fn shape_values(order: ElementOrder, l: [f64; 3], out: &mut [f64; 6]) {
    match order {
        ElementOrder::P1 => {
            out[..3].copy_from_slice(&l);
        }
        ElementOrder::P2 => {
            for i in 0..3 {
                out[i] = l[i] * (2.0 * l[i] - 1.0);
            }
            for (k, [a, b]) in EDGE_VERTS.iter().enumerate() {
                out[3 + k] = 4.0 * l[*a] * l[*b];
            }
        }
    }
}

fn shape_gradients(order: ElementOrder, l: [f64; 3], g: &[[f64; 2]; 3], out: &mut [[f64; 2]; 6]) {
    match order {
        ElementOrder::P1 => {
            out[..3].copy_from_slice(g);
        }
        ElementOrder::P2 => {
            for i in 0..3 {
                let s = 4.0 * l[i] - 1.0;
                out[i] = [s * g[i][0], s * g[i][1]];
            }
            for (k, [a, b]) in EDGE_VERTS.iter().enumerate() {
                out[3 + k] = [
                    4.0 * (l[*b] * g[*a][0] + l[*a] * g[*b][0]),
                    4.0 * (l[*b] * g[*a][1] + l[*a] * g[*b][1]),
                ];
            }
        }
    }
}

/// Local stiffness `∫∇φᵢ·∇φⱼ` and mass `∫φᵢφⱼ`, both `n×n` row-major with
/// `n` the number of local DOFs.
#[derive(Debug, Clone)]
pub struct ElementMatrices {
    pub n: usize,
    pub stiffness: [[f64; 6]; 6],
    pub mass: [[f64; 6]; 6],
}

pub fn element_matrices(p: &[[f64; 2]; 3], order: ElementOrder) -> Result<ElementMatrices> {
    let (area, g) = barycentric_gradients(p)?;
    let n = order.dofs_per_element();
    let mut k = [[0.0; 6]; 6];
    let mut m = [[0.0; 6]; 6];
    let (mut phi, mut dphi) = ([0.0; 6], [[0.0; 2]; 6]);
    for (l, w) in QUAD6 {
        shape_values(order, l, &mut phi);
        shape_gradients(order, l, &g, &mut dphi);
        let wa = w * area;
        for i in 0..n {
            for j in 0..n {
                k[i][j] += wa * (dphi[i][0] * dphi[j][0] + dphi[i][1] * dphi[j][1]);
                m[i][j] += wa * phi[i] * phi[j];
            }
        }
    }
    Ok(ElementMatrices { n, stiffness: k, mass: m })
}

/// Mass matrix of a boundary edge of `length`. Node order: both ends, then
/// the midpoint for P2.
pub fn edge_mass(length: f64, order: ElementOrder) -> ([[f64; 3]; 3], usize) {
    match order {
        ElementOrder::P1 => {
            let h = length / 6.0;
            ([[2.0 * h, h, 0.0], [h, 2.0 * h, 0.0], [0.0; 3]], 2)
        }
        ElementOrder::P2 => {
            let h = length / 30.0;
            ([[4.0 * h, -h, 2.0 * h], [-h, 4.0 * h, 2.0 * h], [2.0 * h, 2.0 * h, 16.0 * h]], 3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRI: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    fn sum(m: &[[f64; 6]; 6], n: usize) -> f64 {
        (0..n).flat_map(|i| (0..n).map(move |j| m[i][j])).sum()
    }

    #[test]
    fn p1_reference() {
        let em = element_matrices(&TRI, ElementOrder::P1).unwrap();
        // known P1 mass on the reference triangle: area/12 (1+δij)
        assert!((em.mass[0][0] - 1.0 / 12.0).abs() < 1e-15);
        assert!((em.mass[0][1] - 1.0 / 24.0).abs() < 1e-15);
        assert!((em.stiffness[0][0] - 1.0).abs() < 1e-14);
        assert!((em.stiffness[1][2]).abs() < 1e-14);
    }

    #[test]
    fn p2_partition_and_nullspace() {
        let p = [[0.2, 0.1], [1.3, 0.4], [0.5, 1.1]];
        let em = element_matrices(&p, ElementOrder::P2).unwrap();
        let area = 0.5 * ((1.1) * (1.0) - (0.3) * (0.3));
        assert!((sum(&em.mass, 6) - area).abs() < 1e-14);
        for i in 0..6 {
            let row: f64 = (0..6).map(|j| em.stiffness[i][j]).sum();
            assert!(row.abs() < 1e-13);
        }
        // vertex-vertex P2 mass entry is area/30
        assert!((em.mass[0][0] - area / 30.0).abs() < 1e-14);
        assert!((em.mass[3][3] - 8.0 * area / 45.0).abs() < 1e-14);
    }

    #[test]
    fn edge_mass_integrates_one() {
        for order in [ElementOrder::P1, ElementOrder::P2] {
            let (m, n) = edge_mass(2.5, order);
            let s: f64 = (0..n).flat_map(|i| (0..n).map(move |j| m[i][j])).sum();
            assert!((s - 2.5).abs() < 1e-14);
        }
    }
}
