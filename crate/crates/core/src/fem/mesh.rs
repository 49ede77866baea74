//! Curvilinear tensor mesh `x = s R(θ) e^{iθ}` and bilinear assembly of the
//! magnetic stiffness and mass forms.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::sparse::CsrMatrix;
use crate::geometry::RadiusProfile;
use crate::par;
use crate::spectrum::BoundaryCondition;

const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Node numbering: the center is node 0, ring `i ≥ 1` node `j` is
/// `1 + (i-1) n_angular + j`.
#[derive(Clone, Debug)]
pub struct PolarMesh {
    pub n_radial: usize,
    pub n_angular: usize,
    pub bc: BoundaryCondition,
    /// Node index to unknown index; `None` on the Dirichlet boundary.
    dof_of_node: Vec<Option<usize>>,
    n_dofs: usize,
}

impl PolarMesh {
    pub fn new(n_radial: usize, n_angular: usize, bc: BoundaryCondition) -> Self {
        let n_nodes = 1 + n_radial * n_angular;
        let mut dof_of_node = Vec::with_capacity(n_nodes);
        let mut next = 0;
        for node in 0..n_nodes {
            let ring = if node == 0 { 0 } else { 1 + (node - 1) / n_angular };
            if bc == BoundaryCondition::Dirichlet && ring == n_radial {
                dof_of_node.push(None);
            } else {
                dof_of_node.push(Some(next));
                next += 1;
            }
        }
        PolarMesh {
            n_radial,
            n_angular,
            bc,
            dof_of_node,
            n_dofs: next,
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn node(&self, ring: usize, j: usize) -> usize {
        if ring == 0 {
            0
        } else {
            1 + (ring - 1) * self.n_angular + j % self.n_angular
        }
    }

    pub fn dof(&self, ring: usize, j: usize) -> Option<usize> {
        self.dof_of_node[self.node(ring, j)]
    }

    /// Nodal values on ring `ring`, with zeros on constrained nodes.
    pub fn ring_values(&self, u: &[Complex64], ring: usize) -> Vec<Complex64> {
        (0..self.n_angular)
            .map(|j| self.dof(ring, j).map_or(Complex64::new(0.0, 0.0), |d| u[d]))
            .collect()
    }
}

pub struct Assembled {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
}

type ElementBlock = ([usize; 4], [[Complex64; 4]; 4], [[f64; 4]; 4]);

/// Stiffness `∫ (i∇+F)u · conj((i∇+F)v)` and mass `∫ u conj(v)` with
/// `F = (β/2A)(-x₂, x₁)`.
pub fn assemble(profile: &RadiusProfile, mesh: &PolarMesh, beta: f64, area: f64) -> Assembled {
    let (nr, na) = (mesh.n_radial, mesh.n_angular);
    let ds = 1.0 / nr as f64;
    let dt = 2.0 * PI / na as f64;
    // R and R' at the two Gauss columns of every angular cell
    let columns: Vec<[(f64, f64, f64); 2]> = par::map_range(na, |j| {
        let t = |g: f64| {
            let theta = (j as f64 + g) * dt;
            let (r, dr) = profile.eval(theta);
            (theta, r, dr)
        };
        [t(GAUSS[0]), t(GAUSS[1])]
    });
    let field = beta / (2.0 * area);
    let weight = 0.25 * ds * dt;

    let blocks: Vec<ElementBlock> = par::map_range(nr * na, |cell| {
        let (i, j) = (cell / na, cell % na);
        let nodes = [mesh.node(i, j), mesh.node(i + 1, j), mesh.node(i + 1, j + 1), mesh.node(i, j + 1)];
        let mut k = [[Complex64::new(0.0, 0.0); 4]; 4];
        let mut m = [[0.0; 4]; 4];
        for gs in GAUSS {
            let s = (i as f64 + gs) * ds;
            for (gt_idx, gt) in GAUSS.iter().enumerate() {
                let (theta, r, dr) = columns[j][gt_idx];
                let (sin, cos) = theta.sin_cos();
                let xs = r * cos;
                let ys = r * sin;
                let xt = s * (dr * cos - r * sin);
                let yt = s * (dr * sin + r * cos);
                let det = s * r * r;
                let (x, y) = (s * r * cos, s * r * sin);
                let (fx, fy) = (-field * y, field * x);
                let f2 = fx * fx + fy * fy;
                let n = [(1.0 - gs) * (1.0 - gt), gs * (1.0 - gt), gs * gt, (1.0 - gs) * gt];
                let dn_ds = [-(1.0 - gt) / ds, (1.0 - gt) / ds, gt / ds, -gt / ds];
                let dn_dt = [-(1.0 - gs) / dt, -gs / dt, gs / dt, (1.0 - gs) / dt];
                let mut grad = [(0.0, 0.0); 4];
                let mut fdot = [0.0; 4];
                for a in 0..4 {
                    let gx = (dn_ds[a] * yt - ys * dn_dt[a]) / det;
                    let gy = (xs * dn_dt[a] - xt * dn_ds[a]) / det;
                    grad[a] = (gx, gy);
                    fdot[a] = fx * gx + fy * gy;
                }
                let w = weight * det;
                for a in 0..4 {
                    for b in a..4 {
                        let re = grad[a].0 * grad[b].0 + grad[a].1 * grad[b].1 + f2 * n[a] * n[b];
                        let im = n[b] * fdot[a] - n[a] * fdot[b];
                        // row b (test), column a (trial)
                        k[b][a] += Complex64::new(re, im) * w;
                        m[b][a] += n[a] * n[b] * w;
                    }
                }
            }
        }
        for b in 0..4 {
            for a in b + 1..4 {
                k[b][a] = k[a][b].conj();
                m[b][a] = m[a][b];
            }
        }
        (nodes, k, m)
    });

    let mut kt = Vec::with_capacity(blocks.len() * 16);
    let mut mt = Vec::with_capacity(blocks.len() * 16);
    for (nodes, k, m) in &blocks {
        for b in 0..4 {
            let Some(row) = mesh.dof_of_node[nodes[b]] else { continue };
            for a in 0..4 {
                let Some(col) = mesh.dof_of_node[nodes[a]] else { continue };
                kt.push((row, col, k[b][a]));
                mt.push((row, col, Complex64::new(m[b][a], 0.0)));
            }
        }
    }
    let n = mesh.n_dofs();
    let mut stiffness = CsrMatrix::from_triplets(n, kt);
    let mut mass = CsrMatrix::from_triplets(n, mt);
    stiffness.hermitize();
    mass.hermitize();
    Assembled { stiffness, mass }
}
