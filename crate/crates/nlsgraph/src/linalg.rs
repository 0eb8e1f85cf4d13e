//! Direct solver for the shifted operator `A = M + tau K` on a graph grid,
//! where `M` is the lumped mass matrix and `K` the piecewise-linear stiffness
//! matrix (Kirchhoff coupling at vertices, Dirichlet zero at truncated
//! half-line ends).
//!
//! Each edge contributes a tridiagonal interior chain coupled only to its
//! endpoint vertex DOFs, so the system is eliminated edge by edge (Thomas
//! factorizations) onto a small dense vertex Schur complement. Solves are
//! O(ndof), with a one-time factorization per value of `tau`.

use std::sync::Arc;

use crate::grid::{Discretization, NodeRef};

struct EdgeFactor {
    /// Forward-elimination factors of the interior tridiagonal chain.
    inv_diag: Vec<f64>,
    off: f64,
    /// chain solutions for unit loads at the first and last interior node
    ya: Vec<f64>,
    yb: Vec<f64>,
    /// coupling coefficient -tau/h between chain ends and vertex DOFs
    c: f64,
    ends: [NodeRef; 2],
    interior_start: usize,
}

pub struct ShiftSolver {
    tau: f64,
    edges: Vec<EdgeFactor>,
    /// dense Cholesky factor (row-major lower triangle) of the vertex Schur
    /// complement
    chol: Vec<f64>,
    nv: usize,
}

impl ShiftSolver {
    pub fn new(disc: &Arc<Discretization>, tau: f64) -> Self {
        assert!(tau > 0.0, "shift must be positive");
        let nv = disc.graph().vertex_count();
        let mut schur = vec![0.0; nv * nv];
        for v in 0..nv {
            schur[v * nv + v] = disc.lumped_mass(v);
        }
        let mut edges = Vec::with_capacity(disc.graph().edge_count());
        for (_, eg) in disc.edge_grids() {
            let m = eg.n - 1; // interior unknowns
            let h = eg.h;
            let c = -tau / h;
            let diag_val = h + 2.0 * tau / h;
            let off = -tau / h;
            // Thomas forward elimination for the constant tridiagonal chain
            let mut inv_diag = Vec::with_capacity(m);
            let mut d = diag_val;
            inv_diag.push(1.0 / d);
            for _ in 1..m {
                d = diag_val - off * off * *inv_diag.last().unwrap();
                inv_diag.push(1.0 / d);
            }
            let solve_unit = |pos: usize| -> Vec<f64> {
                let mut rhs = vec![0.0; m];
                rhs[pos] = 1.0;
                let mut x = rhs;
                for i in 1..m {
                    let w = off * inv_diag[i - 1];
                    x[i] = x[i] - w * x[i - 1];
                }
                x[m - 1] *= inv_diag[m - 1];
                for i in (0..m - 1).rev() {
                    x[i] = (x[i] - off * x[i + 1]) * inv_diag[i];
                }
                x
            };
            let ya = solve_unit(0);
            let yb = solve_unit(m - 1);
            // vertex Schur contributions: for each pair of coupled ends,
            // S[va,vb] += tau/h at the diagonal block and -= c^2 (T^-1)_{ij}
            for (slot_i, node_i) in [(0usize, eg.ends[0]), (1, eg.ends[1])] {
                let NodeRef::Dof(vi) = node_i else { continue };
                if vi >= nv {
                    continue;
                }
                schur[vi * nv + vi] += tau / h;
                for (slot_j, node_j) in [(0usize, eg.ends[0]), (1, eg.ends[1])] {
                    let NodeRef::Dof(vj) = node_j else { continue };
                    if vj >= nv {
                        continue;
                    }
                    let y = if slot_j == 0 { &ya } else { &yb };
                    let yi = if slot_i == 0 { y[0] } else { y[m - 1] };
                    schur[vi * nv + vj] -= c * c * yi;
                }
            }
            edges.push(EdgeFactor {
                inv_diag,
                off,
                ya,
                yb,
                c,
                ends: eg.ends,
                interior_start: eg.interior_start,
            });
        }
        // dense Cholesky of the SPD Schur complement
        let mut chol = schur;
        for i in 0..nv {
            for j in 0..=i {
                let mut s = chol[i * nv + j];
                for k in 0..j {
                    s -= chol[i * nv + k] * chol[j * nv + k];
                }
                if i == j {
                    assert!(s > 0.0, "vertex Schur complement lost positivity");
                    chol[i * nv + i] = s.sqrt();
                } else {
                    chol[i * nv + j] = s / chol[j * nv + j];
                }
            }
        }
        ShiftSolver {
            tau,
            edges,
            chol,
            nv,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Solve `(M + tau K) x = r`.
    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        let nv = self.nv;
        let mut x = vec![0.0; r.len()];
        // reduce edge interiors onto the vertex system
        let mut rhs_v: Vec<f64> = r[..nv].to_vec();
        let mut chains: Vec<Vec<f64>> = Vec::with_capacity(self.edges.len());
        for ef in &self.edges {
            let m = ef.inv_diag.len();
            let mut z: Vec<f64> = r[ef.interior_start..ef.interior_start + m].to_vec();
            for i in 1..m {
                let w = ef.off * ef.inv_diag[i - 1];
                z[i] = z[i] - w * z[i - 1];
            }
            z[m - 1] *= ef.inv_diag[m - 1];
            for i in (0..m - 1).rev() {
                z[i] = (z[i] - ef.off * z[i + 1]) * ef.inv_diag[i];
            }
            if let NodeRef::Dof(v) = ef.ends[0] {
                rhs_v[v] -= ef.c * z[0];
            }
            if let NodeRef::Dof(v) = ef.ends[1] {
                rhs_v[v] -= ef.c * z[m - 1];
            }
            chains.push(z);
        }
        // vertex solve
        let l = &self.chol;
        let mut y = rhs_v;
        for i in 0..nv {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * nv + k] * y[k];
            }
            y[i] = s / l[i * nv + i];
        }
        for i in (0..nv).rev() {
            let mut s = y[i];
            for k in i + 1..nv {
                s -= l[k * nv + i] * y[k];
            }
            y[i] = s / l[i * nv + i];
        }
        x[..nv].copy_from_slice(&y);
        // back-substitute the chains
        for (ef, z) in self.edges.iter().zip(chains) {
            let m = z.len();
            let va = match ef.ends[0] {
                NodeRef::Dof(v) => x[v],
                NodeRef::PinnedZero => 0.0,
            };
            let vb = match ef.ends[1] {
                NodeRef::Dof(v) => x[v],
                NodeRef::PinnedZero => 0.0,
            };
            let dst = &mut x[ef.interior_start..ef.interior_start + m];
            for i in 0..m {
                dst[i] = z[i] - ef.c * (va * ef.ya[i] + vb * ef.yb[i]);
            }
        }
        x
    }
}

/// Apply `(M + tau K)` directly; used to verify the factorization.
#[cfg(test)]
fn apply_shifted(disc: &Discretization, tau: f64, x: &[f64]) -> Vec<f64> {
    let val = |r: NodeRef| match r {
        NodeRef::Dof(d) => x[d],
        NodeRef::PinnedZero => 0.0,
    };
    let mut out: Vec<f64> = (0..disc.ndof()).map(|d| disc.lumped_mass(d) * x[d]).collect();
    for (_, eg) in disc.edge_grids() {
        for i in 0..eg.n {
            let na = eg.node(i);
            let nb = eg.node(i + 1);
            let slope = (val(nb) - val(na)) / eg.h;
            if let NodeRef::Dof(d) = na {
                out[d] -= tau * slope;
            }
            if let NodeRef::Dof(d) = nb {
                out[d] += tau * slope;
            }
        }
    }
    out
}
