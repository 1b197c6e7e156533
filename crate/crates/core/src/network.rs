//! Finite-volume connectivity shared by the Laplace solves and the time
//! integrator.
//!
//! A [`FluxNetwork`] is a list of cells with volumes, interior faces with
//! conductances, and Dirichlet boundary links. The flux through a face
//! `(i, j, c)` of a potential `p` is `c (p_i − p_j)`, so any cell-centered
//! scheme built on it is conservative by construction.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryLink {
    pub cell: usize,
    pub conductance: f64,
    /// Prescribed potential on the far side of the link.
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FluxNetwork {
    pub volumes: Vec<f64>,
    pub faces: Vec<(usize, usize, f64)>,
    pub boundary: Vec<BoundaryLink>,
}

impl FluxNetwork {
    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    /// Sum of conductances attached to each cell (faces and boundary links).
    pub fn total_conductance(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.len()];
        for &(i, j, c) in &self.faces {
            d[i] += c;
            d[j] += c;
        }
        for b in &self.boundary {
            d[b.cell] += b.conductance;
        }
        d
    }

    /// `(A p)_i = Σ_faces c (p_i − p_j) + Σ_links c p_i`, the symmetric
    /// operator of the homogeneous problem.
    pub fn apply(&self, p: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, c) in &self.faces {
            let f = c * (p[i] - p[j]);
            out[i] += f;
            out[j] -= f;
        }
        for b in &self.boundary {
            out[b.cell] += b.conductance * p[b.cell];
        }
    }

    /// Right-hand side contributed by the Dirichlet values.
    pub fn boundary_source(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.len()];
        for l in &self.boundary {
            b[l.cell] += l.conductance * l.value;
        }
        b
    }

    /// Net flux `Σ c (p_cell − value)` leaving through the links selected by `keep`.
    pub fn boundary_flux(&self, p: &[f64], keep: impl Fn(&BoundaryLink) -> bool) -> f64 {
        self.boundary
            .iter()
            .filter(|l| keep(l))
            .map(|l| l.conductance * (p[l.cell] - l.value))
            .sum()
    }

    /// Solves the discrete Laplace problem `A p = boundary_source()` by
    /// Jacobi-preconditioned conjugate gradients, starting from `p`.
    ///
    /// Returns the final relative residual. Stagnation beyond `max_iter`
    /// iterations yields [`Error::NoConvergence`] carrying the residual history.
    pub fn solve_laplace(&self, p: &mut [f64], tol: f64, max_iter: usize) -> Result<f64> {
        let n = self.len();
        let rhs = self.boundary_source();
        let diag = self.total_conductance();
        if diag.iter().any(|&d| d <= 0.0) {
            return Err(Error::param("network has an isolated cell"));
        }
        let bnorm = norm2(&rhs).max(f64::MIN_POSITIVE);
        let mut ap = vec![0.0; n];
        self.apply(p, &mut ap);
        let mut r: Vec<f64> = rhs.iter().zip(&ap).map(|(b, a)| b - a).collect();
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let mut dir = z.clone();
        let mut rz = dot(&r, &z);
        let mut history = Vec::new();
        for _ in 0..max_iter {
            let rel = norm2(&r) / bnorm;
            history.push(rel);
            if rel <= tol {
                return Ok(rel);
            }
            self.apply(&dir, &mut ap);
            let alpha = rz / dot(&dir, &ap);
            for k in 0..n {
                p[k] += alpha * dir[k];
                r[k] -= alpha * ap[k];
            }
            for k in 0..n {
                z[k] = r[k] / diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                dir[k] = z[k] + beta * dir[k];
            }
        }
        let rel = norm2(&r) / bnorm;
        if rel <= tol {
            return Ok(rel);
        }
        history.push(rel);
        Err(Error::NoConvergence { history })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
