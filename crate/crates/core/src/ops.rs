//! Dense operator algebra on small spin registers.
//!
//! Operators act on `n` spin-1/2 sites with site 0 as the leftmost Kronecker
//! factor. Within each site, index 0 is the `σz = +1` state.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;
pub type Op = DMatrix<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> Op {
    match axis {
        Axis::X => Op::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => Op::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Axis::Z => Op::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

pub fn identity(dim: usize) -> Op {
    Op::identity(dim, dim)
}

pub fn kron(a: &Op, b: &Op) -> Op {
    a.kronecker(b)
}

/// Lift a single-site operator onto `site` of an `n_sites` register.
pub fn embed(single: &Op, site: usize, n_sites: usize) -> Op {
    debug_assert!(site < n_sites);
    let left = identity(1 << site);
    let right = identity(1 << (n_sites - site - 1));
    kron(&kron(&left, single), &right)
}

/// Lift a product `a ⊗ b` acting on two distinct sites.
pub fn embed_pair(a: &Op, site_a: usize, b: &Op, site_b: usize, n_sites: usize) -> Op {
    debug_assert_ne!(site_a, site_b);
    embed(a, site_a, n_sites) * embed(b, site_b, n_sites)
}

/// `σz` eigenvalue (+1 / -1) of `site` in computational basis state `index`.
#[inline]
pub fn z_sign(index: usize, site: usize, n_sites: usize) -> f64 {
    if (index >> (n_sites - site - 1)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn is_diagonal(m: &Op) -> bool {
    let n = m.nrows();
    (0..n).all(|r| (0..n).all(|c| r == c || m[(r, c)].norm() == 0.0))
}

/// `exp(-i H t)` for Hermitian `H` by spectral decomposition.
pub fn propagator(h: &Op, t: f64) -> Op {
    let n = h.nrows();
    if is_diagonal(h) {
        let mut u = Op::zeros(n, n);
        for k in 0..n {
            u[(k, k)] = (-I * h[(k, k)].re * t).exp();
        }
        return u;
    }
    let eig = h.clone().symmetric_eigen();
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|&e| (-I * e * t).exp()),
    ));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// `U ρ U†`.
pub fn conjugate(u: &Op, rho: &Op) -> Op {
    u * rho * u.adjoint()
}

pub fn max_abs_diff(a: &Op, b: &Op) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &Op, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &Op) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `exp(-i angle/2 (cos φ σx + sin φ σy + ...))`: rotation about an arbitrary Bloch axis.
pub fn rotation(axis: [f64; 3], angle: f64) -> Op {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let (nx, ny, nz) = (axis[0] / norm, axis[1] / norm, axis[2] / norm);
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    Op::from_row_slice(
        2,
        2,
        &[
            C64::new(c, -s * nz),
            C64::new(-s * ny, -s * nx),
            C64::new(s * ny, -s * nx),
            C64::new(c, s * nz),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli(Axis::X), pauli(Axis::Y), pauli(Axis::Z));
        assert!(max_abs_diff(&(&x * &y), &(&z * I)) < 1e-15);
        assert!(max_abs_diff(&(&x * &x), &identity(2)) < 1e-15);
    }

    #[test]
    fn rotation_matches_propagator() {
        // exp(-i θ/2 n·σ) == propagator(n·σ/2, θ)
        let n = [0.3, -0.4, 0.5];
        let h = (pauli(Axis::X) * C64::from(n[0])
            + pauli(Axis::Y) * C64::from(n[1])
            + pauli(Axis::Z) * C64::from(n[2]))
            * C64::from(0.5 / (0.5f64).sqrt());
        let angle = 1.234;
        assert!(max_abs_diff(&rotation(n, angle), &propagator(&h, angle)) < 1e-12);
    }

    #[test]
    fn z_sign_site_order() {
        // |↑↓⟩ is index 1 for two sites
        assert_eq!(z_sign(1, 0, 2), 1.0);
        assert_eq!(z_sign(1, 1, 2), -1.0);
        let zz = embed(&pauli(Axis::Z), 1, 2);
        assert_eq!(zz[(1, 1)].re, -1.0);
    }
}
