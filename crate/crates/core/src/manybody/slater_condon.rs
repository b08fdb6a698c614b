use nalgebra::DMatrix;

use super::space::{Determinant, DeterminantSpace};
use crate::integrals::Tensor4;

/// One- and two-body kernels over orthonormal spatial orbitals. `h` may be
/// non-symmetric; `g` is in physicist order `⟨pq|rs⟩`.
#[derive(Debug, Clone, Copy)]
pub struct Kernel<'a> {
    pub h: &'a DMatrix<f64>,
    pub g: Option<&'a Tensor4>,
    /// Added to every diagonal element.
    pub constant: f64,
}

impl Kernel<'_> {
    fn h_so(&self, p: usize, q: usize) -> f64 {
        if p % 2 != q % 2 {
            0.0
        } else {
            self.h[(p / 2, q / 2)]
        }
    }

    fn g_so(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        match self.g {
            Some(g) if p % 2 == r % 2 && q % 2 == s % 2 => g.get(p / 2, q / 2, r / 2, s / 2),
            _ => 0.0,
        }
    }

    /// `½(⟨pq|rs⟩ + ⟨qp|sr⟩ − ⟨pq|sr⟩ − ⟨qp|rs⟩)`: the antisymmetrized element
    /// without assuming electron-exchange symmetry of `g`.
    fn g_anti(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        0.5 * (self.g_so(p, q, r, s) + self.g_so(q, p, s, r) - self.g_so(p, q, s, r) - self.g_so(q, p, r, s))
    }
}

/// `⟨bra|O|ket⟩` for determinants via the Slater–Condon rules.
pub fn matrix_element(bra: Determinant, ket: Determinant, k: &Kernel) -> f64 {
    let diff = bra.0 ^ ket.0;
    match diff.count_ones() {
        0 => {
            let occ = bra.occupied();
            let mut e = k.constant;
            for (a, &p) in occ.iter().enumerate() {
                e += k.h_so(p, p);
                for &q in &occ[a + 1..] {
                    e += k.g_anti(p, q, p, q);
                }
            }
            e
        }
        2 => {
            let p = (bra.0 & diff).trailing_zeros() as usize;
            let q = (ket.0 & diff).trailing_zeros() as usize;
            let (sign, d) = ket.excite(p, q).expect("single excitation");
            debug_assert_eq!(d, bra);
            let mut e = k.h_so(p, q);
            for c in Determinant(bra.0 & ket.0).occupied() {
                e += k.g_anti(p, c, q, c);
            }
            sign * e
        }
        4 => {
            let b = Determinant(bra.0 & diff).occupied();
            let c = Determinant(ket.0 & diff).occupied();
            let (p1, p2, q1, q2) = (b[0], b[1], c[0], c[1]);
            // bra = sign · a†_p1 a†_p2 a_q2 a_q1 ket
            let (s1, d) = ket.annihilate(q1).unwrap();
            let (s2, d) = d.annihilate(q2).unwrap();
            let (s3, d) = d.create(p2).unwrap();
            let (s4, d) = d.create(p1).unwrap();
            debug_assert_eq!(d, bra);
            s1 * s2 * s3 * s4 * k.g_anti(p1, p2, q1, q2)
        }
        _ => 0.0,
    }
}

/// Operator matrix over the determinants of `space`.
pub fn determinant_matrix(space: &DeterminantSpace, k: &Kernel) -> DMatrix<f64> {
    let dets = &space.determinants;
    let n = dets.len();
    DMatrix::from_fn(n, n, |i, j| matrix_element(dets[i], dets[j], k))
}

/// Operator matrix in the configuration basis of `space`.
pub fn operator_matrix(space: &DeterminantSpace, k: &Kernel) -> DMatrix<f64> {
    space.restrict(determinant_matrix(space, k))
}

/// Many-body Hamiltonian; `nuclear_repulsion` is added on the diagonal.
pub fn hamiltonian(space: &DeterminantSpace, h: &DMatrix<f64>, g: &Tensor4, nuclear_repulsion: f64) -> DMatrix<f64> {
    operator_matrix(
        space,
        &Kernel {
            h,
            g: Some(g),
            constant: nuclear_repulsion,
        },
    )
}
