#![allow(dead_code)]

use nalgebra::DMatrix;
use qnoise_core::channel::KrausSet;
use qnoise_core::{ComplexMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let q = gaussian(rng, n, n).qr().q();
    ComplexMatrix::from_dmatrix(q).unwrap()
}

/// Random channel with `rank` Kraus operators from a Haar-like isometry.
pub fn random_channel(rng: &mut impl Rng, s: usize, rank: usize) -> KrausSet {
    let v = gaussian(rng, s * rank, s).qr().q();
    let ops = (0..rank)
        .map(|k| ComplexMatrix::from_dmatrix(v.rows(k * s, s).into_owned()).unwrap())
        .collect();
    KrausSet::new(ops).unwrap()
}

pub fn random_density(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = gaussian(rng, n, n);
    let rho = &g * g.adjoint();
    let trace = rho.trace();
    ComplexMatrix::from_dmatrix(rho / trace).unwrap().hermitian_part()
}

pub fn random_state(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let v = gaussian(rng, n, 1);
    let norm = v.norm();
    ComplexMatrix::from_dmatrix(v / C64::new(norm, 0.0)).unwrap()
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = gaussian(rng, n, n);
    ComplexMatrix::from_dmatrix((&g + g.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}
