//! Random valid ME laws for property and agreement tests.

use crate::algebra::{convolve, max_dist};
use crate::error::Result;
use crate::matfun::{c, ColVec, Matrix, RowVec};
use crate::medist::MeDist;
use rand::Rng;

/// Mixture of exponentials with rates in `[0.4, 3]`.
pub fn hyperexponential<R: Rng + ?Sized>(rng: &mut R, phases: usize) -> Result<MeDist> {
    let rates: Vec<f64> = (0..phases).map(|_| rng.random_range(0.4..3.0)).collect();
    let w: Vec<f64> = (0..phases).map(|_| rng.random_range(0.1..1.0)).collect();
    let tot: f64 = w.iter().sum();
    let x = RowVec::from_iterator(phases, w.iter().zip(&rates).map(|(w, r)| c(w / tot * r)));
    let y = Matrix::from_diagonal(&ColVec::from_iterator(phases, rates.iter().map(|r| c(-r))));
    MeDist::new(x, y, ColVec::from_element(phases, c(1.0)))
}

pub fn hypoexponential<R: Rng + ?Sized>(rng: &mut R, phases: usize) -> Result<MeDist> {
    let mut d = MeDist::exponential(rng.random_range(0.4..2.0))?;
    for _ in 1..phases {
        d = convolve(&d, &MeDist::exponential(rng.random_range(0.4..2.0))?)?;
    }
    Ok(d)
}

/// A random valid law of degree at most `max_degree` drawn from several families.
pub fn random_medist<R: Rng + ?Sized>(rng: &mut R, max_degree: usize) -> Result<MeDist> {
    let max_degree = max_degree.max(1);
    let k = rng.random_range(1..=max_degree);
    match rng.random_range(0..4) {
        0 => hyperexponential(rng, k),
        1 => hypoexponential(rng, k),
        2 if max_degree >= 3 => {
            // max of two exponentials has degree 3
            let a = MeDist::exponential(rng.random_range(0.5..2.0))?;
            let b = MeDist::exponential(rng.random_range(0.5..2.0))?;
            max_dist(&a, &b).closure()
        }
        _ => {
            let osc = crate::medist::oscillatory_example();
            if max_degree >= 3 {
                osc.scaled(rng.random_range(0.5..2.0))
            } else {
                hyperexponential(rng, k)
            }
        }
    }
}
