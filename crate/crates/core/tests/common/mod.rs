//! Shared fixtures and finite-difference oracles for the integration suites.
//!
//! The FD routines are the independent check against every analytic
//! derivative in the crate: they only ever call scalar cost/response
//! evaluations, never the closed-form gradient or Hessian paths.

use landscape_lab::cost::EmpiricalMeasure;
use landscape_lab::linalg::Mat;
use landscape_lab::net::{Activation, Network, ParameterVector, Topology};
use landscape_lab::rng::Rng;

/// Central finite-difference gradient with coordinate-relative steps.
pub fn fd_gradient(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h_rel: f64) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    for i in 0..x.len() {
        let h = h_rel * (1.0 + x[i].abs());
        let mut plus = x.to_vec();
        plus[i] += h;
        let mut minus = x.to_vec();
        minus[i] -= h;
        grad[i] = (f(&plus) - f(&minus)) / (2.0 * h);
    }
    grad
}

/// Central finite-difference Hessian (symmetric by construction).
pub fn fd_hessian(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h_rel: f64) -> Mat {
    let n = x.len();
    let mut hess = Mat::zeros(n, n);
    let center = f(x);
    let steps: Vec<f64> = x.iter().map(|xi| h_rel * (1.0 + xi.abs())).collect();
    for i in 0..n {
        let mut pp = x.to_vec();
        pp[i] += steps[i];
        let mut mm = x.to_vec();
        mm[i] -= steps[i];
        hess[(i, i)] = (f(&pp) - 2.0 * center + f(&mm)) / (steps[i] * steps[i]);
        for j in (i + 1)..n {
            let mut xpp = x.to_vec();
            xpp[i] += steps[i];
            xpp[j] += steps[j];
            let mut xpm = x.to_vec();
            xpm[i] += steps[i];
            xpm[j] -= steps[j];
            let mut xmp = x.to_vec();
            xmp[i] -= steps[i];
            xmp[j] += steps[j];
            let mut xmm = x.to_vec();
            xmm[i] -= steps[i];
            xmm[j] -= steps[j];
            let v = (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * steps[i] * steps[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

/// Entrywise `|a - b| <= tol * (1 + |b|)`, reporting the worst offender.
pub fn assert_close_rel(a: &[f64], b: &[f64], tol: f64, label: &str) {
    assert_eq!(a.len(), b.len(), "{label}: length mismatch");
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        assert!(
            (x - y).abs() <= tol * (1.0 + y.abs()),
            "{label}: entry {i}: {x} vs {y} (diff {:.3e}, budget {:.3e})",
            (x - y).abs(),
            tol * (1.0 + y.abs())
        );
    }
}

pub fn assert_mat_close_rel(a: &Mat, b: &Mat, tol: f64, label: &str) {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()), "{label}: shape");
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let (x, y) = (a[(i, j)], b[(i, j)]);
            assert!(
                (x - y).abs() <= tol * (1.0 + y.abs()),
                "{label}: entry ({i},{j}): {x} vs {y}"
            );
        }
    }
}

pub fn random_network(topo: &Topology, act: Activation, rng: &mut Rng) -> Network {
    let flat = rng.normal_vec(topo.param_dim());
    Network::new(act, ParameterVector::from_flat(topo, &flat).unwrap())
}

pub fn random_measure(n: usize, d: usize, spread: f64, rng: &mut Rng) -> EmpiricalMeasure {
    let atoms = Mat::from_fn(n, d, |_, _| spread * rng.next_normal());
    EmpiricalMeasure::uniform(atoms).unwrap()
}
