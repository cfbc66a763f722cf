//! Oracles and fixtures shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.
#![allow(dead_code)]

use fileprint::linalg::Matrix;
use fileprint::mlp::{loss, Activation, LayerSpec, MlpNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Random network with 2..=4 layers of 1..=10 neurons, random activations
/// and non-zero biases.
pub fn random_network(rng: &mut ChaCha8Rng) -> MlpNetwork {
    let n_layers = rng.random_range(2..=4);
    let acts = [Activation::Linear, Activation::Tanh, Activation::Logistic];
    let specs: Vec<LayerSpec> = (0..n_layers)
        .map(|_| LayerSpec::new(rng.random_range(1..=10), acts[rng.random_range(0..3)]))
        .collect();
    let mut net = MlpNetwork::init(&specs, rng.random()).unwrap();
    for b in net.biases_mut() {
        for v in b.iter_mut() {
            *v = rng.random_range(-0.5..0.5);
        }
    }
    net
}

/// Central-difference estimate of every parameter gradient, weights first
/// (layer by layer, row-major) then biases.
pub fn finite_difference_gradients(
    net: &MlpNetwork,
    x: &[f64],
    target: &[f64],
    eps: f64,
) -> (Vec<Matrix>, Vec<Vec<f64>>) {
    let eval = |n: &MlpNetwork| loss(&n.predict(x).unwrap(), target).unwrap();
    let mut work = net.clone();
    let mut gw = Vec::new();
    for l in 0..net.weights().len() {
        let (r, c) = net.weights()[l].shape();
        let mut g = Matrix::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                let orig = work.weights()[l][(i, j)];
                work.weights_mut()[l][(i, j)] = orig + eps;
                let plus = eval(&work);
                work.weights_mut()[l][(i, j)] = orig - eps;
                let minus = eval(&work);
                work.weights_mut()[l][(i, j)] = orig;
                g[(i, j)] = (plus - minus) / (2.0 * eps);
            }
        }
        gw.push(g);
    }
    let mut gb = Vec::new();
    for l in 0..net.biases().len() {
        let mut g = vec![0.0; net.biases()[l].len()];
        for (i, gi) in g.iter_mut().enumerate() {
            let orig = work.biases()[l][i];
            work.biases_mut()[l][i] = orig + eps;
            let plus = eval(&work);
            work.biases_mut()[l][i] = orig - eps;
            let minus = eval(&work);
            work.biases_mut()[l][i] = orig;
            *gi = (plus - minus) / (2.0 * eps);
        }
        gb.push(g);
    }
    (gw, gb)
}

/// Relative error with an absolute floor: pairs where both magnitudes are
/// below `1e-8` count as agreeing to within their absolute difference.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale < 1e-8 {
        (analytic - numeric).abs()
    } else {
        (analytic - numeric).abs() / scale
    }
}

/// Worst relative error over all parameters of one random (net, x, target).
pub fn worst_gradient_error(net: &MlpNetwork, rng: &mut ChaCha8Rng) -> f64 {
    let x: Vec<f64> = (0..net.input_size()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let t: Vec<f64> = (0..net.output_size()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let analytic = net.backprop_gradients(&x, &t).unwrap();
    let (gw, gb) = finite_difference_gradients(net, &x, &t, 1e-5);
    let mut worst: f64 = 0.0;
    for (a, n) in analytic.weights.iter().zip(&gw) {
        for (&ai, &ni) in a.as_slice().iter().zip(n.as_slice()) {
            worst = worst.max(relative_error(ai, ni));
        }
    }
    for (a, n) in analytic.biases.iter().zip(&gb) {
        for (&ai, &ni) in a.iter().zip(n) {
            worst = worst.max(relative_error(ai, ni));
        }
    }
    worst
}

/// Centered dataset whose covariance has a clear spectrum:
/// `rows` samples of dimension `d`, mixed by a random matrix.
pub fn centered_dataset(rows: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mixing: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut data: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            let latent: Vec<f64> = (0..d)
                .map(|j| rng.random_range(-1.0..1.0) * 2.0 / (1.0 + j as f64))
                .collect();
            (0..d)
                .map(|i| (0..d).map(|j| mixing[i][j] * latent[j]).sum())
                .collect()
        })
        .collect();
    let mean: Vec<f64> = (0..d)
        .map(|j| data.iter().map(|r| r[j]).sum::<f64>() / rows as f64)
        .collect();
    for r in &mut data {
        for (v, m) in r.iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    data
}

/// Explicit reconstruction error: mean over rows of ‖x − x̂‖².
pub fn mean_reconstruction_error(rows: &[Vec<f64>], recon: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    rows.iter()
        .map(|x| {
            recon(x)
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum::<f64>()
        / rows.len() as f64
}
