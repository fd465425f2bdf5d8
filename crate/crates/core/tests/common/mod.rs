//! Independent reference implementations. Nothing here calls into the
//! library's simulator; states are built from explicit Kronecker products.

#![allow(dead_code)]

use acae::statevector::{Gate, C64};
use rand::Rng;

pub type Matrix = Vec<Vec<C64>>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn identity(d: usize) -> Matrix {
    (0..d).map(|i| (0..d).map(|j| c((i == j) as u8 as f64, 0.0)).collect()).collect()
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let d = a.len();
    let mut out = vec![vec![c(0.0, 0.0); d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn matvec(a: &Matrix, v: &[C64]) -> Vec<C64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// `cos(a/2) I - i sin(a/2) P` for a Pauli matrix `P`.
fn rotation(p: [[C64; 2]; 2], a: f64) -> Matrix {
    let (s, co) = (a / 2.0).sin_cos();
    (0..2)
        .map(|i| (0..2).map(|j| c(co * (i == j) as u8 as f64, 0.0) - c(0.0, s) * p[i][j]).collect())
        .collect()
}

fn single(g: &Gate) -> Matrix {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    let px = [[z, o], [o, z]];
    let py = [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]];
    let pz = [[o, z], [z, -o]];
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match *g {
        Gate::Rx(_, a) => rotation(px, a),
        Gate::Ry(_, a) => rotation(py, a),
        Gate::Rz(_, a) => rotation(pz, a),
        Gate::H(_) => vec![vec![c(r, 0.0), c(r, 0.0)], vec![c(r, 0.0), c(-r, 0.0)]],
        Gate::S(_) => vec![vec![o, z], vec![z, c(0.0, 1.0)]],
        Gate::X(_) => px.iter().map(|r| r.to_vec()).collect(),
        Gate::Z(_) => pz.iter().map(|r| r.to_vec()).collect(),
        Gate::Cnot(..) => unreachable!(),
    }
}

/// Full `2^n x 2^n` matrix of a gate; qubit 0 is the leftmost tensor factor.
pub fn gate_matrix(n: usize, g: &Gate) -> Matrix {
    match *g {
        Gate::Cnot(ctl, tgt) => {
            let d = 1 << n;
            let mut m = vec![vec![c(0.0, 0.0); d]; d];
            for col in 0..d {
                let bit = |q: usize| (col >> (n - 1 - q)) & 1;
                let row = if bit(ctl) == 1 { col ^ (1 << (n - 1 - tgt)) } else { col };
                m[row][col] = c(1.0, 0.0);
            }
            m
        }
        _ => {
            let q = g.qubits().0;
            let mut m = identity(1);
            for k in 0..n {
                m = kron(&m, &if k == q { single(g) } else { identity(2) });
            }
            m
        }
    }
}

pub fn circuit_matrix(n: usize, gates: &[Gate]) -> Matrix {
    gates.iter().fold(identity(1 << n), |acc, g| matmul(&gate_matrix(n, g), &acc))
}

pub fn circuit_state(n: usize, gates: &[Gate]) -> Vec<C64> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(1.0, 0.0);
    for g in gates {
        v = matvec(&gate_matrix(n, g), &v);
    }
    v
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    inner(a, b).norm_sqr()
}

pub fn random_unit<R: Rng>(n: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..1 << n).map(|_| c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)).collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

/// Classifier output as a weighted sum of kernel values. `per_vector`
/// scales every training vector to norm `1/sqrt 2`; otherwise all of them
/// share one factor so the training block has unit norm.
pub fn kernel_oracle(
    plus: &[Vec<f64>],
    minus: &[Vec<f64>],
    weights: &[f64],
    test: &[f64],
    phi: f64,
    per_vector: bool,
) -> f64 {
    let t = scaled(test, 1.0 / dot(test, test).sqrt());
    let global = weights
        .iter()
        .zip(plus.iter().zip(minus))
        .map(|(b, (p, m))| b * (dot(p, p) + dot(m, m)))
        .sum::<f64>()
        .sqrt();
    let mut sigma = 0.0;
    for (j, b) in weights.iter().enumerate() {
        let (p, m) = if per_vector {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            (scaled(&plus[j], h / dot(&plus[j], &plus[j]).sqrt()), scaled(&minus[j], h / dot(&minus[j], &minus[j]).sqrt()))
        } else {
            (scaled(&plus[j], 1.0 / global), scaled(&minus[j], 1.0 / global))
        };
        sigma += b * (phi.cos() * dot(&t, &p) - phi.sin() * dot(&t, &m));
    }
    sigma
}

pub fn random_vectors<R: Rng>(rng: &mut R, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect()).collect()
}

/// Positive weights summing to one, with the last one absorbing rounding.
pub fn random_weights<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 0.05).collect();
    let s: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
    w[m - 1] = 1.0 - w[..m - 1].iter().sum::<f64>();
    w
}

/// Upper tail of the chi-squared distribution.
pub fn chi_square_p(observed: &[u64], expected_each: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let stat: f64 = observed.iter().map(|&o| (o as f64 - expected_each).powi(2) / expected_each).sum();
    1.0 - ChiSquared::new((observed.len() - 1) as f64).unwrap().cdf(stat)
}
