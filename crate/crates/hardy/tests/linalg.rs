use hardy::linalg::{
    cg_solve, rayleigh_quotient, reverse_cuthill_mckee, smallest_eigenpair, CsrBuilder, CsrMatrix, EnvelopeCholesky,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random banded SPD pair: a shifted graph Laplacian and a diagonally
/// dominant mass-like matrix.
fn random_pencil(n: usize, seed: u64) -> (CsrMatrix, CsrMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = CsrBuilder::new(n);
    let mut b = CsrBuilder::new(n);
    for i in 0..n {
        a.add(i, i, rng.gen_range(0.01..0.1));
        b.add(i, i, rng.gen_range(1.0..3.0));
        for j in (i + 1)..(i + 4).min(n) {
            let w = rng.gen_range(0.1..2.0);
            a.add(i, i, w);
            a.add(j, j, w);
            a.add(i, j, -w);
            a.add(j, i, -w);
            let m = rng.gen_range(-0.2..0.2);
            b.add(i, j, m);
            b.add(j, i, m);
        }
    }
    (a.build(), b.build())
}

fn cholesky(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (m[i][i] - s).sqrt();
            } else {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

/// Solves `L y = rhs` for each column of `rhs`.
fn forward(l: &[Vec<f64>], rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = l.len();
    let mut out = vec![vec![0.0; n]; n];
    for c in 0..n {
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[i][k] * out[k][c]).sum();
            out[i][c] = (rhs[i][c] - s) / l[i][i];
        }
    }
    out
}

fn transpose(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| m[j][i]).collect()).collect()
}

/// Cyclic Jacobi sweeps on a dense symmetric matrix; returns the eigenvalues.
fn jacobi_eigenvalues(mut m: Vec<Vec<f64>>) -> Vec<f64> {
    let n = m.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Smallest eigenvalue of `(A, B)` through `L⁻¹ A L⁻ᵀ` with `B = LLᵀ`.
fn dense_smallest(a: &CsrMatrix, b: &CsrMatrix) -> f64 {
    let l = cholesky(&b.to_dense());
    let y = forward(&l, &a.to_dense());
    let c = forward(&l, &transpose(&y));
    jacobi_eigenvalues(c)[0]
}

#[test]
fn matches_dense_jacobi_oracle() {
    for seed in 0..6 {
        let (a, b) = random_pencil(40, seed);
        let oracle = dense_smallest(&a, &b);
        let got = smallest_eigenpair(&a, &b, 1e-12, 7).unwrap();
        assert!(got.converged);
        assert!((got.lambda_min - oracle).abs() <= 1e-9 * oracle.abs(), "seed {seed}: {} vs {oracle}", got.lambda_min);
    }
}

#[test]
fn eigenvalue_bounds_random_rayleigh_quotients() {
    let (a, b) = random_pencil(60, 3);
    let eig = smallest_eigenpair(&a, &b, 1e-12, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let x: Vec<f64> = (0..60).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(eig.lambda_min <= rayleigh_quotient(&a, &b, &x).unwrap() * (1.0 + 1e-12));
    }
}

#[test]
fn eigenvector_is_b_normalized_and_has_small_residual() {
    let (a, b) = random_pencil(50, 5);
    let eig = smallest_eigenpair(&a, &b, 1e-10, 1).unwrap();
    assert!((b.quad_form(&eig.vector) - 1.0).abs() < 1e-12);
    assert!(eig.residual < 1e-10);
    let ax = a.mul_vec(&eig.vector);
    let bx = b.mul_vec(&eig.vector);
    let r: f64 = ax.iter().zip(&bx).map(|(p, q)| (p - eig.lambda_min * q).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = bx.iter().map(|v| v * v).sum::<f64>().sqrt() * eig.lambda_min.abs().max(1.0);
    assert!(r / scale < 1e-9);
    assert!(eig.shift < eig.lambda_min);
}

#[test]
fn solves_are_deterministic() {
    let (a, b) = random_pencil(80, 8);
    let first = smallest_eigenpair(&a, &b, 1e-10, 42).unwrap();
    let second = smallest_eigenpair(&a, &b, 1e-10, 42).unwrap();
    assert_eq!(first.lambda_min.to_bits(), second.lambda_min.to_bits());
    assert_eq!(first.vector, second.vector);
    assert_eq!(first.iterations, second.iterations);
}

#[test]
fn envelope_cholesky_solves_like_cg() {
    let (a, b) = random_pencil(70, 4);
    let m = a.lin_comb(1.0, &b, 0.5);
    let rhs: Vec<f64> = (0..70).map(|i| (i as f64 * 0.37).sin()).collect();
    let perm = reverse_cuthill_mckee(&m);
    let direct = EnvelopeCholesky::factor(&m, &perm).unwrap().solve(&rhs);
    let iterative = cg_solve(&m, &rhs, 1e-14).unwrap();
    for (x, y) in direct.iter().zip(&iterative.x) {
        assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
    }
}

#[test]
fn indefinite_mass_is_rejected() {
    let a = CsrMatrix::identity(3);
    let b = CsrMatrix::diagonal(&[1.0, -1.0, 1.0]);
    assert!(smallest_eigenpair(&a, &b, 1e-10, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn diagonal_pencils_give_the_smallest_ratio(d in proptest::collection::vec((0.1f64..10.0, 0.1f64..10.0), 2..30)) {
        let a = CsrMatrix::diagonal(&d.iter().map(|p| p.0).collect::<Vec<_>>());
        let b = CsrMatrix::diagonal(&d.iter().map(|p| p.1).collect::<Vec<_>>());
        let want = d.iter().map(|p| p.0 / p.1).fold(f64::INFINITY, f64::min);
        let got = smallest_eigenpair(&a, &b, 1e-12, 1).unwrap().lambda_min;
        prop_assert!((got - want).abs() <= 1e-9 * want);
    }
}
