#![allow(dead_code)]

pub mod rbm;

use nalgebra::{Complex, DMatrix};
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `P_ℓ^m(x)` for `m ≥ 0`, Condon–Shortley phase included.
pub fn assoc_legendre(l: u32, m: u32, x: f64) -> f64 {
    let s = (1.0 - x * x).sqrt();
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= -((2 * k - 1) as f64) * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pm0 = pmm;
    for ll in m + 2..=l {
        let p = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pm0) / (ll - m) as f64;
        pm0 = pm1;
        pm1 = p;
    }
    pm1
}

pub fn y_lm(l: u32, m: i32, theta: f64, phi: f64) -> Complex<f64> {
    let am = m.unsigned_abs();
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - am) / factorial(l + am)).sqrt();
    let y = Complex::from_polar(norm * assoc_legendre(l, am, theta.cos()), am as f64 * phi);
    if m >= 0 {
        y
    } else {
        let sign = if am.is_multiple_of(2) { 1.0 } else { -1.0 };
        y.conj() * sign
    }
}

fn labels(ell_max: u32) -> Vec<(u32, i32)> {
    (0..=ell_max).flat_map(|l| (-(l as i32)..=l as i32).map(move |m| (l, m))).collect()
}

/// `⟨ℓ'm'|f(θ, φ)|ℓm⟩` by Gauss–Legendre in `cos θ` times a uniform `φ` grid.
pub fn quadrature_matrix(ell_max: u32, f: impl Fn(f64, f64) -> Complex<f64>) -> DMatrix<Complex<f64>> {
    let basis = labels(ell_max);
    let d = basis.len();
    let nodes = gauss_legendre(2 * ell_max as usize + 8);
    let n_phi = 4 * ell_max as usize + 8;
    let mut out = DMatrix::from_element(d, d, Complex::new(0.0, 0.0));
    for &(x, w) in &nodes {
        let theta = x.acos();
        for k in 0..n_phi {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            let weight = w * 2.0 * PI / n_phi as f64;
            let ys: Vec<Complex<f64>> = basis.iter().map(|&(l, m)| y_lm(l, m, theta, phi)).collect();
            let fv = f(theta, phi);
            for r in 0..d {
                for c in 0..d {
                    out[(r, c)] += ys[r].conj() * fv * ys[c] * weight;
                }
            }
        }
    }
    out
}

pub fn real_part(m: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn max_imag(m: &DMatrix<Complex<f64>>) -> f64 {
    m.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

/// Independent single-rotor operators `(z, p⁺, p⁻)` from quadrature.
pub fn quadrature_ops(ell_max: u32) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let z = quadrature_matrix(ell_max, |t, _| Complex::new(t.cos(), 0.0));
    let pp = quadrature_matrix(ell_max, |t, p| Complex::from_polar(t.sin(), p));
    let pm = quadrature_matrix(ell_max, |t, p| Complex::from_polar(t.sin(), -p));
    (real_part(&z), real_part(&pp), real_part(&pm))
}

/// `I ⊗ … ⊗ op (at site) ⊗ … ⊗ I`, site 0 leftmost.
pub fn embed(ops: &[(usize, &DMatrix<f64>)], n_sites: usize, d: usize) -> DMatrix<f64> {
    let mut out = DMatrix::from_element(1, 1, 1.0);
    for site in 0..n_sites {
        let factor = ops
            .iter()
            .find(|(s, _)| *s == site)
            .map(|(_, m)| (*m).clone())
            .unwrap_or_else(|| DMatrix::identity(d, d));
        out = out.kronecker(&factor);
    }
    out
}

/// Dense chain Hamiltonian from Kronecker products of quadrature operators.
pub fn dense_hamiltonian(n_sites: usize, ell_max: u32, r: f64) -> DMatrix<f64> {
    let (z, pp, pm) = quadrature_ops(ell_max);
    let d = z.nrows();
    let kin = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        labels(ell_max).iter().map(|&(l, _)| (l * (l + 1)) as f64),
    ));
    let dim = d.pow(n_sites as u32);
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..n_sites {
        h += embed(&[(i, &kin)], n_sites, d);
    }
    let coupling = if r.is_infinite() { 0.0 } else { r.powi(-3) };
    for i in 0..n_sites {
        for j in i + 1..n_sites {
            let dist3 = ((j - i) as f64).powi(3);
            let v = (embed(&[(i, &pp), (j, &pm)], n_sites, d) + embed(&[(i, &pm), (j, &pp)], n_sites, d)) * 0.5
                - embed(&[(i, &z), (j, &z)], n_sites, d) * 2.0;
            h += v * (coupling / dist3);
        }
    }
    h
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Total-variation distance between two distributions on the same support.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
