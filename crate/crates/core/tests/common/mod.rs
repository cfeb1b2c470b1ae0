#![allow(dead_code)]

use nalgebra::{Complex, Matrix4};

/// First-order form `[[0, I], [−B_λ, −γI]]` of `ü + γu̇ + B_λu = 0`.
pub fn companion(gamma: f64, lambda: f64) -> Matrix4<f64> {
    let s = 1.0 + lambda * lambda;
    #[rustfmt::skip]
    let m = Matrix4::new(
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        -lambda / s, 1.0 / s, -gamma, 0.0,
        -1.0 / s, -lambda / s, 0.0, -gamma,
    );
    m
}

/// Characteristic polynomial coefficients, lowest degree first, by
/// Faddeev–LeVerrier.
pub fn char_poly(a: &Matrix4<f64>) -> [f64; 5] {
    let mut c = [0.0; 5];
    c[4] = 1.0;
    let mut m = Matrix4::zeros();
    for k in 1..=4 {
        m = a * m + Matrix4::identity() * c[5 - k];
        c[4 - k] = -(a * m).trace() / k as f64;
    }
    c
}

fn eval(c: &[f64; 5], z: Complex<f64>) -> (Complex<f64>, Complex<f64>) {
    let (mut p, mut dp) = (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
    for &ci in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ci;
    }
    (p, dp)
}

/// Roots of a monic quartic by Durand–Kerner, polished with Newton steps.
pub fn quartic_roots(c: &[f64; 5]) -> [Complex<f64>; 4] {
    let seed = Complex::new(0.4, 0.9);
    let mut z = [seed, seed * seed, seed * seed * seed, seed * seed * seed * seed];
    for _ in 0..2000 {
        let prev = z;
        for i in 0..4 {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..4 {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            z[i] -= eval(c, z[i]).0 / denom;
        }
        if z.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-16) {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval(c, *zi);
            if dp.norm() > 0.0 {
                *zi -= p / dp;
            }
        }
    }
    z
}

/// Largest real part among the companion matrix eigenvalues.
pub fn companion_max_real(gamma: f64, lambda: f64) -> f64 {
    quartic_roots(&char_poly(&companion(gamma, lambda))).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}
