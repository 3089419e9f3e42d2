//! Standard test objectives and their analytic gradients.

use std::f64::consts::{E, PI};

/// Sphere function. Global minimum f(0,...,0) = 0.
pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|xi| xi * xi).sum()
}

pub fn sphere_grad(x: &[f64]) -> Vec<f64> {
    x.iter().map(|xi| 2.0 * xi).collect()
}

/// Rosenbrock function. Global minimum f(1,...,1) = 0.
pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

pub fn rosenbrock_grad(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut g = vec![0.0; n];
    for i in 0..n - 1 {
        let t = x[i + 1] - x[i] * x[i];
        g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
        g[i + 1] += 200.0 * t;
    }
    g
}

/// Beale function (2-D). Global minimum f(3, 0.5) = 0.
pub fn beale(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    (1.5 - a + a * b).powi(2) + (2.25 - a + a * b * b).powi(2) + (2.625 - a + a * b * b * b).powi(2)
}

pub fn beale_grad(x: &[f64]) -> Vec<f64> {
    let (a, b) = (x[0], x[1]);
    let t1 = 1.5 - a + a * b;
    let t2 = 2.25 - a + a * b * b;
    let t3 = 2.625 - a + a * b * b * b;
    vec![
        2.0 * t1 * (b - 1.0) + 2.0 * t2 * (b * b - 1.0) + 2.0 * t3 * (b * b * b - 1.0),
        2.0 * t1 * a + 2.0 * t2 * 2.0 * a * b + 2.0 * t3 * 3.0 * a * b * b,
    ]
}

/// Booth function (2-D). Global minimum f(1, 3) = 0.
pub fn booth(x: &[f64]) -> f64 {
    (x[0] + 2.0 * x[1] - 7.0).powi(2) + (2.0 * x[0] + x[1] - 5.0).powi(2)
}

pub fn booth_grad(x: &[f64]) -> Vec<f64> {
    let t1 = x[0] + 2.0 * x[1] - 7.0;
    let t2 = 2.0 * x[0] + x[1] - 5.0;
    vec![2.0 * t1 + 4.0 * t2, 4.0 * t1 + 2.0 * t2]
}

/// Matyas function (2-D). Global minimum f(0, 0) = 0.
pub fn matyas(x: &[f64]) -> f64 {
    0.26 * (x[0] * x[0] + x[1] * x[1]) - 0.48 * x[0] * x[1]
}

pub fn matyas_grad(x: &[f64]) -> Vec<f64> {
    vec![0.52 * x[0] - 0.48 * x[1], 0.52 * x[1] - 0.48 * x[0]]
}

/// Himmelblau function (2-D). f(3, 2) = 0 is one of four global minima.
pub fn himmelblau(x: &[f64]) -> f64 {
    (x[0] * x[0] + x[1] - 11.0).powi(2) + (x[0] + x[1] * x[1] - 7.0).powi(2)
}

pub fn himmelblau_grad(x: &[f64]) -> Vec<f64> {
    let t1 = x[0] * x[0] + x[1] - 11.0;
    let t2 = x[0] + x[1] * x[1] - 7.0;
    vec![4.0 * x[0] * t1 + 2.0 * t2, 2.0 * t1 + 4.0 * x[1] * t2]
}

/// Zakharov function. Global minimum f(0,...,0) = 0.
pub fn zakharov(x: &[f64]) -> f64 {
    let s1: f64 = x.iter().map(|xi| xi * xi).sum();
    let s2: f64 = x
        .iter()
        .enumerate()
        .map(|(i, xi)| 0.5 * (i as f64 + 1.0) * xi)
        .sum();
    s1 + s2.powi(2) + s2.powi(4)
}

pub fn zakharov_grad(x: &[f64]) -> Vec<f64> {
    let s2: f64 = x
        .iter()
        .enumerate()
        .map(|(i, xi)| 0.5 * (i as f64 + 1.0) * xi)
        .sum();
    x.iter()
        .enumerate()
        .map(|(i, xi)| {
            let w = 0.5 * (i as f64 + 1.0);
            2.0 * xi + (2.0 * s2 + 4.0 * s2.powi(3)) * w
        })
        .collect()
}

/// Rastrigin function. Global minimum f(0,...,0) = 0.
pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|xi| xi * xi - 10.0 * (2.0 * PI * xi).cos())
            .sum::<f64>()
}

pub fn rastrigin_grad(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|xi| 2.0 * xi + 20.0 * PI * (2.0 * PI * xi).sin())
        .collect()
}

/// Ackley function. Global minimum f(0,...,0) = 0.
pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sum_sq: f64 = x.iter().map(|xi| xi * xi).sum();
    let sum_cos: f64 = x.iter().map(|xi| (2.0 * PI * xi).cos()).sum();
    -20.0 * (-0.2 * (sum_sq / n).sqrt()).exp() - (sum_cos / n).exp() + 20.0 + E
}

pub fn ackley_grad(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let sum_sq: f64 = x.iter().map(|xi| xi * xi).sum();
    let sum_cos: f64 = x.iter().map(|xi| (2.0 * PI * xi).cos()).sum();
    let r = (sum_sq / n).sqrt();
    let e1 = (-0.2 * r).exp();
    let e2 = (sum_cos / n).exp();
    x.iter()
        .map(|xi| {
            // At the origin the radial term has a removable 0/0; the gradient is 0 there.
            let radial = if r > 0.0 { 4.0 * e1 * xi / (n * r) } else { 0.0 };
            radial + e2 * 2.0 * PI * (2.0 * PI * xi).sin() / n
        })
        .collect()
}

/// Griewank function. Global minimum f(0,...,0) = 0.
pub fn griewank(x: &[f64]) -> f64 {
    let s: f64 = x.iter().map(|xi| xi * xi / 4000.0).sum();
    let p: f64 = x
        .iter()
        .enumerate()
        .map(|(i, xi)| (xi / ((i + 1) as f64).sqrt()).cos())
        .product();
    s - p + 1.0
}

pub fn griewank_grad(x: &[f64]) -> Vec<f64> {
    let terms: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, xi)| xi / ((i + 1) as f64).sqrt())
        .collect();
    let p: f64 = terms.iter().map(|t| t.cos()).product();
    x.iter()
        .enumerate()
        .map(|(i, xi)| {
            let c = terms[i].cos();
            let others = if c != 0.0 {
                p / c
            } else {
                terms
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, t)| t.cos())
                    .product()
            };
            xi / 2000.0 + others * terms[i].sin() / ((i + 1) as f64).sqrt()
        })
        .collect()
}

/// Levy function. Global minimum f(1,...,1) = 0.
pub fn levy(x: &[f64]) -> f64 {
    let w: Vec<f64> = x.iter().map(|xi| 1.0 + (xi - 1.0) / 4.0).collect();
    let n = w.len();
    let mut f = (PI * w[0]).sin().powi(2);
    for wi in &w[..n - 1] {
        f += (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2));
    }
    f += (w[n - 1] - 1.0).powi(2) * (1.0 + (2.0 * PI * w[n - 1]).sin().powi(2));
    f
}

pub fn levy_grad(x: &[f64]) -> Vec<f64> {
    let w: Vec<f64> = x.iter().map(|xi| 1.0 + (xi - 1.0) / 4.0).collect();
    let n = w.len();
    let mut g = vec![0.0; n];
    // dw/dx = 1/4 throughout.
    g[0] += 2.0 * (PI * w[0]).sin() * (PI * w[0]).cos() * PI;
    for i in 0..n - 1 {
        let s = (PI * w[i] + 1.0).sin();
        let c = (PI * w[i] + 1.0).cos();
        g[i] += 2.0 * (w[i] - 1.0) * (1.0 + 10.0 * s * s)
            + (w[i] - 1.0).powi(2) * 20.0 * s * c * PI;
    }
    let s = (2.0 * PI * w[n - 1]).sin();
    let c = (2.0 * PI * w[n - 1]).cos();
    g[n - 1] += 2.0 * (w[n - 1] - 1.0) * (1.0 + s * s)
        + (w[n - 1] - 1.0).powi(2) * 2.0 * s * c * 2.0 * PI;
    g.iter().map(|gi| gi / 4.0).collect()
}

/// Three-hump camel function (2-D). Global minimum f(0, 0) = 0.
pub fn three_hump_camel(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    2.0 * a * a - 1.05 * a.powi(4) + a.powi(6) / 6.0 + a * b + b * b
}

pub fn three_hump_camel_grad(x: &[f64]) -> Vec<f64> {
    let (a, b) = (x[0], x[1]);
    vec![4.0 * a - 4.2 * a.powi(3) + a.powi(5) + b, a + 2.0 * b]
}

/// Axis-weighted sum of squares. Global minimum f(0,...,0) = 0.
pub fn sum_squares(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, xi)| (i as f64 + 1.0) * xi * xi)
        .sum()
}

pub fn sum_squares_grad(x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, xi)| 2.0 * (i as f64 + 1.0) * xi)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central finite-difference gradient, the independent check for every
    /// analytic gradient above.
    fn fd_grad(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += h;
                xm[i] -= h;
                (f(&xp) - f(&xm)) / (2.0 * h)
            })
            .collect()
    }

    fn check_grad(f: fn(&[f64]) -> f64, g: fn(&[f64]) -> Vec<f64>, x: &[f64]) {
        let ga = g(x);
        let gn = fd_grad(f, x, 1e-6);
        for (a, n) in ga.iter().zip(&gn) {
            let scale = 1.0 + a.abs().max(n.abs());
            assert!(
                (a - n).abs() / scale < 1e-5,
                "gradient mismatch at {x:?}: analytic {ga:?} vs fd {gn:?}"
            );
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let x2 = [0.3, -0.7];
        let x5 = [0.3, -0.7, 1.2, 0.9, -0.4];
        check_grad(sphere, sphere_grad, &x5);
        check_grad(rosenbrock, rosenbrock_grad, &x5);
        check_grad(beale, beale_grad, &x2);
        check_grad(booth, booth_grad, &x2);
        check_grad(matyas, matyas_grad, &x2);
        check_grad(himmelblau, himmelblau_grad, &x2);
        check_grad(zakharov, zakharov_grad, &x5);
        check_grad(rastrigin, rastrigin_grad, &x5);
        check_grad(ackley, ackley_grad, &x5);
        check_grad(griewank, griewank_grad, &x5);
        check_grad(levy, levy_grad, &x5);
        check_grad(three_hump_camel, three_hump_camel_grad, &x2);
        check_grad(sum_squares, sum_squares_grad, &x5);
    }

    #[test]
    fn minima_are_where_advertised() {
        assert_eq!(beale(&[3.0, 0.5]), 0.0);
        assert_eq!(rosenbrock(&[1.0, 1.0]), 0.0);
        assert_eq!(booth(&[1.0, 3.0]), 0.0);
        assert_eq!(himmelblau(&[3.0, 2.0]), 0.0);
        assert_eq!(rastrigin(&[0.0, 0.0, 0.0]), 0.0);
        assert!(ackley(&[0.0, 0.0]).abs() < 1e-12);
        assert_eq!(griewank(&[0.0, 0.0, 0.0]), 0.0);
        assert!(levy(&[1.0, 1.0, 1.0]).abs() < 1e-12);
    }
}
