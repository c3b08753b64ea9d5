//! Gauss–Legendre rules on `[-1, 1]`.

use crate::error::{Result, RmhdError};

/// Nodes and weights (summing to 2) of the `n`-point rule, `1 ≤ n ≤ 5`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = |x: f64| x.sqrt();
    let (x, w): (Vec<f64>, Vec<f64>) = match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / s(3.0);
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = s(0.6);
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let a = s(3.0 / 7.0 - 2.0 / 7.0 * s(1.2));
            let b = s(3.0 / 7.0 + 2.0 / 7.0 * s(1.2));
            let wa = (18.0 + s(30.0)) / 36.0;
            let wb = (18.0 - s(30.0)) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        5 => {
            let a = s(5.0 - 2.0 * s(10.0 / 7.0)) / 3.0;
            let b = s(5.0 + 2.0 * s(10.0 / 7.0)) / 3.0;
            let wa = (322.0 + 13.0 * s(70.0)) / 900.0;
            let wb = (322.0 - 13.0 * s(70.0)) / 900.0;
            (vec![-b, -a, 0.0, a, b], vec![wb, wa, 128.0 / 225.0, wa, wb])
        }
        _ => {
            return Err(RmhdError::Config(format!("quadrature order {n} not in 1..=5")));
        }
    };
    Ok((x, w))
}

/// Averages `f` over `[a, b]` with the `n`-point rule.
pub fn line_average(n: usize, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
    let (x, w) = gauss_legendre(n)?;
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    Ok(x.iter().zip(&w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        for n in 1..=5 {
            let (x, w) = gauss_legendre(n).unwrap();
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let q: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(deg as i32)).sum();
                assert!((q - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(6).is_err());
    }

    #[test]
    fn average_of_linear() {
        let m = line_average(1, 2.0, 4.0, |x| 3.0 * x + 1.0).unwrap();
        assert!((m - 10.0).abs() < 1e-14);
    }
}
