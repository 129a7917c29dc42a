//! Small least-squares fits used for tail diagnostics.

/// Result of a straight-line fit `y ≈ intercept + slope · x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

/// Ordinary least squares for a line. Returns `None` with fewer than two
/// distinct abscissae.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Some(LineFit { slope, intercept, rms })
}

/// Decay exponent `p` of `|f| ~ C s^p` from a log–log fit over the samples
/// with `f ≠ 0`. `None` means the profile vanishes identically there.
pub fn power_law_exponent(s: &[f64], f: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = s
        .iter()
        .zip(f)
        .filter(|(si, fi)| **si > 0.0 && fi.abs() > 0.0 && fi.is_finite())
        .map(|(si, fi)| (si.ln(), fi.abs().ln()))
        .unzip();
    if lx.len() < 2 {
        return None;
    }
    fit_line(&lx, &ly).map(|l| l.slope)
}

/// Exponential rate `q` of `|f| ~ C e^{−q s}`.
pub fn exponential_rate(s: &[f64], f: &[f64]) -> Option<f64> {
    let (x, ly): (Vec<f64>, Vec<f64>) = s
        .iter()
        .zip(f)
        .filter(|(_, fi)| fi.abs() > 0.0 && fi.is_finite())
        .map(|(si, fi)| (*si, fi.abs().ln()))
        .unzip();
    if x.len() < 2 {
        return None;
    }
    fit_line(&x, &ly).map(|l| -l.slope)
}

/// Weighted least squares on an arbitrary basis via normal equations with
/// Cholesky factorisation. Suitable for a handful of columns.
pub fn weighted_least_squares(rows: &[Vec<f64>], y: &[f64], w: &[f64]) -> Option<Vec<f64>> {
    let m = rows.first()?.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for ((r, yi), wi) in rows.iter().zip(y).zip(w) {
        for i in 0..m {
            b[i] += wi * r[i] * yi;
            for j in 0..m {
                a[i][j] += wi * r[i] * r[j];
            }
        }
    }
    // Cholesky: a = L Lᵀ.
    let mut l = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    let mut z = vec![0.0; m];
    for i in 0..m {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        let s: f64 = (i + 1..m).map(|k| l[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_planted_power_law() {
        let s: Vec<f64> = (1..=50).map(|i| 10.0 * f64::from(i)).collect();
        let f: Vec<f64> = s.iter().map(|x| 4.0 * x.powf(-7.0)).collect();
        assert!((power_law_exponent(&s, &f).unwrap() + 7.0).abs() < 1e-10);
    }

    #[test]
    fn recovers_planted_rate() {
        let s: Vec<f64> = (0..40).map(|i| 0.25 * f64::from(i)).collect();
        let f: Vec<f64> = s.iter().map(|x| -2.0 * (-3.5 * x).exp()).collect();
        assert!((exponential_rate(&s, &f).unwrap() - 3.5).abs() < 1e-10);
    }

    #[test]
    fn identically_zero_has_no_exponent() {
        assert!(power_law_exponent(&[1.0, 2.0], &[0.0, 0.0]).is_none());
    }

    #[test]
    fn weighted_fit_recovers_coefficients() {
        let xs: Vec<f64> = (1..20).map(f64::from).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|x| vec![1.0, 1.0 / x, 1.0 / (x * x)]).collect();
        let y: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 / x + 0.5 / (x * x)).collect();
        let w = vec![1.0; xs.len()];
        let c = weighted_least_squares(&rows, &y, &w).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-9 && (c[1] + 3.0).abs() < 1e-8 && (c[2] - 0.5).abs() < 1e-8);
    }
}
