//! Binomial intervals and the few statistics used to judge Monte Carlo
//! results.

/// Two-sided 95% standard-normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials at quantile `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    assert!(n > 0, "Wilson interval needs n >= 1");
    assert!(k <= n);
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// One-sided two-proportion z statistic for `p1 > p2` with pooled variance.
pub fn two_proportion_z(k1: u64, n1: u64, k2: u64, n2: u64) -> f64 {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let p1 = k1 as f64 / n1f;
    let p2 = k2 as f64 / n2f;
    let pooled = (k1 + k2) as f64 / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    if se == 0.0 {
        return if p1 > p2 { f64::INFINITY } else { 0.0 };
    }
    (p1 - p2) / se
}

/// Weighted least-squares fit of `y ≈ A exp(-x / τ)`. For each τ on a
/// log-spaced grid the optimal `A` is closed-form; the best grid τ is then
/// refined by golden-section search. Returns `(A, τ)`.
pub fn fit_exponential_decay(x: &[f64], y: &[f64], w: &[f64], tau_range: (f64, f64)) -> (f64, f64) {
    assert!(x.len() == y.len() && y.len() == w.len() && !x.is_empty());
    let amplitude = |tau: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..x.len() {
            let e = (-x[i] / tau).exp();
            num += w[i] * y[i] * e;
            den += w[i] * e * e;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    };
    let sse = |tau: f64| {
        let a = amplitude(tau);
        (0..x.len())
            .map(|i| {
                let r = y[i] - a * (-x[i] / tau).exp();
                w[i] * r * r
            })
            .sum::<f64>()
    };
    let (lo, hi) = (tau_range.0.ln(), tau_range.1.ln());
    let n = 400;
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let best = (0..=n)
        .min_by(|&a, &b| sse(grid[a].exp()).total_cmp(&sse(grid[b].exp())))
        .unwrap();
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if sse(c.exp()) < sse(d.exp()) {
            b = d;
        } else {
            a = c;
        }
    }
    let tau = (0.5 * (a + b)).exp();
    (amplitude(tau), tau)
}

/// Two-sample Kolmogorov-Smirnov test. Returns `(D, p)` with the
/// asymptotic p-value (Stephens' small-sample correction).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    (d, kolmogorov_q(lambda))
}

/// Survival function of the Kolmogorov distribution.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = 2.0 * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_half() {
        let (lo, hi) = wilson_interval(500, 1000, Z95);
        assert!((lo - 0.469).abs() < 5e-4, "{lo}");
        assert!((hi - 0.531).abs() < 5e-4, "{hi}");
    }

    #[test]
    fn wilson_boundaries() {
        let (lo, hi) = wilson_interval(1000, 1000, Z95);
        assert_eq!(hi, 1.0);
        assert!(lo < 1.0 && lo > 0.99);
        let (lo, hi) = wilson_interval(0, 10, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0);
        let (lo, hi) = wilson_interval(1, 1, Z95);
        assert_eq!(hi, 1.0);
        assert!(lo > 0.0);
    }

    #[test]
    fn z_statistic_sign() {
        assert!(two_proportion_z(300, 1000, 200, 1000) > 1.645);
        assert!(two_proportion_z(200, 1000, 200, 1000).abs() < 1e-12);
    }

    #[test]
    fn recovers_exponential() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 2.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.4 * (-v / 9.0).exp()).collect();
        let w = vec![1.0; x.len()];
        let (a, tau) = fit_exponential_decay(&x, &y, &w, (0.1, 1000.0));
        assert!((a - 0.4).abs() < 1e-6);
        assert!((tau - 9.0).abs() < 1e-5);
    }

    #[test]
    fn ks_identical_and_shifted() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let (d, p) = ks_two_sample(&a, &a);
        assert_eq!(d, 0.0);
        assert!(p > 0.99);
        let b: Vec<f64> = a.iter().map(|v| v + 0.2).collect();
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p < 1e-6);
    }
}
