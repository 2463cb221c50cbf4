//! Shared helpers for the integration and acceptance suites:
//! Kolmogorov-Smirnov statistics, Simpson quadrature, and bisection,
//! kept independent of the library code they check.
#![allow(dead_code)]

/// One-sample KS statistic of `sample` against the CDF.
pub fn ks_one_sample(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_unstable_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One-sample KS critical value at coefficient c(alpha).
pub fn ks_critical_one_sample(n: usize, c: f64) -> f64 {
    c / (n as f64).sqrt()
}

/// Two-sample KS critical value at coefficient c(alpha).
pub fn ks_critical_two_sample(n: usize, m: usize, c: f64) -> f64 {
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Composite Simpson rule with `panels` even subdivisions.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(2) & !1;
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let x = a + i as f64 * h;
        acc += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Bisection for `f(x) = 0` on a bracketing interval.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iterations: usize) -> f64 {
    let flo = f(lo);
    assert!(
        (flo <= 0.0) != (f(hi) <= 0.0),
        "bisect requires a sign change on [{lo}, {hi}]"
    );
    let rising = flo <= 0.0;
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm <= 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Standard normal quantile via bisection on the library CDF.
pub fn norm_quantile(p: f64) -> f64 {
    bisect(|x| mcpope::special::norm_cdf(x) - p, -40.0, 40.0, 200)
}

/// Student-t density with n degrees of freedom.
pub fn t_pdf(x: f64, n: f64) -> f64 {
    let c = (mcpope::special::ln_gamma(0.5 * (n + 1.0))
        - mcpope::special::ln_gamma(0.5 * n)
        - 0.5 * (n * std::f64::consts::PI).ln())
    .exp();
    c * (1.0 + x * x / n).powf(-0.5 * (n + 1.0))
}

/// Student-t CDF by quadrature of the density from 0 to |x|.
pub fn t_cdf_quadrature(x: f64, n: f64) -> f64 {
    let half = simpson(|t| t_pdf(t, n), 0.0, x.abs(), 40_000);
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// Wall-clock ceiling scaled for machines with fewer cores than the
/// stated baseline.
pub fn scaled_ceiling(base_secs: f64) -> f64 {
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let assumed = mcpope::tolerances::ceilings::ASSUMED_CORES;
    base_secs * (assumed as f64 / cores as f64).max(1.0)
}

pub fn max_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
