//! Small numeric helpers shared across modules: the Gaussian tail mass
//! `2Q(a)` expressed through the complementary error function, and stable
//! Poisson pmf/cdf evaluation in log space.

/// `2 Q(a) = erfc(a / sqrt(2))`, where `Q` is the standard Gaussian tail.
pub fn two_q(a: f64) -> f64 {
    libm::erfc(a / std::f64::consts::SQRT_2)
}

/// `2 Q(rho / sqrt(t))` with the `t = 0` limit defined as `2 Q(inf) = 0`.
pub fn two_q_sqrt(rho: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        two_q(rho / t.sqrt())
    }
}

/// Natural log of the Poisson pmf at integer `k >= 0` with mean `lambda > 0`.
pub fn poisson_ln_pmf(k: u64, lambda: f64) -> f64 {
    let kf = k as f64;
    kf * lambda.ln() - lambda - libm::lgamma(kf + 1.0)
}

/// Poisson pmf at integer `k` with mean `lambda > 0`.
pub fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    poisson_ln_pmf(k, lambda).exp()
}

/// Poisson cdf `P[Y <= k]` with mean `lambda > 0`, by direct summation with
/// a stable recurrence on the pmf.
pub fn poisson_cdf(k: i64, lambda: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    // Sum pmf(0..=k). Start from the mode region in log space to avoid
    // underflow for large lambda: p(0) = exp(-lambda) underflows near
    // lambda ~ 745, so anchor each term directly in log space.
    let k = k as u64;
    // For small lambda the plain recurrence from p(0) is exact and fast.
    if lambda < 700.0 {
        let mut term = (-lambda).exp();
        let mut sum = term;
        for i in 1..=k {
            term *= lambda / i as f64;
            sum += term;
        }
        return sum.min(1.0);
    }
    let mut sum = 0.0;
    for i in 0..=k {
        sum += poisson_pmf(i, lambda);
    }
    sum.min(1.0)
}

/// Poisson probability of the open integer interval `lo < Y < hi`.
///
/// Empty intervals yield 0. Bounds may be any reals; the event is the set of
/// integers strictly between them.
pub fn poisson_open_interval(lo: f64, hi: f64, lambda: f64) -> f64 {
    let a = (lo.floor() as i64 + 1).max(0); // smallest integer > lo
    let b = hi.ceil() as i64 - 1; // largest integer < hi
    if b < a {
        return 0.0;
    }
    let upper = poisson_cdf(b, lambda);
    let lower = if a == 0 {
        0.0
    } else {
        poisson_cdf(a - 1, lambda)
    };
    (upper - lower).clamp(0.0, 1.0)
}

/// Euclidean norm of a slice.
pub fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_q_matches_erfc_reference() {
        // Reference values from an independent erfc evaluation.
        assert_relative_eq!(two_q(2.0_f64.sqrt() * 0.5), 0.4795001221869535, max_relative = 1e-13);
        assert_relative_eq!(two_q(2.0_f64.sqrt() * 1.0), 0.15729920705028516, max_relative = 1e-13);
        assert_relative_eq!(
            two_q(2.0_f64.sqrt() * 1.224744871391589),
            0.08326451666355045,
            max_relative = 1e-13
        );
        assert_relative_eq!(two_q(2.0_f64.sqrt() * 3.0), 2.2090496998585445e-5, max_relative = 1e-12);
    }

    #[test]
    fn two_q_sqrt_zero_denominator_is_zero() {
        assert_eq!(two_q_sqrt(0.5477, 0.0), 0.0);
        assert_eq!(two_q_sqrt(0.5477, -1.0), 0.0);
    }

    #[test]
    fn poisson_pmf_cdf_reference() {
        assert_relative_eq!(poisson_cdf(4, 2.0), 0.9473469826562889, max_relative = 1e-12);
        assert_relative_eq!(poisson_pmf(3, 2.5), 0.21376301724973648, max_relative = 1e-12);
        assert_relative_eq!(poisson_cdf(120, 100.0), 0.9773306709216473, max_relative = 1e-11);
    }

    #[test]
    fn open_interval_cases() {
        // All of N: probability 1.
        assert_relative_eq!(poisson_open_interval(-1.0, f64::INFINITY, 3.0), 1.0, epsilon = 1e-12);
        // Empty interval.
        assert_eq!(poisson_open_interval(5.0, 5.5, 3.0), 0.0);
        // Integer endpoints are excluded: 1 < Y < 3 is {2}.
        assert_relative_eq!(poisson_open_interval(1.0, 3.0, 2.0), poisson_pmf(2, 2.0), epsilon = 1e-14);
    }
}
