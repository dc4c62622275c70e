//! Small numerical helpers shared across modules.

/// Neumaier's variant of Kahan compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if !t.is_finite() {
            // the carry is meaningless once the sum overflows
            self.sum = t;
            return;
        }
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        if !self.sum.is_finite() {
            return self.sum;
        }
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `x * 2^exp` without intermediate overflow or premature underflow.
pub fn ldexp(mut x: f64, mut exp: i64) -> f64 {
    const STEP: i64 = 1000;
    let up = 2f64.powi(STEP as i32);
    let down = 2f64.powi(-(STEP as i32));
    while exp > STEP {
        x *= up;
        exp -= STEP;
        if x.is_infinite() {
            return x;
        }
    }
    while exp < -STEP {
        x *= down;
        exp += STEP;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(exp as i32)
}

/// `ln Γ(r) = ln (r-1)!` for a positive integer `r`.
pub fn ln_gamma_int(r: u32) -> f64 {
    ln_factorial(u64::from(r.saturating_sub(1)))
}

/// `ln n!`, summed exactly up to 256 and through `lgamma` beyond.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 256 {
        return (2..=n)
            .map(|i| (i as f64).ln())
            .collect::<CompensatedSum>()
            .value();
    }
    libm::lgamma(n as f64 + 1.0)
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Standard normal CDF, accurate in both tails.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail `1 - Φ(z)`.
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

pub fn std_normal_pdf(z: f64) -> f64 {
    const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_keeps_infinity() {
        let s: CompensatedSum = [1.0, f64::INFINITY, 2.0, f64::INFINITY]
            .into_iter()
            .collect();
        assert_eq!(s.value(), f64::INFINITY);
        let s: CompensatedSum = [1e16, 1.0, -1e16].into_iter().collect();
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn ldexp_handles_extremes() {
        assert_eq!(ldexp(1.0, 10), 1024.0);
        assert_eq!(ldexp(3.0, -1), 1.5);
        assert_eq!(ldexp(1.0, -5000), 0.0);
        assert_eq!(ldexp(2f64.powi(1000), -2000), 2f64.powi(-1000));
    }

    #[test]
    fn ln_gamma_of_integers() {
        assert_eq!(ln_gamma_int(1), 0.0);
        assert!((ln_gamma_int(5) - 24f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-16);
        // Φ(1.96) = 0.9750021048517795
        let v = std_normal_cdf(1.96);
        assert!((v - 0.975_002_104_851_779_6).abs() < 1e-14, "{v:e}");
        assert!((std_normal_sf(1.96) + std_normal_cdf(1.96) - 1.0).abs() < 1e-15);
    }
}
