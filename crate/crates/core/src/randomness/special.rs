use statrs::function::{erf, gamma};

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    erf::erfc(x)
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn igamc(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma::gamma_ur(a, x).clamp(0.0, 1.0)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values from scipy.special (gammaincc, erfc, ndtr)
    #[test]
    fn against_reference_values() {
        let cases = [
            (igamc(2.0, 0.8), 0.808_792_135_410_998_9),
            (igamc(1.0, 0.4), 0.670_320_046_035_639_4),
            (igamc(1.5, 2.441_302), 0.180_598_073_453_997_12),
            (igamc(8.0, 3.0), 0.988_095_496_143_642_6),
            (igamc(0.5, 12.0), 9.633_570_086_430_95e-7),
            (erfc(0.5), 0.479_500_122_186_953_5),
            (erfc(3.0), 2.209_049_699_858_544_5e-5),
            (normal_cdf(1.3), 0.903_199_515_414_389_7),
        ];
        for (got, want) in cases {
            assert!((got - want).abs() < 1e-9 * want.max(1e-6), "{got} vs {want}");
        }
    }
}
