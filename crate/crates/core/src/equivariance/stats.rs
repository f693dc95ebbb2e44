use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Total-variation distance `½ Σ |p_i − q_i|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson χ² of observed counts against expected probabilities for `total`
/// draws. Cells with fewer than five expected counts are pooled into one.
pub fn chi_square(observed: &[usize], expected: &[f64], total: usize) -> ChiSquare {
    assert_eq!(observed.len(), expected.len());
    let m = total as f64;
    let mut statistic = 0.0;
    let mut used: usize = 0;
    let (mut pooled_o, mut pooled_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected) {
        let e = m * p;
        if e >= 5.0 {
            statistic += (o as f64 - e).powi(2) / e;
            used += 1;
        } else {
            pooled_o += o as f64;
            pooled_e += e;
        }
    }
    if pooled_e >= 5.0 {
        statistic += (pooled_o - pooled_e).powi(2) / pooled_e;
        used += 1;
    }
    let dof = used.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
    };
    ChiSquare {
        statistic,
        dof,
        p_value,
    }
}

/// Kolmogorov distance `sup |F_emp − F|` of `samples` from the distribution `cdf`.
pub fn kolmogorov_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_variation_of_disjoint_supports_is_one() {
        assert_eq!(total_variation(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert_eq!(total_variation(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
    }

    #[test]
    fn chi_square_of_exact_counts_is_zero() {
        let c = chi_square(&[250, 250, 500], &[0.25, 0.25, 0.5], 1000);
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.dof, 2);
        assert!((c.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_matches_table_value() {
        // 5.991 is the 95% quantile with two degrees of freedom
        let c = chi_square(&[0, 0, 0], &[0.2, 0.3, 0.5], 0);
        assert_eq!(c.dof, 0);
        let d = ChiSquared::new(2.0).unwrap();
        assert!((d.sf(5.991) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn kolmogorov_of_midpoints_is_half_a_step() {
        let m = 10;
        let xs: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        let d = kolmogorov_statistic(&xs, |x| x);
        assert!((d - 0.05).abs() < 1e-12);
    }
}
