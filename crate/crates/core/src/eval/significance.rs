use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// One-sided paired t-test of the alternative "errors in `a` are smaller
/// than in `b`": p = P(T_{n−1} ≤ t) with t computed on d = a − b.
///
/// Identical inputs give t = 0 and p = 0.5. Differences that are constant
/// but non-zero leave t undefined.
pub fn paired_t_one_sided(err_a: &[f64], err_b: &[f64]) -> Result<f64> {
    if err_a.len() != err_b.len() {
        return Err(Error::invalid("paired t-test inputs differ in length"));
    }
    let n = err_a.len();
    if n < 2 {
        return Err(Error::invalid("paired t-test needs at least 2 pairs"));
    }
    let d: Vec<f64> = err_a.iter().zip(err_b).map(|(a, b)| a - b).collect();
    if d.iter().all(|&x| x == 0.0) {
        return Ok(0.5);
    }
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 {
        return Err(Error::undefined("paired t-test: differences have zero variance"));
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map_err(|e| Error::invalid(format!("t distribution: {e}")))?;
    Ok(dist.cdf(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_errors_give_half() {
        let e = [0.1, 0.4, 0.2];
        assert_eq!(paired_t_one_sided(&e, &e).unwrap(), 0.5);
    }

    #[test]
    fn constant_shift_is_undefined() {
        let b = [0.5, 1.0, 1.5, 2.0];
        let a = [0.25, 0.75, 1.25, 1.75];
        assert!(matches!(paired_t_one_sided(&a, &b), Err(Error::Undefined(_))));
        assert!(paired_t_one_sided(&a[..1], &b[..1]).is_err());
    }

    #[test]
    fn direction() {
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        let a = [0.5, 1.0, 2.9, 3.0, 4.0];
        assert!(paired_t_one_sided(&a, &b).unwrap() < 0.05);
        assert!(paired_t_one_sided(&b, &a).unwrap() > 0.95);
    }
}
