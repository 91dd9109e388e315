use crate::error::{Error, Result};

/// Two-sided 95% normal quantile used for Fisher intervals.
pub const Z_95: f64 = 1.959964;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub coefficient: f64,
    pub n: usize,
    /// Fisher-z interval; Pearson only.
    pub ci: Option<(f64, f64)>,
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "correlation inputs differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("correlation inputs must be finite"));
    }
    Ok(())
}

/// Product-moment coefficient, `None` when either side has zero variance
/// or fewer than two points.
pub fn pearson_coefficient(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// `tanh(atanh(r) ± z / sqrt(n − 3))`. For n ≤ 3 the interval is [−1, 1].
pub fn fisher_ci(r: f64, n: usize, z: f64) -> (f64, f64) {
    if n <= 3 {
        return (-1.0, 1.0);
    }
    let centre = r.clamp(-1.0, 1.0).atanh();
    let half = z / ((n - 3) as f64).sqrt();
    let lo = (centre - half).tanh().min(r);
    let hi = (centre + half).tanh().max(r);
    (lo, hi)
}

/// Pearson's r with its 95% Fisher confidence interval. Needs n ≥ 3.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<CorrelationResult> {
    check_lengths(a, b)?;
    if a.len() < 3 {
        return Err(Error::invalid("pearson needs at least 3 observations"));
    }
    let r = pearson_coefficient(a, b)
        .ok_or_else(|| Error::undefined("pearson: zero variance input"))?;
    Ok(CorrelationResult {
        coefficient: r,
        n: a.len(),
        ci: Some(fisher_ci(r, a.len(), Z_95)),
    })
}

/// Counts swaps performed by a stable merge sort; equal keys never swap.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + (mid - i)].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + (n - j)].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Σ t(t−1)/2 over runs of equal values in a sorted slice.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Kendall's τ_b = (C − D) / sqrt((n0 − n1)(n0 − n2)) in O(n log n)
/// (Knight's merge-sort method).
pub fn kendall_tau_b(a: &[f64], b: &[f64]) -> Result<CorrelationResult> {
    check_lengths(a, b)?;
    let n = a.len();
    if n < 2 {
        return Err(Error::invalid("kendall needs at least 2 observations"));
    }
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let ties_a = tied_pairs(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let ties_joint = tied_pairs(&pairs);
    let mut bs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let discordant = merge_count(&mut bs, &mut buf);
    let ties_b = tied_pairs(&bs);
    let not_tied_a = n0 - ties_a;
    let not_tied_b = n0 - ties_b;
    if not_tied_a == 0 || not_tied_b == 0 {
        return Err(Error::undefined("kendall: an input is constant"));
    }
    // C + D = n0 − n1 − n2 + n3. Work in i128 to keep everything exact.
    let c_plus_d = n0 as i128 - ties_a as i128 - ties_b as i128 + ties_joint as i128;
    let c_minus_d = c_plus_d - 2 * discordant as i128;
    let tau = c_minus_d as f64 / ((not_tied_a as f64) * (not_tied_b as f64)).sqrt();
    Ok(CorrelationResult {
        coefficient: tau.clamp(-1.0, 1.0),
        n,
        ci: None,
    })
}
