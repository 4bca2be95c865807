use crate::error::{Error, Result};

/// Chi-square statistic of a nonnegative column against binary labels,
/// treating per-class value sums as observed frequencies.
///
/// For each class `c`, `O_c` is the sum of `x` over rows of class `c` and
/// `E_c` is the total sum of `x` times the class prior. The score is
/// `sum_c (O_c - E_c)^2 / E_c`. Classes absent from `labels` contribute
/// nothing.
pub fn chi_square_score(x: &[f64], labels: &[u8]) -> Result<f64> {
    if x.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} values vs {} labels",
            x.len(),
            labels.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::invalid("chi-square of an empty column"));
    }
    let mut observed = [0.0f64; 2];
    let mut class_n = [0usize; 2];
    for (&v, &l) in x.iter().zip(labels) {
        if v < 0.0 || v.is_nan() {
            return Err(Error::invalid(format!("chi-square needs nonnegative values, got {v}")));
        }
        if l > 1 {
            return Err(Error::Label(format!("non-binary label {l}")));
        }
        observed[usize::from(l)] += v;
        class_n[usize::from(l)] += 1;
    }
    let total: f64 = observed.iter().sum();
    if total == 0.0 {
        return Err(Error::invalid("chi-square of an all-zero column"));
    }
    let n = x.len() as f64;
    Ok((0..2)
        .filter(|&c| class_n[c] > 0)
        .map(|c| {
            let expected = total * class_n[c] as f64 / n;
            (observed[c] - expected).powi(2) / expected
        })
        .sum())
}
