use crate::error::{Error, Result};

/// Two-tailed studentized range quantiles at infinite degrees of freedom,
/// divided by sqrt(2), for k = 2..=20 methods.
const Q_05: [f64; 19] = [
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878, 3.101730, 3.163684, 3.218654,
    3.268004, 3.312739, 3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073, 3.543799,
];
const Q_10: [f64; 19] = [
    1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884, 2.854606, 2.919889, 2.977768,
    3.029694, 3.076733, 3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224, 3.319233,
];

pub const MAX_METHODS: usize = 20;

/// The tabled quantile `q_alpha` for `k` methods.
pub fn nemenyi_q(k: usize, alpha: f64) -> Result<f64> {
    if !(2..=MAX_METHODS).contains(&k) {
        return Err(Error::Unsupported(format!(
            "Nemenyi table covers 2..={MAX_METHODS} methods, got {k}"
        )));
    }
    let table = if (alpha - 0.05).abs() < 1e-9 {
        &Q_05
    } else if (alpha - 0.10).abs() < 1e-9 {
        &Q_10
    } else {
        return Err(Error::Unsupported(format!(
            "Nemenyi table covers alpha 0.05 and 0.10, got {alpha}"
        )));
    };
    Ok(table[k - 2])
}

/// Critical difference in average rank for `k` methods over `n_blocks`.
pub fn nemenyi_cd(k: usize, n_blocks: usize, alpha: f64) -> Result<f64> {
    if n_blocks == 0 {
        return Err(crate::error::contract("Nemenyi needs at least one block"));
    }
    let q = nemenyi_q(k, alpha)?;
    Ok(q * ((k * (k + 1)) as f64 / (6.0 * n_blocks as f64)).sqrt())
}
