//! Closed-form and numeric optima for the linear network, plus the log-log
//! scaling fit used to check quadratic backlog growth.

use thiserror::Error;

use crate::traffic::UtilityKind;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("root-find did not converge (residual {0})")]
    NoConvergence(f64),
    #[error("need at least {0} points")]
    TooFewPoints(usize),
    #[error("N values must span at least a factor of {0}")]
    InsufficientSpan(f64),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// Optimal operating point of the linear network: one long flow over all N
/// links plus one single-hop flow per link, each link of capacity c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearNetOptimum {
    /// Rate of the long flow.
    pub x0: f64,
    /// Rate of each short flow.
    pub xi: f64,
    /// Per-hop dual differential (queue length per unit M).
    pub q_diff: f64,
    /// Sum of the long flow's dual queue lengths over all hops.
    pub total_backlog: f64,
}

/// Closed-form optimum under logarithmic (proportionally fair) utility:
/// x0 = c/(N+1), xi = Nc/(N+1), per-hop differential (N+1)/(Nc),
/// total (N+1)^2 / (2c).
pub fn linear_optimum_log(n: usize, c: f64) -> LinearNetOptimum {
    assert!(n >= 1 && c > 0.0);
    let nf = n as f64;
    let q_diff = (nf + 1.0) / (nf * c);
    LinearNetOptimum {
        x0: c / (nf + 1.0),
        xi: nf * c / (nf + 1.0),
        q_diff,
        total_backlog: (nf + 1.0).powi(2) / (2.0 * c),
    }
}

/// Numeric optimum under alpha-fair utility, solved from the KKT system by
/// bisection on the long-flow rate: equal multipliers across hops by
/// symmetry, U'(xi) = q with xi = c - x0 on every link, and the telescoped
/// source condition U'(x0) = N q.
pub fn linear_optimum_alpha(n: usize, c: f64, alpha: f64) -> Result<LinearNetOptimum, OracleError> {
    if n < 1 || c <= 0.0 {
        return Err(OracleError::BadParameter("need n >= 1 and c > 0".into()));
    }
    if alpha <= 0.0 {
        return Err(OracleError::BadParameter("alpha must be > 0".into()));
    }
    let u = UtilityKind::AlphaFair { alpha };
    let nf = n as f64;
    // g(x0) = U'(x0) - N * U'(c - x0) is strictly decreasing on (0, c).
    let g = |x0: f64| u.marginal(x0) - nf * u.marginal(c - x0);
    let mut lo = c * 1e-12;
    let mut hi = c * (1.0 - 1e-12);
    if g(lo) <= 0.0 || g(hi) >= 0.0 {
        return Err(OracleError::NoConvergence(g(lo).min(-g(hi))));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x0 = 0.5 * (lo + hi);
    let residual = g(x0);
    if residual.abs() > 1e-6 * u.marginal(x0).abs() {
        return Err(OracleError::NoConvergence(residual));
    }
    let xi = c - x0;
    let q_diff = u.marginal(xi);
    Ok(LinearNetOptimum {
        x0,
        xi,
        q_diff,
        total_backlog: q_diff * nf * (nf + 1.0) / 2.0,
    })
}

/// Least-squares exponent fit on log-log scale with a 95% confidence
/// interval: fits total_backlog ~ A * N^p.
pub fn backlog_scaling_fit(points: &[(f64, f64)]) -> Result<(f64, f64), OracleError> {
    if points.len() < 3 {
        return Err(OracleError::TooFewPoints(3));
    }
    let ns: Vec<f64> = points.iter().map(|&(n, _)| n).collect();
    let max = ns.iter().cloned().fold(f64::MIN, f64::max);
    let min = ns.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 || max / min < 4.0 {
        return Err(OracleError::InsufficientSpan(4.0));
    }
    if points.iter().any(|&(_, b)| b <= 0.0) {
        return Err(OracleError::BadParameter("backlogs must be positive".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, b)| (n.ln(), b.ln())).collect();
    let (slope, ci) = crate::harness::least_squares_ci(&logs);
    Ok((slope, ci))
}
