use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, HermitianOperator, StateVector, C64};

/// One sample of the reference flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowPoint {
    pub t: f64,
    pub overlap_error: f64,
}

/// Integrates `dψ/dt = −[M, |ψ⟩⟨ψ|]ψ` by explicit Euler with renormalization,
/// recording the overlap error against the ground state of `M` after every
/// step (and at `t = 0`).
pub fn rgf_integrate(
    m: &HermitianOperator,
    psi0: &StateVector,
    dt: f64,
    t_max: f64,
) -> Result<Vec<FlowPoint>> {
    if !(dt > 0.0) || !dt.is_finite() || !(t_max >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need dt > 0 and t_max ≥ 0, got dt = {dt}, t_max = {t_max}"
        )));
    }
    if psi0.dim() != m.dim() {
        return Err(Error::Dimension(
            "state and objective dimensions differ".into(),
        ));
    }
    let ground = m.try_spectrum()?.eigenvector(0);
    let err = |v: &[C64]| (1.0 - inner(&ground, v).norm_sqr()).max(0.0);
    let steps = (t_max / dt).round() as usize;
    let mut psi = psi0.amplitudes().to_vec();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(FlowPoint {
        t: 0.0,
        overlap_error: err(&psi),
    });
    let mut mpsi = vec![C64::new(0.0, 0.0); psi.len()];
    for s in 1..=steps {
        m.matrix().matvec_into(&psi, &mut mpsi);
        let e = inner(&psi, &mpsi).re;
        for (x, mx) in psi.iter_mut().zip(&mpsi) {
            *x -= (mx - *x * e) * dt;
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NonFinite(format!("flow state at step {s}")));
        }
        for x in psi.iter_mut() {
            *x /= norm;
        }
        out.push(FlowPoint {
            t: s as f64 * dt,
            overlap_error: err(&psi),
        });
    }
    Ok(out)
}

/// Least-squares fit of `log y = a − r t` over points with `y > floor`;
/// returns `(r, a)`. `None` when fewer than two points qualify.
pub fn fit_exponential_rate(ts: &[f64], ys: &[f64], floor: f64) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > floor && y.is_finite())
        .map(|(t, y)| (*t, y.ln()))
        .collect();
    let (slope, intercept) = linear_fit(&pts)?;
    Some((-slope, intercept))
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
