//! Euclidean projection onto the l1 ball.

use super::l1_norm;

/// `argmin_{||w||_1 <= tau} ||w - v||_2` by sort-based threshold selection.
///
/// When `||v||_1 <= tau` the input is returned unchanged (projection is the
/// identity inside the ball), which also makes the operation idempotent.
pub fn project_l1(v: &[f64], tau: f64) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    let mut scratch = Vec::new();
    project_l1_into(v, tau, &mut out, &mut scratch);
    out
}

/// Allocation-free form of [`project_l1`] for hot loops; `scratch` is a
/// reusable sort buffer.
pub(crate) fn project_l1_into(v: &[f64], tau: f64, out: &mut [f64], scratch: &mut Vec<f64>) {
    assert!(tau >= 0.0, "tau must be >= 0");
    assert_eq!(v.len(), out.len());
    if tau == 0.0 {
        out.fill(0.0);
        return;
    }
    // The slack keeps projection exactly idempotent: a projected point can
    // land an ulp outside the ball and must then pass through unchanged.
    if l1_norm(v) <= tau * (1.0 + 1e-12) {
        out.copy_from_slice(v);
        return;
    }
    // Find the soft threshold theta with sum_i max(|v_i| - theta, 0) = tau.
    scratch.clear();
    scratch.extend(v.iter().map(|x| x.abs()));
    scratch.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in scratch.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - tau) / (k + 1) as f64;
        if candidate >= u {
            // u and everything after it fall below the threshold; the
            // previous candidate is final.
            break;
        }
        theta = candidate;
    }
    for (o, &x) in out.iter_mut().zip(v) {
        *o = x.signum() * (x.abs() - theta).max(0.0);
    }
}
