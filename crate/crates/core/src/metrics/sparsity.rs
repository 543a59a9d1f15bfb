use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `1 - d^(1/q - 1/p)·‖w‖_p / ‖w‖_q`. Zero for a uniform vector and tends to
/// one as `w` concentrates on a single entry.
pub fn pq_index<T: Scalar>(w: &[T], p: f64, q: f64) -> Result<T> {
    if w.is_empty() {
        return Err(Error::Empty("pq-index of an empty vector"));
    }
    if !(p > 0.0 && p <= 1.0 && q > 1.0 && q.is_finite()) {
        return Err(Error::invalid(format!("pq-index needs 0 < p <= 1 < q, got p={p} q={q}")));
    }
    let lp = norm(w, p);
    let lq = norm(w, q);
    if lq <= 0.0 {
        return Err(Error::invalid("pq-index of a zero vector is undefined"));
    }
    let d = w.len() as f64;
    let value = 1.0 - d.powf(1.0 / q - 1.0 / p) * lp / lq;
    Ok(T::of(value.max(0.0)))
}

fn norm<T: Scalar>(w: &[T], p: f64) -> f64 {
    // scaled by the max entry to avoid overflow for large q
    let m = w.iter().fold(0.0f64, |m, v| m.max(v.lossy_f64().abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = w.iter().map(|v| (v.lossy_f64().abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}
