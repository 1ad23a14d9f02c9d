use crate::error::{Error, Result};

/// `points` equally spaced abscissae `i/(points-1)` covering [0,1], both
/// endpoints exact.
pub fn uniform_grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::GridTooSmall(points));
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| i as f64 / last).collect())
}
