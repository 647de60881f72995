//! Fixed-node quadrature rules used throughout the crate.

/// Nodes and weights of the composite midpoint rule on `[lo, hi]`.
pub fn midpoint(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = (hi - lo) / n as f64;
    (0..n).map(move |i| (lo + (i as f64 + 0.5) * h, h))
}

/// Nodes and weights of the composite trapezoidal rule on `[lo, hi]` with `n >= 2` nodes.
pub fn trapezoid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = (f64, f64)> {
    assert!(n >= 2, "trapezoidal rule needs at least two nodes");
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| {
        let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
        (lo + i as f64 * h, w)
    })
}

/// Periodic trapezoidal rule on `[0, 2π)`: `n` equally spaced nodes with equal weights.
pub fn periodic(n: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(move |i| (i as f64 * h, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_exact_for_linear() {
        let s: f64 = midpoint(1.0, 3.0, 7).map(|(x, w)| w * (2.0 * x + 1.0)).sum();
        assert!((s - 10.0).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_exact_for_linear() {
        let s: f64 = trapezoid(0.0, 2.0, 5).map(|(x, w)| w * (3.0 * x - 1.0)).sum();
        assert!((s - 4.0).abs() < 1e-13);
    }

    #[test]
    fn periodic_integrates_trig_polynomial() {
        let s: f64 = periodic(16).map(|(p, w)| w * (p.cos().powi(2) + p.sin())).sum();
        assert!((s - std::f64::consts::PI).abs() < 1e-13);
    }
}
