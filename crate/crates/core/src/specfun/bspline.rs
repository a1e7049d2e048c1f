//! Cardinal B-splines with integer knots.
//!
//! `M_r` has knots `0, 1, …, r` and unit integral; the B-spline `N_P` used
//! by the smooth cutoff has knots `-P, …, 0`, so `N_P(u) = M_P(u + P)`.

/// Which one-sided limit to take at a knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnotSide {
    /// Right-continuous convention (`M_1` is the indicator of `[0, 1)`).
    Right,
    /// Left-continuous convention (`M_1` is the indicator of `(0, 1]`).
    Left,
}

/// `M_r(x)` by the Cox–de Boor recursion
/// `M_r(x) = (x M_{r-1}(x) + (r - x) M_{r-1}(x - 1)) / (r - 1)`.
pub fn cardinal_m(r: usize, x: f64, side: KnotSide) -> f64 {
    assert!(r >= 1, "B-spline order must be at least 1");
    let inside = match side {
        KnotSide::Right => (0.0..r as f64).contains(&x),
        KnotSide::Left => x > 0.0 && x <= r as f64,
    };
    if !inside {
        return 0.0;
    }
    let j = match side {
        KnotSide::Right => x.floor(),
        KnotSide::Left => x.ceil() - 1.0,
    };
    let y = x - j;
    // b[i] = M_s(y + i) for i < s
    let mut b = vec![0.0; r];
    b[0] = 1.0;
    for s in 2..=r {
        let sf = s as f64;
        for i in (0..s).rev() {
            let yi = y + i as f64;
            let cur = if i < s - 1 { b[i] } else { 0.0 };
            let prev = if i > 0 { b[i - 1] } else { 0.0 };
            b[i] = (yi * cur + (sf - yi) * prev) / (sf - 1.0);
        }
    }
    b[j as usize]
}

/// `N_P(u)`, the order-`P` B-spline with knots `{-P, …, -1, 0}`.
pub fn cardinal_bspline(order: usize, u: f64) -> f64 {
    cardinal_m(order, u + order as f64, KnotSide::Right)
}

/// `∫_{-∞}^u N_P(s) ds`, through `∫_{-∞}^x M_P = Σ_{j≥0} M_{P+1}(x - j)`.
pub fn integrated_bspline(order: usize, u: f64) -> f64 {
    let x = u + order as f64;
    if x <= 0.0 {
        return 0.0;
    }
    if x >= order as f64 {
        return 1.0;
    }
    let mut acc = 0.0;
    let mut j = 0.0;
    while j < x {
        acc += cardinal_m(order + 1, x - j, KnotSide::Right);
        j += 1.0;
    }
    acc
}

/// `m`-th derivative of `M_r` for `m < r`, via
/// `M_r' (x) = M_{r-1}(x) - M_{r-1}(x - 1)` applied `m` times.
pub fn cardinal_m_derivative(r: usize, m: usize, x: f64, side: KnotSide) -> f64 {
    assert!(m < r, "derivative order must be below the spline order");
    let mut binom = 1.0;
    let mut acc = 0.0;
    for i in 0..=m {
        let term = binom * cardinal_m(r - m, x - i as f64, side);
        acc += if i % 2 == 0 { term } else { -term };
        binom = binom * (m - i) as f64 / (i + 1) as f64;
    }
    acc
}
