//! One-dimensional search helpers shared by the bound evaluators.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximum of `f` on `[a, b]`, assumed unimodal.
/// Returns the best abscissa seen and its value.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximize over the given increasing nodes, then refine around the best
/// one by golden section. NaN values are treated as -inf.
pub(crate) fn nodes_golden_max<F: FnMut(f64) -> f64>(mut f: F, nodes: &[f64], tol: f64) -> (f64, f64) {
    let clean = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
    let mut best = (nodes[0], f64::NEG_INFINITY);
    let mut best_i = 0;
    for (i, &x) in nodes.iter().enumerate() {
        let v = clean(f(x));
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    if !best.1.is_finite() {
        return best;
    }
    let a = nodes[best_i.saturating_sub(1)];
    let b = nodes[(best_i + 1).min(nodes.len() - 1)];
    let (x, v) = golden_max(|x| clean(f(x)), a, b, tol);
    if v > best.1 {
        (x, v)
    } else {
        best
    }
}

/// Bisection for the boundary of a predicate that holds on `[lo, x*)` and fails
/// on `(x*, hi]`. `geometric` bisects in log space (requires `lo > 0`).
pub(crate) fn bisect_boundary<F: FnMut(f64) -> bool>(
    mut holds: F,
    mut lo: f64,
    mut hi: f64,
    iterations: usize,
    geometric: bool,
) -> f64 {
    for _ in 0..iterations {
        let mid = if geometric { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if geometric {
        (lo * hi).sqrt()
    } else {
        0.5 * (lo + hi)
    }
}
