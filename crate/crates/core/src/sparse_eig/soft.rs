use nalgebra::DVector;

/// Entrywise soft-thresholding `sign(x) * max(|x| - delta, 0)`.
pub fn soft_threshold(x: &DVector<f64>, delta: f64) -> DVector<f64> {
    debug_assert!(delta >= 0.0);
    x.map(|v| shrink(v, delta))
}

#[inline]
pub(crate) fn shrink(v: f64, delta: f64) -> f64 {
    if v > delta {
        v - delta
    } else if v < -delta {
        v + delta
    } else {
        0.0
    }
}

const BISECTION_STEPS: usize = 60;
const TIE_BAND: f64 = 1e-12;

/// Maximizer of `x^T v` over unit vectors with `||v||_1 <= sqrt_r`.
///
/// This is `S(x, delta) / ||S(x, delta)||_2` with the smallest `delta` that
/// meets the L1 cap, found by bisection on `[0, max |x_i|]`. The result
/// always satisfies `||v||_1 <= sqrt_r` (the bisection keeps the feasible
/// end). When the largest entries of `|x|` tie and no threshold can break
/// the tie, weight is spread over the tied coordinates in index order.
/// A zero `x` is treated as a full tie.
pub fn l1_constrained_direction(x: &DVector<f64>, sqrt_r: f64) -> DVector<f64> {
    let top = x.amax();
    if top == 0.0 {
        return tied_direction(x, &(0..x.len()).collect::<Vec<_>>(), sqrt_r);
    }
    let norm = x.norm();
    if x.lp_norm(1) / norm <= sqrt_r {
        return x / norm;
    }

    let tied: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() >= top * (1.0 - TIE_BAND)).collect();
    if (tied.len() as f64).sqrt() >= sqrt_r {
        return tied_direction(x, &tied, sqrt_r);
    }

    let ratio = |delta: f64| -> Option<f64> {
        let (mut l1, mut l2) = (0.0, 0.0);
        for &v in x.iter() {
            let s = shrink(v, delta).abs();
            l1 += s;
            l2 += s * s;
        }
        (l2 > 0.0).then(|| l1 / l2.sqrt())
    };

    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        match ratio(mid) {
            Some(r) if r > sqrt_r => lo = mid,
            _ => hi = mid,
        }
    }
    let s = soft_threshold(x, hi);
    let n = s.norm();
    if n > 0.0 {
        s / n
    } else {
        tied_direction(x, &tied, sqrt_r)
    }
}

/// Unit vector on `support` with signs of `x` and `||v||_1 = min(sqrt_r, sqrt(|support|))`,
/// front-loading weight onto the lowest indices: `k = floor(sqrt_r^2)` equal
/// entries plus one smaller remainder entry.
fn tied_direction(x: &DVector<f64>, support: &[usize], sqrt_r: f64) -> DVector<f64> {
    let mut v = DVector::zeros(x.len());
    let sign = |i: usize| if x[i] < 0.0 { -1.0 } else { 1.0 };
    let s2 = sqrt_r * sqrt_r;
    let k = ((s2 + 1e-12).floor() as usize).clamp(1, support.len());
    if k == support.len() || (s2 - k as f64).abs() <= 1e-12 {
        let w = 1.0 / (k as f64).sqrt();
        for &i in &support[..k] {
            v[i] = sign(i) * w;
        }
        return v;
    }
    // k entries of size a and one of size b with k a + b = sqrt_r, k a^2 + b^2 = 1.
    let kf = k as f64;
    let a = (sqrt_r * kf + (kf * (kf + 1.0 - s2)).max(0.0).sqrt()) / (kf * (kf + 1.0));
    let b = (sqrt_r - kf * a).max(0.0);
    for &i in &support[..k] {
        v[i] = sign(i) * a;
    }
    v[support[k]] = sign(support[k]) * b;
    v
}
