//! Integer-order Bessel functions of the first kind.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;


const RESCALE_ABOVE: f64 = 1e200;

/// `J_0(x) .. J_{n_max}(x)` for `x ≥ 0` by Miller's downward recurrence,
/// normalized with `J_0 + 2 Σ_k J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, n_max: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel argument must be finite and >= 0");
    let mut out = vec![0.0; n_max + 1];
    if x < 1e-300 {
        out[0] = 1.0;
        return out;
    }
    let reach = (n_max as f64).max(x);
    let mut start = reach as usize + 30 + (40.0 * reach).sqrt() as usize;
    start += start % 2;

    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-300;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        let next = (k as f64) * two_over_x * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > RESCALE_ABOVE {
            for v in vals[k - 1..].iter_mut() {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    let mut norm = vals[0];
    let mut k = 2;
    while k <= start {
        norm += 2.0 * vals[k];
        k += 2;
    }
    for (o, v) in out.iter_mut().zip(&vals) {
        *o = v / norm;
    }
    out
}

/// Single value `J_n(x)` for any integer order and real argument.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let mut v = bessel_j_sequence(x.abs(), order)[order];
    // J_{-n} = (-1)^n J_n and J_n(-x) = (-1)^n J_n(x)
    if n < 0 && order % 2 == 1 {
        v = -v;
    }
    if x < 0.0 && order % 2 == 1 {
        v = -v;
    }
    v
}

/// Orders needed before `|J_k(x)|` drops below `eps` for good.
pub fn significant_orders(x: f64, eps: f64) -> usize {
    let guess = x.abs() as usize + 40 + (10.0 * x.abs().cbrt()) as usize;
    let seq = bessel_j_sequence(x.abs(), guess);
    let mut last = 0;
    for (k, v) in seq.iter().enumerate() {
        if v.abs() >= eps {
            last = k;
        }
    }
    last + 1
}
