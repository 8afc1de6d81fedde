#![allow(dead_code)]

use catswap::protocol::modes::{A, C, EB, ED};
use catswap::states::{CoherentTerm, ComplexAmp, PureState, Registry};

pub fn c(re: f64, im: f64) -> ComplexAmp {
    ComplexAmp::new(re, im)
}

/// Equal-loss state on `[A, C, EB, ED]` after the vacuum outcome and a point
/// homodyne result at `x = +√T α`, written out term by term with the common
/// Gaussian prefactor dropped.
pub fn equal_loss_hand_expansion(alpha: f64, t: f64) -> PureState {
    let g = (1.0 - t).sqrt() * alpha;
    let ta = t * alpha * alpha;
    let (ga, gi) = (c(g, 0.), c(0., g));
    let e = |re: f64, im: f64| c(re, im).exp();
    let h = (-ta / 2.0).exp();
    let rows: [([u8; 2], ComplexAmp, ComplexAmp, ComplexAmp); 16] = [
        ([0, 0], e(ta, -ta), ga, ga),
        ([0, 0], e(-3.0 * ta, 3.0 * ta), -ga, -ga),
        ([0, 0], e(-ta, 0.), ga, -ga),
        ([0, 0], e(-ta, 0.), -ga, ga),
        ([0, 1], h * e(ta, 0.), ga, gi),
        ([0, 1], h * e(0., -2.0 * ta), ga, -gi),
        ([0, 1], h * e(0., 2.0 * ta), -ga, gi),
        ([0, 1], h * e(-3.0 * ta, 0.), -ga, -gi),
        ([1, 0], h * e(ta, 0.), gi, ga),
        ([1, 0], h * e(0., 2.0 * ta), gi, -ga),
        ([1, 0], h * e(0., -2.0 * ta), -gi, ga),
        ([1, 0], h * e(-3.0 * ta, 0.), -gi, -ga),
        ([1, 1], e(ta, ta), gi, gi),
        ([1, 1], e(-3.0 * ta, -3.0 * ta), -gi, -gi),
        ([1, 1], e(-ta, 0.), gi, -gi),
        ([1, 1], e(-ta, 0.), -gi, gi),
    ];
    let terms = rows
        .into_iter()
        .map(|(bits, coeff, eb, ed)| CoherentTerm::new(bits.to_vec(), vec![eb, ed], coeff))
        .collect();
    PureState::new(Registry::new(vec![A, C, EB, ED]).unwrap(), terms).unwrap()
}

/// `1/𝒩²` of the post-vacuum equal-loss state written as a sum of seven
/// exponentials in `x = |T⁺α|²`, with the cross terms' exponent `(2 ± i)x/4`.
pub fn norm_series(x: f64) -> f64 {
    let cross = c(-(2.0) * x / 4.0, -x / 4.0).exp();
    4.0 + 8.0 * (-x / 4.0).exp()
        + 24.0 * (-x / 2.0).exp()
        + 8.0 * (-3.0 * x / 4.0).exp()
        + 4.0 * (-x).exp()
        + 16.0 * cross.re
}

/// The same series with the cross-term exponent `(2 ± i)x` taken literally.
pub fn norm_series_unscaled_cross(x: f64) -> f64 {
    let cross = c(-2.0 * x, -x).exp();
    4.0 + 8.0 * (-x / 4.0).exp()
        + 24.0 * (-x / 2.0).exp()
        + 8.0 * (-3.0 * x / 4.0).exp()
        + 4.0 * (-x).exp()
        + 16.0 * cross.re
}

pub fn cat_normalization(alpha: f64) -> f64 {
    1.0 / (2.0 + 2.0 * (-2.0 * alpha * alpha).exp()).sqrt()
}
