//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use composite_severity::composite::{Composite, CompositeSpec, TailShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7, 15) quadrature on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return value;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth - 1) + recurse(f, m, b, 0.5 * tol, depth - 1)
    }
    recurse(f, a, b, tol, 40)
}

/// `∫₀^∞ pdf(y) dy` split at `y_mo`. Each side uses `y = y_mo·e^{±t}` with
/// `t = u/(1−u)`, so heavy tails become exponentially decaying in `t`.
pub fn total_mass(model: &Composite) -> f64 {
    let y_mo = model.threshold();
    let side = |sign: f64| {
        move |u: f64| {
            let t = u / (1.0 - u);
            let y = y_mo * (sign * t).exp();
            if y <= 0.0 || !y.is_finite() {
                return 0.0;
            }
            let jac = y / ((1.0 - u) * (1.0 - u));
            let v = model.pdf(y).unwrap_or(0.0) * jac;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        }
    };
    integrate(&side(-1.0), 0.0, 1.0, 1e-11) + integrate(&side(1.0), 0.0, 1.0, 1e-11)
}

/// Golden-section maximization of `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Burr,
    Stoppa,
    GlogM,
}

pub const FAMILIES: [Family; 3] = [Family::Burr, Family::Stoppa, Family::GlogM];

/// Random valid composite spec for `family`.
pub fn random_spec(family: Family, rng: &mut ChaCha8Rng) -> CompositeSpec {
    let sigma = rng.random_range(0.2..3.0);
    let beta = rng.random_range(-3.0f64..3.0).exp();
    let shape = match family {
        Family::Burr => TailShape::Burr {
            alpha: rng.random_range(1.05..6.0),
            delta: rng.random_range(0.2..5.0),
        },
        Family::Stoppa => TailShape::Stoppa {
            alpha: rng.random_range(1.05..6.0),
            delta: rng.random_range(0.3..5.0),
        },
        Family::GlogM => TailShape::GlogM {
            alpha: rng.random_range(0.05..3.0),
        },
    };
    CompositeSpec { sigma, shape, beta }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
