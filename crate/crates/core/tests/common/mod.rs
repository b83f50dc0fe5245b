#![allow(dead_code)]

use ergokit::{BirthDeathModel, DiffusionModel};
use rand::Rng;

/// `(b0, b_n, a_n)` for ergodic chains with a finite δ.
pub const CHAINS: [(f64, &str, &str); 10] = [
    (1.0, "1", "2"),
    (1.0, "1", "3"),
    (2.0, "2", "3"),
    (1.0, "n^2", "n^2"),
    (1.0, "n^2.5", "n^2.5"),
    (1.0, "n^3", "n^3"),
    (1.0, "n + 1", "2 * n"),
    (1.0, "1", "n"),
    (1.0, "n + 1", "3 * n"),
    (1.0, "1 + 1 / n", "2"),
];

/// `(a, b)` for diffusions with a finite speed measure and a finite δ.
pub const DIFFUSIONS: [(&str, &str); 10] = [
    ("1", "-x"),
    ("1", "-2"),
    ("1", "-1"),
    ("1", "-x^3"),
    ("(1 + x)^4", "0"),
    ("1", "-x - 1"),
    ("2", "-x"),
    ("1 + x", "-2"),
    ("1", "-2 * x / (1 + x)"),
    ("(1 + x)^2", "-2 * x"),
];

pub fn chain(i: usize) -> BirthDeathModel {
    let (b0, b, a) = CHAINS[i];
    BirthDeathModel::from_strs(b0, b, a).unwrap()
}

pub fn diffusion(i: usize) -> DiffusionModel {
    let (a, b) = DIFFUSIONS[i];
    DiffusionModel::from_strs(a, b).unwrap()
}

/// `b_n = c (n+1)^p`, `a_n = d n^q` with exponents in `[0, 3]`.
pub fn random_chain(rng: &mut impl Rng) -> BirthDeathModel {
    let b0 = rng.gen_range(0.2..5.0);
    let birth = format!("{:.3} * (n + 1)^{:.3}", rng.gen_range(0.2..5.0), rng.gen_range(0.0..3.0));
    let death = format!("{:.3} * n^{:.3}", rng.gen_range(0.2..5.0), rng.gen_range(0.0..3.0));
    BirthDeathModel::from_strs(b0, &birth, &death).unwrap()
}

/// `a = c (1+x)^p`, `b = e - d x^q` with `p` in `[0, 4]`.
pub fn random_diffusion(rng: &mut impl Rng) -> DiffusionModel {
    let a = format!("{:.3} * (1 + x)^{:.3}", rng.gen_range(0.2..5.0), rng.gen_range(0.0..4.0));
    let b = format!(
        "{:.3} - {:.3} * x^{:.3}",
        rng.gen_range(-1.0..1.0),
        rng.gen_range(0.0..3.0),
        rng.gen_range(0.0..3.0)
    );
    DiffusionModel::from_strs(&a, &b).unwrap()
}
