//! Adaptive Simpson quadrature on finite and semi-infinite intervals.

use ergokit::diffusion::integrate;

type Case = (&'static str, fn(f64) -> f64, f64, f64);

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases: [Case; 4] = [
        ("exp(-x^2/2) on [0, inf)", |x| (-x * x / 2.0).exp(), 0.0, f64::INFINITY),
        ("1/(1+x)^2 on [0, inf)", |x| (1.0 + x).powi(-2), 0.0, f64::INFINITY),
        ("sin on [0, pi]", f64::sin, 0.0, std::f64::consts::PI),
        ("sqrt on [0, 1]", f64::sqrt, 0.0, 1.0),
    ];
    for (name, f, lo, hi) in cases {
        let r = integrate(f, lo, hi, 1e-10)?;
        println!(
            "{name:<26} {:.12} (est. error {:.1e}, {} evaluations)",
            r.value, r.error_estimate, r.evaluations
        );
    }
    Ok(())
}
