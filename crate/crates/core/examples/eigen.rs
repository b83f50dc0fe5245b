//! Sturm-sequence bisection on symmetric tridiagonal matrices.

use ergokit::eigen::TridiagonalMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // discrete Laplacian: eigenvalues 2 - 2 cos(kπ/(n+1))
    let n = 8;
    let m = TridiagonalMatrix::new(vec![2.0; n], vec![-1.0; n - 1])?;
    let values = m.eigenvalues(1e-12);
    for (k, v) in values.iter().enumerate() {
        let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
        println!("lambda_{k} = {v:.12}  exact {exact:.12}");
    }
    println!("trace {} = sum {}", m.trace(), values.iter().sum::<f64>());
    println!("eigenvalues below 1: {}", m.sturm_count(1.0));
    Ok(())
}
