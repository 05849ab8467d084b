use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense σ_α on every site of an n-spin register, `ops[site][α]`.
pub fn pauli_ops(n: usize) -> Vec<[DMatrix<Complex64>; 3]> {
    let dim = 1usize << n;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    (0..n)
        .map(|site| {
            let bit = 1usize << site;
            let mut x = DMatrix::zeros(dim, dim);
            let mut y = DMatrix::zeros(dim, dim);
            let mut z = DMatrix::zeros(dim, dim);
            for k in 0..dim {
                let up = k & bit != 0;
                x[(k ^ bit, k)] = c(1.0, 0.0);
                // σ_y|s> = i|g>, σ_y|g> = -i|s>
                y[(k ^ bit, k)] = if up { c(0.0, 1.0) } else { c(0.0, -1.0) };
                z[(k, k)] = c(if up { 1.0 } else { -1.0 }, 0.0);
            }
            [x, y, z]
        })
        .collect()
}
