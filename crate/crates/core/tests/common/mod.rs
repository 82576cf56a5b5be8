//! Independent reference computations shared by integration tests.
#![allow(dead_code)]

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Interpolating cubic spline with prescribed end second derivatives, set up
/// as one dense system over all piece coefficients `p_i(u) = a + b·u + c·u² + d·u³`
/// and evaluated at `at` (holding end values outside the knot range).
pub fn spline_oracle(x: &[f64], y: &[f64], left: f64, right: f64, at: &[f64]) -> Vec<f64> {
    let pieces = x.len() - 1;
    let n = 4 * pieces;
    let mut a = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    let mut row = 0;
    for i in 0..pieces {
        let h = x[i + 1] - x[i];
        let o = 4 * i;
        // p_i(0) = y_i
        a[row][o] = 1.0;
        rhs[row] = y[i];
        row += 1;
        // p_i(h) = y_{i+1}
        a[row][o] = 1.0;
        a[row][o + 1] = h;
        a[row][o + 2] = h * h;
        a[row][o + 3] = h * h * h;
        rhs[row] = y[i + 1];
        row += 1;
        if i + 1 < pieces {
            // p_i'(h) = p_{i+1}'(0)
            a[row][o + 1] = 1.0;
            a[row][o + 2] = 2.0 * h;
            a[row][o + 3] = 3.0 * h * h;
            a[row][o + 5] = -1.0;
            row += 1;
            // p_i''(h) = p_{i+1}''(0)
            a[row][o + 2] = 2.0;
            a[row][o + 3] = 6.0 * h;
            a[row][o + 6] = -2.0;
            row += 1;
        }
    }
    a[row][2] = 2.0;
    rhs[row] = left;
    row += 1;
    let o = 4 * (pieces - 1);
    let h = x[pieces] - x[pieces - 1];
    a[row][o + 2] = 2.0;
    a[row][o + 3] = 6.0 * h;
    rhs[row] = right;
    row += 1;
    assert_eq!(row, n);
    let coef = solve_dense(a, rhs);
    at.iter()
        .map(|&t| {
            if t <= x[0] {
                return y[0];
            }
            if t >= x[pieces] {
                return y[pieces];
            }
            let i = (0..pieces).rev().find(|&i| x[i] <= t).unwrap();
            let u = t - x[i];
            let c = &coef[4 * i..4 * i + 4];
            c[0] + c[1] * u + c[2] * u * u + c[3] * u * u * u
        })
        .collect()
}

/// Per-class precision, recall and F computed directly from a confusion
/// matrix (rows = truth, columns = prediction).
pub fn metric_oracle(confusion: &[Vec<u64>]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let c = confusion.len();
    let mut p = vec![0.0; c];
    let mut r = vec![0.0; c];
    let mut f = vec![0.0; c];
    for k in 0..c {
        let tp = confusion[k][k] as f64;
        let predicted: u64 = (0..c).map(|i| confusion[i][k]).sum();
        let actual: u64 = confusion[k].iter().sum();
        p[k] = if predicted == 0 {
            0.0
        } else {
            tp / predicted as f64
        };
        r[k] = if actual == 0 { 0.0 } else { tp / actual as f64 };
        f[k] = if p[k] + r[k] == 0.0 {
            0.0
        } else {
            2.0 * p[k] * r[k] / (p[k] + r[k])
        };
    }
    (p, r, f)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Central finite differences for MLP gradients.
pub mod fd {
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;
    use sparse_har::nncore::{flatten_gradients, nll_loss, Activation, Matrix, Mlp};

    pub const STEP: f64 = 1e-5;

    pub fn random_net(rng: &mut ChaCha8Rng) -> (Mlp, Matrix, Vec<usize>) {
        let depth = rng.gen_range(1..=3);
        let mut dims = vec![rng.gen_range(1..=16)];
        for _ in 0..depth - 1 {
            dims.push(rng.gen_range(1..=16));
        }
        dims.push(rng.gen_range(2..=16));
        let net = Mlp::with_widths(&dims, Activation::Softmax, rng.gen()).unwrap();
        // random biases so ReLUs are not all symmetric around zero
        let mut p = net.flat_params();
        for v in &mut p {
            *v += rng.gen_range(-0.1..0.1);
        }
        let mut net = net;
        net.set_flat_params(&p).unwrap();
        let batch = rng.gen_range(1..=4);
        let x = Matrix::from_vec(
            batch,
            dims[0],
            (0..batch * dims[0]).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let classes = *dims.last().unwrap();
        let labels = (0..batch).map(|_| rng.gen_range(0..classes)).collect();
        (net, x, labels)
    }

    pub fn max_relative_error(net: &Mlp, x: &Matrix, labels: &[usize]) -> f64 {
        let (_, grads) = net.loss_and_gradients(x, labels).unwrap();
        let analytic = flatten_gradients(&grads);
        let base = net.flat_params();
        let mut probe = net.clone();
        let mut worst: f64 = 0.0;
        for i in 0..base.len() {
            let mut p = base.clone();
            p[i] = base[i] + STEP;
            probe.set_flat_params(&p).unwrap();
            let up = nll_loss(&probe.forward(x).unwrap(), labels).unwrap();
            p[i] = base[i] - STEP;
            probe.set_flat_params(&p).unwrap();
            let down = nll_loss(&probe.forward(x).unwrap(), labels).unwrap();
            let numeric = (up - down) / (2.0 * STEP);
            let a = analytic[i];
            let denom = a.abs().max(numeric.abs());
            if denom > 0.0 {
                worst = worst.max((a - numeric).abs() / denom);
            }
        }
        worst
    }
}
