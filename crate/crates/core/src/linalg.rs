//! Small dense helpers for the low-dimensional vectors used throughout
//! (ambient dimension at most 4).

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn neg(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| -x).collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Great-circle angle between two unit vectors, stable near 0 and pi.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let c: f64 = a.iter().zip(b).map(|(x, y)| (x + y) * (x + y)).sum::<f64>().sqrt();
    2.0 * s.atan2(c)
}

/// Determinant of a row-major square matrix by Gaussian elimination with
/// partial pivoting.
pub fn det(m: &[f64], n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => {
            let mut a = m.to_vec();
            let mut d = 1.0;
            for col in 0..n {
                let pivot = (col..n)
                    .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
                    .unwrap_or(col);
                if a[pivot * n + col] == 0.0 {
                    return 0.0;
                }
                if pivot != col {
                    for k in 0..n {
                        a.swap(pivot * n + k, col * n + k);
                    }
                    d = -d;
                }
                let p = a[col * n + col];
                d *= p;
                for row in col + 1..n {
                    let factor = a[row * n + col] / p;
                    for k in col..n {
                        a[row * n + k] -= factor * a[col * n + k];
                    }
                }
            }
            d
        }
    }
}

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Orthonormal basis of the complement of the unit vector `v`, oriented so
/// that `det[v, e_1, ..., e_{n-1}] = +1`. Deterministic in `v`.
pub fn oriented_complement(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs()).then(i.cmp(&j)));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for &axis in &order {
        if basis.len() == n - 1 {
            break;
        }
        let mut w = vec![0.0; n];
        w[axis] = 1.0;
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            let p = dot(&w, v);
            for k in 0..n {
                w[k] -= p * v[k];
            }
            for b in &basis {
                let p = dot(&w, b);
                for k in 0..n {
                    w[k] -= p * b[k];
                }
            }
        }
        let len = norm(&w);
        if len > 1e-6 {
            basis.push(w.iter().map(|x| x / len).collect());
        }
    }
    let mut m = Vec::with_capacity(n * n);
    m.extend_from_slice(v);
    for b in &basis {
        m.extend_from_slice(b);
    }
    // rows v, e_1.. ; det of the transpose is the same
    if det(&m, n) < 0.0 {
        if let Some(last) = basis.last_mut() {
            last.iter_mut().for_each(|x| *x = -*x);
        }
    }
    basis
}

/// Proper rotation (row-major, `n x n`) whose last column is `axis`, so it
/// carries the standard north pole `e_n` to `axis`.
pub fn rotation_to_axis(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    let comp = oriented_complement(axis);
    // columns: e_1, ..., e_{n-1}, axis. det[c_1..c_{n-1}, axis] = (-1)^{n-1} det[axis, c..]
    let mut cols: Vec<Vec<f64>> = comp;
    if n % 2 == 0 {
        cols[0].iter_mut().for_each(|x| *x = -*x);
    }
    cols.push(axis.to_vec());
    let mut m = vec![0.0; n * n];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            m[i * n + j] = c[i];
        }
    }
    m
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

pub fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..m.len() / n)
        .map(|i| dot(&m[i * n..(i + 1) * n], v))
        .collect()
}

pub fn mat_t_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let rows = v.len();
    let cols = m.len() / rows;
    (0..cols)
        .map(|j| (0..rows).map(|i| m[i * cols + j] * v[i]).sum())
        .collect()
}

/// Damped Gauss-Newton step `(J^T J + lambda I) d = -J^T r` for a
/// row-major `rows x cols` matrix `J`.
pub fn damped_step(j: &[f64], rows: usize, cols: usize, r: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let jm = nalgebra::DMatrix::from_row_slice(rows, cols, j);
    let rv = nalgebra::DVector::from_column_slice(r);
    let mut normal = jm.transpose() * &jm;
    for k in 0..cols {
        normal[(k, k)] += lambda;
    }
    let rhs = -(jm.transpose() * rv);
    normal.lu().solve(&rhs).map(|d| d.as_slice().to_vec())
}

/// Singular values of a row-major `rows x cols` matrix, in decreasing order.
pub fn singular_values(j: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let jm = nalgebra::DMatrix::from_row_slice(rows, cols, j);
    let mut sv: Vec<f64> = jm.singular_values().as_slice().to_vec();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
