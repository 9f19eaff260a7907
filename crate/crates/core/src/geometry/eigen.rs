//! Closed-form eigenvalues of a symmetric 3×3 matrix.

use std::f64::consts::PI;

pub type Sym3 = [[f64; 3]; 3];

/// Eigenvalues in descending order, via the trigonometric solution of the
/// characteristic cubic.
pub fn symmetric_eigenvalues(a: &Sym3) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| y.total_cmp(x));
        return d;
    }

    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();

    let mut b = *a;
    for (i, row) in b.iter_mut().enumerate() {
        row[i] -= q;
        for v in row.iter_mut() {
            *v /= p;
        }
    }
    let r = (det3(&b) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;

    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    let mut e = [e1, e2, e3];
    e.sort_by(|x, y| y.total_cmp(x));
    e
}

pub fn det3(m: &Sym3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Population covariance of `points` about their centroid.
#[allow(clippy::needless_range_loop)]
pub fn covariance(points: impl Iterator<Item = [f64; 3]> + Clone) -> Sym3 {
    let mut n = 0usize;
    let mut mean = [0.0; 3];
    for p in points.clone() {
        n += 1;
        for a in 0..3 {
            mean[a] += p[a];
        }
    }
    let mut c = [[0.0; 3]; 3];
    if n == 0 {
        return c;
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    for p in points {
        let d = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
        for i in 0..3 {
            for j in i..3 {
                c[i][j] += d[i] * d[j];
            }
        }
    }
    for i in 0..3 {
        for j in i..3 {
            c[i][j] /= n as f64;
            c[j][i] = c[i][j];
        }
    }
    c
}

/// Surface variation `λ3 / (λ1 + λ2 + λ3)`, 0 when all eigenvalues vanish.
/// Clamped to `[0, 1/3]` to absorb rounding.
pub fn surface_variation(cov: &Sym3) -> f64 {
    let [l1, l2, l3] = symmetric_eigenvalues(cov).map(|l| l.max(0.0));
    let sum = l1 + l2 + l3;
    if sum <= 0.0 {
        return 0.0;
    }
    (l3 / sum).clamp(0.0, 1.0 / 3.0)
}
