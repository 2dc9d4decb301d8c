//! Minimum-norm point of the convex hull of finitely many vectors
//! (Wolfe's algorithm).

use crate::space::{Matrix, Vector};

/// Returns the point of `conv(points)` closest to the origin together with
/// its convex weights.
pub(crate) fn min_norm_point(points: &[Vector]) -> (Vector, Vec<f64>) {
    assert!(!points.is_empty(), "need at least one point");
    let m = points.len();
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;

    let start = (0..m)
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .expect("nonempty");
    let mut support = vec![start];
    let mut weights = vec![1.0];
    let mut x = points[start].clone();

    for _ in 0..(50 * m + 50) {
        let j = (0..m)
            .min_by(|&a, &b| x.dot(&points[a]).total_cmp(&x.dot(&points[b])))
            .expect("nonempty");
        if x.dot(&points[j]) >= x.norm_squared() - tol || support.contains(&j) {
            break;
        }
        support.push(j);
        weights.push(0.0);
        loop {
            let v = affine_min_norm(points, &support);
            if v.iter().all(|w| *w > 1e-14) {
                weights = v;
                break;
            }
            let mut theta = 1.0f64;
            for (w, vi) in weights.iter().zip(&v) {
                if *vi <= 1e-14 && w - vi > 0.0 {
                    theta = theta.min(w / (w - vi));
                }
            }
            for (w, vi) in weights.iter_mut().zip(&v) {
                *w = theta * vi + (1.0 - theta) * *w;
            }
            let mut k = 0;
            while k < support.len() {
                if weights[k] <= 1e-14 {
                    support.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            if support.len() <= 1 {
                break;
            }
        }
        x = combine(points, &support, &weights);
    }

    let mut full = vec![0.0; m];
    for (i, w) in support.iter().zip(&weights) {
        full[*i] += w;
    }
    (x, full)
}

fn combine(points: &[Vector], support: &[usize], weights: &[f64]) -> Vector {
    let mut x = Vector::zeros(points[0].len());
    for (i, w) in support.iter().zip(weights) {
        x += &points[*i] * *w;
    }
    x
}

/// Weights of the min-norm point of the affine hull of the support points.
fn affine_min_norm(points: &[Vector], support: &[usize]) -> Vec<f64> {
    let k = support.len();
    let mut gram = Matrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            gram[(a, b)] = points[support[a]].dot(&points[support[b]]);
        }
    }
    let ridge = 1e-14 * (gram.trace() / k as f64).max(f64::MIN_POSITIVE);
    for a in 0..k {
        gram[(a, a)] += ridge;
    }
    let ones = Vector::from_element(k, 1.0);
    let u = gram.lu().solve(&ones).unwrap_or_else(|| ones.clone());
    let total: f64 = u.sum();
    if total.abs() < f64::MIN_POSITIVE || !total.is_finite() {
        return vec![1.0 / k as f64; k];
    }
    u.iter().map(|v| v / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(a: f64, b: f64) -> Vector {
        Vector::from_vec(vec![a, b])
    }

    #[test]
    fn segment_crossing_origin() {
        let (x, w) = min_norm_point(&[v(-1.0, 1.0), v(1.0, 1.0)]);
        assert!((x - v(0.0, 1.0)).norm() < 1e-12);
        assert!((w[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn origin_inside_triangle() {
        let (x, _) = min_norm_point(&[v(1.0, 0.0), v(-1.0, 1.0), v(-1.0, -1.0)]);
        assert!(x.norm() < 1e-12);
    }

    #[test]
    fn nearest_vertex() {
        let (x, _) = min_norm_point(&[v(3.0, 4.0), v(1.0, 1.0), v(2.0, 5.0)]);
        assert!((x - v(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn matches_brute_force_on_random_sets() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let pts: Vec<Vector> = (0..4).map(|_| v(rng.gen_range(-1.0..1.0) + 0.3, rng.gen_range(-1.0..1.0))).collect();
            let (x, w) = min_norm_point(&pts);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            // brute force over a weight grid
            let mut best = f64::INFINITY;
            let n = 40;
            for a in 0..=n {
                for b in 0..=(n - a) {
                    for c in 0..=(n - a - b) {
                        let d = n - a - b - c;
                        let y = (&pts[0] * a as f64 + &pts[1] * b as f64 + &pts[2] * c as f64 + &pts[3] * d as f64) / n as f64;
                        best = best.min(y.norm());
                    }
                }
            }
            assert!(x.norm() <= best + 1e-9);
        }
    }
}
