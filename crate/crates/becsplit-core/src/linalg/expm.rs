//! Dense matrix exponential by Padé approximation with scaling and squaring,
//! plus the Fréchet derivative through the block-augmented exponential.

use super::mat::Mat;
use crate::math;

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
    (13, 5.371920351148152),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// exp(A) for a square matrix.
pub fn expm(a: &Mat) -> Mat {
    assert_eq!(a.rows(), a.cols(), "expm requires a square matrix");
    let norm = a.norm_one();

    for &(m, theta) in &THETA[..4] {
        if norm <= theta {
            let (u, v) = pade_low(a, m);
            return pade_solve(&u, &v);
        }
    }

    // Order 13 with scaling.
    let theta13 = THETA[4].1;
    let s = if norm > theta13 {
        math::ceil(math::log2(norm / theta13)).max(0.0) as u32
    } else {
        0
    };
    let scaled = a.scale(math::powi(0.5, s as i32));
    let (u, v) = pade_13(&scaled);
    let mut x = pade_solve(&u, &v);
    for _ in 0..s {
        x = x.mul(&x);
    }
    x
}

/// Fréchet derivative of the exponential: L with
/// exp([[A, E], [0, A]]) = [[exp(A), L], [0, exp(A)]].
///
/// Returns (exp(A), L).
pub fn expm_frechet(a: &Mat, e: &Mat) -> (Mat, Mat) {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!((e.rows(), e.cols()), (n, n));
    let mut aug = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)];
            aug[(n + i, n + j)] = a[(i, j)];
            aug[(i, n + j)] = e[(i, j)];
        }
    }
    let big = expm(&aug);
    let mut ex = Mat::zeros(n, n);
    let mut frechet = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            ex[(i, j)] = big[(i, j)];
            frechet[(i, j)] = big[(i, n + j)];
        }
    }
    (ex, frechet)
}

fn pade_low(a: &Mat, m: usize) -> (Mat, Mat) {
    let n = a.rows();
    let b: &[f64] = match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        9 => &B9,
        _ => unreachable!(),
    };
    let a2 = a.mul(a);
    // Even/odd polynomial sums in powers of A².
    let mut even = Mat::identity(n).scale(b[0]);
    let mut odd = Mat::identity(n).scale(b[1]);
    let mut pow = Mat::identity(n);
    for k in 1..=(m / 2) {
        pow = pow.mul(&a2);
        even.add_scaled(&pow, b[2 * k]);
        if 2 * k + 1 <= m {
            odd.add_scaled(&pow, b[2 * k + 1]);
        }
    }
    (a.mul(&odd), even)
}

fn pade_13(a: &Mat) -> (Mat, Mat) {
    let n = a.rows();
    let b = &B13;
    let a2 = a.mul(a);
    let a4 = a2.mul(&a2);
    let a6 = a4.mul(&a2);

    let mut inner_u = a6.scale(b[13]);
    inner_u.add_scaled(&a4, b[11]);
    inner_u.add_scaled(&a2, b[9]);
    let mut u_poly = a6.mul(&inner_u);
    u_poly.add_scaled(&a6, b[7]);
    u_poly.add_scaled(&a4, b[5]);
    u_poly.add_scaled(&a2, b[3]);
    u_poly.add_scaled(&Mat::identity(n), b[1]);
    let u = a.mul(&u_poly);

    let mut inner_v = a6.scale(b[12]);
    inner_v.add_scaled(&a4, b[10]);
    inner_v.add_scaled(&a2, b[8]);
    let mut v = a6.mul(&inner_v);
    v.add_scaled(&a6, b[6]);
    v.add_scaled(&a4, b[4]);
    v.add_scaled(&a2, b[2]);
    v.add_scaled(&Mat::identity(n), b[0]);
    (u, v)
}

/// Solve (V - U)·X = (V + U).
fn pade_solve(u: &Mat, v: &Mat) -> Mat {
    let mut lhs = v.clone();
    lhs.add_scaled(u, -1.0);
    let mut rhs = v.clone();
    rhs.add_scaled(u, 1.0);
    lhs.lu().solve_mat(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn exp_of_zero_is_identity() {
        let x = expm(&Mat::zeros(4, 4));
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((x[(i, j)] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exp_of_diagonal() {
        let a = Mat::diag(&[0.3, -1.2, 4.0]);
        let x = expm(&a);
        for (i, &d) in [0.3, -1.2, 4.0].iter().enumerate() {
            assert!((x[(i, i)] - crate::math::exp(d)).abs() < 1e-12 * crate::math::exp(d));
        }
    }

    #[test]
    fn exp_rotation_block() {
        // exp(t·J) = [[cos t, -sin t], [sin t, cos t]]
        let t = 0.7;
        let a = Mat::from_rows(&[&[0.0, -t], &[t, 0.0]]);
        let x = expm(&a);
        assert!((x[(0, 0)] - t.cos()).abs() < 1e-14);
        assert!((x[(0, 1)] + t.sin()).abs() < 1e-14);
        assert!((x[(1, 0)] - t.sin()).abs() < 1e-14);
        assert!((x[(1, 1)] - t.cos()).abs() < 1e-14);
    }

    #[test]
    fn exp_large_norm_uses_squaring() {
        // Nilpotent with large entries: exp is exact polynomial.
        let a = Mat::from_rows(&[&[0.0, 40.0, 7.0], &[0.0, 0.0, 25.0], &[0.0, 0.0, 0.0]]);
        let x = expm(&a);
        // exp(A) = I + A + A²/2
        let mut expect = Mat::identity(3);
        expect.add_scaled(&a, 1.0);
        expect.add_scaled(&a.mul(&a), 0.5);
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (x[(i, j)] - expect[(i, j)]).abs() < 1e-9 * (1.0 + expect[(i, j)].abs()),
                    "mismatch at ({i},{j}): {} vs {}",
                    x[(i, j)],
                    expect[(i, j)]
                );
            }
        }
    }

    #[test]
    fn frechet_matches_finite_difference() {
        let a = Mat::from_rows(&[&[0.1, 0.8, -0.3], &[0.8, -0.2, 0.5], &[-0.3, 0.5, 0.9]]);
        let e = Mat::from_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 2.0], &[0.0, 2.0, 0.0]]);
        let (ex, l) = expm_frechet(&a, &e);
        let x0 = expm(&a);
        for i in 0..3 {
            for j in 0..3 {
                assert!((ex[(i, j)] - x0[(i, j)]).abs() < 1e-13);
            }
        }
        let h = 1e-6;
        let mut ap = a.clone();
        ap.add_scaled(&e, h);
        let mut am = a.clone();
        am.add_scaled(&e, -h);
        let fd: Vec<f64> = {
            let xp = expm(&ap);
            let xm = expm(&am);
            (0..9)
                .map(|k| (xp[(k / 3, k % 3)] - xm[(k / 3, k % 3)]) / (2.0 * h))
                .collect()
        };
        for k in 0..9 {
            assert!((l[(k / 3, k % 3)] - fd[k]).abs() < 1e-8);
        }
    }
}
