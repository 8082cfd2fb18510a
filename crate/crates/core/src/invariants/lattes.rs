//! The symmetric square of a Lattès map of the line: a point `[a:b:c]` is the
//! binary quadratic `a X^2 + b XY + c Y^2`, and the image is the quadratic
//! whose roots are the images of its roots.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::map::ProjMap;
use crate::poly::HomogPoly3;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients of `X^(d-k) Y^k` in `(R_X, R_Y) = ((X - 2Y)^d, X^d)`.
pub fn lattes_line_map(d: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let rx = (0..=d)
        .map(|k| Complex64::new(binomial(d, k) * (-2.0f64).powi(k as i32), 0.0))
        .collect();
    let mut ry = vec![Complex64::new(0.0, 0.0); d + 1];
    ry[0] = Complex64::new(1.0, 0.0);
    (rx, ry)
}

/// Determinant of a square matrix of forms by cofactor expansion along the
/// first row.
fn symbolic_det(m: &[Vec<HomogPoly3>]) -> HomogPoly3 {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let deg = m[0][0].degree() * n;
    let mut acc = HomogPoly3::zero(deg);
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<HomogPoly3>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = m[0][c].mul(&symbolic_det(&minor));
        acc = if c % 2 == 0 { acc.add(&term) } else { acc.sub(&term) }.expect("equal degrees");
    }
    acc
}

/// Degree-`d` map of the plane induced by `z -> (1 - 2/z)^d` on unordered
/// root pairs.
///
/// The image quadratic is `Res_{X,Y}(q, U R_Y - V R_X)` as a form in `U, V`,
/// expanded by Laplace along the two rows of the second factor.
pub fn gen_lattes_ueda(d: usize) -> Result<ProjMap> {
    if d < 2 {
        return Err(Error::DegreeTooSmall { min: 2, got: d });
    }
    let (rx, ry) = lattes_line_map(d);
    let n = d + 2;
    let var = |v: usize| HomogPoly3::variable(v);
    // q rows of the Sylvester matrix: entries a, b, c (the variables z, w, t)
    let q_entry = |r: usize, c: usize| -> HomogPoly3 {
        if c >= r && c - r <= 2 {
            var(c - r)
        } else {
            HomogPoly3::zero(1)
        }
    };
    // coefficient of X^(d-k) Y^k of U R_Y - V R_X as (U part, V part)
    let l_entry = |s: usize, c: usize| -> (Complex64, Complex64) {
        if c >= s && c - s <= d {
            (ry[c - s], -rx[c - s])
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        }
    };
    let mut uu = HomogPoly3::zero(d);
    let mut uv = HomogPoly3::zero(d);
    let mut vv = HomogPoly3::zero(d);
    for c1 in 0..n {
        for c2 in c1 + 1..n {
            let (p1, q1) = l_entry(0, c1);
            let (p2, q2) = l_entry(1, c2);
            let (p3, q3) = l_entry(0, c2);
            let (p4, q4) = l_entry(1, c1);
            // (p1 U + q1 V)(p2 U + q2 V) - (p3 U + q3 V)(p4 U + q4 V)
            let cu = p1 * p2 - p3 * p4;
            let cuv = p1 * q2 + q1 * p2 - p3 * q4 - q3 * p4;
            let cv = q1 * q2 - q3 * q4;
            if cu.norm() + cuv.norm() + cv.norm() == 0.0 {
                continue;
            }
            let cols: Vec<usize> = (0..n).filter(|&c| c != c1 && c != c2).collect();
            let minor: Vec<Vec<HomogPoly3>> =
                (0..d).map(|r| cols.iter().map(|&c| q_entry(r, c)).collect()).collect();
            let det = symbolic_det(&minor);
            // L rows sit at positions d and d + 1
            let sign = if (2 * d + 1 + c1 + c2) % 2 == 0 { 1.0 } else { -1.0 };
            let add = |acc: &mut HomogPoly3, k: Complex64| {
                *acc = acc.add(&det.scale(k * sign)).expect("equal degrees");
            };
            add(&mut uu, cu);
            add(&mut uv, cuv);
            add(&mut vv, cv);
        }
    }
    if [&uu, &uv, &vv].iter().any(|c| c.is_zero()) {
        return Err(Error::ConstructionDegenerate("a component vanished identically".into()));
    }
    ProjMap::validate([uu, uv, vv]).map_err(|e| Error::ConstructionDegenerate(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::ProjPoint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line_map(x: Complex64, d: usize) -> Complex64 {
        (Complex64::new(1.0, 0.0) - 2.0 / x).powi(d as i32)
    }

    #[test]
    fn root_pair_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 3] {
            let f = gen_lattes_ueda(d).unwrap();
            for _ in 0..100 {
                let x1 = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let x2 = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let one = Complex64::new(1.0, 0.0);
                let p = ProjPoint::new([one, -(x1 + x2), x1 * x2]).unwrap();
                let (r1, r2) = (line_map(x1, d), line_map(x2, d));
                let q = ProjPoint::new([one, -(r1 + r2), r1 * r2]).unwrap();
                assert!(f.apply(&p).distance(&q) < 1e-8);
            }
        }
    }

    #[test]
    fn degree_two_fibers() {
        let f = gen_lattes_ueda(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..3 {
            let q = ProjPoint::random(&mut rng);
            let fib = f.preimages(&q).unwrap();
            assert_eq!(fib.total_multiplicity, 4);
            assert!(fib.complete);
        }
    }
}
