//! Totally invariant lines and points, exceptional sets, critical transition
//! matrices, configuration classes, normal-form checks and test-map generators.

pub mod binary;
pub mod classify;
pub mod conjugacy;
pub mod exceptional;
pub mod lattes;
pub mod lines;
pub mod points;
pub mod table1;
pub mod transition;

pub use classify::{classify, Classification, Table1Row};
pub use conjugacy::{conjugacy_check, contraction_growth, ConjugacyReport, ContractionGrowth, NormalForm};
pub use exceptional::{exceptional_sets, E2Kind, ExceptionalPoint, ExceptionalSets};
pub use lattes::gen_lattes_ueda;
pub use lines::{invariant_lines, invariant_lines_with, InvariantLine, LineSearch};
pub use points::{invariant_orbits, invariant_orbits_with, invariant_points, InvariantOrbit, PointSearch};
pub use table1::gen_table1;
pub use transition::{transition_matrix, TransitionMatrix};

use num_complex::Complex64;

/// `|h(x)| <= tol * |h| * |x|^deg`, with `|h|` the largest coefficient.
pub(crate) fn vanishes_at(h: &crate::poly::HomogPoly3, x: &[Complex64; 3], tol: f64) -> bool {
    let nx = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    h.evaluate(x).norm() <= tol * h.coeff_norm() * nx.powi(h.degree() as i32)
}

/// `sum conj(a_i) b_i`.
pub(crate) fn hermitian(a: &[Complex64; 3], b: &[Complex64; 3]) -> Complex64 {
    (0..3).map(|i| a[i].conj() * b[i]).sum()
}

fn normalize(v: [Complex64; 3]) -> [Complex64; 3] {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.map(|c| c / n)
}

/// Orthonormal basis of the plane `{x : sum l_i x_i = 0}` in C^3.
pub(crate) fn line_basis(l: &[Complex64; 3]) -> [[Complex64; 3]; 2] {
    let n = normalize(l.map(|c| c.conj()));
    let mut k = 0;
    for i in 1..3 {
        if n[i].norm() < n[k].norm() {
            k = i;
        }
    }
    let mut p = [Complex64::new(0.0, 0.0); 3];
    p[k] = Complex64::new(1.0, 0.0);
    let proj = n[k].conj();
    let p = normalize(std::array::from_fn(|i| p[i] - n[i] * proj));
    let cross = [
        n[1] * p[2] - n[2] * p[1],
        n[2] * p[0] - n[0] * p[2],
        n[0] * p[1] - n[1] * p[0],
    ];
    [p, normalize(cross.map(|c| c.conj()))]
}

/// Gaussian elimination with partial pivoting; `None` for a singular matrix.
pub(crate) fn solve_small(mut m: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].norm().total_cmp(&m[j][c].norm()))?;
        if m[piv][c].norm() < 1e-300 {
            return None;
        }
        m.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                let t = m[c][k] * f;
                m[r][k] -= t;
            }
            let t = b[c] * f;
            b[r] -= t;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: Complex64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    x.iter().all(|c| c.re.is_finite() && c.im.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_spans_the_plane() {
        let l = [Complex64::new(0.3, 0.1), Complex64::new(-1.0, 0.2), Complex64::new(0.0, 0.7)];
        let [p, q] = line_basis(&l);
        for v in [p, q] {
            let s: Complex64 = (0..3).map(|i| l[i] * v[i]).sum();
            assert!(s.norm() < 1e-14);
            assert!((hermitian(&v, &v).re - 1.0).abs() < 1e-14);
        }
        assert!(hermitian(&p, &q).norm() < 1e-14);
    }

    #[test]
    fn small_solve() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let m = vec![vec![c(0.0), c(2.0)], vec![c(1.0), c(1.0)]];
        let x = solve_small(m, vec![c(4.0), c(3.0)]).unwrap();
        assert!((x[0] - c(1.0)).norm() < 1e-15 && (x[1] - c(2.0)).norm() < 1e-15);
    }
}
