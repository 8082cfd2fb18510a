use num_complex::Complex64;
use serde::Serialize;

use super::ext::{self, Ext};
use crate::error::{Error, Result};
use crate::map::{ProjMap, ProjPoint};
use crate::poly::HomogPoly3;

/// Factor applied to the sampled bound on `|log |F||`.
pub const SAFETY: f64 = 1.5;

/// Green function value with its truncation certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenEval {
    pub value: f64,
    pub n_used: usize,
    /// `m * d^-n / (d - 1)`.
    pub tail_bound: f64,
    pub m: f64,
}

/// Green function relative to the Fubini-Study form, truncated once the
/// geometric tail is below `tol`. A non-positive `tol` is treated as the
/// smallest positive double.
pub fn green(f: &ProjMap, x: &ProjPoint, tol: f64) -> GreenEval {
    let tol = if tol > 0.0 { tol } else { f64::MIN_POSITIVE };
    let d = f.degree() as f64;
    let m = SAFETY * f.log_norm_bound();
    let tail = |n: usize| m * d.powi(-(n as i32)) / (d - 1.0);
    let mut n = 0;
    while tail(n) > tol {
        n += 1;
    }
    let orbit = f.iterate_lognorm(x, n);
    GreenEval {
        value: orbit.lognorms[n] * d.powi(-(n as i32)),
        n_used: n,
        tail_bound: tail(n),
        m,
    }
}

/// Green function of the lift, `G(x) + log |x|`; `-inf` at the origin.
pub fn green_lift(f: &ProjMap, x: &[Complex64; 3], tol: f64) -> f64 {
    match ProjPoint::new(*x) {
        Ok(p) => {
            let n = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            green(f, &p, tol).value + n.ln()
        }
        Err(_) => f64::NEG_INFINITY,
    }
}

/// `v_0, ..., v_n` at `x`: the potentials of `(k d^j)^-1 (f^j)^*[phi = 0]`.
///
/// The orbit is carried in extended range so that coordinates collapsing
/// towards an invariant curve do not underflow.
pub fn curve_potentials(f: &ProjMap, phi: &HomogPoly3, n: usize, x: &ProjPoint) -> Result<Vec<f64>> {
    let k = phi.degree() as f64;
    let d = f.degree() as f64;
    let mut y = x.coords().map(Ext::new);
    let mut a = 0.0;
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let v = ext::evaluate(phi, &y);
        if v.is_zero() {
            return Err(Error::OnCurve);
        }
        out.push((v.ln_abs() + k * a) / (k * d.powi(j as i32)));
        if j == n {
            break;
        }
        let img: [Ext; 3] = std::array::from_fn(|i| ext::evaluate(&f.components()[i], &y));
        let (unit, ln) = ext::normalize(img);
        y = unit;
        a = d * a + ln;
    }
    Ok(out)
}

/// `v_n(x)`, see [`curve_potentials`].
pub fn curve_potential(f: &ProjMap, phi: &HomogPoly3, n: usize, x: &ProjPoint) -> Result<f64> {
    Ok(*curve_potentials(f, phi, n, x)?.last().expect("n + 1 values"))
}
