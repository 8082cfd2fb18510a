use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::classify::Table1Row;
use crate::error::{Error, Result};
use crate::map::{unit_disk, ProjMap};
use crate::poly::{exponents, HomogPoly3};

const ATTEMPTS: usize = 100;

/// Random form of degree `d` in the variables flagged in `vars`.
fn form_in<R: Rng + ?Sized>(d: usize, vars: [bool; 3], rng: &mut R) -> HomogPoly3 {
    let terms: Vec<_> = exponents(d)
        .filter(|&(i, j, k)| (vars[0] || i == 0) && (vars[1] || j == 0) && (vars[2] || k == 0))
        .map(|e| (e, unit_disk(rng)))
        .collect();
    HomogPoly3::from_terms(d, terms).expect("degrees match")
}

fn power(var: usize, d: usize) -> HomogPoly3 {
    HomogPoly3::variable(var).pow(d)
}

fn var(v: usize) -> HomogPoly3 {
    HomogPoly3::variable(v)
}

fn plus(a: HomogPoly3, b: HomogPoly3) -> HomogPoly3 {
    a.add(&b).expect("degrees match")
}

const ALL: [bool; 3] = [true, true, true];
const ZT: [bool; 3] = [true, false, true];
const ZW: [bool; 3] = [true, true, false];

fn candidate<R: Rng + ?Sized>(row: Table1Row, d: usize, rng: &mut R) -> Result<[HomogPoly3; 3]> {
    let (z, w, t) = (0, 1, 2);
    let comps = match row {
        Table1Row::R10 => [form_in(d, ALL, rng), form_in(d, ALL, rng), power(t, d)],
        Table1Row::R01 => [form_in(d, ZT, rng), form_in(d, ALL, rng), form_in(d, ZT, rng)],
        Table1Row::R11a => [
            form_in(d, ALL, rng),
            plus(power(w, d), var(t).mul(&form_in(d - 1, ALL, rng))),
            power(t, d),
        ],
        Table1Row::R11b => [form_in(d, ZW, rng), form_in(d, ZW, rng), power(t, d)],
        Table1Row::R12 => [
            form_in(d, ZT, rng),
            plus(power(w, d), var(t).mul(&form_in(d - 1, ALL, rng))),
            power(t, d),
        ],
        Table1Row::R21 => [form_in(d, ALL, rng), power(w, d), power(t, d)],
        Table1Row::R22 => [
            plus(power(z, d), var(t).mul(&form_in(d - 1, ALL, rng))),
            power(w, d),
            power(t, d),
        ],
        Table1Row::R23 => {
            let p = if d >= 2 {
                form_in(d - 2, ALL, rng)
            } else {
                HomogPoly3::monomial(0, 0, 0, Complex64::new(0.0, 0.0))
            };
            [
                plus(power(z, d), var(w).mul(&var(t)).mul(&p)),
                power(w, d),
                power(t, d),
            ]
        }
        Table1Row::R33 => [power(z, d), power(w, d), power(t, d)],
        other => {
            return Err(Error::InvalidArgument(format!(
                "row {} has no normal form",
                other.id()
            )))
        }
    };
    Ok(comps)
}

/// A random map in the normal form of `row`, coefficients uniform in the
/// unit disk, resampled until it validates.
pub fn gen_table1(row: Table1Row, d: usize, seed: u64) -> Result<ProjMap> {
    if d < 2 {
        return Err(Error::DegreeTooSmall { min: 2, got: d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ATTEMPTS {
        if let Ok(f) = ProjMap::validate(candidate(row, d, &mut rng)?) {
            return Ok(f);
        }
    }
    Err(Error::GenerationFailed { attempts: ATTEMPTS })
}
