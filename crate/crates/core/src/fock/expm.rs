//! Dense matrix exponential by scaling and squaring with a diagonal Padé
//! approximant, and its application to state vectors.
//!
//! The input is scaled by 2^-s until its 1-norm is at most 0.5, where the
//! degree-8 approximant is accurate far below double precision; the result is
//! then squared s times. Generators that split into independent blocks are
//! exponentiated block by block, which keeps photon-number-conserving
//! Hamiltonians cheap.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::operator::Operator;
use super::state::StateVector;
use crate::error::{Error, Result};

const PADE_DEGREE: usize = 8;
const SCALED_NORM_MAX: f64 = 0.5;

fn pade_coefficients() -> [f64; PADE_DEGREE + 1] {
    // c_j = (2m−j)! m! / ((2m)! j! (m−j)!), built by the ratio recurrence
    let m = PADE_DEGREE as f64;
    let mut c = [0.0; PADE_DEGREE + 1];
    c[0] = 1.0;
    for j in 1..=PADE_DEGREE {
        let jf = j as f64;
        c[j] = c[j - 1] * (m - jf + 1.0) / (jf * (2.0 * m - jf + 1.0));
    }
    c
}

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn check_finite(a: &DMatrix<Complex64>, what: &str) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalOverflow(format!("non-finite entries in {what}")))
    }
}

/// exp(a) for a square complex matrix.
pub fn expm(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidArgument(format!("expm of a {}x{} matrix", n, a.ncols())));
    }
    check_finite(a, "exponent")?;
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if n == 1 {
        let out = DMatrix::from_element(1, 1, a[(0, 0)].exp());
        check_finite(&out, "exponential")?;
        return Ok(out);
    }

    let norm = one_norm(a);
    let squarings = if norm > SCALED_NORM_MAX {
        (norm / SCALED_NORM_MAX).log2().ceil() as i32
    } else {
        0
    };
    if squarings > 1000 {
        return Err(Error::NumericalOverflow(format!("exponent norm {norm} too large")));
    }
    let scaled = a * Complex64::new(2f64.powi(-squarings), 0.0);

    let coeffs = pade_coefficients();
    let ident = DMatrix::<Complex64>::identity(n, n);
    // even and odd parts: N = E + O, D = E − O
    let mut even = &ident * Complex64::new(coeffs[0], 0.0);
    let mut odd = DMatrix::<Complex64>::zeros(n, n);
    let mut power = ident.clone();
    for (j, &cj) in coeffs.iter().enumerate().skip(1) {
        power = &power * &scaled;
        let term = &power * Complex64::new(cj, 0.0);
        if j % 2 == 0 {
            even += term;
        } else {
            odd += term;
        }
    }
    let numer = &even + &odd;
    let denom = &even - &odd;
    let mut result = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::NumericalOverflow("singular Padé denominator".into()))?;

    for _ in 0..squarings {
        result = &result * &result;
    }
    check_finite(&result, "exponential")?;
    Ok(result)
}

/// Connected components of the non-zero pattern of `m` (treated as symmetric).
fn blocks(m: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for j in 0..n {
        for i in 0..n {
            let z = m[(i, j)];
            if i != j && (z.re != 0.0 || z.im != 0.0) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// exp(−i·generator·t)·state, with the generator in angular-frequency units.
///
/// The generator may carry an anti-Hermitian (decay) part, in which case the
/// returned state's norm shrinks accordingly.
pub fn expm_apply(generator: &Operator, t: f64, state: &StateVector) -> Result<StateVector> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "evolution time must be finite and ≥ 0, got {t}"
        )));
    }
    if generator.layout() != state.layout() {
        return Err(Error::LayoutMismatch(format!(
            "generator on {} applied to state on {}",
            generator.layout(),
            state.layout()
        )));
    }
    let g = generator.matrix();
    check_finite(g, "generator")?;
    let psi = state.amplitudes();
    let mut out = DVector::<Complex64>::zeros(psi.len());
    let factor = Complex64::new(0.0, -t);

    for block in blocks(g) {
        if block.iter().all(|&i| psi[i].norm_sqr() == 0.0) {
            continue;
        }
        let k = block.len();
        let sub = DMatrix::from_fn(k, k, |r, c| g[(block[r], block[c])] * factor);
        let u = expm(&sub)?;
        let v = DVector::from_fn(k, |r, _| psi[block[r]]);
        let w = u * v;
        for (r, &i) in block.iter().enumerate() {
            out[i] = w[r];
        }
    }
    StateVector::new(state.layout().clone(), out)
}
