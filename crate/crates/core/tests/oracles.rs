//! Extended-precision and closed-form oracles for the dense numerics.

use ionmirror::analysis::displacement_operator;
use ionmirror::fock::{expm, CoherentAmplitude};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use twofloat::TwoFloat;

#[derive(Clone, Copy)]
struct Dd {
    re: TwoFloat,
    im: TwoFloat,
}

impl Dd {
    const ZERO: Dd = Dd {
        re: TwoFloat::from_f64(0.0),
        im: TwoFloat::from_f64(0.0),
    };

    fn from(z: C64) -> Self {
        Dd {
            re: TwoFloat::from(z.re),
            im: TwoFloat::from(z.im),
        }
    }

    fn add(self, o: Dd) -> Dd {
        Dd {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    fn mul(self, o: Dd) -> Dd {
        Dd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    fn scale(self, k: TwoFloat) -> Dd {
        Dd {
            re: self.re * k,
            im: self.im * k,
        }
    }

    fn to_c64(self) -> C64 {
        C64::new(self.re.into(), self.im.into())
    }
}

type DdMatrix = Vec<Vec<Dd>>;

fn dd_mul(a: &DdMatrix, b: &DdMatrix) -> DdMatrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(Dd::ZERO, |acc, k| acc.add(a[i][k].mul(b[k][j]))))
                .collect()
        })
        .collect()
}

/// exp(a) by a Taylor series on a/2^s in double-double, then s squarings.
fn taylor_expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let s = norm.log2().ceil().max(0.0) as i32 + 4;
    let inv = TwoFloat::from(2f64.powi(-s));
    let scaled: DdMatrix = (0..n)
        .map(|i| (0..n).map(|j| Dd::from(a[(i, j)]).scale(inv)).collect())
        .collect();
    let identity: DdMatrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Dd::from(C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)))
                .collect()
        })
        .collect();
    let mut term = identity.clone();
    let mut sum = identity;
    for k in 1..=40 {
        term = dd_mul(&term, &scaled);
        let f = TwoFloat::from(1.0) / TwoFloat::from(k as f64);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z = z.scale(f);
            }
        }
        for i in 0..n {
            for j in 0..n {
                sum[i][j] = sum[i][j].add(term[i][j]);
            }
        }
    }
    for _ in 0..s {
        sum = dd_mul(&sum, &sum);
    }
    DMatrix::from_fn(n, n, |i, j| sum[i][j].to_c64())
}

#[test]
fn pade_expm_matches_extended_taylor() {
    let mut rng = StdRng::seed_from_u64(11);
    for scale in [0.3, 2.0, 9.0] {
        let a = DMatrix::from_fn(6, 6, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
        });
        let ours = expm(&a).unwrap();
        let oracle = taylor_expm(&a);
        let size = oracle.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = (&ours - &oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * size, "scale {scale}: {err:e} of {size:e}");
    }
}

#[test]
fn non_normal_decay_generator() {
    // −i(H − iΓ/2) on a driven, damped two-level block
    let i = C64::i();
    let h = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, -0.9),
        ],
    );
    let a = &h * (-i * 3.7);
    let err = (&expm(&a).unwrap() - &taylor_expm(&a))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(err <= 1e-13, "{err:e}");
}

/// ⟨m|D(α)|n⟩ for m ≥ n via associated Laguerre polynomials, built by the
/// three-term recurrence.
fn displacement_element(alpha: C64, m: usize, n: usize) -> C64 {
    let (hi, lo, a) = if m >= n { (m, n, alpha) } else { (n, m, -alpha.conj()) };
    let x = alpha.norm_sqr();
    let k = (hi - lo) as f64;
    // L_lo^{(k)}(x)
    let (mut prev, mut cur) = (1.0, 1.0 + k - x);
    let lag = if lo == 0 {
        1.0
    } else {
        for j in 1..lo {
            let j = j as f64;
            let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
            prev = cur;
            cur = next;
        }
        cur
    };
    let ratio: f64 = ((lo + 1)..=hi).map(|j| j as f64).product::<f64>().sqrt().recip();
    (-x / 2.0).exp() * ratio * a.powu((hi - lo) as u32) * lag
}

#[test]
fn displacement_matches_laguerre_elements() {
    for alpha in [C64::new(0.4, 0.0), C64::new(-0.7, 0.9), C64::new(1.5, -0.5)] {
        let dim = 20;
        let d = displacement_operator(CoherentAmplitude(alpha), dim).unwrap();
        let mut worst: f64 = 0.0;
        for m in 0..dim {
            for n in 0..dim {
                worst = worst.max((d.matrix()[(m, n)] - displacement_element(alpha, m, n)).norm());
            }
        }
        assert!(worst <= 1e-10, "α = {alpha}: {worst:e}");
    }
}

#[test]
fn displacements_compose_up_to_a_phase() {
    let dim = 10;
    let (a, b) = (C64::new(0.6, 0.2), C64::new(-0.3, 0.5));
    let da = displacement_operator(CoherentAmplitude(a), 60).unwrap();
    let db = displacement_operator(CoherentAmplitude(b), 60).unwrap();
    let dab = displacement_operator(CoherentAmplitude(a + b), 60).unwrap();
    let prod = da.matrix() * db.matrix();
    // D(α)D(β) = e^{i Im(αβ*)} D(α + β)
    let phase = C64::from_polar(1.0, (a * b.conj()).im);
    let mut worst: f64 = 0.0;
    for m in 0..dim {
        for n in 0..dim {
            worst = worst.max((prod[(m, n)] - phase * dab.matrix()[(m, n)]).norm());
        }
    }
    assert!(worst <= 1e-10, "{worst:e}");
}
