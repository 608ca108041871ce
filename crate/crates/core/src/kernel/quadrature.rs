//! Floating-point oracles for the kernel integrals, used to cross-check
//! the exact moment formulas.

use crate::error::{Error, Result};

/// Kernel integrals available to [`quadrature_oracle`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureKind {
    /// `h_{2k+1}(t) = ∫_0^∞ x^{2k+1}/(2k+1)! H(t,x) dx`.
    H { k: u32 },
    /// `∫_0^∞ x^{2n} sech(πx/2) dx`; `t` is ignored.
    SechMoment { n: u32 },
    /// `∫_0^∞∫_0^∞ x^{2a+1} y^{2b+1} H(t,x+y) dx dy`, as a nested 2D integral.
    DoubleMoment { a: u32, b: u32 },
}

impl QuadratureKind {
    pub fn name(self) -> &'static str {
        match self {
            QuadratureKind::H { .. } => "h",
            QuadratureKind::SechMoment { .. } => "sech_moment",
            QuadratureKind::DoubleMoment { .. } => "dd_moment",
        }
    }
}

const MAX_ORDER: u32 = 8;
const TAIL: f64 = 80.0;
const MAX_DEPTH: u32 = 40;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn sech(u: f64) -> f64 {
    let a = u.abs();
    if a > 700.0 {
        0.0
    } else {
        let e = (-a).exp();
        2.0 * e / (1.0 + e * e)
    }
}

fn kernel_h(x: f64, y: f64) -> f64 {
    let c = std::f64::consts::FRAC_PI_2;
    0.5 * (sech(c * (x - y)) - sech(c * (x + y)))
}

/// Kronrod estimate and its difference from the embedded Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (value, err) = gk15(f, a, b);
    if err <= tol || err <= 1e-15 * value.abs() {
        return Ok(value);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature(format!("no convergence on [{a}, {b}] (error estimate {err:e})")));
    }
    let mid = 0.5 * (a + b);
    Ok(adaptive(f, a, mid, 0.5 * tol, depth + 1)? + adaptive(f, mid, b, 0.5 * tol, depth + 1)?)
}

/// `∫_0^{upper} f`, with a relative tolerance taken against a coarse first
/// pass over unit panels.
fn integrate<F: Fn(f64) -> f64>(f: &F, upper: f64, rel_tol: f64) -> Result<f64> {
    let panels = upper.ceil().max(1.0) as usize;
    let width = upper / panels as f64;
    let scale: f64 = (0..panels)
        .map(|i| gk15(f, i as f64 * width, (i + 1) as f64 * width).0.abs())
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let tol = rel_tol * scale / panels as f64;
    (0..panels).try_fold(0.0, |acc, i| Ok(acc + adaptive(f, i as f64 * width, (i + 1) as f64 * width, tol, 0)?))
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Numerically integrates the kernel integral `kind` at `t`. Orders are
/// limited to `k, n, a, b ≤ 8` and `0 ≤ t ≤ 20`, where the truncation of
/// the half-line at `t + 80` is far below double precision.
pub fn quadrature_oracle(kind: QuadratureKind, t: f64) -> Result<f64> {
    let order = match kind {
        QuadratureKind::H { k } => k,
        QuadratureKind::SechMoment { n } => n,
        QuadratureKind::DoubleMoment { a, b } => a.max(b),
    };
    if order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("order {order} exceeds {MAX_ORDER}")));
    }
    if !(0.0..=20.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t = {t} outside [0, 20]")));
    }
    let upper = t + TAIL;
    match kind {
        QuadratureKind::SechMoment { n } => {
            let c = std::f64::consts::FRAC_PI_2;
            integrate(&|x: f64| x.powi(2 * n as i32) * sech(c * x), TAIL, 1e-13)
        }
        QuadratureKind::H { k } => {
            let e = 2 * k as i32 + 1;
            let scale = factorial(2 * k + 1);
            Ok(integrate(&|x: f64| x.powi(e) * kernel_h(t, x), upper, 1e-13)? / scale)
        }
        QuadratureKind::DoubleMoment { a, b } => {
            let (ea, eb) = (2 * a as i32 + 1, 2 * b as i32 + 1);
            let inner = |x: f64| -> Result<f64> {
                integrate(&|y: f64| y.powi(eb) * kernel_h(t, x + y), upper, 1e-12).map(|v| v * x.powi(ea))
            };
            // The inner integral can fail; smuggle the first error out of the closure.
            let failure = std::cell::RefCell::new(None);
            let outer = integrate(
                &|x: f64| match inner(x) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                },
                upper,
                1e-11,
            )?;
            match failure.into_inner() {
                Some(e) => Err(e),
                None => Ok(outer),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sech_moments_are_secant_numbers() {
        for (n, a) in [(0, 1.0), (1, 1.0), (2, 5.0), (3, 61.0)] {
            let v = quadrature_oracle(QuadratureKind::SechMoment { n }, 0.0).unwrap();
            assert!((v - a).abs() < 1e-9 * a, "n={n}: {v}");
        }
    }

    #[test]
    fn h3_at_one() {
        let v = quadrature_oracle(QuadratureKind::H { k: 1 }, 1.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(quadrature_oracle(QuadratureKind::H { k: 20 }, 1.0).is_err());
        assert!(quadrature_oracle(QuadratureKind::H { k: 1 }, -1.0).is_err());
    }
}
