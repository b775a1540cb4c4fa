use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::EULER_GAMMA;

const EPS: f64 = 1e-16;
const MAX_TERMS: usize = 20_000;

/// Principal-branch exponential integral `E₁(z) = ∫_z^∞ e^{−t}/t dt`,
/// with the cut along the negative real axis (`Im E₁(−x ± i0) = ∓π`; on the
/// axis itself the `−π` side is returned).
///
/// Power series near the origin and in the left half-plane close to the cut,
/// continued fraction (modified Lentz) elsewhere.
pub fn exponential_integral_e1(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite { name: "z", value: if z.re.is_finite() { z.im } else { z.re } });
    }
    if z.norm() == 0.0 {
        return Err(Error::SingularArgument);
    }
    let near_cut = z.re < 0.0 && z.im.abs() <= z.re.abs();
    if z.norm() <= 4.0 || near_cut {
        Ok(series(z))
    } else {
        Ok(continued_fraction(z))
    }
}

fn series(z: Complex64) -> Complex64 {
    // E₁(z) = −γ − ln z − Σ_{n≥1} (−z)^n / (n·n!)
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for n in 1..MAX_TERMS {
        term *= -z / n as f64;
        let add = term / n as f64;
        sum += add;
        if add.norm() <= EPS * sum.norm() {
            break;
        }
    }
    let log = if z.im == 0.0 && z.re < 0.0 {
        // principal log on the cut: arg = +π
        Complex64::new((-z.re).ln(), std::f64::consts::PI)
    } else {
        z.ln()
    };
    -EULER_GAMMA - log - sum
}

fn continued_fraction(z: Complex64) -> Complex64 {
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -((i * i) as f64);
        b += 2.0;
        d = (d * an + b).inv();
        c = b + c.inv() * an;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < EPS {
            break;
        }
    }
    h * (-z).exp()
}
