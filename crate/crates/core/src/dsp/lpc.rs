use rustfft::num_complex::Complex;

use crate::scalar::Real;

/// Autocorrelation-method LPC via Levinson-Durbin.
///
/// Returns `[1, a1, .., ap]` such that the prediction-error filter is
/// `A(z) = 1 + a1 z^-1 + .. + ap z^-p`, or `None` for a silent frame.
pub fn lpc_coefficients<T: Real>(frame: &[T], order: usize) -> Option<Vec<T>> {
    let n = frame.len();
    if n <= order {
        return None;
    }
    let r: Vec<T> = (0..=order).map(|k| (0..n - k).map(|i| frame[i] * frame[i + k]).sum()).collect();
    if r[0] <= T::zero() {
        return None;
    }
    let mut a = vec![T::zero(); order + 1];
    a[0] = T::one();
    let mut err = r[0];
    for i in 1..=order {
        let acc: T = (1..i).map(|j| a[j] * r[i - j]).sum::<T>() + r[i];
        let k = -acc / err;
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= T::one() - k * k;
        if err <= T::zero() {
            return None;
        }
    }
    Some(a)
}

/// Roots of the monic polynomial `z^p + c1 z^(p-1) + .. + cp` given
/// `coeffs = [1, c1, .., cp]`, by simultaneous Aberth-Ehrlich iteration.
pub fn polynomial_roots<T: Real>(coeffs: &[T]) -> Vec<Complex<T>> {
    let p = coeffs.len().saturating_sub(1);
    if p == 0 {
        return Vec::new();
    }
    let lead = coeffs[0];
    let c: Vec<Complex<T>> = coeffs.iter().map(|&v| Complex::new(v / lead, T::zero())).collect();
    let eval = |z: Complex<T>| -> (Complex<T>, Complex<T>) {
        let mut f = c[0];
        let mut df = Complex::new(T::zero(), T::zero());
        for &ck in &c[1..] {
            df = df * z + f;
            f = f * z + ck;
        }
        (f, df)
    };
    // Cauchy-style bound for the initial circle.
    let radius = T::one() + c[1..].iter().map(|v| v.norm()).fold(T::zero(), T::max);
    let radius = radius.min(T::lit(2.0)).max(T::lit(0.5));
    let mut z: Vec<Complex<T>> = (0..p)
        .map(|k| {
            let ang = T::lit(2.0 * std::f64::consts::PI * k as f64 / p as f64 + 0.4);
            Complex::new(radius * ang.cos(), radius * ang.sin())
        })
        .collect();
    let tol = T::epsilon() * T::lit(64.0);
    for _ in 0..500 {
        let mut max_step = T::zero();
        for i in 0..p {
            let (f, df) = eval(z[i]);
            if f.norm() == T::zero() {
                continue;
            }
            let ratio = f / df;
            let mut sum = Complex::new(T::zero(), T::zero());
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    let d = z[i] - zj;
                    if d.norm() > T::zero() {
                        sum = sum + Complex::new(T::one(), T::zero()) / d;
                    }
                }
            }
            let step = ratio / (Complex::new(T::one(), T::zero()) - ratio * sum);
            if step.re.is_nan() || step.im.is_nan() {
                continue;
            }
            z[i] = z[i] - step;
            max_step = max_step.max(step.norm() / (T::one() + z[i].norm()));
        }
        if max_step < tol {
            break;
        }
    }
    z
}
