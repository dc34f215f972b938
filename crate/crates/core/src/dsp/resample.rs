use crate::scalar::Real;

const ZERO_CROSSINGS: f64 = 16.0;

fn blackman(x: f64) -> f64 {
    // x in [-1, 1]
    let t = (x + 1.0) * 0.5;
    0.42 - 0.5 * (2.0 * std::f64::consts::PI * t).cos() + 0.08 * (4.0 * std::f64::consts::PI * t).cos()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Band-limited resampling with a Blackman-windowed sinc kernel. When
/// downsampling, the kernel cutoff sits at 95% of the target Nyquist.
pub fn resample<T: Real>(samples: &[T], from: u32, to: u32) -> Vec<T> {
    if from == to || samples.is_empty() {
        return samples.to_vec();
    }
    let ratio = to as f64 / from as f64;
    // Cutoff in cycles per input sample.
    let cutoff = 0.5 * ratio.min(1.0) * 0.95;
    let half_width = ZERO_CROSSINGS / (2.0 * cutoff);
    let out_len = ((samples.len() as f64) * ratio).floor() as usize;
    let n = samples.len() as i64;
    (0..out_len)
        .map(|m| {
            let centre = m as f64 / ratio;
            let lo = ((centre - half_width).ceil() as i64).max(0);
            let hi = ((centre + half_width).floor() as i64).min(n - 1);
            let mut acc = 0.0;
            for k in lo..=hi {
                let d = centre - k as f64;
                let h = 2.0 * cutoff * sinc(2.0 * cutoff * d) * blackman(d / half_width);
                acc += h * samples[k as usize].to_f64_lossy();
            }
            T::lit(acc)
        })
        .collect()
}
