//! Explicit Runge–Kutta integration for nonnegative systems: adaptive
//! Dormand–Prince 5(4) with its quartic dense output, and classical RK4 at a
//! fixed step with cubic Hermite interpolation.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64, state: Vec<f64> },
    #[error("component {index} reached {value} at t = {t}, below the negativity tolerance")]
    NegativeExcursion { t: f64, index: usize, value: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Clamp negative components to zero after each step, failing below `-neg_factor·atol`.
    pub nonnegative: bool,
    pub neg_factor: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-8, atol: 1e-10, max_step: f64::INFINITY, max_steps: 10_000_000, nonnegative: true, neg_factor: 10.0 }
    }
}

/// Interpolant over one accepted step `[t0, t0 + h]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Segment {
    /// `y(θ) = r0 + θ(r1 + (1−θ)(r2 + θ(r3 + (1−θ) r4)))`.
    Dopri { t0: f64, h: f64, r: [Vec<f64>; 5] },
    Hermite { t0: f64, h: f64, y0: Vec<f64>, y1: Vec<f64>, f0: Vec<f64>, f1: Vec<f64> },
}

impl Segment {
    pub fn t0(&self) -> f64 {
        match self {
            Segment::Dopri { t0, .. } | Segment::Hermite { t0, .. } => *t0,
        }
    }

    pub fn t1(&self) -> f64 {
        match self {
            Segment::Dopri { t0, h, .. } | Segment::Hermite { t0, h, .. } => t0 + h,
        }
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        match self {
            Segment::Dopri { t0, h, r } => {
                let th = (t - t0) / h;
                let th1 = 1.0 - th;
                for (i, o) in out.iter_mut().enumerate() {
                    *o = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
                }
            }
            Segment::Hermite { t0, h, y0, y1, f0, f1 } => {
                let s = (t - t0) / h;
                let (s2, s3) = (s * s, s * s * s);
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                for (i, o) in out.iter_mut().enumerate() {
                    *o = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
                }
            }
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let n = match self {
            Segment::Dopri { r, .. } => r[0].len(),
            Segment::Hermite { y0, .. } => y0.len(),
        };
        let mut out = vec![0.0; n];
        self.eval_into(t, &mut out);
        out
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-size hint carried between consecutive calls.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepHint(pub Option<f64>);

/// Integrates `y' = f(t, y)` from `t0` to `t1`, pushing one segment per accepted
/// step. `y` is updated in place to the value at `t1`.
pub fn dopri5<F>(
    mut f: F,
    t0: f64,
    t1: f64,
    y: &mut [f64],
    opts: &OdeOptions,
    hint: &mut StepHint,
    segments: &mut Vec<Segment>,
) -> Result<usize, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    if t1 <= t0 {
        return Ok(0);
    }
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut t = t0;
    f(t, y, &mut k[0]);
    let span = t1 - t0;
    let mut h = hint.0.unwrap_or_else(|| initial_step(&mut f, t0, y, &k[0], opts)).min(opts.max_step).min(span);
    let mut steps = 0;
    let mut last_rejected = false;

    loop {
        if steps >= opts.max_steps {
            return Err(OdeError::TooManySteps { t });
        }
        let remaining = t1 - t;
        // Land exactly on t1 rather than leave a sliver step.
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t, h, state: y.to_vec() });
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k[0][i];
        }
        f(t + C2 * h, &ytmp, &mut k[1]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        f(t + C3 * h, &ytmp, &mut k[2]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        f(t + C4 * h, &ytmp, &mut k[3]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        f(t + C5 * h, &ytmp, &mut k[4]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
        }
        let tn = if last { t1 } else { t + h };
        f(tn, &ytmp, &mut k[5]);
        for i in 0..n {
            ynew[i] = y[i] + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
        }
        f(tn, &ynew, &mut k[6]);
        steps += 1;

        let mut norm = 0.0;
        for i in 0..n {
            err[i] = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            norm += (err[i] / sc).powi(2);
        }
        let norm = (norm / n.max(1) as f64).sqrt();
        if !norm.is_finite() {
            if ynew.iter().any(|v| !v.is_finite()) && h <= 1e-10 * span {
                return Err(OdeError::NonFinite { t });
            }
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        if norm <= 1.0 {
            let mut r: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                r[0][i] = y[i];
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - h * k[6][i] - bspl;
                r[4][i] = h
                    * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
            }
            segments.push(Segment::Dopri { t0: t, h, r });
            let clamped = clamp(&mut ynew, tn, opts)?;
            y.copy_from_slice(&ynew);
            t = tn;
            if clamped {
                f(t, y, &mut k[0]);
            } else {
                k.swap(0, 6);
            }
            let mut fac = 0.9 * norm.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            let hnext = (h * fac).min(opts.max_step);
            if last {
                hint.0 = Some(hnext.max(h));
                return Ok(steps);
            }
            h = hnext;
        } else {
            h *= (0.9 * norm.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
}

fn clamp(y: &mut [f64], t: f64, opts: &OdeOptions) -> Result<bool, OdeError> {
    if !opts.nonnegative {
        return Ok(false);
    }
    let mut clamped = false;
    for (index, v) in y.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(OdeError::NonFinite { t });
        }
        if *v < 0.0 {
            if *v < -opts.neg_factor * opts.atol {
                return Err(OdeError::NegativeExcursion { t, index, value: *v });
            }
            *v = 0.0;
            clamped = true;
        }
    }
    Ok(clamped)
}

fn initial_step<F>(f: &mut F, t0: f64, y0: &[f64], f0: &[f64], opts: &OdeOptions) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len().max(1) as f64;
    let sc = |i: usize| opts.atol + opts.rtol * y0[i].abs();
    let d0 = (y0.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(opts.max_step);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, d)| y + h0 * d).collect();
    let mut f1 = vec![0.0; y0.len()];
    f(t0 + h0, &y1, &mut f1);
    let d2 = (f1.iter().zip(f0).enumerate().map(|(i, (a, b))| ((a - b) / sc(i)).powi(2)).sum::<f64>() / n).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}

/// Classical fourth-order Runge–Kutta with step at most `h`, landing on `t1`.
pub fn rk4<F>(mut f: F, t0: f64, t1: f64, y: &mut [f64], h: f64, opts: &OdeOptions, segments: &mut Vec<Segment>) -> Result<usize, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    if t1 <= t0 {
        return Ok(0);
    }
    let steps = ((t1 - t0) / h).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let mut k: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let tn = if s + 1 == steps { t1 } else { t + h };
        f(t, y, &mut k[0]);
        for i in 0..n {
            ytmp[i] = y[i] + 0.5 * h * k[0][i];
        }
        f(t + 0.5 * h, &ytmp, &mut k[1]);
        for i in 0..n {
            ytmp[i] = y[i] + 0.5 * h * k[1][i];
        }
        f(t + 0.5 * h, &ytmp, &mut k[2]);
        for i in 0..n {
            ytmp[i] = y[i] + h * k[2][i];
        }
        f(tn, &ytmp, &mut k[3]);
        let y0 = y.to_vec();
        for i in 0..n {
            y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        clamp(y, tn, opts)?;
        f(tn, y, &mut f1);
        segments.push(Segment::Hermite { t0: t, h: tn - t, y0, y1: y.to_vec(), f0: k[0].clone(), f1: f1.clone() });
    }
    Ok(steps)
}

/// Locates the segment covering `t` in a time-ordered list.
pub fn find_segment(segments: &[Segment], t: f64) -> Option<&Segment> {
    let first = segments.first()?;
    let last = segments.last()?;
    if t < first.t0() || t > last.t1() {
        return None;
    }
    let i = segments.partition_point(|s| s.t1() < t);
    segments.get(i.min(segments.len() - 1))
}
