//! Integer-order Bessel functions J0..J2 and K0..K2 of real positive argument.
//!
//! J uses the power series below x = 2 and Miller's backward recurrence,
//! normalised by J0 + 2 sum J_2k = 1, above it. K uses the ascending series
//! below x = 2 and Steed's continued fraction (CF2) above it. Both are good
//! to a few ulp of absolute error for J and a few ulp relative for K.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;

/// `(J0(x), J1(x), J2(x))` for `x >= 0`.
pub fn bessel_j012(x: f64) -> (f64, f64, f64) {
    debug_assert!(x >= 0.0, "bessel_j012 needs x >= 0, got {x}");
    if x == 0.0 {
        return (1.0, 0.0, 0.0);
    }
    if x < SERIES_LIMIT {
        (j_series(0, x), j_series(1, x), j_series(2, x))
    } else {
        j_miller(x)
    }
}

fn j_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half.powi(order as i32);
    for k in 1..=order {
        term /= k as f64;
    }
    let mut sum = term;
    for k in 1..60 {
        term *= q / (k as f64 * (k + order) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn j_miller(x: f64) -> (f64, f64, f64) {
    let start = 2 * (((x + 25.0 + 10.0 * x.sqrt()) / 2.0).ceil() as usize);
    let two_over_x = 2.0 / x;
    let mut next = 0.0_f64;
    let mut cur = 1e-280_f64;
    let mut norm = 0.0;
    let (mut out1, mut out2) = (0.0, 0.0);
    let out0;
    // cur holds J_k (unnormalised) as k runs from `start` down to 0
    let mut k = start;
    loop {
        if k % 2 == 0 && k > 0 {
            norm += 2.0 * cur;
        }
        match k {
            2 => out2 = cur,
            1 => out1 = cur,
            0 => {
                out0 = cur;
                norm += cur;
                break;
            }
            _ => {}
        }
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            out1 *= 1e-250;
            out2 *= 1e-250;
        }
    }
    (out0 / norm, out1 / norm, out2 / norm)
}

/// `(K0(x), K1(x), K2(x))` for `x > 0`.
pub fn bessel_k012(x: f64) -> (f64, f64, f64) {
    debug_assert!(x > 0.0, "bessel_k012 needs x > 0, got {x}");
    let (k0, k1) = if x <= SERIES_LIMIT { k01_series(x) } else { k01_steed(x) };
    (k0, k1, k0 + 2.0 / x * k1)
}

fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    // K0 = -(ln(x/2) + gamma) I0 + sum_{k>=1} H_k y^k / (k!)^2
    let mut i0 = 1.0;
    let mut tail0 = 0.0;
    // K1 = 1/x + I1 ln(x/2) - (x/4) sum_{k>=0} (psi(k+1) + psi(k+2)) y^k / (k! (k+1)!)
    let mut i1_sum = 1.0;
    let mut psi_sum = -2.0 * EULER_GAMMA + 1.0;

    let mut t0 = 1.0; // y^k / (k!)^2
    let mut t1 = 1.0; // y^k / (k! (k+1)!)
    let mut harmonic = 0.0;
    for k in 1..40 {
        let kf = k as f64;
        harmonic += 1.0 / kf;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        i0 += t0;
        tail0 += harmonic * t0;
        i1_sum += t1;
        // psi(k+1) + psi(k+2) = -2 gamma + 2 H_k + 1/(k+1)
        psi_sum += (-2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (kf + 1.0)) * t1;
        if t0 < 1e-18 * i0 {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    let k0 = -(log_half + EULER_GAMMA) * i0 + tail0;
    let k1 = 1.0 / x + i1 * log_half - 0.25 * x * psi_sum;
    (k0, k1)
}

fn k01_steed(x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-17;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        a -= 2.0 * (i - 1) as f64;
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

pub fn j0(x: f64) -> f64 {
    bessel_j012(x).0
}

pub fn j1(x: f64) -> f64 {
    bessel_j012(x).1
}

pub fn j2(x: f64) -> f64 {
    bessel_j012(x).2
}

pub fn k0(x: f64) -> f64 {
    bessel_k012(x).0
}

pub fn k1(x: f64) -> f64 {
    bessel_k012(x).1
}

pub fn k2(x: f64) -> f64 {
    bessel_k012(x).2
}

/// J1'(x) = J0(x) - J1(x)/x
pub fn j1_prime(x: f64) -> f64 {
    let (a, b, _) = bessel_j012(x);
    a - b / x
}

/// K1'(x) = -(K0(x) + K2(x))/2
pub fn k1_prime(x: f64) -> f64 {
    let (a, _, c) = bessel_k012(x);
    -0.5 * (a + c)
}
