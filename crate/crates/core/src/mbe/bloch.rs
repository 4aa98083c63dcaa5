/// `(S_x, S_y, S_z)`
pub type BlochVector = [f64; 3];

/// Bloch equations in the envelope/phase form, kappa = 1:
///
/// ```text
/// S_x' = -(d + phi') S_y
/// S_y' =  (d + phi') S_x + E S_z / 2
/// S_z' = -E S_y / 2
/// ```
pub fn bloch_rhs(state: BlochVector, delta: f64, phi_dot: f64, envelope: f64) -> BlochVector {
    let [sx, sy, sz] = state;
    let w = delta + phi_dot;
    [-w * sy, w * sx + 0.5 * envelope * sz, -0.5 * envelope * sy]
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// One fourth-order Magnus step for `S' = Omega(t) x S` over `h`, given
/// `Omega` at the two Gauss points `t + (1/2 ∓ sqrt(3)/6) h`.
///
/// The update is an exact rotation, so `|S|` is preserved to rounding.
#[inline]
pub fn magnus_step(s: [f64; 3], omega1: [f64; 3], omega2: [f64; 3], h: f64) -> [f64; 3] {
    const C: f64 = 0.144_337_567_297_406_43; // sqrt(3)/12
    let c = cross(omega1, omega2);
    let half = 0.5 * h;
    let hh = C * h * h;
    let r = [
        half * (omega1[0] + omega2[0]) - hh * c[0],
        half * (omega1[1] + omega2[1]) - hh * c[1],
        half * (omega1[2] + omega2[2]) - hh * c[2],
    ];
    rotate(s, r)
}

/// Rotation of `s` by angle `|r|` about `r` (Rodrigues).
#[inline]
fn rotate(s: [f64; 3], r: [f64; 3]) -> [f64; 3] {
    let angle2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    if angle2 == 0.0 {
        return s;
    }
    let angle = angle2.sqrt();
    let (sin, cos) = angle.sin_cos();
    let k = [r[0] / angle, r[1] / angle, r[2] / angle];
    let kxs = cross(k, s);
    let kds = (k[0] * s[0] + k[1] * s[1] + k[2] * s[2]) * (1.0 - cos);
    [
        s[0] * cos + kxs[0] * sin + k[0] * kds,
        s[1] * cos + kxs[1] * sin + k[1] * kds,
        s[2] * cos + kxs[2] * sin + k[2] * kds,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_is_dark() {
        assert_eq!(bloch_rhs([0.0, 0.0, -1.0], 0.3, 0.0, 0.0), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn free_precession() {
        let d = bloch_rhs([0.0, 1.0, 0.0], 1.0, 0.0, 0.0);
        assert_eq!(d, [-1.0, 0.0, 0.0]);
        let d = bloch_rhs([0.0, 1.0, 0.0], 0.4, 0.6, 0.0);
        assert_eq!(d, [-1.0, 0.0, 0.0]);
    }

    #[test]
    fn norm_is_stationary() {
        for &(s, d, p, e) in &[
            ([0.3, -0.4, 0.866], 0.7, -0.2, 1.3),
            ([0.0, 1.0, 0.0], 2.0, 0.0, -4.0),
            ([0.6, 0.0, -0.8], 0.0, 1.0, 0.5),
        ] {
            let r = bloch_rhs(s, d, p, e);
            let dn = 2.0 * (s[0] * r[0] + s[1] * r[1] + s[2] * r[2]);
            assert!(dn.abs() < 1e-15);
        }
    }

    #[test]
    fn magnus_matches_constant_rotation() {
        // constant field: S_z rotates into S_y at rate E/2 on resonance
        let e = 2.0;
        let omega = [-0.5 * e, 0.0, 0.0];
        let mut s = [0.0, 0.0, -1.0];
        let h = 1e-2;
        for _ in 0..100 {
            s = magnus_step(s, omega, omega, h);
        }
        // after t = 1: theta = 1, (u, v, w) = (0, -sin 1, -cos 1)
        assert!((s[1] + 1f64.sin()).abs() < 1e-13);
        assert!((s[2] + 1f64.cos()).abs() < 1e-13);
    }

    #[test]
    fn magnus_is_fourth_order() {
        // Omega(t) = (cos t, sin t, 0.5 t): compare step halving
        let omega = |t: f64| [t.cos(), t.sin(), 0.5 * t];
        let run = |n: usize| {
            let h = 2.0 / n as f64;
            let g = 3f64.sqrt() / 6.0;
            let mut s = [0.0, 0.0, 1.0];
            for i in 0..n {
                let t = i as f64 * h;
                s = magnus_step(s, omega(t + (0.5 - g) * h), omega(t + (0.5 + g) * h), h);
            }
            s
        };
        let reference = run(4096);
        let err = |s: [f64; 3]| (0..3).map(|i| (s[i] - reference[i]).abs()).fold(0.0, f64::max);
        let ratio = err(run(32)) / err(run(64));
        assert!(ratio > 13.0 && ratio < 19.0, "{ratio}");
        let s = run(100);
        assert!((s[0] * s[0] + s[1] * s[1] + s[2] * s[2] - 1.0).abs() < 1e-14);
    }
}
