//! Unit quaternion to intrinsic Euler angles.
//!
//! `R = R1(a) * R2(b) * R3(c)` with axis orders Y-Z-Y (shoulder) and X-Z-Y
//! (elbow). When the middle angle sits on a singular value the first and
//! third axes coincide, so `c` is set to zero, the whole rotation goes to `a`,
//! and the result is flagged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-6;
const GIMBAL_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuaternionSample {
    pub time: f64,
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl QuaternionSample {
    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Scaled to unit length; `None` for a zero or non-finite quaternion.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n.is_finite() && n > 1e-12).then(|| Self {
            time: self.time,
            w: self.w / n,
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        })
    }

    /// Row-major rotation matrix.
    pub fn rotation_matrix(&self) -> [[f64; 3]; 3] {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EulerConvention {
    Yzy,
    Xzy,
}

/// Angles in degrees, in rotation order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub first: f64,
    pub second: f64,
    pub third: f64,
    pub degenerate: bool,
}

pub fn quat_to_euler(q: &QuaternionSample, convention: EulerConvention) -> Result<EulerAngles> {
    let n = q.norm();
    if !((n - 1.0).abs() < NORM_TOL) {
        return Err(Error::argument(format!("quaternion norm {n} is not 1")));
    }
    let m = q.rotation_matrix();
    let (a, b, c, degenerate) = match convention {
        EulerConvention::Yzy => {
            let s = (m[0][1] * m[0][1] + m[2][1] * m[2][1]).sqrt();
            let b = s.atan2(m[1][1]);
            if s < GIMBAL_EPS {
                let a = if m[1][1] > 0.0 {
                    m[0][2].atan2(m[0][0])
                } else {
                    m[0][2].atan2(-m[0][0])
                };
                (a, b, 0.0, true)
            } else {
                (m[2][1].atan2(-m[0][1]), b, m[1][2].atan2(m[1][0]), false)
            }
        }
        EulerConvention::Xzy => {
            let cb = (m[0][0] * m[0][0] + m[0][2] * m[0][2]).sqrt();
            let b = (-m[0][1]).atan2(cb);
            if cb < GIMBAL_EPS {
                (((-m[1][2]).atan2(m[2][2])), b, 0.0, true)
            } else {
                (m[2][1].atan2(m[1][1]), b, m[0][2].atan2(m[0][0]), false)
            }
        }
    };
    Ok(EulerAngles {
        first: a.to_degrees(),
        second: b.to_degrees(),
        third: c.to_degrees(),
        degenerate,
    })
}

/// Rotation matrix from angles, the inverse of [`quat_to_euler`].
pub fn euler_to_matrix(angles: &EulerAngles, convention: EulerConvention) -> [[f64; 3]; 3] {
    let (a, b, c) = (
        angles.first.to_radians(),
        angles.second.to_radians(),
        angles.third.to_radians(),
    );
    match convention {
        EulerConvention::Yzy => matmul(&matmul(&rot_y(a), &rot_z(b)), &rot_y(c)),
        EulerConvention::Xzy => matmul(&matmul(&rot_x(a), &rot_z(b)), &rot_y(c)),
    }
}

pub(crate) fn rot_x(t: f64) -> [[f64; 3]; 3] {
    let (s, c) = t.sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

pub(crate) fn rot_y(t: f64) -> [[f64; 3]; 3] {
    let (s, c) = t.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

pub(crate) fn rot_z(t: f64) -> [[f64; 3]; 3] {
    let (s, c) = t.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

pub(crate) fn matmul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Remove 360 degree jumps between successive samples.
pub fn unwrap_degrees(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    let mut shift = 0.0;
    for (i, &a) in angles.iter().enumerate() {
        if i > 0 {
            let prev = angles[i - 1];
            let d = a - prev;
            shift -= 360.0 * (d / 360.0).round();
        }
        out.push(a + shift);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(w: f64, x: f64, y: f64, z: f64) -> QuaternionSample {
        QuaternionSample { time: 0.0, w, x, y, z }
    }

    fn about(axis: [f64; 3], deg: f64) -> QuaternionSample {
        let h = deg.to_radians() / 2.0;
        q(h.cos(), axis[0] * h.sin(), axis[1] * h.sin(), axis[2] * h.sin())
    }

    #[test]
    fn identity_is_all_zero() {
        for conv in [EulerConvention::Yzy, EulerConvention::Xzy] {
            let e = quat_to_euler(&q(1.0, 0.0, 0.0, 0.0), conv).unwrap();
            assert!(e.first.abs() < 1e-12 && e.second.abs() < 1e-12 && e.third.abs() < 1e-12);
        }
        assert!(
            quat_to_euler(&q(1.0, 0.0, 0.0, 0.0), EulerConvention::Yzy)
                .unwrap()
                .degenerate
        );
    }

    #[test]
    fn pure_middle_axis_rotation() {
        for conv in [EulerConvention::Yzy, EulerConvention::Xzy] {
            let e = quat_to_euler(&about([0.0, 0.0, 1.0], 30.0), conv).unwrap();
            assert!((e.second - 30.0).abs() < 1e-9, "{conv:?} {e:?}");
            assert!(e.first.abs() < 1e-9 && e.third.abs() < 1e-9);
            assert!(!e.degenerate);
        }
    }

    #[test]
    fn non_unit_is_rejected() {
        assert!(quat_to_euler(&q(2.0, 0.0, 0.0, 0.0), EulerConvention::Yzy).is_err());
    }

    #[test]
    fn degenerate_cases_still_recompose() {
        let cases = [
            (about([0.0, 1.0, 0.0], 40.0), EulerConvention::Yzy),
            (
                QuaternionSample {
                    time: 0.0,
                    ..q(0.0, 0.6, 0.0, 0.8)
                },
                EulerConvention::Yzy,
            ),
            (about([0.0, 0.0, 1.0], 90.0), EulerConvention::Xzy),
            (about([0.0, 0.0, 1.0], -90.0), EulerConvention::Xzy),
        ];
        for (quat, conv) in cases {
            let e = quat_to_euler(&quat, conv).unwrap();
            assert!(e.degenerate, "{conv:?} {e:?}");
            let m = euler_to_matrix(&e, conv);
            let r = quat.rotation_matrix();
            let err: f64 = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| (m[i][j] - r[i][j]).powi(2))
                .sum();
            assert!(err.sqrt() < 1e-9, "{conv:?} {e:?}");
        }
    }

    #[test]
    fn unwrap_removes_jumps() {
        let u = unwrap_degrees(&[170.0, 179.0, -175.0, -160.0, 175.0]);
        assert_eq!(u, vec![170.0, 179.0, 185.0, 200.0, 175.0]);
        for w in u.windows(2) {
            assert!((w[1] - w[0]).abs() < 90.0);
        }
    }
}
