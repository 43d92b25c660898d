use nalgebra::{Vector2, Vector3};

use super::MsmError;
use crate::geometry::PixelPoint;
use crate::math::collinearity;

/// Imaged center of a square marker: the intersection of the diagonals
/// (c0, c2) and (c1, c3). Being a projective invariant, it maps to the
/// imaged pattern center under any homography.
pub fn center_from_square_corners(corners: &[PixelPoint; 4]) -> Result<PixelPoint, MsmError> {
    let v: [Vector2<f64>; 4] = corners.map(|c| c.to_vector());
    for (i, j, k) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
        if collinearity(&v[i], &v[j], &v[k]) < 1e-12 {
            return Err(MsmError::DegenerateQuad);
        }
    }
    let h = v.map(|p| Vector3::new(p.x, p.y, 1.0));
    let d1 = h[0].cross(&h[2]);
    let d2 = h[1].cross(&h[3]);
    let x = d1.cross(&d2);
    if x.z.abs() <= 1e-12 * x.norm() {
        return Err(MsmError::DegenerateQuad);
    }
    Ok(PixelPoint::new(x.x / x.z, x.y / x.z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;
    use proptest::prelude::*;

    fn warp(g: &Matrix3<f64>, p: (f64, f64)) -> (PixelPoint, f64) {
        let q = g * Vector3::new(p.0, p.1, 1.0);
        (PixelPoint::new(q.x / q.z, q.y / q.z), q.z)
    }

    fn is_convex(q: &[PixelPoint; 4]) -> bool {
        let mut sign = 0.0;
        for i in 0..4 {
            let a = q[i].to_vector();
            let b = q[(i + 1) % 4].to_vector();
            let c = q[(i + 2) % 4].to_vector();
            let cross = (b - a).perp(&(c - b));
            if sign == 0.0 {
                sign = cross.signum();
            } else if cross.signum() != sign {
                return false;
            }
        }
        true
    }

    #[test]
    fn unit_square() {
        let c = center_from_square_corners(&[
            PixelPoint::new(0.0, 0.0),
            PixelPoint::new(1.0, 0.0),
            PixelPoint::new(1.0, 1.0),
            PixelPoint::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(c, PixelPoint::new(0.5, 0.5));
    }

    #[test]
    fn collinear_corners_are_degenerate() {
        let q = [PixelPoint::new(0.0, 0.0), PixelPoint::new(1.0, 1.0), PixelPoint::new(2.0, 2.0), PixelPoint::new(0.0, 1.0)];
        assert_eq!(center_from_square_corners(&q), Err(MsmError::DegenerateQuad));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn projective_invariance(entries in prop::array::uniform8(-0.4f64..0.4), scale in 50.0f64..500.0, shift in prop::array::uniform2(0.0f64..1000.0)) {
            // Random homography near a similarity, with perspective terms.
            let g = Matrix3::new(
                scale * (1.0 + entries[0]), scale * entries[1], shift[0],
                scale * entries[2], scale * (1.0 + entries[3]), shift[1],
                entries[4] * 0.8, entries[5] * 0.8, 1.0 + entries[6] * 0.5,
            );
            let square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
            let warped = square.map(|p| warp(&g, p));
            prop_assume!(warped.iter().all(|w| w.1 > 0.05));
            let quad = warped.map(|w| w.0);
            prop_assume!(is_convex(&quad));
            let expected = warp(&g, (0.5, 0.5)).0;
            let got = center_from_square_corners(&quad).unwrap();
            prop_assert!(got.distance(expected) < 1e-9 * (1.0 + expected.to_vector().norm()), "{}", got.distance(expected));
        }
    }
}
