use crate::vec2::{centroid, Vec2};

/// RMS point discrepancy between two labelled configurations after removing
/// translation and the best proper rotation (no reflection, no scaling).
pub fn aligned_rms(a: &[Vec2], b: &[Vec2]) -> f64 {
    assert_eq!(a.len(), b.len(), "configurations differ in size");
    if a.is_empty() {
        return 0.0;
    }
    let ca = centroid(a);
    let cb = centroid(b);
    let (mut s_dot, mut s_cross) = (0.0, 0.0);
    for (p, q) in a.iter().zip(b) {
        let (p, q) = (*p - ca, *q - cb);
        s_dot += p.dot(q);
        s_cross += p.cross(q);
    }
    let angle = s_cross.atan2(s_dot);
    let sq: f64 = a
        .iter()
        .zip(b)
        .map(|(p, q)| ((*p - ca).rotated(angle) - (*q - cb)).norm_squared())
        .sum();
    (sq / a.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts() -> Vec<Vec2> {
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.2),
            Vec2::new(0.3, 1.4),
            Vec2::new(-0.7, 0.5),
        ]
    }

    #[test]
    fn rigid_motion_gives_zero() {
        let a = pts();
        let b: Vec<Vec2> = a.iter().map(|p| p.rotated(2.1) + Vec2::new(5.0, -3.0)).collect();
        assert!(aligned_rms(&a, &b) < 1e-12);
        assert!(aligned_rms(&b, &a) < 1e-12);
    }

    #[test]
    fn reflection_is_not_removed() {
        let a = pts();
        let b: Vec<Vec2> = a.iter().map(|p| Vec2::new(p.x, -p.y)).collect();
        assert!(aligned_rms(&a, &b) > 0.1);
    }

    #[test]
    fn matches_brute_force_rotation_search() {
        let a = pts();
        let b = vec![
            Vec2::new(0.1, 0.0),
            Vec2::new(0.9, 0.5),
            Vec2::new(0.0, 1.2),
            Vec2::new(-0.9, 0.2),
        ];
        let (ca, cb) = (centroid(&a), centroid(&b));
        let best = (0..200_000)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / 200_000.0;
                let s: f64 = a.iter().zip(&b).map(|(p, q)| ((*p - ca).rotated(th) - (*q - cb)).norm_squared()).sum();
                (s / 4.0).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((aligned_rms(&a, &b) - best).abs() < 1e-8);
    }
}
