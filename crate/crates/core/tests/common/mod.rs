#![allow(dead_code)]

use actgram::trajectory::Point3;
use actgram::Vec3;
use nalgebra::{Quaternion, Rotation3, UnitQuaternion};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn pts(coords: &[[f64; 3]]) -> Vec<Point3> {
    coords
        .iter()
        .enumerate()
        .map(|(i, c)| Point3::new(i as f64 * 0.01, c[0], c[1], c[2]))
        .collect()
}

pub fn from_positions(positions: &[Vec3]) -> Vec<Point3> {
    positions
        .iter()
        .enumerate()
        .map(|(i, p)| Point3::at(i as f64 * 0.01, *p))
        .collect()
}

/// Random walk whose steps are uniform in a cube, rejecting tiny ones.
pub fn random_walk<R: Rng>(rng: &mut R, n: usize) -> Vec<Point3> {
    let mut p = Vec3::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
    );
    let mut out = vec![p];
    while out.len() < n {
        let step = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if step.norm() < 0.1 {
            continue;
        }
        p += step;
        out.push(p);
    }
    from_positions(&out)
}

/// Haar-uniform rotation from a normalized Gaussian quaternion.
pub fn random_rotation<R: Rng>(rng: &mut R) -> Rotation3<f64> {
    let q = Quaternion::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    UnitQuaternion::from_quaternion(q).to_rotation_matrix()
}

pub fn transform(points: &[Point3], rot: &Rotation3<f64>, shift: Vec3, scale: f64) -> Vec<Point3> {
    points
        .iter()
        .map(|p| Point3::at(p.t, rot * p.position() * scale + shift))
        .collect()
}

/// Independent check of a right-handed orthonormal triad: worst deviation.
pub fn triad_error(t: &Vec3, n: &Vec3, b: &Vec3) -> f64 {
    let norm = |v: &Vec3| (v.x * v.x + v.y * v.y + v.z * v.z).sqrt();
    let dot = |a: &Vec3, c: &Vec3| a.x * c.x + a.y * c.y + a.z * c.z;
    let cross = Vec3::new(
        t.y * n.z - t.z * n.y,
        t.z * n.x - t.x * n.z,
        t.x * n.y - t.y * n.x,
    );
    [
        (norm(t) - 1.0).abs(),
        (norm(n) - 1.0).abs(),
        (norm(b) - 1.0).abs(),
        dot(t, n).abs(),
        dot(t, b).abs(),
        dot(n, b).abs(),
        norm(&(b - cross)),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Helix whose chord tangents lie on a cone of half-angle `cone` about z,
/// with consecutive chords `turn` radians apart. Returns the points and the
/// azimuth advance per step.
pub fn helix(cone: f64, turn: f64, radius: f64, samples: usize) -> (Vec<Point3>, f64) {
    // cos(turn) = sin^2(cone) cos(phi) + cos^2(cone)
    let s2 = cone.sin().powi(2);
    let phi = ((turn.cos() - (1.0 - s2)) / s2).acos();
    let rise = 2.0 * radius * (phi / 2.0).sin() / cone.tan();
    let positions: Vec<Vec3> = (0..samples)
        .map(|k| {
            let a = phi * k as f64;
            Vec3::new(radius * a.cos(), radius * a.sin(), rise * k as f64)
        })
        .collect();
    (from_positions(&positions), phi)
}

/// Angle between chord tangents `m` steps apart on such a helix.
pub fn helix_angle(cone: f64, phi: f64, m: usize) -> f64 {
    let s2 = cone.sin().powi(2);
    (s2 * (phi * m as f64).cos() + 1.0 - s2)
        .clamp(-1.0, 1.0)
        .acos()
}

pub const CORNERS: [[f64; 3]; 6] = [
    [0.0, 0.0, 0.0],
    [4.0, 0.0, 0.0],
    [4.0, 3.0, 0.0],
    [4.0, 3.0, 5.0],
    [1.0, 6.0, 5.0],
    [1.0, 6.0, 9.0],
];

/// `n` samples on the polyline through `CORNERS`, every corner included.
pub fn corner_path(n: usize) -> Vec<Point3> {
    let edges = CORNERS.len() - 1;
    let per_edge = (n - 1) / edges;
    let extra = (n - 1) % edges;
    let mut out = vec![Vec3::from(CORNERS[0])];
    for e in 0..edges {
        let (a, b) = (Vec3::from(CORNERS[e]), Vec3::from(CORNERS[e + 1]));
        let steps = per_edge + usize::from(e < extra);
        for s in 1..=steps {
            out.push(a + (b - a) * (s as f64 / steps as f64));
        }
    }
    from_positions(&out)
}
