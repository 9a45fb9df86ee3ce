//! Analytic railway scene made of boxes, vertical cylinders and spheres.

use alloc::vec::Vec;

use rand::Rng;

use crate::geom::Vec3;
use crate::ClassId;

const EPS: f64 = 1e-9;

/// Terrain height below the LiDAR origin.
pub const GROUND_Z: f64 = -2.0;
const TRACKBED_HEIGHT: f64 = 0.3;
const RAIL_HEIGHT: f64 = 0.172;
const RAIL_WIDTH: f64 = 0.072;
const GAUGE: f64 = 1.435;
/// Lateral position of the neighbouring track's center line.
const SECOND_TRACK_Y: f64 = 4.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Box { min: Vec3, max: Vec3 },
    /// Axis along z.
    Cylinder { x: f64, y: f64, radius: f64, z0: f64, z1: f64 },
    Sphere { center: Vec3, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub shape: Shape,
    pub class: ClassId,
}

impl Shape {
    /// Smallest ray parameter `t > EPS` at which `o + t d` enters the shape.
    pub fn intersect(&self, o: Vec3, d: Vec3) -> Option<f64> {
        match *self {
            Shape::Box { min, max } => {
                let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
                for a in 0..3 {
                    if d[a] == 0.0 {
                        if o[a] < min[a] || o[a] > max[a] {
                            return None;
                        }
                        continue;
                    }
                    let inv = 1.0 / d[a];
                    let (mut ta, mut tb) = ((min[a] - o[a]) * inv, (max[a] - o[a]) * inv);
                    if ta > tb {
                        core::mem::swap(&mut ta, &mut tb);
                    }
                    t0 = t0.max(ta);
                    t1 = t1.min(tb);
                    if t0 > t1 {
                        return None;
                    }
                }
                (t0 > EPS).then_some(t0)
            }
            Shape::Cylinder { x, y, radius, z0, z1 } => {
                let (ox, oy) = (o[0] - x, o[1] - y);
                let a = d[0] * d[0] + d[1] * d[1];
                if a == 0.0 {
                    return None;
                }
                let b = ox * d[0] + oy * d[1];
                let c = ox * ox + oy * oy - radius * radius;
                let disc = b * b - a * c;
                if disc < 0.0 {
                    return None;
                }
                let t = (-b - libm::sqrt(disc)) / a;
                let z = o[2] + t * d[2];
                (t > EPS && (z0..=z1).contains(&z)).then_some(t)
            }
            Shape::Sphere { center, radius } => {
                let oc = crate::geom::sub(o, center);
                let a = crate::geom::dot(d, d);
                let b = crate::geom::dot(oc, d);
                let c = crate::geom::dot(oc, oc) - radius * radius;
                let disc = b * b - a * c;
                if disc < 0.0 {
                    return None;
                }
                let t = (-b - libm::sqrt(disc)) / a;
                (t > EPS).then_some(t)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub primitives: Vec<Primitive>,
}

impl Scene {
    /// Nearest surface hit along the ray within `t_max`.
    pub fn cast(&self, o: Vec3, d: Vec3, t_max: f64) -> Option<(f64, ClassId)> {
        let mut best: Option<(f64, ClassId)> = None;
        for p in &self.primitives {
            if let Some(t) = p.shape.intersect(o, d) {
                if t <= t_max && best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, p.class));
                }
            }
        }
        best
    }

    /// Railway scene: two tracks on a ballast bed, a train on the
    /// neighbouring track, catenary poles, a signal, a person, buildings, a
    /// platform, trees and open terrain, with a distant backdrop that only
    /// the camera reaches.
    pub fn railway<R: Rng>(extent: f64, rng: &mut R) -> Scene {
        let mut prims = Vec::new();
        let mut push = |shape: Shape, class: ClassId| prims.push(Primitive { shape, class });
        let g = GROUND_Z;
        let bed = g + TRACKBED_HEIGHT;
        let e = extent;

        push(
            Shape::Box {
                min: [-e, -e, g - 1.0],
                max: [e, e, g],
            },
            ClassId::TERRAIN,
        );
        push(
            Shape::Box {
                min: [-e, -2.4, g - 1.0],
                max: [e, SECOND_TRACK_Y + 2.4, bed],
            },
            ClassId::TRACKBED,
        );
        for center in [0.0, SECOND_TRACK_Y] {
            for side in [-1.0, 1.0] {
                let y = center + side * (GAUGE + RAIL_WIDTH) / 2.0;
                push(
                    Shape::Box {
                        min: [-e, y - RAIL_WIDTH / 2.0, bed],
                        max: [e, y + RAIL_WIDTH / 2.0, bed + RAIL_HEIGHT],
                    },
                    ClassId::RAIL_TRACK,
                );
            }
        }

        let train_start = rng.gen_range(18.0..26.0);
        push(
            Shape::Box {
                min: [train_start, SECOND_TRACK_Y - 1.45, bed + RAIL_HEIGHT + 0.5],
                max: [train_start + 45.0, SECOND_TRACK_Y + 1.45, bed + RAIL_HEIGHT + 4.2],
            },
            ClassId::ON_TRACKS,
        );

        let pole_y = -3.4;
        let mut x = rng.gen_range(6.0..10.0);
        while x < 70.0 {
            push(
                Shape::Cylinder {
                    x,
                    y: pole_y,
                    radius: 0.15,
                    z0: g,
                    z1: g + 7.5,
                },
                ClassId::POLE,
            );
            x += rng.gen_range(22.0..28.0);
        }

        let sign_x = rng.gen_range(16.0..20.0);
        push(
            Shape::Cylinder {
                x: sign_x,
                y: -2.9,
                radius: 0.06,
                z0: g,
                z1: g + 2.6,
            },
            ClassId::POLE,
        );
        push(
            Shape::Box {
                min: [sign_x - 0.03, -3.4, g + 2.6],
                max: [sign_x + 0.03, -2.4, g + 3.6],
            },
            ClassId::SIGN,
        );

        let person_x = rng.gen_range(11.0..15.0);
        let person_y = rng.gen_range(-4.8..-4.2);
        push(
            Shape::Box {
                min: [person_x - 0.25, person_y - 0.25, g],
                max: [person_x + 0.25, person_y + 0.25, g + 1.8],
            },
            ClassId::PERSON,
        );

        push(
            Shape::Box {
                min: [rng.gen_range(28.0..34.0), -26.0, g],
                max: [52.0, -16.0, g + 8.0],
            },
            ClassId::CONSTRUCTION,
        );
        push(
            Shape::Box {
                min: [-12.0, SECOND_TRACK_Y + 3.0, g],
                max: [16.0, SECOND_TRACK_Y + 5.5, g + 0.9],
            },
            ClassId::CONSTRUCTION,
        );

        for (y_lo, y_hi, n) in [(-15.0, -7.0, 14), (SECOND_TRACK_Y + 8.0, 24.0, 14)] {
            for _ in 0..n {
                let r = rng.gen_range(1.5..3.2);
                let cx = rng.gen_range(-35.0..75.0);
                let cy = rng.gen_range(y_lo..y_hi);
                push(
                    Shape::Sphere {
                        center: [cx, cy, g + 1.2 + r],
                        radius: r,
                    },
                    ClassId::VEGETATION,
                );
            }
        }

        push(
            Shape::Box {
                min: [1.5 * e, -3.0 * e, g - 1.0],
                max: [1.5 * e + 1.0, 3.0 * e, g + 40.0],
            },
            ClassId::BACKGROUND,
        );

        Scene { primitives: prims }
    }
}
