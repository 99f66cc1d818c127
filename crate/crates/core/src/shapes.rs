//! Test-domain catalog and rasterization.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDomain;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub center: [f64; 2],
    pub r: f64,
}

/// Planar test shapes, centered at the origin unless stated otherwise.
///
/// Serialized as `{ "variant": "disk", "r": 1.0 }` and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ShapeSpec {
    Disk {
        r: f64,
    },
    Square {
        a: f64,
    },
    Rectangle {
        a: f64,
        b: f64,
    },
    Annulus {
        r_in: f64,
        r_out: f64,
    },
    /// Square of side `a` with the `notch x notch` upper-right corner removed.
    EllShape {
        a: f64,
        notch: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    /// Disk of radius `r` with `n_spikes` radial strips of width `spike_width`
    /// reaching out to radius `2r`.
    SpikyDisk {
        r: f64,
        n_spikes: u32,
        spike_width: f64,
    },
    DiskWithHoles {
        r: f64,
        holes: Vec<Hole>,
    },
}

/// A named catalog entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedShape {
    pub name: String,
    pub spec: ShapeSpec,
}

impl NamedShape {
    pub fn new(name: impl Into<String>, spec: ShapeSpec) -> Self {
        NamedShape {
            name: name.into(),
            spec,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn thin(width: f64, h: f64) -> Result<()> {
    if width < 3.0 * h {
        Err(Error::FeatureTooThin { width, h })
    } else {
        Ok(())
    }
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: [f64; 2], q: [f64; 2], r: [f64; 2], o: f64| {
        o == 0.0
            && r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

/// Even-odd point-in-polygon.
fn point_in_polygon(v: &[[f64; 2]], x: f64, y: f64) -> bool {
    let mut inside = false;
    let n = v.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (v[i][0], v[i][1]);
        let (xj, yj) = (v[j][0], v[j][1]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn point_on_polygon_edge(v: &[[f64; 2]], x: f64, y: f64) -> bool {
    let n = v.len();
    (0..n).any(|i| {
        let a = v[i];
        let b = v[(i + 1) % n];
        let cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        cross.abs() <= 1e-12 * len.max(1.0)
            && x >= a[0].min(b[0]) - 1e-12
            && x <= a[0].max(b[0]) + 1e-12
            && y >= a[1].min(b[1]) - 1e-12
            && y <= a[1].max(b[1]) + 1e-12
    })
}

impl ShapeSpec {
    pub fn variant_name(&self) -> &'static str {
        match self {
            ShapeSpec::Disk { .. } => "disk",
            ShapeSpec::Square { .. } => "square",
            ShapeSpec::Rectangle { .. } => "rectangle",
            ShapeSpec::Annulus { .. } => "annulus",
            ShapeSpec::EllShape { .. } => "ell_shape",
            ShapeSpec::Polygon { .. } => "polygon",
            ShapeSpec::SpikyDisk { .. } => "spiky_disk",
            ShapeSpec::DiskWithHoles { .. } => "disk_with_holes",
        }
    }

    /// Checks parameter positivity, ordering and polygon simplicity.
    pub fn validate(&self) -> Result<()> {
        match self {
            ShapeSpec::Disk { r } => positive("r", *r),
            ShapeSpec::Square { a } => positive("a", *a),
            ShapeSpec::Rectangle { a, b } => positive("a", *a).and(positive("b", *b)),
            ShapeSpec::Annulus { r_in, r_out } => {
                positive("r_in", *r_in)?;
                positive("r_out", *r_out)?;
                if r_in >= r_out {
                    return Err(Error::InvalidSpec("annulus needs r_in < r_out".into()));
                }
                Ok(())
            }
            ShapeSpec::EllShape { a, notch } => {
                positive("a", *a)?;
                positive("notch", *notch)?;
                if notch >= a {
                    return Err(Error::InvalidSpec("notch must be smaller than a".into()));
                }
                Ok(())
            }
            ShapeSpec::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(Error::InvalidSpec(
                        "polygon needs at least 3 vertices".into(),
                    ));
                }
                if vertices.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidSpec("non-finite polygon vertex".into()));
                }
                for i in 0..n {
                    for j in i + 1..n {
                        let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                        if adjacent {
                            continue;
                        }
                        if segments_cross(
                            vertices[i],
                            vertices[(i + 1) % n],
                            vertices[j],
                            vertices[(j + 1) % n],
                        ) {
                            return Err(Error::InvalidSpec(
                                "polygon edges intersect (not simple)".into(),
                            ));
                        }
                    }
                }
                let area2: f64 = (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % n];
                        a[0] * b[1] - a[1] * b[0]
                    })
                    .sum();
                if area2.abs() < 1e-14 {
                    return Err(Error::InvalidSpec("degenerate polygon".into()));
                }
                Ok(())
            }
            ShapeSpec::SpikyDisk {
                r,
                n_spikes,
                spike_width,
            } => {
                positive("r", *r)?;
                positive("spike_width", *spike_width)?;
                if *n_spikes == 0 {
                    return Err(Error::InvalidSpec("n_spikes must be positive".into()));
                }
                Ok(())
            }
            ShapeSpec::DiskWithHoles { r, holes } => {
                positive("r", *r)?;
                for (i, hole) in holes.iter().enumerate() {
                    positive("hole r", hole.r)?;
                    let c = hole.center[0].hypot(hole.center[1]);
                    if c + hole.r >= *r {
                        return Err(Error::InvalidSpec(format!(
                            "hole {i} touches the outer circle"
                        )));
                    }
                    for other in &holes[i + 1..] {
                        let d = (hole.center[0] - other.center[0])
                            .hypot(hole.center[1] - other.center[1]);
                        if d <= hole.r + other.r {
                            return Err(Error::InvalidSpec(format!(
                                "hole {i} overlaps another hole"
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    fn check_features(&self, h: f64) -> Result<()> {
        match self {
            ShapeSpec::Disk { r } => thin(2.0 * r, h),
            ShapeSpec::Square { a } => thin(*a, h),
            ShapeSpec::Rectangle { a, b } => thin(a.min(*b), h),
            ShapeSpec::Annulus { r_in, r_out } => thin(r_out - r_in, h),
            ShapeSpec::EllShape { a, notch } => thin(a - notch, h),
            ShapeSpec::Polygon { .. } => Ok(()),
            ShapeSpec::SpikyDisk { r, spike_width, .. } => thin(*spike_width, h).and(thin(*r, h)),
            ShapeSpec::DiskWithHoles { r, holes } => {
                for hole in holes {
                    thin(2.0 * hole.r, h)?;
                    let c = hole.center[0].hypot(hole.center[1]);
                    thin(r - c - hole.r, h)?;
                }
                for (i, a) in holes.iter().enumerate() {
                    for b in &holes[i + 1..] {
                        let d = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]);
                        thin(d - a.r - b.r, h)?;
                    }
                }
                Ok(())
            }
        }
    }

    /// Axis-aligned bounding box `[xmin, ymin], [xmax, ymax]`.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            ShapeSpec::Disk { r } | ShapeSpec::DiskWithHoles { r, .. } => ([-r, -r], [*r, *r]),
            ShapeSpec::Square { a } | ShapeSpec::EllShape { a, .. } => {
                ([-a / 2.0, -a / 2.0], [a / 2.0, a / 2.0])
            }
            ShapeSpec::Rectangle { a, b } => ([-a / 2.0, -b / 2.0], [a / 2.0, b / 2.0]),
            ShapeSpec::Annulus { r_out, .. } => ([-r_out, -r_out], [*r_out, *r_out]),
            ShapeSpec::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for a in 0..2 {
                        lo[a] = lo[a].min(v[a]);
                        hi[a] = hi[a].max(v[a]);
                    }
                }
                (lo, hi)
            }
            ShapeSpec::SpikyDisk { r, .. } => ([-2.0 * r, -2.0 * r], [2.0 * r, 2.0 * r]),
        }
    }

    /// Open-set membership test for a point.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let r2 = x * x + y * y;
        match self {
            ShapeSpec::Disk { r } => r2 < r * r,
            ShapeSpec::Square { a } => x.abs() < a / 2.0 && y.abs() < a / 2.0,
            ShapeSpec::Rectangle { a, b } => x.abs() < a / 2.0 && y.abs() < b / 2.0,
            ShapeSpec::Annulus { r_in, r_out } => r2 > r_in * r_in && r2 < r_out * r_out,
            ShapeSpec::EllShape { a, notch } => {
                let half = a / 2.0;
                x.abs() < half && y.abs() < half && !(x >= half - notch && y >= half - notch)
            }
            ShapeSpec::Polygon { vertices } => {
                point_in_polygon(vertices, x, y) && !point_on_polygon_edge(vertices, x, y)
            }
            ShapeSpec::SpikyDisk {
                r,
                n_spikes,
                spike_width,
            } => {
                if r2 < r * r {
                    return true;
                }
                (0..*n_spikes).any(|k| {
                    let th = 2.0 * PI * k as f64 / *n_spikes as f64;
                    let (s, c) = th.sin_cos();
                    let along = x * c + y * s;
                    let across = -x * s + y * c;
                    along > 0.0 && along < 2.0 * r && across.abs() < spike_width / 2.0
                })
            }
            ShapeSpec::DiskWithHoles { r, holes } => {
                r2 < r * r
                    && holes.iter().all(|hole| {
                        (x - hole.center[0]).powi(2) + (y - hole.center[1]).powi(2)
                            > hole.r * hole.r
                    })
            }
        }
    }

    /// The same shape dilated by `t` about the origin.
    pub fn scaled(&self, t: f64) -> ShapeSpec {
        match self {
            ShapeSpec::Disk { r } => ShapeSpec::Disk { r: r * t },
            ShapeSpec::Square { a } => ShapeSpec::Square { a: a * t },
            ShapeSpec::Rectangle { a, b } => ShapeSpec::Rectangle { a: a * t, b: b * t },
            ShapeSpec::Annulus { r_in, r_out } => ShapeSpec::Annulus {
                r_in: r_in * t,
                r_out: r_out * t,
            },
            ShapeSpec::EllShape { a, notch } => ShapeSpec::EllShape {
                a: a * t,
                notch: notch * t,
            },
            ShapeSpec::Polygon { vertices } => ShapeSpec::Polygon {
                vertices: vertices.iter().map(|v| [v[0] * t, v[1] * t]).collect(),
            },
            ShapeSpec::SpikyDisk {
                r,
                n_spikes,
                spike_width,
            } => ShapeSpec::SpikyDisk {
                r: r * t,
                n_spikes: *n_spikes,
                spike_width: spike_width * t,
            },
            ShapeSpec::DiskWithHoles { r, holes } => ShapeSpec::DiskWithHoles {
                r: r * t,
                holes: holes
                    .iter()
                    .map(|h| Hole {
                        center: [h.center[0] * t, h.center[1] * t],
                        r: h.r * t,
                    })
                    .collect(),
            },
        }
    }

    /// Coordinate negated by a reflection symmetry of the shape: `Some(0)` for
    /// x -> -x, `Some(1)` for y -> -y.
    pub fn symmetry_axis(&self) -> Option<usize> {
        const TOL: f64 = 1e-12;
        match self {
            ShapeSpec::Disk { .. }
            | ShapeSpec::Square { .. }
            | ShapeSpec::Rectangle { .. }
            | ShapeSpec::Annulus { .. } => Some(0),
            ShapeSpec::EllShape { .. } => None,
            // spike k at angle 2πk/n mirrors to angle -2πk/n
            ShapeSpec::SpikyDisk { .. } => Some(1),
            ShapeSpec::DiskWithHoles { holes, .. } => {
                for axis in 0..2 {
                    let mirrored = holes.iter().all(|a| {
                        holes.iter().any(|b| {
                            let mut m = a.center;
                            m[axis] = -m[axis];
                            (m[0] - b.center[0]).abs() < TOL
                                && (m[1] - b.center[1]).abs() < TOL
                                && (a.r - b.r).abs() < TOL
                        })
                    });
                    if mirrored {
                        return Some(axis);
                    }
                }
                None
            }
            ShapeSpec::Polygon { vertices } => {
                for axis in 0..2 {
                    let mirrored = vertices.iter().all(|a| {
                        vertices.iter().any(|b| {
                            let mut m = *a;
                            m[axis] = -m[axis];
                            (m[0] - b[0]).abs() < TOL && (m[1] - b[1]).abs() < TOL
                        })
                    });
                    if mirrored {
                        return Some(axis);
                    }
                }
                None
            }
        }
    }

    /// Short human-readable parameter listing.
    pub fn describe(&self) -> String {
        match self {
            ShapeSpec::Disk { r } => format!("disk(r={r})"),
            ShapeSpec::Square { a } => format!("square(a={a})"),
            ShapeSpec::Rectangle { a, b } => format!("rectangle(a={a}, b={b})"),
            ShapeSpec::Annulus { r_in, r_out } => format!("annulus(r_in={r_in}, r_out={r_out})"),
            ShapeSpec::EllShape { a, notch } => format!("ell_shape(a={a}, notch={notch})"),
            ShapeSpec::Polygon { vertices } => format!("polygon({} vertices)", vertices.len()),
            ShapeSpec::SpikyDisk {
                r,
                n_spikes,
                spike_width,
            } => {
                format!("spiky_disk(r={r}, n_spikes={n_spikes}, spike_width={spike_width})")
            }
            ShapeSpec::DiskWithHoles { r, holes } => {
                let hs: Vec<String> = holes
                    .iter()
                    .map(|h| format!("({}, {}; {})", h.center[0], h.center[1], h.r))
                    .collect();
                format!("disk_with_holes(r={r}, holes=[{}])", hs.join(", "))
            }
        }
    }
}

/// Rasterizes `spec` on the lattice `h * Z^2` by cell-center inclusion.
pub fn rasterize_shape(spec: &ShapeSpec, h: f64) -> Result<GridDomain> {
    spec.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidDomain(format!(
            "spacing must be positive, got {h}"
        )));
    }
    spec.check_features(h)?;
    let (lo, hi) = spec.bounding_box();
    GridDomain::from_predicate(2, h, [lo[0], lo[1], 0.0], [hi[0], hi[1], 0.0], |x| {
        spec.contains(x[0], x[1])
    })
}

/// Built-in shapes, in stable order. The first eight form the standard suite.
pub fn builtin_catalog() -> Vec<NamedShape> {
    vec![
        NamedShape::new("disk", ShapeSpec::Disk { r: 1.0 }),
        NamedShape::new("square", ShapeSpec::Square { a: 1.0 }),
        NamedShape::new("rectangle", ShapeSpec::Rectangle { a: 2.0, b: 1.0 }),
        NamedShape::new(
            "annulus",
            ShapeSpec::Annulus {
                r_in: 0.5,
                r_out: 1.0,
            },
        ),
        NamedShape::new("ell_shape", ShapeSpec::EllShape { a: 1.0, notch: 0.5 }),
        NamedShape::new(
            "disk_one_hole",
            ShapeSpec::DiskWithHoles {
                r: 1.0,
                holes: vec![Hole {
                    center: [0.4, 0.0],
                    r: 0.25,
                }],
            },
        ),
        NamedShape::new(
            "disk_two_holes",
            ShapeSpec::DiskWithHoles {
                r: 1.0,
                holes: vec![
                    Hole {
                        center: [-0.45, 0.0],
                        r: 0.2,
                    },
                    Hole {
                        center: [0.45, 0.0],
                        r: 0.2,
                    },
                ],
            },
        ),
        NamedShape::new(
            "spiky_disk",
            ShapeSpec::SpikyDisk {
                r: 0.6,
                n_spikes: 6,
                spike_width: 0.1,
            },
        ),
        NamedShape::new(
            "hexagon",
            ShapeSpec::Polygon {
                vertices: (0..6)
                    .map(|k| {
                        let t = PI / 3.0 * k as f64;
                        [0.6 * t.cos(), 0.6 * t.sin()]
                    })
                    .collect(),
            },
        ),
    ]
}

pub fn standard_catalog() -> Vec<NamedShape> {
    builtin_catalog().into_iter().take(8).collect()
}

pub fn find_builtin(name: &str) -> Option<NamedShape> {
    builtin_catalog().into_iter().find(|s| s.name == name)
}
