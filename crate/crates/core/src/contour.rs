//! Marching-squares level contours on a 2D nodal grid.

/// A line segment of a level contour, in physical coordinates.
pub type Segment = [[f64; 2]; 2];

/// Planar nodal grid view: values at `origin + (i, j) * h`.
#[derive(Debug, Clone, Copy)]
pub struct NodalGrid<'a> {
    pub values: &'a [f64],
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: [f64; 2],
}

/// Segments of the contour `{v = level}` with "inside" meaning `v > level`.
///
/// When `allowed` is given, only squares whose four corners are allowed
/// contribute. Saddle squares are resolved with the mean of the corners.
pub fn level_contour(grid: NodalGrid<'_>, level: f64, allowed: Option<&[bool]>) -> Vec<Segment> {
    let NodalGrid {
        values,
        nx,
        ny,
        h,
        origin,
    } = grid;
    let idx = |i: usize, j: usize| i + nx * j;
    let mut out = Vec::new();
    if nx < 2 || ny < 2 {
        return out;
    }
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let corners = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            if let Some(a) = allowed {
                if corners.iter().any(|&c| !a[c]) {
                    continue;
                }
            }
            let v = corners.map(|c| values[c]);
            let inside = v.map(|x| x > level);
            let code = inside
                .iter()
                .enumerate()
                .fold(0u8, |m, (k, &b)| m | ((b as u8) << k));
            if code == 0 || code == 15 {
                continue;
            }
            let pos = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
            // edge k joins corner k and corner k+1
            let cross = |k: usize| -> [f64; 2] {
                let a = k;
                let b = (k + 1) % 4;
                let t = (level - v[a]) / (v[b] - v[a]);
                let x = pos[a][0] + t * (pos[b][0] - pos[a][0]);
                let y = pos[a][1] + t * (pos[b][1] - pos[a][1]);
                [
                    origin[0] + (i as f64 + x) * h,
                    origin[1] + (j as f64 + y) * h,
                ]
            };
            let edges: Vec<usize> = (0..4)
                .filter(|&k| inside[k] != inside[(k + 1) % 4])
                .collect();
            if edges.len() == 2 {
                out.push([cross(edges[0]), cross(edges[1])]);
            } else {
                let center_inside = (v.iter().sum::<f64>() / 4.0) > level;
                if inside[1] != center_inside {
                    // corners 1 and 3 are cut off
                    out.push([cross(0), cross(1)]);
                    out.push([cross(2), cross(3)]);
                } else {
                    out.push([cross(3), cross(0)]);
                    out.push([cross(1), cross(2)]);
                }
            }
        }
    }
    out
}

/// Area of `{v > level}` under the same piecewise-linear reading as [`level_contour`].
pub fn superlevel_area(grid: NodalGrid<'_>, level: f64) -> f64 {
    let NodalGrid {
        values, nx, ny, h, ..
    } = grid;
    if nx < 2 || ny < 2 {
        return 0.0;
    }
    let pos = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut total = 0.0;
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let v = [
                values[i + nx * j],
                values[i + 1 + nx * j],
                values[i + 1 + nx * (j + 1)],
                values[i + nx * (j + 1)],
            ];
            let inside = v.map(|x| x > level);
            let n_in = inside.iter().filter(|&&b| b).count();
            if n_in == 0 {
                continue;
            }
            if n_in == 4 {
                total += 1.0;
                continue;
            }
            let cross = |k: usize| -> [f64; 2] {
                let b = (k + 1) % 4;
                let t = (level - v[k]) / (v[b] - v[k]);
                [
                    pos[k][0] + t * (pos[b][0] - pos[k][0]),
                    pos[k][1] + t * (pos[b][1] - pos[k][1]),
                ]
            };
            let saddle = n_in == 2 && inside[0] == inside[2];
            let center_inside = (v.iter().sum::<f64>() / 4.0) > level;
            if saddle && !center_inside {
                for k in (0..4).filter(|&k| inside[k]) {
                    total += polygon_area(&[cross((k + 3) % 4), pos[k], cross(k)]);
                }
                continue;
            }
            let mut poly = Vec::with_capacity(6);
            for k in 0..4 {
                if inside[k] {
                    poly.push(pos[k]);
                }
                if inside[k] != inside[(k + 1) % 4] {
                    poly.push(cross(k));
                }
            }
            total += polygon_area(&poly);
        }
    }
    total * h * h
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let twice: f64 = (0..n)
        .map(|k| {
            let a = poly[k];
            let b = poly[(k + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    twice.abs() / 2.0
}

pub fn total_length(segments: &[Segment]) -> f64 {
    segments
        .iter()
        .map(|s| (s[1][0] - s[0][0]).hypot(s[1][1] - s[0][1]))
        .sum()
}
