//! Exact Euclidean distance transform (Felzenszwalb–Huttenlocher lower envelope).

const FAR: f64 = 1e30;

/// 1D squared distance transform of `f` into `d`, using scratch buffers.
fn transform_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s =
                ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                // k == 0 and the new parabola dominates everywhere
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let dq = q as f64 - v[k] as f64;
        d[q] = dq * dq + f[v[k]];
    }
}

/// Squared distance, in cell units, from every cell to the nearest source cell.
///
/// Returns values `>= 1e30` when there is no source at all.
pub fn squared_distance(sources: &[bool], shape: [usize; 3]) -> Vec<f64> {
    let mut g: Vec<f64> = sources.iter().map(|&s| if s { 0.0 } else { FAR }).collect();
    let nmax = shape.iter().copied().max().unwrap_or(1);
    let mut f = vec![0.0; nmax];
    let mut d = vec![0.0; nmax];
    let mut v = vec![0usize; nmax];
    let mut z = vec![0.0; nmax + 1];
    let strides = [1, shape[0], shape[0] * shape[1]];
    for axis in 0..3 {
        let n = shape[axis];
        if n <= 1 {
            continue;
        }
        let s = strides[axis];
        for start in 0..g.len() {
            // visit each line once, from its first cell
            if (start / s) % n != 0 {
                continue;
            }
            for q in 0..n {
                f[q] = g[start + q * s];
            }
            transform_1d(&f[..n], &mut d[..n], &mut v[..n], &mut z[..n + 1]);
            for q in 0..n {
                g[start + q * s] = d[q].min(FAR);
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(sources: &[bool], shape: [usize; 3]) -> Vec<f64> {
        let n = sources.len();
        let coord = |i: usize| {
            [
                i % shape[0],
                (i / shape[0]) % shape[1],
                i / (shape[0] * shape[1]),
            ]
        };
        (0..n)
            .map(|i| {
                let a = coord(i);
                (0..n)
                    .filter(|&j| sources[j])
                    .map(|j| {
                        let b = coord(j);
                        (0..3)
                            .map(|k| (a[k] as f64 - b[k] as f64).powi(2))
                            .sum::<f64>()
                    })
                    .fold(FAR, f64::min)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn matches_brute_force_2d(nx in 1usize..12, ny in 1usize..12, bits in proptest::collection::vec(any::<u8>(), 144)) {
            let shape = [nx, ny, 1];
            let src: Vec<bool> = (0..nx * ny).map(|i| bits[i] % 5 == 0).collect();
            let fast = squared_distance(&src, shape);
            let slow = brute(&src, shape);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() < 1e-9 || (*a >= FAR && *b >= FAR));
            }
        }

        #[test]
        fn matches_brute_force_3d(n in 1usize..6, bits in proptest::collection::vec(any::<u8>(), 216)) {
            let shape = [n, n + 1, n];
            let len = n * (n + 1) * n;
            let src: Vec<bool> = (0..len).map(|i| bits[i] % 7 == 0).collect();
            let fast = squared_distance(&src, shape);
            let slow = brute(&src, shape);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() < 1e-9 || (*a >= FAR && *b >= FAR));
            }
        }
    }
}
