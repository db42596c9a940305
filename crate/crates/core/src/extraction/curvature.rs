//! Bend detection along polylines and splitting into straight-like segments.

use std::f64::consts::PI;

use crate::model::Point2;

/// Unsigned angle `∠abc` at `b`, in `[0, π]`. Degenerate arms give `π`.
pub(crate) fn angle_at(a: Point2, b: Point2, c: Point2) -> f64 {
    let u = a.sub(b);
    let v = c.sub(b);
    if u.norm() == 0.0 || v.norm() == 0.0 {
        return PI;
    }
    let cross = u.x * v.y - u.y * v.x;
    let dot = u.x * v.x + u.y * v.y;
    cross.abs().atan2(dot)
}

/// Resamples an open polyline at uniform arc-length spacing `step`.
/// The first and last points are always kept.
pub fn resample_uniform(points: &[Point2], step: f64) -> Vec<Point2> {
    if points.len() < 2 || !(step > 0.0) {
        return points.to_vec();
    }
    let mut out = vec![points[0]];
    let mut carried = 0.0; // arc length since the last emitted sample
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = a.dist(b);
        if len == 0.0 {
            continue;
        }
        let mut t = step - carried;
        while t <= len {
            let f = t / len;
            out.push(Point2::new(a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f));
            t += step;
        }
        carried = len - (t - step);
    }
    let last = *points.last().unwrap();
    match out.last() {
        Some(p) if p.dist(last) < 0.5 * step && out.len() > 1 => {
            *out.last_mut().unwrap() = last;
        }
        _ => out.push(last),
    }
    out.dedup();
    out
}

/// Subdivides every edge longer than `step` into equal pieces, keeping the
/// original vertices so polygon corners remain samples.
pub fn densify(points: &[Point2], step: f64) -> Vec<Point2> {
    if points.len() < 2 || !(step > 0.0) {
        return points.to_vec();
    }
    let mut out = vec![points[0]];
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pieces = (a.dist(b) / step).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            let f = k as f64 / pieces as f64;
            out.push(Point2::new(a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f));
        }
    }
    out.dedup();
    out
}

/// Brings a polyline to roughly `step` spacing: dense traces are resampled,
/// sparse vertex lists are subdivided with their vertices kept.
pub fn regularize(points: &[Point2], step: f64) -> Vec<Point2> {
    if points.len() < 2 {
        return points.to_vec();
    }
    let length: f64 = points.windows(2).map(|w| w[0].dist(w[1])).sum();
    let mean = length / (points.len() - 1) as f64;
    if mean < step {
        resample_uniform(points, step)
    } else {
        densify(points, step)
    }
}

fn gaussian_weights(count: usize, sigma: f64) -> Vec<f64> {
    let w: Vec<f64> = (1..=count)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Weighted deviation from a straight angle at every sample.
///
/// At sample `c` the angles `∠p[c-i] p[c] p[c+i]` for `i = 1..=m` are turned
/// into deviations `|π - angle|` and averaged with Gaussian weights. Near the
/// ends of an open polyline only the available offsets are used, with the
/// weights renormalized; the end samples themselves get zero.
pub fn bend_profile(points: &[Point2], scale_m: usize, sigma: f64, closed: bool) -> Vec<f64> {
    let n = points.len();
    let mut out = vec![0.0; n];
    if n < 3 {
        return out;
    }
    let full = gaussian_weights(scale_m, sigma);
    let mut partial: Vec<Vec<f64>> = Vec::new();
    for c in 0..n {
        let reach = if closed {
            scale_m.min((n - 1) / 2)
        } else {
            scale_m.min(c).min(n - 1 - c)
        };
        if reach == 0 {
            continue;
        }
        let weights = if reach == scale_m {
            &full
        } else {
            if partial.len() < reach {
                partial.resize(reach, Vec::new());
            }
            if partial[reach - 1].is_empty() {
                partial[reach - 1] = gaussian_weights(reach, sigma);
            }
            &partial[reach - 1]
        };
        let mut k = 0.0;
        for i in 1..=reach {
            let (before, after) = if closed {
                ((c + n - i) % n, (c + i) % n)
            } else {
                (c - i, c + i)
            };
            let dev = (PI - angle_at(points[before], points[c], points[after])).abs();
            k += weights[i - 1] * dev;
        }
        out[c] = k;
    }
    out
}

const PLATEAU_EPS: f64 = 1e-9;

/// Indices of local maxima of `profile` above `threshold`.
///
/// A maximum is a run of equal values (within 1e-9) whose neighbours on both
/// sides are strictly lower; the middle of the run is reported. For an open
/// profile the end samples are never maxima. A closed profile wraps around and
/// a constant closed profile has no maxima.
pub fn local_maxima(profile: &[f64], threshold: f64, closed: bool) -> Vec<usize> {
    let n = profile.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    let same = |a: f64, b: f64| (a - b).abs() <= PLATEAU_EPS;
    if closed {
        if profile.iter().all(|&v| same(v, profile[0])) {
            return out;
        }
        // Start scanning just after a strict drop so no run straddles the seam.
        let start = (0..n)
            .find(|&i| !same(profile[i], profile[(i + n - 1) % n]))
            .unwrap_or(0);
        let mut k = 0;
        while k < n {
            let s = (start + k) % n;
            let mut len = 1;
            while len < n && same(profile[(s + len) % n], profile[s]) {
                len += 1;
            }
            let before = profile[(s + n - 1) % n];
            let after = profile[(s + len) % n];
            if profile[s] > before && profile[s] > after && profile[s] > threshold {
                out.push((s + (len - 1) / 2) % n);
            }
            k += len;
        }
        out.sort_unstable();
        return out;
    }
    let mut s = 1;
    while s < n - 1 {
        let mut e = s;
        while e + 1 < n - 1 && same(profile[e + 1], profile[s]) {
            e += 1;
        }
        if profile[s] > profile[s - 1] && profile[s] > profile[e + 1] && profile[s] > threshold {
            out.push(s + (e - s) / 2);
        }
        s = e + 1;
    }
    out
}

/// Splits a polyline at bend points into straight-like pieces that share
/// their split points. Fewer than three points are returned unsplit.
pub fn curvature_split(
    polyline: &[Point2],
    scale_m: usize,
    sigma: f64,
    split_threshold: f64,
) -> Vec<Vec<Point2>> {
    if polyline.len() < 3 {
        return vec![polyline.to_vec()];
    }
    let profile = bend_profile(polyline, scale_m, sigma, false);
    let cuts = local_maxima(&profile, split_threshold, false);
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut from = 0;
    for c in cuts {
        out.push(polyline[from..=c].to_vec());
        from = c;
    }
    out.push(polyline[from..].to_vec());
    out
}
