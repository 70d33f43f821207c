//! Marching-squares extraction of the zero level set as polylines.

use std::collections::HashMap;

use super::LevelSetField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// One connected piece of the zero level set. Closed chains do not repeat
/// their first point at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Contour {
    pub fn length(&self) -> f64 {
        let seg = |a: &Point, b: &Point| (a.x - b.x).hypot(a.y - b.y);
        let open: f64 = self.points.windows(2).map(|p| seg(&p[0], &p[1])).sum();
        match (self.closed, self.points.first(), self.points.last()) {
            (true, Some(first), Some(last)) => open + seg(last, first),
            _ => open,
        }
    }
}

/// Grid edge carrying a crossing: horizontal edges join `(x, y)-(x+1, y)`,
/// vertical edges join `(x, y)-(x, y+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

fn edge_point(phi: &LevelSetField, e: Edge) -> Point {
    let (x0, y0, x1, y1) = match e {
        Edge::H(x, y) => (x, y, x + 1, y),
        Edge::V(x, y) => (x, y, x, y + 1),
    };
    let (a, b) = (phi.get(x0, y0), phi.get(x1, y1));
    let t = a / (a - b);
    Point {
        x: x0 as f64 + t * (x1 as f64 - x0 as f64),
        y: y0 as f64 + t * (y1 as f64 - y0 as f64),
    }
}

fn cell_segments(phi: &LevelSetField, x: usize, y: usize, out: &mut Vec<(Edge, Edge)>) {
    let v = [
        phi.get(x, y),
        phi.get(x + 1, y),
        phi.get(x + 1, y + 1),
        phi.get(x, y + 1),
    ];
    let ins = v.map(|p| p < 0.0);
    let top = Edge::H(x, y);
    let right = Edge::V(x + 1, y);
    let bottom = Edge::H(x, y + 1);
    let left = Edge::V(x, y);

    // Saddles: diagonal corners share a side. The cell-center average picks
    // which pair of corners is connected.
    if ins[0] == ins[2] && ins[1] == ins[3] && ins[0] != ins[1] {
        let center_inside = (v[0] + v[1] + v[2] + v[3]) < 0.0;
        if center_inside == ins[0] {
            // corners 0 and 2 connected through the center: cut off 1 and 3
            out.push((top, right));
            out.push((bottom, left));
        } else {
            out.push((left, top));
            out.push((right, bottom));
        }
        return;
    }

    let mut crossed = Vec::with_capacity(2);
    if ins[0] != ins[1] {
        crossed.push(top);
    }
    if ins[1] != ins[2] {
        crossed.push(right);
    }
    if ins[3] != ins[2] {
        crossed.push(bottom);
    }
    if ins[0] != ins[3] {
        crossed.push(left);
    }
    if let [a, b] = crossed[..] {
        out.push((a, b));
    }
}

/// Zero level set of `phi` as chains of linearly interpolated points.
/// Returns an empty list when `phi` has no sign change.
pub fn extract_zero_contour(phi: &LevelSetField) -> Vec<Contour> {
    let (w, h) = phi.dims();
    let mut segments = Vec::new();
    for y in 0..h - 1 {
        for x in 0..w - 1 {
            cell_segments(phi, x, y, &mut segments);
        }
    }

    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (i, &(a, b)) in segments.iter().enumerate() {
        by_edge.entry(a).or_default().push(i);
        by_edge.entry(b).or_default().push(i);
    }

    let other_end = |seg: usize, from: Edge| {
        let (a, b) = segments[seg];
        if a == from {
            b
        } else {
            a
        }
    };
    let next_segment = |used: &[bool], at: Edge| by_edge[&at].iter().copied().find(|&s| !used[s]);

    let mut used = vec![false; segments.len()];
    let mut contours = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, mut tail) = segments[start];
        let mut chain = vec![first, tail];
        let mut closed = false;
        while let Some(s) = next_segment(&used, tail) {
            used[s] = true;
            tail = other_end(s, tail);
            if tail == first {
                closed = true;
                break;
            }
            chain.push(tail);
        }
        if !closed {
            let mut head = first;
            let mut prefix = Vec::new();
            while let Some(s) = next_segment(&used, head) {
                used[s] = true;
                head = other_end(s, head);
                prefix.push(head);
            }
            prefix.reverse();
            prefix.extend(chain);
            chain = prefix;
        }
        contours.push(Contour {
            points: chain.into_iter().map(|e| edge_point(phi, e)).collect(),
            closed,
        });
    }
    contours
}
