//! Lattice points, nearest-neighbour edges and boxes `Q_N = c + [-N, N]^d`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// A lattice point. Coordinates beyond the dimension are zero.
pub type Site = [i32; 3];

pub fn site2(x: i32, y: i32) -> Site {
    [x, y, 0]
}

pub fn unit(k: usize) -> Site {
    let mut e = [0; 3];
    e[k] = 1;
    e
}

pub fn add(a: Site, b: Site) -> Site {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Site, b: Site) -> Site {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn l1(a: Site) -> i32 {
    a[0].abs() + a[1].abs() + a[2].abs()
}

pub fn norm2(a: Site) -> f64 {
    let s: i64 = a.iter().map(|&v| (v as i64) * (v as i64)).sum();
    (s as f64).sqrt()
}

/// Lattice neighbours of `x` in dimension `d`, ordered `+e_1, -e_1, +e_2, -e_2, ...`.
pub fn neighbours(x: Site, d: usize) -> impl Iterator<Item = Site> {
    (0..2 * d).map(move |j| {
        let mut y = x;
        if j % 2 == 0 {
            y[j / 2] += 1;
        } else {
            y[j / 2] -= 1;
        }
        y
    })
}

/// Undirected nearest-neighbour edge stored with its endpoints sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: Site,
    pub b: Site,
}

impl Edge {
    pub fn new(x: Site, y: Site) -> Result<Edge> {
        if l1(sub(x, y)) != 1 {
            return param(format!("{x:?} and {y:?} are not lattice neighbours"));
        }
        Ok(if x < y { Edge { a: x, b: y } } else { Edge { a: y, b: x } })
    }

    /// Axis of the edge.
    pub fn axis(&self) -> usize {
        (0..3).find(|&k| self.a[k] != self.b[k]).unwrap_or(0)
    }

    /// Injective 62-bit code of the edge, independent of any box.
    pub fn code(&self) -> u64 {
        const OFF: i64 = 1 << 19;
        let c = |v: i32| ((v as i64 + OFF) as u64) & ((1 << 20) - 1);
        (c(self.a[0]) << 42) | (c(self.a[1]) << 22) | (c(self.a[2]) << 2) | self.axis() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub d: usize,
    pub n: i32,
    pub center: Site,
}

impl BoxRegion {
    pub fn new(d: usize, n: i32) -> Result<BoxRegion> {
        Self::centered(d, n, [0; 3])
    }

    pub fn centered(d: usize, n: i32, center: Site) -> Result<BoxRegion> {
        if d != 2 && d != 3 {
            return param(format!("dimension {d} unsupported (2 or 3)"));
        }
        if n < 1 {
            return param(format!("box radius {n} must be positive"));
        }
        if n >= (1 << 18) {
            return param("box radius too large");
        }
        if center[d..].iter().any(|&c| c != 0) {
            return param("center has nonzero coordinates beyond the dimension");
        }
        Ok(BoxRegion { d, n, center })
    }

    pub fn side(&self) -> usize {
        (2 * self.n + 1) as usize
    }

    pub fn vertex_count(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    pub fn contains(&self, x: Site) -> bool {
        (0..self.d).all(|k| (x[k] - self.center[k]).abs() <= self.n) && x[self.d..].iter().all(|&v| v == 0)
    }

    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        other.d == self.d
            && (0..self.d)
                .all(|k| other.center[k] - other.n >= self.center[k] - self.n && other.center[k] + other.n <= self.center[k] + self.n)
    }

    /// Lexicographic index of `x` (first coordinate most significant).
    pub fn index(&self, x: Site) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let s = self.side();
        let mut idx = 0usize;
        for k in 0..self.d {
            idx = idx * s + (x[k] - self.center[k] + self.n) as usize;
        }
        Some(idx)
    }

    pub fn site(&self, mut idx: usize) -> Site {
        let s = self.side();
        let mut x = [0; 3];
        for k in (0..self.d).rev() {
            x[k] = (idx % s) as i32 - self.n + self.center[k];
            idx /= s;
        }
        x
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.vertex_count()).map(move |i| self.site(i))
    }

    /// `x` lies on the boundary `∂Q_N` (some coordinate at distance exactly N from the center).
    pub fn on_boundary(&self, x: Site) -> bool {
        self.contains(x) && (0..self.d).any(|k| (x[k] - self.center[k]).abs() == self.n)
    }

    /// Distance (in sup norm) from `x` to the complement of the box.
    pub fn depth(&self, x: Site) -> i32 {
        (0..self.d).map(|k| self.n - (x[k] - self.center[k]).abs()).min().unwrap_or(0)
    }

    /// All edges with both endpoints in the box, in lexicographic order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for x in self.sites() {
            for k in 0..self.d {
                let y = add(x, unit(k));
                if self.contains(y) {
                    out.push(Edge { a: x, b: y });
                }
            }
        }
        out
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        self.contains(e.a) && self.contains(e.b)
    }
}
