//! Grid-Dijkstra oracle for distances in the cover, independent of the
//! closed-form kernel.
//!
//! The grid lives in log-polar coordinates `(t, u = ln r)` with spacing `h`
//! in both. There the metric is conformal, `ds = e^u sqrt(dt^2 + du^2)`, so a
//! straight grid edge is a genuine curve of the cover and its length is known
//! exactly: `|v| * (e^{u_1} - e^{u_0}) / (u_1 - u_0)`. Every grid path is
//! therefore a real path and the oracle never underestimates. Edges join each
//! node to its neighbours at offsets `(a, b)` with `|a|, |b| <= 3` and
//! `gcd(a, b) = 1` (32 directions), which bounds the direction error by
//! about 1.3%.
//!
//! Distance fields can be cached on disk (see [`MeshOracle::with_cache`]).

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::kernel::Polar;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"BLMESH\0\0";
const VERSION: u32 = 1;

/// Axis-aligned window in `(t, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeshWindow {
    pub t: (f64, f64),
    pub r: (f64, f64),
}

impl MeshWindow {
    pub fn contains(&self, p: Polar) -> bool {
        self.t.0 <= p.t && p.t <= self.t.1 && self.r.0 <= p.r && p.r <= self.r.1
    }
}

/// One oracle answer. The query points are snapped to the nearest grid
/// nodes; `from`/`to` are the snapped coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct MeshDistance {
    pub value: f64,
    pub from: Polar,
    pub to: Polar,
}

impl Serialize for Polar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.t, self.r).serialize(s)
    }
}

pub struct MeshOracle {
    window: MeshWindow,
    h: f64,
    nt: usize,
    nu: usize,
    u0: f64,
    stencil: Vec<(i64, i64, f64)>,
    cache_dir: Option<PathBuf>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl MeshOracle {
    pub fn new(window: MeshWindow, h: f64) -> Result<Self> {
        if !(h > 0.0) || window.t.1 <= window.t.0 || window.r.0 < 1.0 || window.r.1 <= window.r.0 {
            return Err(Error::OracleWindow(format!("invalid window {window:?} or spacing {h}")));
        }
        let u0 = window.r.0.ln();
        let nt = ((window.t.1 - window.t.0) / h).round() as usize + 1;
        let nu = ((window.r.1.ln() - u0) / h).ceil() as usize + 1;
        if nt.saturating_mul(nu) > 40_000_000 {
            return Err(Error::OracleWindow(format!("grid of {nt} x {nu} nodes is too large")));
        }
        let mut stencil = Vec::new();
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                if (a, b) != (0, 0) && gcd(a, b) == 1 {
                    let du = b as f64 * h;
                    let growth = if b == 0 { 1.0 } else { du.exp_m1() / du };
                    stencil.push((a, b, (a as f64).hypot(b as f64) * h * growth));
                }
            }
        }
        Ok(MeshOracle { window, h, nt, nu, u0, stencil, cache_dir: None })
    }

    /// Reads `BOUNDARY_LAB_CACHE` for a cache directory.
    pub fn with_env_cache(self) -> Self {
        match std::env::var_os("BOUNDARY_LAB_CACHE") {
            Some(dir) if !dir.is_empty() => self.with_cache(PathBuf::from(dir)),
            _ => self,
        }
    }

    /// Caches distance fields under `dir`. Files hold a magic tag, a format
    /// version, the window, spacing, source node and grid size, then the
    /// field as little-endian `f64` (infinite where not settled).
    pub fn with_cache(mut self, dir: PathBuf) -> Self {
        self.cache_dir = Some(dir);
        self
    }

    pub fn node_count(&self) -> usize {
        self.nt * self.nu
    }

    /// The grid node a query at `p` snaps to.
    pub fn node_near(&self, p: Polar) -> Result<Polar> {
        Ok(self.coords(self.snap(p)?))
    }

    fn snap(&self, p: Polar) -> Result<(usize, usize)> {
        if !self.window.contains(p) {
            return Err(Error::OracleWindow(format!("({}, {}) lies outside {:?}", p.t, p.r, self.window)));
        }
        let i = ((p.t - self.window.t.0) / self.h).round() as usize;
        let j = ((p.r.ln() - self.u0) / self.h).round() as usize;
        Ok((i.min(self.nt - 1), j.min(self.nu - 1)))
    }

    fn coords(&self, (i, j): (usize, usize)) -> Polar {
        Polar { t: self.window.t.0 + i as f64 * self.h, r: (self.u0 + j as f64 * self.h).exp() }
    }

    fn cache_path(&self, source: (usize, usize)) -> Option<PathBuf> {
        let dir = self.cache_dir.as_ref()?;
        let mut hasher = Sha256::new();
        hasher.update(format!("{:?}{:e}{:?}{VERSION}", self.window, self.h, source).as_bytes());
        let digest = hasher.finalize();
        let name: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        Some(dir.join(format!("mesh-{name}.bin")))
    }

    fn header(&self, source: (usize, usize)) -> Vec<u8> {
        let mut out = Vec::with_capacity(64);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for v in [self.window.t.0, self.window.t.1, self.window.r.0, self.window.r.1, self.h] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in [source.0 as u32, source.1 as u32, self.nt as u32, self.nu as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    fn load(&self, source: (usize, usize)) -> Option<Vec<f64>> {
        let path = self.cache_path(source)?;
        let mut bytes = Vec::new();
        fs::File::open(path).ok()?.read_to_end(&mut bytes).ok()?;
        let header = self.header(source);
        if bytes.len() != header.len() + 8 * self.node_count() || bytes[..header.len()] != header[..] {
            return None;
        }
        Some(
            bytes[header.len()..]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect(),
        )
    }

    fn store(&self, source: (usize, usize), field: &[f64]) {
        let Some(path) = self.cache_path(source) else { return };
        let mut bytes = self.header(source);
        bytes.reserve(8 * field.len());
        for v in field {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        // A failed cache write only costs a recomputation later.
        if let Some(dir) = path.parent() {
            let _ = fs::create_dir_all(dir);
        }
        if let Ok(mut f) = fs::File::create(&path) {
            let _ = f.write_all(&bytes);
        }
    }

    /// Dijkstra from `source`, stopping once every target is settled.
    fn field(&self, source: (usize, usize), targets: &[(usize, usize)]) -> (Vec<f64>, Vec<u8>) {
        let n = self.node_count();
        let idx = |(i, j): (usize, usize)| j * self.nt + i;
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![u8::MAX; n];
        let mut done = vec![false; n];
        let mut remaining: Vec<usize> = targets.iter().map(|&t| idx(t)).collect();
        remaining.sort_unstable();
        remaining.dedup();
        let row_scale: Vec<f64> = (0..self.nu).map(|j| (self.u0 + j as f64 * self.h).exp()).collect();
        let mut heap = BinaryHeap::new();
        let s = idx(source);
        dist[s] = 0.0;
        heap.push(Reverse((0u64, s as u32)));
        while let Some(Reverse((key, v))) = heap.pop() {
            let v = v as usize;
            if done[v] || f64::from_bits(key) > dist[v] {
                continue;
            }
            done[v] = true;
            if let Ok(k) = remaining.binary_search(&v) {
                remaining.remove(k);
                if remaining.is_empty() {
                    break;
                }
            }
            let (i, j) = ((v % self.nt) as i64, (v / self.nt) as i64);
            for (k, &(a, b, w)) in self.stencil.iter().enumerate() {
                let (ni, nj) = (i + a, j + b);
                if ni < 0 || nj < 0 || ni >= self.nt as i64 || nj >= self.nu as i64 {
                    continue;
                }
                let u = nj as usize * self.nt + ni as usize;
                if done[u] {
                    continue;
                }
                let cand = dist[v] + w * row_scale[j as usize];
                if cand < dist[u] {
                    dist[u] = cand;
                    pred[u] = k as u8;
                    heap.push(Reverse((cand.to_bits(), u as u32)));
                }
            }
        }
        (dist, pred)
    }

    /// Whether the grid path into `target` runs along the outer window edge
    /// (anywhere except the inner circle row), which means the window may
    /// have cut off a shorter path.
    fn touches_window(&self, pred: &[u8], source: (usize, usize), target: (usize, usize)) -> bool {
        let mut cur = target;
        let on_edge = |(i, j): (usize, usize)| i == 0 || i + 1 == self.nt || (j + 1 == self.nu) || (j == 0 && self.u0 > 0.0);
        let ends = [source, target];
        while cur != source {
            if on_edge(cur) && !ends.contains(&cur) {
                return true;
            }
            let k = pred[cur.1 * self.nt + cur.0];
            if k == u8::MAX {
                return false;
            }
            let (a, b, _) = self.stencil[k as usize];
            cur = ((cur.0 as i64 - a) as usize, (cur.1 as i64 - b) as usize);
        }
        false
    }

    /// Oracle distances from `source` to each target.
    pub fn distances_from(&self, source: Polar, targets: &[Polar]) -> Result<Vec<MeshDistance>> {
        let s = self.snap(source)?;
        let ts: Vec<(usize, usize)> = targets.iter().map(|&p| self.snap(p)).collect::<Result<_>>()?;
        let cached = self.load(s).filter(|f| ts.iter().all(|&t| f[t.1 * self.nt + t.0].is_finite()));
        let field = match cached {
            Some(f) => f,
            None => {
                let (f, pred) = self.field(s, &ts);
                for &t in &ts {
                    if self.touches_window(&pred, s, t) {
                        return Err(Error::OracleWindow(format!(
                            "grid path from {:?} to {:?} runs along the window edge",
                            self.coords(s),
                            self.coords(t)
                        )));
                    }
                }
                self.store(s, &f);
                f
            }
        };
        Ok(ts
            .iter()
            .map(|&t| MeshDistance { value: field[t.1 * self.nt + t.0], from: self.coords(s), to: self.coords(t) })
            .collect())
    }

    pub fn distance(&self, p: Polar, q: Polar) -> Result<MeshDistance> {
        Ok(self.distances_from(p, &[q])?.remove(0))
    }
}

/// One-off oracle query on the given window.
pub fn mesh_oracle_distance(p: Polar, q: Polar, h: f64, window: MeshWindow) -> Result<MeshDistance> {
    MeshOracle::new(window, h)?.distance(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::kernel::dist;

    #[test]
    fn same_point_is_zero() {
        let w = MeshWindow { t: (-1.0, 1.0), r: (1.0, 3.0) };
        let d = mesh_oracle_distance(Polar { t: 0.2, r: 2.0 }, Polar { t: 0.2, r: 2.0 }, 0.05, w).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn arc_and_wrap_examples() {
        let w = MeshWindow { t: (-0.5, 5.5), r: (1.0, 2.5) };
        let oracle = MeshOracle::new(w, 0.01).unwrap();
        let arc = oracle.distance(Polar { t: 0.0, r: 1.0 }, Polar { t: std::f64::consts::PI, r: 1.0 }).unwrap();
        assert!((arc.value / std::f64::consts::PI - 1.0).abs() < 0.02, "{}", arc.value);
        let p = oracle.distance(Polar { t: 0.0, r: 2.0 }, Polar { t: 5.0, r: 2.0 }).unwrap();
        let exact = dist(p.from, p.to);
        assert!(p.value >= exact - 1e-9);
        assert!((p.value / exact - 1.0).abs() < 0.02, "{} vs {exact}", p.value);
    }

    #[test]
    fn rejects_points_outside_the_window() {
        let w = MeshWindow { t: (0.0, 1.0), r: (1.0, 2.0) };
        let oracle = MeshOracle::new(w, 0.1).unwrap();
        assert!(matches!(oracle.distance(Polar { t: 0.0, r: 1.0 }, Polar { t: 3.0, r: 1.0 }), Err(Error::OracleWindow(_))));
    }

    #[test]
    fn narrow_window_is_flagged() {
        // The straight path between these points dips towards the circle; a
        // window that starts at r = 1.8 cuts it off.
        let w = MeshWindow { t: (0.0, 1.2), r: (1.8, 3.0) };
        let oracle = MeshOracle::new(w, 0.02).unwrap();
        let res = oracle.distance(Polar { t: 0.0, r: 2.0 }, Polar { t: 1.2, r: 2.0 });
        assert!(matches!(res, Err(Error::OracleWindow(_))), "{res:?}");
    }
}
