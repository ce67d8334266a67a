use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{legendre_unit, Rule1d};
use crate::weights::WeightVector;

/// Required distance of every point of the domain from both coordinate axes.
pub const AXIS_MARGIN: f64 = 0.1;

const SEGMENT_ORDER: usize = 8;
const CELL_ORDER: usize = 4;
const TRIANGLE_ORDER: usize = 5;

/// Smooth planar domains given by a signed level set (negative inside).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Shape2D {
    Disk { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], semi: [f64; 2] },
    /// Points within `width` of the circular arc of radius `radius` about
    /// `center` between the angles `theta0 < theta1` (radians).
    ArcTube { center: [f64; 2], radius: f64, width: f64, theta0: f64, theta1: f64 },
}

fn wrap_angle(t: f64) -> f64 {
    (t + PI).rem_euclid(2.0 * PI) - PI
}

impl Shape2D {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Shape2D::Disk { radius, .. } => radius > 0.0,
            Shape2D::Ellipse { semi, .. } => semi[0] > 0.0 && semi[1] > 0.0,
            Shape2D::ArcTube { radius, width, theta0, theta1, .. } => {
                width > 0.0 && width < radius && theta1 > theta0 && theta1 - theta0 < PI
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!("{self:?}")))
        }
    }

    pub fn level_set(&self, x: [f64; 2]) -> f64 {
        match *self {
            Shape2D::Disk { center, radius } => (x[0] - center[0]).hypot(x[1] - center[1]) - radius,
            Shape2D::Ellipse { center, semi } => {
                // scaled radial function; only the sign and the zero set matter
                (((x[0] - center[0]) / semi[0]).hypot((x[1] - center[1]) / semi[1]) - 1.0) * semi[0].min(semi[1])
            }
            Shape2D::ArcTube { center, radius, width, theta0, theta1 } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let mid = 0.5 * (theta0 + theta1);
                let rel = wrap_angle(dy.atan2(dx) - mid);
                let dist = if rel.abs() <= 0.5 * (theta1 - theta0) {
                    (dx.hypot(dy) - radius).abs()
                } else {
                    [theta0, theta1]
                        .iter()
                        .map(|t| (dx - radius * t.cos()).hypot(dy - radius * t.sin()))
                        .fold(f64::INFINITY, f64::min)
                };
                dist - width
            }
        }
    }

    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Shape2D::Disk { center, radius } => {
                ([center[0] - radius, center[1] - radius], [center[0] + radius, center[1] + radius])
            }
            Shape2D::Ellipse { center, semi } => {
                ([center[0] - semi[0], center[1] - semi[1]], [center[0] + semi[0], center[1] + semi[1]])
            }
            Shape2D::ArcTube { center, radius, width, .. } => {
                let r = radius + width;
                // loose box; empty rows and columns are harmless
                ([center[0] - r, center[1] - r], [center[0] + r, center[1] + r])
            }
        }
    }

    /// `(P, m)` of the exact domain by polar quadrature of the weight,
    /// independent of any grid.
    pub fn exact_measures(&self, a: &WeightVector) -> Result<(f64, f64)> {
        self.validate()?;
        let w = |x: f64, y: f64| a.eval(&[x, y]);
        let periodic = 2048usize;
        let radial = legendre_unit(48);
        match *self {
            Shape2D::Disk { center, radius } => ellipse_measures(center, [radius, radius], &w, periodic, &radial),
            Shape2D::Ellipse { center, semi } => ellipse_measures(center, semi, &w, periodic, &radial),
            Shape2D::ArcTube { center, radius, width, theta0, theta1 } => {
                let ang = legendre_unit(256).mapped(theta0, theta1);
                let rad = radial.mapped(radius - width, radius + width);
                let mut m = 0.0;
                let mut p = 0.0;
                for (t, wt) in ang.nodes.iter().zip(&ang.weights) {
                    let (c, s) = (t.cos(), t.sin());
                    for (r, wr) in rad.nodes.iter().zip(&rad.weights) {
                        m += wt * wr * r * w(center[0] + r * c, center[1] + r * s);
                    }
                    for r in [radius - width, radius + width] {
                        p += wt * r * w(center[0] + r * c, center[1] + r * s);
                    }
                }
                // half-disk caps, facing away from the arc
                for (t, sign) in [(theta0, -1.0), (theta1, 1.0)] {
                    let e = [center[0] + radius * t.cos(), center[1] + radius * t.sin()];
                    let tangent = t + sign * PI / 2.0;
                    let cap = legendre_unit(256).mapped(tangent - PI / 2.0, tangent + PI / 2.0);
                    let cr = radial.mapped(0.0, width);
                    for (phi, wt) in cap.nodes.iter().zip(&cap.weights) {
                        let (c, s) = (phi.cos(), phi.sin());
                        for (r, wr) in cr.nodes.iter().zip(&cr.weights) {
                            m += wt * wr * r * w(e[0] + r * c, e[1] + r * s);
                        }
                        p += wt * width * w(e[0] + width * c, e[1] + width * s);
                    }
                }
                Ok((p, m))
            }
        }
    }

    pub fn describe(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

fn ellipse_measures(
    center: [f64; 2],
    semi: [f64; 2],
    w: &dyn Fn(f64, f64) -> f64,
    periodic: usize,
    radial: &Rule1d,
) -> Result<(f64, f64)> {
    let mut m = 0.0;
    let mut p = 0.0;
    let dt = 2.0 * PI / periodic as f64;
    for k in 0..periodic {
        let t = k as f64 * dt;
        let (c, s) = (t.cos(), t.sin());
        for (r, wr) in radial.nodes.iter().zip(&radial.weights) {
            m += dt * wr * semi[0] * semi[1] * r * w(center[0] + semi[0] * r * c, center[1] + semi[1] * r * s);
        }
        let speed = (semi[0] * s).hypot(semi[1] * c);
        p += dt * speed * w(center[0] + semi[0] * c, center[1] + semi[1] * s);
    }
    Ok((p, m))
}

/// Piece of the polygonal boundary inside one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySegment {
    pub start: [f64; 2],
    pub end: [f64; 2],
    /// Outward unit normal.
    pub normal: [f64; 2],
    pub cell: usize,
}

/// Active (cut or full) cell of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
    pub center: [f64; 2],
    /// `∫ x^A` over the part of the cell inside the polygonal domain.
    pub volume: f64,
    /// `∫ x^A dσ` over the boundary segments in the cell.
    pub boundary_flux: f64,
    /// `(neighbor, T)` with `T = (1/h)∫_{wet face} x^A dσ`.
    pub neighbors: Vec<(usize, f64)>,
    /// Coordinate minima over the inside part of the cell.
    pub inside_min: [f64; 2],
}

/// Cut-cell discretization of a planar domain compactly inside the open
/// quadrant, for a fixed weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDomain2D {
    pub a: WeightVector,
    /// Lower-left grid vertex.
    pub lo: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major (`j * nx + i`) activity of each cell.
    pub mask: Vec<bool>,
    pub cells: Vec<Cell>,
    pub boundary: Vec<BoundarySegment>,
}

fn segment_integral(a: &WeightVector, rule: &Rule1d, p: [f64; 2], q: [f64; 2]) -> f64 {
    let len = (q[0] - p[0]).hypot(q[1] - p[1]);
    if len == 0.0 {
        return 0.0;
    }
    len * rule.integrate(|t| a.eval(&[p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]))
}

/// `∫ x^A` over a closed polygon via a signed fan of triangles.
fn polygon_integral(a: &WeightVector, tri: &[(f64, f64, f64)], poly: &[[f64; 2]]) -> f64 {
    let o = poly[0];
    let mut total = 0.0;
    for k in 1..poly.len().saturating_sub(1) {
        let (p, q) = (poly[k], poly[k + 1]);
        let (e1, e2) = ([p[0] - o[0], p[1] - o[1]], [q[0] - o[0], q[1] - o[1]]);
        let jac = e1[0] * e2[1] - e1[1] * e2[0];
        if jac == 0.0 {
            continue;
        }
        let s: f64 = tri
            .iter()
            .map(|&(u, v, w)| w * a.eval(&[o[0] + u * e1[0] + v * e2[0], o[1] + u * e1[1] + v * e2[1]]))
            .sum();
        total += jac * s;
    }
    total
}

/// Collapsed Gauss rule on the reference triangle `{u, v ≥ 0, u + v ≤ 1}`.
fn triangle_rule(n: usize) -> Vec<(f64, f64, f64)> {
    let g = legendre_unit(n);
    let mut out = Vec::with_capacity(n * n);
    for (s, ws) in g.nodes.iter().zip(&g.weights) {
        for (t, wt) in g.nodes.iter().zip(&g.weights) {
            out.push((*s, t * (1.0 - s), ws * wt * (1.0 - s)));
        }
    }
    out
}

/// Zero of `phi` on the segment `p → q` (sign change assumed), by bisection.
fn crossing(phi: &(dyn Fn([f64; 2]) -> f64 + Sync), p: [f64; 2], q: [f64; 2], snap: f64) -> [f64; 2] {
    let at = |t: f64| [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let inside_lo = phi(p) < -snap;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (phi(at(mid)) < -snap) == inside_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

impl GridDomain2D {
    pub fn from_shape(a: &WeightVector, shape: &Shape2D, h: f64) -> Result<Self> {
        shape.validate()?;
        let (lo, hi) = shape.bounds();
        Self::from_level_set(a, &|x| shape.level_set(x), lo, hi, h)
    }

    /// Builds the cut-cell grid of `{phi < 0}` inside the box `[lo, hi]`.
    pub fn from_level_set(
        a: &WeightVector,
        phi: &(dyn Fn([f64; 2]) -> f64 + Sync),
        lo: [f64; 2],
        hi: [f64; 2],
        h: f64,
    ) -> Result<Self> {
        if a.dim() != 2 {
            return Err(Error::InvalidArgument(format!("planar solver needs n = 2, got {}", a.dim())));
        }
        if !(h > 0.0 && h.is_finite()) || !(hi[0] > lo[0] && hi[1] > lo[1]) {
            return Err(Error::InvalidDomain(format!("bad grid: h = {h}, box {lo:?}..{hi:?}")));
        }
        let origin = [lo[0] - h, lo[1] - h];
        let nx = ((hi[0] - lo[0]) / h).ceil() as usize + 2;
        let ny = ((hi[1] - lo[1]) / h).ceil() as usize + 2;
        if nx * ny > 50_000_000 {
            return Err(Error::InvalidDomain(format!("grid of {nx}×{ny} cells is too large")));
        }
        let vx = |i: usize, j: usize| [origin[0] + i as f64 * h, origin[1] + j as f64 * h];
        let vid = |i: usize, j: usize| j * (nx + 1) + i;
        // vertices within rounding of the boundary count as outside, so no
        // cell is activated by a corner of zero extent
        let snap = 1e-10 * h;
        let inside: Vec<bool> =
            (0..(nx + 1) * (ny + 1)).map(|k| phi(vx(k % (nx + 1), k / (nx + 1))) < -snap).collect();
        // crossings on horizontal edges (i,j)-(i+1,j) and vertical edges (i,j)-(i,j+1)
        let mut hcross = vec![None; nx * (ny + 1)];
        let mut vcross = vec![None; (nx + 1) * ny];
        for j in 0..=ny {
            for i in 0..=nx {
                if i < nx && inside[vid(i, j)] != inside[vid(i + 1, j)] {
                    hcross[j * nx + i] = Some(crossing(phi, vx(i, j), vx(i + 1, j), snap));
                }
                if j < ny && inside[vid(i, j)] != inside[vid(i, j + 1)] {
                    vcross[j * (nx + 1) + i] = Some(crossing(phi, vx(i, j), vx(i, j + 1), snap));
                }
            }
        }
        let seg = legendre_unit(SEGMENT_ORDER);
        let tri = triangle_rule(TRIANGLE_ORDER);
        let sq = legendre_unit(CELL_ORDER);

        let mut mask = vec![false; nx * ny];
        let mut index = vec![usize::MAX; nx * ny];
        let mut cells = Vec::new();
        let mut boundary = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let ins: Vec<bool> = corners.iter().map(|&(ci, cj)| inside[vid(ci, cj)]).collect();
                if !ins.iter().any(|v| *v) {
                    continue;
                }
                let edge_cross = |k: usize| -> [f64; 2] {
                    match k {
                        0 => hcross[j * nx + i],
                        1 => vcross[j * (nx + 1) + i + 1],
                        2 => hcross[(j + 1) * nx + i],
                        _ => vcross[j * (nx + 1) + i],
                    }
                    .expect("sign change implies a crossing")
                };
                let cell_id = cells.len();
                let (volume, flux, inside_min) = if ins.iter().all(|v| *v) {
                    let (x0, y0) = (vx(i, j)[0], vx(i, j)[1]);
                    let mut v = 0.0;
                    for (s, ws) in sq.nodes.iter().zip(&sq.weights) {
                        for (t, wt) in sq.nodes.iter().zip(&sq.weights) {
                            v += ws * wt * a.eval(&[x0 + s * h, y0 + t * h]);
                        }
                    }
                    (v * h * h, 0.0, [x0, y0])
                } else {
                    // walk the cell boundary counter-clockwise, keeping inside corners and crossings
                    let mut poly: Vec<([f64; 2], bool)> = Vec::with_capacity(8);
                    for k in 0..4 {
                        let (ci, cj) = corners[k];
                        if ins[k] {
                            poly.push((vx(ci, cj), false));
                        }
                        if ins[k] != ins[(k + 1) % 4] {
                            poly.push((edge_cross(k), true));
                        }
                    }
                    let mut flux = 0.0;
                    let m = poly.len();
                    for k in 0..m {
                        let (p, pc) = poly[k];
                        let (q, qc) = poly[(k + 1) % m];
                        // consecutive crossings leave and re-enter: a boundary piece
                        if pc && qc {
                            let len = (q[0] - p[0]).hypot(q[1] - p[1]);
                            if len > 0.0 {
                                let normal = [(q[1] - p[1]) / len, -(q[0] - p[0]) / len];
                                flux += segment_integral(a, &seg, p, q);
                                boundary.push(BoundarySegment { start: p, end: q, normal, cell: cell_id });
                            }
                        }
                    }
                    let pts: Vec<[f64; 2]> = poly.iter().map(|v| v.0).collect();
                    let lowest = pts.iter().fold([f64::INFINITY; 2], |m, p| [m[0].min(p[0]), m[1].min(p[1])]);
                    (polygon_integral(a, &tri, &pts), flux, lowest)
                };
                mask[j * nx + i] = true;
                index[j * nx + i] = cell_id;
                let c = vx(i, j);
                cells.push(Cell {
                    i,
                    j,
                    center: [c[0] + 0.5 * h, c[1] + 0.5 * h],
                    volume,
                    boundary_flux: flux,
                    neighbors: Vec::new(),
                    inside_min,
                });
            }
        }
        // weighted face apertures
        let wet = |p: [f64; 2], q: [f64; 2], ip: bool, iq: bool, x: Option<[f64; 2]>| -> f64 {
            match (ip, iq) {
                (true, true) => segment_integral(a, &seg, p, q),
                (true, false) => segment_integral(a, &seg, p, x.expect("crossing")),
                (false, true) => segment_integral(a, &seg, x.expect("crossing"), q),
                (false, false) => 0.0,
            }
        };
        for j in 0..ny {
            for i in 0..nx {
                let k = index[j * nx + i];
                if k == usize::MAX {
                    continue;
                }
                if i + 1 < nx && index[j * nx + i + 1] != usize::MAX {
                    let l = index[j * nx + i + 1];
                    let t = wet(
                        vx(i + 1, j),
                        vx(i + 1, j + 1),
                        inside[vid(i + 1, j)],
                        inside[vid(i + 1, j + 1)],
                        vcross[j * (nx + 1) + i + 1],
                    ) / h;
                    if t > 0.0 {
                        cells[k].neighbors.push((l, t));
                        cells[l].neighbors.push((k, t));
                    }
                }
                if j + 1 < ny && index[(j + 1) * nx + i] != usize::MAX {
                    let l = index[(j + 1) * nx + i];
                    let t = wet(
                        vx(i, j + 1),
                        vx(i + 1, j + 1),
                        inside[vid(i, j + 1)],
                        inside[vid(i + 1, j + 1)],
                        hcross[(j + 1) * nx + i],
                    ) / h;
                    if t > 0.0 {
                        cells[k].neighbors.push((l, t));
                        cells[l].neighbors.push((k, t));
                    }
                }
            }
        }
        for c in &mut cells {
            c.neighbors.sort_by_key(|e| e.0);
        }
        let dom = GridDomain2D { a: a.clone(), lo: origin, h, nx, ny, mask, cells, boundary };
        dom.validate()?;
        Ok(dom)
    }

    /// δ-margin from both axes and connectivity of the active cells.
    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::InvalidDomain("no active cells".into()));
        }
        if let Some(c) = self.cells.iter().find(|c| c.inside_min[0] < AXIS_MARGIN || c.inside_min[1] < AXIS_MARGIN) {
            return Err(Error::InvalidDomain(format!(
                "cell ({}, {}) reaches {:?}, closer than {AXIS_MARGIN} to an axis",
                c.i, c.j, c.inside_min
            )));
        }
        let n = self.cells.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(k) = queue.pop_front() {
            for &(l, _) in &self.cells[k].neighbors {
                if !seen[l] {
                    seen[l] = true;
                    count += 1;
                    queue.push_back(l);
                }
            }
        }
        if count != n {
            return Err(Error::InvalidDomain(format!("mask is disconnected ({count} of {n} cells reachable)")));
        }
        Ok(())
    }

    /// Weighted measure `m_h` of the polygonal domain.
    pub fn measure(&self) -> f64 {
        crate::exec::pairwise_sum(&self.cells.iter().map(|c| c.volume).collect::<Vec<_>>())
    }

    /// Weighted perimeter `P_h` of the polygonal domain.
    pub fn perimeter(&self) -> f64 {
        crate::exec::pairwise_sum(&self.cells.iter().map(|c| c.boundary_flux).collect::<Vec<_>>())
    }

    /// Cells with all four corners inside.
    pub fn is_full(&self, k: usize) -> bool {
        let c = &self.cells[k];
        c.boundary_flux == 0.0 && c.neighbors.len() == 4
    }
}
