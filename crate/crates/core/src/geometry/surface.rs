use serde::Serialize;

use crate::error::{diag, Result, VhipError};
use crate::scalar::Real;
use crate::vector::{Vec2, Vec3};

/// Signed distance below which a point still counts as inside a polygon.
pub const INSIDE_TOLERANCE: f64 = 1e-9;
/// Maximum distance of a vertex from the fitted plane.
pub const COPLANAR_TOLERANCE: f64 = 1e-9;
/// Smallest admissible `n̂·ê_z`.
pub const MIN_NORMAL_Z: f64 = 1e-6;

/// Outward edge constraint `normal · p ≤ offset` on the XY projection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HalfPlane<T> {
    pub normal: Vec2<T>,
    pub offset: T,
}

impl<T: Real> HalfPlane<T> {
    /// Positive inside, negative outside, in metres.
    pub fn signed_distance(&self, p: Vec2<T>) -> T {
        self.offset - self.normal.dot(p)
    }
}

/// Convex planar polygon of admissible CoP locations.
///
/// Vertices are stored counterclockwise as seen from `+normal`. Because the
/// plane is never vertical, the XY projection is a convex polygon with the
/// same orientation; the half-plane form is derived from that projection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContactSurface<T> {
    normal: Vec3<T>,
    plane_offset: T,
    vertices: Vec<Vec3<T>>,
    #[serde(skip)]
    halfplanes: Vec<HalfPlane<T>>,
}

impl<T: Real> ContactSurface<T> {
    /// Builds a surface from coplanar vertices in either winding order.
    pub fn from_vertices(mut vertices: Vec<Vec3<T>>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(VhipError::InvalidSurface(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(VhipError::NonFinite("surface vertex"));
        }

        // Newell's method.
        let n = vertices.len();
        let mut normal = Vec3::zero();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            normal.x += (a.y - b.y) * (a.z + b.z);
            normal.y += (a.z - b.z) * (a.x + b.x);
            normal.z += (a.x - b.x) * (a.y + b.y);
        }
        let len = normal.norm();
        if !(len > T::zero()) {
            return Err(VhipError::InvalidSurface(
                "degenerate polygon (zero area)".into(),
            ));
        }
        let mut normal = normal / len;
        if normal.z < T::zero() {
            vertices.reverse();
            normal = -normal;
        }
        if normal.z < T::lit(MIN_NORMAL_Z) {
            return Err(VhipError::UnsupportedOrientation(diag(normal.z)));
        }

        let plane_offset =
            vertices.iter().map(|v| normal.dot(*v)).sum::<T>() / T::from_usize(n).unwrap();
        let worst = vertices
            .iter()
            .map(|v| (normal.dot(*v) - plane_offset).abs())
            .fold(T::zero(), T::max);
        if worst > T::lit(COPLANAR_TOLERANCE) {
            return Err(VhipError::InvalidSurface(format!(
                "vertices not coplanar (deviation {})",
                diag(worst)
            )));
        }

        let halfplanes = convex_halfplanes(&vertices)?;
        Ok(Self {
            normal,
            plane_offset,
            vertices,
            halfplanes,
        })
    }

    /// Rectangle with half extents `(hx, hy)` centred at `center`, lying in the
    /// plane with the given normal. `yaw` orients the first axis, measured
    /// from +x about +z before projection onto the plane.
    pub fn rectangle(
        center: Vec3<T>,
        normal: Vec3<T>,
        half_extents: Vec2<T>,
        yaw: T,
    ) -> Result<Self> {
        if !(half_extents.x > T::zero() && half_extents.y > T::zero()) {
            return Err(VhipError::InvalidSurface(
                "half extents must be positive".into(),
            ));
        }
        let len = normal.norm();
        if !(len > T::zero()) {
            return Err(VhipError::InvalidSurface("zero normal".into()));
        }
        let n = normal / len;
        if n.z < T::lit(MIN_NORMAL_Z) {
            return Err(VhipError::UnsupportedOrientation(diag(n.z)));
        }
        let (s, c) = yaw.sin_cos();
        let d = Vec3::new(c, s, T::zero());
        let t1 = (d - n * n.dot(d)).normalized();
        let t2 = n.cross(t1);
        let (hx, hy) = (half_extents.x, half_extents.y);
        Self::from_vertices(vec![
            center - t1 * hx - t2 * hy,
            center + t1 * hx - t2 * hy,
            center + t1 * hx + t2 * hy,
            center - t1 * hx + t2 * hy,
        ])
    }

    /// Horizontal axis-aligned box `[x_min, x_max] × [y_min, y_max]` at height `z`.
    pub fn horizontal_box(x_min: T, x_max: T, y_min: T, y_max: T, z: T) -> Result<Self> {
        Self::from_vertices(vec![
            Vec3::new(x_min, y_min, z),
            Vec3::new(x_max, y_min, z),
            Vec3::new(x_max, y_max, z),
            Vec3::new(x_min, y_max, z),
        ])
    }

    pub fn normal(&self) -> Vec3<T> {
        self.normal
    }

    pub fn plane_offset(&self) -> T {
        self.plane_offset
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn halfplanes(&self) -> &[HalfPlane<T>] {
        &self.halfplanes
    }

    /// Smallest signed edge distance of `p`; positive strictly inside.
    pub fn signed_distance_xy(&self, p: Vec2<T>) -> T {
        self.halfplanes
            .iter()
            .map(|h| h.signed_distance(p))
            .fold(T::infinity(), T::min)
    }

    /// Closed point-in-polygon test on the XY projection.
    pub fn contains_xy(&self, p: Vec2<T>) -> bool {
        self.signed_distance_xy(p) >= -T::lit(INSIDE_TOLERANCE)
    }

    /// Point of the surface plane above/below the given XY location.
    pub fn lift_to_plane(&self, p: Vec2<T>) -> Vec3<T> {
        let n = self.normal;
        let z = (self.plane_offset - n.x * p.x - n.y * p.y) / n.z;
        p.with_z(z)
    }

    /// Area centroid of the XY projection.
    pub fn centroid_xy(&self) -> Vec2<T> {
        let n = self.vertices.len();
        let origin = self.vertices[0].xy();
        let mut area = T::zero();
        let mut acc = Vec2::zero();
        for i in 1..n - 1 {
            let a = self.vertices[i].xy() - origin;
            let b = self.vertices[i + 1].xy() - origin;
            let w = a.cross(b);
            area += w;
            acc += (a + b) * w;
        }
        origin + acc / (T::lit(3.0) * area)
    }

    /// Parameter interval of the XY line `p0 + d τ`, `τ ∈ ℝ`, inside the
    /// closed polygon (Liang–Barsky clipping). `None` if the line misses it.
    pub fn clip_line(&self, p0: Vec2<T>, d: Vec2<T>) -> Option<(T, T)> {
        let mut lo = T::neg_infinity();
        let mut hi = T::infinity();
        for h in &self.halfplanes {
            let num = h.signed_distance(p0);
            let den = h.normal.dot(d);
            if den == T::zero() {
                if num < -T::lit(INSIDE_TOLERANCE) {
                    return None;
                }
                continue;
            }
            let t = num / den;
            if den > T::zero() {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Polygon with every edge moved outward by `delta` (inward if negative).
    pub fn offset_xy(&self, delta: T) -> Result<Self> {
        let m = self.halfplanes.len();
        let mut vertices = Vec::with_capacity(m);
        for i in 0..m {
            let a = self.halfplanes[(i + m - 1) % m];
            let b = self.halfplanes[i];
            let det = a.normal.cross(b.normal);
            if det.abs() < T::lit(1e-12) {
                return Err(VhipError::InvalidSurface(
                    "collinear edges cannot be offset".into(),
                ));
            }
            let (ca, cb) = (a.offset + delta, b.offset + delta);
            let p = Vec2::new(
                (ca * b.normal.y - cb * a.normal.y) / det,
                (a.normal.x * cb - b.normal.x * ca) / det,
            );
            vertices.push(self.lift_to_plane(p));
        }
        Self::from_vertices(vertices)
    }

    /// Applies `f` to every vertex and rebuilds the surface.
    pub fn map_vertices(&self, f: impl Fn(Vec3<T>) -> Vec3<T>) -> Result<Self> {
        Self::from_vertices(self.vertices.iter().copied().map(f).collect())
    }
}

fn convex_halfplanes<T: Real>(vertices: &[Vec3<T>]) -> Result<Vec<HalfPlane<T>>> {
    let n = vertices.len();
    let mut halfplanes = Vec::with_capacity(n);
    let mut turning = T::zero();
    for i in 0..n {
        let a = vertices[i].xy();
        let b = vertices[(i + 1) % n].xy();
        let c = vertices[(i + 2) % n].xy();
        let e = b - a;
        let len = e.norm();
        if !(len > T::lit(1e-12)) {
            return Err(VhipError::InvalidSurface("repeated vertex".into()));
        }
        let f = c - b;
        let cross = e.cross(f);
        if cross < -T::lit(1e-12) * len * f.norm().max(T::one()) {
            return Err(VhipError::InvalidSurface("polygon is not convex".into()));
        }
        turning += cross.atan2(e.dot(f));
        let normal = Vec2::new(e.y, -e.x) / len;
        halfplanes.push(HalfPlane {
            normal,
            offset: normal.dot(a),
        });
    }
    // A convex simple polygon turns exactly once.
    if (turning - T::TAU()).abs() > T::lit(1e-6) {
        return Err(VhipError::InvalidSurface(
            "polygon is self-intersecting".into(),
        ));
    }
    Ok(halfplanes)
}
