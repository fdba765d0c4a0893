use crate::error::{diag, Result, VhipError};
use crate::geometry::surface::ContactSurface;
use crate::scalar::Real;
use crate::vector::{Vec2, Vec3};

/// Maximum distance of any vertex from the plane of the first surface.
pub const HULL_COPLANAR_TOLERANCE: f64 = 1e-6;

/// Support polygon of several coplanar contact surfaces.
pub fn support_hull<T: Real>(surfaces: &[ContactSurface<T>]) -> Result<ContactSurface<T>> {
    let first = surfaces
        .first()
        .ok_or_else(|| VhipError::InvalidSurface("no surfaces to hull".into()))?;
    let (n, c) = (first.normal(), first.plane_offset());
    let points: Vec<Vec3<T>> = surfaces
        .iter()
        .flat_map(|s| s.vertices().iter().copied())
        .collect();
    let worst = points
        .iter()
        .map(|p| (n.dot(*p) - c).abs())
        .fold(T::zero(), T::max);
    if worst > T::lit(HULL_COPLANAR_TOLERANCE) {
        return Err(VhipError::NonCoplanar(diag(worst)));
    }

    let xy: Vec<Vec2<T>> = points.iter().map(|p| p.xy()).collect();
    let hull = convex_hull_xy(xy);
    ContactSurface::from_vertices(hull.into_iter().map(|p| first.lift_to_plane(p)).collect())
}

/// Andrew's monotone chain; counterclockwise, collinear points dropped.
pub fn convex_hull_xy<T: Real>(mut points: Vec<Vec2<T>>) -> Vec<Vec2<T>> {
    points.sort_by(|a, b| {
        a.x.partial_cmp(&b.x)
            .unwrap()
            .then(a.y.partial_cmp(&b.y).unwrap())
    });
    points.dedup();
    if points.len() < 3 {
        return points;
    }
    let eps = T::lit(1e-12);
    let turn = |o: Vec2<T>, a: Vec2<T>, b: Vec2<T>| (a - o).cross(b - o);

    let mut lower: Vec<Vec2<T>> = Vec::new();
    for &p in &points {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2<T>> = Vec::new();
    for &p in points.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
