//! Contact surfaces, instantaneous curves, τ-windows, foot frames and
//! support hulls.

mod curves;
mod frame;
mod hull;
mod surface;
mod window;

pub use curves::{
    ballistic_ground_time, ballistic_point, descending_root, icc_ground_time, icc_point, idc_point,
};
pub use frame::{foot_frame, from_foot_frame, to_foot_frame, FootFrame};
pub use hull::{convex_hull_xy, support_hull, HULL_COPLANAR_TOLERANCE};
pub use surface::{ContactSurface, HalfPlane, COPLANAR_TOLERANCE, INSIDE_TOLERANCE, MIN_NORMAL_Z};
pub use window::{tau_window, LineCrossing, TauWindow, MIN_HORIZONTAL_SPEED};
