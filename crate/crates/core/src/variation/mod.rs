//! Discrete first variation: gradients, Lagrange multipliers, junction
//! angles, tangent cones and the Heintze–Karcher comparison.

pub mod angles;
pub mod cone;
pub mod fit;
pub mod gradient;
pub mod hk;

pub use angles::{junction_angles, junction_angles_with, JunctionStats, PairAngles};
pub use cone::{check_convex, convexity_defect, tangent_cone_at, y_cone_stationarity, ConeKind, TangentCone};
pub use fit::{fit_gradients, fit_multipliers, fit_multipliers_with, InterfaceStats, MultiplierFit, VariationReport};
pub use gradient::{area_gradient, area_gradient_with, volume_gradient, volume_gradients, GradientField};
pub use hk::{heintze_karcher_check, HeintzeKarcher};
