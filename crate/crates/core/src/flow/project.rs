use crate::variation::fit::fit_gradients_weighted;
use crate::variation::GradientField;

/// Area gradient with its component along the volume gradients removed.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub field: GradientField,
    pub lambdas: Vec<f64>,
    /// Set when the volume gradients were linearly dependent and the
    /// pseudo-inverse was used.
    pub rank_deficient: bool,
}

/// Steepest volume-preserving descent direction: `G_A` minus its orthogonal
/// projection onto `span{G_Vi}`.
pub fn project_volume_preserving(ga: &GradientField, gvs: &[GradientField]) -> Projection {
    project_weighted(ga, gvs, None)
}

/// As [`project_volume_preserving`] in the inner product weighted by
/// per-vertex `inv_mass`.
pub fn project_weighted(ga: &GradientField, gvs: &[GradientField], inv_mass: Option<&[f64]>) -> Projection {
    let fit = fit_gradients_weighted(ga, gvs, inv_mass);
    Projection {
        field: fit.residual,
        lambdas: fit.lambdas,
        rank_deficient: fit.rank_deficient,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    #[test]
    fn result_is_orthogonal_to_constraints() {
        let ga = GradientField((0..5).map(|i| Vec3::new(i as f64, 1.0, -2.0 * i as f64)).collect());
        let g1 = GradientField((0..5).map(|i| Vec3::new(1.0, i as f64, 0.5)).collect());
        let g2 = GradientField((0..5).map(|i| Vec3::new(0.0, 1.0, (i * i) as f64)).collect());
        let p = project_volume_preserving(&ga, &[g1.clone(), g2.clone()]);
        for g in [g1, g2] {
            assert!(p.field.dot(&g).abs() <= 1e-10 * p.field.norm() * g.norm());
        }
        assert!(!p.rank_deficient);
    }

    #[test]
    fn dependent_constraints_flagged() {
        let ga = GradientField(vec![Vec3::x(), Vec3::y()]);
        let g1 = GradientField(vec![Vec3::x(), Vec3::zeros()]);
        let p = project_volume_preserving(&ga, &[g1.clone(), g1]);
        assert!(p.rank_deficient);
        assert!((p.field[0]).norm() < 1e-12);
    }
}
