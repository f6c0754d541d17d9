//! The line of fixed points of the neutral field, its eigenbasis, and the
//! two zeros of the reduced field once a small trait difference is added.

use diploid_ad::dynamics::{
    count_zeros_near_curve, reduced_field, reduced_field_limit, selection_gradient, DimorphicModel, NeutralGeometry,
    ZeroCurveOptions,
};
use diploid_ad::model::{DemographyModel, ModelSpec, TraitSpace};

fn main() -> diploid_ad::Result<()> {
    let geom = NeutralGeometry::new(2.0, 1.0, 1.0)?;
    println!("eigenvalues {:?}", geom.eigenvalues());
    for v in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let g = geom.gamma(v);
        let residual = geom.field().rhs(&g).iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        println!("v = {v:5.2}  point {g:.4?}  residual {residual:.1e}");
    }

    let model = DemographyModel::new(ModelSpec::gaussian(TraitSpace::new(0.0, 1.0)?, 2.0, 1.0, 0.6, 1.0, 0.9))?;
    let u = 0.3;
    let slope = selection_gradient(&model, u)?;
    let opts = ZeroCurveOptions::default();
    for zeta in [0.02, 0.01, 0.005] {
        let dm = DimorphicModel::new(&model, u, u + zeta)?;
        let g = NeutralGeometry::for_resident(&dm)?;
        let zeros = count_zeros_near_curve(&dm, &g, &opts)?;
        let mid = reduced_field(&dm, &g, 0.0, &opts)? / zeta;
        println!(
            "zeta = {zeta}: zeros at {:.5?}, scaled field at v = 0 {mid:.6} (limit {:.6})",
            zeros.roots,
            reduced_field_limit(&g, slope, 0.0)
        );
    }
    Ok(())
}
