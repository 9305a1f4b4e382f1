//! Right-hand sides of the regularized nutrient taxis system
//!
//! ```text
//! u_t = div(u v grad u) - chi div(u^2 v grad v) + ell u v
//! v_t = lap v - u v
//! ```
//!
//! with zero-flux boundary conditions and lifted initial density `u0 + eps`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TaxisError};
use crate::grid::{div_faces, grad_faces, laplacian, FaceField, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Chemotactic sensitivity.
    pub chi: f64,
    /// Growth coefficient.
    pub ell: f64,
    /// Regularization added to the initial density.
    pub eps: f64,
}

impl Params {
    pub fn new(chi: f64, ell: f64, eps: f64) -> Result<Self> {
        let p = Self { chi, ell, eps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi > 0.0 && self.chi.is_finite()) {
            return Err(TaxisError::InvalidParams(format!("chi must satisfy chi > 0, got {}", self.chi)));
        }
        if !(self.ell >= 0.0 && self.ell.is_finite()) {
            return Err(TaxisError::InvalidParams(format!("ell must satisfy ell >= 0, got {}", self.ell)));
        }
        if !(0.0..1.0).contains(&self.eps) {
            return Err(TaxisError::InvalidParams(format!(
                "eps must satisfy 0 <= eps < 1, got {}",
                self.eps
            )));
        }
        Ok(())
    }
}

impl Default for Params {
    fn default() -> Self {
        Self {
            chi: 1.0,
            ell: 1.0,
            eps: 1e-3,
        }
    }
}

/// Cell density `u` and nutrient `v` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: ScalarField,
    pub v: ScalarField,
    pub t: f64,
}

impl State {
    pub fn new(u: ScalarField, v: ScalarField, t: f64) -> Result<Self> {
        u.check_same_grid(&v)?;
        Ok(Self { u, v, t })
    }

    pub fn is_positive(&self) -> bool {
        self.u.min() > 0.0 && self.v.min() > 0.0
    }
}

/// `u0 + eps` pointwise.
pub fn regularize_initial(u0: &ScalarField, eps: f64) -> Result<ScalarField> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(TaxisError::InvalidParams(format!("eps must lie in (0, 1), got {eps}")));
    }
    let min = u0.min();
    if min < 0.0 {
        return Err(TaxisError::NegativeInitialData(min));
    }
    Ok(u0.map(|u| u + eps))
}

/// Face flux `(uv)_f grad u - chi (u_f)^2 v_f grad v`, where `(uv)_f` is the
/// mean of the adjacent products and `u_f`, `v_f` are arithmetic means.
pub fn flux_u(u: &ScalarField, v: &ScalarField, p: &Params) -> Result<FaceField> {
    u.check_same_grid(v)?;
    let g = *u.grid();
    let gu = grad_faces(u);
    let gv = grad_faces(v);
    let (uu, vv) = (u.values(), v.values());
    let mut out = FaceField::zeros(g);
    let face = |a: usize, b: usize, du: f64, dv: f64| {
        let uv = 0.5 * (uu[a] * vv[a] + uu[b] * vv[b]);
        let uf = 0.5 * (uu[a] + uu[b]);
        let vf = 0.5 * (vv[a] + vv[b]);
        uv * du - p.chi * uf * uf * vf * dv
    };
    for j in 0..g.ny {
        for i in 1..g.nx {
            let k = g.xface(i, j);
            out.x_faces[k] = face(g.idx(i - 1, j), g.idx(i, j), gu.x_faces[k], gv.x_faces[k]);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let k = g.yface(i, j);
            out.y_faces[k] = face(g.idx(i, j - 1), g.idx(i, j), gu.y_faces[k], gv.y_faces[k]);
        }
    }
    Ok(out)
}

pub fn rhs_u(u: &ScalarField, v: &ScalarField, p: &Params) -> Result<ScalarField> {
    let mut out = div_faces(&flux_u(u, v, p)?);
    if p.ell != 0.0 {
        for ((o, &a), &b) in out.values_mut().iter_mut().zip(u.values()).zip(v.values()) {
            *o += p.ell * a * b;
        }
    }
    Ok(out)
}

pub fn rhs_v(u: &ScalarField, v: &ScalarField) -> Result<ScalarField> {
    u.check_same_grid(v)?;
    let mut out = laplacian(v);
    for ((o, &a), &b) in out.values_mut().iter_mut().zip(u.values()).zip(v.values()) {
        *o -= a * b;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{integrate, GridSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit(n: usize) -> GridSpec {
        GridSpec::unit_square(n).unwrap()
    }

    fn product(a: &ScalarField, b: &ScalarField) -> ScalarField {
        a.zip_map(b, |x, y| x * y).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(-1.0, 0.0, 0.1).is_err());
        assert!(Params::new(0.0, 0.0, 0.1).is_err());
        assert!(Params::new(1.0, -0.5, 0.1).is_err());
        assert!(Params::new(1.0, 0.0, 1.0).is_err());
        assert!(Params::new(1.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn regularization() {
        let g = unit(4);
        let r = regularize_initial(&ScalarField::zeros(g), 0.1).unwrap();
        assert!(r.values().iter().all(|&x| x == 0.1));
        let r = regularize_initial(&ScalarField::constant(g, 1.0), 0.01).unwrap();
        assert!(r.values().iter().all(|&x| x == 1.01));

        let u0 = ScalarField::from_fn(g, |x, y| x * y + x);
        let r = regularize_initial(&u0, 0.3).unwrap();
        assert_abs_diff_eq!(integrate(&r), integrate(&u0) + 0.3, epsilon = 1e-13);
        assert!(r.min() >= 0.3);

        let mut neg = ScalarField::zeros(g);
        neg.values_mut()[3] = -1e-3;
        assert!(matches!(regularize_initial(&neg, 0.1), Err(TaxisError::NegativeInitialData(_))));
    }

    #[test]
    fn flux_vanishes_for_constants_and_zero_nutrient() {
        let g = unit(8);
        let p = Params::new(2.0, 1.0, 0.0).unwrap();
        let f = flux_u(&ScalarField::constant(g, 1.3), &ScalarField::constant(g, 0.7), &p).unwrap();
        assert_eq!(f.max_abs(), 0.0);
        let u = ScalarField::from_fn(g, |x, y| 1.0 + x * x + (5.0 * y).sin().abs());
        let f = flux_u(&u, &ScalarField::zeros(g), &p).unwrap();
        assert_eq!(f.max_abs(), 0.0);
        let v = ScalarField::from_fn(g, |x, y| 1.0 + x * y);
        let f = flux_u(&ScalarField::zeros(g), &v, &p).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn flux_one_face_by_hand() {
        let g = unit(4);
        let u = ScalarField::from_fn(g, |x, _| 1.0 + x);
        let v = ScalarField::constant(g, 1.0);
        // chi only multiplies the (zero) grad v term here
        let p = Params { chi: 1e-300, ell: 0.0, eps: 0.0 };
        let f = flux_u(&u, &v, &p).unwrap();
        // face between centers 0.375 and 0.625: mobility 1.5, gradient 1
        assert_abs_diff_eq!(f.x_faces[g.xface(2, 1)], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(f.x_faces[g.xface(1, 0)], 1.25, epsilon = 1e-14);
        assert_eq!(f.x_faces[g.xface(0, 0)], 0.0);
    }

    #[test]
    fn homogeneous_reductions() {
        let g = unit(6);
        let p = Params::new(1.0, 1.0, 0.0).unwrap();
        let (u, v) = (ScalarField::constant(g, 2.0), ScalarField::constant(g, 0.5));
        assert!(rhs_u(&u, &v, &p).unwrap().values().iter().all(|&r| r == 1.0));
        assert!(rhs_v(&u, &v).unwrap().values().iter().all(|&r| r == -1.0));

        let v = ScalarField::constant(g, 0.25);
        let u = ScalarField::from_fn(g, |x, y| 1.0 + x * y);
        let r = rhs_v(&u, &v).unwrap();
        for (a, b) in r.values().iter().zip(u.values()) {
            assert_abs_diff_eq!(*a, -0.25 * b, epsilon = 1e-15);
        }

        let v = ScalarField::from_fn(g, |x, y| 1.0 + (x - y).cos());
        let r = rhs_v(&ScalarField::zeros(g), &v).unwrap();
        assert_abs_diff_eq!(integrate(&r), 0.0, epsilon = 1e-13);
    }

    fn field_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.05f64..3.0, n * n)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mass_production_identities(uv in field_strategy(7), vv in field_strategy(7),
                                      chi in 0.1f64..5.0, ell in 0.0f64..3.0) {
            let g = unit(7);
            let u = ScalarField::from_values(g, uv).unwrap();
            let v = ScalarField::from_values(g, vv).unwrap();
            let p = Params::new(chi, ell, 0.0).unwrap();
            let r_uv = integrate(&product(&u, &v));
            let ru = integrate(&rhs_u(&u, &v, &p).unwrap());
            let rv = integrate(&rhs_v(&u, &v).unwrap());
            let scale = 1.0 + r_uv + flux_u(&u, &v, &p).unwrap().max_abs();
            prop_assert!((ru - ell * r_uv).abs() <= 1e-13 * scale);
            prop_assert!((rv + r_uv).abs() <= 1e-13 * scale);
        }

        #[test]
        fn taxis_part_is_linear_in_chi(uv in field_strategy(5), vv in field_strategy(5),
                                       c1 in 0.1f64..4.0, c2 in 0.1f64..4.0) {
            let g = unit(5);
            let u = ScalarField::from_values(g, uv).unwrap();
            let v = ScalarField::from_values(g, vv).unwrap();
            let at = |chi: f64| flux_u(&u, &v, &Params { chi, ell: 0.0, eps: 0.0 }).unwrap();
            // flux(c1) + flux(c2) - flux(c1 + c2) equals the diffusive part alone
            let diffusive = at(1e-300);
            let (f1, f2, f12) = (at(c1), at(c2), at(c1 + c2));
            for k in 0..f1.x_faces.len() {
                let r = f1.x_faces[k] + f2.x_faces[k] - f12.x_faces[k] - diffusive.x_faces[k];
                prop_assert!(r.abs() <= 1e-13 * (1.0 + f12.max_abs()));
            }
            for k in 0..f1.y_faces.len() {
                let r = f1.y_faces[k] + f2.y_faces[k] - f12.y_faces[k] - diffusive.y_faces[k];
                prop_assert!(r.abs() <= 1e-13 * (1.0 + f12.max_abs()));
            }
        }

        #[test]
        fn telescoping_divergence(xs in prop::collection::vec(-10.0f64..10.0, 6 * 5),
                                  ys in prop::collection::vec(-10.0f64..10.0, 5 * 6)) {
            let g = GridSpec::new(5, 5, 1.0, 2.0).unwrap();
            let f = FaceField::new(g, xs, ys).unwrap();
            let d = integrate(&div_faces(&f));
            let scale: f64 = g.cell_volume() * f.x_faces.iter().chain(&f.y_faces).map(|v| v.abs()).sum::<f64>();
            prop_assert!(d.abs() <= 1e-13 * scale.max(1.0));
        }

        #[test]
        fn laplacian_integrates_to_zero(vals in prop::collection::vec(-5.0f64..5.0, 64)) {
            let f = ScalarField::from_values(unit(8), vals).unwrap();
            prop_assert!(integrate(&laplacian(&f)).abs() <= 1e-13 * 64.0 * 5.0 * 64.0);
        }
    }
}
