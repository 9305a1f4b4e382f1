//! Structured rectangular grid on `(0, lx) x (0, ly)` with cell-centered
//! scalar fields, face-centered fluxes and the discrete calculus used by the
//! rest of the crate.
//!
//! Cells are indexed row-major from the low-y row: cell `(i, j)` has index
//! `j * nx + i` and center `((i + 1/2) hx, (j + 1/2) hy)`. Vertical faces are
//! stored as `j * (nx + 1) + i` (face `i` sits at `x = i hx`), horizontal faces
//! as `j * nx + i` (face `j` sits at `y = j hy`). Boundary faces carry zero
//! flux, which is how the no-flux condition enters every divergence.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TaxisError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(TaxisError::InvalidGrid(format!(
                "need at least 2 cells per direction, got {nx} x {ny}"
            )));
        }
        if !(lx > 0.0 && lx.is_finite() && ly > 0.0 && ly.is_finite()) {
            return Err(TaxisError::InvalidGrid(format!(
                "extents must be positive and finite, got {lx} x {ly}"
            )));
        }
        Ok(Self { nx, ny, lx, ly })
    }

    /// `n x n` cells on the unit square.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0, 1.0)
    }

    #[inline]
    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    #[inline]
    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    #[inline]
    pub fn h_min(&self) -> f64 {
        self.hx().min(self.hy())
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.hx(), (j as f64 + 0.5) * self.hy())
    }

    pub fn n_xfaces(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    pub fn n_yfaces(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    #[inline]
    pub fn xface(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn yface(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(TaxisError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(TaxisError::NonFinite(k));
        }
        Ok(Self { grid, values })
    }

    /// Builds a field without validation; callers guarantee finiteness.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self::from_raw(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f(x, y)` at cell centers.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.center(i, j);
                values.push(f(x, y));
            }
        }
        Self::from_raw(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(TaxisError::GridMismatch)
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }

    /// Spatial mean and variance with respect to the normalized measure.
    pub fn mean_variance(&self) -> (f64, f64) {
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        (mean, var)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    grid: GridSpec,
    pub x_faces: Vec<f64>,
    pub y_faces: Vec<f64>,
}

impl FaceField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            x_faces: vec![0.0; grid.n_xfaces()],
            y_faces: vec![0.0; grid.n_yfaces()],
        }
    }

    /// Builds a face field and zeroes the boundary entries.
    pub fn new(grid: GridSpec, mut x_faces: Vec<f64>, mut y_faces: Vec<f64>) -> Result<Self> {
        if x_faces.len() != grid.n_xfaces() {
            return Err(TaxisError::LengthMismatch {
                expected: grid.n_xfaces(),
                got: x_faces.len(),
            });
        }
        if y_faces.len() != grid.n_yfaces() {
            return Err(TaxisError::LengthMismatch {
                expected: grid.n_yfaces(),
                got: y_faces.len(),
            });
        }
        for j in 0..grid.ny {
            x_faces[grid.xface(0, j)] = 0.0;
            x_faces[grid.xface(grid.nx, j)] = 0.0;
        }
        for i in 0..grid.nx {
            y_faces[grid.yface(i, 0)] = 0.0;
            y_faces[grid.yface(i, grid.ny)] = 0.0;
        }
        Ok(Self {
            grid,
            x_faces,
            y_faces,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn max_abs(&self) -> f64 {
        self.x_faces
            .iter()
            .chain(&self.y_faces)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Midpoint quadrature `hx hy sum f`.
pub fn integrate(f: &ScalarField) -> f64 {
    f.grid.cell_volume() * f.values.iter().sum::<f64>()
}

/// Face-normal differences; boundary faces stay zero.
pub fn grad_faces(f: &ScalarField) -> FaceField {
    let g = f.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let v = &f.values;
    let mut out = FaceField::zeros(g);
    for j in 0..g.ny {
        for i in 1..g.nx {
            out.x_faces[g.xface(i, j)] = (v[g.idx(i, j)] - v[g.idx(i - 1, j)]) / hx;
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            out.y_faces[g.yface(i, j)] = (v[g.idx(i, j)] - v[g.idx(i, j - 1)]) / hy;
        }
    }
    out
}

/// Net outward flux per cell divided by the cell volume.
pub fn div_faces(flux: &FaceField) -> ScalarField {
    let g = flux.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let fx = flux.x_faces[g.xface(i + 1, j)] - flux.x_faces[g.xface(i, j)];
            let fy = flux.y_faces[g.yface(i, j + 1)] - flux.y_faces[g.yface(i, j)];
            out[g.idx(i, j)] = fx / hx + fy / hy;
        }
    }
    ScalarField::from_raw(g, out)
}

/// Five-point Laplacian with zero-flux closure.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    div_faces(&grad_faces(f))
}

/// Index of the neighbour at offset `d`, reflected back into `0..n`.
#[inline]
fn reflect(k: usize, d: isize, n: usize) -> usize {
    let m = k as isize + d;
    if m < 0 {
        (-m - 1) as usize
    } else if m >= n as isize {
        (2 * n as isize - m - 1) as usize
    } else {
        m as usize
    }
}

/// Cell-centered central-difference gradient with reflected ghosts.
pub fn grad_cells(f: &ScalarField) -> (ScalarField, ScalarField) {
    let g = f.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let mut gx = vec![0.0; g.len()];
    let mut gy = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let e = f.at(reflect(i, 1, g.nx), j);
            let w = f.at(reflect(i, -1, g.nx), j);
            let n = f.at(i, reflect(j, 1, g.ny));
            let s = f.at(i, reflect(j, -1, g.ny));
            gx[g.idx(i, j)] = (e - w) / (2.0 * hx);
            gy[g.idx(i, j)] = (n - s) / (2.0 * hy);
        }
    }
    (ScalarField::from_raw(g, gx), ScalarField::from_raw(g, gy))
}

/// Per-cell `|D^2 f|^2 = f_xx^2 + 2 f_xy^2 + f_yy^2`, central differences with
/// reflected ghosts (corners reflected in both directions).
pub fn hessian_sq(f: &ScalarField) -> ScalarField {
    let g = f.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = vec![0.0; g.len()];
    for j in 0..g.ny {
        let jn = reflect(j, 1, g.ny);
        let js = reflect(j, -1, g.ny);
        for i in 0..g.nx {
            let ie = reflect(i, 1, g.nx);
            let iw = reflect(i, -1, g.nx);
            let c = f.at(i, j);
            let fxx = (f.at(ie, j) - 2.0 * c + f.at(iw, j)) / (hx * hx);
            let fyy = (f.at(i, jn) - 2.0 * c + f.at(i, js)) / (hy * hy);
            let fxy = (f.at(ie, jn) - f.at(ie, js) - f.at(iw, jn) + f.at(iw, js)) / (4.0 * hx * hy);
            out[g.idx(i, j)] = fxx * fxx + 2.0 * fxy * fxy + fyy * fyy;
        }
    }
    ScalarField::from_raw(g, out)
}

/// `|D^2 ln f|^2`, requiring `min f >= floor > 0`.
pub fn log_hessian_sq(f: &ScalarField, floor: f64) -> Result<ScalarField> {
    let min = f.min();
    if !(floor > 0.0) || min < floor {
        return Err(TaxisError::NonPositiveField { min, floor });
    }
    Ok(hessian_sq(&f.map(f64::ln)))
}

pub fn linf(f: &ScalarField) -> f64 {
    f.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `(integral |f|^p)^(1/p)`. Non-integer exponents require `f >= 0`.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    Ok(lp_integral(f, p)?.powf(1.0 / p))
}

/// `integral |f|^p`, the quantity the a priori L^p estimates bound.
pub fn lp_integral(f: &ScalarField, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(TaxisError::InvalidParams(format!("L^p exponent must be >= 1, got {p}")));
    }
    let min = f.min();
    if p.fract() != 0.0 && min < 0.0 {
        return Err(TaxisError::NegativeFieldForFractionalPower { p, min });
    }
    let sum: f64 = if p == 1.0 {
        f.values.iter().map(|v| v.abs()).sum()
    } else if p.fract() == 0.0 && p <= 64.0 {
        let k = p as i32;
        f.values.iter().map(|v| v.abs().powi(k)).sum()
    } else {
        f.values.iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok(sum * f.grid.cell_volume())
}

/// One quadrature node of the face rule: the two cells sharing the face
/// (equal on boundary faces), the squared full gradient on the face and the
/// node weight (1 interior, 1/2 boundary).
#[derive(Debug, Clone, Copy)]
pub struct FaceNode {
    pub a: usize,
    pub b: usize,
    pub grad_sq: f64,
    pub weight: f64,
}

/// Face rule for integrands that depend on the full gradient `|grad f|`.
///
/// On each face the normal derivative is the face difference and the
/// tangential derivative is the mean of the adjacent cell-centered central
/// differences. Vertical and horizontal faces each tile the domain once with
/// dual cells, so `integral G = (hx hy / 2) sum weight * G`.
pub fn face_nodes(f: &ScalarField) -> Vec<FaceNode> {
    let g = f.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let (gx, gy) = grad_cells(f);
    let mut nodes = Vec::with_capacity(g.n_xfaces() + g.n_yfaces());
    for j in 0..g.ny {
        for i in 0..=g.nx {
            let (a, b, weight) = if i == 0 {
                (g.idx(0, j), g.idx(0, j), 0.5)
            } else if i == g.nx {
                (g.idx(g.nx - 1, j), g.idx(g.nx - 1, j), 0.5)
            } else {
                (g.idx(i - 1, j), g.idx(i, j), 1.0)
            };
            let normal = if a == b { 0.0 } else { (f.values[b] - f.values[a]) / hx };
            let tangential = 0.5 * (gy.values[a] + gy.values[b]);
            nodes.push(FaceNode {
                a,
                b,
                grad_sq: normal * normal + tangential * tangential,
                weight,
            });
        }
    }
    for j in 0..=g.ny {
        for i in 0..g.nx {
            let (a, b, weight) = if j == 0 {
                (g.idx(i, 0), g.idx(i, 0), 0.5)
            } else if j == g.ny {
                (g.idx(i, g.ny - 1), g.idx(i, g.ny - 1), 0.5)
            } else {
                (g.idx(i, j - 1), g.idx(i, j), 1.0)
            };
            let normal = if a == b { 0.0 } else { (f.values[b] - f.values[a]) / hy };
            let tangential = 0.5 * (gx.values[a] + gx.values[b]);
            nodes.push(FaceNode {
                a,
                b,
                grad_sq: normal * normal + tangential * tangential,
                weight,
            });
        }
    }
    nodes
}

/// `integral G(a, b, |grad f|^2)` over the face rule of [`face_nodes`].
pub fn face_rule(grid: &GridSpec, nodes: &[FaceNode], g: impl Fn(usize, usize, f64) -> f64) -> f64 {
    let s: f64 = nodes.iter().map(|n| n.weight * g(n.a, n.b, n.grad_sq)).sum();
    0.5 * grid.cell_volume() * s
}

/// Split rule for quadratic forms `integral w |grad f|^2`: each interior face
/// contributes `w_face * (normal difference)^2 * hx hy`, the discrete Dirichlet
/// form that pairs with [`laplacian`] under summation by parts.
pub fn quadratic_form(grad: &FaceField, w: impl Fn(usize, usize) -> f64) -> f64 {
    let g = grad.grid;
    let mut s = 0.0;
    for j in 0..g.ny {
        for i in 1..g.nx {
            let d = grad.x_faces[g.xface(i, j)];
            s += w(g.idx(i - 1, j), g.idx(i, j)) * d * d;
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let d = grad.y_faces[g.yface(i, j)];
            s += w(g.idx(i, j - 1), g.idx(i, j)) * d * d;
        }
    }
    s * g.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit(n: usize) -> GridSpec {
        GridSpec::unit_square(n).unwrap()
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridSpec::new(1, 4, 1.0, 1.0).is_err());
        assert!(GridSpec::new(4, 1, 1.0, 1.0).is_err());
        assert!(GridSpec::new(4, 4, 0.0, 1.0).is_err());
        assert!(GridSpec::new(4, 4, 1.0, -2.0).is_err());
    }

    #[test]
    fn total_volume_matches_extent() {
        let g = GridSpec::new(7, 3, 2.0, 0.5).unwrap();
        assert_abs_diff_eq!(g.len() as f64 * g.cell_volume(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn integrate_examples() {
        for n in [2, 5, 16] {
            assert_abs_diff_eq!(ScalarField::constant(unit(n), 1.0).integrate(), 1.0, epsilon = 1e-14);
        }
        assert_eq!(ScalarField::zeros(unit(4)).integrate(), 0.0);
        // cell centers 1/8, 3/8, 5/8, 7/8 sum to 2 per row; 4 rows times 1/16
        let f = ScalarField::from_fn(unit(4), |x, _| x);
        assert_eq!(f.integrate(), 0.5);
    }

    #[test]
    fn grad_of_linear_and_constant() {
        let g = grad_faces(&ScalarField::constant(unit(4), 3.0));
        assert_eq!(g.max_abs(), 0.0);

        let grid = unit(4);
        let g = grad_faces(&ScalarField::from_fn(grid, |x, _| x));
        for j in 0..4 {
            assert_eq!(g.x_faces[grid.xface(0, j)], 0.0);
            assert_eq!(g.x_faces[grid.xface(4, j)], 0.0);
            for i in 1..4 {
                assert_abs_diff_eq!(g.x_faces[grid.xface(i, j)], 1.0, epsilon = 1e-14);
            }
        }
        assert!(g.y_faces.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grad_of_single_hot_cell() {
        let grid = unit(4);
        let mut f = ScalarField::zeros(grid);
        f.values_mut()[grid.idx(1, 2)] = 1.0;
        let g = grad_faces(&f);
        assert_eq!(g.x_faces[grid.xface(1, 2)], 4.0);
        assert_eq!(g.x_faces[grid.xface(2, 2)], -4.0);
        assert_eq!(g.y_faces[grid.yface(1, 2)], 4.0);
        assert_eq!(g.y_faces[grid.yface(1, 3)], -4.0);
        let nonzero = g.x_faces.iter().chain(&g.y_faces).filter(|v| **v != 0.0).count();
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn div_of_linear_gradient_lives_on_boundary_cells() {
        let grid = unit(6);
        let d = div_faces(&grad_faces(&ScalarField::from_fn(grid, |x, y| 2.0 * x - y)));
        for j in 0..6 {
            for i in 0..6 {
                let boundary = i == 0 || i == 5 || j == 0 || j == 5;
                let val = d.at(i, j);
                if boundary {
                    assert!(val.abs() > 1.0, "cell ({i},{j}) = {val}");
                } else {
                    assert_abs_diff_eq!(val, 0.0, epsilon = 1e-10);
                }
            }
        }
        assert_eq!(div_faces(&FaceField::zeros(grid)).max(), 0.0);
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let l = laplacian(&ScalarField::constant(unit(9), 2.5));
        assert_eq!(linf(&l), 0.0);
    }

    fn cos_laplacian_error(n: usize) -> f64 {
        let pi = std::f64::consts::PI;
        let f = ScalarField::from_fn(unit(n), |x, y| (pi * x).cos() * (pi * y).cos());
        let exact = ScalarField::from_fn(unit(n), |x, y| -2.0 * pi * pi * (pi * x).cos() * (pi * y).cos());
        linf(&laplacian(&f).zip_map(&exact, |a, b| a - b).unwrap())
    }

    #[test]
    fn laplacian_converges_at_second_order() {
        let pi = std::f64::consts::PI;
        let err1d = |n: usize| {
            let f = ScalarField::from_fn(unit(n), |x, _| (pi * x).cos());
            let exact = ScalarField::from_fn(unit(n), |x, _| -pi * pi * (pi * x).cos());
            linf(&laplacian(&f).zip_map(&exact, |a, b| a - b).unwrap())
        };
        let r = err1d(64) / err1d(128);
        assert!((3.5..=4.5).contains(&r), "ratio {r}");

        let e = [32, 64, 128].map(cos_laplacian_error);
        for k in 0..2 {
            let r = e[k] / e[k + 1];
            assert!((3.5..=4.5).contains(&r), "ratio {r}");
        }
    }

    #[test]
    fn laplacian_respects_reflection_symmetry() {
        let grid = unit(10);
        let f = ScalarField::from_fn(grid, |x, y| {
            let (a, b) = (x - 0.5, y - 0.5);
            (a * a + 0.3 * b * b).exp() + (3.0 * a * b).cos()
        });
        let l = laplacian(&f);
        for j in 0..10 {
            for i in 0..10 {
                let v = l.at(i, j);
                assert_abs_diff_eq!(v, l.at(9 - i, j), epsilon = 1e-10);
                assert_abs_diff_eq!(v, l.at(i, 9 - j), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn hessian_examples() {
        let grid = unit(8);
        assert_eq!(hessian_sq(&ScalarField::constant(grid, 4.0)).max(), 0.0);
        let h = hessian_sq(&ScalarField::from_fn(grid, |x, _| x * x));
        for j in 0..8 {
            for i in 1..7 {
                assert_abs_diff_eq!(h.at(i, j), 4.0, epsilon = 1e-9);
            }
        }
        let lh = log_hessian_sq(&ScalarField::constant(grid, 3.0), 1e-12).unwrap();
        assert_eq!(lh.max(), 0.0);
        let err = log_hessian_sq(&ScalarField::constant(grid, 0.0), 1e-12).unwrap_err();
        assert!(matches!(err, TaxisError::NonPositiveField { .. }));
    }

    #[test]
    fn mixed_derivative_of_bilinear() {
        let grid = unit(8);
        let h = hessian_sq(&ScalarField::from_fn(grid, |x, y| x * y));
        // interior: f_xy = 1, so |D^2 f|^2 = 2
        for j in 1..7 {
            for i in 1..7 {
                assert_abs_diff_eq!(h.at(i, j), 2.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn norms() {
        let grid = unit(5);
        let two = ScalarField::constant(grid, 2.0);
        assert_eq!(linf(&two), 2.0);
        for p in [1.0, 1.5, 2.0, 3.0, 7.25] {
            assert_abs_diff_eq!(lp_norm(&two, p).unwrap(), 2.0, epsilon = 1e-13);
        }
        let mut f = ScalarField::zeros(grid);
        f.values_mut()[7] = -5.0;
        assert_eq!(linf(&f), 5.0);
        assert_abs_diff_eq!(lp_norm(&f, 1.0).unwrap(), f.map(f64::abs).integrate(), epsilon = 1e-13);
        assert!(matches!(
            lp_norm(&f, 2.5),
            Err(TaxisError::NegativeFieldForFractionalPower { .. })
        ));
        assert!(lp_norm(&f, 2.0).is_ok());
    }

    #[test]
    fn face_rule_integrates_constants_and_linear_gradients() {
        let grid = GridSpec::new(6, 9, 2.0, 3.0).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| 0.5 * x + 2.0 * y);
        let nodes = face_nodes(&f);
        assert_abs_diff_eq!(face_rule(&grid, &nodes, |_, _, _| 1.0), grid.area(), epsilon = 1e-12);
        // |grad f|^2 = 4.25 in the interior; boundary nodes lose the normal part
        let interior: f64 = face_rule(&grid, &nodes, |_, _, g| g);
        assert!(interior > 0.0 && interior <= 4.25 * grid.area() + 1e-12);
    }

    #[test]
    fn quadratic_form_is_dirichlet_pairing() {
        let grid = unit(12);
        let f = ScalarField::from_fn(grid, |x, y| (3.0 * x).sin() + x * y * y);
        let e = quadratic_form(&grad_faces(&f), |_, _| 1.0);
        let pairing = -integrate(&f.zip_map(&laplacian(&f), |a, b| a * b).unwrap());
        assert_abs_diff_eq!(e, pairing, epsilon = 1e-12 * e.abs());
    }
}
