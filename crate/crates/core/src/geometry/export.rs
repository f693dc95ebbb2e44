use serde::Serialize;

use super::{Foliation, GeometryError, Side};

/// One row of the leaf export `(s, x, f, is_kink)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeafRow {
    pub s: f64,
    pub x: f64,
    pub f: f64,
    pub is_kink: bool,
}

/// One row of the kink-curve export `(s, x_kink, rapidity_left, rapidity_right)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KinkRow {
    pub s: f64,
    pub x_kink: f64,
    pub rapidity_left: f64,
    pub rapidity_right: f64,
}

/// Samples every leaf `s` on `x_grid`, with the leaf's kink loci merged in.
pub fn leaf_rows<F: Foliation + ?Sized>(
    fol: &F,
    s_grid: &[f64],
    x_grid: &[f64],
) -> Result<Vec<LeafRow>, GeometryError> {
    let mut rows = Vec::new();
    for &s in s_grid {
        let kinks = fol.kinks_at(s);
        let mut pts: Vec<(f64, bool)> = x_grid
            .iter()
            .filter(|x| !kinks.contains(x))
            .map(|&x| (x, false))
            .chain(kinks.iter().filter(|k| **k >= x_grid[0] && **k <= x_grid[x_grid.len() - 1]).map(|&k| (k, true)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (x, is_kink) in pts {
            let side = if is_kink { Side::Left } else { Side::Smooth };
            rows.push(LeafRow {
                s,
                x,
                f: fol.height(s, x, side)?,
                is_kink,
            });
        }
    }
    Ok(rows)
}

/// Rapidities `acosh(n_side · U)` between the one-sided leaf normals and the
/// unit tangent `U` of the spacetime kink curve. NaN where the kink curve is
/// not timelike or its velocity is unavailable.
pub fn kink_rapidities<F: Foliation + ?Sized>(
    fol: &F,
    curve: usize,
    s: f64,
) -> Result<Option<KinkRow>, GeometryError> {
    let Some(xk) = fol.kink_position(curve, s) else {
        return Ok(None);
    };
    let nl = fol.leaf_normal(s, xk, Side::Left)?;
    let nr = fol.leaf_normal(s, xk, Side::Right)?;
    let (rl, rr) = match fol.kink_velocity(curve, s) {
        Some(v) => {
            let dt = fol.lapse(s, xk, Side::Left)? + fol.slope(s, xk, Side::Left)? * v;
            let norm2 = dt * dt - v * v;
            if norm2 > 0.0 && dt > 0.0 {
                let (ut, ux) = (dt / norm2.sqrt(), v / norm2.sqrt());
                let rap = |n: &super::UnitNormal<1>| (n.time * ut + n.space[0] * ux).max(1.0).acosh();
                (rap(&nl), rap(&nr))
            } else {
                (f64::NAN, f64::NAN)
            }
        }
        None => (f64::NAN, f64::NAN),
    };
    Ok(Some(KinkRow {
        s,
        x_kink: xk,
        rapidity_left: rl,
        rapidity_right: rr,
    }))
}

/// Kink-curve rows for every curve and every label in `s_grid`.
pub fn kink_rows<F: Foliation + ?Sized>(fol: &F, s_grid: &[f64]) -> Result<Vec<KinkRow>, GeometryError> {
    let mut rows = Vec::new();
    for &s in s_grid {
        for c in 0..fol.kink_curve_count() {
            if let Some(r) = kink_rapidities(fol, c, s)? {
                rows.push(r);
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WedgeFoliation;

    #[test]
    fn static_symmetric_wedge_has_equal_rapidities() {
        let fol = WedgeFoliation::new(-0.5, 0.0, 0.75_f64.sqrt()).unwrap();
        let row = kink_rapidities(&fol, 0, 1.0).unwrap().unwrap();
        let expected = (1.0 / 0.75_f64.sqrt()).acosh();
        assert!((row.rapidity_left - expected).abs() < 1e-12);
        assert!((row.rapidity_right - expected).abs() < 1e-12);
    }

    #[test]
    fn leaf_rows_mark_kinks() {
        let fol = WedgeFoliation::new(-0.5, 0.25, 1.0).unwrap();
        let rows = leaf_rows(&fol, &[2.0], &[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[2].is_kink && rows[2].x == 0.5);
        assert!((rows[2].f - 2.0).abs() < 1e-15);
    }
}
