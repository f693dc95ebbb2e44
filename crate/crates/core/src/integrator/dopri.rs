//! Dormand–Prince 5(4) embedded Runge–Kutta pair.

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];

const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Result of one trial step.
#[derive(Debug, Clone)]
pub struct Trial {
    pub y: Vec<f64>,
    /// Largest weighted component error per unit step; the step is acceptable when `≤ 1`.
    pub error: f64,
}

/// One Dormand–Prince step of size `h` from `(s, y)`.
pub fn step<E>(
    rhs: &mut impl FnMut(f64, &[f64]) -> Result<Vec<f64>, E>,
    s: f64,
    y: &[f64],
    h: f64,
    atol: f64,
    rtol: f64,
) -> Result<Trial, E> {
    let n = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    let mut stage = vec![0.0; n];
    for i in 0..7 {
        for (c, yc) in stage.iter_mut().enumerate() {
            *yc = y[c] + h * (0..i).map(|j| A[i][j] * k[j][c]).sum::<f64>();
        }
        k.push(rhs(s + C[i] * h, &stage)?);
    }
    let y5: Vec<f64> = (0..n).map(|c| y[c] + h * (0..7).map(|i| B5[i] * k[i][c]).sum::<f64>()).collect();
    let mut error = 0.0_f64;
    for c in 0..n {
        let e = h * (0..7).map(|i| (B5[i] - B4[i]) * k[i][c]).sum::<f64>();
        let sc = atol + rtol * y[c].abs().max(y5[c].abs());
        error = error.max((e / (sc * h.abs().min(1.0))).abs());
    }
    Ok(Trial { y: y5, error })
}

/// Step-size factor after a trial with error `err`.
pub fn growth(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_rows_sum_to_nodes() {
        for i in 0..7 {
            let sum: f64 = A[i].iter().sum();
            assert!((sum - C[i]).abs() < 1e-14);
        }
        assert!((B5.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((B4.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fifth_order_convergence_on_exponential() {
        let mut f = |_s: f64, y: &[f64]| -> Result<Vec<f64>, ()> { Ok(vec![y[0]]) };
        let mut err = |h: f64| (step(&mut f, 0.0, &[1.0], h, 1e-9, 1e-9).unwrap().y[0] - h.exp()).abs();
        let ratio = err(0.2) / err(0.1);
        // local error is O(h^6)
        assert!(ratio > 50.0 && ratio < 80.0, "{ratio}");
    }
}
