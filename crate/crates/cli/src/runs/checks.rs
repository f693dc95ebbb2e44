use hbdm_core::geometry::{Foliation, MinkowskiPoint};
use hbdm_core::guidance::{current_condition_check, ConfigurationChart, CurrentConditionRecord, GuidanceError, ScalarProduct};
use hbdm_core::wavefunction::{check_divergence, SpinorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{ArtifactWriter, Check};
use crate::scenario::{CurrentConditionRun, DivergenceRun};

#[derive(Serialize)]
struct ProductRecord {
    /// 0 for the Euclidean product, then the random positive-definite ones.
    product: usize,
    #[serde(flatten)]
    record: CurrentConditionRecord,
}

pub fn current_condition<P: SpinorField<1>>(
    psi: &P,
    fol: &dyn Foliation,
    run: &CurrentConditionRun,
    seed: u64,
    out: &mut ArtifactWriter,
) -> Result<Vec<Check>, CliError> {
    let n = psi.particles();
    let chart = ConfigurationChart::new(fol, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let products: Vec<ScalarProduct> = std::iter::once(ScalarProduct::Euclidean)
        .chain((0..run.random_products).map(|_| ScalarProduct::random(n + 1, &mut rng)))
        .collect();
    let mut records = Vec::with_capacity(run.points * products.len());
    let mut found = 0;
    let mut attempts = 0;
    while found < run.points && attempts < 100 * run.points.max(1) {
        attempts += 1;
        let s = rng.random_range(run.s_range[0]..run.s_range[1]);
        let curves: Vec<usize> = (0..fol.kink_curve_count())
            .filter(|&c| fol.kink_position(c, s).is_some())
            .collect();
        if curves.is_empty() {
            continue;
        }
        let curve = curves[rng.random_range(0..curves.len())];
        let slot = rng.random_range(0..n);
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(run.q_range[0]..run.q_range[1])).collect();
        let mut point = Vec::with_capacity(products.len());
        let mut corner = false;
        for (i, product) in products.iter().enumerate() {
            match current_condition_check(psi, &chart, s, &q, slot, curve, product) {
                Ok(record) => point.push(ProductRecord { product: i, record }),
                Err(GuidanceError::CornerPoint { .. } | GuidanceError::OnKinkSet { .. }) => {
                    corner = true;
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        if !corner {
            records.extend(point);
            found += 1;
        }
    }
    out.json("current_condition.json", &records)?;

    let worst = |euclidean: bool| {
        records
            .iter()
            .filter(|r| (r.product == 0) == euclidean)
            .map(|r| r.record.mismatch)
            .fold(0.0, f64::max)
    };
    let mut checks = vec![
        Check::at_least("kink-points", found as f64, run.points as f64, format!("{attempts} draws")),
        Check::at_most("current-condition", worst(true), run.tolerance, "Euclidean conormal"),
    ];
    if run.random_products > 0 {
        checks.push(Check::at_most(
            "current-condition-random-product",
            worst(false),
            run.tolerance,
            format!("{} random positive-definite products", run.random_products),
        ));
    }
    let same = records.iter().filter(|r| r.record.same_sign).count();
    checks.push(
        Check::at_least("same-sign-fraction", same as f64 / records.len().max(1) as f64, 0.0, "").report_only(),
    );
    Ok(checks)
}

#[derive(Serialize)]
struct DivergenceRecord {
    t: Vec<f64>,
    x: Vec<Vec<f64>>,
    /// Relative divergence residual per particle slot.
    residuals: Vec<f64>,
}

pub fn divergence<const D: usize, P: SpinorField<D>>(
    psi: &P,
    run: &DivergenceRun,
    seed: u64,
    out: &mut ArtifactWriter,
) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(run.points);
    for _ in 0..run.points {
        let config: Vec<MinkowskiPoint<D>> = (0..psi.particles())
            .map(|_| {
                let t = rng.random_range(run.t_range[0]..run.t_range[1]);
                MinkowskiPoint::new(t, [0; D].map(|_| rng.random_range(run.x_range[0]..run.x_range[1])))
            })
            .collect();
        let residuals = check_divergence(psi, &config, run.h)?;
        records.push(DivergenceRecord {
            t: config.iter().map(|p| p.t).collect(),
            x: config.iter().map(|p| p.x.to_vec()).collect(),
            residuals,
        });
    }
    out.json("divergence.json", &records)?;
    let worst = records.iter().flat_map(|r| &r.residuals).copied().fold(0.0, f64::max);
    Ok(vec![Check::at_most(
        "divergence",
        worst,
        run.tolerance,
        format!("{} configurations, h = {}", run.points, run.h),
    )])
}
