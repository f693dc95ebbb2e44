use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use super::Domain;
use crate::geometry::Side;
use crate::guidance::{chart_current, ChartCurrent, ConfigurationChart, GuidanceError};
use crate::wavefunction::SpinorField;

/// Gauss–Legendre nodes per panel.
pub const QUADRATURE_ORDER: usize = 8;

/// Tensor-product Gauss–Legendre quadrature of chart densities on one leaf,
/// with panels split at the kinks of the leaf.
pub struct LeafQuadrature<'a, 'f, P: ?Sized> {
    psi: &'a P,
    chart: &'a ConfigurationChart<'f>,
    rule: Vec<(f64, f64)>,
}

impl<'a, 'f, P: SpinorField<1> + ?Sized> LeafQuadrature<'a, 'f, P> {
    pub fn new(psi: &'a P, chart: &'a ConfigurationChart<'f>) -> Self {
        Self::with_order(psi, chart, QUADRATURE_ORDER)
    }

    pub fn with_order(psi: &'a P, chart: &'a ConfigurationChart<'f>, order: usize) -> Self {
        let n = NonZeroUsize::new(order.max(1)).expect("positive order");
        let rule = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
        Self { psi, chart, rule }
    }

    pub fn chart(&self) -> &ConfigurationChart<'f> {
        self.chart
    }

    pub fn psi(&self) -> &P {
        self.psi
    }

    /// Chart current with smooth sides, or left sides if `q` is on a kink.
    pub fn current(&self, s: f64, q: &[f64], sides: Option<&[Side]>) -> Result<ChartCurrent, GuidanceError> {
        let n = q.len();
        match sides {
            Some(sides) => chart_current(self.psi, self.chart, s, q, sides),
            None => chart_current(self.psi, self.chart, s, q, &vec![Side::Smooth; n])
                .or_else(|_| chart_current(self.psi, self.chart, s, q, &vec![Side::Left; n])),
        }
    }

    /// Chart density `j⁰(s, q)`.
    pub fn density(&self, s: f64, q: &[f64]) -> Result<f64, GuidanceError> {
        self.current(s, q, None).map(|c| c.j0)
    }

    /// Kink positions of leaf `s` strictly inside `(lo, hi)`, folded into the
    /// fundamental domain for periodic domains.
    pub fn kink_breaks(&self, s: f64, domain: &Domain, lo: f64, hi: f64) -> Vec<f64> {
        let mut breaks: Vec<f64> = self
            .chart
            .foliation()
            .kinks_at(s)
            .into_iter()
            .map(|x| domain.wrap(&[x])[0])
            .filter(|&x| lo < x && x < hi)
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        breaks
    }

    /// Nodes and weights on `[lo, hi]` with `panels` equal panels, refined at `breaks`.
    pub fn axis_nodes(&self, lo: f64, hi: f64, breaks: &[f64], panels: usize) -> Vec<(f64, f64)> {
        let mut edges: Vec<f64> = (0..=panels.max(1))
            .map(|i| lo + (hi - lo) * i as f64 / panels.max(1) as f64)
            .chain(breaks.iter().copied().filter(|&x| lo < x && x < hi))
            .collect();
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        let mut nodes = Vec::with_capacity((edges.len() - 1) * self.rule.len());
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            nodes.extend(self.rule.iter().map(|&(x, wt)| (mid + half * x, half * wt)));
        }
        nodes
    }

    /// Nodes for every axis of the box `axes` on leaf `s`.
    pub fn box_nodes(&self, s: f64, domain: &Domain, axes: &[(f64, f64)], panels: usize) -> Vec<Vec<(f64, f64)>> {
        axes.iter()
            .map(|&(lo, hi)| self.axis_nodes(lo, hi, &self.kink_breaks(s, domain, lo, hi), panels))
            .collect()
    }

    /// `∫ j⁰(s, q) dq` over the box `axes`.
    pub fn box_mass(&self, s: f64, domain: &Domain, axes: &[(f64, f64)], panels: usize) -> Result<f64, GuidanceError> {
        let nodes = self.box_nodes(s, domain, axes, panels);
        tensor_sum(&nodes, |q| self.density(s, q))
    }
}

/// `Σ w_1⋯w_n f(x_1, …, x_n)` over the tensor product of per-axis nodes.
pub fn tensor_sum<E>(axes: &[Vec<(f64, f64)>], mut f: impl FnMut(&[f64]) -> Result<f64, E>) -> Result<f64, E> {
    if axes.iter().any(Vec::is_empty) {
        return Ok(0.0);
    }
    let n = axes.len();
    let mut idx = vec![0usize; n];
    let mut point = vec![0.0; n];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for k in 0..n {
            let (x, wk) = axes[k][idx[k]];
            point[k] = x;
            w *= wk;
        }
        total += w * f(&point)?;
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(total);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WedgeFoliation;
    use crate::wavefunction::{presets, DiracRepresentation};

    #[test]
    fn tensor_sum_integrates_polynomials() {
        let psi = presets::single_mode(DiracRepresentation::<1>::dirac(), 0.0);
        let flat = WedgeFoliation::<1>::flat();
        let chart = ConfigurationChart::new(&flat, 1);
        let quad = LeafQuadrature::new(&psi, &chart);
        let x = quad.axis_nodes(0.0, 2.0, &[0.7], 3);
        let y = quad.axis_nodes(-1.0, 1.0, &[], 1);
        let v: Result<f64, ()> = tensor_sum(&[x, y], |p| Ok(p[0].powi(5) * p[1].powi(2)));
        assert!((v.unwrap() - 64.0 / 6.0 * 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn kinked_density_is_integrated_exactly_across_the_kink() {
        // a plane wave with velocity u has chart density ρ(1 − f′u) on the
        // wedge leaf, a piecewise constant that a split rule integrates exactly
        let psi = presets::single_mode(DiracRepresentation::<1>::dirac(), 0.8);
        let wedge = WedgeFoliation::<1>::new(0.4, 0.0, 1.0).unwrap();
        let chart = ConfigurationChart::new(&wedge, 1);
        let quad = LeafQuadrature::new(&psi, &chart);
        let d = Domain::window(vec![-1.3], vec![0.9]);
        let mass = quad.box_mass(0.5, &d, &[(-1.3, 0.9)], 1).unwrap();
        let left = quad.density(0.5, &[-0.5]).unwrap();
        let right = quad.density(0.5, &[0.5]).unwrap();
        assert!((mass - (1.3 * left + 0.9 * right)).abs() < 1e-12);
        assert!((left - right).abs() > 0.1);
    }
}
