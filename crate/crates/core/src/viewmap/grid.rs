use serde::{Deserialize, Serialize};

use super::{Outcome, RawSampleSet, ViewMapError, ViewSample};
use crate::simcam::wrap_angle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingParams {
    /// Kernel variance in rad².
    pub variance: f64,
    /// Grid spacing in rad.
    pub spacing: f64,
    /// Half-width of the grid window in rad, along both axes.
    pub extent: f64,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        Self {
            variance: 0.2,
            spacing: 0.05,
            extent: 1.05,
        }
    }
}

impl SmoothingParams {
    pub fn validate(&self) -> Result<(), ViewMapError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.variance) && ok(self.spacing) && ok(self.extent)) {
            return Err(ViewMapError::InvalidParams("all values must be positive".into()));
        }
        let steps = self.extent / self.spacing;
        if (steps - steps.round()).abs() > 1e-9 || steps.round() < 1.0 {
            return Err(ViewMapError::InvalidParams(
                "extent must be a positive multiple of spacing".into(),
            ));
        }
        Ok(())
    }

    /// Cells on each side of the center along one axis.
    pub fn half_cells(&self) -> usize {
        (self.extent / self.spacing).round() as usize
    }

    /// Cells along one axis: `2·extent/spacing + 1`.
    pub fn cells_per_axis(&self) -> usize {
        2 * self.half_cells() + 1
    }

    /// Center of cell `i` along either axis.
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 - self.half_cells() as f64) * self.spacing
    }

    pub fn kernel(&self, d: f64) -> f64 {
        (-d * d / (2.0 * self.variance)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    CandidateDensity,
    TpDensity,
    FpDensity,
    Accuracy,
    TpMinusFp,
}

impl Channel {
    pub const ALL: [Channel; 5] = [
        Channel::CandidateDensity,
        Channel::TpDensity,
        Channel::FpDensity,
        Channel::Accuracy,
        Channel::TpMinusFp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::CandidateDensity => "candidate_density",
            Channel::TpDensity => "tp_density",
            Channel::FpDensity => "fp_density",
            Channel::Accuracy => "accuracy",
            Channel::TpMinusFp => "tp_minus_fp",
        }
    }
}

/// Provenance stored alongside a map.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MapMeta {
    pub shape_class: Option<String>,
    pub variant: Option<String>,
    pub scorer: Option<String>,
    pub seeds: Vec<u64>,
    pub objects: usize,
    /// Hash of the experiment config that produced the map.
    #[serde(default)]
    pub config_hash: Option<String>,
}

/// Five channels over a square (azimuth, elevation) grid, stored row-major
/// with azimuth fastest. Undefined accuracy cells hold NaN.
#[derive(Debug, Clone)]
pub struct ViewMapGrid {
    pub params: SmoothingParams,
    pub threshold: f64,
    pub(crate) n: usize,
    pub(crate) channels: [Vec<f64>; 5],
    pub sample_count: u64,
    pub meta: MapMeta,
}

impl PartialEq for ViewMapGrid {
    /// Bitwise comparison of all numbers, so NaN cells compare equal.
    fn eq(&self, other: &Self) -> bool {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        self.params.variance.to_bits() == other.params.variance.to_bits()
            && self.params.spacing.to_bits() == other.params.spacing.to_bits()
            && self.params.extent.to_bits() == other.params.extent.to_bits()
            && self.threshold.to_bits() == other.threshold.to_bits()
            && self.n == other.n
            && self.sample_count == other.sample_count
            && self.meta == other.meta
            && self
                .channels
                .iter()
                .zip(&other.channels)
                .all(|(a, b)| bits(a) == bits(b))
    }
}

impl ViewMapGrid {
    pub fn zeros(params: SmoothingParams, threshold: f64) -> Result<Self, ViewMapError> {
        params.validate()?;
        let n = params.cells_per_axis();
        let mut channels: [Vec<f64>; 5] = Default::default();
        for (k, c) in channels.iter_mut().enumerate() {
            let fill = if k == Channel::Accuracy.index() { f64::NAN } else { 0.0 };
            *c = vec![fill; n * n];
        }
        Ok(Self {
            params,
            threshold,
            n,
            channels,
            sample_count: 0,
            meta: MapMeta::default(),
        })
    }

    /// Cells per axis; the grid is `dims() × dims()`.
    pub fn dims(&self) -> usize {
        self.n
    }

    pub fn azimuth(&self, i: usize) -> f64 {
        self.params.center(i)
    }

    pub fn elevation(&self, j: usize) -> f64 {
        self.params.center(j)
    }

    pub fn channel(&self, c: Channel) -> &[f64] {
        &self.channels[c.index()]
    }

    pub fn channel_mut(&mut self, c: Channel) -> &mut [f64] {
        &mut self.channels[c.index()]
    }

    /// Value at azimuth index `i`, elevation index `j`.
    pub fn get(&self, c: Channel, i: usize, j: usize) -> f64 {
        self.channels[c.index()][j * self.n + i]
    }

    /// Accuracy, or `None` where no sample has kernel mass.
    pub fn accuracy(&self, i: usize, j: usize) -> Option<f64> {
        let a = self.get(Channel::Accuracy, i, j);
        (!a.is_nan()).then_some(a)
    }

    /// Sets `tp_minus_fp = tp_density - fp_density` in every cell.
    pub(crate) fn refresh_difference(&mut self) {
        let d: Vec<f64> = self.channels[Channel::TpDensity.index()]
            .iter()
            .zip(&self.channels[Channel::FpDensity.index()])
            .map(|(t, f)| t - f)
            .collect();
        self.channels[Channel::TpMinusFp.index()] = d;
    }

    /// Bilinear interpolation of a channel at `(azimuth, elevation)`. Points
    /// outside the grid window give `None`, as does a NaN corner.
    pub fn interpolate(&self, c: Channel, azimuth: f64, elevation: f64) -> Option<f64> {
        let e = self.params.extent;
        if !(azimuth.abs() <= e && elevation.abs() <= e) {
            return None;
        }
        let last = self.n - 1;
        let u = (azimuth / self.params.spacing + self.params.half_cells() as f64).clamp(0.0, last as f64);
        let v = (elevation / self.params.spacing + self.params.half_cells() as f64).clamp(0.0, last as f64);
        let (i0, j0) = ((u.floor() as usize).min(last), (v.floor() as usize).min(last));
        let (i1, j1) = ((i0 + 1).min(last), (j0 + 1).min(last));
        let (fu, fv) = (u - i0 as f64, v - j0 as f64);
        let corners = [self.get(c, i0, j0), self.get(c, i1, j0), self.get(c, i0, j1), self.get(c, i1, j1)];
        if corners.iter().all(|x| x.to_bits() == corners[0].to_bits()) {
            // Flat neighborhood: return the value itself so exact ties stay ties.
            return (!corners[0].is_nan()).then_some(corners[0]);
        }
        let val = (1.0 - fu) * (1.0 - fv) * self.get(c, i0, j0)
            + fu * (1.0 - fv) * self.get(c, i1, j0)
            + (1.0 - fu) * fv * self.get(c, i0, j1)
            + fu * fv * self.get(c, i1, j1);
        (!val.is_nan()).then_some(val)
    }

    /// Cell-wise mean of several maps with equal weight per map. Densities
    /// are averaged; accuracy is averaged over the maps where it is
    /// defined; `tp_minus_fp` is recomputed from the averaged densities.
    pub fn average(maps: &[ViewMapGrid]) -> Result<ViewMapGrid, ViewMapError> {
        let first = maps.first().ok_or(ViewMapError::EmptyAverage)?;
        let mut out = ViewMapGrid::zeros(first.params, first.threshold)?;
        for m in maps {
            if m.n != first.n
                || m.params != first.params
                || m.threshold.to_bits() != first.threshold.to_bits()
            {
                return Err(ViewMapError::GridMismatch);
            }
        }
        let k = maps.len() as f64;
        for ch in [Channel::CandidateDensity, Channel::TpDensity, Channel::FpDensity] {
            let dst = &mut out.channels[ch.index()];
            for m in maps {
                for (d, s) in dst.iter_mut().zip(&m.channels[ch.index()]) {
                    *d += s;
                }
            }
            dst.iter_mut().for_each(|d| *d /= k);
        }
        let acc = Channel::Accuracy.index();
        for cell in 0..out.n * out.n {
            let (sum, cnt) = maps
                .iter()
                .map(|m| m.channels[acc][cell])
                .filter(|a| !a.is_nan())
                .fold((0.0, 0usize), |(s, c), a| (s + a, c + 1));
            out.channels[acc][cell] = if cnt == 0 { f64::NAN } else { sum / cnt as f64 };
        }
        out.refresh_difference();
        out.sample_count = maps.iter().map(|m| m.sample_count).sum();
        out.meta = MapMeta {
            objects: maps.iter().map(|m| m.meta.objects.max(1)).sum(),
            ..first.meta.clone()
        };
        Ok(out)
    }
}

fn sample_order(a: &ViewSample, b: &ViewSample) -> std::cmp::Ordering {
    a.azimuth
        .total_cmp(&b.azimuth)
        .then(a.elevation.total_cmp(&b.elevation))
        .then(a.score.total_cmp(&b.score))
        .then(a.label.cmp(&b.label))
}

/// Kernel-smoothed densities of all, true-positive and false-positive
/// samples, plus kernel-weighted accuracy. Samples are summed in a fixed
/// sorted order, so the result does not depend on input order.
pub fn smooth(raw: &RawSampleSet, p: &SmoothingParams) -> Result<ViewMapGrid, ViewMapError> {
    let mut map = ViewMapGrid::zeros(*p, raw.threshold)?;
    let n = map.n;
    let mut samples = raw.samples.clone();
    samples.sort_by(sample_order);

    let mut all = vec![0.0; n * n];
    let mut tp = vec![0.0; n * n];
    let mut fp = vec![0.0; n * n];
    let mut correct = vec![0.0; n * n];
    let mut wa = vec![0.0; n];
    let mut we = vec![0.0; n];
    for s in &samples {
        for i in 0..n {
            wa[i] = p.kernel(wrap_angle(s.azimuth - p.center(i)));
            we[i] = p.kernel(s.elevation - p.center(i));
        }
        let outcome = s.outcome(raw.threshold);
        let is_correct = matches!(outcome, Outcome::TruePositive | Outcome::TrueNegative);
        for j in 0..n {
            for i in 0..n {
                let w = wa[i] * we[j];
                let c = j * n + i;
                all[c] += w;
                match outcome {
                    Outcome::TruePositive => tp[c] += w,
                    Outcome::FalsePositive => fp[c] += w,
                    _ => {}
                }
                if is_correct {
                    correct[c] += w;
                }
            }
        }
    }
    let accuracy = all
        .iter()
        .zip(&correct)
        .map(|(a, c)| if *a < 1e-12 { f64::NAN } else { (c / a).clamp(0.0, 1.0) })
        .collect();
    map.channels[Channel::CandidateDensity.index()] = all;
    map.channels[Channel::TpDensity.index()] = tp;
    map.channels[Channel::FpDensity.index()] = fp;
    map.channels[Channel::Accuracy.index()] = accuracy;
    map.refresh_difference();
    map.sample_count = samples.len() as u64;
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::viewmap::{accumulate, merge};

    fn sample(azimuth: f64, elevation: f64, score: f64, label: bool) -> ViewSample {
        ViewSample {
            azimuth,
            elevation,
            score,
            label,
        }
    }

    #[test]
    fn default_grid_is_43_square() {
        let m = ViewMapGrid::zeros(SmoothingParams::default(), 0.5).unwrap();
        assert_eq!(m.dims(), 43);
        assert_eq!(m.azimuth(0), -1.05);
        assert_eq!(m.azimuth(42), 1.05);
        assert_eq!(m.azimuth(21), 0.0);
    }

    #[test]
    fn single_true_positive() {
        let p = SmoothingParams::default();
        let m = smooth(&accumulate(vec![sample(0.0, 0.0, 0.9, true)], 0.5), &p).unwrap();
        assert_eq!(m.get(Channel::TpDensity, 21, 21), 1.0);
        assert!((m.get(Channel::TpDensity, 22, 21) - (-0.0025f64 / 0.4).exp()).abs() < 1e-12);
        assert!(m.channel(Channel::FpDensity).iter().all(|&v| v == 0.0));
        assert_eq!(m.accuracy(0, 0), Some(1.0));
    }

    #[test]
    fn azimuth_wraps() {
        let p = SmoothingParams::default();
        let m = smooth(&accumulate(vec![sample(3.1, 0.0, 0.9, true)], 0.5), &p).unwrap();
        let left = m.get(Channel::CandidateDensity, 0, 21);
        let expected = p.kernel(wrap_angle(3.1 + 1.05));
        assert!((left - expected).abs() < 1e-15);
    }

    #[test]
    fn undefined_accuracy_is_none() {
        let p = SmoothingParams {
            variance: 1e-4,
            ..Default::default()
        };
        let m = smooth(&accumulate(vec![sample(0.0, 0.0, 0.9, false)], 0.5), &p).unwrap();
        assert_eq!(m.accuracy(21, 21), Some(0.0));
        assert_eq!(m.accuracy(0, 0), None);
    }

    #[test]
    fn doubling_samples_doubles_densities() {
        let p = SmoothingParams::default();
        let a = accumulate(
            vec![sample(0.3, -0.2, 0.8, false), sample(-0.5, 0.1, 0.6, true), sample(0.0, 0.9, 0.2, true)],
            0.5,
        );
        let one = smooth(&a, &p).unwrap();
        let two = smooth(&merge(&a, &a).unwrap(), &p).unwrap();
        for c in [Channel::CandidateDensity, Channel::TpDensity, Channel::FpDensity, Channel::TpMinusFp] {
            for (x, y) in one.channel(c).iter().zip(two.channel(c)) {
                assert!((2.0 * x - y).abs() < 1e-9);
            }
        }
        for (x, y) in one.channel(Channel::Accuracy).iter().zip(two.channel(Channel::Accuracy)) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn interpolation_hits_grid_values_and_rejects_outside() {
        let p = SmoothingParams::default();
        let m = smooth(&accumulate(vec![sample(0.2, 0.1, 0.9, true)], 0.5), &p).unwrap();
        let v = m.interpolate(Channel::TpMinusFp, m.azimuth(25), m.elevation(19)).unwrap();
        assert!((v - m.get(Channel::TpMinusFp, 25, 19)).abs() < 1e-12);
        assert_eq!(m.interpolate(Channel::TpMinusFp, 1.2, 0.0), None);
        assert!(m.interpolate(Channel::TpMinusFp, 1.05, -1.05).is_some());
    }

    #[test]
    fn average_recomputes_difference() {
        let p = SmoothingParams::default();
        let a = smooth(&accumulate(vec![sample(0.2, 0.1, 0.9, true)], 0.5), &p).unwrap();
        let b = smooth(&accumulate(vec![sample(-0.2, 0.0, 0.9, false)], 0.5), &p).unwrap();
        let m = ViewMapGrid::average(&[a.clone(), b]).unwrap();
        for c in 0..m.dims() * m.dims() {
            let t = m.channel(Channel::TpDensity)[c];
            let f = m.channel(Channel::FpDensity)[c];
            assert_eq!(m.channel(Channel::TpMinusFp)[c], t - f);
        }
        assert_eq!(m.get(Channel::TpDensity, 25, 23), a.get(Channel::TpDensity, 25, 23) / 2.0);
        assert_eq!(m.sample_count, 2);
    }
}
