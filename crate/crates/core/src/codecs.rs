//! Signal/spike conversion: delta modulation in, exponential kernel out.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::signal::{SampledSignal, SpikeTrain, TimeGrid, GRID_EPS};

/// Relative slack on the firing comparison so that differences which equal
/// the threshold up to rounding still count as ties.
const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpDownSpikes {
    pub up: SpikeTrain,
    pub down: SpikeTrain,
}

impl UpDownSpikes {
    /// One train with up events on channel `c` and down events on `channels + c`.
    pub fn interleave(&self, channels: usize) -> SpikeTrain {
        self.up.merge(&self.down.shifted(0.0, channels))
    }
}

/// Staircase delta modulator. Each channel keeps a reference level starting at
/// its first sample; an up (down) event at sample `k` moves it by `+threshold`
/// (`-threshold`). Events carry the sample time and the channel index.
pub fn delta_encode(signal: &SampledSignal, threshold: f64) -> Result<UpDownSpikes> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::invalid("threshold must be positive"));
    }
    if let Some(bad) = signal.values.iter().position(|v| !v.is_finite()) {
        let c = bad % signal.channels().max(1);
        let k = bad / signal.channels().max(1);
        return Err(Error::NonFinite {
            neuron: c,
            time: signal.time(k),
        });
    }
    let mut up = Vec::new();
    let mut down = Vec::new();
    let fire = threshold * (1.0 - TIE_EPS);
    for c in 0..signal.channels() {
        let row = signal.values.row(c);
        if row.is_empty() {
            continue;
        }
        let origin = row[0];
        let mut level: i64 = 0;
        for k in 1..row.len() {
            let diff = row[k] - (origin + level as f64 * threshold);
            if diff >= fire {
                level += 1;
                up.push(crate::signal::Spike {
                    neuron: c,
                    time: signal.time(k),
                });
            } else if diff <= -fire {
                level -= 1;
                down.push(crate::signal::Spike {
                    neuron: c,
                    time: signal.time(k),
                });
            }
        }
    }
    Ok(UpDownSpikes {
        up: SpikeTrain::from_events(up)?,
        down: SpikeTrain::from_events(down)?,
    })
}

/// `y_i(t) = sum over spikes of neuron i with t_f <= t of exp(-(t - t_f)/tau)`,
/// evaluated on `grid` for neurons `0..n`.
pub fn exp_smooth(spikes: &SpikeTrain, n: usize, tau: f64, grid: &TimeGrid) -> Result<SampledSignal> {
    if !(tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    if let Some(s) = spikes.events().iter().find(|s| s.neuron >= n) {
        return Err(Error::Dimension {
            context: "spike neuron index",
            expected: n,
            actual: s.neuron + 1,
        });
    }
    let mut values = DMatrix::zeros(n, grid.len);
    if grid.len == 0 {
        return SampledSignal::new(grid.t0, grid.dt, values);
    }
    let slack = GRID_EPS * grid.dt;
    let decay = (-grid.dt / tau).exp();
    let events = spikes.events();
    let mut next = 0;
    let mut y = vec![0.0; n];
    for k in 0..grid.len {
        let t = grid.time(k);
        if k > 0 {
            y.iter_mut().for_each(|v| *v *= decay);
        }
        while next < events.len() && events[next].time <= t + slack {
            let e = events[next];
            y[e.neuron] += (-((t - e.time).max(0.0)) / tau).exp();
            next += 1;
        }
        values.column_mut(k).copy_from_slice(&y);
    }
    SampledSignal::new(grid.t0, grid.dt, values)
}

/// Inverse of [`delta_encode`]: `initial + threshold * (ups - downs)` counted
/// up to each sample time.
pub fn staircase_reconstruct(
    spikes: &UpDownSpikes,
    threshold: f64,
    initial: &[f64],
    grid: &TimeGrid,
) -> Result<SampledSignal> {
    let n = initial.len();
    let mut values = DMatrix::zeros(n, grid.len);
    let slack = GRID_EPS * grid.dt;
    let (up, down) = (spikes.up.events(), spikes.down.events());
    let (mut iu, mut id) = (0, 0);
    let mut level = vec![0i64; n];
    for k in 0..grid.len {
        let t = grid.time(k);
        while iu < up.len() && up[iu].time <= t + slack {
            if up[iu].neuron < n {
                level[up[iu].neuron] += 1;
            }
            iu += 1;
        }
        while id < down.len() && down[id].time <= t + slack {
            if down[id].neuron < n {
                level[down[id].neuron] -= 1;
            }
            id += 1;
        }
        for c in 0..n {
            values[(c, k)] = initial[c] + level[c] as f64 * threshold;
        }
    }
    SampledSignal::new(grid.t0, grid.dt, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sig(xs: Vec<f64>, dt: f64) -> SampledSignal {
        SampledSignal::from_channels(0.0, dt, &[xs]).unwrap()
    }

    #[test]
    fn constant_is_silent() {
        let s = delta_encode(&sig(vec![0.3; 100], 1e-3), 0.1).unwrap();
        assert!(s.up.is_empty() && s.down.is_empty());
    }

    #[test]
    fn ramp_gives_ten_ups() {
        let xs: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
        let s = delta_encode(&sig(xs, 1e-3), 0.1).unwrap();
        assert_eq!(s.up.len(), 10);
        assert_eq!(s.down.len(), 0);
    }

    #[test]
    fn tie_fires() {
        let s = delta_encode(&sig(vec![0.0, 0.1, 0.1], 1.0), 0.1).unwrap();
        assert_eq!(s.up.len(), 1);
        assert_eq!(s.up.events()[0].time, 1.0);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(delta_encode(&SampledSignal {
            t0: 0.0,
            dt: 1.0,
            values: DMatrix::from_row_slice(1, 2, &[0.0, f64::NAN]),
        }, 0.1)
        .is_err());
        assert!(delta_encode(&sig(vec![0.0], 1.0), 0.0).is_err());
    }

    #[test]
    fn single_spike_kernel() {
        let mut tr = SpikeTrain::new();
        tr.push(0, 0.0);
        let grid = TimeGrid::new(0.0, 0.01, 11).unwrap();
        let y = exp_smooth(&tr, 1, 0.1, &grid).unwrap();
        assert_abs_diff_eq!(y.values[(0, 0)], 1.0);
        assert_abs_diff_eq!(y.values[(0, 10)], (-1.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn spike_between_samples() {
        let mut tr = SpikeTrain::new();
        tr.push(0, 0.015);
        let grid = TimeGrid::new(0.0, 0.01, 4).unwrap();
        let y = exp_smooth(&tr, 1, 0.05, &grid).unwrap();
        assert_eq!(y.values[(0, 1)], 0.0);
        assert_abs_diff_eq!(y.values[(0, 3)], (-0.015f64 / 0.05).exp(), epsilon = 1e-12);
    }

    #[test]
    fn staircase_arithmetic() {
        let mut up = SpikeTrain::new();
        for t in [0.1, 0.2, 0.3] {
            up.push(0, t);
        }
        let mut down = SpikeTrain::new();
        down.push(0, 0.4);
        let grid = TimeGrid::new(0.0, 0.1, 6).unwrap();
        let r = staircase_reconstruct(&UpDownSpikes { up, down }, 0.1, &[0.0], &grid).unwrap();
        assert_abs_diff_eq!(r.values[(0, 5)], 0.2, epsilon = 1e-12);
        let none = staircase_reconstruct(&UpDownSpikes::default(), 0.1, &[0.7], &grid).unwrap();
        assert!(none.values.iter().all(|v| *v == 0.7));
    }
}
