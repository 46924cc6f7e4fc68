//! 16×16 spatial reservoir with distance-dependent connectivity and Dale's
//! principle.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRID_SIDE: usize = 16;
pub const GRID_NEURONS: usize = GRID_SIDE * GRID_SIDE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeuronKind {
    Excitatory,
    Inhibitory,
}

impl NeuronKind {
    pub fn sign(self) -> i8 {
        match self {
            NeuronKind::Excitatory => 1,
            NeuronKind::Inhibitory => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologyParams {
    pub frac_exc: f64,
    pub c_exc: f64,
    pub lambda_exc: f64,
    pub c_inh: f64,
    pub lambda_inh: f64,
    pub seed: u64,
}

impl Default for TopologyParams {
    fn default() -> Self {
        Self {
            frac_exc: 0.8,
            c_exc: 0.3,
            lambda_exc: 2.0,
            c_inh: 2.0,
            lambda_inh: 2.0,
            seed: 0,
        }
    }
}

impl TopologyParams {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frac_exc > 0.0 && self.frac_exc < 1.0) {
            return Err(Error::invalid("frac_exc must lie in (0, 1)"));
        }
        for (name, v) in [
            ("c_exc", self.c_exc),
            ("lambda_exc", self.lambda_exc),
            ("c_inh", self.c_inh),
            ("lambda_inh", self.lambda_inh),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn excitatory_count(&self) -> usize {
        (self.frac_exc * GRID_NEURONS as f64).round() as usize
    }

    /// Connection probability for a presynaptic neuron of `kind` at squared
    /// grid distance `d2`.
    pub fn probability(&self, kind: NeuronKind, d2: usize) -> f64 {
        let (c, lambda) = match kind {
            NeuronKind::Excitatory => (self.c_exc, self.lambda_exc),
            NeuronKind::Inhibitory => (self.c_inh, self.lambda_inh),
        };
        (c * (-(d2 as f64) / (2.0 * lambda * lambda)).exp()).min(1.0)
    }
}

/// Grid coordinate `(x, y)` of neuron index `y * 16 + x`.
pub fn coord(i: usize) -> (usize, usize) {
    (i % GRID_SIDE, i / GRID_SIDE)
}

pub fn index(x: usize, y: usize) -> usize {
    y * GRID_SIDE + x
}

pub fn squared_distance(a: usize, b: usize) -> usize {
    let (ax, ay) = coord(a);
    let (bx, by) = coord(b);
    ax.abs_diff(bx).pow(2) + ay.abs_diff(by).pow(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synapse {
    pub pre: usize,
    pub post: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialTopology {
    pub kinds: Vec<NeuronKind>,
    pub synapses: Vec<Synapse>,
}

impl SpatialTopology {
    pub fn n(&self) -> usize {
        self.kinds.len()
    }

    pub fn excitatory_count(&self) -> usize {
        self.kinds
            .iter()
            .filter(|k| **k == NeuronKind::Excitatory)
            .count()
    }

    /// Every synapse carries its presynaptic neuron's sign.
    pub fn satisfies_dale(&self) -> bool {
        self.synapses
            .iter()
            .all(|s| s.pre < self.kinds.len() && s.sign == self.kinds[s.pre].sign())
    }

    pub fn fan_in(&self) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for s in &self.synapses {
            out[s.post] += 1;
        }
        out
    }

    pub fn fan_out(&self) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for s in &self.synapses {
            out[s.pre] += 1;
        }
        out
    }
}

pub fn topo_generate(params: &TopologyParams) -> Result<SpatialTopology> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..GRID_NEURONS).collect();
    order.shuffle(&mut rng);
    let mut kinds = vec![NeuronKind::Inhibitory; GRID_NEURONS];
    for &i in &order[..params.excitatory_count()] {
        kinds[i] = NeuronKind::Excitatory;
    }

    let mut synapses = Vec::new();
    for pre in 0..GRID_NEURONS {
        let kind = kinds[pre];
        for post in 0..GRID_NEURONS {
            if pre == post {
                continue;
            }
            let p = params.probability(kind, squared_distance(pre, post));
            if rng.gen::<f64>() < p {
                synapses.push(Synapse {
                    pre,
                    post,
                    sign: kind.sign(),
                });
            }
        }
    }
    Ok(SpatialTopology { kinds, synapses })
}

/// Recurrent matrix with `w[post][pre] = sign * magnitude`.
pub fn topo_to_weights(topology: &SpatialTopology, magnitude: f64) -> Result<DMatrix<f64>> {
    topo_to_weights_scaled(topology, magnitude, magnitude)
}

/// As [`topo_to_weights`] with separate excitatory and inhibitory magnitudes.
pub fn topo_to_weights_scaled(
    topology: &SpatialTopology,
    exc_magnitude: f64,
    inh_magnitude: f64,
) -> Result<DMatrix<f64>> {
    if !(exc_magnitude > 0.0) || !(inh_magnitude > 0.0) {
        return Err(Error::invalid("synaptic magnitude must be positive"));
    }
    let n = topology.n();
    let mut w = DMatrix::zeros(n, n);
    for s in &topology.synapses {
        w[(s.post, s.pre)] = if s.sign > 0 {
            exc_magnitude
        } else {
            -inh_magnitude
        };
    }
    Ok(w)
}

/// Columns (presynaptic neurons) whose nonzero entries have mixed signs.
pub fn dale_violations(w: &DMatrix<f64>) -> Vec<usize> {
    (0..w.ncols())
        .filter(|&j| {
            let col = w.column(j);
            col.iter().any(|&v| v > 0.0) && col.iter().any(|&v| v < 0.0)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBin {
    pub d2: usize,
    /// Candidate ordered pairs at this distance.
    pub pairs: usize,
    pub connections: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyStats {
    pub excitatory: usize,
    pub exc_fraction: f64,
    pub synapses: usize,
    pub exc_by_distance: Vec<DistanceBin>,
    pub inh_by_distance: Vec<DistanceBin>,
}

impl TopologyStats {
    pub fn exc_bin(&self, d2: usize) -> Option<&DistanceBin> {
        self.exc_by_distance.iter().find(|b| b.d2 == d2)
    }

    pub fn inh_bin(&self, d2: usize) -> Option<&DistanceBin> {
        self.inh_by_distance.iter().find(|b| b.d2 == d2)
    }
}

pub fn topo_stats(topology: &SpatialTopology) -> TopologyStats {
    let n = topology.n();
    let mut pairs: [BTreeMap<usize, (usize, usize)>; 2] = [BTreeMap::new(), BTreeMap::new()];
    let class = |k: NeuronKind| usize::from(k == NeuronKind::Inhibitory);
    for pre in 0..n {
        let c = class(topology.kinds[pre]);
        for post in 0..n {
            if pre != post {
                pairs[c].entry(squared_distance(pre, post)).or_default().0 += 1;
            }
        }
    }
    for s in &topology.synapses {
        let c = class(topology.kinds[s.pre]);
        pairs[c].entry(squared_distance(s.pre, s.post)).or_default().1 += 1;
    }
    let bins = |m: &BTreeMap<usize, (usize, usize)>| {
        m.iter()
            .map(|(&d2, &(p, c))| DistanceBin {
                d2,
                pairs: p,
                connections: c,
                frequency: if p == 0 { 0.0 } else { c as f64 / p as f64 },
            })
            .collect()
    };
    let excitatory = topology.excitatory_count();
    TopologyStats {
        excitatory,
        exc_fraction: if n == 0 { 0.0 } else { excitatory as f64 / n as f64 },
        synapses: topology.synapses.len(),
        exc_by_distance: bins(&pairs[0]),
        inh_by_distance: bins(&pairs[1]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn probability_examples() {
        let p = TopologyParams::default();
        assert_abs_diff_eq!(p.probability(NeuronKind::Excitatory, 0), 0.3);
        assert_eq!(p.probability(NeuronKind::Inhibitory, 0), 1.0);
        assert!(p.probability(NeuronKind::Inhibitory, 450) < 1e-20);
        assert_abs_diff_eq!(
            p.probability(NeuronKind::Excitatory, 1),
            0.3 * (-1.0f64 / 8.0).exp(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn coordinates() {
        assert_eq!(coord(17), (1, 1));
        assert_eq!(index(15, 15), 255);
        assert_eq!(squared_distance(0, 255), 450);
    }

    #[test]
    fn generated_counts_and_dale() {
        let t = topo_generate(&TopologyParams::with_seed(11)).unwrap();
        assert_eq!(t.excitatory_count(), 205);
        assert!(t.satisfies_dale());
        assert!(t.synapses.iter().all(|s| s.pre != s.post));
        let w = topo_to_weights(&t, 0.5).unwrap();
        assert!(dale_violations(&w).is_empty());
    }

    #[test]
    fn weights_examples() {
        let empty = SpatialTopology {
            kinds: vec![NeuronKind::Excitatory; 3],
            synapses: vec![],
        };
        assert!(topo_to_weights(&empty, 1.0).unwrap().iter().all(|v| *v == 0.0));
        let one = SpatialTopology {
            kinds: vec![NeuronKind::Excitatory; 3],
            synapses: vec![Synapse {
                pre: 0,
                post: 2,
                sign: 1,
            }],
        };
        let w = topo_to_weights(&one, 0.5).unwrap();
        assert_eq!(w[(2, 0)], 0.5);
        assert_eq!(w.iter().filter(|v| **v != 0.0).count(), 1);
        assert!(topo_to_weights(&one, 0.0).is_err());
    }

    #[test]
    fn empty_stats() {
        let t = SpatialTopology {
            kinds: vec![NeuronKind::Inhibitory; GRID_NEURONS],
            synapses: vec![],
        };
        let s = topo_stats(&t);
        assert!(s.inh_by_distance.iter().all(|b| b.frequency == 0.0));
        assert!(s.exc_by_distance.is_empty());
    }

    #[test]
    fn invalid_params() {
        let mut p = TopologyParams {
            frac_exc: 1.0,
            ..TopologyParams::default()
        };
        assert!(topo_generate(&p).is_err());
        p.frac_exc = 0.8;
        p.lambda_inh = 0.0;
        assert!(topo_generate(&p).is_err());
    }
}
