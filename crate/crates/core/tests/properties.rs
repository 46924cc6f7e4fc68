use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use slowdyn::codecs::{delta_encode, exp_smooth, staircase_reconstruct};
use slowdyn::dynapse::{dpi_rate, dpi_rate_squared, DpiParams};
use slowdyn::esn::{esn_generate, esn_run, esn_run_from, EsnParams};
use slowdyn::lif::{lif_run, synaptic_trace, Input, LifParams, LifWeights, RunSpec};
use slowdyn::readout::{
    add_bias_row, ridge_fit, ternary_fit, ternary_initialization, ternary_objective,
};
use slowdyn::signal::{SampledSignal, Spike, SpikeTrain, TimeGrid};
use slowdyn::topology::{topo_generate, NeuronKind, TopologyParams};

fn matrix(rows: usize, cols: usize, seed: u64, scale: f64) -> DMatrix<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| scale * rng.gen_range(-1.0..1.0))
}

fn spike_train(n: usize, max_t: f64) -> impl Strategy<Value = SpikeTrain> {
    prop::collection::vec((0..n, 0.0..max_t), 0..40).prop_map(|v| {
        // snap to the 0.1 ms grid the simulator uses
        let events = v
            .into_iter()
            .map(|(neuron, t)| Spike { neuron, time: (t * 1e4).round() / 1e4 })
            .collect();
        SpikeTrain::from_events(events).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lif_is_deterministic_and_spike_times_increase(seed in 0u64..1000, gain in 0.5f64..3.0) {
        let n = 8;
        let w = LifWeights::new(matrix(n, 1, seed, gain), matrix(n, n, seed + 1, 0.3)).unwrap();
        let p = LifParams::new(0.02, 0.01, 1.0, 0.5, 1e-4).unwrap();
        let u = SampledSignal::from_channels(0.0, 1e-3, &[vec![1.0; 301]]).unwrap();
        let spec = RunSpec::new(0.3, 1e-3);
        let a = lif_run(&w, &p, Input::Sampled(&u), None, &spec).unwrap();
        let b = lif_run(&w, &p, Input::Sampled(&u), None, &spec).unwrap();
        prop_assert_eq!(&a, &b);
        for times in a.spikes.per_neuron(n) {
            prop_assert!(times.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn silent_network_never_fires(seed in 0u64..1000) {
        let n = 6;
        let w = LifWeights::new(matrix(n, 2, seed, 5.0), matrix(n, n, seed + 1, 5.0)).unwrap();
        let p = LifParams::new(0.02, 0.01, 1.0, 0.0, 1e-4).unwrap();
        let trace = lif_run(&w, &p, Input::Silent, None, &RunSpec::new(0.2, 1e-3)).unwrap();
        prop_assert!(trace.spikes.is_empty());
    }

    #[test]
    fn synaptic_filter_superposes(a in spike_train(3, 0.1), b in spike_train(3, 0.1)) {
        let spec = RunSpec::new(0.12, 1e-3);
        let ra = synaptic_trace(&a, 3, 0.01, 1e-4, &spec).unwrap();
        let rb = synaptic_trace(&b, 3, 0.01, 1e-4, &spec).unwrap();
        let rab = synaptic_trace(&a.merge(&b), 3, 0.01, 1e-4, &spec).unwrap();
        prop_assert!((rab - (ra + rb)).amax() < 1e-9);
    }

    #[test]
    fn esn_state_is_bounded(seed in 0u64..1000, lambda in 1.0f64..20.0) {
        let dt = 1e-3;
        let w = esn_generate(20, 1, 0.9, 2.0, 0.2, seed).unwrap();
        let p = EsnParams::continuous(lambda, dt).unwrap();
        let u = SampledSignal::from_channels(0.0, dt, &[matrix(1, 501, seed, 5.0).row(0).iter().copied().collect()]).unwrap();
        let tr = esn_run(&w, &p, &u, 0.5, dt).unwrap();
        prop_assert!(tr.states.amax() <= 1.0 / lambda + dt);
    }

    #[test]
    fn topology_obeys_dale(seed in 0u64..10_000) {
        let t = topo_generate(&TopologyParams::with_seed(seed)).unwrap();
        prop_assert!(t.satisfies_dale());
        prop_assert_eq!(&t, &topo_generate(&TopologyParams::with_seed(seed)).unwrap());
    }

    #[test]
    fn delta_tracking_bound(
        coeffs in prop::collection::vec(-1.0f64..1.0, 4),
        thr in 0.02f64..0.3,
    ) {
        let dt = 1e-3;
        let xs: Vec<f64> = (0..1000)
            .map(|k| {
                let t = k as f64 * dt;
                coeffs[0] * (6.0 * t).sin() + coeffs[1] * (17.0 * t).cos() + coeffs[2] * t + coeffs[3] * t * t
            })
            .collect();
        let s = SampledSignal::from_channels(0.0, dt, std::slice::from_ref(&xs)).unwrap();
        let spikes = delta_encode(&s, thr).unwrap();
        let rec = staircase_reconstruct(&spikes, thr, &[xs[0]], &s.grid()).unwrap();
        for (k, x) in xs.iter().enumerate() {
            prop_assert!((x - rec.values[(0, k)]).abs() < thr);
        }
    }

    #[test]
    fn small_variation_is_silent(amp in 0.0f64..0.049) {
        // total variation of one half period of amplitude `amp` is 2 * amp
        let xs: Vec<f64> = (0..=100).map(|k| amp * (std::f64::consts::PI * k as f64 / 100.0).cos()).collect();
        let s = SampledSignal::from_channels(0.0, 0.01, &[xs]).unwrap();
        let spikes = delta_encode(&s, 0.1).unwrap();
        prop_assert!(spikes.up.is_empty() && spikes.down.is_empty());
    }

    #[test]
    fn smoother_scales_with_multiplicity(train in spike_train(2, 0.5), copies in 1usize..4) {
        let grid = TimeGrid::new(0.0, 0.01, 60).unwrap();
        let once = exp_smooth(&train, 2, 0.05, &grid).unwrap();
        let mut many = SpikeTrain::new();
        for _ in 0..copies {
            many = many.merge(&train);
        }
        let scaled = exp_smooth(&many, 2, 0.05, &grid).unwrap();
        prop_assert!((scaled.values - once.values * copies as f64).amax() < 1e-9);
    }

    #[test]
    fn ridge_gradient_vanishes(seed in 0u64..1000, alpha in 1e-4f64..10.0) {
        let phi = add_bias_row(&matrix(6, 40, seed, 1.0));
        let y = matrix(2, 40, seed + 7, 1.0);
        let w = ridge_fit(&phi, &y, alpha).unwrap().w_out;
        let grad = (&w * &phi - &y) * phi.transpose() + &w * alpha;
        prop_assert!(grad.amax() < 1e-8 * (1.0 + y.amax() * phi.amax() * 40.0));
    }

    #[test]
    fn ternary_descent_never_worse_than_start(seed in 0u64..1000, n in 9usize..14) {
        let r = matrix(n, 60, seed, 1.0);
        let x = matrix(3, 60, seed + 3, 2.0);
        let fit = ternary_fit(&r, &x).unwrap();
        let init = ternary_initialization(&r, &x).unwrap();
        prop_assert!(ternary_objective(&fit, &r, &x) <= ternary_objective(&init, &r, &x) + 1e-9);
    }

    #[test]
    fn dpi_identity(
        i_th in 1e-12f64..1e-8, i_tau in 1e-12f64..1e-8, i_in in 0.0f64..1e-8, i_out in 0.0f64..1e-8,
    ) {
        let p = DpiParams { i_th, i_tau, i_in, i_out, c: 1e-12, u_t: 0.025, kappa: 0.7 };
        let r = dpi_rate(&p).unwrap();
        let sq = dpi_rate_squared(&p).unwrap();
        let lhs = r.powi(2);
        prop_assert!((lhs - sq).abs() <= 1e-9 * sq.max(lhs).max(f64::MIN_POSITIVE));
    }
}

#[test]
fn esn_fades_from_different_states() {
    let lambda = 5.0;
    let dt = 1e-3;
    let w = esn_generate(30, 1, 0.9, 1.0, 0.2, 3).unwrap();
    let p = EsnParams::continuous(lambda, dt).unwrap();
    let u = SampledSignal::from_channels(0.0, dt, &[matrix(1, 2001, 9, 1.0).row(0).iter().copied().collect()]).unwrap();
    let x0 = DVector::from_element(30, 0.15);
    let duration = 10.0 / lambda;
    let a = esn_run(&w, &p, &u, duration, dt).unwrap();
    let b = esn_run_from(&x0, &w, &p, &u, duration, dt).unwrap();
    let k = a.states.ncols() - 1;
    let d_end = (a.states.column(k) - b.states.column(k)).norm();
    assert!(d_end < 1e-3 * x0.norm(), "{d_end}");
}

#[test]
fn lif_euler_converges() {
    let first = |dt: f64| {
        let p = LifParams::new(0.02, 0.01, 1.0, 0.0, dt).unwrap();
        let w = LifWeights::new(DMatrix::from_element(1, 1, 1.7), DMatrix::zeros(1, 1)).unwrap();
        let u = SampledSignal::from_channels(0.0, 1e-3, &[vec![1.0; 101]]).unwrap();
        let tr = lif_run(&w, &p, Input::Sampled(&u), None, &RunSpec::new(0.1, 1e-3)).unwrap();
        tr.spikes.events()[0].time
    };
    let coarse = 2e-4;
    assert!((first(coarse) - first(coarse / 2.0)).abs() < coarse);
}

#[test]
fn post_kind_does_not_bias_connections() {
    // pooled over seeds, an excitatory neuron's neighbours at d = 1 are hit
    // equally often whatever their own kind
    let (mut to_exc, mut pairs_exc, mut to_inh, mut pairs_inh) = (0f64, 0f64, 0f64, 0f64);
    for seed in 0..60 {
        let t = topo_generate(&TopologyParams::with_seed(seed)).unwrap();
        let mut conn = std::collections::HashSet::new();
        for s in &t.synapses {
            conn.insert((s.pre, s.post));
        }
        for pre in 0..t.n() {
            if t.kinds[pre] != NeuronKind::Excitatory {
                continue;
            }
            for post in 0..t.n() {
                if slowdyn::topology::squared_distance(pre, post) != 1 {
                    continue;
                }
                let hit = f64::from(u8::from(conn.contains(&(pre, post))));
                match t.kinds[post] {
                    NeuronKind::Excitatory => {
                        to_exc += hit;
                        pairs_exc += 1.0;
                    }
                    NeuronKind::Inhibitory => {
                        to_inh += hit;
                        pairs_inh += 1.0;
                    }
                }
            }
        }
    }
    let (pe, pi) = (to_exc / pairs_exc, to_inh / pairs_inh);
    let p = (to_exc + to_inh) / (pairs_exc + pairs_inh);
    let sigma = (p * (1.0 - p) * (1.0 / pairs_exc + 1.0 / pairs_inh)).sqrt();
    assert!((pe - pi).abs() < 4.0 * sigma, "{pe} vs {pi}");
}
