// scratch probe: moment propagation vs direct ensemble propagation
use becsplit_core::legendre::QuadratureRule;
use becsplit_core::moments::*;
use becsplit_core::ocp::*;
use becsplit_core::rne::*;

fn main() {
    let spec = TruncationSpec::new(9).unwrap();
    let delta = 0.1;
    let env = PulseEnvelope::from_fn(0.005, 300, |t| 2.5 + t.sin()).unwrap();
    let mut cfg = OcpConfig::standard(1, delta);
    cfg.spec = spec;
    cfg.dt = env.dt;
    for n_moments in [8usize, 12, 16, 20] {
        cfg.n_moments = n_moments;
        // moment propagation
        let mut m = MomentState::initial_rest(n_moments, &spec);
        for &w in &env.values {
            m = step_map(&m, w, &cfg);
        }
        // direct ensemble at 32 Gauss nodes -> moments
        let rule = QuadratureRule::gauss_legendre(32);
        let samples: Vec<RealState> = rule
            .nodes
            .iter()
            .map(|&x| propagate_terminal(&RealState::rest(&spec), &env, 1.0 + delta * x, &spec).unwrap())
            .collect();
        let direct = moments_from_ensemble(&samples, &rule, n_moments).unwrap();
        let err: f64 = m
            .as_slice()
            .iter()
            .zip(direct.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        println!("N={n_moments:2}: moment-vs-continuum error {err:.3e}  (norm {:.6})", m.norm());
    }
}
