// scratch probe: full-scale n=1 positive design, damping floor comparison
use becsplit_core::ocp::*;

fn main() {
    let lam: f64 = std::env::args().nth(1).unwrap().parse().unwrap();
    let mut cfg = OcpConfig::standard(1, 0.1);
    cfg.tolerance = 0.006;
    cfg.max_iters = 400;
    cfg.stall_window = 20;
    cfg.stall_rel = 1e-3;
    cfg.lambda = lam;
    let t0 = std::time::Instant::now();
    let res = design_pulse(&cfg).unwrap();
    for (i, r) in res.residual_history.iter().enumerate() {
        if i % 10 == 0 || i + 1 == res.residual_history.len() {
            println!("iter {i:3}: residual {r:.5}");
        }
    }
    println!("final {:.5e} iters {} converged {} elapsed {:.1?}", res.terminal_residual, res.iterations, res.converged, t0.elapsed());
}
