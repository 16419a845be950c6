// scratch probe: single-system limit and ensemble-width sweep
use becsplit_core::ocp::*;
use becsplit_core::rne::TruncationSpec;

fn main() {
    for (nm, delta, label) in [(1usize, 0.0f64, "single"), (4, 0.02, "narrow"), (8, 0.05, "mid"), (8, 0.1, "wide")] {
        let mut cfg = OcpConfig::standard(1, delta);
        cfg.n_moments = nm;
        cfg.spec = TruncationSpec::new(9).unwrap();
        cfg.dt = 0.005;
        cfg.tolerance = 0.01;
        cfg.max_iters = 80;
        cfg.stall_window = 0;
        let t0 = std::time::Instant::now();
        let res = design_pulse(&cfg).unwrap();
        let h = &res.residual_history;
        let show: Vec<String> = h.iter().step_by(8.max(h.len()/9)).map(|r| format!("{r:.3}")).collect();
        println!(
            "{label:7} N={nm:2} delta={delta}: iters {:3} residual {:.4e} hist [{}] ({:.1?})",
            res.iterations, res.terminal_residual, show.join(" "), t0.elapsed()
        );
    }
}
