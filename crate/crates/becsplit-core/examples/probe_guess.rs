// scratch probe: does initial-guess bandwidth unlock the dispersion correction?
use becsplit_core::ocp::*;
use becsplit_core::rne::TruncationSpec;

fn main() {
    // Reduced instance that stalls at ~0.26 from the plain guess.
    for (label, guess) in [
        ("plain 2.5+sin(t)", InitialGuess::OffsetSine { offset: 2.5, amplitude: 1.0 }),
        ("stronger 5+3sin(t)", InitialGuess::OffsetSine { offset: 5.0, amplitude: 3.0 }),
        ("constant 2.5", InitialGuess::Constant(2.5)),
    ] {
        let mut cfg = OcpConfig::standard(1, 0.1);
        cfg.n_moments = 8;
        cfg.spec = TruncationSpec::new(9).unwrap();
        cfg.dt = 0.005;
        cfg.tolerance = 0.01;
        cfg.max_iters = 60;
        cfg.stall_window = 0;
        cfg.initial_guess = guess;
        let res = design_pulse(&cfg).unwrap();
        println!("{label:20}: iters {:3} residual {:.4e}", res.iterations, res.terminal_residual);
    }
}
