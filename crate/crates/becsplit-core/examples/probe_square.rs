// scratch probe (deleted before finishing): square design landscape
use becsplit_core::square::*;

fn main() {
    let t = TargetSpec::new(1, 9).unwrap();
    let spec1 = SampledEnsembleSpec::new(0.1, 1).unwrap();
    // Objective of the published n=1 design at this truncation:
    let reference = reference_nominal_params(1).unwrap();
    println!("reference objective at N+=9: {:.3e}", terminal_error(&reference, 1.0, &t));
    for seed in [0u64, 3, 7, 11] {
        for restarts in [16usize, 32, 64] {
            let opts = SquareDesignOptions { restarts, seed, ..Default::default() };
            let d = optimize_square(&t, &spec1, &opts).unwrap();
            println!("seed {seed:2} restarts {restarts:3}: obj {:.3e}  params {:?}", d.objective, d.params);
        }
    }
}
