// Amplitudes of the discrete states integrated with the continuum
// eliminated exactly, compared with the effective-Hamiltonian propagator.

use friedrichs::model::{self, FormFactor};
use friedrichs::{dataio, temporal, Complex64};

pub fn run_example() -> friedrichs::Result<()> {
    let p = dataio::builtin_dataset("kaon")?.params;
    let c = model::couplings_from_params(&p, 0.0, std::f64::consts::FRAC_PI_2)?;
    let h = model::build_effective_hamiltonian(&c);
    let f0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let grid = temporal::linear_grid(0.0, 5.0 * p.tau_s(), 11);

    let flat = model::evolve_exact(&c, &FormFactor::Flat, &f0, &grid)?;
    let lorentz = model::evolve_exact(&c, &FormFactor::lorentzian(1e3 * p.gamma_s)?, &f0, &grid)?;
    println!("t/τ_S   |f1| exact    |f1| H_eff    |f1| Lorentzian");
    for (k, t) in grid.iter().enumerate() {
        let reference = h.propagate(&f0, *t);
        println!(
            "{:5.2}   {:.9}   {:.9}   {:.9}",
            t / p.tau_s(),
            flat[k][0].norm(),
            reference[0].norm(),
            lorentz[k][0].norm()
        );
    }
    Ok(())
}

fn main() -> friedrichs::Result<()> {
    run_example()
}
