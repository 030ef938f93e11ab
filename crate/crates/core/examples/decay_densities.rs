// The temporal two-component wave function: normalization, CP-sector
// weights and the departure of the standard intensity from the decay
// density.

use friedrichs::temporal::{self, InterferenceCoefficient, Sector};
use friedrichs::{cp, dataio};

pub fn run_example() -> friedrichs::Result<()> {
    for name in dataio::BUILTIN_NAMES {
        let p = dataio::builtin_dataset(name)?.params;
        let w = temporal::build_wavefunction(&p, &cp::epsilon_bare(&p)?)?;
        println!(
            "{name:>4}: Ñ = {:.12}, ∫|ψ̃|² = {:.12}, P(CP=+1) = {:.6}, P(CP=−1) = {:.6}",
            w.n_tilde(),
            w.normalization_by_quadrature()?,
            w.sector_weight(Sector::Plus),
            w.sector_weight(Sector::Minus)
        );
    }

    let p = dataio::builtin_dataset("kaon")?.params;
    let e = cp::epsilon_bare(&p)?;
    let w = temporal::build_wavefunction(&p, &e)?;
    let grid = temporal::linear_grid(0.0, 20.0 * p.tau_s(), 9);
    let standard = temporal::intensity_standard(&p, &e, &grid, 1.0, InterferenceCoefficient::Exact)?;
    let density = temporal::density_cp(&w, Sector::Plus, &grid)?;
    let renorm = temporal::intensity_renormalized(&p, &grid, 1.0)?;
    println!("t/τ_S   I_standard     I_renormalized  I_std/|ψ̃₁|² (relative)");
    let base = standard.values[0] / density.values[0];
    for k in 0..grid.len() {
        println!(
            "{:5.1}   {:.6e}   {:.6e}    {:.6}",
            grid[k] / p.tau_s(),
            standard.values[k],
            renorm.values[k],
            standard.values[k] / density.values[k] / base
        );
    }
    Ok(())
}

fn main() -> friedrichs::Result<()> {
    run_example()
}
