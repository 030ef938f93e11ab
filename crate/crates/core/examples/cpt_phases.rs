// Scan of the relative coupling phase Δθ against the CPT conditions in
// the K⁰K̄⁰ basis. Only Δθ = kπ + π/2 passes.

use std::f64::consts::PI;

use friedrichs::{dataio, model};

pub fn run_example() -> friedrichs::Result<()> {
    let p = dataio::builtin_dataset("kaon")?.params;
    println!("allowed Δθ: {:?}", model::cpt_allowed_phases(-1..=1, true));
    for k in 0..=8 {
        let delta = -PI + k as f64 * PI / 4.0;
        // Δθ = θ_S − θ_L
        let c = model::couplings_from_params(&p, delta, 0.0)?;
        let h = model::to_k0_basis(&model::build_effective_hamiltonian(&c))?;
        let check = model::cpt_check(&h, 1e-10)?;
        println!(
            "Δθ = {:+.4}  Γ₁₁−Γ₂₂ residual = {:.3e}  {}",
            c.delta_theta(),
            check.residuals[1],
            if check.satisfied { "PASS" } else { "FAIL" }
        );
    }
    Ok(())
}

fn main() -> friedrichs::Result<()> {
    run_example()
}
