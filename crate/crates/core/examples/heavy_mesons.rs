// Predictions for B_s and D mixing: ε^th, q/p and the semileptonic
// asymmetry.

use friedrichs::cp::{self, Epsilon, EpsilonKind};
use friedrichs::{dataio, Complex64};

pub fn run_example() -> friedrichs::Result<()> {
    for name in ["Bs", "D"] {
        let d = dataio::builtin_dataset(name)?;
        let th = cp::epsilon_renormalized(&d.params)?;
        let qp = cp::q_over_p(&th)?;
        println!(
            "{name:>2}: ε^th = {:.6e}  |q/p| = {:.5}  φ = {:+.4}°  A_SL = {:.4}  2(1−|q/p|) = {:.4}",
            th.value,
            qp.modulus,
            qp.phase_deg,
            cp::asymmetry_sl(&th),
            cp::asymmetry_sl_consistency(&th)?
        );
        for r in &d.reference_values {
            println!("      {} = {} ± {} ({})", r.name, r.value, r.tolerance, r.provenance);
        }
    }
    // the rounded D value quoted alongside the measurement
    let quoted = Epsilon::new(Complex64::new(0.077, 0.035), EpsilonKind::Renormalized);
    let qp = cp::q_over_p(&quoted)?;
    println!("quoted D ε^th = 0.077 + 0.035i → |q/p| = {:.4}, φ = {:.3}°", qp.modulus, qp.phase_deg);
    Ok(())
}

fn main() -> friedrichs::Result<()> {
    run_example()
}
