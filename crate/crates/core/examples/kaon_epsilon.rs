// CP violation of the neutral kaon: ε from the closed form and from the
// eigenvectors of the effective Hamiltonian, and its renormalized value.
//
// ```text
// cargo run --example kaon_epsilon
// ```

use friedrichs::{cp, dataio, model};

pub fn run_example() -> friedrichs::Result<()> {
    let kaon = dataio::builtin_dataset("kaon")?;
    let p = kaon.params;

    let couplings = model::couplings_from_params(&p, 0.0, std::f64::consts::FRAC_PI_2)?;
    let h = model::build_effective_hamiltonian(&couplings);
    let [short, long] = model::eigensystem(&h)?;
    println!("E_S = {:.6e}  (Γ_S/2 = {:.6e})", short.eigenvalue, p.gamma_s / 2.0);
    println!("E_L = {:.6e}  (Γ_L/2 = {:.6e})", long.eigenvalue, p.gamma_l / 2.0);

    let closed = cp::epsilon_bare(&p)?;
    let from_s = cp::epsilon_from_eigenvector(&h)?;
    let from_l = cp::epsilon_from_long_eigenvector(&h)?;
    println!("ε (closed form)    = {:.9e}", closed.value);
    println!("ε (K_S eigenvector) = {:.9e}", from_s.value);
    println!("ε (K_L eigenvector) = {:.9e}", from_l.value);

    let th = cp::epsilon_renormalized(&p)?;
    let measured = kaon.reference("eps_exp_mod").map_or(f64::NAN, |r| r.value);
    println!(
        "|ε^th| = {:.4e}, arg ε^th = {:.2}°, |ε^th|/|ε^exp| = {:.3}",
        th.modulus(),
        th.arg_deg(),
        th.modulus() / measured
    );
    let qp = cp::q_over_p(&th)?;
    println!("|q/p| = {:.6}, φ = {:.4}°", qp.modulus, qp.phase_deg);
    println!(
        "π⁺π⁻ rate ratio K_L/K_S = {:.4e} = |ε^th|² = {:.4e}",
        cp::production_rate_ratio(&p)?,
        th.modulus().powi(2)
    );
    Ok(())
}

fn main() -> friedrichs::Result<()> {
    run_example()
}
