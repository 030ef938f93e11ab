// Writing and reading parameter files and CSV series.

use friedrichs::temporal::{self, ModelKind};
use friedrichs::{cp, dataio};

pub fn run_example() -> friedrichs::Result<()> {
    let dir = std::env::temp_dir().join(format!("friedrichs-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let custom = "\
# a kaon with the measured mass difference
particle = kaon
units = ps
tau_S = 89.54 ps
tau_L = 5.116e-8 s
delta_m_times_tau_S = 0.474
";
    let path = dir.join("kaon.params");
    std::fs::write(&path, custom)?;
    let d = dataio::load_params(&path)?;
    println!("loaded {}: Γ_S = {} /ps, Γ_L = {} /ps", d.name, d.params.gamma_s, d.params.gamma_l);
    println!("|ε^th| = {:.4e}", cp::epsilon_renormalized(&d.params)?.modulus());

    let copy = dir.join("copy.params");
    dataio::save_params(&copy, &d)?;
    assert_eq!(dataio::load_params(&copy)?, d);
    print!("{}", std::fs::read_to_string(&copy)?);

    let grid = temporal::linear_grid(0.0, 20.0 * d.params.tau_s(), 5);
    let series = temporal::intensity_renormalized(&d.params, &grid, 1.0)?;
    let csv = dir.join("intensity.csv");
    dataio::save_series(&csv, &series)?;
    print!("{}", std::fs::read_to_string(&csv)?);
    assert_eq!(dataio::load_series(&csv, ModelKind::Renormalized)?, series);

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> friedrichs::Result<()> {
    run_example()
}
