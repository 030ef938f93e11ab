//! Every example must run to completion.

macro_rules! example {
    ($name:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $name {
            include!($file);
        }
    };
}

example!(kaon_epsilon, "../examples/kaon_epsilon.rs");
example!(cpt_phases, "../examples/cpt_phases.rs");
example!(exact_evolution, "../examples/exact_evolution.rs");
example!(decay_densities, "../examples/decay_densities.rs");
example!(monte_carlo_fit, "../examples/monte_carlo_fit.rs");
example!(heavy_mesons, "../examples/heavy_mesons.rs");
example!(parameter_files, "../examples/parameter_files.rs");

#[test]
fn kaon_epsilon_runs() {
    kaon_epsilon::run_example().unwrap();
}

#[test]
fn cpt_phases_runs() {
    cpt_phases::run_example().unwrap();
}

#[test]
fn exact_evolution_runs() {
    exact_evolution::run_example().unwrap();
}

#[test]
fn decay_densities_runs() {
    decay_densities::run_example().unwrap();
}

#[test]
fn monte_carlo_fit_runs() {
    monte_carlo_fit::run_example().unwrap();
}

#[test]
fn heavy_mesons_runs() {
    heavy_mesons::run_example().unwrap();
}

#[test]
fn parameter_files_runs() {
    parameter_files::run_example().unwrap();
}
