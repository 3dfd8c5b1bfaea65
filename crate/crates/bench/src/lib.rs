//! Fixtures shared by the criterion benches in `benches/`.

use phonocoh::{ExperimentConfig, Material, Protocol};

/// Micron-sized silicon sphere at room temperature near the regime
/// crossover, the workhorse configuration of the atlas.
pub fn micron_sphere() -> ExperimentConfig {
    ExperimentConfig {
        material: Material::silicon(),
        radius: 0.5e-6,
        dx: 1e-9,
        a_max: 98.1,
        protocol: Protocol::TwoCosine,
        temperature: 293.0,
        dff: 0.01,
        sigma_x: 1e-9,
        duration: None,
    }
}

/// Large sphere deep in the many-mode regime, where the discrete sum is
/// longest.
pub fn large_sphere() -> ExperimentConfig {
    ExperimentConfig {
        radius: 50e-6,
        dx: 1e-4,
        ..micron_sphere()
    }
}
