//! Shared scenario builders for the benchmarks.

use embevo_core::config::ExperimentConfig;
use embevo_core::world::World;

/// An obstacle-avoidance world with proximity mating, ready to tick.
pub fn avoidance_world(n_robots: usize) -> World {
    let toml = format!(
        "seed = 1\nn_robots = {n_robots}\n\
         [world]\nwidth = 25.0\nheight = 25.0\n\
         obstacles = [[8.0,8.0,0.8],[17.0,8.0,0.8],[8.0,17.0,0.8],[17.0,17.0,0.8]]\n\
         [evolution]\ntau = 300\n"
    );
    let cfg = ExperimentConfig::from_toml(&toml).unwrap();
    World::new(&cfg, 1).unwrap()
}

/// The task-free energy world at swarm scale.
pub fn energy_world(n_robots: usize) -> World {
    let toml = format!(
        "seed = 2\nn_robots = {n_robots}\n\
         [world]\nwidth = 25.0\nheight = 25.0\nfood_count = 36\n\
         [task]\nkind = \"none\"\ne_init = 150.0\ne_max = 250.0\ne_food = 64.0\ne_step = 1.0\n\
         [evolution]\nselection = \"random\"\nreplacement = \"limited\"\ntau_max = 2000\n"
    );
    let cfg = ExperimentConfig::from_toml(&toml).unwrap();
    World::new(&cfg, 2).unwrap()
}
