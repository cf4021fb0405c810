#![allow(dead_code)]

use evsched_core::{Instance, Product, Technology};

/// One product per entry of `specs`, each with a single technology.
/// `specs[i] = (volume, rate, machines)`; every setup between distinct
/// technologies on a shared machine is `setup`.
pub fn single_tech_products(
    num_machines: usize,
    specs: &[(f64, f64, &[usize])],
    setup: f64,
) -> Instance {
    let products = (0..specs.len())
        .map(|i| Product {
            volume: specs[i].0,
            technologies: vec![i],
        })
        .collect();
    let techs = specs
        .iter()
        .enumerate()
        .map(|(i, &(_, rate, machines))| Technology {
            product: i,
            machines: machines.to_vec(),
            rate,
        })
        .collect();
    let d = specs.len();
    let matrix: Vec<f64> = (0..d * d)
        .map(|x| if x / d == x % d { 0.0 } else { setup })
        .collect();
    Instance::new(num_machines, products, techs, vec![matrix; num_machines]).unwrap()
}

/// `V = 10`, one technology with rate 2 on one machine.
pub fn tiny() -> Instance {
    single_tech_products(1, &[(10.0, 2.0, &[0])], 0.0)
}

/// Three single-technology products on one machine. Setups 1→2 and 2→3 are
/// 1, 1→3 is 10 and every reverse direction is `reverse`.
pub fn detour(reverse: f64) -> Instance {
    let products = (0..3)
        .map(|u| Product {
            volume: 1.0,
            technologies: vec![u],
        })
        .collect();
    let techs = (0..3)
        .map(|u| Technology {
            product: u,
            machines: vec![0],
            rate: 1.0,
        })
        .collect();
    let s = vec![0.0, 1.0, 10.0, reverse, 0.0, 1.0, reverse, reverse, 0.0];
    Instance::new(1, products, techs, vec![s]).unwrap()
}
