//! Systems used by the benchmarks.

use flatdisc_core::system::DiscreteSystem;

/// The five-state, two-input example with outputs `(x2+1)/x1`, `x5 − x3`.
pub fn running_example() -> DiscreteSystem {
    DiscreteSystem::parse(
        &["x1", "x2", "x3", "x4", "x5"],
        &["u1", "u2"],
        &["x2*(u1+1)", "u1", "x4+u2-1", "x5+1-x1*(u1+1)/(x2+1)", "u2+x2"],
    )
    .expect("valid system")
}

/// Independent shift chains of the given lengths.
pub fn chains(lengths: &[usize]) -> DiscreteSystem {
    let mut states = Vec::new();
    let mut inputs = Vec::new();
    let mut dynamics = Vec::new();
    for (i, &r) in lengths.iter().enumerate() {
        for j in 1..=r {
            states.push(format!("x{}_{j}", i + 1));
            dynamics.push(if j < r { format!("x{}_{}", i + 1, j + 1) } else { format!("u{}", i + 1) });
        }
        inputs.push(format!("u{}", i + 1));
    }
    DiscreteSystem::parse(&states, &inputs, &dynamics).expect("valid system")
}
