//! Shared fixtures for the criterion benchmarks.

use monofem::{
    generate_structured, DataBounds, Kappa, Mesh, NodalField, ProblemSpec, Reaction, Source,
    StructuredKind,
};

/// A three-direction mesh with a smooth diffusion/reaction pair and two
/// small linearization states, sized by the subdivision count `n`.
pub fn standard_case(n: usize) -> (Mesh, ProblemSpec, NodalField, NodalField) {
    let mesh = generate_structured(StructuredKind::ThreeDirection, n).unwrap();
    let spec = ProblemSpec::new(
        Kappa::Tanh {
            a: 2.0,
            b: 0.4,
            c: 1.0,
        },
        Reaction::Cubic { a: 0.1 },
        Source::Constant { a: 0.2 },
        DataBounds {
            k_alpha: 1.6,
            k_beta: 2.4,
            k_eta: 0.4,
            g_eta: 0.01,
        },
    )
    .unwrap();
    let u1 = NodalField::from_fn_conforming(&mesh, |x| {
        0.02 * (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin()
    });
    let u2 = NodalField::from_fn_conforming(&mesh, |x| 0.02 * x[0] * (1.5 - x[0]) * x[1]);
    (mesh, spec, u1, u2)
}
