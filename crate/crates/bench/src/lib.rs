//! Fixtures for the criterion benchmarks in `benches/`.

use formation_core::rigidity::{Framework, RigidGraph};
use formation_core::scenario::builtin;
use formation_core::PreparedScenario;
use nalgebra::DVector;

/// A minimally rigid 2-D framework on `n >= 3` agents: a triangle strip
/// with agents on a slightly irregular double row.
pub fn strip_framework(n: usize) -> Framework {
    assert!(n >= 3);
    let mut edges = vec![(0, 1)];
    for v in 2..n {
        edges.push((v - 2, v));
        edges.push((v - 1, v));
    }
    let graph = RigidGraph::new(n, edges).expect("strip graph");
    let q = DVector::from_fn(2 * n, |r, _| {
        let i = (r / 2) as f64;
        if r % 2 == 0 {
            0.5 * i + 0.05 * (1.7 * i).sin()
        } else {
            (r / 2 % 2) as f64 + 0.05 * (2.3 * i).cos()
        }
    });
    Framework::new(graph, 2, q).expect("strip framework")
}

pub fn prepared(name: &str) -> PreparedScenario {
    builtin(name)
        .expect("built-in")
        .prepare()
        .expect("built-in validates")
}
