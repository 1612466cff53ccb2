//! Example problems shipped with the crate.

pub const TORUS: &str = include_str!("../data/torus.json");
pub const TRIANGLE_FEASIBLE: &str = include_str!("../data/triangle_feasible.json");
pub const TRIANGLE_INFEASIBLE: &str = include_str!("../data/triangle_infeasible.json");
pub const DISK_TWO: &str = include_str!("../data/disk_two.json");
pub const HEXAGON: &str = include_str!("../data/hexagon.json");
pub const TETRAHEDRON: &str = include_str!("../data/tetrahedron.json");

/// `(name, problem text, has a strictly coherent angle system)`.
pub const ALL: [(&str, &str, bool); 6] = [
    ("torus", TORUS, true),
    ("triangle_feasible", TRIANGLE_FEASIBLE, true),
    ("triangle_infeasible", TRIANGLE_INFEASIBLE, false),
    ("disk_two", DISK_TWO, true),
    ("hexagon", HEXAGON, true),
    ("tetrahedron", TETRAHEDRON, true),
];
