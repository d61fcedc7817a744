//! Piecewise-constant material layouts over the subdomain grid.

use crate::fem::{Material, MaterialField};
use crate::harness::config::MaterialPattern;
use crate::mesh::Partition;

/// Compressible, strongly permeable material.
pub fn material_a() -> Material {
    Material {
        nu: 0.3,
        kappa: 1e-2,
    }
}

/// Nearly incompressible, weakly permeable material.
pub fn material_b() -> Material {
    Material {
        nu: 0.4999,
        kappa: 1e-9,
    }
}

/// `uniform` uses `a` everywhere. `across` is a checkerboard over subdomains
/// with `a` where `i + j` is even; `along` alternates by subdomain column.
pub fn material_pattern(
    pattern: MaterialPattern,
    partition: &Partition,
    a: Material,
    b: Material,
) -> MaterialField {
    let pick = |s: usize| {
        let (i, j) = partition.block_coords(s);
        let use_a = match pattern {
            MaterialPattern::Uniform => true,
            MaterialPattern::Across => (i + j) % 2 == 0,
            MaterialPattern::Along => i % 2 == 0,
        };
        if use_a {
            a
        } else {
            b
        }
    };
    let per_element: Vec<Material> = partition.owner.iter().map(|&s| pick(s)).collect();
    MaterialField::from_elements(&per_element)
}
