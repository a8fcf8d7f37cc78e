//! Published reference values the reports are checked against.

use crate::config::DomainName;

/// `(domain, δ, λ*, λ_l, λ_{u,1})` as tabulated.
pub const BOUNDS_TABLE: [(DomainName, f64, f64, f64, f64); 6] = [
    (DomainName::Slab, 0.0, 1.440, 1.1852, 1.4622),
    (DomainName::Slab, 0.1, 1.391, 0.9581, 1.4578),
    (DomainName::Slab, 0.7, 1.196, 0.4457, 1.4314),
    (DomainName::Disk, 0.0, 0.8030, 0.2080, 1.4622),
    (DomainName::Disk, 0.1, 0.7890, 0.2065, 0.8523),
    (DomainName::Disk, 0.7, 0.712, 0.1979, 0.8255),
];

/// `(domain, δ, λ*)` for the large-`δ` pull-in sweep.
pub const PULL_IN_TABLE: [(DomainName, f64, f64); 12] = [
    (DomainName::Slab, 0.0, 1.440),
    (DomainName::Slab, 0.7, 1.196),
    (DomainName::Slab, 7.0, 0.706),
    (DomainName::Slab, 70.0, 0.301),
    (DomainName::Slab, 700.0, 0.109),
    (DomainName::Slab, 7000.0, 0.036),
    (DomainName::Disk, 0.0, 0.8030),
    (DomainName::Disk, 0.7, 0.712),
    (DomainName::Disk, 7.0, 0.472),
    (DomainName::Disk, 70.0, 0.218),
    (DomainName::Disk, 700.0, 0.081),
    (DomainName::Disk, 7000.0, 0.028),
];

/// `(δ, λ, T_slab, T_disk)` quench times.
pub const QUENCH_TABLE: [(f64, f64, f64, f64); 14] = [
    (0.0, 1.5, 1.073664, 0.292764),
    (0.0, 10.0, 0.034122, 0.033348),
    (0.0, 50.0, 0.0066666, 0.006666),
    (0.0, 100.0, 0.003333, 0.00333),
    (0.1, 2.0, 0.30837, 0.19011),
    (0.1, 20.0, 0.016692, 0.016668),
    (0.1, 200.0, 0.000816, 0.000816),
    (0.1, 2000.0, 0.000048, 0.000048),
    (1.0, 2.0, 0.24009, 0.18327),
    (1.0, 20.0, 0.008658, 0.008778),
    (1.0, 200.0, 0.000198, 0.000198),
    (10.0, 2.0, 0.098892, 0.101538),
    (10.0, 20.0, 0.001392, 0.001398),
    (10.0, 200.0, 0.000066, 0.000066),
];

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

pub fn bounds_reference(domain: DomainName, delta: f64) -> Option<(f64, f64)> {
    BOUNDS_TABLE.iter().find(|r| r.0 == domain && same(r.1, delta)).map(|r| (r.3, r.4))
}

pub fn pull_in_reference(domain: DomainName, delta: f64) -> Option<f64> {
    PULL_IN_TABLE
        .iter()
        .find(|r| r.0 == domain && same(r.1, delta))
        .map(|r| r.2)
        .or_else(|| BOUNDS_TABLE.iter().find(|r| r.0 == domain && same(r.1, delta)).map(|r| r.2))
}

pub fn quench_reference(domain: DomainName, delta: f64, lambda: f64) -> Option<f64> {
    QUENCH_TABLE.iter().find(|r| same(r.0, delta) && same(r.1, lambda)).map(|r| match domain {
        DomainName::Slab => r.2,
        DomainName::Disk => r.3,
    })
}
