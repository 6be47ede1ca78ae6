//! Synthetic datasets for tests and benchmarks: exhaustive binary cubes with
//! controlled fitness shapes (unimodal, deceptive, iid-random), a sensitivity
//! switch landscape, and seeded subsampling.
//!
//! Everything here is either exhaustive or driven by an explicit seed so that
//! expected metric values can be derived by hand or by brute force.

use rand::seq::index::sample as index_sample;
use rand::Rng;

use crate::dataset::{Dataset, Objective, OptionDecl, OptionKind, OptionValue};
use crate::seeding::rng_from_seed;

fn bool_decl(name: &str) -> OptionDecl {
    OptionDecl {
        name: name.to_string(),
        kind: OptionKind::Boolean,
        declared_domain: Some(vec![OptionValue::Bool(false), OptionValue::Bool(true)]),
        taxonomy: None,
    }
}

/// Exhaustive cube over the given boolean option names. Rows are enumerated
/// with the first option as the most significant bit, so row index == the
/// binary code of its configuration.
pub fn cube_with_names(
    system: &str,
    workload: &str,
    objective: Objective,
    names: &[&str],
    mut f: impl FnMut(&[u16]) -> f64,
) -> Dataset {
    let n = names.len();
    assert!((1..=16).contains(&n), "cube dimensionality out of range");
    let decls: Vec<OptionDecl> = names.iter().map(|name| bool_decl(name)).collect();
    let mut rows = Vec::with_capacity(1 << n);
    for code in 0..(1u32 << n) {
        let bits: Vec<u16> = (0..n).map(|i| ((code >> (n - 1 - i)) & 1) as u16).collect();
        let perf = f(&bits);
        let values: Vec<OptionValue> = bits.iter().map(|&b| OptionValue::Bool(b == 1)).collect();
        rows.push((values, perf));
    }
    Dataset::from_values(system, workload, objective, decls, rows)
        .expect("exhaustive cube is well-formed")
}

/// Exhaustive cube over options `x1..xn`.
pub fn binary_cube(
    system: &str,
    workload: &str,
    objective: Objective,
    n: usize,
    f: impl FnMut(&[u16]) -> f64,
) -> Dataset {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    cube_with_names(system, workload, objective, &refs, f)
}

/// 3-bit unimodal benchmark: f = 4a + 2b + c, minimized. The unique optimum
/// sits at (false, false, false) and every descent path reaches it.
pub fn d3() -> Dataset {
    cube_with_names("bench", "d3", Objective::Minimize, &["a", "b", "c"], |b| {
        (4 * b[0] + 2 * b[1] + b[2]) as f64
    })
}

/// 3-bit two-peak variant: f(000) = 0, f(111) = 1, everything else 5.
/// Splits the cube into two equal basins.
pub fn d3b() -> Dataset {
    cube_with_names("bench", "d3b", Objective::Minimize, &["a", "b", "c"], |b| {
        match b.iter().sum::<u16>() {
            0 => 0.0,
            3 => 1.0,
            _ => 5.0,
        }
    })
}

/// Exhaustive n-bit cube with iid U(0,1) fitness. Maximally rugged: neighbor
/// fitness carries no information.
pub fn iid_uniform_cube(n: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    binary_cube("bench", "iid", Objective::Minimize, n, |_| rng.gen_range(0.0..1.0))
}

/// Exhaustive n-bit cube with fitness = ones count + noise * U(-0.5, 0.5).
/// For noise < 1 the landscape stays strictly unimodal (single optimum at
/// all-zeros) because adjacent ones counts differ by exactly 1.
pub fn linear_noise_cube(n: usize, seed: u64, noise: f64) -> Dataset {
    assert!((0.0..1.0).contains(&noise), "noise must stay below the unit step");
    let mut rng = rng_from_seed(seed);
    binary_cube("bench", "smooth", Objective::Minimize, n, |bits| {
        let ones: u16 = bits.iter().sum();
        ones as f64 + noise * (rng.gen::<f64>() - 0.5)
    })
}

/// Exhaustive n-bit cube minimizing the ones count: smooth, unimodal, optimum
/// at all-zeros with fitness 0.
pub fn unimodal_cube(n: usize) -> Dataset {
    binary_cube("bench", "zeromax", Objective::Minimize, n, |bits| {
        bits.iter().sum::<u16>() as f64
    })
}

/// Cost of one 5-bit trap block with u ones: the all-ones block is free, and
/// below it the gradient points toward all-zeros, which costs 10.
fn trap_block_cost(u: u32) -> f64 {
    match u {
        5 => 0.0,
        0 => 10.0,
        u => 10.0 + u as f64,
    }
}

/// Deceptive 10-bit landscape: two concatenated 5-bit trap blocks, minimized.
/// The global optimum is all-ones (cost 0); local descent from almost
/// everywhere converges to all-zeros blocks (cost 10 each).
pub fn two_trap() -> Dataset {
    binary_cube("bench", "two-trap", Objective::Minimize, 10, |bits| {
        let u1: u32 = bits[..5].iter().map(|&b| u32::from(b)).sum();
        let u2: u32 = bits[5..].iter().map(|&b| u32::from(b)).sum();
        trap_block_cost(u1) + trap_block_cost(u2)
    })
}

/// Keeps a seeded random fraction of rows (at least two), preserving the
/// original option domains so distances keep their meaning.
pub fn subsample(ds: &Dataset, fraction: f64, seed: u64) -> Dataset {
    assert!(fraction > 0.0 && fraction <= 1.0, "fraction must be in (0, 1]");
    let m = ds.len();
    let keep = ((fraction * m as f64).round() as usize).clamp(2, m);
    let mut rng = rng_from_seed(seed);
    let mut picked: Vec<usize> = index_sample(&mut rng, m, keep).into_iter().collect();
    picked.sort_unstable();

    let decls: Vec<OptionDecl> = ds
        .options()
        .iter()
        .map(|spec| OptionDecl {
            name: spec.name.clone(),
            kind: spec.kind,
            declared_domain: Some(spec.domain.clone()),
            taxonomy: spec.taxonomy.clone(),
        })
        .collect();
    let rows: Vec<(Vec<OptionValue>, f64)> = picked
        .iter()
        .map(|&i| {
            let row = ds.row(i);
            let values = ds
                .options()
                .iter()
                .enumerate()
                .map(|(o, spec)| spec.value(row.configuration.values[o]).clone())
                .collect();
            (values, row.performance)
        })
        .collect();
    Dataset::from_values(&ds.system, &ds.workload, ds.objective, decls, rows)
        .expect("subsample of a valid dataset is well-formed")
}

/// Sensitivity benchmark: one 8-valued integer option `s` switches the
/// (x1..x5) sub-landscape between a smooth linear ramp (s = 0) and seven
/// independent iid-random tables (s = 1..7); a boolean `d` is a pure dummy
/// that never influences fitness. 8 * 32 * 2 = 512 rows, minimized.
pub fn switch_landscape(seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(7);
    for _ in 0..7 {
        tables.push((0..32).map(|_| rng.gen_range(5.0..15.0)).collect());
    }

    let mut decls = vec![OptionDecl {
        name: "s".to_string(),
        kind: OptionKind::Integer,
        declared_domain: Some((0..8).map(OptionValue::Int).collect()),
        taxonomy: None,
    }];
    decls.extend((1..=5).map(|i| bool_decl(&format!("x{i}"))));
    decls.push(bool_decl("d"));

    let mut rows = Vec::with_capacity(512);
    for s in 0..8i64 {
        for x_code in 0..32u16 {
            let bits: Vec<bool> = (0..5).map(|i| (x_code >> (4 - i)) & 1 == 1).collect();
            let perf = if s == 0 {
                1.0 + 8.0 * f64::from(x_code) / 31.0
            } else {
                tables[(s - 1) as usize][x_code as usize]
            };
            for d in [false, true] {
                let mut values = vec![OptionValue::Int(s)];
                values.extend(bits.iter().map(|&b| OptionValue::Bool(b)));
                values.push(OptionValue::Bool(d));
                rows.push((values, perf));
            }
        }
    }
    Dataset::from_values("bench", "switch", Objective::Minimize, decls, rows)
        .expect("switch landscape is well-formed")
}

/// Two workloads over the same exhaustive n-bit schema whose fitness tables
/// differ by a constant offset, so their optima and basins coincide exactly.
pub fn offset_pair(n: usize, seed: u64, offset: f64) -> (Dataset, Dataset) {
    let mut rng = rng_from_seed(seed);
    let base: Vec<f64> = (0..(1usize << n)).map(|_| rng.gen_range(0.0..1.0)).collect();
    let code = |bits: &[u16]| -> usize {
        bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
    };
    let w1 = binary_cube("bench", "w1", Objective::Minimize, n, |bits| base[code(bits)]);
    let w2 = binary_cube("bench", "w2", Objective::Minimize, n, |bits| base[code(bits)] + offset);
    (w1, w2)
}
