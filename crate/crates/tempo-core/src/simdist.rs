//! ε-simulation, classical simulation/bisimulation for reactive processes,
//! and the simulation distance `d(s1,s2) = inf{ε >= 1 | s1 ≾_ε s2}`,
//! computed by bisection over the candidate constants `c(F,G)` of the model.

use thiserror::Error;

use crate::accel::{
    c_clamped_or_numeric, eps_faster, least_acceleration, Acceleration, GridSpec,
    UnsupportedShape,
};
use crate::coupling::coupling_exists;
use crate::smp::{Smp, SmpError};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Smp(#[from] SmpError),
    #[error("residence-time distributions outside the computable family and numeric fallback disabled")]
    Unsupported(#[from] UnsupportedShape),
}

/// Residence condition of ε-simulation for the pair `(s1, s2)`: the
/// simulating state's CDF, accelerated by ε, dominates the simulated one's.
fn residence_ok(smp: &Smp, s1: usize, s2: usize, eps: f64, grid: &GridSpec<f64>) -> bool {
    eps_faster(smp.residence(s2), smp.residence(s1), eps, grid)
}

fn require_reactive(smp: &Smp) -> Result<(), SimError> {
    if smp.is_reactive() {
        Ok(())
    } else {
        Err(SimError::Smp(SmpError::KindMismatch(
            "(ε-)simulation is defined on reactive processes".into(),
        )))
    }
}

/// Greatest-fixed-point computation of the largest ε-simulation relation;
/// returns the full relation matrix (entry `[s1][s2]` = "s2 ε-simulates
/// s1").
pub fn eps_simulation_relation(
    smp: &Smp,
    eps: f64,
    grid: &GridSpec<f64>,
) -> Result<Vec<Vec<bool>>, SimError> {
    require_reactive(smp)?;
    let n = smp.state_count();
    let mut rel: Vec<Vec<bool>> = (0..n)
        .map(|s1| {
            (0..n)
                .map(|s2| {
                    smp.labels_of(s1) == smp.labels_of(s2)
                        && residence_ok(smp, s1, s2, eps, grid)
                })
                .collect()
        })
        .collect();
    loop {
        let mut changed = false;
        for s1 in 0..n {
            for s2 in 0..n {
                if !rel[s1][s2] {
                    continue;
                }
                let ok = (0..smp.inputs.len()).all(|a| {
                    let mu1 = smp.reactive_row(s1, a);
                    let mu2 = smp.reactive_row(s2, a);
                    match coupling_exists(&mu1, &mu2, &|x, y| rel[x][y]) {
                        Ok(Some(_)) => true,
                        Ok(None) => false,
                        // differing branch masses admit no weight function
                        Err(_) => false,
                    }
                });
                if !ok {
                    rel[s1][s2] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(rel);
        }
    }
}

/// Does `s2` ε-simulate `s1`?
pub fn eps_simulates(
    smp: &Smp,
    s1: usize,
    s2: usize,
    eps: f64,
    grid: &GridSpec<f64>,
) -> Result<bool, SimError> {
    Ok(eps_simulation_relation(smp, eps, grid)?[s1][s2])
}

/// Classical simulation = ε-simulation at ε = 1.
pub fn simulates(smp: &Smp, s1: usize, s2: usize, grid: &GridSpec<f64>) -> Result<bool, SimError> {
    eps_simulates(smp, s1, s2, 1.0, grid)
}

/// Bisimilarity via symmetric equality refinement: labels equal, CDFs
/// pointwise equal, couplings in both directions at every step.
pub fn bisimilar(smp: &Smp, s1: usize, s2: usize, grid: &GridSpec<f64>) -> Result<bool, SimError> {
    require_reactive(smp)?;
    let n = smp.state_count();
    let mut rel: Vec<Vec<bool>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    smp.labels_of(a) == smp.labels_of(b)
                        && residence_ok(smp, a, b, 1.0, grid)
                        && residence_ok(smp, b, a, 1.0, grid)
                })
                .collect()
        })
        .collect();
    loop {
        let mut changed = false;
        for a in 0..n {
            for b in 0..n {
                if !rel[a][b] {
                    continue;
                }
                let ok = (0..smp.inputs.len()).all(|input| {
                    let mu1 = smp.reactive_row(a, input);
                    let mu2 = smp.reactive_row(b, input);
                    matches!(coupling_exists(&mu1, &mu2, &|x, y| rel[x][y]), Ok(Some(_)))
                });
                if !ok {
                    rel[a][b] = false;
                    rel[b][a] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(rel[s1][s2]);
        }
    }
}

/// The candidate constants `C(M) = {c(F_s, F_s') | s, s'}`, clamped to
/// `[1, ∞]`, finite ones sorted strictly ascending.
pub fn candidate_constants(
    smp: &Smp,
    grid: &GridSpec<f64>,
    numeric_fallback: bool,
) -> Result<Vec<f64>, SimError> {
    let n = smp.state_count();
    let mut values = Vec::new();
    for s in 0..n {
        for s2 in 0..n {
            let c = if numeric_fallback {
                c_clamped_or_numeric(smp.residence(s), smp.residence(s2), grid)
            } else {
                least_acceleration(smp.residence(s), smp.residence(s2))?.clamped()
            };
            if let Acceleration::Finite(v) = c {
                values.push(v);
            }
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // deduplicate: exact ties first, then within 1e-9 relative (bisection
    // needs a strictly sorted list)
    values.dedup();
    values.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.max(1.0));
    Ok(values)
}

/// Simulation distance per the bisection algorithm: the distance is either
/// infinite or the least candidate constant at which ε-simulation holds.
pub fn simulation_distance(
    smp: &Smp,
    s1: usize,
    s2: usize,
    grid: &GridSpec<f64>,
    numeric_fallback: bool,
) -> Result<Acceleration<f64>, SimError> {
    require_reactive(smp)?;
    let cs = candidate_constants(smp, grid, numeric_fallback)?;
    if cs.is_empty() {
        return Ok(Acceleration::Infinite);
    }
    let sim = |eps: f64| eps_simulates(smp, s1, s2, eps, grid);
    if sim(cs[0])? {
        return Ok(Acceleration::Finite(cs[0]));
    }
    let n = cs.len();
    if !sim(cs[n - 1])? {
        return Ok(Acceleration::Infinite);
    }
    // bisection over indices, 1-based to mirror the published algorithm
    let (mut i, mut j) = (1usize, n);
    while i < j {
        let h = (j - i).div_ceil(2);
        if sim(cs[j - h - 1])? {
            j -= h;
        } else {
            i += h;
        }
    }
    Ok(Acceleration::Finite(cs[j - 1]))
}

/// All-pairs distance table with the hemimetric axioms of `log d` verified;
/// any violation indicates an implementation bug and is reported.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    pub names: Vec<String>,
    pub distance: Vec<Vec<Acceleration<f64>>>,
    pub violations: Vec<String>,
}

impl DistanceTable {
    pub fn log_entry(&self, i: usize, j: usize) -> Option<f64> {
        self.distance[i][j].finite().map(|v| v.ln())
    }
}

pub fn log_distance_table(
    smp: &Smp,
    grid: &GridSpec<f64>,
    numeric_fallback: bool,
) -> Result<DistanceTable, SimError> {
    let n = smp.state_count();
    let mut distance = vec![vec![Acceleration::Infinite; n]; n];
    for (i, row) in distance.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = simulation_distance(smp, i, j, grid, numeric_fallback)?;
        }
    }
    let mut violations = Vec::new();
    for (i, row) in distance.iter().enumerate() {
        match row[i] {
            Acceleration::Finite(v) if (v - 1.0).abs() <= 1e-9 => {}
            other => violations.push(format!("d({i},{i}) = {other}, expected 1")),
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let lhs = &distance[x][z];
                let rhs = distance[x][y].mul(&distance[y][z]);
                // multiplicative triangle inequality, log view
                let ok = match (lhs, &rhs) {
                    (_, Acceleration::Infinite) => true,
                    (Acceleration::Infinite, Acceleration::Finite(_)) => false,
                    (Acceleration::Finite(l), Acceleration::Finite(r)) => {
                        l.ln() <= r.ln() + 1e-9
                    }
                };
                if !ok {
                    violations.push(format!(
                        "triangle violated: log d({x},{z}) > log d({x},{y}) + log d({y},{z})"
                    ));
                }
            }
        }
    }
    Ok(DistanceTable {
        names: (0..n).map(|s| smp.state_name(s).to_string()).collect(),
        distance,
        violations,
    })
}

/// Raw (unclamped) least acceleration between two states' residence CDFs;
/// surfaces sub-1 factors for diagnostics.
pub fn raw_residence_acceleration(
    smp: &Smp,
    s1: usize,
    s2: usize,
    grid: &GridSpec<f64>,
) -> Acceleration<f64> {
    match least_acceleration(smp.residence(s2), smp.residence(s1)) {
        Ok(a) => a,
        Err(UnsupportedShape) => {
            crate::accel::least_acceleration_numeric(smp.residence(s2), smp.residence(s1), grid)
        }
    }
}

/// The acceleration characterisation: `s1 ≾_ε s2` iff `s1 ≾ (s2)_ε` in the
/// model extended with an ε-accelerated copy. Exposed for the property
/// suites.
pub fn simulates_accelerated_copy(
    smp: &Smp,
    s1: usize,
    s2: usize,
    eps: f64,
    grid: &GridSpec<f64>,
) -> Result<bool, SimError> {
    let mut doubled = smp.clone();
    let offset = doubled.absorb(&smp.accelerated_copy(eps))?;
    simulates(&doubled, s1, s2 + offset, grid)
}
