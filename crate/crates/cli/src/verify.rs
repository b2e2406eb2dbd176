//! Built-in check suites behind `classim verify`. Each check compares one
//! number against its known value and reports a CSV row.

use classim::analytic::{
    bases_model_bound, harmonic, harmonic_bound, mc_mean_max_overlap, mc_verify_harmonic_model,
};
use classim::linalg::basis_ket;
use classim::simulation::{bb84_devices, simulate};
use classim::states::{gen_bb84, gen_mub_bases, gen_mub_states, DensityMatrix, StateSet};
use classim::steering::{jm_binarized_feasible, jm_threshold};
use classim::witness::{classical_bound, critical_visibility, mub_witness};
use classim::Result;

pub struct CheckRow {
    pub name: String,
    pub expected: f64,
    pub got: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn row(name: String, expected: f64, got: f64, tolerance: f64) -> CheckRow {
    CheckRow { pass: (expected - got).abs() <= tolerance, name, expected, got, tolerance }
}

pub fn haar_suite(seed: u64) -> Result<Vec<CheckRow>> {
    let n = 100_000;
    let mut rows = Vec::new();
    let mut offset = 0u64;
    for d in 2..=4usize {
        for r in 2..=d {
            let (mean, se) = mc_mean_max_overlap(d, r, n, seed.wrapping_add(offset))?;
            offset += 1;
            rows.push(row(
                format!("haar-mean-overlap-d{d}-r{r}"),
                harmonic(r) / d as f64,
                mean,
                4.0 * se,
            ));
        }
    }
    for d in 2..=3usize {
        let target = DensityMatrix::from_pure(&basis_ket(d, 0))?;
        let dist = mc_verify_harmonic_model(&target, d, n, seed.wrapping_add(offset))?;
        offset += 1;
        rows.push(row(format!("haar-model-distance-d{d}"), 0.0, dist, 0.02));
    }
    Ok(rows)
}

pub fn analytic_suite() -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for (d, expected) in [(2usize, 0.5), (3, 0.416667), (4, 0.361111)] {
        rows.push(row(
            format!("harmonic-d{d}"),
            expected,
            harmonic_bound(d, d)?.visibility,
            1e-4,
        ));
    }
    for (m, expected) in [(2usize, 0.5), (3, 1.0 / 3.0), (4, 0.25)] {
        rows.push(row(
            format!("bases-model-d3-M{m}"),
            expected,
            bases_model_bound(3, m, 3)?.visibility,
            1e-4,
        ));
    }
    let res = simulate(&gen_bb84(), &bb84_devices())?;
    rows.push(row(
        "bb84-lp".into(),
        std::f64::consts::FRAC_1_SQRT_2,
        res.visibility,
        1e-6,
    ));
    Ok(rows)
}

pub fn witness_suite() -> Result<Vec<CheckRow>> {
    let w = mub_witness(2)?;
    let bound = classical_bound(&w, true)?;
    let mut rows = vec![row("witness-bound-n2".into(), 4.6667, bound.beta, 1e-3)];
    let set = gen_mub_states(3, 2)?;
    let v = critical_visibility(&w, &set, bound.beta)?;
    rows.push(row("witness-critical-n2".into(), 2.0 / 3.0, v, 2e-3));
    Ok(rows)
}

pub fn jm_suite() -> Result<Vec<CheckRow>> {
    let bases = gen_mub_bases(2)?;
    let set = StateSet::new(
        vec![
            DensityMatrix::new(bases[0].effects()[0].clone())?,
            DensityMatrix::new(bases[1].effects()[0].clone())?,
        ],
        vec!["z".into(), "x".into()],
    )?;
    let t = jm_threshold(&set)?;
    let mut rows = vec![row(
        "jm-threshold-zx".into(),
        std::f64::consts::FRAC_1_SQRT_2,
        t,
        1e-4,
    )];
    let feasible = jm_binarized_feasible(&gen_bb84(), 0.0)?;
    rows.push(row(
        "jm-depolarized-feasible".into(),
        1.0,
        if feasible { 1.0 } else { 0.0 },
        0.0,
    ));
    Ok(rows)
}
