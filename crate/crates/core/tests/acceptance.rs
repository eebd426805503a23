//! Acceptance criteria. Each test writes one PASS/FAIL line to stderr.
//! Run with `cargo test -p xlindley --test acceptance -- --test-threads=1`.

mod common;

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;

use common::*;
use xlindley::estimation::{blie_coefficients, blue_coefficients, fit_correlation, mse_and_rec, CensoredSample, Estimator};
use xlindley::moments::{oracle_product_moment, oracle_single_moment, MomentSet};
use xlindley::montecarlo::{
    bootstrap_quantile_se, run_simulation_study, simulate_pivotal_draws, PivotalConfig, StreamFactory, StudyConfig,
    DEFAULT_TAUS,
};
use xlindley::{distribution, moment_set, single_moment, PivotalKind, PredictionProblem, Predictor, QuantileTable};

const PSIS: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

fn schemes() -> Vec<(usize, usize)> {
    xlindley::tables::standard_schemes(&[6, 10])
}

#[test]
fn criterion_01_means_table() {
    let rows: Vec<MeanRow> = load("means.csv");
    let start = Instant::now();
    let sets: HashMap<(usize, u64), MomentSet> = PSIS
        .iter()
        .flat_map(|&psi| (1..=10).map(move |n| ((n, psi.to_bits()), MomentSet::compute(n, psi).unwrap())))
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let mut worst: f64 = 0.0;
    for row in &rows {
        // One printed entry carries a spurious trailing zero; its leading digits are authoritative.
        let printed: f64 = if row.value == ".555490" { 0.55549 } else { row.value.parse().unwrap() };
        let got = sets[&(row.n, row.psi.to_bits())].means[row.r - 1];
        worst = worst.max((got - printed).abs());
    }
    let ok = rows.len() == 220 && worst <= 5e-5 && elapsed < 1.0;
    verdict(
        "1 means table",
        ok,
        &format!("{} entries, max abs deviation {worst:.2e}, {elapsed:.3}s", rows.len()),
    );
    assert!(ok);
}

#[test]
fn criterion_02_identities() {
    let mut worst_mean: f64 = 0.0;
    let mut worst_cov: f64 = 0.0;
    let mut all_pd = true;
    for psi in PSIS {
        for n in 1..=10 {
            let ms = moment_set(n, psi).unwrap();
            worst_mean = worst_mean.max(ms.mean_identity_gap().unwrap());
            worst_cov = worst_cov.max(ms.covariance_identity_gap().unwrap());
            all_pd &= xlindley::linalg::Cholesky::factor(&ms.cov).is_ok();
        }
    }
    let ok = worst_mean <= 1e-8 && worst_cov <= 1e-8 && all_pd;
    verdict(
        "2 moment identities",
        ok,
        &format!("mean gap {worst_mean:.2e}, covariance gap {worst_cov:.2e}, positive definite: {all_pd}"),
    );
    assert!(ok);
}

#[test]
fn criterion_03_oracle_equivalence() {
    let start = Instant::now();
    let single: Vec<(usize, usize, u32, f64)> = PSIS
        .iter()
        .flat_map(|&psi| {
            (1..=10).flat_map(move |n| (1..=n).flat_map(move |r| [1u32, 2].map(move |k| (r, n, k, psi))))
        })
        .collect();
    let worst_single = single
        .par_iter()
        .map(|&(r, n, k, psi)| {
            let closed = single_moment(r, n, k, psi).unwrap();
            let oracle = oracle_single_moment(r, n, k, psi).unwrap();
            ((closed - oracle) / oracle).abs()
        })
        .reduce(|| 0.0, f64::max);
    let pairs: Vec<(usize, usize, usize, f64)> = PSIS
        .iter()
        .flat_map(|&psi| {
            (2..=8).flat_map(move |n| (1..n).flat_map(move |r| (r + 1..=n).map(move |s| (r, s, n, psi))))
        })
        .collect();
    let worst_product = pairs
        .par_iter()
        .map(|&(r, s, n, psi)| {
            let ms = moment_set(n, psi).unwrap();
            let closed = ms.cov.get(r - 1, s - 1) + ms.means[r - 1] * ms.means[s - 1];
            let oracle = oracle_product_moment(r, s, n, 1, 1, psi).unwrap();
            ((closed - oracle) / oracle).abs()
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst_single <= 1e-7 && worst_product <= 1e-6 && elapsed < 300.0;
    verdict(
        "3 oracle equivalence",
        ok,
        &format!(
            "{} single (max rel {worst_single:.2e}), {} product (max rel {worst_product:.2e}), {elapsed:.1}s",
            single.len(),
            pairs.len()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_04_coefficient_tables() {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (file, pick) in [
        ("blue_location.csv", 0usize),
        ("blue_scale.csv", 1),
        ("blie_location.csv", 2),
        ("blie_scale.csv", 3),
    ] {
        for row in load::<CoefRow>(file) {
            let c = if pick >= 2 { blie_coefficients(row.n, row.m, row.psi) } else { blue_coefficients(row.n, row.m, row.psi) }
                .unwrap();
            let w = [&c.a, &c.b, &c.a_inv, &c.b_inv][pick];
            worst = worst.max((w[row.i - 1] - row.value).abs());
            count += 1;
        }
    }
    let mut worst_sum: f64 = 0.0;
    for psi in PSIS {
        for (n, m) in schemes() {
            let c = blue_coefficients(n, m, psi).unwrap();
            worst_sum = worst_sum.max((c.a.iter().sum::<f64>() - 1.0).abs());
            worst_sum = worst_sum.max(c.b.iter().sum::<f64>().abs());
        }
    }
    let ok = count == 880 && worst <= 5e-5 && worst_sum <= 1e-10;
    verdict(
        "4 coefficient tables",
        ok,
        &format!("{count} weights, max abs deviation {worst:.2e}, max constraint gap {worst_sum:.2e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_05_variance_factors() {
    let mut worst: f64 = 0.0;
    let mut rec_above_one = true;
    let rows: Vec<EfficiencyRow> = load("efficiency.csv");
    for row in &rows {
        let c = blue_coefficients(row.n, row.m, row.psi).unwrap();
        let e = mse_and_rec(&c);
        let diffs = [c.v1 - row.v1, c.v2 - row.v2, c.v3 - row.v3, e.rec_location - row.rec_location, e.rec_scale - row.rec_scale];
        worst = diffs.iter().fold(worst, |w, d| w.max(d.abs()));
        rec_above_one &= e.rec_location > 1.0 && e.rec_scale > 1.0;
    }
    let ok = rows.len() == 32 && worst <= 5e-5 && rec_above_one;
    verdict(
        "5 variance factors and efficiencies",
        ok,
        &format!("{} rows, max abs deviation {worst:.2e}", rows.len()),
    );
    assert!(ok);
}

#[test]
fn criterion_06_prediction_grid() {
    let rows: Vec<PredictionRow> = load("prediction.csv");
    let mut worst: f64 = 0.0;
    for row in &rows {
        let p = PredictionProblem::new(row.n, row.m, row.q, row.psi).unwrap();
        worst = worst.max((p.v4 - row.v4).abs()).max((p.rec() - row.rec).abs());
    }
    let mut ordered = true;
    for psi in PSIS {
        for (n, m, q) in xlindley::tables::standard_prediction_schemes(&[6, 10]) {
            let p = PredictionProblem::new(n, m, q, psi).unwrap();
            ordered &= p.mspe(Predictor::Blip) <= p.mspe(Predictor::Blup);
        }
    }
    let ok = rows.len() == 52 && worst <= 5e-5 && ordered;
    verdict(
        "6 prediction grid",
        ok,
        &format!("{} cells, max abs deviation {worst:.2e}, BLIP never worse: {ordered}", rows.len()),
    );
    assert!(ok);
}

#[test]
fn criterion_07_worked_example() {
    let data = fatigue_data();
    let psi = 4.0;
    let mut est_dev: f64 = 0.0;
    let mut unit_dev: f64 = 0.0;

    // (m, BLUE loc, BLUE scale, BLIE loc, BLIE scale, V1, V2, V3, MSE BLIE loc, MSE BLIE scale)
    let rows = [
        (0usize, 145.1533, 289.8381, 145.9070, 260.9310, 0.0008, 0.1108, -0.0029, 0.0007, 0.0997),
        (1, 146.2211, 248.8363, 146.9404, 221.2461, 0.0008, 0.1247, -0.0033, 0.0008, 0.1109),
    ];
    for (m, bl, bs, il, is, v1, v2, v3, ml, msc) in rows {
        let s = CensoredSample::new(data[..10 - m].to_vec(), 10, m).unwrap();
        let blue = xlindley::estimation::estimate(&s, psi, Estimator::Blue).unwrap();
        let blie = xlindley::estimation::estimate(&s, psi, Estimator::Blie).unwrap();
        for (got, want) in [(blue.location, bl), (blue.scale, bs), (blie.location, il), (blie.scale, is)] {
            est_dev = est_dev.max((got - want).abs());
        }
        let c = blue_coefficients(10, m, psi).unwrap();
        let e = mse_and_rec(&c);
        for (got, want) in [(c.v1, v1), (c.v2, v2), (c.v3, v3), (e.mse_blie_location, ml), (e.mse_blie_scale, msc)] {
            unit_dev = unit_dev.max((got - want).abs());
        }
    }
    let s = CensoredSample::new(data[..9].to_vec(), 10, 1).unwrap();
    let p = PredictionProblem::new(10, 1, 10, psi).unwrap();
    let blup = p.predict(&s, Predictor::Blup).unwrap();
    let blip = p.predict(&s, Predictor::Blip).unwrap();
    est_dev = est_dev.max((blup - 327.1256).abs()).max((blip - 319.9548).abs());
    for (got, want) in [(p.v4, 0.0324), (p.mspe(Predictor::Blup), 0.0755), (p.mspe(Predictor::Blip), 0.0745)] {
        unit_dev = unit_dev.max((got - want).abs());
    }
    let full = CensoredSample::new(data.clone(), 10, 0).unwrap();
    let corr = fit_correlation(&full, psi).unwrap();

    let ok = est_dev <= 0.01 && unit_dev <= 5e-4 && corr > 0.963;
    verdict(
        "7 worked example",
        ok,
        &format!("max estimate deviation {est_dev:.4}, max sigma^2-unit deviation {unit_dev:.2e}, correlation {corr:.5}"),
    );
    assert!(ok);
}

fn simulated_tables(reps: usize, seed: u64, configs: &[(f64, usize, usize)]) -> HashMap<(u64, usize, usize), xlindley::montecarlo::PivotalDraws> {
    configs
        .iter()
        .map(|&(psi, n, m)| {
            let draws = simulate_pivotal_draws(&PivotalConfig::new(psi, n, m, reps, seed)).unwrap();
            ((psi.to_bits(), n, m), draws)
        })
        .collect()
}

#[test]
fn criterion_08_quantile_tables() {
    let start = Instant::now();
    let reps = 10_000;
    let rows: Vec<QuantileRow> = load("quantiles.csv");
    let configs: Vec<(f64, usize, usize)> = PSIS.iter().flat_map(|&psi| schemes().into_iter().map(move |(n, m)| (psi, n, m))).collect();
    let draws = simulated_tables(reps, 2024, &configs);

    let results: Vec<(&'static str, bool)> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let kind: PivotalKind = row.kind.parse().unwrap();
            let d = &draws[&(row.psi.to_bits(), row.n, row.m)];
            let values = d.values(kind, row.q).unwrap();
            let ours = d.quantiles(kind, row.q, &[row.tau]).unwrap()[0].value;
            let mut rng = StreamFactory::new(7, "acceptance-bootstrap").stream(i as u64);
            let se = bootstrap_quantile_se(values, row.tau, reps, 200, &mut rng).unwrap();
            let table = match kind {
                PivotalKind::LocationBlue | PivotalKind::ScaleBlue => "T1/T2",
                PivotalKind::LocationBlie | PivotalKind::ScaleBlie => "T3/T4",
                _ => "T1*",
            };
            (table, (ours - row.value).abs() <= 3.0 * se)
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let mut ok = elapsed < 360.0;
    let mut parts = Vec::new();
    for table in ["T1/T2", "T3/T4", "T1*"] {
        let hits: Vec<bool> = results.iter().filter(|r| r.0 == table).map(|r| r.1).collect();
        let frac = hits.iter().filter(|h| **h).count() as f64 / hits.len() as f64;
        ok &= frac >= 0.9;
        parts.push(format!("{table} {:.1}% of {}", 100.0 * frac, hits.len()));
    }
    verdict(
        "8 simulated quantiles within 3 bootstrap SE",
        ok,
        &format!("{}, {elapsed:.1}s", parts.join(", ")),
    );
    assert!(ok);
}

#[test]
fn criterion_09_simulation_study() {
    let start = Instant::now();
    let est_rows: Vec<StudyEstimateRow> = load("study_estimates.csv");
    let int_rows: Vec<StudyIntervalRow> = load("study_intervals.csv");
    let configs: Vec<(f64, usize, usize)> = PSIS
        .iter()
        .flat_map(|&psi| schemes().into_iter().filter(|s| s.1 > 0).map(move |(n, m)| (psi, n, m)))
        .collect();
    let mut table = QuantileTable::new();
    for d in simulated_tables(10_000, 2024, &configs).values() {
        table.extend(d.table(&DEFAULT_TAUS).unwrap().entries().cloned());
    }
    let reports: HashMap<(u64, usize, usize), _> = configs
        .iter()
        .map(|&(psi, n, m)| {
            let r = run_simulation_study(&StudyConfig::new(psi, n, m, 1000, 77), &table).unwrap();
            ((psi.to_bits(), n, m), r)
        })
        .collect();

    let mut cp_total = 0;
    let mut cp_hits = 0;
    let mut aw_total = 0;
    let mut aw_hits = 0;
    let mut worst_cp: f64 = 0.0;
    let mut worst_aw: f64 = 0.0;
    for row in &int_rows {
        let r = &reports[&(row.psi.to_bits(), row.n, row.m)];
        let p = r.prediction(row.q).unwrap();
        let ours = [
            *r.interval(PivotalKind::LocationBlue).unwrap(),
            *r.interval(PivotalKind::ScaleBlue).unwrap(),
            *r.interval(PivotalKind::LocationBlie).unwrap(),
            *r.interval(PivotalKind::ScaleBlie).unwrap(),
            p.intervals[0],
            p.intervals[1],
        ];
        for ((s, cp), aw) in ours.iter().zip(row.coverages()).zip(row.widths()) {
            let dcp = (s.coverage - cp).abs();
            let daw = (s.average_width / aw - 1.0).abs();
            worst_cp = worst_cp.max(dcp);
            worst_aw = worst_aw.max(daw);
            cp_total += 1;
            aw_total += 1;
            cp_hits += (dcp <= 0.02 + 1e-12) as usize;
            aw_hits += (daw <= 0.10) as usize;
        }
    }
    let mut order_rows = 0;
    let mut order_hits = 0;
    for row in &est_rows {
        let r = &reports[&(row.psi.to_bits(), row.n, row.m)];
        let p = r.prediction(row.q).unwrap();
        order_rows += 1;
        // BLUE averages sit closer to the truth (0, 1); BLIP has the smaller EMSPE.
        let bias = r.mean_blue_location.abs() <= r.mean_blie_location.abs()
            && (r.mean_blue_scale - 1.0).abs() <= (r.mean_blie_scale - 1.0).abs();
        order_hits += (bias && p.emspe_blip <= p.emspe_blup) as usize;
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = cp_hits == cp_total && aw_hits == aw_total && order_hits == order_rows && elapsed < 300.0;
    verdict(
        "9 simulation study",
        ok,
        &format!(
            "CP within 0.02: {cp_hits}/{cp_total} (worst {worst_cp:.3}); AW within 10%: {aw_hits}/{aw_total} (worst {:.1}%); \
             orderings: {order_hits}/{order_rows}; {elapsed:.1}s",
            100.0 * worst_aw
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_10_statistical_correctness() {
    // Variances of the BLUEs.
    let reps = 100_000u64;
    let mut worst_var: f64 = 0.0;
    for (psi, n, m) in [(1.0, 6, 1), (4.0, 10, 4), (2.0, 10, 0)] {
        let model = xlindley::estimation::linear_model(n, m, psi).unwrap();
        let factory = StreamFactory::new(31, &format!("variance-check-{psi}-{n}-{m}"));
        let est: Vec<(f64, f64)> = (0..reps)
            .into_par_iter()
            .map(|i| {
                let p = xlindley::XlParams::standard(psi).unwrap();
                let s = xlindley::montecarlo::sample_censored(n, m, &p, &mut factory.stream(i)).unwrap();
                let e = model.estimates(s.values()).unwrap();
                (e.blue_location, e.blue_scale)
            })
            .collect();
        let nf = reps as f64;
        let (ml, ms) = est.iter().fold((0.0, 0.0), |a, e| (a.0 + e.0 / nf, a.1 + e.1 / nf));
        let (mut vl, mut vs, mut cv) = (0.0, 0.0, 0.0);
        for (l, s) in &est {
            vl += (l - ml) * (l - ml) / (nf - 1.0);
            vs += (s - ms) * (s - ms) / (nf - 1.0);
            cv += (l - ml) * (s - ms) / (nf - 1.0);
        }
        let c = model.coefficients();
        for (got, want) in [(vl, c.v1), (vs, c.v2), (cv, c.v3)] {
            worst_var = worst_var.max((got / want - 1.0).abs());
        }
    }

    // Pivotality: same substreams, different location and scale.
    let base = simulate_pivotal_draws(&PivotalConfig::new(1.0, 6, 1, 10_000, 5)).unwrap();
    let shifted = simulate_pivotal_draws(&PivotalConfig::new(1.0, 6, 1, 10_000, 5).with_location_scale(7.0, 3.0)).unwrap();
    let a = base.table(&DEFAULT_TAUS).unwrap();
    let b = shifted.table(&DEFAULT_TAUS).unwrap();
    let worst_pivot = a
        .entries()
        .zip(b.entries())
        .map(|(x, y)| ((x.value - y.value) / x.value.abs().max(1e-300)).abs())
        .fold(0.0, f64::max);

    // Determinism across worker counts.
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let t = simulate_pivotal_draws(&PivotalConfig::new(2.0, 10, 3, 5_000, 99)).unwrap().table(&DEFAULT_TAUS).unwrap();
            let mut buf = Vec::new();
            t.write_csv(&mut buf).unwrap();
            let study = run_simulation_study(&StudyConfig::new(2.0, 10, 3, 1000, 4), &t).unwrap();
            (buf, serde_json::to_vec(&study).unwrap())
        })
    };
    let deterministic = run(1) == run(4);

    let ok = worst_var <= 0.05 && worst_pivot <= 1e-9 && deterministic;
    verdict(
        "10 statistical correctness",
        ok,
        &format!(
            "max relative variance deviation {:.2}%, pivotality {worst_pivot:.1e}, bitwise deterministic: {deterministic}",
            100.0 * worst_var
        ),
    );
    assert!(ok);
}

#[test]
fn sampler_matches_first_order_statistic_mean() {
    let factory = StreamFactory::new(8, "first-order-statistic");
    let p = xlindley::XlParams::standard(1.0).unwrap();
    let reps = 100_000u64;
    let total: f64 = (0..reps)
        .map(|i| xlindley::montecarlo::sample_censored(10, 0, &p, &mut factory.stream(i)).unwrap().values()[0])
        .sum();
    let mean = total / reps as f64;
    assert!((mean - 0.13198).abs() < 0.004, "{mean}");
    assert!((distribution::raw_moment(1, 1.0).unwrap() - 1.25).abs() < 1e-12);
}
