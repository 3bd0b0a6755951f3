//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (no libtest harness) so every line is printed. The
//! process exits non-zero when any criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{golden_max, random_spec, rng, total_mass, Family, FAMILIES};
use composite_severity::composite::{Composite, TailShape};
use composite_severity::diagnostics::{
    ks_normal, ks_p_value, quantile_residuals, selection_report,
};
use composite_severity::distributions::ContinuousDistribution;
use composite_severity::estimation::{central_gradient, fit, FitControls, FitResult};
use composite_severity::regression::{neg_log_likelihood, Dataset, DesignMatrix, ModelParams};
use composite_severity::simulation::{sample, CovariateGenerator, CovariateRecipe, SimulationPlan};

const AIC_TOL: f64 = 0.02;
const T_RATIO_TOL: f64 = 5e-3;
const BRANCH_GAP_TOL: f64 = 1e-10;
const MASS_TOL: f64 = 1e-6;
const MODE_TOL: f64 = 1e-6;
const WEIGHT_TOL: f64 = 1e-12;
const ROUND_TRIP_TOL: f64 = 1e-8;
const GRADIENT_TOL: f64 = 1e-4;
const KS_LEVEL: f64 = 0.01;

const SPECS_CONTINUITY: usize = 200;
const SPECS_MODE: usize = 100;
const SPECS_QUANTILE: usize = 50;
const REPLICATIONS: usize = 100;
const RECOVERY_N: usize = 5000;
const CALIBRATION_N: usize = 2000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, title: &str, started: Instant, outcome: &Outcome) {
    println!(
        "[{}] criterion {id:>2}: {title} ({:.1}s) {}",
        if outcome.pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64(),
        outcome.detail
    );
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Burr => "burr",
        Family::Stoppa => "stoppa",
        Family::GlogM => "glogm",
    }
}

fn aic_arithmetic() -> Outcome {
    let a = selection_report(31_273.95, 11, 7263).aic;
    let b = selection_report(31_681.67, 10, 7263).aic;
    Outcome {
        pass: (a - 62_569.90).abs() <= AIC_TOL && (b - 63_383.34).abs() <= AIC_TOL,
        detail: format!("aic = {a:.4}, {b:.4}"),
    }
}

/// (model, covariate, estimate, SE, published t-ratio)
const PUBLISHED: [(&str, &str, f64, f64, f64); 24] = [
    ("burr", "Intercept", -0.7839, 0.1265, -6.1969),
    ("burr", "CC:2", -1.2333, 0.0771, -15.9961),
    ("burr", "CC:3", -0.9538, 0.0732, -13.0301),
    ("burr", "CC:4", -0.4102, 0.0815, -5.0331),
    ("burr", "Policy:Middle", -1.5709, 0.0641, -24.5071),
    ("burr", "Policy:Expensive", -1.8162, 0.1974, -9.2006),
    ("burr", "VehicleAge", 0.0287, 0.0041, 7.0001),
    ("burr", "MTPLCost", -0.0303, 0.0008, -37.8571),
    ("stoppa", "Intercept", -6.4068, 0.9101, -7.0396),
    ("stoppa", "CC:2", 1.8395, 0.0855, 21.5146),
    ("stoppa", "CC:3", 1.3518, 0.0853, 15.8475),
    ("stoppa", "CC:4", 0.9369, 0.0922, 10.1616),
    ("stoppa", "Policy:Middle", 2.0928, 0.0619, 33.8093),
    ("stoppa", "Policy:Expensive", 2.8798, 0.2069, 13.9188),
    ("stoppa", "VehicleAge", -0.0597, 0.0045, -13.2666),
    ("stoppa", "MTPLCost", 0.0257, 0.0005, 51.4001),
    ("glogm", "Intercept", -0.3373, 0.1304, -2.5866),
    ("glogm", "CC:2", 1.9041, 0.0935, 20.3647),
    ("glogm", "CC:3", 1.5058, 0.0833, 18.0768),
    ("glogm", "CC:4", 0.9514, 0.0948, 10.0358),
    ("glogm", "Policy:Middle", 2.3234, 0.0796, 30.2132),
    ("glogm", "Policy:Expensive", 2.8867, 0.1981, 14.5719),
    ("glogm", "VehicleAge", -0.0449, 0.0047, -9.5531),
    ("glogm", "MTPLCost", 0.0233, 0.0004, 58.25),
];

fn t_ratio_reproduction() -> Outcome {
    let dof = 7263.0 - 8.0;
    let mut misses = Vec::new();
    for (model, name, est, se, published) in PUBLISHED {
        let (t, p) = composite_severity::diagnostics::t_ratio_test(est, se, dof).unwrap();
        if (t - published).abs() > T_RATIO_TOL || !(0.0..=1.0).contains(&p) {
            misses.push(format!(
                "{model}/{name}: {est}/{se} = {t:.4} vs {published}"
            ));
        }
    }
    Outcome {
        pass: misses.is_empty(),
        detail: format!(
            "{}/{} within {T_RATIO_TOL}{}{}",
            PUBLISHED.len() - misses.len(),
            PUBLISHED.len(),
            if misses.is_empty() { "" } else { "; off: " },
            misses.join("; ")
        ),
    }
}

fn continuity_and_normalization() -> Outcome {
    let mut worst_gap = 0.0f64;
    let mut worst_mass = 0.0f64;
    let mut bad = 0;
    for (k, family) in FAMILIES.into_iter().enumerate() {
        let mut r = rng(300 + k as u64);
        for _ in 0..SPECS_CONTINUITY {
            let spec = random_spec(family, &mut r);
            let model = Composite::new(&spec).unwrap();
            let y = model.threshold();
            let head = model.ln_head_branch(y).exp();
            let tail = model.ln_tail_branch(y).unwrap().exp();
            let gap = (head - tail).abs() / head.max(tail);
            let mass = (total_mass(&model) - 1.0).abs();
            worst_gap = worst_gap.max(gap);
            worst_mass = worst_mass.max(mass);
            if gap > BRANCH_GAP_TOL || mass > MASS_TOL {
                bad += 1;
            }
        }
    }
    Outcome {
        pass: bad == 0,
        detail: format!(
            "{} specs, worst branch gap {worst_gap:.2e}, worst |mass - 1| {worst_mass:.2e}",
            3 * SPECS_CONTINUITY
        ),
    }
}

fn mode_correctness() -> Outcome {
    let mut worst = 0.0f64;
    let mut bad = 0;
    for (k, family) in FAMILIES.into_iter().enumerate() {
        let mut r = rng(400 + k as u64);
        for _ in 0..SPECS_MODE {
            let spec = random_spec(family, &mut r);
            let model = Composite::new(&spec).unwrap();
            let tail = model.tail();
            let scale = if family == Family::Burr {
                1.0 / spec.beta
            } else {
                spec.beta
            };
            let mut lo = (1e-8 * scale).ln();
            if family == Family::Stoppa {
                lo = lo.max(spec.beta.ln());
            }
            let hi = (1e8 * scale).ln();
            let t = golden_max(
                |t| tail.ln_pdf(t.exp()).unwrap_or(f64::NEG_INFINITY),
                lo,
                hi,
                1e-12,
            );
            let rel = (t.exp() - model.threshold()).abs() / model.threshold();
            worst = worst.max(rel);
            if rel > MODE_TOL {
                bad += 1;
            }
        }
    }
    Outcome {
        pass: bad == 0,
        detail: format!("{} draws, worst relative error {worst:.2e}", 3 * SPECS_MODE),
    }
}

fn weight_and_round_trip() -> Outcome {
    let mut worst_weight = 0.0f64;
    let mut worst_trip = 0.0f64;
    for (k, family) in FAMILIES.into_iter().enumerate() {
        let mut r = rng(500 + k as u64);
        for _ in 0..SPECS_QUANTILE {
            let model = Composite::new(&random_spec(family, &mut r)).unwrap();
            let f = model.cdf(model.threshold()).unwrap();
            worst_weight = worst_weight.max((f - model.weight()).abs());
            for i in 1..1000 {
                let p = i as f64 / 1000.0;
                let q = model.quantile(p).unwrap();
                worst_trip = worst_trip.max((model.cdf(q).unwrap() - p).abs());
            }
        }
    }
    Outcome {
        pass: worst_weight <= WEIGHT_TOL && worst_trip <= ROUND_TRIP_TOL,
        detail: format!(
            "{} specs, worst |F(y_mo) - r| {worst_weight:.2e}, worst |F(Q(p)) - p| {worst_trip:.2e}",
            3 * SPECS_QUANTILE
        ),
    }
}

fn truth(family: Family) -> ModelParams {
    let (sigma, shape, gamma) = match family {
        Family::Burr => (
            1.0,
            TailShape::Burr {
                alpha: 2.0,
                delta: 1.5,
            },
            vec![-1.0, 0.5, -0.4],
        ),
        Family::Stoppa => (
            0.8,
            TailShape::Stoppa {
                alpha: 2.0,
                delta: 1.5,
            },
            vec![1.0, 0.5, -0.4],
        ),
        Family::GlogM => (1.0, TailShape::GlogM { alpha: 0.5 }, vec![1.0, 0.5, -0.4]),
    };
    ModelParams {
        sigma,
        shape,
        gamma,
    }
}

fn recipe() -> Vec<CovariateRecipe> {
    vec![
        CovariateRecipe {
            name: "group".into(),
            generator: CovariateGenerator::Categorical {
                levels: vec!["a".into(), "b".into()],
                probabilities: vec![0.5, 0.5],
            },
        },
        CovariateRecipe {
            name: "x".into(),
            generator: CovariateGenerator::Uniform {
                low: 0.0,
                high: 2.0,
            },
        },
    ]
}

struct Replicate {
    data: Dataset,
    design: DesignMatrix,
    fit: FitResult,
    nll_truth: f64,
}

struct Study {
    family: Family,
    truth: ModelParams,
    reps: Vec<Replicate>,
}

fn controls() -> FitControls {
    FitControls {
        n_starts: 1,
        ..FitControls::default()
    }
}

fn recovery_study(family: Family, seed_base: u64) -> Study {
    let truth = truth(family);
    let reps = (0..REPLICATIONS)
        .map(|rep| {
            let plan = SimulationPlan {
                params: truth.clone(),
                covariates: recipe(),
                n: RECOVERY_N,
                seed: seed_base + rep as u64,
            };
            let (data, design) = sample(&plan).unwrap();
            let fit = fit(&data, &design, truth.family(), None, &controls()).unwrap();
            let nll_truth = neg_log_likelihood(&truth, &data, &design).unwrap();
            Replicate {
                data,
                design,
                fit,
                nll_truth,
            }
        })
        .collect();
    Study {
        family,
        truth,
        reps,
    }
}

fn parameter_recovery(studies: &[Study]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in studies {
        let truth = s.truth.to_vec();
        let mut hits = vec![0usize; truth.len()];
        for r in &s.reps {
            let (Some(se), true) = (&r.fit.std_errors, r.fit.converged) else {
                continue;
            };
            for (j, (est, t)) in r.fit.params.to_vec().iter().zip(&truth).enumerate() {
                if (est - t).abs() <= 3.0 * se[j] {
                    hits[j] += 1;
                }
            }
        }
        let mean_fit = s.reps.iter().map(|r| r.fit.nll).sum::<f64>() / s.reps.len() as f64;
        let mean_truth = s.reps.iter().map(|r| r.nll_truth).sum::<f64>() / s.reps.len() as f64;
        let ok = hits.iter().all(|&h| h >= 93) && mean_fit <= mean_truth;
        pass &= ok;
        parts.push(format!(
            "{}: within 3 SE {:?}/{}, mean NLL {:.2} vs truth {:.2}",
            family_name(s.family),
            hits,
            s.reps.len(),
            mean_fit,
            mean_truth
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn first_order_optimality(studies: &[Study]) -> Outcome {
    let mut worst_scaled = 0.0f64;
    let mut converged = 0usize;
    let mut positive_definite = 0usize;
    let mut over = 0usize;
    for s in studies {
        for r in &s.reps {
            let family = s.truth.family();
            let objective = |v: &[f64]| {
                ModelParams::from_vec(family, v)
                    .and_then(|p| neg_log_likelihood(&p, &r.data, &r.design))
                    .unwrap_or(f64::NAN)
            };
            let g = central_gradient(&objective, &r.fit.params.to_vec());
            let norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scaled = norm / r.fit.nll.abs().max(1.0);
            worst_scaled = worst_scaled.max(if scaled.is_nan() {
                f64::INFINITY
            } else {
                scaled
            });
            if scaled.is_nan() || scaled > GRADIENT_TOL {
                over += 1;
            }
            if r.fit.converged {
                converged += 1;
                if r.fit.covariance.is_some() {
                    positive_definite += 1;
                }
            }
        }
    }
    let pd_share = positive_definite as f64 / converged.max(1) as f64;
    Outcome {
        pass: over == 0 && converged > 0 && pd_share >= 0.99,
        detail: format!(
            "worst scaled gradient {worst_scaled:.2e} ({over} over {GRADIENT_TOL}), \
             Hessian positive definite in {positive_definite}/{converged} converged fits"
        ),
    }
}

fn residual_calibration(studies: &[Study]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, s) in studies.iter().enumerate() {
        let mut passed = 0;
        for (rep, r) in s.reps.iter().enumerate() {
            let plan = SimulationPlan {
                params: r.fit.params.clone(),
                covariates: recipe(),
                n: CALIBRATION_N,
                seed: 90_000 + 1000 * k as u64 + rep as u64,
            };
            let (data, design) = sample(&plan).unwrap();
            let res = quantile_residuals(&r.fit.params, &data, &design).unwrap();
            let finite: Vec<f64> = res.k.iter().copied().filter(|v| v.is_finite()).collect();
            if ks_p_value(ks_normal(&finite), finite.len()) > KS_LEVEL {
                passed += 1;
            }
        }
        pass &= passed >= 95;
        parts.push(format!(
            "{}: {passed}/{}",
            family_name(s.family),
            s.reps.len()
        ));
    }
    Outcome {
        pass,
        detail: format!("KS p > {KS_LEVEL} in {}", parts.join(", ")),
    }
}

fn varying_vs_fixed(studies: &[Study]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in studies {
        let mut better = 0;
        for r in &s.reps {
            let fixed_design = DesignMatrix::intercept_only(r.data.n());
            let fixed = fit(&r.data, &fixed_design, s.truth.family(), None, &controls()).unwrap();
            if r.fit.nll < fixed.nll {
                better += 1;
            }
        }
        pass &= better >= 99;
        parts.push(format!(
            "{}: {better}/{}",
            family_name(s.family),
            s.reps.len()
        ));
    }
    Outcome {
        pass,
        detail: format!("varying threshold has lower NLL in {}", parts.join(", ")),
    }
}

const CONFIG: &str = r#"{
  "family": "glogm",
  "response": "y",
  "covariates": [
    { "name": "group", "kind": "categorical", "levels": ["a", "b"] },
    { "name": "x", "kind": "numeric" }
  ],
  "controls": { "n_starts": 3, "seed": 17 },
  "simulation": {
    "sigma": 1.0,
    "alpha": 0.5,
    "coefficients": [1.0, 0.5, -0.4],
    "generators": [
      { "name": "group", "kind": "categorical", "levels": ["a", "b"], "probabilities": [0.5, 0.5] },
      { "name": "x", "kind": "uniform", "low": 0.0, "high": 2.0 }
    ]
  }
}"#;

fn severity(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_severity"))
        .args(args)
        .status()
        .expect("binary runs")
        .code()
        .unwrap_or(-1)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    std::fs::write(p("config.json"), CONFIG).unwrap();
    let read = |name: &str| std::fs::read(Path::new(&p(name))).unwrap_or_default();

    let mut codes = Vec::new();
    for out in ["a.csv", "b.csv"] {
        codes.push(severity(&[
            "simulate",
            "--config",
            &p("config.json"),
            "--n",
            "3000",
            "--seed",
            "2024",
            "--out",
            &p(out),
        ]));
    }
    for out in ["fit_a", "fit_b"] {
        codes.push(severity(&[
            "fit",
            "--data",
            &p("a.csv"),
            "--config",
            &p("config.json"),
            "--out",
            &p(out),
        ]));
    }
    let csv_same = !read("a.csv").is_empty() && read("a.csv") == read("b.csv");
    let fit_same =
        !read("fit_a/fit.json").is_empty() && read("fit_a/fit.json") == read("fit_b/fit.json");
    Outcome {
        pass: codes.iter().all(|&c| c == 0) && csv_same && fit_same,
        detail: format!(
            "exit codes {codes:?}, simulation CSV identical: {csv_same}, fit.json identical: {fit_same}"
        ),
    }
}

fn main() {
    let mut failed = 0;
    let mut run = |id: usize, title: &str, f: &mut dyn FnMut() -> Outcome| {
        let started = Instant::now();
        let outcome = f();
        report(id, title, started, &outcome);
        if !outcome.pass {
            failed += 1;
        }
    };

    run(1, "AIC arithmetic", &mut aic_arithmetic);
    run(2, "t-ratio reproduction", &mut t_ratio_reproduction);
    run(
        3,
        "continuity and normalization",
        &mut continuity_and_normalization,
    );
    run(4, "mode correctness", &mut mode_correctness);
    run(
        5,
        "weight at threshold and quantile round trip",
        &mut weight_and_round_trip,
    );

    let started = Instant::now();
    let studies: Vec<Study> = FAMILIES
        .into_iter()
        .enumerate()
        .map(|(k, f)| recovery_study(f, 10_000 * (k as u64 + 1)))
        .collect();
    println!(
        "        recovery study: {} fits in {:.1}s",
        3 * REPLICATIONS,
        started.elapsed().as_secs_f64()
    );
    run(6, "parameter recovery", &mut || {
        parameter_recovery(&studies)
    });
    run(7, "optimizer first-order optimality", &mut || {
        first_order_optimality(&studies)
    });
    run(8, "residual calibration", &mut || {
        residual_calibration(&studies)
    });
    run(9, "varying vs fixed threshold", &mut || {
        varying_vs_fixed(&studies)
    });
    run(10, "determinism", &mut determinism);

    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
