use std::time::Instant;

use nova_sim::analysis::{
    cumulative_cost_curve, finite_difference_curve, fit_power_law, occupancy_experiment, FitWindow,
};
use nova_sim::engine::{
    run_experiment, GeneratorDistribution, InvalidShape, Q0Params, RetrainPolicy, RunParams,
};
use nova_sim::knowledge::build_zipf_space;
use nova_sim::verifier::VerifierSpec;

fn main() {
    let t0 = Instant::now();
    for alpha in [2.0, 1.5] {
        let start = Instant::now();
        let curve = occupancy_experiment(
            alpha,
            1_000_000,
            &[1_000, 10_000, 100_000, 1_000_000],
            50,
            42,
            FitWindow::default(),
        )
        .unwrap();
        println!(
            "occupancy alpha={alpha}: exponent={:.4} r2={:.5} points={:?} ({:.1?})",
            curve.fit.exponent,
            curve.fit.r_squared,
            curve.points,
            start.elapsed()
        );
    }

    // Cumulative cost probe.
    let start = Instant::now();
    let space = build_zipf_space(10_000, 0, 2.0).unwrap();
    let q0 = GeneratorDistribution::build_q0(
        &space,
        &Q0Params {
            u0: 0.0,
            s0: 1.0,
            invalid_shape: InvalidShape::Zipf,
        },
    )
    .unwrap();
    let verifier = VerifierSpec::default();
    let params = RunParams {
        n: 4000,
        t_max: 1200,
        stop_on_coverage: false,
        c_gen: 1.0,
        policy: RetrainPolicy::TailReweight {
            w_min: 0.5,
            w_max: 2.0,
        },
    };
    let mut pooled = Vec::new();
    let mut pooled_marginal = Vec::new();
    let mut d_final = Vec::new();
    for rep in 0..5u64 {
        let records = run_experiment(&space, &q0, &verifier, None, &params, 7, rep).unwrap();
        let curve = cumulative_cost_curve(&records, 1.0, 1.0, None).unwrap();
        d_final.push(records.last().unwrap().g);
        let d_max = curve.points.last().unwrap().0;
        let window = nova_sim::analysis::default_cumcost_window(d_max);
        pooled.extend(window.clip(&curve.points));

        // log-spaced subsample for marginals
        let mut markers = Vec::new();
        let mut next = 10.0f64;
        for p in &curve.points {
            if p.0 >= next {
                markers.push(*p);
                next *= 1.25;
            }
        }
        let fd = finite_difference_curve(&markers);
        pooled_marginal.extend(window.clip(&fd));
        if rep == 0 {
            let fit = curve.fit;
            println!(
                "cumcost rep0: D={} exponent={:.4} r2={:.5}",
                d_final[0], fit.exponent, fit.r_squared
            );
        }
    }
    let fit = fit_power_law(&pooled).unwrap();
    let mfit = fit_power_law(&pooled_marginal).unwrap();
    println!(
        "cumcost pooled: D_final={:?} exponent={:.4} r2={:.5} marginal_exp={:.4} ({:.1?})",
        d_final,
        fit.exponent,
        fit.r_squared,
        mfit.exponent,
        start.elapsed()
    );
    println!("total {:.1?}", t0.elapsed());
}
