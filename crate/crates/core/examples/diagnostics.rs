//! Lineage diffusivity, quadratic variation and averaging gaps for a
//! rescaled process.

use slfv::analysis::stats::slope_through_origin;
use slfv::analysis::{averaging_gap_mc, qv_coefficient, qv_estimate, qv_series, run_lineages};
use slfv::forward::{InitialField, ObservableSpec};
use slfv::scaling::{gamma_r, rescaled_plan};
use slfv::{stream_rng, EventModel, Point};

fn main() -> slfv::Result<()> {
    let u = 0.5;
    let plan = rescaled_plan(&EventModel::fixed(1, 1.0, u, 1.0)?, 1000, 4.0)?;

    let times: Vec<f64> = (1..=5).map(|i| i as f64 * 0.2).collect();
    let study = run_lineages(&plan, 1.0, &times, 2000, false, 1)?;
    let vars: Vec<f64> = study.msd().iter().map(|m| m.variance).collect();
    let (slope, se) = slope_through_origin(&times, &vars);
    let target = u * gamma_r(1, 1.0)? * (1.0 + plan.params.s_n);
    println!("lineage variance slope {slope:.4} ± {se:.4}, predicted {target:.4}");
    let (rate, rate_se) = study.branch_rate();
    println!("branch rate {rate:.4} ± {rate_se:.4}, predicted {:.4}", u * 2.0);

    let c = qv_coefficient(&plan, u)?;
    let series = qv_series(
        &plan,
        plan.cell_width(0.25),
        &InitialField::Constant { value: 0.5 },
        &ObservableSpec::gaussian(&[2.0], 0.3),
        0.5,
        500,
        &mut stream_rng(2, 0),
    )?;
    let q = qv_estimate(&series, c);
    println!("quadratic variation: realised {:.3e}, plug-in {:.3e}, ratio {:.3}", q.realized, q.plug_in, q.ratio);

    let rho = plan.space_factor();
    let radii = [rho, 2.0 * rho, 4.0 * rho];
    let gaps = averaging_gap_mc(
        &plan,
        plan.cell_width(rho / 4.0),
        &InitialField::HalfTorus,
        &Point::new(&[1.9]),
        &radii,
        0.1,
        100,
        3,
    )?;
    for (r, g) in radii.iter().zip(&gaps) {
        println!("averaging gap at r={r:.3}: {:.4} ± {:.4}", g.estimate, g.std_error);
    }
    Ok(())
}
