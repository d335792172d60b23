// scratch diagnostics for BCD convergence tails and FF travel bound margins
use swarm_mimo::centralized::{bcd_solve, travel_bound_centralized};
use swarm_mimo::channel::DisturbanceConfig;
use swarm_mimo::force_field::{kp_guarantee_bound, run_force_field, travel_bound_ff, FfConfig};
use swarm_mimo::harness::{build_scenario, Method, ScenarioConfig};
use swarm_mimo::metrics::LinkBudget;
use swarm_mimo::GroundArray;

fn main() {
    let gs = GroundArray::new(6, 2, 1.0, 3.0).unwrap();
    let budget = LinkBudget::from_db(10.0, -174.0, 1e6, 3.0).unwrap();
    let mut cfg = ScenarioConfig::default();
    cfg.method = Method::Centralized;
    cfg.est_training_symbols = 0;

    println!("== BCD non-converged seeds ==");
    for seed in 0..100u64 {
        let (init, _, env, _) = build_scenario(&cfg, seed).unwrap();
        let sol = bcd_solve(&init, &env, &gs, 1e-5, 5).unwrap();
        if !sol.converged {
            let objs: Vec<f64> = sol.history.iter().map(|h| h.objective).collect();
            let deltas: Vec<(f64, f64)> = sol.history.iter().map(|h| h.delta).collect();
            println!("seed {seed}: objs {objs:?}");
            println!("  deltas {deltas:?}");
            let diffs: Vec<f64> = objs.windows(2).map(|w| w[0] - w[1]).collect();
            println!("  diffs {diffs:?}");
        }
        let _ = travel_bound_centralized(1.0, &env);
    }

    println!("== FF travel overshoots (default box, path and displacement) ==");
    for seed in 0..100u64 {
        let (init, _, env, _) = build_scenario(&cfg, seed).unwrap();
        let (bx, _) = kp_guarantee_bound(&init, &env);
        let ff_cfg = FfConfig { k_p: 0.3 * bx, iterations: 100, stall_threshold: None };
        let traj =
            run_force_field(&init, &gs, &env, &ff_cfg, &DisturbanceConfig::default(), &budget)
                .unwrap();
        let eps_anchor = env.eps_of(init.position(traj.anchor).y);
        let disp = init.travel_to(traj.states.last().unwrap()).unwrap();
        for (uav, &t) in traj.cumulative_travel.last().unwrap().iter().enumerate() {
            let bound = travel_bound_ff(eps_anchor, env.eps_of(init.position(uav).y), &env);
            if t > bound || disp[uav] > bound {
                println!(
                    "seed {seed} uav {uav}: path {t:.2} disp {:.2} bound {bound:.2}",
                    disp[uav]
                );
            }
        }
    }

    println!("== FF travel vs bound, 10 m cube at three ranges ==");
    for roi in [1000.0, 2000.0, 4000.0] {
        let mut cube = cfg.clone();
        cube.box_x_m = 10.0;
        cube.box_y_m = 10.0;
        cube.box_z_m = 10.0;
        cube.roi_distance_m = roi;
        let mut worst_frac: f64 = 0.0;
        for seed in 0..100u64 {
            let (init, _, env, _) = build_scenario(&cube, seed).unwrap();
            let (bx, _) = kp_guarantee_bound(&init, &env);
            let ff_cfg = FfConfig { k_p: 0.3 * bx, iterations: 100, stall_threshold: None };
            let traj =
                run_force_field(&init, &gs, &env, &ff_cfg, &DisturbanceConfig::default(), &budget)
                    .unwrap();
            let eps_anchor = env.eps_of(init.position(traj.anchor).y);
            for (uav, &t) in traj.cumulative_travel.last().unwrap().iter().enumerate() {
                let bound = travel_bound_ff(eps_anchor, env.eps_of(init.position(uav).y), &env);
                worst_frac = worst_frac.max(t / bound);
            }
        }
        println!("R={roi}: worst path/bound = {worst_frac:.4}");
    }
}
