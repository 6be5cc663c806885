//! Simulate a short dataset, infer its leaders and score the result.
//!
//! Run with: cargo run --release -p leadership-core --example quickstart

use leadership_core::eval::DatasetEval;
use leadership_core::sim::{simulate, EventType, Model, SimConfig};
use leadership_core::{infer_auto, NetworkOptions};

fn main() -> leadership_core::Result<()> {
    let mut cfg = SimConfig::new(Model::Dm, EventType::MergeSplit, 42);
    cfg.t_star = 800;
    cfg.events = 1;
    let (data, truth) = simulate(&cfg)?;

    let (sweep, run) = infer_auto(&data, &[10, 20, 40, 80], &NetworkOptions::default())?;
    for c in &sweep.candidates {
        println!("omega {:>3}: median coordination {:.3}", c.omega, c.psi_hat);
    }
    println!("chosen omega {}", sweep.chosen);

    let ids = data.ids();
    for t in [100, 300, 500] {
        let step = run.timeline.step(t);
        let leaders: Vec<&str> = step.initiators().map(|v| ids[v].as_str()).collect();
        println!("t = {t}: initiators {leaders:?}");
    }
    for e in run.events.iter().take(5) {
        println!("{:?} at t = {}", e.kind, e.t);
    }

    let score = DatasetEval::new("DM-MS", &run.timeline, &truth)?;
    println!("F1 {:.3}, accuracy {:.3}", score.f1, score.accuracy);
    Ok(())
}
