// spike: per-path e_out breakdown
use qdistill::adaptive::{build_pair, AdaptivePath, AdaptiveParams, AdaptiveWorkspace};
use qdistill::bp::broadcast_priors;
use qdistill::rng::sample_rng;
use qdistill::states::{BellDiagonalState, ChannelPrior};

fn main() {
    let mut rng = sample_rng(2024, 0, 0);
    let pair = build_pair(AdaptiveParams::paper_960(), &mut rng).unwrap();
    let mut ws = AdaptiveWorkspace::new(&pair);
    for e_in in [0.0025f64, 0.005, 0.015] {
        let state = BellDiagonalState::werner(e_in).unwrap();
        let priors = broadcast_priors(pair.graph1(), &ChannelPrior::from_state(&state)).unwrap();
        let h_th = state.entropy();
        let n_s = 20_000u64;
        let mut stats = [[0u64; 3]; 3]; // per path: count, kept, bad
        let mut h1_bad_events = 0u64;
        let mut h1_bad_weights = Vec::new();
        for i in 0..n_s {
            let mut r = sample_rng(7, 8, i);
            let e: Vec<(u32, u16)> = (0..960u32).filter_map(|q| {
                let sym = state.sample_error(&mut r);
                (sym != 0).then_some((q, sym))
            }).collect();
            let st = pair.distill_stats(&e, &priors, h_th, 5, &mut ws).unwrap();
            let pi = match st.path { AdaptivePath::H1Converged => 0, AdaptivePath::H2Converged => 1, AdaptivePath::Discard => 2 };
            stats[pi][0] += 1;
            stats[pi][1] += st.kept as u64;
            stats[pi][2] += st.bad as u64;
            if pi == 0 && st.bad > 0 {
                h1_bad_events += 1;
                if h1_bad_weights.len() < 12 { h1_bad_weights.push((e.len(), st.bad)); }
            }
        }
        println!("e_in={e_in}:");
        for (pi, name) in ["h1", "h2", "disc"].iter().enumerate() {
            let [cnt, kept, bad] = stats[pi];
            if cnt > 0 {
                println!("  {name}: {cnt} samples, e_out_path={:.3e}, kept/sample={:.1}",
                    bad as f64 / (kept.max(1)) as f64, kept as f64 / cnt as f64);
            }
        }
        println!("  h1 bad events: {h1_bad_events} (|e|, bad): {h1_bad_weights:?}");
    }
}
