// appended debug test
#[test]
fn debug_kink_instance() {
    use slaterank::evaluator::{EvaluatorConfig, EvaluatorModel, evaluator_loss};
    use slaterank::data::{Slate};
    use slaterank::rng;
    use rand::Rng;
    let schema = {
        use slaterank::data::{FeatureSchema, FeatureDescriptor};
        FeatureSchema::new(
            vec![FeatureDescriptor::categorical("segment", 3, 2)],
            vec![
                FeatureDescriptor::categorical("category", 4, 2),
                FeatureDescriptor::numeric("quality", vec![-0.5, 0.5], 2),
            ],
        ).unwrap()
    };
    let inst = 0u64;
    let mut r = rng::indexed_stream(100, "acc1.eval", inst);
    let cfg = EvaluatorConfig { l: 2, point_hidden: vec![6, 4], head_hidden: vec![6], ..EvaluatorConfig::default() };
    let mut model = EvaluatorModel::new(&schema, &cfg, 1000 + inst).unwrap();
    let set = {
        use slaterank::data::{CandidateSet, Item};
        CandidateSet {
            items: (0..5).map(|i| Item {
                item_id: i as u64 + 1,
                categorical: vec![r.gen_range(0..4)],
                numeric: vec![r.gen_range(-1.0..1.0)],
                pctr: r.gen_range(0.02..0.98),
            }).collect(),
            user_categorical: vec![r.gen_range(0..3)],
            user_numeric: vec![],
        }
    };
    let positions = {
        let mut pool: Vec<usize> = (0..5).collect();
        for i in 0..2 { let j = r.gen_range(i..pool.len()); pool.swap(i, j); }
        pool.truncate(2); pool
    };
    let exposure: Vec<bool> = (0..2).map(|_| r.gen_bool(0.8)).collect();
    let click: Vec<bool> = exposure.iter().map(|e| *e && r.gen_bool(0.5)).collect();
    let slate = Slate::labeled(positions, exposure, click).unwrap();
    let (_, grads) = model.loss_grads(&set, &slate).unwrap();
    let blocks: Vec<(String, Vec<f64>)> = grads.blocks().into_iter().map(|(n, v)| (n, v.to_vec())).collect();
    let target = "head.0.b";
    let avec = &blocks.iter().find(|(n, _)| n == target).unwrap().1;
    println!("analytic {target}: {:?}", avec);
    for i in 0..avec.len() {
        for h in [1e-4f64, 1e-6] {
            let mut probe = |delta: f64, model: &mut EvaluatorModel| {
                let mut b = model.param_blocks_mut();
                b.iter_mut().find(|(n, _)| n == target).unwrap().1[i] += delta;
            };
            probe(h, &mut model);
            let up = { let p = model.predict_list_ctr(&set, &slate).unwrap(); evaluator_loss(&p.per_item_ctr, &slate.exposure, &slate.click).unwrap() };
            probe(-2.0*h, &mut model);
            let down = { let p = model.predict_list_ctr(&set, &slate).unwrap(); evaluator_loss(&p.per_item_ctr, &slate.exposure, &slate.click).unwrap() };
            probe(h, &mut model);
            println!("  b[{i}] h={h:e}: numeric {}", (up - down) / (2.0*h));
        }
    }
}
