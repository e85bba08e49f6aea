use std::sync::Arc;
use std::time::Instant;
use symchi_core::polys::{BlockSpec, SparsePoly};
use symchi_core::scalars::InfinitesimalTower;
use symchi_core::euler;

fn main() {
    let tw = InfinitesimalTower::rationals();
    let v: Arc<Vec<String>> = Arc::new(vec!["X1".into(), "X2".into()]);
    let p2 = SparsePoly::var(v.clone(), &tw, 0)
        .pow(2)
        .add(&SparsePoly::var(v.clone(), &tw, 1).pow(2));
    let one = SparsePoly::from_int(v.clone(), &tw, 1);
    let b = BlockSpec::new(vec![2]).unwrap();
    let p1 = SparsePoly::var(v.clone(), &tw, 0).add(&SparsePoly::var(v.clone(), &tw, 1));
    let p = one.add(&p1.pow(2));
    let t0 = Instant::now();
    let r = euler::ep_query(&p, &p2, &b).unwrap();
    eprintln!("ep_query done {:?} -> {:?}", t0.elapsed(), r);
}
