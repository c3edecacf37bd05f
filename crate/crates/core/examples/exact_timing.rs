use std::time::Instant;
fn main() {
    let xs: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    for x in xs {
        let t = Instant::now();
        let s = sdflab::sets::max_sdf_exact(x).unwrap();
        println!("X={x} s={} nodes={} {:?}", s.size, s.nodes, t.elapsed());
    }
}
