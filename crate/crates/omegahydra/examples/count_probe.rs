use omegahydra::chop::enumerate_terms;
use omegahydra::term::F0Registry;
use std::io::Write;

fn main() {
    let reg = F0Registry::empty();
    for n in 1..=8u64 {
        let t0 = std::time::Instant::now();
        let tm = enumerate_terms(n, &reg);
        println!("tm size<={n}: {} ({:?})", tm.len(), t0.elapsed());
        std::io::stdout().flush().unwrap();
    }
}
