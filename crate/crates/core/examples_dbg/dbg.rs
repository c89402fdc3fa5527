use locc_core::algebra::Algebra;
use locc_core::rand_gen::*;
use locc_core::convert::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    'outer: for n in 2..=6usize {
        let alg = Algebra::new(&[(n, 1.0/n as f64)]).unwrap();
        for trial in 0..5 {
            let psi = random_unit_vector(&mut rng, &alg);
            let phi = random_unit_vector(&mut rng, &alg);
            let decision = decide_convertible(&alg, &psi, &phi).unwrap();
            let synth = synthesize_protocol(&alg, &psi, &phi);
            if decision != synth.is_ok() {
                println!("n={n} trial={trial} decision={decision} synth_err={:?}", synth.err());
                break 'outer;
            }
            let (c_psi, c_phi) = random_majorising_pair(&mut rng, &alg, 2);
            assert!(decide_convertible(&alg, &c_psi, &c_phi).unwrap());
            match synthesize_protocol(&alg, &c_psi, &c_phi) {
                Ok(p) => { let r = verify_protocol(&p, &c_psi, &c_phi).unwrap(); if r > 1e-8 { println!("n={n} trial={trial} residual={r}"); } }
                Err(e) => { println!("n={n} trial={trial} constructed-pair synth error: {e}"); break 'outer; }
            }
        }
    }
    println!("done");
}
