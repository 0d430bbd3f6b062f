//! Encapsulate and decapsulate with the FO KEM over two toy schemes and count
//! how often decryption failure surfaces as a rejection.

use fo_lab::config::scheme_preset;
use fo_lab::kem::FoKem;
use fo_lab::oracle::{run_seed, stream};
use fo_lab::pke::PkeScheme;

fn main() -> fo_lab::Result<()> {
    for name in ["correct", "fail-1/16", "micro-lwe"] {
        let scheme = scheme_preset(name).unwrap();
        let kem = FoKem::new(scheme);
        let (mut ok, mut rejected, mut mismatched) = (0, 0, 0);
        for i in 0..2000 {
            let seed = run_seed(1, i);
            let keys = kem.keygen(&mut stream(seed, "example/keys"));
            let mut oracles = kem.oracles(seed);
            let enc = kem.encaps(&mut oracles, &keys.keys.pk, &mut stream(seed, "example/encaps"))?;
            match kem.decaps(&mut oracles, &keys, &enc.ciphertext)? {
                Some(k) if k == enc.key => ok += 1,
                Some(_) => mismatched += 1,
                None => rejected += 1,
            }
        }
        println!("{:<12} {}: {ok} ok, {rejected} rejected, {mismatched} wrong key", name, kem.scheme().name());
    }
    Ok(())
}
