//! The expected inverse of a determinant-sampled principal submatrix is a
//! multiple of `P_{m-1}`, with constant `1 / sigma_m`.

use polyprec::diagnostics::volume_sampling_expectation;
use polyprec::operators::random::{log_uniform_spectrum, random_spd_with_spectrum, rng_from_seed};

fn main() -> polyprec::Result<()> {
    let mut rng = rng_from_seed(17);
    let spectrum = log_uniform_spectrum(&mut rng, 7, 50.0);
    let b = random_spd_with_spectrum(&mut rng, &spectrum);
    for m in 1..=5 {
        let r = volume_sampling_expectation(&b, m)?;
        println!(
            "m = {m}: {:>3} subsets, c = {:.6e}, 1/sigma_m = {:.6e}, max rel deviation {:.2e}",
            r.subsets, r.constant, r.predicted_constant, r.max_relative_deviation
        );
    }
    Ok(())
}
