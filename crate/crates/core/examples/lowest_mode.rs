//! Minimal tour: build the lowest vector eigenmode, apply the curl, sample
//! its constant squared norm, and print the exact spectrum.

use num_complex::Complex64;
use num_rational::BigRational;
use s3curl_core::group::HaarSampler;
use s3curl_core::half::HalfInt;
use s3curl_core::modes::{ModeExpansion, ModeIndex};
use s3curl_core::operators::{curl, spectrum_table};

fn main() -> Result<(), s3curl_core::Error> {
    // The lowest vector eigenmode on the radius-2 sphere.
    let idx = ModeIndex::new(
        HalfInt::ONE,  // spin 1
        HalfInt::ZERO, // L = 0
        HalfInt::ONE,  // J = 1
        HalfInt::ZERO, // N = 0
        HalfInt::ONE,  // M = 1
    )?;
    let mode = ModeExpansion::basis(idx, 2.0)?;

    // It is a curl eigenfield: curl(mode) = (+2/R)·mode = +1·mode at R = 2.
    let curled = curl(&mode)?;
    assert_eq!(curled.coeff(&idx), Complex64::new(1.0, 0.0));

    // Its squared norm is constant over the sphere.
    let q = HaarSampler::new(42).sample();
    println!("|u(q)|^2 = {}", mode.eval(&q).norm_sq());

    // Exact spectrum with rational energies.
    let radius = BigRational::from_integer(1.into());
    for row in spectrum_table(HalfInt::ONE, HalfInt::from_twice(4), &radius)? {
        println!("E = {}  degeneracy {}", row.energy, row.degeneracy);
    }
    Ok(())
}
