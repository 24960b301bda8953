use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{db_to_lin, RngStream};
use crate::constellation::{Constellation, Symbol4D};

/// Equiprobable symbols sent through the AWGN channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub indices: Vec<usize>,
    pub received: Vec<Symbol4D>,
}

/// Per-real-dimension noise standard deviation `sqrt(N0/2)` for symbol energy `es`.
/// `esn0_db = +inf` gives a noiseless channel.
pub fn noise_sigma(es: f64, esn0_db: f64) -> f64 {
    if esn0_db == f64::INFINITY {
        return 0.0;
    }
    let n0 = es / db_to_lin(esn0_db);
    (n0 / 2.0).sqrt()
}

/// Draws `n` uniform symbol indices and passes each with its noisy 4-D observation to `sink`.
pub(crate) fn transmit_with<R: Rng, F: FnMut(usize, [f64; 4])>(
    rng: &mut R,
    c: &Constellation,
    sigma: f64,
    n: usize,
    mut sink: F,
) {
    let pts = c.points();
    let m = pts.len();
    for _ in 0..n {
        let k = rng.random_range(0..m);
        let mut r = pts[k].coords();
        if sigma > 0.0 {
            for v in &mut r {
                let z: f64 = StandardNormal.sample(rng);
                *v += sigma * z;
            }
        }
        sink(k, r);
    }
}

/// Sends `n_symbols` uniformly drawn symbols of `c` through AWGN at `esn0_db`, where `Es` is
/// the constellation's average energy. Noise is split equally over the four real dimensions.
pub fn awgn_transmit(
    c: &Constellation,
    n_symbols: usize,
    esn0_db: f64,
    rng: &RngStream,
) -> Transmission {
    let sigma = noise_sigma(c.avg_energy(), esn0_db);
    let mut g = rng.rng();
    let mut indices = Vec::with_capacity(n_symbols);
    let mut received = Vec::with_capacity(n_symbols);
    transmit_with(&mut g, c, sigma, n_symbols, |k, r| {
        indices.push(k);
        received.push(Symbol4D::from_coords(r));
    });
    Transmission { indices, received }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{generate_classic_dual, ClassicKind};

    #[test]
    fn noiseless_channel_is_identity() {
        let c = generate_classic_dual(ClassicKind::Qam16);
        let t = awgn_transmit(&c, 500, f64::INFINITY, &RngStream::new(3, 0));
        for (k, r) in t.indices.iter().zip(&t.received) {
            assert_eq!(c.points()[*k], *r);
        }
    }

    #[test]
    fn sigma_matches_n0() {
        // Es/N0 = 10 dB, Es = 1  =>  N0 = 0.1, sigma^2 = 0.05.
        assert!((noise_sigma(1.0, 10.0).powi(2) - 0.05).abs() < 1e-15);
    }
}
