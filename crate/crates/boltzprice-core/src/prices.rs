//! Top-of-book quantities and the maximum-entropy (Boltzmann) price family.
//!
//! Given best quotes `(P^b, P^a)` with sizes `(Q^b, Q^a)`, the bid imbalance is
//! `q = Q^b / (Q^b + Q^a)` and the centered imbalance `theta = q - 1/2`.
//! Maximizing Shannon entropy subject to normalization and a mean-imbalance
//! constraint assigns the bid/ask states the probabilities
//!
//! ```text
//! p_b = e^{-beta q^b} / Z,   p_a = e^{-beta q^a} / Z,   Z = e^{-beta q^b} + e^{-beta q^a}
//! ```
//!
//! and the Boltzmann price is the expectation of `{P^b, P^a}` under that
//! distribution. It satisfies the closed form
//!
//! ```text
//! P_boltzmann(beta) = P_mid + (S / 2) * tanh(beta * theta)
//! ```
//!
//! which the property tests check against the defining softmax expression.
//! All operations here are pure and stateless; they are safe to call from any
//! number of threads concurrently.

use crate::error::{Error, Result};
use crate::math;
use alloc::format;

/// Best bid/ask price and displayed size snapshot.
///
/// Construction rejects locked or crossed books (`bid >= ask`) and
/// non-positive sizes, mirroring the usual raw-quote filters, so every value
/// of this type has a strictly positive spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopOfBook {
    bid_price: f64,
    ask_price: f64,
    bid_size: f64,
    ask_size: f64,
}

impl TopOfBook {
    pub fn new(bid_price: f64, ask_price: f64, bid_size: f64, ask_size: f64) -> Result<Self> {
        if !(bid_price.is_finite() && ask_price.is_finite() && bid_price > 0.0) {
            return Err(Error::InvalidInput(format!(
                "prices must be finite and positive, got bid={bid_price}, ask={ask_price}"
            )));
        }
        if bid_price >= ask_price {
            return Err(Error::InvalidInput(format!(
                "book is locked or crossed: bid={bid_price} >= ask={ask_price}"
            )));
        }
        if !(bid_size.is_finite() && ask_size.is_finite() && bid_size > 0.0 && ask_size > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sizes must be finite and strictly positive, got bid={bid_size}, ask={ask_size}"
            )));
        }
        Ok(Self {
            bid_price,
            ask_price,
            bid_size,
            ask_size,
        })
    }

    pub fn bid_price(&self) -> f64 {
        self.bid_price
    }

    pub fn ask_price(&self) -> f64 {
        self.ask_price
    }

    pub fn bid_size(&self) -> f64 {
        self.bid_size
    }

    pub fn ask_size(&self) -> f64 {
        self.ask_size
    }

    /// Quoted spread `S = P^a - P^b`; strictly positive by construction.
    pub fn spread(&self) -> f64 {
        self.ask_price - self.bid_price
    }

    /// Mid-price `(P^b + P^a) / 2`.
    pub fn mid_price(&self) -> f64 {
        0.5 * (self.bid_price + self.ask_price)
    }

    /// Size-weighted mid-price `q^b P^a + q^a P^b`.
    ///
    /// Leans toward the ask when the bid side is heavier, and vice versa.
    pub fn weighted_mid_price(&self) -> f64 {
        let imb = self.imbalance();
        imb.q_bid() * self.ask_price + imb.q_ask() * self.bid_price
    }

    /// Volume imbalance of this book.
    pub fn imbalance(&self) -> Imbalance {
        // Sizes are validated strictly positive at construction.
        Imbalance::from_sizes(self.bid_size, self.ask_size)
            .expect("validated sizes always yield an imbalance")
    }

    /// Boltzmann price `softmax(-beta q^b, -beta q^a) . (P^b, P^a)`.
    ///
    /// Computed through the logistic form of the state probabilities, which
    /// stays finite for beta well beyond 1e3. Equals
    /// `mid + (S/2) tanh(beta theta)` exactly (up to rounding) and always lies
    /// in `[P^b, P^a]`.
    pub fn boltzmann_price(&self, beta: f64) -> Result<f64> {
        let probs = state_probabilities(&self.imbalance(), beta)?;
        Ok(probs.p_bid() * self.bid_price + probs.p_ask() * self.ask_price)
    }

    /// Equilibrium price, the `beta = 1` member of the family.
    pub fn equilibrium_price(&self) -> f64 {
        self.boltzmann_price(1.0)
            .expect("beta = 1 is always a valid parameter")
    }

    /// Quasi-equilibrium price `(P_mid + P_w) / 2`.
    ///
    /// Second-order approximation of the equilibrium price; the two differ by
    /// at most `(S/2) |theta|^3 / 3`.
    pub fn quasi_equilibrium_price(&self) -> f64 {
        0.5 * (self.mid_price() + self.weighted_mid_price())
    }

    /// Price-decomposition approximation `P_mid + (beta S / 2) theta`.
    ///
    /// Algebraically identical to `(1 - beta/2) P_mid + (beta/2) P_w`; both
    /// forms are evaluated and checked against each other in debug builds.
    /// At `beta = 2` this is the weighted mid, at `beta = 0` the mid.
    pub fn decomposition_approx(&self, beta: f64) -> f64 {
        let theta = self.imbalance().theta();
        let additive = self.mid_price() + 0.5 * beta * self.spread() * theta;
        let mixed =
            (1.0 - 0.5 * beta) * self.mid_price() + 0.5 * beta * self.weighted_mid_price();
        debug_assert!(
            (additive - mixed).abs() <= 1e-12 * additive.abs().max(1.0),
            "decomposition forms diverged: {additive} vs {mixed}"
        );
        additive
    }

    /// Generalized Boltzmann price: the Boltzmann price with effective
    /// parameter `beta / S`.
    ///
    /// Here `beta` carries price units so that `beta / S` is dimensionless;
    /// with `S = 1` price unit this coincides with [`Self::boltzmann_price`].
    /// As the spread grows the effective parameter vanishes and the price
    /// approaches `mid + beta * theta / 2`.
    pub fn generalized_boltzmann_price(&self, beta: f64) -> Result<f64> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "beta must be finite and >= 0, got {beta}"
            )));
        }
        self.boltzmann_price(beta / self.spread())
    }
}

/// Bid/ask volume imbalance.
///
/// Invariants: `q_bid + q_ask = 1` exactly, `theta = q_bid - 1/2`, and the
/// book imbalance is `2 * theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Imbalance {
    q_bid: f64,
    q_ask: f64,
    theta: f64,
}

impl Imbalance {
    /// Builds an imbalance from a bid fraction `q` in `[0, 1]`.
    pub fn from_q_bid(q_bid: f64) -> Result<Self> {
        if !(q_bid.is_finite() && (0.0..=1.0).contains(&q_bid)) {
            return Err(Error::InvalidInput(format!(
                "bid imbalance must lie in [0, 1], got {q_bid}"
            )));
        }
        Ok(Self {
            q_bid,
            q_ask: 1.0 - q_bid,
            theta: q_bid - 0.5,
        })
    }

    /// Builds an imbalance from raw sizes `Q^b, Q^a >= 0`.
    pub fn from_sizes(bid_size: f64, ask_size: f64) -> Result<Self> {
        if !(bid_size.is_finite() && ask_size.is_finite() && bid_size >= 0.0 && ask_size >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "sizes must be finite and non-negative, got bid={bid_size}, ask={ask_size}"
            )));
        }
        let total = bid_size + ask_size;
        if total <= 0.0 {
            return Err(Error::InvalidInput(
                "total size is zero; imbalance undefined".into(),
            ));
        }
        Self::from_q_bid(bid_size / total)
    }

    pub fn q_bid(&self) -> f64 {
        self.q_bid
    }

    pub fn q_ask(&self) -> f64 {
        self.q_ask
    }

    /// Centered imbalance `theta = q_bid - 1/2`, in `[-1/2, 1/2]`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Book imbalance `I = 2 theta = (Q^b - Q^a) / (Q^b + Q^a)`.
    pub fn book_imbalance(&self) -> f64 {
        2.0 * self.theta
    }
}

/// Maximum-entropy state probabilities for a given imbalance and beta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateProbabilities {
    p_bid: f64,
    p_ask: f64,
    beta: f64,
}

impl StateProbabilities {
    pub fn p_bid(&self) -> f64 {
        self.p_bid
    }

    pub fn p_ask(&self) -> f64 {
        self.p_ask
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Boltzmann state probabilities `p_b = e^{-beta q^b} / Z`, `p_a = e^{-beta q^a} / Z`.
///
/// Evaluated as `p_b = logistic(-2 beta theta)`, `p_a = logistic(2 beta theta)`,
/// which never forms the raw exponentials and so stays exact for beta far past
/// 1e3. At `beta = 0` or balanced books both probabilities are 1/2.
pub fn state_probabilities(imbalance: &Imbalance, beta: f64) -> Result<StateProbabilities> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    let two_beta_theta = 2.0 * beta * imbalance.theta();
    Ok(StateProbabilities {
        p_bid: math::logistic(-two_beta_theta),
        p_ask: math::logistic(two_beta_theta),
        beta,
    })
}

/// Shannon entropy `-sum p_i ln p_i` in nats, with the `0 ln 0 = 0` convention.
///
/// The probabilities must be non-negative and sum to 1 within 1e-8.
pub fn shannon_entropy(probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::InvalidInput("empty probability vector".into()));
    }
    let mut total = 0.0;
    for &p in probs {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "probabilities must be finite and >= 0, got {p}"
            )));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "probabilities must sum to 1, got {total}"
        )));
    }
    Ok(probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * math::ln(p))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastics::RngSpec;
    use rand::Rng;

    fn book(bid: f64, ask: f64, q_bid: f64) -> TopOfBook {
        // Any total works; 1e4 keeps q representable to ~1e-16.
        let total = 1e4;
        TopOfBook::new(bid, ask, q_bid * total, (1.0 - q_bid) * total).unwrap()
    }

    #[test]
    fn rejects_invalid_books() {
        assert!(TopOfBook::new(10.0, 10.0, 1.0, 1.0).is_err());
        assert!(TopOfBook::new(10.02, 10.0, 1.0, 1.0).is_err());
        assert!(TopOfBook::new(10.0, 10.02, 0.0, 1.0).is_err());
        assert!(TopOfBook::new(10.0, 10.02, 1.0, -1.0).is_err());
        assert!(TopOfBook::new(f64::NAN, 10.02, 1.0, 1.0).is_err());
    }

    #[test]
    fn imbalance_from_sizes() {
        let balanced = Imbalance::from_sizes(200.0, 200.0).unwrap();
        assert_eq!(balanced.q_bid(), 0.5);
        assert_eq!(balanced.theta(), 0.0);

        let tilted = Imbalance::from_sizes(200.0, 150.0).unwrap();
        assert!((tilted.q_bid() - 0.571429).abs() < 1e-6);
        assert!((tilted.theta() - 0.071429).abs() < 1e-6);

        let heavy = Imbalance::from_sizes(300.0, 100.0).unwrap();
        assert!((heavy.book_imbalance() - 0.5).abs() < 1e-15);

        assert!(Imbalance::from_sizes(0.0, 0.0).is_err());
    }

    #[test]
    fn imbalance_sides_sum_to_one() {
        let mut rng = RngSpec::new(11, 0).rng();
        for _ in 0..1000 {
            let q: f64 = rng.gen();
            let imb = Imbalance::from_q_bid(q).unwrap();
            assert_eq!(imb.q_bid() + imb.q_ask(), 1.0);
        }
    }

    #[test]
    fn mid_price_examples() {
        assert!((book(10.0, 10.02, 0.5).mid_price() - 10.01).abs() < 1e-12);
        assert!((book(100.0, 100.10, 0.5).mid_price() - 100.05).abs() < 1e-12);
        assert!((book(2.56, 2.57, 0.5).mid_price() - 2.565).abs() < 1e-12);
    }

    #[test]
    fn weighted_mid_examples() {
        let b = book(10.0, 10.02, 0.5);
        assert!((b.weighted_mid_price() - b.mid_price()).abs() < 1e-12);

        let tilted = TopOfBook::new(10.0, 10.02, 200.0, 150.0).unwrap();
        assert!((tilted.weighted_mid_price() - 10.011429).abs() < 1e-6);

        // Heavy bid side pushes the weighted mid toward the ask.
        let heavy = TopOfBook::new(10.0, 10.02, 1e9, 1.0).unwrap();
        assert!((heavy.weighted_mid_price() - 10.02).abs() < 1e-7);
    }

    #[test]
    fn state_probability_examples() {
        let balanced = Imbalance::from_q_bid(0.5).unwrap();
        for beta in [0.0, 1.0, 50.0] {
            let p = state_probabilities(&balanced, beta).unwrap();
            assert_eq!(p.p_bid(), 0.5);
            assert_eq!(p.p_ask(), 0.5);
        }

        let any = Imbalance::from_q_bid(0.83).unwrap();
        let p = state_probabilities(&any, 0.0).unwrap();
        assert_eq!(p.p_bid(), 0.5);

        let extreme = Imbalance::from_q_bid(1.0).unwrap();
        let p = state_probabilities(&extreme, 3.0f64.ln()).unwrap();
        assert!((p.p_bid() - 0.25).abs() < 1e-15);
        assert!((p.p_ask() - 0.75).abs() < 1e-15);

        assert!(state_probabilities(&any, -0.1).is_err());
    }

    #[test]
    fn state_probabilities_normalize_for_large_beta() {
        let mut rng = RngSpec::new(12, 0).rng();
        for _ in 0..1000 {
            let q: f64 = rng.gen();
            let beta = rng.gen::<f64>() * 1e3;
            let imb = Imbalance::from_q_bid(q).unwrap();
            let p = state_probabilities(&imb, beta).unwrap();
            assert!((p.p_bid() + p.p_ask() - 1.0).abs() <= 1e-15);
            assert!(p.p_bid() >= 0.0 && p.p_ask() >= 0.0);
        }
    }

    #[test]
    fn entropy_examples() {
        assert!((shannon_entropy(&[0.5, 0.5]).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.25, 0.75]).unwrap() - 0.562335).abs() < 1e-6);
        assert!(shannon_entropy(&[0.3, 0.3]).is_err());
        assert!(shannon_entropy(&[-0.5, 1.5]).is_err());
    }

    #[test]
    fn entropy_peaks_at_balance_and_decays_in_theta() {
        let beta = 2.0;
        let mut last = f64::INFINITY;
        for i in 0..=50 {
            let theta = 0.01 * i as f64;
            let imb = Imbalance::from_q_bid(0.5 + theta).unwrap();
            let p = state_probabilities(&imb, beta).unwrap();
            let h = shannon_entropy(&[p.p_bid(), p.p_ask()]).unwrap();
            assert!(h <= last + 1e-12, "entropy increased away from balance");
            last = h;
        }
    }

    #[test]
    fn boltzmann_price_examples() {
        let b = book(100.0, 100.10, 0.7);
        assert!((b.boltzmann_price(0.0).unwrap() - b.mid_price()).abs() < 1e-12);
        assert!((b.boltzmann_price(1.0).unwrap() - 100.059869).abs() < 5e-7);

        let balanced = book(100.0, 100.10, 0.5);
        for beta in [0.3, 1.0, 10.0] {
            assert!((balanced.boltzmann_price(beta).unwrap() - 100.05).abs() < 1e-12);
        }
        assert!(b.boltzmann_price(-1.0).is_err());
    }

    #[test]
    fn boltzmann_price_matches_softmax_definition() {
        // Independent oracle: the defining softmax expression, shifted by the
        // common factor e^{-beta/2} for stability.
        let softmax_price = |b: &TopOfBook, beta: f64| {
            let theta = b.imbalance().theta();
            let wb = math::exp(-beta * theta);
            let wa = math::exp(beta * theta);
            (wb * b.bid_price() + wa * b.ask_price()) / (wb + wa)
        };
        let mut rng = RngSpec::new(13, 0).rng();
        for _ in 0..2000 {
            let bid = 1.0 + 200.0 * rng.gen::<f64>();
            let spread = 0.01 + rng.gen::<f64>();
            let q = rng.gen::<f64>();
            let beta = 100.0 * rng.gen::<f64>();
            let b = book(bid, bid + spread, q);
            let got = b.boltzmann_price(beta).unwrap();
            let want = softmax_price(&b, beta);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs(),
                "softmax mismatch: {got} vs {want}"
            );
        }
    }

    #[test]
    fn boltzmann_closed_form_identity() {
        let mut rng = RngSpec::new(14, 0).rng();
        for _ in 0..2000 {
            let bid = 0.5 + 100.0 * rng.gen::<f64>();
            let spread = 0.005 + 2.0 * rng.gen::<f64>();
            let q = rng.gen::<f64>();
            let beta = 100.0 * rng.gen::<f64>();
            let b = book(bid, bid + spread, q);
            let closed = b.mid_price()
                + 0.5 * b.spread() * math::tanh(beta * b.imbalance().theta());
            let got = b.boltzmann_price(beta).unwrap();
            assert!((got - closed).abs() <= 1e-12 * closed.abs());
        }
    }

    #[test]
    fn boltzmann_price_bounded_and_monotone() {
        let beta = 3.0;
        let b0 = book(10.0, 10.04, 0.01);
        assert!(b0.boltzmann_price(beta).unwrap() >= b0.bid_price() - 1e-12);
        let mut last = f64::NEG_INFINITY;
        for i in 1..100 {
            let q = i as f64 / 100.0;
            let b = book(10.0, 10.04, q);
            let p = b.boltzmann_price(beta).unwrap();
            assert!(p > last, "price must increase with q for beta > 0");
            assert!(p >= b.bid_price() - 1e-12 && p <= b.ask_price() + 1e-12);
            last = p;
        }
    }

    #[test]
    fn boltzmann_price_reflection_symmetry() {
        let mut rng = RngSpec::new(15, 0).rng();
        for _ in 0..1000 {
            let bid = 1.0 + 50.0 * rng.gen::<f64>();
            let spread = 0.01 + 0.5 * rng.gen::<f64>();
            let q = rng.gen::<f64>();
            let beta = 40.0 * rng.gen::<f64>();
            let b = book(bid, bid + spread, q);
            let mirrored = book(bid, bid + spread, 1.0 - q);
            let sum = b.boltzmann_price(beta).unwrap() + mirrored.boltzmann_price(beta).unwrap();
            assert!((sum - 2.0 * b.mid_price()).abs() <= 1e-12 * b.mid_price());
        }
    }

    #[test]
    fn equilibrium_price_examples() {
        let balanced = book(100.0, 100.10, 0.5);
        assert!((balanced.equilibrium_price() - 100.05).abs() < 1e-12);

        let b = book(100.0, 100.10, 0.7);
        assert!((b.equilibrium_price() - 100.059869).abs() < 5e-7);

        // Taylor bound against the quasi-equilibrium price at beta = 1.
        let theta = b.imbalance().theta();
        let bound = 0.5 * b.spread() * theta.abs().powi(3) / 3.0;
        assert!((b.equilibrium_price() - b.quasi_equilibrium_price()).abs() <= bound + 1e-15);
    }

    #[test]
    fn quasi_equilibrium_examples() {
        let balanced = book(10.0, 10.02, 0.5);
        assert!((balanced.quasi_equilibrium_price() - 10.01).abs() < 1e-12);

        let tilted = TopOfBook::new(10.0, 10.02, 200.0, 150.0).unwrap();
        assert!((tilted.quasi_equilibrium_price() - 10.010714).abs() < 1e-6);
        assert!(
            (tilted.quasi_equilibrium_price() - tilted.decomposition_approx(1.0)).abs() < 1e-12
        );
    }

    #[test]
    fn decomposition_examples() {
        let b = book(100.0, 100.10, 0.7);
        assert!((b.decomposition_approx(2.0) - b.weighted_mid_price()).abs() < 1e-12);
        assert!((b.decomposition_approx(0.0) - b.mid_price()).abs() < 1e-12);
        assert!((b.decomposition_approx(1.0) - 100.06).abs() < 1e-9);
        let err = (b.decomposition_approx(1.0) - b.boltzmann_price(1.0).unwrap()).abs();
        assert!((err - 1.3123e-4).abs() < 1e-7);
    }

    #[test]
    fn decomposition_identity_is_exact() {
        let mut rng = RngSpec::new(16, 0).rng();
        for _ in 0..2000 {
            let bid = 1.0 + 100.0 * rng.gen::<f64>();
            let spread = 0.01 + rng.gen::<f64>();
            let q = rng.gen::<f64>();
            let beta = 10.0 * rng.gen::<f64>();
            let b = book(bid, bid + spread, q);
            let additive = b.mid_price() + 0.5 * beta * b.spread() * b.imbalance().theta();
            let mixed =
                (1.0 - 0.5 * beta) * b.mid_price() + 0.5 * beta * b.weighted_mid_price();
            assert!((additive - mixed).abs() <= 1e-12 * additive.abs());
        }
    }

    #[test]
    fn taylor_bound_holds_on_grid() {
        for bi in 0..=40 {
            let beta = 0.25 * bi as f64;
            for ti in -50..=50 {
                // Books need strictly positive sizes, so q stays inside (0, 1).
                let q = (0.5 + ti as f64 / 100.0).clamp(1e-9, 1.0 - 1e-9);
                let b = book(100.0, 100.10, q);
                let theta = b.imbalance().theta();
                let exact = b.boltzmann_price(beta).unwrap();
                let approx = b.decomposition_approx(beta);
                let bound = 0.5 * b.spread() * (beta * theta).abs().powi(3) / 3.0;
                assert!(
                    (exact - approx).abs() <= bound + 1e-13,
                    "beta={beta} theta={theta}"
                );
            }
        }
    }

    #[test]
    fn generalized_price_examples() {
        // Unit spread: generalized price coincides with the plain family.
        let unit = TopOfBook::new(10.0, 11.0, 300.0, 100.0).unwrap();
        for beta in [0.0, 0.7, 2.0] {
            assert!(
                (unit.generalized_boltzmann_price(beta).unwrap()
                    - unit.boltzmann_price(beta).unwrap())
                .abs()
                    < 1e-12
            );
        }

        // beta / S substitution identity.
        let half = TopOfBook::new(10.0, 10.5, 300.0, 100.0).unwrap();
        assert!(
            (half.generalized_boltzmann_price(1.0).unwrap() - half.boltzmann_price(2.0).unwrap())
                .abs()
                < 1e-12
        );

        // Large spread: the adjustment collapses to its beta*theta/2 limit and
        // vanishes relative to the spread.
        let wide = TopOfBook::new(100.0, 100.0 + 1e6, 300.0, 100.0).unwrap();
        let theta = wide.imbalance().theta();
        let adj = wide.generalized_boltzmann_price(1.0).unwrap() - wide.mid_price();
        assert!((adj - 0.5 * theta).abs() < 1e-9);
        assert!(adj.abs() / wide.spread() < 1e-6);

        assert!(wide.generalized_boltzmann_price(-2.0).is_err());
    }
}
