//! Market-impact calculus on the Boltzmann price.
//!
//! The Boltzmann price responds to an imbalance change `dq` through
//! `dP = beta (S/2) / cosh^2(beta theta) dq`, which integrates in closed form
//! to `(S/2) (tanh(beta theta_1) - tanh(beta theta_0))`: a finite move of the
//! book changes the fundamental price by strictly less than half the spread.
//! The weighted mid reacts with the full `S dq` and therefore overstates the
//! impact of clearing one side of the book by more than a factor of two.
//!
//! The appendix quantities live here too: lagged impact functions measured
//! against the mid or the Boltzmann price, the `(S/2) theta` lagged delta
//! that links them, and the liquidity provider's mark-to-market P&L.
//! Everything operates on immutable trade tapes and is thread-safe.

use crate::error::{Error, Result};
use crate::math;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Per-trade record sequence: sign, mid, spread, and centered imbalance at
/// the trade, plus the constant trade volume.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeTape {
    signs: Vec<i8>,
    mids: Vec<f64>,
    spreads: Vec<f64>,
    thetas: Vec<f64>,
    volume: f64,
}

impl TradeTape {
    /// Builds a tape; all sequences must align, signs must be `+1`/`-1`, and
    /// the per-trade volume must be positive.
    pub fn new(
        signs: Vec<i8>,
        mids: Vec<f64>,
        spreads: Vec<f64>,
        thetas: Vec<f64>,
        volume: f64,
    ) -> Result<Self> {
        let n = signs.len();
        if mids.len() != n || spreads.len() != n || thetas.len() != n {
            return Err(Error::InvalidInput(format!(
                "tape sequences must align: signs={n}, mids={}, spreads={}, thetas={}",
                mids.len(),
                spreads.len(),
                thetas.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput(String::from(
                "trade signs must be +1 or -1",
            )));
        }
        if !(volume.is_finite() && volume > 0.0) {
            return Err(Error::InvalidInput(format!(
                "volume must be positive, got {volume}"
            )));
        }
        Ok(Self {
            signs,
            mids,
            spreads,
            thetas,
            volume,
        })
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn mids(&self) -> &[f64] {
        &self.mids
    }

    pub fn spreads(&self) -> &[f64] {
        &self.spreads
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    fn check_lag(&self, lag: usize) -> Result<()> {
        if lag == 0 {
            return Err(Error::InvalidInput(String::from("lag must be >= 1")));
        }
        if self.len() <= lag {
            return Err(Error::InvalidInput(format!(
                "tape too short for lag {lag}: {} trades",
                self.len()
            )));
        }
        Ok(())
    }

    /// Boltzmann price at index `n` via the closed form
    /// `mid + (S/2) tanh(beta theta)`.
    fn boltzmann(&self, n: usize, beta: f64) -> f64 {
        self.mids[n] + 0.5 * self.spreads[n] * math::tanh(beta * self.thetas[n])
    }

    /// First-order (tanh-linearized) Boltzmann price `mid + beta (S/2) theta`.
    fn boltzmann_linear(&self, n: usize, beta: f64) -> f64 {
        self.mids[n] + beta * 0.5 * self.spreads[n] * self.thetas[n]
    }
}

/// Sensitivity of the Boltzmann price to the centered imbalance:
/// `beta (S/2) / cosh^2(beta theta)`.
pub fn impact_derivative(spread: f64, beta: f64, theta: f64) -> f64 {
    let c = math::cosh(beta * theta);
    beta * (0.5 * spread) / (c * c)
}

/// Price change from a finite imbalance move `theta_0 -> theta_1`:
/// `(S/2) (tanh(beta theta_1) - tanh(beta theta_0))`.
///
/// Additive over consecutive moves and bounded by `S/2` in absolute value.
pub fn impact_delta(spread: f64, beta: f64, theta_0: f64, theta_1: f64) -> f64 {
    0.5 * spread * (math::tanh(beta * theta_1) - math::tanh(beta * theta_0))
}

/// Weighted-mid price change for the same move, `S (q_1 - q_0)`.
pub fn weighted_mid_impact_delta(spread: f64, q_0: f64, q_1: f64) -> f64 {
    spread * (q_1 - q_0)
}

/// Tabulated impact of moving the book from balance to each grid imbalance,
/// with the weighted-mid and mid reference lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactCurve {
    pub spread: f64,
    pub beta: f64,
    pub theta_grid: Vec<f64>,
    /// `impact_delta(0 -> theta)` per grid point.
    pub price_change: Vec<f64>,
    /// Weighted-mid line `S theta`.
    pub weighted_mid_change: Vec<f64>,
    /// Mid line (identically zero; the mid ignores the imbalance).
    pub mid_change: Vec<f64>,
}

pub fn impact_curve(spread: f64, beta: f64, grid: &[f64]) -> ImpactCurve {
    ImpactCurve {
        spread,
        beta,
        theta_grid: grid.to_vec(),
        price_change: grid
            .iter()
            .map(|&t| impact_delta(spread, beta, 0.0, t))
            .collect(),
        weighted_mid_change: grid.iter().map(|&t| spread * t).collect(),
        mid_change: grid.iter().map(|_| 0.0).collect(),
    }
}

/// Lagged impact function `R_l = mean_n[ eps_n (m_{n+l} - m_n) ]`.
pub fn lagged_impact_mid(tape: &TradeTape, lag: usize) -> Result<f64> {
    tape.check_lag(lag)?;
    let n = tape.len() - lag;
    let sum: f64 = (0..n)
        .map(|i| tape.signs[i] as f64 * (tape.mids[i + lag] - tape.mids[i]))
        .sum();
    Ok(sum / n as f64)
}

/// Lagged Boltzmann impact
/// `R_l^boltzmann = mean_n[ eps_n (P^boltzmann_{n+l} - P^boltzmann_n) ]`
/// with the exact tanh closed form.
pub fn lagged_impact_boltzmann(tape: &TradeTape, lag: usize, beta: f64) -> Result<f64> {
    tape.check_lag(lag)?;
    let n = tape.len() - lag;
    let sum: f64 = (0..n)
        .map(|i| tape.signs[i] as f64 * (tape.boltzmann(i + lag, beta) - tape.boltzmann(i, beta)))
        .sum();
    Ok(sum / n as f64)
}

/// Lagged Boltzmann impact with the first-order (tanh-linearized) benchmark.
///
/// Decomposes exactly as `R_l + beta * mean_n[ eps_n Delta_l(n) ]` with
/// `Delta_l` from [`lagged_delta_si`].
pub fn lagged_impact_boltzmann_linearized(
    tape: &TradeTape,
    lag: usize,
    beta: f64,
) -> Result<f64> {
    tape.check_lag(lag)?;
    let n = tape.len() - lag;
    let sum: f64 = (0..n)
        .map(|i| {
            tape.signs[i] as f64
                * (tape.boltzmann_linear(i + lag, beta) - tape.boltzmann_linear(i, beta))
        })
        .sum();
    Ok(sum / n as f64)
}

/// Per-index lagged delta
/// `Delta_l(n) = (S_{n+l}/2) theta_{n+l} - (S_n/2) theta_n`.
pub fn lagged_delta_si(tape: &TradeTape, lag: usize) -> Result<Vec<f64>> {
    tape.check_lag(lag)?;
    let n = tape.len() - lag;
    Ok((0..n)
        .map(|i| {
            0.5 * tape.spreads[i + lag] * tape.thetas[i + lag] - 0.5 * tape.spreads[i] * tape.thetas[i]
        })
        .collect())
}

/// Mark-to-market benchmark for the liquidity provider's P&L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PnlBenchmark {
    /// Future mid `m_{n+l}`.
    Mid,
    /// Future Boltzmann price, exact tanh form.
    Boltzmann { beta: f64 },
    /// Future Boltzmann price, first-order (tanh-linearized) form.
    BoltzmannLinearized { beta: f64 },
}

/// Per-trade P&L sequence and its mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PnlReport {
    pub per_trade: Vec<f64>,
    pub mean: f64,
}

/// Liquidity provider P&L of each trade, marked to market `lag` trades later:
/// `v eps_n ((m_n + eps_n S_n / 2) - Bench_{n+l})`.
///
/// With the mid benchmark the mean satisfies
/// `mean + v R_l = v mean(S/2)` exactly (spreads averaged over the same
/// window of trades).
pub fn mm_pnl(tape: &TradeTape, lag: usize, benchmark: PnlBenchmark) -> Result<PnlReport> {
    tape.check_lag(lag)?;
    let n = tape.len() - lag;
    let bench = |i: usize| -> f64 {
        match benchmark {
            PnlBenchmark::Mid => tape.mids[i],
            PnlBenchmark::Boltzmann { beta } => tape.boltzmann(i, beta),
            PnlBenchmark::BoltzmannLinearized { beta } => tape.boltzmann_linear(i, beta),
        }
    };
    let per_trade: Vec<f64> = (0..n)
        .map(|i| {
            let eps = tape.signs[i] as f64;
            tape.volume * eps * ((tape.mids[i] + eps * 0.5 * tape.spreads[i]) - bench(i + lag))
        })
        .collect();
    let mean = per_trade.iter().sum::<f64>() / n as f64;
    Ok(PnlReport { per_trade, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastics::RngSpec;
    use alloc::vec;
    use rand::Rng;

    fn random_tape(seed: u64, len: usize) -> TradeTape {
        let mut gen = RngSpec::new(seed, 0).rng();
        let signs: Vec<i8> = (0..len).map(|_| if gen.gen::<bool>() { 1 } else { -1 }).collect();
        let mids: Vec<f64> = (0..len).map(|_| 10.0 + gen.gen::<f64>()).collect();
        let spreads: Vec<f64> = (0..len).map(|_| 0.01 + 0.05 * gen.gen::<f64>()).collect();
        let thetas: Vec<f64> = (0..len).map(|_| gen.gen::<f64>() - 0.5).collect();
        TradeTape::new(signs, mids, spreads, thetas, 100.0).unwrap()
    }

    #[test]
    fn tape_validation() {
        assert!(TradeTape::new(vec![1, 2], vec![1.0, 1.0], vec![0.1, 0.1], vec![0.0, 0.0], 1.0)
            .is_err());
        assert!(TradeTape::new(vec![1], vec![1.0, 2.0], vec![0.1], vec![0.0], 1.0).is_err());
        assert!(TradeTape::new(vec![1], vec![1.0], vec![0.1], vec![0.0], 0.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert!((impact_derivative(0.02, 1.0, 0.0) - 0.01).abs() < 1e-15);
        assert!((impact_derivative(0.02, 1.0, 0.5) - 0.007864).abs() < 5e-7);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let h = 1e-5;
        for &(spread, beta, theta) in
            &[(0.02, 1.0, 0.0), (0.02, 1.0, 0.5), (0.5, 7.5, -0.3), (0.01, 17.0, 0.1)]
        {
            let numeric =
                (impact_delta(spread, beta, 0.0, theta + h) - impact_delta(spread, beta, 0.0, theta - h))
                    / (2.0 * h);
            assert!(
                (impact_derivative(spread, beta, theta) - numeric).abs() < 1e-6,
                "spread={spread} beta={beta} theta={theta}"
            );
        }
    }

    #[test]
    fn delta_examples() {
        assert_eq!(impact_delta(0.02, 1.0, 0.3, 0.3), 0.0);
        assert!((impact_delta(0.02, 1.0, 0.0, 0.5) - 0.004621).abs() < 5e-7);
        assert!((impact_delta(0.02, 1.0, 0.0, -0.5) + 0.004621).abs() < 5e-7);
    }

    #[test]
    fn delta_is_additive_and_bounded() {
        let mut gen = RngSpec::new(31, 0).rng();
        for _ in 0..1000 {
            let spread = 0.01 + gen.gen::<f64>();
            let beta = 20.0 * gen.gen::<f64>();
            let t0 = gen.gen::<f64>() - 0.5;
            let t1 = gen.gen::<f64>() - 0.5;
            let t2 = gen.gen::<f64>() - 0.5;
            let split = impact_delta(spread, beta, t0, t1) + impact_delta(spread, beta, t1, t2);
            let direct = impact_delta(spread, beta, t0, t2);
            assert!((split - direct).abs() <= 1e-12 * spread.max(1.0));
            // Anchored at balance the move is strictly below the half-spread;
            // an arbitrary pair of endpoints can use up to the full spread.
            assert!(impact_delta(spread, beta, 0.0, t1).abs() < 0.5 * spread);
            assert!(impact_delta(spread, beta, t0, t1).abs() < spread);
        }
    }

    #[test]
    fn weighted_mid_examples() {
        assert!((weighted_mid_impact_delta(0.02, 0.5, 1.0) - 0.01).abs() < 1e-15);
        assert_eq!(weighted_mid_impact_delta(0.02, 0.3, 0.3), 0.0);
        assert!((weighted_mid_impact_delta(0.02, 0.4, 0.7) - 0.006).abs() < 1e-15);
    }

    #[test]
    fn weighted_mid_overestimates_boltzmann_move() {
        // Full clear of the ask side at beta = 1: S/2 against 0.462 S/2.
        let spread = 0.02;
        let weighted = weighted_mid_impact_delta(spread, 0.5, 1.0);
        let boltzmann = impact_delta(spread, 1.0, 0.0, 0.5);
        assert!(weighted.abs() >= 2.0 * boltzmann.abs());
    }

    #[test]
    fn curve_shape() {
        let grid: Vec<f64> = (-50..=50).map(|i| i as f64 / 100.0).collect();
        let flat = impact_curve(0.02, 0.0, &grid);
        assert!(flat.price_change.iter().all(|&x| x == 0.0));

        let curve = impact_curve(0.02, 1.0, &grid);
        for (i, &t) in curve.theta_grid.iter().enumerate() {
            assert!(curve.price_change[i].abs() < 0.01);
            assert!((curve.weighted_mid_change[i] - 0.02 * t).abs() < 1e-15);
            assert_eq!(curve.mid_change[i], 0.0);
        }
        let at_half = curve.price_change.last().unwrap();
        assert!((at_half / 0.01 - 0.462).abs() < 1e-3);
        // Antisymmetric about zero.
        assert!((curve.price_change[0] + at_half).abs() < 1e-15);
    }

    #[test]
    fn lagged_impact_hand_example() {
        let tape = TradeTape::new(
            vec![1, -1, 1, 1],
            vec![10.00, 10.01, 10.00, 10.02],
            vec![0.02; 4],
            vec![0.0; 4],
            100.0,
        )
        .unwrap();
        let r1 = lagged_impact_mid(&tape, 1).unwrap();
        assert!((r1 - 0.013333).abs() < 1e-6);

        let constant = TradeTape::new(
            vec![1, -1, 1],
            vec![10.0; 3],
            vec![0.02; 3],
            vec![0.1; 3],
            50.0,
        )
        .unwrap();
        assert_eq!(lagged_impact_mid(&constant, 1).unwrap(), 0.0);
        assert!(lagged_impact_mid(&constant, 3).is_err());
        assert!(lagged_impact_mid(&constant, 0).is_err());
    }

    #[test]
    fn random_signs_have_no_impact() {
        let tape = random_tape(77, 40_000);
        let r = lagged_impact_mid(&tape, 5).unwrap();
        // Signs are independent of mids; the mean is zero within 5 SE.
        let n = (tape.len() - 5) as f64;
        let diffs: Vec<f64> = (0..tape.len() - 5)
            .map(|i| tape.mids()[i + 5] - tape.mids()[i])
            .collect();
        let var = diffs.iter().map(|d| d * d).sum::<f64>() / n;
        assert!(r.abs() <= 5.0 * (var / n).sqrt());
    }

    #[test]
    fn boltzmann_impact_reduces_to_mid() {
        let tape = random_tape(78, 500);
        let mid = lagged_impact_mid(&tape, 3).unwrap();
        assert!((lagged_impact_boltzmann(&tape, 3, 0.0).unwrap() - mid).abs() < 1e-15);

        // Constant spread and imbalance: the adjustment telescopes away.
        let constant = TradeTape::new(
            vec![1, -1, 1, -1, 1],
            vec![10.00, 10.01, 10.03, 10.00, 10.02],
            vec![0.02; 5],
            vec![0.2; 5],
            10.0,
        )
        .unwrap();
        let mid = lagged_impact_mid(&constant, 1).unwrap();
        let boltz = lagged_impact_boltzmann(&constant, 1, 2.0).unwrap();
        assert!((mid - boltz).abs() < 1e-12);
    }

    #[test]
    fn boltzmann_impact_hand_example() {
        let tape = TradeTape::new(
            vec![1, -1, 1],
            vec![10.00, 10.01, 10.00],
            vec![0.02, 0.04, 0.02],
            vec![0.25, -0.10, 0.0],
            10.0,
        )
        .unwrap();
        let beta = 1.5;
        // Closed-form prices at each index.
        let p = |mid: f64, s: f64, th: f64| mid + 0.5 * s * (beta * th).tanh();
        let p0 = p(10.00, 0.02, 0.25);
        let p1 = p(10.01, 0.04, -0.10);
        let p2 = p(10.00, 0.02, 0.0);
        // Signs are +1, -1: mean of (p1 - p0) and -(p2 - p1).
        let want = ((p1 - p0) - (p2 - p1)) / 2.0;
        let got = lagged_impact_boltzmann(&tape, 1, beta).unwrap();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn linearized_impact_decomposition_is_exact() {
        let tape = random_tape(79, 2000);
        for lag in [1usize, 4, 10] {
            for beta in [0.5, 1.0, 3.0] {
                let linear = lagged_impact_boltzmann_linearized(&tape, lag, beta).unwrap();
                let mid = lagged_impact_mid(&tape, lag).unwrap();
                let deltas = lagged_delta_si(&tape, lag).unwrap();
                let n = tape.len() - lag;
                let correction: f64 = deltas
                    .iter()
                    .zip(tape.signs())
                    .map(|(&d, &s)| s as f64 * d)
                    .sum::<f64>()
                    / n as f64;
                assert!(
                    (linear - (mid + beta * correction)).abs() < 1e-12,
                    "lag={lag} beta={beta}"
                );
            }
        }
    }

    #[test]
    fn lagged_delta_examples() {
        let tape = TradeTape::new(
            vec![1, 1],
            vec![10.0, 10.0],
            vec![0.02, 0.02],
            vec![0.0, 0.25],
            1.0,
        )
        .unwrap();
        let deltas = lagged_delta_si(&tape, 1).unwrap();
        assert_eq!(deltas.len(), 1);
        assert!((deltas[0] - 0.0025).abs() < 1e-15);

        // Stationary tape: all zeros.
        let flat = TradeTape::new(
            vec![1, -1, 1],
            vec![10.0, 10.2, 10.1],
            vec![0.05; 3],
            vec![0.3; 3],
            1.0,
        )
        .unwrap();
        assert!(lagged_delta_si(&flat, 1).unwrap().iter().all(|&d| d == 0.0));

        // Reversing the endpoints flips the sign.
        let reversed = TradeTape::new(
            vec![1, 1],
            vec![10.0, 10.0],
            vec![0.02, 0.02],
            vec![0.25, 0.0],
            1.0,
        )
        .unwrap();
        assert_eq!(lagged_delta_si(&reversed, 1).unwrap()[0], -deltas[0]);
    }

    #[test]
    fn pnl_examples() {
        // Mid unchanged: the maker earns exactly the half-spread.
        let tape = TradeTape::new(
            vec![1, 1],
            vec![10.0, 10.0],
            vec![0.02, 0.02],
            vec![0.0, 0.0],
            100.0,
        )
        .unwrap();
        let report = mm_pnl(&tape, 1, PnlBenchmark::Mid).unwrap();
        assert!((report.per_trade[0] - 1.0).abs() < 1e-12);

        // Mid runs away: buying at 10.01 marked against 10.03 loses 2 per 100.
        let tape = TradeTape::new(
            vec![1, 1],
            vec![10.0, 10.03],
            vec![0.02, 0.02],
            vec![0.0, 0.0],
            100.0,
        )
        .unwrap();
        let report = mm_pnl(&tape, 1, PnlBenchmark::Mid).unwrap();
        assert!((report.per_trade[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn pnl_identity_with_lagged_impact() {
        let tape = random_tape(80, 3000);
        for lag in [1usize, 7] {
            let report = mm_pnl(&tape, lag, PnlBenchmark::Mid).unwrap();
            let r = lagged_impact_mid(&tape, lag).unwrap();
            let n = tape.len() - lag;
            let mean_half_spread =
                tape.spreads()[..n].iter().map(|s| 0.5 * s).sum::<f64>() / n as f64;
            let v = tape.volume();
            assert!(
                (report.mean + v * r - v * mean_half_spread).abs() < 1e-12,
                "lag={lag}"
            );
        }
    }

    #[test]
    fn pnl_distance_bounded_by_imbalance_term() {
        let tape = random_tape(81, 3000);
        let lag = 2;
        let beta = 1.0;
        let mid = mm_pnl(&tape, lag, PnlBenchmark::Mid).unwrap().mean;
        let boltz = mm_pnl(&tape, lag, PnlBenchmark::BoltzmannLinearized { beta })
            .unwrap()
            .mean;
        let n = tape.len() - lag;
        let bound: f64 = (0..n)
            .map(|i| tape.spreads()[i + lag] * tape.thetas()[i + lag].abs())
            .sum::<f64>()
            / n as f64;
        let distance = (mid - boltz).abs();
        let limit = beta * bound * tape.volume();
        assert!(distance <= limit * 1.1);
        println!("pnl distance / bound ratio: {:.4}", distance / limit);
    }
}
