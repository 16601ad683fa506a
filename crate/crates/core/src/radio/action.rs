//! The quantized bandwidth-split action set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One bandwidth split: the low `lte_prbs` resource blocks go to LTE,
/// the remaining `nr_prbs` to NR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub index: usize,
    pub lte_prbs: usize,
    pub nr_prbs: usize,
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Builds the `count`-action grid over `total_prbs` resource blocks.
/// Action `i` gives LTE `round_half_up(C * i / (count - 1))` PRBs, so the
/// LTE share grows monotonically from 0 to the full band.
pub fn action_space(count: usize, total_prbs: usize) -> Result<Vec<Action>> {
    if count < 2 {
        return Err(Error::Config(format!(
            "action space needs at least 2 actions, got {count}"
        )));
    }
    Ok((0..count)
        .map(|i| {
            let lte_prbs =
                round_half_up(total_prbs as f64 * i as f64 / (count - 1) as f64).min(total_prbs);
            Action {
                index: i,
                lte_prbs,
                nr_prbs: total_prbs - lte_prbs,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lte_grid(count: usize, c: usize) -> Vec<usize> {
        action_space(count, c).unwrap().iter().map(|a| a.lte_prbs).collect()
    }

    #[test]
    fn endpoint_actions() {
        assert_eq!(lte_grid(2, 25), vec![0, 25]);
    }

    #[test]
    fn midpoint_rounds_half_up() {
        assert_eq!(lte_grid(3, 25), vec![0, 13, 25]);
    }

    #[test]
    fn four_action_grid() {
        assert_eq!(lte_grid(4, 25), vec![0, 8, 17, 25]);
    }

    #[test]
    fn rejects_degenerate_action_count() {
        assert!(matches!(action_space(1, 25), Err(Error::Config(_))));
        assert!(matches!(action_space(0, 25), Err(Error::Config(_))));
    }

    #[test]
    fn split_always_covers_band() {
        for n in 2..10 {
            for a in action_space(n, 25).unwrap() {
                assert_eq!(a.lte_prbs + a.nr_prbs, 25);
            }
        }
    }

    #[test]
    fn lte_share_is_monotone() {
        for n in 2..10 {
            let grid = lte_grid(n, 25);
            assert!(grid.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
