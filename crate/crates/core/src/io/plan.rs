use std::fmt::Write as _;

use crate::analytic::{chain_coherence_hhcp, chain_coherence_sedor, max_layer, ChainBudget, ChainModel};
use crate::error::Result;

/// Coherence per layer for both protocols, rows `1..=depth` (at least one
/// past the deeper of the two maximal layers, capped at 50), then the
/// maximal layers.
pub fn cmd_plan(budget: &ChainBudget) -> Result<String> {
    budget.validate()?;
    let hh = max_layer(budget, ChainModel::Hhcp);
    let se = max_layer(budget, ChainModel::Sedor);
    let depth = (hh.max(se) + 1).clamp(1, 50);
    let mut out = String::new();
    let _ = writeln!(out, "{:>5}  {:>12}  {:>12}", "layer", "hhcp", "sedor");
    for n in 1..=depth {
        let a = chain_coherence_hhcp(budget, n);
        let b = chain_coherence_sedor(budget, n);
        let mark = |v: f64| if v >= budget.threshold { ' ' } else { '-' };
        let _ = writeln!(out, "{n:>5}  {a:>11.6}{}  {b:>11.6}{}", mark(a), mark(b));
    }
    let _ = writeln!(out, "\nthreshold {}: max layer hhcp = {hh}, sedor = {se}", budget.threshold);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_budget_table() {
        let b = ChainBudget { t_gate: 10e-6, t1_rho: 100e-6, t1: f64::INFINITY, t2: 50e-6, eta: 1.0, threshold: 0.1 };
        let t = cmd_plan(&b).unwrap();
        assert!(t.contains("max layer hhcp = 11"), "{t}");
        assert_eq!(t.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 12);
        let widths: Vec<usize> = t.lines().take(13).map(str::len).collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]), "{widths:?}");
    }

    #[test]
    fn bad_budget() {
        let b = ChainBudget { t_gate: 10e-6, t1_rho: 100e-6, t1: f64::INFINITY, t2: 50e-6, eta: 1.5, threshold: 0.1 };
        assert!(cmd_plan(&b).is_err());
    }
}
