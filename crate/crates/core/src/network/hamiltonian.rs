use serde::{Deserialize, Serialize};

use super::{Manifold, SpinNetwork};
use crate::error::{Error, Result};
use crate::ops::{embed, embed_pair, pauli, z_sign, Axis, Op, C64};
use crate::units::angular;

/// Secular network Hamiltonian on `subset`, in the frame rotating at
/// `mw_frame_hz` for each spin (0 = lab frame), using each spin's configured
/// nuclear manifold.
///
/// `H = ½ Σ Δω_i σz_i + ½ Σ_{i<j} ω_d^{ij} σz_i σz_j` in rad/s.
pub fn build_static_hamiltonian(network: &SpinNetwork, subset: &[&str], mw_frame_hz: &[f64]) -> Result<Op> {
    build_static_hamiltonian_in(network, subset, mw_frame_hz, &vec![None; subset.len()])
}

/// As [`build_static_hamiltonian`] with an explicit manifold per spin;
/// `None` falls back to the configured one.
pub fn build_static_hamiltonian_in(
    network: &SpinNetwork,
    subset: &[&str],
    mw_frame_hz: &[f64],
    manifolds: &[Option<Manifold>],
) -> Result<Op> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty spin subset".into()));
    }
    if mw_frame_hz.len() != subset.len() {
        return Err(Error::DimensionMismatch { expected: subset.len(), got: mw_frame_hz.len() });
    }
    if manifolds.len() != subset.len() {
        return Err(Error::DimensionMismatch { expected: subset.len(), got: manifolds.len() });
    }
    let n = subset.len();
    let mut detuning = Vec::with_capacity(n);
    for ((label, &frame), &m) in subset.iter().zip(mw_frame_hz).zip(manifolds) {
        detuning.push(angular(network.transition_frequency(label, m)? - frame));
    }
    let mut couplings = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = network.coupling(subset[i], subset[j])?;
            if d != 0.0 {
                couplings.push((i, j, angular(d)));
            }
        }
    }
    let dim = 1 << n;
    let mut h = Op::zeros(dim, dim);
    for k in 0..dim {
        let mut e = 0.0;
        for (i, dw) in detuning.iter().enumerate() {
            e += 0.5 * dw * z_sign(k, i, n);
        }
        for &(i, j, wd) in &couplings {
            e += 0.5 * wd * z_sign(k, i, n) * z_sign(k, j, n);
        }
        h[(k, k)] = C64::new(e, 0.0);
    }
    Ok(h)
}

/// One Pauli factor on a named spin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Product {
    pub spin: String,
    pub axis: Axis,
}

/// A traceless observable: a single-spin Pauli operator or a product of two.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observable {
    Single(Product),
    Pair(Product, Product),
}

impl Observable {
    pub fn single(spin: &str, axis: Axis) -> Self {
        Observable::Single(Product { spin: spin.into(), axis })
    }

    pub fn pair(a: &str, axis_a: Axis, b: &str, axis_b: Axis) -> Self {
        Observable::Pair(Product { spin: a.into(), axis: axis_a }, Product { spin: b.into(), axis: axis_b })
    }

    /// Matrix representation on a register ordered as `spin_order`.
    pub fn operator(&self, spin_order: &[String]) -> Result<Op> {
        let site = |label: &str| {
            spin_order.iter().position(|s| s == label).ok_or_else(|| Error::UnknownSpin(label.to_string()))
        };
        let n = spin_order.len();
        match self {
            Observable::Single(p) => Ok(embed(&pauli(p.axis), site(&p.spin)?, n)),
            Observable::Pair(a, b) => {
                let (sa, sb) = (site(&a.spin)?, site(&b.spin)?);
                if sa == sb {
                    return Err(Error::InvalidArgument(format!("product observable repeats spin `{}`", a.spin)));
                }
                Ok(embed_pair(&pauli(a.axis), sa, &pauli(b.axis), sb, n))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Coherence, Coupling, NuclearManifold, Role, SpinDef};
    use crate::ops::{hermitian_eigenvalues, is_hermitian, max_abs_diff};
    use crate::units::GAMMA_E;

    fn spin(label: &str, role: Role) -> SpinDef {
        SpinDef {
            label: label.into(),
            role,
            gamma_e: GAMMA_E,
            hyperfine_a_perp_hz: 0.0,
            hyperfine_a_par_hz: 0.0,
            theta: 0.0,
            nuclear_manifold: NuclearManifold::Unpolarized,
            observed_lines_hz: None,
            coherence: Coherence::default(),
        }
    }

    fn net(d: f64) -> SpinNetwork {
        SpinNetwork::new(
            0.0363,
            vec![spin("i", Role::OpticalCentral), spin("j", Role::Dark)],
            vec![Coupling { a: "i".into(), b: "j".into(), d_hz: d }],
        )
        .unwrap()
    }

    fn on_resonance(net: &SpinNetwork, labels: &[&str]) -> Vec<f64> {
        labels.iter().map(|l| net.transition_frequency(l, None).unwrap()).collect()
    }

    #[test]
    fn two_spin_coupling_structure() {
        let n = net(67e3);
        let h = build_static_hamiltonian(&n, &["i", "j"], &on_resonance(&n, &["i", "j"])).unwrap();
        let wd = angular(67e3);
        let expected = Op::from_diagonal(&nalgebra::DVector::from_vec(
            [1.0, -1.0, -1.0, 1.0].iter().map(|s| C64::new(s * wd / 2.0, 0.0)).collect(),
        ));
        assert!(max_abs_diff(&h, &expected) < 1e-9);
        let ev = hermitian_eigenvalues(&h);
        for (e, want) in ev.iter().zip([-wd / 2.0, -wd / 2.0, wd / 2.0, wd / 2.0]) {
            assert!((e - want).abs() < 1e-9);
        }
    }

    #[test]
    fn single_spin_on_resonance_is_zero() {
        let n = net(0.0);
        let h = build_static_hamiltonian(&n, &["j"], &on_resonance(&n, &["j"])).unwrap();
        assert!(h.iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn detuning_only_on_target() {
        let n = net(0.0);
        let mut frame = on_resonance(&n, &["i", "j"]);
        frame[1] -= 1e6;
        let h = build_static_hamiltonian(&n, &["i", "j"], &frame).unwrap();
        // hand-built: ½ Δω (I ⊗ σz)
        let dw = angular(1e6);
        let mut oracle = Op::zeros(4, 4);
        for (k, s) in [1.0, -1.0, 1.0, -1.0].iter().enumerate() {
            oracle[(k, k)] = C64::new(0.5 * dw * s, 0.0);
        }
        assert!(max_abs_diff(&h, &oracle) < 1e-6);
        assert!(is_hermitian(&h, 0.0));
    }

    #[test]
    fn unknown_subset_spin() {
        let n = net(0.0);
        assert!(matches!(build_static_hamiltonian(&n, &["q"], &[0.0]), Err(Error::UnknownSpin(_))));
    }

    #[test]
    fn observables_are_traceless() {
        let order = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        for obs in [Observable::single("b", Axis::X), Observable::pair("a", Axis::Y, "c", Axis::Z)] {
            let op = obs.operator(&order).unwrap();
            assert!(op.trace().norm() < 1e-12);
        }
        assert!(Observable::pair("a", Axis::Y, "a", Axis::Z).operator(&order).is_err());
    }
}
