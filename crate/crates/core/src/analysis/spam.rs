use crate::error::{Error, Result};
use crate::sequence::{Quantity, SignalTrace};

fn check(a0: f64) -> Result<()> {
    if !(a0.abs() >= 1e-6) {
        return Err(Error::InvalidArgument(format!("readout amplitude {a0} is too small to invert")));
    }
    Ok(())
}

/// `(y - b0) / A0`: central-spin signal to probe frame.
pub fn spam_map(trace: &SignalTrace, b0: f64, a0: f64) -> Result<SignalTrace> {
    check(a0)?;
    let mut out = trace.clone();
    out.ordinate.iter_mut().for_each(|y| *y = (*y - b0) / a0);
    out.asymptote = (trace.asymptote - b0) / a0;
    out.quantity = Quantity::ProbeSigmaZ;
    Ok(out)
}

/// `b0 + A0 x`: inverse of [`spam_map`].
pub fn spam_unmap(trace: &SignalTrace, b0: f64, a0: f64) -> Result<SignalTrace> {
    check(a0)?;
    let mut out = trace.clone();
    out.ordinate.iter_mut().for_each(|x| *x = b0 + a0 * *x);
    out.asymptote = b0 + a0 * trace.asymptote;
    out.quantity = Quantity::CentralSigmaZ;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::SweepParameter;
    use proptest::prelude::*;

    fn tr(y: Vec<f64>) -> SignalTrace {
        SignalTrace::new(SweepParameter::Phase, (0..y.len()).map(|k| k as f64).collect(), y).unwrap()
    }

    #[test]
    fn examples() {
        let (b0, a0) = (0.016, -0.35);
        let m = spam_map(&tr(vec![b0, b0 + a0, -0.334]), b0, a0).unwrap();
        assert!(m.ordinate[0].abs() < 1e-15);
        assert!((m.ordinate[1] - 1.0).abs() < 1e-15);
        assert!((m.ordinate[2] - 1.0).abs() < 1e-12);
        let id = spam_map(&tr(vec![0.3, -0.2]), 0.0, 1.0).unwrap();
        assert_eq!(id.ordinate, vec![0.3, -0.2]);
        assert!(spam_map(&tr(vec![0.0]), 0.0, 1e-7).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(y in proptest::collection::vec(-1.0f64..1.0, 1..20), b0 in -0.5f64..0.5, a0 in 0.01f64..1.0, neg in any::<bool>()) {
            let a0 = if neg { -a0 } else { a0 };
            let t = tr(y.clone());
            let back = spam_unmap(&spam_map(&t, b0, a0).unwrap(), b0, a0).unwrap();
            for (a, b) in back.ordinate.iter().zip(&y) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
