//! Ground-truth bandit instances and pseudo-regret accounting.

use crate::error::{Error, Result};

/// Means and variances of `N >= 2` normal arms.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    means: Vec<f64>,
    variances: Vec<f64>,
    summary: InstanceSummary,
}

/// Derived quantities: best mean, gaps, and the smallest variance among optimal arms.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSummary {
    pub mu_star: f64,
    pub deltas: Vec<f64>,
    pub sigma_star_sq: f64,
}

impl BanditInstance {
    pub fn new(means: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        if means.len() != variances.len() {
            return Err(Error::InvalidInstance(format!(
                "{} means but {} variances",
                means.len(),
                variances.len()
            )));
        }
        if means.len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 arms, got {}",
                means.len()
            )));
        }
        if let Some(i) = means.iter().position(|m| !m.is_finite()) {
            return Err(Error::InvalidInstance(format!("means[{i}] is not finite")));
        }
        if let Some(i) = variances.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInstance(format!(
                "variances[{i}] = {} must be finite and > 0",
                variances[i]
            )));
        }
        let summary = summarize_parts(&means, &variances);
        Ok(Self {
            means,
            variances,
            summary,
        })
    }

    /// The six-arm instance used for the first regret comparison.
    pub fn table1() -> Self {
        Self::new(
            vec![8.0, 8.0, 7.9, 7.0, -1.0, 0.0],
            vec![1.0, 1.4, 0.5, 3.0, 1.0, 4.0],
        )
        .expect("valid instance")
    }

    /// The six-arm instance used for the Thompson sampling comparison.
    pub fn table2() -> Self {
        Self::new(
            vec![10.0, 9.0, 8.0, 7.0, -1.0, 0.0],
            vec![8.0, 1.0, 1.0, 0.5, 1.0, 4.0],
        )
        .expect("valid instance")
    }

    pub fn n_arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn summary(&self) -> &InstanceSummary {
        &self.summary
    }

    /// Indices of arms with a strictly positive gap.
    pub fn suboptimal_arms(&self) -> impl Iterator<Item = usize> + '_ {
        self.summary
            .deltas
            .iter()
            .enumerate()
            .filter(|(_, d)| **d > 0.0)
            .map(|(i, _)| i)
    }

    /// Instance after mapping every reward through `x -> a*x + b` (`a > 0`).
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        Self::new(
            self.means.iter().map(|m| a * m + b).collect(),
            self.variances.iter().map(|v| a * a * v).collect(),
        )
    }
}

pub fn summarize(instance: &BanditInstance) -> InstanceSummary {
    instance.summary.clone()
}

fn summarize_parts(means: &[f64], variances: &[f64]) -> InstanceSummary {
    let mu_star = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let deltas: Vec<f64> = means.iter().map(|m| mu_star - m).collect();
    let sigma_star_sq = deltas
        .iter()
        .zip(variances)
        .filter(|(d, _)| **d == 0.0)
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    InstanceSummary {
        mu_star,
        deltas,
        sigma_star_sq,
    }
}

/// Realized pseudo-regret `sum_i delta_i * counts_i`.
pub fn pseudo_regret(summary: &InstanceSummary, counts: &[u64]) -> Result<f64> {
    if counts.len() != summary.deltas.len() {
        return Err(Error::LengthMismatch {
            expected: summary.deltas.len(),
            actual: counts.len(),
        });
    }
    Ok(summary
        .deltas
        .iter()
        .zip(counts)
        .map(|(d, &c)| d * c as f64)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table1_summary() {
        let s = BanditInstance::table1().summary().clone();
        assert_eq!(s.mu_star, 8.0);
        let expected = [0.0, 0.0, 0.1, 1.0, 9.0, 8.0];
        for (d, e) in s.deltas.iter().zip(expected) {
            assert!((d - e).abs() < 1e-12, "{d} vs {e}");
        }
        assert_eq!(s.sigma_star_sq, 1.0);
    }

    #[test]
    fn tie_of_optima_takes_min_variance() {
        let inst = BanditInstance::new(vec![1.0, 1.0], vec![2.0, 3.0]).unwrap();
        assert_eq!(inst.summary().deltas, vec![0.0, 0.0]);
        assert_eq!(inst.summary().sigma_star_sq, 2.0);
    }

    #[test]
    fn simple_gap() {
        let inst = BanditInstance::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(inst.summary().deltas, vec![0.0, 1.0]);
    }

    #[test]
    fn validation() {
        assert!(BanditInstance::new(vec![1.0], vec![1.0]).is_err());
        assert!(BanditInstance::new(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(BanditInstance::new(vec![1.0, 2.0], vec![1.0, 0.0]).is_err());
        assert!(BanditInstance::new(vec![1.0, 2.0], vec![1.0, f64::INFINITY]).is_err());
        assert!(BanditInstance::new(vec![f64::NAN, 2.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn regret_sums() {
        let inst = BanditInstance::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        let s = inst.summary();
        assert_eq!(pseudo_regret(s, &[100, 0]).unwrap(), 0.0);
        assert_eq!(pseudo_regret(s, &[90, 10]).unwrap(), 10.0);
        assert!(pseudo_regret(s, &[1, 2, 3]).is_err());

        let t1 = BanditInstance::table1();
        let r = pseudo_regret(t1.summary(), &[100; 6]).unwrap();
        assert!((r - 1810.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn summary_permutation_invariant(
            arms in prop::collection::vec((-10i32..10, 1u32..50), 2..8),
            rot in 0usize..8,
        ) {
            let means: Vec<f64> = arms.iter().map(|a| a.0 as f64 * 0.5).collect();
            let vars: Vec<f64> = arms.iter().map(|a| a.1 as f64 * 0.1).collect();
            let n = means.len();
            let r = rot % n;
            let mut pm = means.clone();
            let mut pv = vars.clone();
            pm.rotate_left(r);
            pv.rotate_left(r);
            let a = BanditInstance::new(means, vars).unwrap();
            let b = BanditInstance::new(pm, pv).unwrap();
            let mut da = a.summary().deltas.clone();
            da.rotate_left(r);
            prop_assert_eq!(da, b.summary().deltas.clone());
            prop_assert_eq!(a.summary().mu_star, b.summary().mu_star);
            prop_assert_eq!(a.summary().sigma_star_sq, b.summary().sigma_star_sq);
            prop_assert!(b.summary().deltas.contains(&0.0));
        }

        #[test]
        fn regret_monotone_along_counts(pulls in prop::collection::vec(0usize..6, 1..200)) {
            let inst = BanditInstance::table1();
            let mut counts = [0u64; 6];
            let mut prev = 0.0;
            for arm in pulls {
                counts[arm] += 1;
                let r = pseudo_regret(inst.summary(), &counts).unwrap();
                prop_assert!(r >= prev);
                prev = r;
            }
        }
    }
}
