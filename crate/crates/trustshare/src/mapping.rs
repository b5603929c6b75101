//! The pair-secret mapping function `M_fn` and its sine value `M'_val`,
//! which authenticates the target to the source.

use rand::Rng;
use rand::RngCore;

use crate::types::RandomSet;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MappingOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl MappingOp {
    pub fn symbol(&self) -> char {
        match self {
            MappingOp::Add => '+',
            MappingOp::Sub => '-',
            MappingOp::Mul => '*',
            MappingOp::Div => '/',
        }
    }

    pub fn parse(c: char) -> Option<MappingOp> {
        match c {
            '+' => Some(MappingOp::Add),
            '-' | '\u{2212}' => Some(MappingOp::Sub),
            '*' | '\u{00D7}' => Some(MappingOp::Mul),
            '/' | '\u{00F7}' => Some(MappingOp::Div),
            _ => None,
        }
    }
}

/// Operator list of a pair's mapping function, drawn from `{+, -, *, /}`.
/// Operators cycle when the random set is longer than the list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MappingFunctionSpec {
    ops: Vec<MappingOp>,
}

impl MappingFunctionSpec {
    pub fn new(ops: Vec<MappingOp>) -> Result<MappingFunctionSpec, String> {
        if ops.is_empty() {
            return Err("mapping function needs at least one operator".into());
        }
        Ok(MappingFunctionSpec { ops })
    }

    pub fn parse(s: &str) -> Result<MappingFunctionSpec, String> {
        let ops = s
            .chars()
            .map(|c| MappingOp::parse(c).ok_or_else(|| format!("bad operator {c:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        MappingFunctionSpec::new(ops)
    }

    pub fn ops(&self) -> &[MappingOp] {
        &self.ops
    }

    pub fn generate(rng: &mut dyn RngCore) -> MappingFunctionSpec {
        let len = rng.gen_range(1..=4);
        let ops = (0..len)
            .map(|_| match rng.gen_range(0..4) {
                0 => MappingOp::Add,
                1 => MappingOp::Sub,
                2 => MappingOp::Mul,
                _ => MappingOp::Div,
            })
            .collect();
        MappingFunctionSpec { ops }
    }
}

impl std::fmt::Display for MappingFunctionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for op in &self.ops {
            write!(f, "{}", op.symbol())?;
        }
        Ok(())
    }
}

/// Left-fold of the operator list over `r_1..r_n`, i.e. `((r1 op r2) op r3)…`.
///
/// Divisors are always raw `r_i >= 1`, so division never hits zero. Each step
/// saturates to the finite f64 range so the fold stays finite for any inputs;
/// both protocol sides run this identical code path, making recomputation
/// bit-exact.
pub fn fold_value(spec: &MappingFunctionSpec, set: &RandomSet) -> f64 {
    let values = set.values();
    let mut acc = values[0] as f64;
    for (i, &v) in values[1..].iter().enumerate() {
        let op = spec.ops[i % spec.ops.len()];
        let v = v as f64;
        acc = match op {
            MappingOp::Add => acc + v,
            MappingOp::Sub => acc - v,
            MappingOp::Mul => acc * v,
            MappingOp::Div => acc / v,
        };
        acc = acc.clamp(f64::MIN, f64::MAX);
    }
    acc
}

/// `M'_val = sin(M_fn(S_R))`, radians, binary64.
pub fn compute_mapping(spec: &MappingFunctionSpec, set: &RandomSet) -> f64 {
    fold_value(spec, set).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn set(values: &[u64]) -> RandomSet {
        RandomSet::new(values.to_vec()).unwrap()
    }

    #[test]
    fn left_fold_matches_hand_evaluation() {
        let spec = MappingFunctionSpec::parse("++").unwrap();
        assert_eq!(fold_value(&spec, &set(&[2, 3, 4])), 9.0);
        assert!((compute_mapping(&spec, &set(&[2, 3, 4])) - 0.4121184852417566).abs() < 1e-12);

        let spec = MappingFunctionSpec::parse("+*").unwrap();
        assert_eq!(fold_value(&spec, &set(&[2, 3, 4])), 20.0);
        assert!((compute_mapping(&spec, &set(&[2, 3, 4])) - 0.9129452507276277).abs() < 1e-12);
    }

    #[test]
    fn zero_fold_gives_zero_sine() {
        let spec = MappingFunctionSpec::parse("-").unwrap();
        assert_eq!(compute_mapping(&spec, &set(&[5, 5])), 0.0);
    }

    #[test]
    fn single_value_is_its_own_sine() {
        let spec = MappingFunctionSpec::parse("+").unwrap();
        assert_eq!(compute_mapping(&spec, &set(&[7])), (7f64).sin());
    }

    #[test]
    fn operators_cycle_over_longer_sets() {
        // ((((10 + 2) * 3) + 4) * 5) = 200
        let spec = MappingFunctionSpec::parse("+*").unwrap();
        assert_eq!(fold_value(&spec, &set(&[10, 2, 3, 4, 5])), 200.0);
    }

    #[test]
    fn always_finite_and_bounded() {
        let mut rng = ChaCha20Rng::seed_from_u64(0x5103);
        for _ in 0..10_000 {
            let spec = MappingFunctionSpec::generate(&mut rng);
            let n = rand::Rng::gen_range(&mut rng, 1..=64);
            let s = RandomSet::generate(n, &mut rng).unwrap();
            let m = compute_mapping(&spec, &s);
            assert!(m.is_finite());
            assert!((-1.0..=1.0).contains(&m));
            // Recomputation is bit-exact.
            assert_eq!(m.to_bits(), compute_mapping(&spec, &s).to_bits());
        }
    }

    #[test]
    fn worst_case_product_saturates_without_nan() {
        let spec = MappingFunctionSpec::parse("*").unwrap();
        let s = RandomSet::new(vec![1_000_000; 64]).unwrap();
        let m = compute_mapping(&spec, &s);
        assert!(m.is_finite());
    }
}
