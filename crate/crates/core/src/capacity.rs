//! I.i.d. edge capacities with counter-based seeding.

use std::io::Write;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{q, qi, to_f64, Coord, Q};
use crate::lattice::LatticeGraph;

/// Critical probability of bond percolation on `Z^2`.
pub const PC_2: (i128, i128) = (1, 2);
/// Numerical estimate of the bond percolation threshold on `Z^3`
/// (Lorenz and Ziff, 1998: 0.2488126). Used only for advisory verdicts.
pub const PC_3: (i128, i128) = (2488, 10000);

/// Resolution of the uniform law in exact mode: values are `M·j / 2^24`.
pub const UNIFORM_STEPS: i128 = 1 << 24;

/// Capacity law `Λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LawSpec {
    Constant { value: Coord },
    /// `t = value` with probability `p`, otherwise 0.
    Bernoulli { p: Coord, value: Coord },
    /// Uniform on `[0, max]`.
    Uniform { max: Coord },
    /// Finite atoms `(value, probability)`.
    Discrete { atoms: Vec<(Coord, Coord)> },
}

/// A validated law with exact atoms sorted by value.
#[derive(Clone, Debug, PartialEq)]
pub enum Law {
    Atoms(Vec<(Q, Q)>),
    Uniform(Q),
}

impl LawSpec {
    pub fn constant(v: i64) -> Self {
        LawSpec::Constant { value: Coord::Int(v) }
    }

    pub fn bernoulli(p: &str, value: i64) -> Self {
        LawSpec::Bernoulli { p: Coord::Text(p.into()), value: Coord::Int(value) }
    }

    pub fn uniform(max: i64) -> Self {
        LawSpec::Uniform { max: Coord::Int(max) }
    }

    pub fn discrete(atoms: &[(i64, &str)]) -> Self {
        LawSpec::Discrete { atoms: atoms.iter().map(|(v, p)| (Coord::Int(*v), Coord::Text((*p).into()))).collect() }
    }

    pub fn validate(&self) -> Result<Law> {
        let bad = |m: &str| Error::InvalidLaw(m.to_string());
        let law = match self {
            LawSpec::Constant { value } => Law::Atoms(vec![(value.value()?, Q::one())]),
            LawSpec::Bernoulli { p, value } => {
                let p = p.value()?;
                if p < Q::zero() || p > Q::one() {
                    return Err(bad("bernoulli p outside [0, 1]"));
                }
                Law::Atoms(vec![(Q::zero(), Q::one() - p), (value.value()?, p)])
            }
            LawSpec::Uniform { max } => Law::Uniform(max.value()?),
            LawSpec::Discrete { atoms } => {
                let mut v = atoms.iter().map(|(a, p)| Ok((a.value()?, p.value()?))).collect::<Result<Vec<_>>>()?;
                if v.iter().any(|(_, p)| p.is_negative()) {
                    return Err(bad("negative probability"));
                }
                if v.iter().map(|(_, p)| *p).sum::<Q>() != Q::one() {
                    return Err(bad("probabilities must sum to 1"));
                }
                v.sort();
                Law::Atoms(v)
            }
        };
        let negative = match &law {
            Law::Atoms(a) => a.iter().any(|(v, _)| v.is_negative()),
            Law::Uniform(m) => !m.is_positive(),
        };
        if negative {
            return Err(bad("capacity values must be nonnegative (uniform needs max > 0)"));
        }
        Ok(law)
    }
}

impl Law {
    /// Essential supremum `M`.
    pub fn max_value(&self) -> Q {
        match self {
            Law::Atoms(a) => a.iter().filter(|(_, p)| !p.is_zero()).map(|(v, _)| *v).max().unwrap_or_else(Q::zero),
            Law::Uniform(m) => *m,
        }
    }

    /// `Λ({0})`.
    pub fn mass_at_zero(&self) -> Q {
        match self {
            Law::Atoms(a) => a.iter().filter(|(v, _)| v.is_zero()).map(|(_, p)| *p).sum(),
            Law::Uniform(_) => Q::zero(),
        }
    }

    /// Integer units per flow unit for exact mode.
    pub fn scale(&self) -> i128 {
        match self {
            Law::Atoms(a) => a.iter().fold(1i128, |acc, (v, _)| acc.lcm(v.denom())),
            Law::Uniform(m) => m.denom() * UNIFORM_STEPS,
        }
    }

    /// Inverse distribution function, exact: returns the capacity in units of `1/scale`.
    fn quantile_units(&self, u: f64, scale: i128) -> i128 {
        match self {
            Law::Atoms(a) => {
                let mut cum = 0.0;
                for (v, p) in a {
                    cum += to_f64(p);
                    if u < cum {
                        return (v * qi(scale)).to_integer();
                    }
                }
                let last = a.iter().rev().find(|(_, p)| !p.is_zero()).map(|(v, _)| *v).unwrap_or_else(Q::zero);
                (last * qi(scale)).to_integer()
            }
            Law::Uniform(m) => {
                let j = (u * UNIFORM_STEPS as f64) as i128;
                m.numer() * j
            }
        }
    }
}

/// Verdict of the percolation criterion for `ν > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub max_capacity: f64,
    pub mass_at_zero: f64,
    /// `1 - p_c(d)`, absent for unsupported dimensions.
    pub threshold: Option<f64>,
    pub nu_positive_expected: Verdict,
}

/// Bounded support and the zero-mass criterion `Λ({0}) < 1 - p_c(d)`.
pub fn check_hypotheses(law: &LawSpec, d: usize) -> Result<HypothesisReport> {
    let law = law.validate()?;
    let zero = law.mass_at_zero();
    let pc = match d {
        2 => Some(q(PC_2.0, PC_2.1)),
        3 => Some(q(PC_3.0, PC_3.1)),
        _ => None,
    };
    let threshold = pc.map(|p| Q::one() - p);
    let verdict = match threshold {
        Some(t) if zero < t => Verdict::Yes,
        Some(_) => Verdict::No,
        None => Verdict::Unknown,
    };
    Ok(HypothesisReport {
        max_capacity: to_f64(&law.max_value()),
        mass_at_zero: to_f64(&zero),
        threshold: threshold.as_ref().map(to_f64),
        nu_positive_expected: verdict,
    })
}

/// Deterministic 64-bit mixing of a seed with tags (SplitMix64 finaliser).
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut h = master ^ 0x9e37_79b9_7f4a_7c15;
    for &t in tags {
        h = mix(h.wrapping_add(t).wrapping_add(0x9e37_79b9_7f4a_7c15));
    }
    mix(h)
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const COORD_BITS: u32 = 20;
const COORD_OFFSET: i64 = 1 << (COORD_BITS - 1);

/// Injective 64-bit packing of an edge identity `(axis, k)` for `d <= 3` and
/// `|k_i| < 2^19`.
pub fn edge_stream(axis: usize, k: &[i64]) -> Result<u64> {
    if k.len() > 3 {
        return Err(Error::InvalidArgument("edge keys support d <= 3".into()));
    }
    let mut s = axis as u64;
    for &c in k {
        let shifted = c + COORD_OFFSET;
        if !(0..(1 << COORD_BITS)).contains(&shifted) {
            return Err(Error::Overflow(format!("lattice coordinate {c} too large for edge keys")));
        }
        s = (s << COORD_BITS) | shifted as u64;
    }
    Ok(s)
}

/// Uniform variate in `[0, 1)` attached to an edge for a `(seed, replicate)` key.
pub struct EdgeUniforms {
    rng: ChaCha12Rng,
}

impl EdgeUniforms {
    pub fn new(seed: u64, replicate: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&replicate.to_le_bytes());
        Self { rng: ChaCha12Rng::from_seed(key) }
    }

    pub fn uniform(&mut self, axis: usize, k: &[i64]) -> Result<f64> {
        self.rng.set_stream(edge_stream(axis, k)?);
        self.rng.set_word_pos(0);
        Ok((self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
    }
}

/// Optional relabelling of edge keys before drawing, used to couple fields
/// across lattice symmetries: `(axis, k) ↦ (perm[axis], k')` with `k'[perm[i]] = k[i]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyMap {
    pub perm: Option<Vec<usize>>,
}

impl KeyMap {
    fn apply(&self, axis: usize, k: &[i64]) -> (usize, Vec<i64>) {
        match &self.perm {
            None => (axis, k.to_vec()),
            Some(p) => {
                let mut out = vec![0; k.len()];
                for (i, &c) in k.iter().enumerate() {
                    out[p[i]] = c;
                }
                (p[axis], out)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    /// Capacities are `units[e] / scale`.
    Exact { scale: i64, units: Vec<i64> },
    Float(Vec<f64>),
}

/// `t(e)` for every edge of a graph, with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityField {
    pub law: Option<LawSpec>,
    pub seed: u64,
    pub replicate: u64,
    pub values: Values,
}

impl CapacityField {
    pub fn from_units(scale: i64, units: Vec<i64>) -> Self {
        Self { law: None, seed: 0, replicate: 0, values: Values::Exact { scale, units } }
    }

    pub fn from_f64(values: Vec<f64>) -> Self {
        Self { law: None, seed: 0, replicate: 0, values: Values::Float(values) }
    }

    pub fn len(&self) -> usize {
        match &self.values {
            Values::Exact { units, .. } => units.len(),
            Values::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.values, Values::Exact { .. })
    }

    pub fn get_f64(&self, e: u32) -> f64 {
        match &self.values {
            Values::Exact { scale, units } => units[e as usize] as f64 / *scale as f64,
            Values::Float(v) => v[e as usize],
        }
    }

    pub fn get_q(&self, e: u32) -> Option<Q> {
        match &self.values {
            Values::Exact { scale, units } => Some(q(units[e as usize] as i128, *scale as i128)),
            Values::Float(_) => None,
        }
    }

    pub fn max_f64(&self) -> f64 {
        (0..self.len() as u32).map(|e| self.get_f64(e)).fold(0.0, f64::max)
    }

    /// Multiplies every capacity by a positive integer.
    pub fn scaled(&self, factor: i64) -> Result<Self> {
        let values = match &self.values {
            Values::Exact { scale, units } => Values::Exact {
                scale: *scale,
                units: units
                    .iter()
                    .map(|u| u.checked_mul(factor).ok_or_else(|| Error::Overflow("capacity scaling".into())))
                    .collect::<Result<_>>()?,
            },
            Values::Float(v) => Values::Float(v.iter().map(|x| x * factor as f64).collect()),
        };
        Ok(Self { values, ..self.clone() })
    }

    /// Dump rows `(axis, k_1..k_d, t)`, axis 1-based.
    pub fn write_csv<W: Write>(&self, graph: &LatticeGraph, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["axis".to_string()];
        header.extend((1..=graph.dim).map(|i| format!("k_{i}")));
        header.push("t".into());
        w.write_record(&header)?;
        for e in 0..graph.edge_count() as u32 {
            let (axis, k) = graph.edge_key(e);
            let mut rec = vec![(axis + 1).to_string()];
            rec.extend(k.iter().map(i64::to_string));
            rec.push(format!("{}", self.get_f64(e)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact-mode sample: every `t(e)` depends only on `(seed, replicate, edge key)`.
pub fn sample(law: &LawSpec, graph: &LatticeGraph, seed: u64, replicate: u64) -> Result<CapacityField> {
    sample_with(law, graph, seed, replicate, &KeyMap::default())
}

pub fn sample_with(
    law: &LawSpec,
    graph: &LatticeGraph,
    seed: u64,
    replicate: u64,
    keys: &KeyMap,
) -> Result<CapacityField> {
    let l = law.validate()?;
    let scale = l.scale();
    let max_units = (l.max_value() * qi(scale)).to_integer();
    let total = max_units.checked_mul(graph.edge_count() as i128 + 1);
    if scale > i64::MAX as i128 || total.is_none_or(|t| t > (i64::MAX / 4) as i128) {
        return Err(Error::Overflow("capacity units exceed the exact-mode range".into()));
    }
    let mut rng = EdgeUniforms::new(seed, replicate);
    let mut units = Vec::with_capacity(graph.edge_count());
    for e in 0..graph.edge_count() as u32 {
        let (axis, k) = graph.edge_key(e);
        let (axis, k) = keys.apply(axis, k);
        let u = rng.uniform(axis, &k)?;
        units.push(l.quantile_units(u, scale).to_i64().expect("checked range"));
    }
    Ok(CapacityField {
        law: Some(law.clone()),
        seed,
        replicate,
        values: Values::Exact { scale: scale as i64, units },
    })
}

/// Floating-mode sample from the same uniforms as [`sample`].
pub fn sample_f64(law: &LawSpec, graph: &LatticeGraph, seed: u64, replicate: u64) -> Result<CapacityField> {
    let exact = sample(law, graph, seed, replicate)?;
    let values = (0..exact.len() as u32).map(|e| exact.get_f64(e)).collect();
    Ok(CapacityField { values: Values::Float(values), ..exact })
}
