//! Finite groupoids with an increasing filtration by subgroupoids, and the
//! length `ℓ(x) = min { p(i) : x ∈ G(i) }` with `p(i) = sup_u |G(i)_u|`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilteredArrow {
    pub name: String,
    pub source: String,
    pub range: String,
    pub inverse: String,
}

/// File form of a filtered groupoid:
///
/// ```toml
/// units = ["a", "b"]
/// compose = []          # [g, h, gh] triples beyond the implied ones
/// levels = [["x", "y"]] # non-unit arrows of G(1), G(2), ...
///
/// [[arrows]]
/// name = "x"
/// source = "a"
/// range = "b"
/// inverse = "y"
///
/// [[arrows]]
/// name = "y"
/// source = "b"
/// range = "a"
/// inverse = "x"
/// ```
///
/// Products with a unit and `g g⁻¹` are implied. Units belong to every level.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilteredGroupoidSpec {
    pub units: Vec<String>,
    #[serde(default)]
    pub arrows: Vec<FilteredArrow>,
    #[serde(default)]
    pub compose: Vec<[String; 3]>,
    #[serde(default)]
    pub levels: Vec<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct FilteredGroupoid {
    names: Vec<String>,
    units: usize,
    source: Vec<usize>,
    inverse: Vec<usize>,
    product: HashMap<(usize, usize), usize>,
    /// Non-unit members of each level.
    levels: Vec<BTreeSet<usize>>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::invalid(msg)
}

impl FilteredGroupoid {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: FilteredGroupoidSpec = toml::from_str(text)?;
        FilteredGroupoid::from_spec(&spec)
    }

    pub fn from_spec(spec: &FilteredGroupoidSpec) -> Result<Self> {
        let mut index = HashMap::new();
        let mut names = Vec::new();
        for name in spec.units.iter().chain(spec.arrows.iter().map(|a| &a.name)) {
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(bad(format!("element {name:?} is declared twice")));
            }
            names.push(name.clone());
        }
        let units = spec.units.len();
        if units == 0 {
            return Err(bad("a groupoid needs at least one unit"));
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| bad(format!("unknown element {name:?}")))
        };
        let unit = |name: &str| {
            let i = lookup(name)?;
            if i < units {
                Ok(i)
            } else {
                Err(bad(format!("{name:?} is not a unit")))
            }
        };
        let mut source: Vec<usize> = (0..units).collect();
        let mut range = source.clone();
        let mut inverse = source.clone();
        for a in &spec.arrows {
            source.push(unit(&a.source)?);
            range.push(unit(&a.range)?);
            inverse.push(lookup(&a.inverse)?);
        }
        let n = names.len();
        for g in units..n {
            let h = inverse[g];
            if h < units || inverse[h] != g || source[h] != range[g] || range[h] != source[g] {
                return Err(bad(format!("inverse of {:?} is inconsistent", names[g])));
            }
        }

        let mut product = HashMap::new();
        for g in 0..n {
            product.insert((range[g], g), g);
            product.insert((g, source[g]), g);
            product.insert((g, inverse[g]), range[g]);
        }
        for [g, h, k] in &spec.compose {
            let (g, h, k) = (lookup(g)?, lookup(h)?, lookup(k)?);
            if source[g] != range[h] {
                return Err(bad(format!("{:?} and {:?} are not composable", names[g], names[h])));
            }
            if range[k] != range[g] || source[k] != source[h] {
                return Err(bad(format!(
                    "{:?}{:?} = {:?} has the wrong endpoints",
                    names[g], names[h], names[k]
                )));
            }
            if product.insert((g, h), k).is_some_and(|old| old != k) {
                return Err(bad(format!("{:?}{:?} is defined twice", names[g], names[h])));
            }
        }
        for g in 0..n {
            for h in 0..n {
                if source[g] == range[h] && !product.contains_key(&(g, h)) {
                    return Err(bad(format!("product {:?}{:?} is missing", names[g], names[h])));
                }
            }
        }
        let fg = |g, h| product[&(g, h)];
        for g in 0..n {
            for h in (0..n).filter(|&h| source[g] == range[h]) {
                for k in (0..n).filter(|&k| source[h] == range[k]) {
                    if fg(fg(g, h), k) != fg(g, fg(h, k)) {
                        return Err(bad(format!(
                            "composition is not associative on {:?}, {:?}, {:?}",
                            names[g], names[h], names[k]
                        )));
                    }
                }
            }
        }

        let mut levels: Vec<BTreeSet<usize>> = Vec::new();
        for (i, level) in spec.levels.iter().enumerate() {
            let mut set = BTreeSet::new();
            for name in level {
                let g = lookup(name)?;
                if g < units {
                    return Err(bad(format!("level {} lists the unit {name:?}", i + 1)));
                }
                set.insert(g);
            }
            if let Some(prev) = levels.last() {
                if !prev.is_subset(&set) {
                    return Err(bad(format!("level {} does not contain level {i}", i + 1)));
                }
            }
            for &g in &set {
                if !set.contains(&inverse[g]) {
                    return Err(bad(format!("level {} is not closed under inverses", i + 1)));
                }
                for &h in &set {
                    if source[g] == range[h] {
                        let k = fg(g, h);
                        if k >= units && !set.contains(&k) {
                            return Err(bad(format!("level {} is not closed under composition", i + 1)));
                        }
                    }
                }
            }
            levels.push(set);
        }
        if n > units && levels.last().is_none_or(|top| top.len() != n - units) {
            return Err(bad("the filtration does not exhaust the groupoid"));
        }
        Ok(FilteredGroupoid {
            names,
            units,
            source,
            inverse,
            product,
            levels,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// `p(i) = sup_u |G(i)_u|` for each level, units included.
    pub fn level_sizes(&self) -> Vec<u64> {
        self.levels
            .iter()
            .map(|level| {
                let mut fiber = vec![1u64; self.units];
                for &g in level {
                    fiber[self.source[g]] += 1;
                }
                fiber.into_iter().max().unwrap_or(1)
            })
            .collect()
    }

    fn lengths(&self) -> Vec<u64> {
        let p = self.level_sizes();
        (0..self.len())
            .map(|g| {
                if g < self.units {
                    0
                } else {
                    let i = self.levels.iter().position(|l| l.contains(&g)).expect("levels exhaust");
                    p[i]
                }
            })
            .collect()
    }

    /// Lengths from the filtration, with the length-function and ball checks.
    pub fn proper_length(&self) -> ProperLength {
        let len = self.lengths();
        let n = self.len();
        let symmetric = (0..n).all(|g| len[self.inverse[g]] == len[g]);
        let subadditive = self
            .product
            .iter()
            .all(|(&(g, h), &k)| len[k] <= len[g] + len[h]);
        let top = len.iter().copied().max().unwrap_or(0).max(1);
        let ball_checks = (1..=top)
            .map(|radius| {
                let max_ball = (0..self.units)
                    .map(|u| {
                        (0..n)
                            .filter(|&g| self.source[g] == u && len[g] <= radius)
                            .count() as u64
                    })
                    .max()
                    .unwrap_or(0);
                BallCheck { radius, max_ball }
            })
            .collect();
        ProperLength {
            level_sizes: self.level_sizes(),
            lengths: self.names.iter().cloned().zip(len).collect(),
            symmetric,
            subadditive,
            ball_checks,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallCheck {
    pub radius: u64,
    /// `sup_u |B_{G_u}(radius)|`.
    pub max_ball: u64,
}

impl BallCheck {
    pub fn holds(&self) -> bool {
        self.max_ball <= self.radius
    }
}

/// Output of [`FilteredGroupoid::proper_length`]. Ball checks run up to the
/// largest length, past which balls stop growing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProperLength {
    pub level_sizes: Vec<u64>,
    pub lengths: BTreeMap<String, u64>,
    pub symmetric: bool,
    pub subadditive: bool,
    pub ball_checks: Vec<BallCheck>,
}

impl ProperLength {
    pub fn passed(&self) -> bool {
        self.symmetric && self.subadditive && self.ball_checks.iter().all(BallCheck::holds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PAIR: &str = r#"
units = ["a", "b"]
levels = [["ab", "ba"]]

[[arrows]]
name = "ab"
source = "b"
range = "a"
inverse = "ba"

[[arrows]]
name = "ba"
source = "a"
range = "b"
inverse = "ab"
"#;

    const Z2: &str = r#"
units = ["e"]
levels = [["t"]]

[[arrows]]
name = "t"
source = "e"
range = "e"
inverse = "t"
"#;

    fn arrow(name: &str, source: &str, range: &str, inverse: &str) -> FilteredArrow {
        FilteredArrow {
            name: name.into(),
            source: source.into(),
            range: range.into(),
            inverse: inverse.into(),
        }
    }

    #[test]
    fn pair_groupoid_on_two_points() {
        let pl = FilteredGroupoid::from_toml_str(PAIR).unwrap().proper_length();
        assert_eq!(pl.level_sizes, vec![2]);
        assert_eq!(pl.lengths["ab"], 2);
        assert_eq!(pl.lengths["a"], 0);
        assert_eq!(
            pl.ball_checks,
            vec![BallCheck { radius: 1, max_ball: 1 }, BallCheck { radius: 2, max_ball: 2 }]
        );
        assert!(pl.passed());
    }

    #[test]
    fn two_element_group() {
        let pl = FilteredGroupoid::from_toml_str(Z2).unwrap().proper_length();
        assert_eq!(pl.level_sizes, vec![2]);
        assert_eq!(pl.lengths["t"], 2);
        assert!(pl.passed());
    }

    #[test]
    fn units_only() {
        let g = FilteredGroupoid::from_toml_str("units = [\"u\", \"v\", \"w\"]").unwrap();
        let pl = g.proper_length();
        assert!(pl.lengths.values().all(|&l| l == 0));
        assert_eq!(pl.ball_checks, vec![BallCheck { radius: 1, max_ball: 1 }]);
        assert!(pl.passed());
    }

    #[test]
    fn rejects_broken_input() {
        // Missing level coverage.
        assert!(FilteredGroupoid::from_toml_str(&PAIR.replace("levels = [[\"ab\", \"ba\"]]", "levels = []")).is_err());
        // Level not closed under inverses.
        assert!(FilteredGroupoid::from_toml_str(&PAIR.replace("[[\"ab\", \"ba\"]]", "[[\"ab\"], [\"ab\", \"ba\"]]")).is_err());
        // Inverse with wrong endpoints.
        let spec = FilteredGroupoidSpec {
            units: vec!["a".into(), "b".into()],
            arrows: vec![arrow("x", "a", "b", "x")],
            compose: vec![],
            levels: vec![vec!["x".into()]],
        };
        assert!(FilteredGroupoid::from_spec(&spec).is_err());
        // Z/3 without its products.
        let spec = FilteredGroupoidSpec {
            units: vec!["e".into()],
            arrows: vec![arrow("r", "e", "e", "s"), arrow("s", "e", "e", "r")],
            compose: vec![],
            levels: vec![vec!["r".into(), "s".into()]],
        };
        assert!(FilteredGroupoid::from_spec(&spec).is_err());
        let mut z3 = spec.clone();
        z3.compose = vec![
            ["r".into(), "r".into(), "s".into()],
            ["s".into(), "s".into(), "r".into()],
        ];
        assert!(FilteredGroupoid::from_spec(&z3).unwrap().proper_length().passed());
    }

    /// Pair groupoid on `k` points, filtered by pair groupoids on `0..m_i`.
    fn pair_spec(k: usize, cuts: &[usize]) -> FilteredGroupoidSpec {
        let name = |i: usize, j: usize| format!("{i}-{j}");
        let units: Vec<String> = (0..k).map(|i| format!("{i}-{i}")).collect();
        let mut arrows = Vec::new();
        let mut compose = Vec::new();
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    arrows.push(arrow(&name(i, j), &units[j], &units[i], &name(j, i)));
                    for l in 0..k {
                        if l != j && l != i {
                            compose.push([name(i, j), name(j, l), name(i, l)]);
                        }
                    }
                }
            }
        }
        let levels = cuts
            .iter()
            .map(|&m| {
                let mut lv = Vec::new();
                for i in 0..m {
                    for j in 0..m {
                        if i != j {
                            lv.push(name(i, j));
                        }
                    }
                }
                lv
            })
            .collect();
        FilteredGroupoidSpec { units, arrows, compose, levels }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn filtered_lengths_are_length_functions(k in 2usize..6, raw in proptest::collection::vec(2usize..6, 0..3)) {
            let mut cuts: Vec<usize> = raw.into_iter().map(|c| c.min(k)).collect();
            cuts.push(k);
            cuts.sort();
            let g = FilteredGroupoid::from_spec(&pair_spec(k, &cuts)).unwrap();
            let pl = g.proper_length();
            prop_assert!(pl.symmetric && pl.subadditive);
            prop_assert!(pl.passed());
        }
    }
}
