//! Finite words, one-sided shift spaces given by an admissibility predicate,
//! and exact language counts by prefix-pruned enumeration.
//!
//! A [`ShiftSpec`] is a finite alphabet `{0, .., k-1}` together with a
//! predicate deciding whether a finite word belongs to the language. Every
//! built-in rule is *factorial* (closed under taking contiguous subwords),
//! which is what makes prefix pruning valid. User-supplied predicates can be
//! checked with [`ShiftSpec::check_factorial`].

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::prime_shift;

/// Default number of candidate prefixes an enumeration may examine (2^26).
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 26;

/// A finite word over a small alphabet, stored as symbol indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word, checking every symbol against the alphabet size.
    pub fn new(symbols: Vec<u8>, alphabet_size: u8) -> Result<Self> {
        if let Some(&symbol) = symbols.iter().find(|&&s| s >= alphabet_size) {
            return Err(Error::SymbolOutOfRange {
                symbol,
                alphabet_size,
            });
        }
        Ok(Word(symbols))
    }

    pub(crate) fn from_vec(symbols: Vec<u8>) -> Self {
        Word(symbols)
    }

    /// Parses a word written with one digit (or lowercase letter) per symbol.
    pub fn parse(text: &str) -> Result<Self> {
        text.chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::Parse(format!("invalid symbol {c:?} in word {text:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            let c = char::from_digit(s as u32, 36).unwrap_or('?');
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl From<&[u8]> for Word {
    fn from(s: &[u8]) -> Self {
        Word(s.to_vec())
    }
}

type Predicate = Arc<dyn Fn(&[u8]) -> bool + Send + Sync>;

/// How admissibility of a finite word is decided.
#[derive(Clone)]
pub enum Rule {
    /// Every word is admissible.
    Full,
    /// A word is admissible iff it contains none of the listed words.
    Forbidden(Vec<Word>),
    /// The ordered prime shift on `{0, 1}`: gaps between consecutive ones are
    /// primes in strictly increasing order.
    PrimeShift,
    /// An arbitrary predicate. `window` bounds the length of the longest
    /// configuration the predicate can reject; it is used to decide
    /// admissibility of eventually periodic paths.
    Custom { predicate: Predicate, window: usize },
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Full => write!(f, "Full"),
            Rule::Forbidden(words) => f.debug_tuple("Forbidden").field(words).finish(),
            Rule::PrimeShift => write!(f, "PrimeShift"),
            Rule::Custom { window, .. } => write!(f, "Custom {{ window: {window} }}"),
        }
    }
}

/// A one-sided shift space described by its alphabet and language predicate.
#[derive(Clone, Debug)]
pub struct ShiftSpec {
    alphabet_size: u8,
    rule: Rule,
}

impl ShiftSpec {
    pub fn full(alphabet_size: u8) -> Result<Self> {
        Self::check_alphabet(alphabet_size)?;
        Ok(ShiftSpec {
            alphabet_size,
            rule: Rule::Full,
        })
    }

    /// A shift defined by a list of forbidden words.
    pub fn forbidden(alphabet_size: u8, words: Vec<Word>) -> Result<Self> {
        Self::check_alphabet(alphabet_size)?;
        for w in &words {
            if w.is_empty() {
                return Err(Error::invalid("the empty word cannot be forbidden"));
            }
            Word::new(w.0.clone(), alphabet_size)?;
        }
        Ok(ShiftSpec {
            alphabet_size,
            rule: Rule::Forbidden(words),
        })
    }

    pub fn prime_shift() -> Self {
        ShiftSpec {
            alphabet_size: 2,
            rule: Rule::PrimeShift,
        }
    }

    pub fn custom<F>(alphabet_size: u8, window: usize, predicate: F) -> Result<Self>
    where
        F: Fn(&[u8]) -> bool + Send + Sync + 'static,
    {
        Self::check_alphabet(alphabet_size)?;
        Ok(ShiftSpec {
            alphabet_size,
            rule: Rule::Custom {
                predicate: Arc::new(predicate),
                window,
            },
        })
    }

    fn check_alphabet(alphabet_size: u8) -> Result<()> {
        if alphabet_size == 0 || alphabet_size > 36 {
            return Err(Error::invalid(format!(
                "alphabet size must be in 1..=36, got {alphabet_size}"
            )));
        }
        Ok(())
    }

    pub fn alphabet_size(&self) -> u8 {
        self.alphabet_size
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    /// Whether `w` belongs to the language. Errors if a symbol is outside
    /// the alphabet.
    pub fn is_admissible(&self, w: &Word) -> Result<bool> {
        self.check_symbols(w.symbols())?;
        Ok(self.admits(w.symbols()))
    }

    pub(crate) fn check_symbols(&self, symbols: &[u8]) -> Result<()> {
        match symbols.iter().find(|&&s| s >= self.alphabet_size) {
            Some(&symbol) => Err(Error::SymbolOutOfRange {
                symbol,
                alphabet_size: self.alphabet_size,
            }),
            None => Ok(()),
        }
    }

    /// Admissibility on raw symbols that are known to be in range.
    pub(crate) fn admits(&self, symbols: &[u8]) -> bool {
        match &self.rule {
            Rule::Full => true,
            Rule::Forbidden(words) => !words
                .iter()
                .any(|f| symbols.windows(f.len()).any(|win| win == f.symbols())),
            Rule::PrimeShift => prime_shift::admits_prime_word(symbols),
            Rule::Custom { predicate, .. } => symbols.is_empty() || predicate(symbols),
        }
    }

    /// Whether the eventually periodic path `prefix · period^∞` lies in the
    /// shift space, i.e. every one of its finite subwords is admissible.
    pub fn path_admissible(&self, prefix: &[u8], period: &[u8]) -> bool {
        assert!(!period.is_empty(), "period must be nonempty");
        match &self.rule {
            Rule::Full => true,
            // Infinitely many ones cannot have strictly increasing gaps.
            Rule::PrimeShift => period.iter().all(|&s| s == 0) && self.admits(prefix),
            Rule::Forbidden(words) => {
                let window = words.iter().map(Word::len).max().unwrap_or(0);
                self.admits(&unroll(prefix, period, window))
            }
            Rule::Custom { window, .. } => self.admits(&unroll(prefix, period, *window)),
        }
    }

    /// All admissible words of length `n` in lexicographic order.
    pub fn enumerate_language(&self, n: usize, budget: u64) -> Result<Vec<Word>> {
        let mut out = Vec::new();
        self.walk(n, budget, |depth, word| {
            if depth == n {
                out.push(Word(word.to_vec()));
            }
        })?;
        Ok(out)
    }

    /// Exact counts `|L_i|` for `i <= n` and the complexity function.
    pub fn complexity(&self, n: usize, budget: u64) -> Result<LanguageTable> {
        let mut counts = vec![0u64; n + 1];
        self.walk(n, budget, |depth, _| counts[depth] += 1)?;
        Ok(LanguageTable::from_counts(
            counts.into_iter().map(BigUint::from).collect(),
        ))
    }

    /// Prefix-pruned depth-first walk over admissible words of length at
    /// most `n`, visiting them in lexicographic order (shorter prefixes
    /// first). Every extension attempted counts against the budget.
    fn walk(&self, n: usize, budget: u64, mut visit: impl FnMut(usize, &[u8])) -> Result<()> {
        let k = self.alphabet_size;
        let mut word: Vec<u8> = Vec::with_capacity(n);
        let mut spent: u64 = 0;
        visit(0, &word);
        if n == 0 {
            return Ok(());
        }
        // next[d] is the next symbol to try at depth d.
        let mut next: Vec<u8> = vec![0];
        while let Some(sym) = next.last_mut() {
            if *sym >= k {
                next.pop();
                word.pop();
                continue;
            }
            let s = *sym;
            *sym += 1;
            spent += 1;
            if spent > budget {
                return Err(Error::BudgetExceeded {
                    what: "enumeration",
                    budget,
                });
            }
            word.push(s);
            if self.admits(&word) {
                visit(word.len(), &word);
                if word.len() < n {
                    next.push(0);
                    continue;
                }
            }
            word.pop();
        }
        Ok(())
    }

    /// Checks, by unpruned brute force over all words of length at most `n`,
    /// that the empty word is admissible and every subword of an admissible
    /// word is admissible.
    pub fn check_factorial(&self, n: usize, budget: u64) -> Result<bool> {
        if !self.admits(&[]) {
            return Ok(false);
        }
        let k = self.alphabet_size as u64;
        let mut total: u64 = 0;
        let mut layer: u64 = 1;
        for _ in 0..n {
            layer = layer.saturating_mul(k);
            total = total.saturating_add(layer);
        }
        if total > budget {
            return Err(Error::BudgetExceeded {
                what: "factoriality check",
                budget,
            });
        }
        let mut word = Vec::with_capacity(n);
        for len in 1..=n {
            word.clear();
            word.resize(len, 0u8);
            loop {
                // By induction on length it suffices to test the two maximal
                // proper factors of every admissible word.
                if self.admits(&word)
                    && !(self.admits(&word[1..]) && self.admits(&word[..len - 1]))
                {
                    return Ok(false);
                }
                if !increment(&mut word, self.alphabet_size) {
                    break;
                }
            }
        }
        Ok(true)
    }
}

fn unroll(prefix: &[u8], period: &[u8], window: usize) -> Vec<u8> {
    let copies = 2 + window.div_ceil(period.len());
    let mut out = prefix.to_vec();
    for _ in 0..copies {
        out.extend_from_slice(period);
    }
    out
}

/// Lexicographic successor in place; false once the word wraps around.
fn increment(word: &mut [u8], k: u8) -> bool {
    for s in word.iter_mut().rev() {
        if *s + 1 < k {
            *s += 1;
            return true;
        }
        *s = 0;
    }
    false
}

/// Per-length language sizes and the cumulative complexity function.
///
/// `count(i) = |L_i(X)|` with `count(0) = 1` for the empty word, and
/// `cumulative(n) = p_X(n) = Σ_{i=1..n} |L_i(X)|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageTable {
    counts: Vec<BigUint>,
    cumulative: Vec<BigUint>,
}

impl LanguageTable {
    pub fn from_counts(counts: Vec<BigUint>) -> Self {
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut acc = BigUint::zero();
        for (i, c) in counts.iter().enumerate() {
            if i > 0 {
                acc += c;
            }
            cumulative.push(acc.clone());
        }
        LanguageTable { counts, cumulative }
    }

    /// Largest length covered.
    pub fn max_len(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn count(&self, i: usize) -> &BigUint {
        &self.counts[i]
    }

    pub fn cumulative(&self, n: usize) -> &BigUint {
        &self.cumulative[n]
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn cumulatives(&self) -> &[BigUint] {
        &self.cumulative
    }

    /// Writes `n,count,cumulative` rows for `n >= 1`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "count", "cumulative"])?;
        for n in 1..self.counts.len() {
            w.write_record([
                n.to_string(),
                self.counts[n].to_string(),
                self.cumulative[n].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl Default for LanguageTable {
    fn default() -> Self {
        LanguageTable::from_counts(vec![BigUint::one()])
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    alphabet_size: Option<u8>,
    kind: String,
    #[serde(default)]
    forbidden: Vec<String>,
}

impl ShiftSpec {
    /// Loads a spec from TOML text:
    ///
    /// ```toml
    /// alphabet_size = 2
    /// kind = "forbidden_list"   # or "prime_shift", "full"
    /// forbidden = ["11"]
    /// ```
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SpecFile = toml::from_str(text)?;
        match file.kind.as_str() {
            "prime_shift" => {
                if file.alphabet_size.is_some_and(|k| k != 2) {
                    return Err(Error::invalid("the prime shift has alphabet size 2"));
                }
                Ok(ShiftSpec::prime_shift())
            }
            "full" => ShiftSpec::full(file.alphabet_size.unwrap_or(2)),
            "forbidden_list" => {
                let k = file
                    .alphabet_size
                    .ok_or_else(|| Error::invalid("forbidden_list needs alphabet_size"))?;
                let words = file
                    .forbidden
                    .iter()
                    .map(|s| Word::parse(s))
                    .collect::<Result<Vec<_>>>()?;
                ShiftSpec::forbidden(k, words)
            }
            other => Err(Error::Parse(format!("unknown shift kind {other:?}"))),
        }
    }

    /// Resolves a builtin name (`prime`, `golden-mean`, `full2`, ...) or
    /// falls back to reading a TOML file at that path.
    pub fn from_name_or_path(name: &str) -> Result<Self> {
        match name {
            "prime" | "prime_shift" | "prime-shift" => Ok(ShiftSpec::prime_shift()),
            "golden-mean" => ShiftSpec::forbidden(2, vec![Word::parse("11")?]),
            _ => {
                if let Some(k) = name.strip_prefix("full") {
                    if let Ok(k) = k.parse::<u8>() {
                        return ShiftSpec::full(k);
                    }
                }
                let text = std::fs::read_to_string(name)?;
                ShiftSpec::from_toml_str(&text)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(ws: &[Word]) -> Vec<String> {
        ws.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn prime_shift_admissibility_examples() {
        let x = ShiftSpec::prime_shift();
        assert!(!x.is_admissible(&Word::parse("11").unwrap()).unwrap());
        assert!(x.is_admissible(&Word::empty()).unwrap());
        assert!(x.is_admissible(&Word::parse("1001").unwrap()).unwrap());
        assert!(!x.is_admissible(&Word::parse("101").unwrap()).unwrap());
    }

    #[test]
    fn symbol_out_of_range_is_an_input_error() {
        let x = ShiftSpec::prime_shift();
        let w = Word::from_vec(vec![0, 2]);
        assert!(matches!(
            x.is_admissible(&w),
            Err(Error::SymbolOutOfRange { symbol: 2, .. })
        ));
    }

    #[test]
    fn enumerate_small_languages() {
        let x = ShiftSpec::prime_shift();
        let b = DEFAULT_ENUMERATION_BUDGET;
        assert_eq!(words(&x.enumerate_language(2, b).unwrap()), ["00", "01", "10"]);
        assert_eq!(
            words(&x.enumerate_language(3, b).unwrap()),
            ["000", "001", "010", "100"]
        );
        let full = ShiftSpec::full(2).unwrap();
        assert_eq!(full.enumerate_language(3, b).unwrap().len(), 8);
    }

    #[test]
    fn complexity_of_prime_shift() {
        let t = ShiftSpec::prime_shift()
            .complexity(4, DEFAULT_ENUMERATION_BUDGET)
            .unwrap();
        let cum: Vec<u64> = (1..=4)
            .map(|n| t.cumulative(n).try_into().unwrap())
            .collect();
        assert_eq!(cum, [2, 5, 9, 15]);
        assert_eq!(t.count(4), &BigUint::from(6u32));
    }

    #[test]
    fn enumeration_budget_is_reported() {
        let full = ShiftSpec::full(2).unwrap();
        match full.enumerate_language(10, 100) {
            Err(Error::BudgetExceeded { budget: 100, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn factoriality() {
        let b = DEFAULT_ENUMERATION_BUDGET;
        assert!(ShiftSpec::prime_shift().check_factorial(8, b).unwrap());
        assert!(ShiftSpec::full(2).unwrap().check_factorial(5, b).unwrap());
        let broken = ShiftSpec::custom(2, 2, |w| w != [0]).unwrap();
        assert!(!broken.check_factorial(2, b).unwrap());
    }

    #[test]
    fn forbidden_list_and_periodic_paths() {
        let golden = ShiftSpec::forbidden(2, vec![Word::parse("11").unwrap()]).unwrap();
        assert!(golden.path_admissible(&[1], &[0]));
        assert!(golden.path_admissible(&[], &[1, 0]));
        assert!(!golden.path_admissible(&[0], &[1]));
        assert!(!golden.path_admissible(&[1], &[1, 0]));
        let x = ShiftSpec::prime_shift();
        assert!(x.path_admissible(&[1, 0, 0, 1], &[0]));
        assert!(!x.path_admissible(&[], &[1, 0, 0]));
    }

    #[test]
    fn spec_from_toml() {
        let s = ShiftSpec::from_toml_str(
            "alphabet_size = 2\nkind = \"forbidden_list\"\nforbidden = [\"11\"]\n",
        )
        .unwrap();
        let t = s.complexity(5, DEFAULT_ENUMERATION_BUDGET).unwrap();
        // Fibonacci counts for the golden mean shift.
        let counts: Vec<u64> = (1..=5).map(|i| t.count(i).try_into().unwrap()).collect();
        assert_eq!(counts, [2, 3, 5, 8, 13]);
        assert!(matches!(
            ShiftSpec::from_toml_str("kind = \"sofic\""),
            Err(Error::Parse(_))
        ));
        let p = ShiftSpec::from_toml_str("kind = \"prime_shift\"").unwrap();
        assert!(matches!(p.rule(), Rule::PrimeShift));
    }

    #[test]
    fn csv_rows() {
        let t = ShiftSpec::prime_shift()
            .complexity(2, DEFAULT_ENUMERATION_BUDGET)
            .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,count,cumulative\n1,2,2\n2,3,5\n"
        );
    }
}
