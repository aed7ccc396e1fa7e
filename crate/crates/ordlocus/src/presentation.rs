//! Group presentations of knot exteriors with peripheral data.
//!
//! Words are freely reduced strings in the generators; the text form writes
//! a generator as a lowercase letter and its inverse as the uppercase
//! letter. The built-in constructor covers two-bridge knots b(p, q): the
//! relator is a·w·b⁻¹·w⁻¹ where w alternates b, a, b, a, … with exponent
//! signs ε_i = (−1)^{⌊iq/p⌋}, the meridian is a, and the longitude is
//! reverse(w)·w corrected by a power of the meridian to die in homology.

use crate::Error;

/// A freely reduced word in the generators. Letters are pairs of generator
/// index and exponent ±1; adjacent cancelling pairs are removed on
/// construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word {
    letters: Vec<(usize, i8)>,
}

impl Word {
    /// Builds a word, freely reducing it.
    pub fn from_letters(letters: impl IntoIterator<Item = (usize, i8)>) -> Word {
        let mut out: Vec<(usize, i8)> = Vec::new();
        for (g, e) in letters {
            debug_assert!(e == 1 || e == -1, "letter exponents are ±1");
            if let Some(&(lg, le)) = out.last() {
                if lg == g && le == -e {
                    out.pop();
                    continue;
                }
            }
            out.push((g, e));
        }
        Word { letters: out }
    }

    pub fn empty() -> Word {
        Word { letters: Vec::new() }
    }

    pub fn letters(&self) -> &[(usize, i8)] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation followed by free reduction.
    pub fn concat(&self, other: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// Group inverse: reversed order, flipped exponents.
    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    /// Letters in reverse order with exponents kept.
    pub fn reverse(&self) -> Word {
        Word::from_letters(self.letters.iter().rev().copied())
    }

    /// Exponent sum of each generator, indexed by generator.
    pub fn exponent_vector(&self, gens: usize) -> Vec<i64> {
        let mut v = vec![0i64; gens];
        for &(g, e) in &self.letters {
            v[g] += e as i64;
        }
        v
    }

    /// Total exponent sum; the image in the homology of a knot exterior,
    /// where every meridional generator maps to the same class.
    pub fn total_exponent(&self) -> i64 {
        self.letters.iter().map(|&(_, e)| e as i64).sum()
    }

    /// Renders the word over single-letter generator names, uppercase for
    /// inverse letters. The empty word renders as "1".
    pub fn render(&self, names: &[char]) -> String {
        if self.letters.is_empty() {
            return "1".into();
        }
        self.letters
            .iter()
            .map(|&(g, e)| {
                let c = names[g];
                if e > 0 {
                    c.to_string()
                } else {
                    c.to_ascii_uppercase().to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses a word over single-letter generator names. Whitespace is
    /// optional between letters; "1" denotes the empty word.
    pub fn parse(text: &str, names: &[char]) -> Result<Word, Error> {
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        for (col, c) in cleaned.chars().enumerate() {
            let lower = c.to_ascii_lowercase();
            let Some(g) = names.iter().position(|&n| n == lower) else {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("unknown generator letter '{c}' at position {}", col + 1),
                });
            };
            letters.push((g, if c.is_ascii_uppercase() { -1 } else { 1 }));
        }
        Ok(Word::from_letters(letters))
    }
}

/// A deficiency-1 presentation of a knot exterior group together with the
/// peripheral words and bookkeeping used downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct Presentation {
    /// Number of generators.
    pub generators: usize,
    /// Single-letter generator names used by the text form.
    pub names: Vec<char>,
    /// Relators; built-in constructions emit exactly generators − 1.
    pub relators: Vec<Word>,
    /// Meridian word μ.
    pub meridian: Word,
    /// Longitude word λ; must be trivial in free homology.
    pub longitude: Word,
    /// Display name of the knot or manifold.
    pub name: String,
    /// Seifert genus when known; bounds translation levels via 2g − 1.
    pub genus: Option<u32>,
    /// Order n such that λ generates index n in the image of the boundary
    /// torus in free homology; 1 for knot exteriors in homology spheres.
    pub longitude_order: u32,
}

impl Presentation {
    /// Checks that the longitude has zero exponent sum in every generator
    /// separately is too strong; the right condition is vanishing total
    /// image in the free homology of the exterior, where all meridional
    /// generators are identified. Returns the per-generator exponent vector
    /// on failure so the caller can report it.
    pub fn check_longitude_nullhomologous(&self) -> Result<(), Vec<i64>> {
        if self.longitude.total_exponent() == 0 {
            Ok(())
        } else {
            Err(self.longitude.exponent_vector(self.generators))
        }
    }

    /// Serializes to the presentation text format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("name: {}\n", self.name));
        out.push_str(&format!(
            "generators: {}\n",
            self.names.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
        ));
        for r in &self.relators {
            out.push_str(&format!("relator: {}\n", r.render(&self.names)));
        }
        out.push_str(&format!("meridian: {}\n", self.meridian.render(&self.names)));
        out.push_str(&format!("longitude: {}\n", self.longitude.render(&self.names)));
        if let Some(g) = self.genus {
            out.push_str(&format!("genus: {g}\n"));
        }
        out.push_str(&format!("longitude_order: {}\n", self.longitude_order));
        out
    }
}

/// Parses the presentation text format: one `key: value` directive per
/// line, `#` starts a comment, letters case-encode inversion.
pub fn parse_presentation(text: &str) -> Result<Presentation, Error> {
    let mut names: Option<Vec<char>> = None;
    let mut relator_texts: Vec<(usize, String)> = Vec::new();
    let mut meridian_text: Option<(usize, String)> = None;
    let mut longitude_text: Option<(usize, String)> = None;
    let mut name: Option<String> = None;
    let mut genus: Option<u32> = None;
    let mut longitude_order: u32 = 1;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `key: value`, got {line:?}"),
            });
        };
        let key = key.trim();
        let value = value.trim().to_string();
        match key {
            "generators" => {
                let mut gens = Vec::new();
                for tok in value.split_whitespace() {
                    let mut chars = tok.chars();
                    let (Some(c), None) = (chars.next(), chars.next()) else {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("generator names are single letters, got {tok:?}"),
                        });
                    };
                    if !c.is_ascii_lowercase() {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("generator names are lowercase ASCII, got '{c}'"),
                        });
                    }
                    if gens.contains(&c) {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("duplicate generator '{c}'"),
                        });
                    }
                    gens.push(c);
                }
                if gens.is_empty() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "empty generator list".into(),
                    });
                }
                names = Some(gens);
            }
            "relator" => relator_texts.push((line_no, value)),
            "meridian" => meridian_text = Some((line_no, value)),
            "longitude" => longitude_text = Some((line_no, value)),
            "name" => name = Some(value),
            "genus" => {
                genus = Some(value.parse::<u32>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("genus must be a positive integer, got {value:?}"),
                })?);
                if genus == Some(0) {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "genus must be positive".into(),
                    });
                }
            }
            "longitude_order" => {
                longitude_order = value.parse::<u32>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("longitude_order must be a positive integer, got {value:?}"),
                })?;
                if longitude_order == 0 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "longitude_order must be positive".into(),
                    });
                }
            }
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unknown directive {other:?}"),
                });
            }
        }
    }

    let names = names.ok_or(Error::Parse { line: 0, msg: "missing `generators:` line".into() })?;
    let parse_word = |(line, text): &(usize, String)| -> Result<Word, Error> {
        Word::parse(text, &names).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::Parse { line: *line, msg },
            other => other,
        })
    };

    if relator_texts.is_empty() {
        return Err(Error::Parse { line: 0, msg: "missing `relator:` line".into() });
    }
    let relators = relator_texts.iter().map(parse_word).collect::<Result<Vec<_>, _>>()?;
    if relators.iter().any(|r| r.is_empty()) {
        return Err(Error::Parse { line: 0, msg: "empty relator".into() });
    }
    let meridian = parse_word(
        meridian_text
            .as_ref()
            .ok_or(Error::Parse { line: 0, msg: "missing `meridian:` line".into() })?,
    )?;
    let longitude = parse_word(
        longitude_text
            .as_ref()
            .ok_or(Error::Parse { line: 0, msg: "missing `longitude:` line".into() })?,
    )?;
    if meridian.is_empty() || longitude.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "meridian and longitude must be nonempty words".into(),
        });
    }

    let p = Presentation {
        generators: names.len(),
        names,
        relators,
        meridian,
        longitude,
        name: name.unwrap_or_else(|| "unnamed".into()),
        genus,
        longitude_order,
    };
    if let Err(vec) = p.check_longitude_nullhomologous() {
        return Err(Error::InvalidInput(format!(
            "longitude is not nullhomologous: generator exponent vector {vec:?}"
        )));
    }
    Ok(p)
}

/// The words of the two-bridge presentation of b(p, q), with the genus
/// left unset. The crate-level `two_bridge` wraps this and fills the genus
/// in from the Alexander degree.
///
/// Generators a, b are meridians. With ε_i = (−1)^{⌊iq/p⌋}, the word
/// w = b^{ε₁} a^{ε₂} b^{ε₃} ⋯ a^{ε_{p−1}} gives the relator
/// a·w·b⁻¹·w⁻¹, meridian a, and longitude w·reverse(w)·a^{−2e} where
/// e = Σε_i. The start-letter convention is pinned by requiring the
/// Alexander polynomial of b(5, 3) to be t² − 3t + 1, and the order of
/// the two halves of the longitude by commutation with the meridian.
pub fn two_bridge_words(p: u64, q: u64) -> Result<Presentation, Error> {
    if p < 3 || p % 2 == 0 {
        return Err(Error::InvalidInput(format!("p must be an odd integer ≥ 3, got {p}")));
    }
    if q == 0 || q >= p || gcd(p, q) != 1 {
        return Err(Error::InvalidInput(format!(
            "q must satisfy 0 < q < p and gcd(p, q) = 1, got q = {q}, p = {p}"
        )));
    }

    // ε_i = (−1)^{⌊iq/p⌋}; the sign pattern encodes the overpass sequence.
    // q and q + p describe the same oriented knot, and the formula needs
    // the odd representative: even q yields a non-palindromic pattern whose
    // relator has an asymmetric Alexander image of odd degree.
    let q_eff = if q % 2 == 1 { q } else { q + p };
    let eps: Vec<i8> =
        (1..p).map(|i| if (i * q_eff / p) % 2 == 0 { 1 } else { -1 }).collect();
    // odd positions carry b, even positions a; p − 1 is even so w ends in a
    let w = Word::from_letters(
        eps.iter().enumerate().map(|(k, &e)| (if k % 2 == 0 { 1 } else { 0 }, e)),
    );
    debug_assert_eq!(w.len() as u64, p - 1, "w is reduced as written");

    let a = Word::from_letters([(0, 1)]);
    let b_inv = Word::from_letters([(1, -1)]);
    let relator = a.concat(&w).concat(&b_inv).concat(&w.inverse());

    let e: i64 = eps.iter().map(|&x| x as i64).sum();
    let correction =
        Word::from_letters(std::iter::repeat((0usize, if e > 0 { -1i8 } else { 1 })).take(
            (2 * e.unsigned_abs()) as usize,
        ));
    let longitude = w.concat(&w.reverse()).concat(&correction);
    debug_assert_eq!(longitude.total_exponent(), 0);

    Ok(Presentation {
        generators: 2,
        names: vec!['a', 'b'],
        relators: vec![relator],
        meridian: a,
        longitude,
        name: format!("b({p},{q})"),
        genus: None,
        longitude_order: 1,
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
