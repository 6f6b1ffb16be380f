use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, KickedError, Result};
use crate::moebius::Mat2;

/// Words are sequences of letter indices into [`FuchsianGroup::letters`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Letter {
    pub label: char,
    pub matrix: Mat2,
    pub inverse: usize,
}

/// A finitely generated subgroup of PSL(2,R) given by generator matrices.
///
/// Points are reduced into the region bounded by the isometric circles
/// `|cz + d| = 1` of the letters and, when a generator translates, by the strip
/// `|x| ≤ t/2`. That region is the Ford domain whenever its sides are paired by
/// the letters themselves, as for PSL(2,Z) with `T, S` or classical Schottky
/// groups. Discreteness is not certified.
#[derive(Debug, Clone, Serialize)]
pub struct FuchsianGroup {
    letters: Vec<Letter>,
    generators: usize,
    /// Letter translating by `+period`.
    translation: Option<(usize, f64)>,
}

/// Result of reducing a point into the fundamental region.
#[derive(Debug, Clone, Copy)]
pub struct Reduction {
    pub w: Complex64,
    /// Derivative of the reducing map at the input point.
    pub derivative: Complex64,
    pub steps: usize,
    pub converged: bool,
}

pub const DEFAULT_MAX_REDUCTION_STEPS: usize = 10_000;
const DEDUP_TOL: f64 = 1e-10;
const CIRCLE_SLACK: f64 = 1e-13;

fn is_involution(m: &Mat2) -> bool {
    m.mul(m).projective_rel_err(&Mat2::IDENTITY) < 1e-12
}

fn swap_case(ch: char) -> char {
    if ch.is_ascii_uppercase() {
        ch.to_ascii_lowercase()
    } else {
        ch.to_ascii_uppercase()
    }
}

impl FuchsianGroup {
    /// Generators labelled `A, B, C, ...`.
    pub fn new(generators: &[Mat2]) -> Result<FuchsianGroup> {
        if generators.len() > 26 {
            return invalid("at most 26 generators are supported");
        }
        let labelled: Vec<(char, Mat2)> = generators
            .iter()
            .enumerate()
            .map(|(i, m)| ((b'A' + i as u8) as char, *m))
            .collect();
        Self::with_labels(&labelled)
    }

    /// Generators with explicit uppercase ASCII labels; inverses get the lowercase label.
    pub fn with_labels(generators: &[(char, Mat2)]) -> Result<FuchsianGroup> {
        if generators.is_empty() {
            return invalid("a group needs at least one generator");
        }
        let mut letters = Vec::new();
        let mut translation = None;
        for &(label, m) in generators {
            if !label.is_ascii_uppercase() || letters.iter().any(|l: &Letter| l.label == label) {
                return invalid(format!("generator label {label:?} must be a distinct uppercase letter"));
            }
            if !m.is_finite() || m.projective_rel_err(&Mat2::IDENTITY) < 1e-12 {
                return invalid(format!("generator {label} is not a nontrivial finite matrix"));
            }
            let m = Mat2::new(m.a, m.b, m.c, m.d)?;
            if m.c.abs() < 1e-14 {
                if (m.a - 1.0).abs() > 1e-12 || (m.d - 1.0).abs() > 1e-12 {
                    return Err(KickedError::Unsupported(format!(
                        "generator {label} fixes infinity without being a translation; conjugate the group first"
                    )));
                }
                if translation.is_some() {
                    return Err(KickedError::Unsupported(
                        "at most one translation generator is supported".into(),
                    ));
                }
            }
            let i = letters.len();
            if is_involution(&m) {
                letters.push(Letter { label, matrix: m, inverse: i });
            } else {
                letters.push(Letter { label, matrix: m, inverse: i + 1 });
                letters.push(Letter {
                    label: swap_case(label),
                    matrix: m.inverse(),
                    inverse: i,
                });
            }
            if m.c.abs() < 1e-14 {
                let up = if m.b > 0.0 { i } else { i + 1 };
                translation = Some((up, m.b.abs()));
            }
        }
        Ok(FuchsianGroup {
            letters,
            generators: generators.len(),
            translation,
        })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn generator_count(&self) -> usize {
        self.generators
    }

    pub fn generators(&self) -> Vec<(char, Mat2)> {
        self.letters
            .iter()
            .filter(|l| l.label.is_ascii_uppercase())
            .map(|l| (l.label, l.matrix))
            .collect()
    }

    /// Translation period `t` if some generator is `z ↦ z ± t`.
    pub fn translation(&self) -> Option<f64> {
        self.translation.map(|(_, t)| t)
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let mut w = Vec::new();
        for ch in s.chars().filter(|c| !c.is_whitespace()) {
            let idx = self.letters.iter().position(|l| l.label == ch).or_else(|| {
                self.letters
                    .iter()
                    .enumerate()
                    .position(|(i, l)| l.label == swap_case(ch) && l.inverse == i)
            });
            match idx {
                Some(i) => w.push(i),
                None if ch == '1' => {}
                None => return invalid(format!("unknown letter {ch:?} in word {s:?}")),
            }
        }
        Ok(self.reduce(&Word(w)))
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.0.iter().map(|&i| self.letters[i].label).collect()
    }

    pub fn matrix(&self, w: &Word) -> Mat2 {
        w.0.iter()
            .fold(Mat2::IDENTITY, |acc, &i| acc.mul(&self.letters[i].matrix))
    }

    /// Free reduction: cancels adjacent inverse letters.
    pub fn reduce(&self, w: &Word) -> Word {
        let mut out: Vec<usize> = Vec::with_capacity(w.len());
        for &i in &w.0 {
            if out.last().is_some_and(|&j| self.letters[j].inverse == i) {
                out.pop();
            } else {
                out.push(i);
            }
        }
        Word(out)
    }

    pub fn concat(&self, u: &Word, v: &Word) -> Word {
        let mut w = u.0.clone();
        w.extend_from_slice(&v.0);
        self.reduce(&Word(w))
    }

    pub fn inverse(&self, w: &Word) -> Word {
        Word(w.0.iter().rev().map(|&i| self.letters[i].inverse).collect())
    }

    pub fn power(&self, w: &Word, n: u32) -> Word {
        let mut out = Word::identity();
        for _ in 0..n {
            out = self.concat(&out, w);
        }
        out
    }

    /// Letters with an isometric circle, i.e. `c ≠ 0`.
    fn circle_letters(&self) -> impl Iterator<Item = (usize, &Letter)> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, l)| l.matrix.c.abs() >= 1e-14)
    }

    /// Reduces `z` into the fundamental region: translate into the strip, then
    /// apply the letter whose isometric circle most deeply contains the point.
    pub fn reduce_point(&self, z: Complex64, max_steps: usize) -> Reduction {
        self.reduce_inner(z, max_steps, None)
    }

    /// As [`reduce_point`](Self::reduce_point), also returning the reducing element as a word.
    pub fn reduce_with_word(&self, z: Complex64, max_steps: usize) -> (Reduction, Word) {
        let mut applied = Vec::new();
        let r = self.reduce_inner(z, max_steps, Some(&mut applied));
        applied.reverse();
        (r, self.reduce(&Word(applied)))
    }

    fn reduce_inner(&self, z: Complex64, max_steps: usize, mut log: Option<&mut Vec<usize>>) -> Reduction {
        let mut w = z;
        let mut der = Complex64::new(1.0, 0.0);
        let mut steps = 0;
        loop {
            if let Some((_, t)) = self.translation {
                let k = ((w.re + 0.5 * t) / t).floor();
                if k != 0.0 {
                    w.re -= k * t;
                    steps += 1;
                    if let (Some(log), Some((up, _))) = (log.as_deref_mut(), self.translation) {
                        let letter = if k > 0.0 { self.letters[up].inverse } else { up };
                        log.extend(std::iter::repeat_n(letter, k.abs() as usize));
                    }
                }
            }
            let best = self
                .circle_letters()
                .map(|(i, l)| (i, (l.matrix.c * w + l.matrix.d).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((i, r)) if r < 1.0 - CIRCLE_SLACK => {
                    let m = &self.letters[i].matrix;
                    der *= m.act_derivative(w);
                    w = m.act(w);
                    w.im = w.im.abs();
                    steps += 1;
                    if let Some(log) = log.as_deref_mut() {
                        log.push(i);
                    }
                }
                _ => {
                    return Reduction {
                        w,
                        derivative: der,
                        steps,
                        converged: true,
                    }
                }
            }
            if steps >= max_steps {
                return Reduction {
                    w,
                    derivative: der,
                    steps,
                    converged: false,
                };
            }
        }
    }

    /// Whether `z` lies in the fundamental region with the given slack.
    pub fn in_region(&self, z: Complex64, slack: f64) -> bool {
        if let Some((_, t)) = self.translation {
            if z.re.abs() > 0.5 * t - slack {
                return false;
            }
        }
        self.circle_letters()
            .all(|(_, l)| (l.matrix.c * z + l.matrix.d).norm() >= 1.0 + slack)
    }

    /// Sides of the fundamental region as `(letter, kind)` pairs, used by arc walking.
    pub(crate) fn sides(&self) -> Vec<Side> {
        let mut out: Vec<Side> = self
            .circle_letters()
            .map(|(i, l)| Side::Circle {
                letter: i,
                c: l.matrix.c,
                d: l.matrix.d,
            })
            .collect();
        if let Some((up, t)) = self.translation {
            let down = self.letters[up].inverse;
            out.push(Side::Right { letter: down, half: 0.5 * t });
            out.push(Side::Left { letter: up, half: 0.5 * t });
        }
        out
    }

    /// Distinct nontrivial elements of word length `1..=max_len`, shortest word first.
    pub fn enumerate(&self, max_len: usize) -> Vec<(Word, Mat2)> {
        let mut seen: HashMap<[i64; 4], Vec<usize>> = HashMap::new();
        let mut out: Vec<(Word, Mat2)> = Vec::new();
        let id_key = matrix_key(&Mat2::IDENTITY);
        seen.insert(id_key, vec![usize::MAX]);
        let mut frontier: Vec<(Word, Mat2)> = vec![(Word::identity(), Mat2::IDENTITY)];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (w, m) in &frontier {
                for (i, l) in self.letters.iter().enumerate() {
                    if w.0.last().is_some_and(|&j| self.letters[j].inverse == i) {
                        continue;
                    }
                    let g = m.mul(&l.matrix);
                    let key = matrix_key(&g);
                    let bucket = seen.entry(key).or_default();
                    let dup = bucket.iter().any(|&k| {
                        let other = if k == usize::MAX { &Mat2::IDENTITY } else { &out[k].1 };
                        g.projective_rel_err(other) < DEDUP_TOL
                    });
                    if dup {
                        continue;
                    }
                    bucket.push(out.len());
                    let mut word = w.0.clone();
                    word.push(i);
                    out.push((Word(word.clone()), g));
                    next.push((Word(word), g));
                }
            }
            frontier = next;
        }
        out
    }

    /// Shortest enumerated word (length ≤ `max_len`) whose matrix equals `g`.
    pub fn find_word(&self, g: &Mat2, max_len: usize) -> Option<Word> {
        if g.projective_rel_err(&Mat2::IDENTITY) < 1e-9 {
            return Some(Word::identity());
        }
        self.enumerate(max_len)
            .into_iter()
            .find(|(_, m)| m.projective_rel_err(g) < 1e-9)
            .map(|(w, _)| w)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Side {
    /// Isometric circle `|cz + d| = 1`; crossing into its disc applies `letter`.
    Circle { letter: usize, c: f64, d: f64 },
    /// Line `x = half`; crossing applies the leftward translation `letter`.
    Right { letter: usize, half: f64 },
    Left { letter: usize, half: f64 },
}

impl Side {
    pub(crate) fn letter(&self) -> usize {
        match *self {
            Side::Circle { letter, .. } | Side::Right { letter, .. } | Side::Left { letter, .. } => letter,
        }
    }

    /// For a geodesic `z(Y) = m(iY)`, the side is violated iff `P·Y² + Q > 0`.
    pub(crate) fn violation(&self, m: &Mat2) -> (f64, f64) {
        let (al, be, ga, de) = (m.a, m.b, m.c, m.d);
        match *self {
            Side::Circle { c, d, .. } => {
                let p = c * al + d * ga;
                let q = c * be + d * de;
                (ga * ga - p * p, de * de - q * q)
            }
            Side::Right { half, .. } => (al * ga - half * ga * ga, be * de - half * de * de),
            Side::Left { half, .. } => (-al * ga - half * ga * ga, -be * de - half * de * de),
        }
    }
}

fn matrix_key(m: &Mat2) -> [i64; 4] {
    let e = m.entries();
    let sign = e
        .iter()
        .find(|x| x.abs() > 1e-7)
        .map_or(1.0, |x| x.signum());
    let scale = 1e6 / m.norm().max(1.0).sqrt();
    e.map(|x| (sign * x * scale).round() as i64)
}
