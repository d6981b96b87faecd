//! Ratings and coverage file readers, plus a seeded synthetic ratings generator.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::objectives::{coverage_from_sets, Coverage, RatingsMatrix};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatingsFormat {
    /// `user::item::rating::timestamp`, as in the MovieLens 1M dump.
    Movielens,
    /// Whitespace separated `user item rating`; extra columns are ignored.
    Tsv,
}

/// What [`load_ratings`] saw.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseReport {
    pub lines: usize,
    pub parsed: usize,
    pub malformed: usize,
    /// 1-based line numbers of the first few malformed lines.
    pub malformed_examples: Vec<usize>,
    pub users: usize,
    pub items: usize,
    pub max_rating: f64,
}

/// Reads a ratings file, re-indexing users and items densely in order of first appearance.
///
/// Blank lines and `#` comments are ignored; malformed lines are skipped and counted.
pub fn load_ratings(path: &Path, format: RatingsFormat) -> Result<(RatingsMatrix, ParseReport)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read ratings file {}: {e}", path.display())))?;
    parse_ratings(&text, format).map_err(|e| match e {
        Error::Data(m) => Error::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_ratings(text: &str, format: RatingsFormat) -> Result<(RatingsMatrix, ParseReport)> {
    let mut users: HashMap<&str, usize> = HashMap::new();
    let mut items: HashMap<&str, usize> = HashMap::new();
    let mut entries = Vec::new();
    let mut report = ParseReport {
        lines: 0,
        parsed: 0,
        malformed: 0,
        malformed_examples: Vec::new(),
        users: 0,
        items: 0,
        max_rating: 0.0,
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        report.lines += 1;
        let fields: Vec<&str> = match format {
            RatingsFormat::Movielens => line.split("::").collect(),
            RatingsFormat::Tsv => line.split_whitespace().collect(),
        };
        let rating = fields.get(2).and_then(|r| r.trim().parse::<f64>().ok());
        match rating {
            Some(r) if r.is_finite() && r >= 0.0 && !fields[0].is_empty() && !fields[1].is_empty() => {
                let next = users.len();
                let u = *users.entry(fields[0].trim()).or_insert(next);
                let next = items.len();
                let i = *items.entry(fields[1].trim()).or_insert(next);
                entries.push((u, i, r));
                report.parsed += 1;
                report.max_rating = report.max_rating.max(r);
            }
            _ => {
                report.malformed += 1;
                if report.malformed_examples.len() < 5 {
                    report.malformed_examples.push(lineno + 1);
                }
            }
        }
    }
    if report.parsed == 0 {
        return Err(Error::Data(format!("no valid rating lines ({} malformed)", report.malformed)));
    }
    report.users = users.len();
    report.items = items.len();
    let matrix = RatingsMatrix::new(users.len(), items.len(), entries).map_err(|e| Error::Data(e.to_string()))?;
    Ok((matrix, report))
}

/// Parameters of the synthetic ratings generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRatings {
    pub users: usize,
    pub items: usize,
    /// Expected fraction of (user, item) pairs that carry a rating.
    pub density: f64,
    pub max_rating: u32,
    /// Dimension of the latent taste vectors.
    pub latent_dim: usize,
}

impl Default for SyntheticRatings {
    fn default() -> Self {
        SyntheticRatings { users: 500, items: 200, density: 0.1, max_rating: 5, latent_dim: 4 }
    }
}

impl SyntheticRatings {
    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.items == 0 {
            return Err(Error::input("synthetic ratings need at least one user and one item"));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::input(format!("density {} must lie in (0, 1]", self.density)));
        }
        if self.max_rating == 0 || self.latent_dim == 0 {
            return Err(Error::input("max_rating and latent_dim must be positive"));
        }
        Ok(())
    }

    /// Integer ratings in `1..=max_rating` from a low-rank taste model with item
    /// popularity; every user rates at least one item.
    pub fn generate(&self, seed: u64) -> Result<RatingsMatrix> {
        self.validate()?;
        let mut rng = rng::named_stream(seed, "synthetic-ratings");
        let d = self.latent_dim;
        let mut factor = |count: usize| -> Vec<Vec<f64>> {
            (0..count).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
        };
        let user_f = factor(self.users);
        let item_f = factor(self.items);
        let popularity: Vec<f64> = (0..self.items).map(|_| rng.gen::<f64>().powi(2)).collect();
        let scale = (d as f64).sqrt();
        let r_max = self.max_rating as f64;
        let mut entries = Vec::new();
        for (u, uf) in user_f.iter().enumerate() {
            let mut rated = false;
            for (i, itf) in item_f.iter().enumerate() {
                // popular items are rated more often
                let p = (self.density * (0.5 + popularity[i]) / 0.8333).min(1.0);
                let last_chance = i + 1 == self.items && !rated;
                if rng.gen::<f64>() >= p && !last_chance {
                    continue;
                }
                rated = true;
                let affinity: f64 = uf.iter().zip(itf).map(|(a, b)| a * b).sum::<f64>() / scale;
                let noise = rng.gen_range(-0.5..0.5);
                let z = 2.0 * affinity + 1.5 * popularity[i] - 0.5 + noise;
                let level = 1.0 + (r_max - 1.0) / (1.0 + (-2.0 * z).exp());
                entries.push((u, i, level.round().clamp(1.0, r_max)));
            }
        }
        RatingsMatrix::new(self.users, self.items, entries)
    }
}

/// Writes ratings as `user item rating` lines (0-based ids).
pub fn ratings_to_tsv(r: &RatingsMatrix) -> String {
    let mut out = String::new();
    for &(u, i, v) in r.entries() {
        let _ = writeln!(out, "{u}\t{i}\t{v}");
    }
    out
}

/// Reads a coverage family: a `universe N` line, then one set per line as
/// whitespace separated 1-based elements (`-` for the empty set).
pub fn load_coverage(path: &Path) -> Result<Coverage> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read coverage file {}: {e}", path.display())))?;
    parse_coverage(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

pub fn parse_coverage(text: &str) -> Result<Coverage> {
    let mut universe = None;
    let mut sets = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| Error::Data(format!("line {}: {what}", lineno + 1));
        if universe.is_none() {
            let mut parts = line.split_whitespace();
            if parts.next() != Some("universe") {
                return Err(bad("expected `universe N` header"));
            }
            let size = parts.next().and_then(|v| v.parse::<usize>().ok()).ok_or_else(|| bad("bad universe size"))?;
            universe = Some(size);
            continue;
        }
        if line == "-" {
            sets.push(Vec::new());
            continue;
        }
        let set = line
            .split_whitespace()
            .map(|tok| match tok.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(bad(&format!("`{tok}` is not a 1-based element id"))),
            })
            .collect::<Result<Vec<_>>>()?;
        sets.push(set);
    }
    let universe = universe.ok_or_else(|| Error::Data("missing `universe N` header".into()))?;
    if sets.is_empty() {
        return Err(Error::Data("coverage file lists no sets".into()));
    }
    coverage_from_sets(sets, universe).map_err(|e| Error::Data(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{SetFunction, Subset};

    #[test]
    fn movielens_lines() {
        let text = "1::10::5::978300760\n2::10::3::978300760\n";
        let (r, rep) = parse_ratings(text, RatingsFormat::Movielens).unwrap();
        assert_eq!((r.n_users(), r.n_items(), r.max_rating()), (2, 1, 5.0));
        assert_eq!((rep.parsed, rep.malformed), (2, 0));
    }

    #[test]
    fn tsv_and_malformed_lines() {
        let (r, _) = parse_ratings("1 1 4.0\n", RatingsFormat::Tsv).unwrap();
        assert_eq!(r.entries(), &[(0, 0, 4.0)]);
        let (r, rep) = parse_ratings("# header\n7 3 2\nbroken\n7 4 x\n8 3 1\n", RatingsFormat::Tsv).unwrap();
        assert_eq!((rep.lines, rep.parsed, rep.malformed), (4, 2, 2));
        assert_eq!(rep.malformed_examples, vec![3, 4]);
        assert_eq!((r.n_users(), r.n_items()), (2, 1));
        assert!(matches!(parse_ratings("", RatingsFormat::Tsv), Err(Error::Data(_))));
        assert!(matches!(parse_ratings("a b c\n", RatingsFormat::Tsv), Err(Error::Data(_))));
    }

    #[test]
    fn synthetic_is_seeded() {
        let p = SyntheticRatings { users: 30, items: 20, ..Default::default() };
        let a = p.generate(4).unwrap();
        assert_eq!(a, p.generate(4).unwrap());
        assert_ne!(a, p.generate(5).unwrap());
        assert!(a.rows().iter().all(|row| !row.is_empty()));
        assert!(a.entries().iter().all(|e| (1.0..=5.0).contains(&e.2) && e.2.fract() == 0.0));
        let (back, _) = parse_ratings(&ratings_to_tsv(&a), RatingsFormat::Tsv).unwrap();
        assert_eq!(back.entries().len(), a.entries().len());
    }

    #[test]
    fn coverage_format() {
        let f = parse_coverage("universe 3\n1 2\n-\n2 3\n").unwrap();
        assert_eq!(f.ground_size(), 3);
        assert_eq!(f.eval(&Subset::from_indices(3, [0, 2])), 3.0);
        assert!(parse_coverage("1 2\n").is_err());
        assert!(parse_coverage("universe 2\n0 1\n").is_err());
        assert!(parse_coverage("universe 2\n3\n").is_err());
    }
}
