use crate::{Error, Result};

/// Sparse user-by-item ratings. Missing entries read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    n_users: usize,
    n_items: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl RatingsMatrix {
    /// Builds a matrix from dense 0-based `(user, item, rating)` triples.
    ///
    /// Duplicate `(user, item)` pairs keep the last rating.
    pub fn new(n_users: usize, n_items: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n_users == 0 || n_items == 0 {
            return Err(Error::input("ratings matrix needs at least one user and one item"));
        }
        for &(u, j, r) in &entries {
            if u >= n_users || j >= n_items {
                return Err(Error::input(format!("entry ({u}, {j}) outside {n_users}x{n_items}")));
            }
            if !r.is_finite() || r < 0.0 {
                return Err(Error::input(format!("rating {r} for ({u}, {j}) must be finite and non-negative")));
            }
        }
        let mut entries = entries;
        // stable sort keeps input order among duplicates; keep the last one
        entries.sort_by_key(|&(u, j, _)| (u, j));
        let mut dedup: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for e in entries {
            match dedup.last_mut() {
                Some(last) if last.0 == e.0 && last.1 == e.1 => *last = e,
                _ => dedup.push(e),
            }
        }
        Ok(RatingsMatrix { n_users, n_items, entries: dedup })
    }

    /// Dense rows; zeros are dropped.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_items = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_items) {
            return Err(Error::input("ragged dense ratings rows"));
        }
        let entries = rows
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().enumerate().filter(|(_, &r)| r != 0.0).map(move |(j, &r)| (u, j, r)))
            .collect();
        RatingsMatrix::new(rows.len(), n_items, entries)
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    /// Non-zero entries sorted by `(user, item)`.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn max_rating(&self) -> f64 {
        self.entries.iter().map(|e| e.2).fold(0.0, f64::max)
    }

    /// Per-user sparse rows `(item, rating)`.
    pub fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.n_users];
        for &(u, j, r) in &self.entries {
            rows[u].push((j, r));
        }
        rows
    }

    pub fn get(&self, user: usize, item: usize) -> f64 {
        self.entries.binary_search_by_key(&(user, item), |&(u, j, _)| (u, j)).map_or(0.0, |i| self.entries[i].2)
    }
}
