//! Recommended FOCAL settings `(c_cov, α)` by dimension and rank class.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RankClass {
    RankDeficient,
    FullRank,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Table1Row {
    pub n: usize,
    pub rank_deficient: (f64, f64),
    pub full_rank: (f64, f64),
}

impl Table1Row {
    pub fn get(&self, class: RankClass) -> (f64, f64) {
        match class {
            RankClass::RankDeficient => self.rank_deficient,
            RankClass::FullRank => self.full_rank,
        }
    }
}

pub const TABLE1: [Table1Row; 3] = [
    Table1Row {
        n: 30,
        rank_deficient: (0.10, 0.25),
        full_rank: (0.08, 0.19),
    },
    Table1Row {
        n: 50,
        rank_deficient: (0.08, 0.22),
        full_rank: (0.06, 0.15),
    },
    Table1Row {
        n: 80,
        rank_deficient: (0.07, 0.20),
        full_rank: (0.04, 0.10),
    },
];

#[derive(Clone, Debug, PartialEq)]
pub struct Table1Defaults {
    pub c_cov: f64,
    pub alpha: f64,
    /// Set when `n` lies outside the tabulated range and the nearest row was used.
    pub warning: Option<String>,
}

/// Exact rows at the tabulated dimensions, linear interpolation in `ln n`
/// between them, nearest row outside.
pub fn defaults_from_table1(n: usize, class: RankClass) -> Table1Defaults {
    let first = &TABLE1[0];
    let last = &TABLE1[TABLE1.len() - 1];
    let nearest = |row: &Table1Row| {
        let (c_cov, alpha) = row.get(class);
        let warning = format!(
            "n={n} is outside the tabulated range [{}, {}]; using the n={} row",
            first.n, last.n, row.n
        );
        log::warn!("{warning}");
        Table1Defaults {
            c_cov,
            alpha,
            warning: Some(warning),
        }
    };
    if n < first.n {
        return nearest(first);
    }
    if n > last.n {
        return nearest(last);
    }
    let hi = TABLE1
        .iter()
        .position(|r| r.n >= n)
        .unwrap_or(TABLE1.len() - 1);
    let upper = &TABLE1[hi];
    if upper.n == n || hi == 0 {
        let (c_cov, alpha) = upper.get(class);
        return Table1Defaults {
            c_cov,
            alpha,
            warning: None,
        };
    }
    let lower = &TABLE1[hi - 1];
    let t =
        ((n as f64).ln() - (lower.n as f64).ln()) / ((upper.n as f64).ln() - (lower.n as f64).ln());
    let (c0, a0) = lower.get(class);
    let (c1, a1) = upper.get(class);
    Table1Defaults {
        c_cov: c0 + t * (c1 - c0),
        alpha: a0 + t * (a1 - a0),
        warning: None,
    }
}
