//! The residue-class elimination pipeline.
//!
//! Each stage pairs a character chi of odd conductor q with an odd prime r.
//! For a residue class n0 in U_q the congruence
//!
//! ```text
//! n = n0 - q * A_chi(2 n0) / (2 B_chi(2 n0))   (mod r)
//! ```
//!
//! forces n into one class mod r. If the forced class n1 has n1^2 + 1 a
//! square mod r (Kronecker symbol 0 or +1), the class n0 is eliminated;
//! symbol -1 survives and carries the constraint (r, n1) to later stages.
//! A later stage that re-derives a constraint for a modulus already present
//! keeps the survivor only when the two constraints agree.

use crate::arith::{inv_mod, kronecker, prime_divisors};
use crate::charmod::{a_sum, b_sum, m_char, CharacterModI, StageConfig};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SieveError {
    #[error("stage {label}: condition (*) violated: B_chi(2*{n0}) = 0 mod {r}")]
    ConditionStarViolation { label: String, n0: u64, r: u64 },
    #[error("stage {label}: survivor has no constraint for conductor {q}")]
    MissingConstraint { label: String, q: u64 },
    #[error("pipeline requires a first stage matching the initial modulus {0}")]
    InitialModulusMismatch(u64),
    #[error("pipeline has no stages")]
    Empty,
}

/// One character+ideal elimination stage.
#[derive(Debug, Clone)]
pub struct SieveStage {
    pub chi: CharacterModI,
}

impl SieveStage {
    pub fn new(chi: CharacterModI) -> SieveStage {
        SieveStage { chi }
    }

    pub fn conductor(&self) -> u64 {
        self.chi.conductor
    }

    pub fn target_prime(&self) -> u64 {
        self.chi.target_prime
    }
}

impl From<StageConfig> for SieveStage {
    fn from(cfg: StageConfig) -> Self {
        SieveStage::new(cfg.chi)
    }
}

/// A conjunction of (modulus, residue) constraints on n, kept as explicit
/// records rather than CRT-merged so that a re-derived constraint for an
/// existing modulus can be compared instead of merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueConstraint {
    constraints: Vec<(u64, u64)>,
}

impl ResidueConstraint {
    pub fn new(modulus: u64, residue: u64) -> ResidueConstraint {
        ResidueConstraint {
            constraints: vec![(modulus, residue % modulus)],
        }
    }

    pub fn get(&self, modulus: u64) -> Option<u64> {
        self.constraints
            .iter()
            .find(|(m, _)| *m == modulus)
            .map(|(_, v)| *v)
    }

    /// Add or check a constraint. Returns false when the modulus is already
    /// constrained to a different residue (the survivor is incompatible).
    #[must_use]
    pub fn require(&mut self, modulus: u64, residue: u64) -> bool {
        match self.get(modulus) {
            Some(v) => v == residue % modulus,
            None => {
                self.constraints.push((modulus, residue % modulus));
                self.constraints.sort_unstable();
                true
            }
        }
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.constraints
    }
}

impl std::fmt::Display for ResidueConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .constraints
            .iter()
            .map(|(m, v)| format!("{m}:{v}"))
            .collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// One output row of a stage table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableRow {
    pub n0: u64,
    pub a_val: u64,
    pub b_val: u64,
    pub n_mod_r: u64,
    pub symbol: i32,
}

/// Membership in U_m: a^2 + 1 is a quadratic non-residue for every prime
/// divisor of m.
pub fn u_membership(a: u64, m: u64) -> bool {
    debug_assert!(m > 1 && m % 2 == 1);
    prime_divisors(m)
        .into_iter()
        .all(|p| kronecker((a * a + 1) as i64, p as i64) == -1)
}

/// Representatives of U_m in [0, m).
pub fn u_set(m: u64) -> Vec<u64> {
    (0..m).filter(|&a| u_membership(a, m)).collect()
}

/// Condition (*): m_chi lies in the ideal (is 0 mod r) and B_chi(2a) does
/// not, for every residue a in [0, q) belonging to U_q.
pub fn condition_star(stage: &SieveStage) -> bool {
    if m_char(&stage.chi).value != 0 {
        return false;
    }
    u_set(stage.conductor())
        .into_iter()
        .all(|a| b_sum(&stage.chi, 2 * a as i64).value != 0)
}

/// Compute the table row for one residue class.
pub fn stage_row(stage: &SieveStage, n0: u64) -> Result<TableRow, SieveError> {
    let q = stage.conductor();
    let r = stage.target_prime();
    let a_val = a_sum(&stage.chi, 2 * n0 as i64).value;
    let b_val = b_sum(&stage.chi, 2 * n0 as i64).value;
    if b_val == 0 {
        return Err(SieveError::ConditionStarViolation {
            label: stage.chi.label.clone(),
            n0,
            r,
        });
    }
    let inv = inv_mod(2 * b_val % r, r).expect("r prime, 2B nonzero");
    let n_mod_r = (n0 as u128 + (r as u128 * r as u128)
        - (q as u128 % r as u128) * (a_val as u128) % r as u128 * (inv as u128) % r as u128)
        % r as u128;
    let n_mod_r = (n_mod_r % r as u128) as u64;
    let symbol = kronecker((n_mod_r as i64) * (n_mod_r as i64) + 1, r as i64);
    Ok(TableRow {
        n0,
        a_val,
        b_val,
        n_mod_r,
        symbol,
    })
}

/// Run one stage over a survivor list of residues mod the stage conductor.
///
/// Returns (all rows, surviving rows). A row survives exactly when its
/// Kronecker symbol is -1: symbol +1 means n0^2+1 is a square mod r, and
/// symbol 0 means r | n^2+1, both excluded.
pub fn run_stage(
    stage: &SieveStage,
    survivors: &[u64],
) -> Result<(Vec<TableRow>, Vec<TableRow>), SieveError> {
    let mut rows = Vec::with_capacity(survivors.len());
    for &n0 in survivors {
        rows.push(stage_row(stage, n0)?);
    }
    let surviving = rows.iter().copied().filter(|r| r.symbol == -1).collect();
    Ok((rows, surviving))
}

/// Per-stage summary for the pipeline report.
#[derive(Debug, Clone)]
pub struct StageSummary {
    pub label: String,
    pub conductor: u64,
    pub target_prime: u64,
    pub input: usize,
    pub eliminated_by_symbol: usize,
    pub eliminated_by_compatibility: usize,
    pub surviving: usize,
}

/// Full pipeline result: one table per stage plus the surviving constraints.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub tables: Vec<Vec<TableRow>>,
    pub summaries: Vec<StageSummary>,
    pub survivors: Vec<ResidueConstraint>,
}

/// Run the staged pipeline starting from U_{initial_modulus}.
///
/// Each stage reads the survivor's residue for its own conductor, computes
/// the forced class mod its target prime, eliminates symbol 0/+1 rows, and
/// records (or checks) the constraint for the target prime.
pub fn run_pipeline(
    stages: &[SieveStage],
    initial_modulus: u64,
) -> Result<PipelineResult, SieveError> {
    if let Some(first) = stages.first() {
        if first.conductor() != initial_modulus {
            return Err(SieveError::InitialModulusMismatch(initial_modulus));
        }
    }
    let mut survivors: Vec<ResidueConstraint> = u_set(initial_modulus)
        .into_iter()
        .map(|a| ResidueConstraint::new(initial_modulus, a))
        .collect();
    let mut tables = Vec::new();
    let mut summaries = Vec::new();
    for stage in stages {
        let q = stage.conductor();
        let r = stage.target_prime();
        let mut rows = Vec::with_capacity(survivors.len());
        let mut next = Vec::new();
        let mut elim_sym = 0usize;
        let mut elim_compat = 0usize;
        for s in &survivors {
            let n0 = s.get(q).ok_or_else(|| SieveError::MissingConstraint {
                label: stage.chi.label.clone(),
                q,
            })?;
            let row = stage_row(stage, n0)?;
            rows.push(row);
            if row.symbol != -1 {
                elim_sym += 1;
                continue;
            }
            let mut s2 = s.clone();
            if !s2.require(r, row.n_mod_r) {
                elim_compat += 1;
                continue;
            }
            next.push(s2);
        }
        summaries.push(StageSummary {
            label: stage.chi.label.clone(),
            conductor: q,
            target_prime: r,
            input: survivors.len(),
            eliminated_by_symbol: elim_sym,
            eliminated_by_compatibility: elim_compat,
            surviving: next.len(),
        });
        tables.push(rows);
        survivors = next;
    }
    Ok(PipelineResult {
        tables,
        summaries,
        survivors,
    })
}

/// Verdict for the class-number sieve: true iff no residue class survives
/// all stages. The report lists per-stage eliminations.
pub fn theorem2_verdict(stages: &[SieveStage]) -> Result<(bool, String), SieveError> {
    if stages.is_empty() {
        let u = u_set(175);
        return Ok((
            false,
            format!("no stages configured; all {} classes of U_175 survive\n", u.len()),
        ));
    }
    let result = run_pipeline(stages, stages[0].conductor())?;
    let mut report = String::new();
    for s in &result.summaries {
        let _ = writeln!(
            report,
            "stage {} (q={}, r={}): {} classes in, {} eliminated by symbol, {} by compatibility, {} survive",
            s.label, s.conductor, s.target_prime, s.input,
            s.eliminated_by_symbol, s.eliminated_by_compatibility, s.surviving
        );
    }
    let ok = result.survivors.is_empty();
    if ok {
        let _ = writeln!(report, "no residue class survives: verdict verified");
    } else {
        let _ = writeln!(report, "{} classes survive:", result.survivors.len());
        for s in &result.survivors {
            let _ = writeln!(report, "  {s}");
        }
    }
    Ok((ok, report))
}

/// TSV serialization of a stage table (header `n0\tA\tB\tn_mod_r\tkronecker`).
pub fn table_tsv(rows: &[TableRow]) -> String {
    let mut out = String::from("n0\tA\tB\tn_mod_r\tkronecker\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.n0, r.a_val, r.b_val, r.n_mod_r, r.symbol
        );
    }
    out
}

/// TSV serialization of the final survivor constraints.
pub fn survivors_tsv(survivors: &[ResidueConstraint]) -> String {
    let mut out = String::from("constraints\n");
    for s in survivors {
        let _ = writeln!(out, "{s}");
    }
    out
}
